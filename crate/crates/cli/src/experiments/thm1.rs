use relstring::io::{fmt_f64, ExperimentReport, Table};
use relstring::wave_family::{thm1_sup_error, THM1_KAPPA};
use relstring::UniformGrid;
use serde_json::json;

use super::Context;
use crate::error::CliError;

/// Sup-norm gaps of the oscillating wave family to its limit over
/// `[-2 pi, 2 pi]^2`, one row per `n`.
pub fn run(ctx: &Context) -> Result<ExperimentReport, CliError> {
    let cfg = &ctx.config;
    let ns = cfg.n_list.clone().ok_or_else(|| CliError::Config("thm1 needs n_list".into()))?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let data = UniformGrid::covering(-two_pi, 2.0 * two_pi, cfg.thm1.data_samples)?;
    let axis = UniformGrid::linspace(-two_pi, two_pi, cfg.thm1.axis_points)?;
    let band = ctx.tolerances.rate_band;
    let mut report = ExperimentReport::new(
        "thm1",
        json!({ "kappa": THM1_KAPPA, "n_list": ns, "data_samples": data.len, "axis_points": axis.len, "rate_band": band }),
    );
    let mut table = Table::new(&["n", "sup_error", "ratio"]);
    let mut prev: Option<f64> = None;
    for &n in &ns {
        let err = thm1_sup_error(n, data, &axis, &axis)?;
        let ratio = prev.map(|p| p / err);
        table.push(vec![n.to_string(), fmt_f64(err), ratio.map(fmt_f64).unwrap_or_default()])?;
        if let Some(r) = ratio {
            report.record(&format!("rate[n={n}]"), r >= band[0] && r <= band[1], json!({ "sup_error": err, "ratio": r }));
        } else {
            report.record(&format!("sup_error[n={n}]"), err.is_finite(), json!({ "sup_error": err }));
        }
        prev = Some(err);
    }
    ctx.out.write("thm1_rates.csv", &table.to_csv_string()?)?;
    Ok(report)
}
