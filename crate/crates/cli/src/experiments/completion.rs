use relstring::io::{fmt_f64, ExperimentReport, Table};
use relstring::weak::{run_completion, BaseKind, GalileanSubtest};
use serde_json::json;

use super::Context;
use crate::error::CliError;

/// Oscillate, evolve, pair, extrapolate and verify the limit.
pub fn run(ctx: &Context) -> Result<ExperimentReport, CliError> {
    let cfg = &ctx.config;
    let tol = &ctx.tolerances;
    let mut cc = cfg.completion.clone().unwrap_or_default();
    if let Some(ts) = &cfg.times {
        cc.times = ts.clone();
    }
    if let Some(ns) = &cfg.n_list {
        cc.n_values = ns.iter().map(|&n| n as f64).collect();
    }
    if cfg.family.is_some() {
        cc.family = cfg.family.clone();
    }
    cc.validate()?;
    let rep = run_completion(&cc)?;

    let mut table = Table::new(&["n", "g_id", "t", "gap"]);
    for r in &rep.gap_rows {
        table.push(vec![fmt_f64(r.n), r.g_id.clone(), fmt_f64(r.t), fmt_f64(r.gap)])?;
    }
    ctx.out.write("convergence_table.csv", &table.to_csv_string()?)?;
    let mut dist = Table::new(&["n", "t", "weak_distance"]);
    for (i, row) in rep.distances.iter().enumerate() {
        for (j, d) in row.iter().enumerate() {
            dist.push(vec![fmt_f64(rep.effective_n[i]), fmt_f64(rep.times[j]), fmt_f64(*d)])?;
        }
    }
    ctx.out.write("weak_distances.csv", &dist.to_csv_string()?)?;

    let mut report = ExperimentReport::new("completion", json!({ "config": cc, "manifold": rep.params }));
    let [lo, hi] = tol.slope_band;
    let in_band = |x: f64| x >= lo && x <= hi;
    report.record("oscillation_in_m", rep.oscillation_in_m, json!({ "cell_average_defect": rep.cell_average_defect }));
    match cc.base {
        BaseKind::Hull => {
            report.record("weak_decay_slope", in_band(rep.slope), json!({ "slope": rep.slope, "band": tol.slope_band }));
            report.record("uniform_in_time", rep.time_ratio < tol.time_ratio, json!({ "ratio": rep.time_ratio, "bound": tol.time_ratio }));
            report.record(
                "layout_independence",
                in_band(rep.reversed_slope),
                json!({ "reversed_slope": rep.reversed_slope, "reversed_distances": rep.reversed_distances }),
            );
        }
        BaseKind::Relativistic => {
            // a base already in M is its own decomposition; what is left of
            // the gap is the cell sampling error, of second order
            let ok = rep.max_pieces == 1 && rep.slope >= lo && rep.reversed_slope >= lo;
            report.record(
                "oscillation_trivial",
                ok,
                json!({ "max_pieces": rep.max_pieces, "slope": rep.slope, "reversed_slope": rep.reversed_slope }),
            );
        }
    }
    report.record("strong_string_convergence", rep.x_slope >= lo, json!({ "x_sup": rep.x_sup, "slope": rep.x_slope }));
    let id = &rep.identities;
    report.record(
        "generalized_solution_identities",
        id.passes(tol.identity),
        json!({ "h": id.max_h(), "q": id.max_q(), "yz": id.max_yz(), "tol": tol.identity }),
    );
    report.record("limit_in_cm_cap_g", rep.limit_in_cm_cap_g, json!({ "probes": rep.probes.len() }));
    match cc.base {
        BaseKind::Hull => {
            let flag = rep.non_relativistic_limit(tol.identity);
            report.record("non_relativistic_limit", flag, json!({ "limit is non-relativistic generalized string": flag }));
        }
        BaseKind::Relativistic => {
            let same = rep.limit_vs_direct <= tol.identity && rep.limit_in_m;
            report.record("limit_equals_base", same, json!({ "limit_vs_direct": rep.limit_vs_direct, "limit_in_m": rep.limit_in_m }));
        }
    }
    match &rep.galilean {
        GalileanSubtest::Skipped { reason } => report.record("galilean_subtest", true, json!({ "skipped": reason })),
        GalileanSubtest::Ran { shift, distance, reference, pass } => {
            report.record("galilean_subtest", *pass, json!({ "shift": shift, "distance": distance, "reference": reference }))
        }
    }
    Ok(report)
}
