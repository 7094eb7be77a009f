use relstring::characteristic::{admissibility, residual_augmented, CharacteristicFlow, Slab};
use relstring::conservative::{l1_distance, ConservativeState};
use relstring::io::{profile_snapshot, ExperimentReport, SnapshotMeta};
use relstring::state_geometry::{from_rescaled, membership, SetId};
use relstring::wave_family::WaveSolution;
use relstring::{Boundary, SampleKind};
use serde_json::json;

use super::Context;
use crate::error::CliError;
use crate::initial::build_initial;

/// Evolve initial data exactly, write snapshots and check the invariants
/// that apply to the data.
pub fn run(ctx: &Context) -> Result<ExperimentReport, CliError> {
    let cfg = &ctx.config;
    let tol = &ctx.tolerances;
    let init = build_initial(cfg)?;
    let u0 = &init.profile;
    let adm = admissibility(u0)?;
    let d = u0.values()[0].dim();
    let params = match &cfg.params {
        Some(p) => {
            let p = p.to_params()?;
            if p.d != d {
                return Err(CliError::Config(format!("params.d = {} but the initial data have d = {d}", p.d)));
            }
            p
        }
        None => adm.params(0.5, d),
    };
    let flow = CharacteristicFlow::build(u0, Slab::from(&params))?;
    let grid = *u0.grid();
    let times = cfg.times.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0]);

    let mut report = ExperimentReport::new(
        "simulate",
        json!({
            "alpha": params.alpha, "delta": params.delta, "d": d,
            "grid": grid, "boundary": u0.boundary(), "times": times,
        }),
    );
    let on_m = u0.values().iter().all(|u| membership(u, SetId::M, &params, tol.constraint).unwrap_or(false));
    let smooth = u0.kind() == SampleKind::Smooth;
    for (i, &t) in times.iter().enumerate() {
        let u = flow.solve_on(t, grid)?;
        let name = format!("snapshot_{i:03}");
        ctx.out.write(&format!("{name}.csv"), &profile_snapshot(&u)?.to_csv_string()?)?;
        ctx.out.write(&format!("{name}.json"), &SnapshotMeta::of("simulate", t, &u).to_json()?)?;

        let mut hull = true;
        for x in u.values() {
            hull &= membership(x, SetId::CMCapG, &params, tol.membership)?;
        }
        report.record(&format!("hull_invariance[t={t}]"), hull, json!({ "tol": tol.membership }));
        if on_m {
            let (s, c) = u.values().iter().fold((0.0f64, 0.0f64), |(s, c), x| {
                (s.max((x.sum_squares() - 1.0).abs()), c.max(x.cross_defect().abs()))
            });
            report.record(
                &format!("constraint_preserved[t={t}]"),
                s <= tol.constraint && c <= tol.constraint,
                json!({ "sum_squares": s, "cross": c, "tol": tol.constraint }),
            );
        }
        if smooth {
            let dt = 0.5 * grid.step;
            let r = residual_augmented(&flow.solve_on(t - dt, grid)?, &u, &flow.solve_on(t + dt, grid)?, dt)?.max_abs;
            report.record(&format!("augmented_residual[t={t}]"), r <= tol.residual, json!({ "max_abs": r, "tol": tol.residual }));
        }
        // the conservative scheme closes h = H(Y, Z), which holds on M only
        if on_m && smooth && u0.boundary() == Boundary::Periodic && t > 0.0 {
            let mut fv = ConservativeState::from_profile(u0)?;
            fv.run_to(t)?;
            let gap = l1_distance(&fv, &u)?;
            let mut norm = 0.0;
            for x in u.values() {
                let w = from_rescaled(x)?;
                norm += grid.step * w.y.iter().chain(&w.z).map(|v| v.abs()).sum::<f64>();
            }
            let rel = gap / norm.max(1.0);
            report.record(
                &format!("finite_volume_agreement[t={t}]"),
                rel <= tol.cross_solver,
                json!({ "l1": gap, "relative": rel, "tol": tol.cross_solver }),
            );
        }
        if let Some(wave) = &init.wave {
            let sol = WaveSolution::new(wave);
            let origin = sol.eval(0.0, 0.0).0;
            let mut err: f64 = 0.0;
            for k in (0..grid.len).step_by((grid.len / 64).max(1)) {
                let s = grid.point(k);
                let a = flow.position(t, s)?;
                let b = sol.eval(t, s).0;
                for j in 0..d {
                    err = err.max((a[j] + origin[j] - b[j]).abs());
                }
            }
            report.record(&format!("dalembert_agreement[t={t}]"), err <= tol.position, json!({ "sup": err, "tol": tol.position }));
        }
    }
    Ok(report)
}
