use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relstring::characteristic::{build_flow, CharacteristicFlow};
use relstring::conservative::{conservation_totals, ConservativeState};
use relstring::fixtures::smooth_m_profile;
use relstring::io::ExperimentReport;
use relstring::state_geometry::{
    decompose_to_m, dual_vars, embed_from_gradient, from_rescaled, hamiltonian, lagrangian, lagrangian_radicand, m_verdicts, membership,
    to_rescaled,
};
use relstring::wave_family::{check_relativistic_init, thm1_example_init, WaveSolution, relativistic_defect};
use relstring::weak::{oscillate_profile, Layout};
use relstring::{ManifoldParams, SetId, StateU, UniformGrid};
use serde_json::json;

use super::Context;
use crate::error::CliError;

const ALPHA: f64 = 0.0;
const DELTA: f64 = 0.2;

fn on_sphere(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return x.into_iter().map(|v| r * v / n).collect();
        }
    }
}

/// Block state in `G_{alpha, delta}`; `shrink` scales both block radii.
fn slab_state(rng: &mut ChaCha8Rng, d: usize, shrink: bool) -> StateU {
    let ap = rng.random_range((ALPHA + DELTA)..1.0);
    let am = rng.random_range(-1.0..(ALPHA - DELTA));
    let (fp, fm) = if shrink { (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)) } else { (1.0, 1.0) };
    let cp = on_sphere(rng, d, fp * (1.0 - ap * ap).sqrt());
    let cm = on_sphere(rng, d, fm * (1.0 - am * am).sqrt());
    StateU::from_blocks(ap, &cp, am, &cm)
}

fn vec_in(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-r..r)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sup_W Z.W - L(Y, W)` by nested grid search over `|W_i| <= sqrt(1 + |Y|^2)`.
fn brute_force_h(y: &[f64], z: &[f64]) -> f64 {
    let d = y.len();
    let objective = |w: &[f64]| {
        if lagrangian_radicand(y, w) < 0.0 {
            return f64::NEG_INFINITY;
        }
        dot(z, w) - lagrangian(y, w).unwrap_or(f64::INFINITY)
    };
    let mut center = vec![0.0; d];
    let mut half = (1.0 + dot(y, y)).sqrt();
    let mut best = objective(&center);
    for k in [24usize, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8] {
        let mut best_w = center.clone();
        let mut w = vec![0.0; d];
        for idx in 0..(k + 1).pow(d as u32) {
            let mut r = idx;
            for c in 0..d {
                w[c] = center[c] - half + 2.0 * half * (r % (k + 1)) as f64 / k as f64;
                r /= k + 1;
            }
            let f = objective(&w);
            if f > best {
                best = f;
                best_w.copy_from_slice(&w);
            }
        }
        center = best_w;
        half *= 2.5 / k as f64;
    }
    best
}

/// Seeded checks of the structural identities; deterministic in the seed.
pub fn run(ctx: &Context) -> Result<ExperimentReport, CliError> {
    let spec = &ctx.config.validate;
    let tol = &ctx.tolerances;
    let eq = tol.equality;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut report = ExperimentReport::new(
        "validate",
        json!({ "seed": ctx.seed, "alpha": ALPHA, "delta": DELTA, "suite": spec, "equality": eq }),
    );

    // the brute force is costly, so Legendre stays in d <= 2
    let mut worst = 0.0f64;
    let mut sym = 0.0f64;
    for k in 0..spec.legendre_states {
        let d = 1 + k % 2;
        let (y, z) = (vec_in(&mut rng, d, 1.5), vec_in(&mut rng, d, 1.5));
        let (h, q) = hamiltonian(&y, &z);
        worst = worst.max((h - brute_force_h(&y, &z)).abs());
        sym = sym.max((q - dot(&y, &z)).abs());
    }
    report.record("legendre_duality", worst < 1e-4 && sym <= eq, json!({ "max_gap": worst, "q_gap": sym, "states": spec.legendre_states }));

    let (mut pair, mut radicand) = (0.0f64, f64::INFINITY);
    let (mut embed, mut tau_min) = (0.0f64, f64::INFINITY);
    let mut trip = 0.0f64;
    for k in 0..spec.random_states {
        let d = 1 + k % 4;
        let (y, z) = (vec_in(&mut rng, d, 5.0), vec_in(&mut rng, d, 5.0));
        let (v, w) = dual_vars(&y, &z);
        pair = pair.max((dot(&w, &v) - dot(&y, &z)).abs() / (1.0 + dot(&y, &z).abs()));
        radicand = radicand.min(lagrangian_radicand(&y, &w));

        let (y, w) = (vec_in(&mut rng, d, 3.0), vec_in(&mut rng, d, 0.5));
        let u = embed_from_gradient(&y, &w)?;
        embed = embed.max((u.sum_squares() - 1.0).abs()).max(u.cross_defect().abs());
        tau_min = tau_min.min(u.tau);

        let u = StateU::new(rng.random_range(0.2..1.0), rng.random_range(-1.0..1.0), vec_in(&mut rng, d, 1.0), vec_in(&mut rng, d, 1.0))?;
        let back = to_rescaled(&from_rescaled(&u)?)?;
        trip = trip.max(u.max_abs_diff(&back));
    }
    report.record("dual_identity", pair <= eq && radicand > 0.0, json!({ "max_relative_gap": pair, "min_radicand": radicand }));
    report.record("embedding_constraint", embed <= eq && tau_min > 0.0, json!({ "max_defect": embed, "min_tau": tau_min }));
    report.record("transform_round_trip", trip <= 1e-14, json!({ "max_error": trip }));

    let mut disagree = 0usize;
    for k in 0..spec.verdict_states {
        let d = 1 + k % 4;
        let mut u = slab_state(&mut rng, d, false);
        if k % 2 == 1 {
            let e = rng.random_range(1e-6..0.3);
            u.tau += if rng.random_bool(0.5) { e } else { -e };
        }
        let (quad, block) = m_verdicts(&u, 1e-10);
        disagree += usize::from(quad != block);
    }
    report.record("verdict_agreement", disagree == 0, json!({ "states": spec.verdict_states, "disagreements": disagree }));

    let (mut recombine, mut outside, mut weights) = (0.0f64, 0usize, 0.0f64);
    let hull: Vec<StateU> = (0..spec.random_states).map(|k| slab_state(&mut rng, 1 + k % 4, true)).collect();
    for u in &hull {
        let p = ManifoldParams::new(ALPHA, DELTA, 0.5, u.dim())?;
        let dec = decompose_to_m(u, &p)?;
        recombine = recombine.max(dec.recombine().max_abs_diff(u));
        weights = weights.max((dec.weight_sum() - 1.0).abs());
        for (_, x) in &dec.points {
            outside += usize::from(!membership(x, SetId::MAlphaDelta, &p, eq)?);
        }
    }
    if ctx.inject_fault {
        // an off-M state posing as a decomposition point
        let p = ManifoldParams::new(ALPHA, DELTA, 0.5, 1)?;
        outside += usize::from(!membership(&StateU::zero_vectors(0.5, 0.0, 1), SetId::MAlphaDelta, &p, eq)?);
    }
    report.record(
        "decomposition",
        recombine <= eq && weights <= eq && outside == 0,
        json!({ "states": hull.len() + usize::from(ctx.inject_fault), "recombination_error": recombine, "weight_error": weights, "points_off_m": outside }),
    );

    let mut off_hull = 0usize;
    for k in 0..spec.random_states {
        let d = 1 + k % 4;
        let (a, b) = (slab_state(&mut rng, d, false), slab_state(&mut rng, d, false));
        let l = rng.random_range(0.0..=1.0);
        let mix: Vec<f64> = a.to_flat().iter().zip(b.to_flat()).map(|(x, y)| l * x + (1.0 - l) * y).collect();
        let p = ManifoldParams::new(ALPHA, DELTA, 0.5, d)?;
        off_hull += usize::from(!membership(&StateU::from_flat(&mix)?, SetId::CMCapG, &p, eq)?);
    }
    report.record("hull_convexity", off_hull == 0, json!({ "segments": spec.random_states, "outside": off_hull }));

    let base = smooth_m_profile(2, 128).map(|u| {
        let b = u.blocks();
        let (ap, cp) = &b.plus;
        let (am, cm) = &b.minus;
        let s = |c: &Vec<f64>| c.iter().map(|x| 0.5 * x).collect::<Vec<_>>();
        StateU::from_blocks(*ap, &s(cp), *am, &s(cm))
    });
    let p = relstring::characteristic::admissibility(&base)?.params(0.5, 2);
    let plan = oscillate_profile(&base, 16.0, &p, Layout::Forward)?;
    let field = plan.field()?;
    let mut osc_off = 0usize;
    for u in field.values() {
        osc_off += usize::from(!membership(u, SetId::MAlphaDelta, &p, 1e-9)?);
    }
    report.record(
        "oscillation_in_m",
        osc_off == 0,
        json!({ "pieces": field.values().len(), "outside": osc_off, "cell_average_defect": plan.cell_average_defect() }),
    );

    let smooth = smooth_m_profile(2, 256);
    let mut fv = ConservativeState::from_profile(&smooth)?;
    let before = conservation_totals(&fv);
    fv.run_to(0.5)?;
    let after = conservation_totals(&fv);
    let drift = before.y.iter().zip(&after.y).chain(before.z.iter().zip(&after.z)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report.record("finite_volume_conservation", drift <= 1e-12, json!({ "max_drift": drift, "t": 0.5 }));

    let flow: CharacteristicFlow = build_flow(&smooth, &relstring::characteristic::admissibility(&smooth)?.params(0.5, 2))?;
    let mut defect = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        let u = flow.solve_on(t, *smooth.grid())?;
        for s in u.values() {
            defect = defect.max((s.sum_squares() - 1.0).abs()).max(s.cross_defect().abs());
        }
    }
    report.record("characteristic_constraint", defect <= tol.constraint, json!({ "max_defect": defect }));

    let grid = UniformGrid::covering(-2.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI, 1024)?;
    let init = thm1_example_init(4, grid)?;
    let sol = WaveSolution::new(&init);
    let mut wave = 0.0f64;
    for t in [0.0, 0.7, 1.9] {
        let (xs, xt): (Vec<_>, Vec<_>) = grid.points().map(|s| {
            let (_, a, b) = sol.eval(t, s);
            (a, b)
        }).unzip();
        wave = wave.max(relativistic_defect(init.kappa, &xs, &xt));
    }
    report.record(
        "wave_constraint",
        check_relativistic_init(&init, tol.constraint) && wave <= tol.constraint,
        json!({ "max_defect": wave }),
    );
    Ok(report)
}
