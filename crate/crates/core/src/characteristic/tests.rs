use super::*;
use crate::error::Error;
use crate::fixtures::{localized_m_profile, smooth_hull_profile, smooth_m_profile};
use crate::linalg::max_abs_diff;
use crate::profile::{Boundary, Profile, SampleKind, StepProfile, UniformGrid};
use crate::state_geometry::{membership, SetId, StateU};
use crate::wave_family::{dalembert_wave_solve, thm1_example_init, wave_to_augmented, WaveSolution};

fn constant_profile(u: StateU, n: usize, boundary: Boundary) -> Profile<StateU> {
    let g = UniformGrid::covering(-3.0, 6.0, n).unwrap();
    Profile::from_fn(g, boundary, SampleKind::Smooth, |_| u.clone())
}

fn m_state() -> StateU {
    // a+ = 0.6, c+ = 0.8 e1; a- = -0.6, c- = 0.8 e2
    StateU::from_blocks(0.6, &[0.8, 0.0], -0.6, &[0.0, 0.8])
}

#[test]
fn admissibility_of_constant_wave_data() {
    let k = 0.7;
    let u = constant_profile(StateU::zero_vectors(k, 0.0, 2), 16, Boundary::Periodic);
    let a = admissibility(&u).unwrap();
    assert_eq!(a.alpha, 0.0);
    assert!((a.delta - k).abs() < 1e-15);
}

#[test]
fn admissibility_rejects_crossing_characteristics() {
    let g = UniformGrid::covering(0.0, 1.0, 8).unwrap();
    let u = Profile::from_fn(g, Boundary::Periodic, SampleKind::Smooth, |s| {
        if s < 0.5 {
            StateU::zero_vectors(0.2, 0.3, 1)
        } else {
            StateU::zero_vectors(0.2, -0.15, 1)
        }
    });
    match admissibility(&u) {
        Err(Error::Inadmissible { left_index, left_value, right_index, right_value, .. }) => {
            assert!(left_index < 4 && right_index >= 4);
            assert!((left_value - 0.1).abs() < 1e-15);
            assert!((right_value - 0.05).abs() < 1e-15);
        }
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn admissible_profiles_have_slack_at_least_delta() {
    let u = smooth_m_profile(3, 512);
    let a = admissibility(&u).unwrap();
    assert!(a.alpha.abs() < 1e-3);
    assert!(a.min_slack >= a.delta);
    let p = a.params(0.5, 3);
    for s in u.values() {
        assert!(membership(s, SetId::G, &p, 0.0).unwrap());
    }
}

#[test]
fn constant_tau_gives_linear_flow() {
    for boundary in [Boundary::Periodic, Boundary::ConstantExtension] {
        let u = constant_profile(StateU::zero_vectors(0.6, 0.1, 1), 64, boundary);
        let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
        for &y in &[-40.0, -3.3, 0.0, 1.7, 25.0] {
            assert!((flow.xi0(y) - 0.6 * y).abs() < 1e-12 * (1.0 + y.abs()), "{boundary:?} y = {y}");
            for &t in &[-2.0, 0.5, 4.0] {
                let x = flow.xi_evaluate(t, y);
                assert!((x.xi - (0.6 * y + 0.1 * t)).abs() < 1e-12 * (1.0 + y.abs()));
                assert!((x.dxi_dt - 0.1).abs() < 1e-15 && (x.dxi_dy - 0.6).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn wave_data_flow_is_kappa_y() {
    let init = thm1_example_init(3, UniformGrid::default_periodic()).unwrap();
    let u = wave_to_augmented(&init);
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    for &y in &[-11.0, -0.2, 0.0, 3.0, 30.0] {
        assert!((flow.xi0(y) - init.kappa * y).abs() < 1e-12 * (1.0 + y.abs()));
    }
}

#[test]
fn flow_solves_its_ode() {
    for u in [smooth_m_profile(3, 1024), localized_m_profile(2, 1024)] {
        let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
        assert!(flow.ode_residual() < 1e-10, "{}", flow.ode_residual());
        assert_eq!(flow.xi0(0.0), 0.0);
    }
}

#[test]
fn zero_time_is_the_initial_curve() {
    let u = smooth_m_profile(2, 512);
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    for &y in &[-5.0, 0.1, 2.0] {
        let x = flow.xi_evaluate(0.0, y);
        assert_eq!(x.xi, flow.xi0(y));
        let tau = u.eval(x.xi).tau;
        assert!((x.dxi_dy - tau).abs() < 1e-14);
    }
}

#[test]
fn constant_state_is_stationary() {
    let u0 = m_state();
    for boundary in [Boundary::Periodic, Boundary::ConstantExtension] {
        let u = constant_profile(u0.clone(), 32, boundary);
        for t in [-3.0, 0.0, 7.5] {
            let out = solve_augmented(&u, t).unwrap();
            for s in out.values() {
                assert!(s.max_abs_diff(&u0) < 1e-15);
            }
        }
    }
}

#[test]
fn relativistic_data_stay_relativistic() {
    for d in [1, 3] {
        let u = smooth_m_profile(d, 2048);
        let adm = admissibility(&u).unwrap();
        let p = adm.params(0.5, d);
        let flow = CharacteristicFlow::build(&u, adm.slab()).unwrap();
        for t in [5.0, -5.0, 1.0, -1.0, 0.3] {
            for s in flow.solve_on(t, *u.grid()).unwrap().values() {
                assert!(membership(s, SetId::MAlphaDelta, &p, 1e-8).unwrap());
            }
        }
    }
}

#[test]
fn hull_data_stay_in_the_hull() {
    let u = smooth_hull_profile(2, 1024);
    let adm = admissibility(&u).unwrap();
    let p = adm.params(0.5, 2);
    let flow = CharacteristicFlow::build(&u, adm.slab()).unwrap();
    for t in [2.0, -0.7] {
        for s in flow.solve_on(t, *u.grid()).unwrap().values() {
            assert!(membership(s, SetId::CMCapG, &p, 1e-8).unwrap());
            assert!(!membership(s, SetId::M, &p, 1e-4).unwrap());
        }
    }
}

#[test]
fn slopes_stay_in_the_slab() {
    let u = smooth_m_profile(3, 1024);
    let adm = admissibility(&u).unwrap();
    let flow = CharacteristicFlow::build(&u, adm.slab()).unwrap();
    for it in 0..200 {
        let t = -4.0 + 0.04 * it as f64;
        let y = -7.0 + 0.071 * it as f64;
        let x = flow.xi_evaluate(t, y);
        assert!(x.dxi_dy >= adm.delta - 1e-10 && x.dxi_dy <= 1.0 / adm.delta + 1e-10);
    }
}

#[test]
fn string_position_matches_dalembert() {
    let init = thm1_example_init(8, UniformGrid::default_periodic()).unwrap();
    let u = wave_to_augmented(&init);
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    let wave = WaveSolution::new(&init);
    let pi = std::f64::consts::PI;
    let mut err: f64 = 0.0;
    for i in 0..=32 {
        let t = -pi + 2.0 * pi * i as f64 / 32.0;
        for j in 0..=64 {
            let s = -pi + 2.0 * pi * j as f64 / 64.0;
            let a = flow.position(t, s).unwrap();
            let (b, _, _) = wave.eval(t, s);
            err = err.max(max_abs_diff(&a, &b));
        }
    }
    assert!(err < 1e-6, "{err}");
}

#[test]
fn reconstruction_recovers_the_wave_string() {
    let grid = UniformGrid::default_periodic();
    let init = thm1_example_init(4, grid).unwrap();
    let u = wave_to_augmented(&init);
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    let coarse = UniformGrid::covering(grid.start, grid.period(), 512).unwrap();
    let mut errs = Vec::new();
    for dt in [0.1, 0.05] {
        let slices = TimeSlices::from_flow(&flow, coarse, -1.0, dt, (2.0 / dt).round() as usize + 1).unwrap();
        let graphs = reconstruct_x(&slices, init.kappa).unwrap();
        let mut err: f64 = 0.0;
        for g in &graphs {
            let exact = dalembert_wave_solve(&init, g.t).unwrap();
            for (k, x) in g.x.iter().enumerate() {
                let e = &exact.x[k * (grid.len / coarse.len)];
                err = err.max(max_abs_diff(x, e));
            }
            assert!(g.derivative_consistency() < 2e-3);
        }
        errs.push(err);
    }
    assert!(errs[1] < 1e-3, "{errs:?}");
    assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
}

#[test]
fn constant_state_reconstructs_affine_string() {
    let u0 = m_state();
    let u = constant_profile(u0.clone(), 64, Boundary::ConstantExtension);
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    let slices = TimeSlices::from_flow(&flow, *u.grid(), -0.5, 0.25, 5).unwrap();
    let graphs = reconstruct_x(&slices, 0.1).unwrap();
    let (xs, xt) = string_derivatives(&u0);
    for g in &graphs {
        for (k, x) in g.x.iter().enumerate() {
            let s = g.s_grid.point(k);
            for i in 0..2 {
                assert!((x[i] - (xs[i] * s + xt[i] * g.t)).abs() < 1e-13);
            }
        }
    }
    let low = TimeSlices::new(0.0, 1.0, vec![constant_profile(StateU::zero_vectors(0.01, 0.0, 2), 8, Boundary::Periodic)]).unwrap();
    assert!(matches!(reconstruct_x(&low, 0.3), Err(Error::Degenerate(_))));
}

fn augmented_residual_at(flow: &CharacteristicFlow, n: usize, t: f64, ratio: f64) -> f64 {
    let l = 2.0 * std::f64::consts::PI;
    let g = UniformGrid::covering(0.0, l, n).unwrap();
    let dt = ratio * g.step;
    let p = flow.solve_on(t - dt, g).unwrap();
    let m = flow.solve_on(t, g).unwrap();
    let q = flow.solve_on(t + dt, g).unwrap();
    residual_augmented(&p, &m, &q, dt).unwrap().max_abs
}

#[test]
fn augmented_residual_is_second_order() {
    let u = smooth_m_profile(3, 4096);
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    let ns = [64, 128, 256, 512];
    let errs: Vec<f64> = ns.iter().map(|&n| augmented_residual_at(&flow, n, 0.7, 0.5)).collect();
    let h: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let order = convergence_order(&h, &errs);
    assert!(order >= 1.9, "{order} {errs:?}");
}

#[test]
fn xi_solves_the_wave_equation_to_second_order() {
    let u = smooth_m_profile(2, 4096);
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    let ts: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
    let ys: Vec<f64> = (0..41).map(|i| -6.0 + 0.3 * i as f64).collect();
    let dys = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = dys.iter().map(|&dy| xi_wave_residual(&flow, &ts, &ys, 0.5 * dy, dy)).collect();
    let order = convergence_order(&dys, &errs);
    assert!(order >= 1.9, "{order} {errs:?}");
}

#[test]
fn galilean_identity_and_constant_states() {
    let u = constant_profile(m_state(), 32, Boundary::Periodic);
    let adm = admissibility(&u).unwrap();
    let mut p = adm.params(0.5, 2);
    p.delta = 0.5;
    let flow = CharacteristicFlow::build(&u, adm.slab()).unwrap();
    let id = galilean_on_solution(&flow, &u, 0.0, &p).unwrap();
    assert_eq!(id.state(1.0, 0.3).unwrap(), flow.state(1.0, 0.3).unwrap());
    let sh = galilean_on_solution(&flow, &u, 0.05, &p).unwrap();
    let s = sh.state(2.0, 0.1).unwrap();
    assert!((s.v - (m_state().v + 0.05)).abs() < 1e-15);
    assert!(galilean_on_solution(&flow, &u, 0.9, &p).is_err());
}

#[test]
fn galilean_residual_is_comparable() {
    let u = smooth_m_profile(3, 4096);
    let adm = admissibility(&u).unwrap();
    let mut p = adm.params(0.5, 3);
    p.delta = 0.2;
    let flow = CharacteristicFlow::build(&u, adm.slab()).unwrap();
    let g = UniformGrid::covering(0.0, 2.0 * std::f64::consts::PI, 256).unwrap();
    let dt = 0.5 * g.step;
    let base = augmented_residual_at(&flow, 256, 0.7, 0.5);
    let view = galilean_on_solution(&flow, &u, 0.05, &p).unwrap();
    let lv = |t: f64| view.solve_on(t, g).unwrap();
    let shifted = residual_augmented(&lv(0.7 - dt), &lv(0.7), &lv(0.7 + dt), dt).unwrap().max_abs;
    assert!(shifted <= 2.0 * base && base <= 2.0 * shifted, "{base} {shifted}");
}

#[test]
fn finite_propagation_speed() {
    let u = localized_m_profile(2, 1201);
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    let c_max = u.values().iter().map(|s| (s.v + s.tau).abs().max((s.v - s.tau).abs())).fold(0.0, f64::max);
    let t = 1.5;
    let reassembled = |s: &StateU| {
        let (ap, cp) = s.block(crate::state_geometry::SignBranch::Plus);
        let (am, cm) = s.block(crate::state_geometry::SignBranch::Minus);
        StateU::from_blocks(ap, &cp, am, &cm)
    };
    let left = &reassembled(&u.values()[0]);
    let right = &reassembled(&u.values()[u.len() - 1]);
    for k in 0..40 {
        let s = u.grid().end() + t * c_max + 0.05 * (k + 1) as f64;
        assert!(flow.state(t, s).unwrap().max_abs_diff(right) == 0.0);
        let s = u.grid().start - t * c_max - 0.05 * (k + 1) as f64;
        assert!(flow.state(t, s).unwrap().max_abs_diff(left) == 0.0);
    }
}

#[test]
fn semigroup_property() {
    let u = smooth_m_profile(2, 4096);
    let adm = admissibility(&u).unwrap();
    let flow = CharacteristicFlow::build(&u, adm.slab()).unwrap();
    let (t1, t2) = (0.6, 0.9);
    let mid = flow.solve_on(t1, *u.grid()).unwrap();
    let again = CharacteristicFlow::build(&mid, adm.slab()).unwrap();
    let direct = flow.solve_on(t1 + t2, *u.grid()).unwrap();
    let err = again
        .solve_on(t2, *u.grid())
        .unwrap()
        .values()
        .iter()
        .zip(direct.values())
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
}

fn step_data(boundary: Boundary) -> StepProfile<StateU> {
    let states = [
        StateU::from_blocks(0.6, &[0.8, 0.0], -0.6, &[0.0, 0.8]),
        StateU::from_blocks(0.4, &[0.0, 0.9165151389911680], -0.5, &[-0.8660254037844386, 0.0]),
        StateU::from_blocks(0.7, &[0.5, 0.5], -0.35, &[0.3, -0.2]),
    ];
    let breaks = vec![-1.0, -0.2, 0.65, 1.5];
    StepProfile::new(breaks, states.to_vec(), boundary).unwrap()
}

#[test]
fn step_data_fields_are_exact() {
    for boundary in [Boundary::Periodic, Boundary::ConstantExtension] {
        let u = step_data(boundary);
        let adm = admissibility_steps(&u).unwrap();
        let flow = CharacteristicFlow::build_steps(&u, adm.slab()).unwrap();
        assert_eq!(flow.xi0(0.0), 0.0);
        for t in [0.0, 0.37, -1.2, 3.0] {
            let field = flow.step_field(t).unwrap();
            if boundary == Boundary::Periodic {
                assert!((field.period() - 2.5).abs() < 1e-12);
            }
            for j in 0..field.pieces() {
                let s = 0.5 * (field.breaks()[j] + field.breaks()[j + 1]);
                let direct = flow.state(t, s).unwrap();
                assert!(direct.max_abs_diff(&field.values()[j]) == 0.0, "{boundary:?} t = {t} piece {j}");
            }
        }
    }
}

#[test]
fn step_data_conserve_measure_of_h() {
    // int_{xi(t,a)}^{xi(t,b)} h ds = b - a for every t
    let u = step_data(Boundary::Periodic);
    let flow = CharacteristicFlow::build_steps(&u, admissibility_steps(&u).unwrap().slab()).unwrap();
    let (a, b) = (-0.8, 2.1);
    for t in [0.0, 0.5, 2.5] {
        let field = flow.step_field(t).unwrap();
        let (sa, sb) = (flow.xi(t, a), flow.xi(t, b));
        let mut total = 0.0;
        let l = field.period();
        for m in -3..=3 {
            for j in 0..field.pieces() {
                let lo = (field.breaks()[j] + m as f64 * l).max(sa);
                let hi = (field.breaks()[j + 1] + m as f64 * l).min(sb);
                if hi > lo {
                    total += (hi - lo) / field.values()[j].tau;
                }
            }
        }
        assert!((total - (b - a)).abs() < 1e-12, "{total}");
    }
}

#[test]
fn piecewise_constant_profiles_use_step_flows() {
    let g = UniformGrid::covering(0.0, 1.0, 4).unwrap();
    let vals = step_data(Boundary::Periodic).values().to_vec();
    let u = Profile::new(g, Boundary::Periodic, SampleKind::PiecewiseConstant, vec![vals[0].clone(), vals[1].clone(), vals[2].clone(), vals[0].clone()]).unwrap();
    let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
    assert!(flow.is_step_data());
    let out = flow.solve_on(0.0, g).unwrap();
    for (a, b) in out.values().iter().zip(u.values()) {
        assert!(a.max_abs_diff(b) < 1e-15);
    }
}

#[test]
fn residual_string_of_wave_string_is_small() {
    let grid = UniformGrid::default_periodic();
    let init = thm1_example_init(3, grid).unwrap();
    let mut errs = Vec::new();
    for n in [256, 512] {
        let g = UniformGrid::covering(grid.start, grid.period(), n).unwrap();
        let sol = WaveSolution::new(&init);
        let dt = 0.5 * g.step;
        let lv = |t: f64| sol.graph_on(t, g);
        errs.push(residual_string(&lv(0.4 - dt), &lv(0.4), &lv(0.4 + dt), Boundary::Periodic).unwrap().max_abs);
    }
    assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    assert!(errs[1] < 5e-3, "{errs:?}");
}
