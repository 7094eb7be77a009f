//! First-order finite-volume integration of the conservative `(Y, Z)`
//! string system, used to cross-check the characteristic solver.
//!
//! `Y_t + ((Z + qY)/h)_s = 0`, `Z_t + ((Y + qZ)/h)_s = 0` with `q = Y.Z`
//! and `h = sqrt(1 + Y^2 + Z^2 + q^2)` derived per cell.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Boundary, Profile, SampleKind, UniformGrid};
use crate::state_geometry::{dual_vars, from_rescaled, hamiltonian, to_rescaled, StateHQYZ, StateU};

pub const CFL: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct Flux {
    pub fy: Vec<f64>,
    pub fz: Vec<f64>,
    pub fh: f64,
    pub fq: f64,
}

/// Fluxes of `Y`, `Z` and of the derived densities `h`, `q`.
pub fn flux(y: &[f64], z: &[f64]) -> Flux {
    let (h, q) = hamiltonian(y, z);
    let (v, w) = dual_vars(y, z);
    Flux { fy: w, fz: v, fh: q, fq: (q * q - 1.0) / h }
}

/// `|v| + tau` of the rescaled state.
pub fn wave_speed(y: &[f64], z: &[f64]) -> f64 {
    let (h, q) = hamiltonian(y, z);
    (q.abs() + 1.0) / h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservativeState {
    pub grid: UniformGrid,
    pub boundary: Boundary,
    pub t: f64,
    pub y: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub h: f64,
    pub q: f64,
}

impl ConservativeState {
    /// Cell-centre values `(Y, Z) = (eta, zeta) / tau` of a rescaled profile.
    pub fn from_profile(u: &Profile<StateU>) -> Result<Self> {
        let mut y = Vec::with_capacity(u.len());
        let mut z = Vec::with_capacity(u.len());
        for s in u.values() {
            let w = from_rescaled(s)?;
            y.push(w.y);
            z.push(w.z);
        }
        Ok(Self { grid: *u.grid(), boundary: u.boundary(), t: 0.0, y, z })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn cell(&self, k: usize) -> StateHQYZ {
        StateHQYZ::relativistic(self.y[k].clone(), self.z[k].clone())
    }

    pub fn to_profile(&self) -> Profile<StateU> {
        let values = (0..self.len()).map(|k| to_rescaled(&self.cell(k)).expect("h >= 1")).collect();
        Profile::new(self.grid, self.boundary, SampleKind::Smooth, values).expect("same grid")
    }

    pub fn max_speed(&self) -> f64 {
        self.y.iter().zip(&self.z).map(|(y, z)| wave_speed(y, z)).fold(0.0, f64::max)
    }

    /// Largest stable step `CFL ds / max(|v| + tau)`.
    pub fn cfl_bound(&self) -> f64 {
        CFL * self.grid.step / self.max_speed()
    }

    fn neighbour(&self, k: i64) -> usize {
        let n = self.len() as i64;
        match self.boundary {
            Boundary::Periodic => k.rem_euclid(n) as usize,
            Boundary::ConstantExtension => k.clamp(0, n - 1) as usize,
        }
    }

    /// One local Lax-Friedrichs step.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let bound = self.cfl_bound();
        if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, bound });
        }
        let n = self.len();
        let d = self.y[0].len();
        // interface k + 1/2 between cells k and k + 1, k = -1..n-1
        let iface: Vec<(Vec<f64>, Vec<f64>)> = (-1..n as i64)
            .into_par_iter()
            .map(|k| {
                let (l, r) = (self.neighbour(k), self.neighbour(k + 1));
                let (fl, fr) = (flux(&self.y[l], &self.z[l]), flux(&self.y[r], &self.z[r]));
                let lam = wave_speed(&self.y[l], &self.z[l]).max(wave_speed(&self.y[r], &self.z[r]));
                let fy = (0..d).map(|i| 0.5 * (fl.fy[i] + fr.fy[i]) - 0.5 * lam * (self.y[r][i] - self.y[l][i])).collect();
                let fz = (0..d).map(|i| 0.5 * (fl.fz[i] + fr.fz[i]) - 0.5 * lam * (self.z[r][i] - self.z[l][i])).collect();
                (fy, fz)
            })
            .collect();
        let c = dt / self.grid.step;
        for k in 0..n {
            let (lo, hi) = (&iface[k], &iface[k + 1]);
            for i in 0..d {
                self.y[k][i] -= c * (hi.0[i] - lo.0[i]);
                self.z[k][i] -= c * (hi.1[i] - lo.1[i]);
            }
        }
        self.t += dt;
        Ok(())
    }

    /// March to `t_end` with the largest stable steps, landing exactly.
    pub fn run_to(&mut self, t_end: f64) -> Result<usize> {
        let mut steps = 0;
        while self.t < t_end {
            let remaining = t_end - self.t;
            let dt = self.cfl_bound().min(remaining);
            self.step(dt)?;
            steps += 1;
            if remaining - dt <= 1e-14 * t_end.abs().max(1.0) {
                self.t = t_end;
            }
        }
        Ok(steps)
    }
}

/// `sum ds (Y, Z, h, q)` over cells.
pub fn conservation_totals(state: &ConservativeState) -> Totals {
    let d = state.y[0].len();
    let ds = state.grid.step;
    let mut t = Totals { y: vec![0.0; d], z: vec![0.0; d], h: 0.0, q: 0.0 };
    for (y, z) in state.y.iter().zip(&state.z) {
        let (h, q) = hamiltonian(y, z);
        for i in 0..d {
            t.y[i] += ds * y[i];
            t.z[i] += ds * z[i];
        }
        t.h += ds * h;
        t.q += ds * q;
    }
    t
}

/// Totals of `h` and `q` for a rescaled profile: `sum ds / tau`, `sum ds v / tau`.
pub fn profile_totals(u: &Profile<StateU>) -> (f64, f64) {
    let ds = u.grid().step;
    u.values().iter().fold((0.0, 0.0), |(h, q), s| (h + ds / s.tau, q + ds * s.v / s.tau))
}

/// Discrete `L1` distance `sum ds |(Y, Z) - (Y', Z')|_1` to a rescaled profile
/// on the same grid.
pub fn l1_distance(state: &ConservativeState, exact: &Profile<StateU>) -> Result<f64> {
    if exact.grid() != &state.grid {
        return Err(Error::precondition("L1 distance needs matching grids"));
    }
    let ds = state.grid.step;
    let mut total = 0.0;
    for (k, s) in exact.values().iter().enumerate() {
        let w = from_rescaled(s)?;
        for i in 0..w.y.len() {
            total += ds * ((state.y[k][i] - w.y[i]).abs() + (state.z[k][i] - w.z[i]).abs());
        }
    }
    Ok(total)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::{admissibility, CharacteristicFlow};
    use crate::fixtures::smooth_m_profile;

    /// Flux algebra written out by components for `d = 2`.
    fn expanded(y: [f64; 2], z: [f64; 2]) -> ([f64; 2], [f64; 2], f64, f64) {
        let q = y[0] * z[0] + y[1] * z[1];
        let h = (1.0 + y[0] * y[0] + y[1] * y[1] + z[0] * z[0] + z[1] * z[1] + q * q).sqrt();
        (
            [(z[0] + q * y[0]) / h, (z[1] + q * y[1]) / h],
            [(y[0] + q * z[0]) / h, (y[1] + q * z[1]) / h],
            q,
            (q * q - 1.0) / h,
        )
    }

    #[test]
    fn flux_examples() {
        let f = flux(&[0.0], &[0.0]);
        assert_eq!((f.fy, f.fz, f.fh, f.fq), (vec![0.0], vec![0.0], 0.0, -1.0));
        let f = flux(&[1.0], &[1.0]);
        assert_eq!((f.fy, f.fz, f.fh, f.fq), (vec![1.0], vec![1.0], 1.0, 0.0));
        let mut seed = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..200 {
            let (y, z) = ([next(), next()], [next(), next()]);
            let f = flux(&y, &z);
            let (fy, fz, fh, fq) = expanded(y, z);
            for i in 0..2 {
                assert!((f.fy[i] - fy[i]).abs() < 1e-14 && (f.fz[i] - fz[i]).abs() < 1e-14);
            }
            assert!((f.fh - fh).abs() < 1e-14 && (f.fq - fq).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_state_is_unchanged() {
        let g = UniformGrid::covering(0.0, 1.0, 16).unwrap();
        let u0 = StateU::from_blocks(0.6, &[0.8], -0.6, &[-0.8]);
        let u = Profile::from_fn(g, Boundary::Periodic, SampleKind::Smooth, |_| u0.clone());
        let mut st = ConservativeState::from_profile(&u).unwrap();
        let before = st.clone();
        let t0 = conservation_totals(&st);
        st.run_to(0.5).unwrap();
        assert_eq!(st.y, before.y);
        assert_eq!(st.z, before.z);
        assert_eq!(conservation_totals(&st), t0);
    }

    #[test]
    fn periodic_totals_are_conserved() {
        let u = smooth_m_profile(3, 256);
        let mut st = ConservativeState::from_profile(&u).unwrap();
        let t0 = conservation_totals(&st);
        let dt = st.cfl_bound();
        for _ in 0..100 {
            st.step(dt).unwrap();
        }
        let t1 = conservation_totals(&st);
        for i in 0..3 {
            assert!((t1.y[i] - t0.y[i]).abs() < 1e-12);
            assert!((t1.z[i] - t0.z[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let u = smooth_m_profile(1, 64);
        let mut st = ConservativeState::from_profile(&u).unwrap();
        let b = st.cfl_bound();
        assert!(matches!(st.step(1.5 * b), Err(Error::Cfl { .. })));
    }

    #[test]
    fn converges_to_the_characteristic_solution() {
        let fine = smooth_m_profile(2, 4096);
        let flow = CharacteristicFlow::build(&fine, admissibility(&fine).unwrap().slab()).unwrap();
        let mut errs = Vec::new();
        for n in [100, 200, 400] {
            let u = smooth_m_profile(2, n);
            let mut st = ConservativeState::from_profile(&u).unwrap();
            st.run_to(1.0).unwrap();
            let exact = flow.solve_on(1.0, *u.grid()).unwrap();
            errs.push(l1_distance(&st, &exact).unwrap());
        }
        assert!(errs[0] / errs[1] >= 1.7 && errs[1] / errs[2] >= 1.7, "{errs:?}");
    }

    #[test]
    fn exact_solution_keeps_h_and_q_totals() {
        let u = smooth_m_profile(3, 2048);
        let flow = CharacteristicFlow::build(&u, admissibility(&u).unwrap().slab()).unwrap();
        let (h0, q0) = profile_totals(&u);
        for t in [1.0, 2.0] {
            let (h, q) = profile_totals(&flow.solve_on(t, *u.grid()).unwrap());
            assert!((h - h0).abs() < 1e-6 && (q - q0).abs() < 1e-6);
        }
    }

    #[test]
    fn finite_volume_h_drift_vanishes_under_refinement() {
        let mut drift = Vec::new();
        for n in [100, 200, 400] {
            let u = smooth_m_profile(2, n);
            let mut st = ConservativeState::from_profile(&u).unwrap();
            let h0 = conservation_totals(&st).h;
            st.run_to(1.0).unwrap();
            drift.push((conservation_totals(&st).h - h0).abs());
        }
        let order = (drift[0] / drift[2]).log2() / 2.0;
        assert!(order >= 0.8, "{drift:?}");
    }

    #[test]
    fn derived_pair_is_coherent() {
        let u = smooth_m_profile(3, 128);
        let st = ConservativeState::from_profile(&u).unwrap();
        for k in 0..st.len() {
            let c = st.cell(k);
            let q: f64 = c.y.iter().zip(&c.z).map(|(a, b)| a * b).sum();
            assert_eq!(c.q, q);
        }
    }
}
