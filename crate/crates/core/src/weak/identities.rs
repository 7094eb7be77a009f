use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pairing::PairingTable;
use super::test_function::TestFunction;
use crate::characteristic::CharacteristicFlow;
use crate::error::Result;
use crate::quadrature::integrate_vec;
use crate::state_geometry::SignBranch;

/// Residuals of the weak solution identities at one time, maximised over
/// the test family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub t: f64,
    /// `int g h ds = int g(xi(t, y)) dy`
    pub h: f64,
    /// `int (q + eps) g ds = int a_eps(0, xi0(y)) g(xi(t, y - eps t)) dy`
    pub q: f64,
    /// `int (Y - eps Z) g ds = int c_eps(0, xi0(y)) g(xi(t, y - eps t)) dy`
    pub yz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub per_time: Vec<IdentityResiduals>,
}

impl IdentityReport {
    pub fn max_h(&self) -> f64 {
        self.per_time.iter().map(|r| r.h).fold(0.0, f64::max)
    }

    pub fn max_q(&self) -> f64 {
        self.per_time.iter().map(|r| r.q).fold(0.0, f64::max)
    }

    pub fn max_yz(&self) -> f64 {
        self.per_time.iter().map(|r| r.yz).fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.max_h().max(self.max_q()).max(self.max_yz())
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Right-hand sides in Lagrangian coordinates:
/// `[h, q+1, q-1, (Y-Z)_1..d, (Y+Z)_1..d]`.
pub fn lagrangian_sides(flow: &CharacteristicFlow, t: f64, g: &TestFunction) -> Result<Vec<f64>> {
    let d = flow.dim();
    let width = 3 + 2 * d;
    let (lo, hi) = g.support();
    let (y_lo, y_hi) = (flow.locate(t, lo)?, flow.locate(t, hi)?);
    let reach = t.abs() + 1e-9;
    let (a, b) = (y_lo - reach, y_hi + reach);
    let mut breaks = Vec::new();
    for k in g.kinks() {
        let y = flow.locate(t, k)?;
        breaks.extend([y, y + t, y - t]);
    }
    breaks.extend(flow.y_breaks_between(a, b));
    // xi_y = tau <= 1, so g(xi(t, .)) varies no faster than g
    let panel = (g.scale() / 8.0).min(0.05);
    Ok(integrate_vec(a, b, &breaks, panel, width, |y, out| {
        out[0] = g.eval(flow.xi(t, y));
        for b in SignBranch::BOTH {
            // y' carries block eps: integrand uses xi(t, y' - eps t)
            let w = g.eval(flow.xi(t, y - b.eps() * t));
            if w == 0.0 {
                continue;
            }
            let block = flow.initial_block(b, y);
            let (qi, yzi) = match b {
                SignBranch::Plus => (1, 3),
                SignBranch::Minus => (2, 3 + d),
            };
            out[qi] = w * block[0];
            for i in 0..d {
                out[yzi + i] = w * block[1 + i];
            }
        }
    }))
}

/// Checks the weak identities for pairings `limit` of a candidate solution
/// against the flow of its initial data.
pub fn verify_generalized_solution(limit: &PairingTable, flow: &CharacteristicFlow) -> Result<IdentityReport> {
    let d = limit.dim();
    let mut per_time = Vec::with_capacity(limit.times.len());
    for (ti, &t) in limit.times.iter().enumerate() {
        let rows: Vec<Result<(f64, f64, f64)>> = limit
            .family
            .par_iter()
            .enumerate()
            .map(|(gi, g)| {
                let rhs = lagrangian_sides(flow, t, g)?;
                let p = &limit.values[ti][gi];
                let m = g.integral();
                let h = (p[0] - rhs[0]).abs();
                let q = (p[1] + m - rhs[1]).abs().max((p[1] - m - rhs[2]).abs());
                let mut yz: f64 = 0.0;
                for i in 0..d {
                    yz = yz.max((p[2 + i] - p[2 + d + i] - rhs[3 + i]).abs());
                    yz = yz.max((p[2 + i] + p[2 + d + i] - rhs[3 + d + i]).abs());
                }
                Ok((h, q, yz))
            })
            .collect();
        let mut r = IdentityResiduals { t, h: 0.0, q: 0.0, yz: 0.0 };
        for row in rows {
            let (h, q, yz) = row?;
            r.h = r.h.max(h);
            r.q = r.q.max(q);
            r.yz = r.yz.max(yz);
        }
        per_time.push(r);
    }
    Ok(IdentityReport { per_time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::{admissibility, CharacteristicFlow};
    use crate::fixtures::{localized_m_profile, smooth_hull_profile};
    use crate::profile::UniformGrid;
    use crate::weak::default_family;

    #[test]
    fn exact_smooth_solution_satisfies_identities() {
        let u0 = smooth_hull_profile(2, 2048);
        let flow = CharacteristicFlow::build(&u0, admissibility(&u0).unwrap().slab()).unwrap();
        let family = default_family(0.0, 2.0 * std::f64::consts::PI);
        let times = [0.0, 0.8, 2.0];
        let table = PairingTable::from_flow(&flow, Some(*u0.grid()), &times, &family).unwrap();
        let rep = verify_generalized_solution(&table, &flow).unwrap();
        assert!(rep.passes(1e-8), "{rep:?}");
    }

    #[test]
    fn localized_solution_satisfies_identities() {
        let u0 = localized_m_profile(3, 1201);
        let flow = CharacteristicFlow::build(&u0, admissibility(&u0).unwrap().slab()).unwrap();
        let family = default_family(-5.0, 10.0);
        let grid = UniformGrid::linspace(-14.0, 14.0, 5601).unwrap();
        let table = PairingTable::from_flow(&flow, Some(grid), &[0.0, -1.5, 1.0], &family).unwrap();
        let rep = verify_generalized_solution(&table, &flow).unwrap();
        assert!(rep.passes(1e-8), "{rep:?}");
    }

    #[test]
    fn perturbed_pairings_are_flagged() {
        let u0 = smooth_hull_profile(1, 1024);
        let flow = CharacteristicFlow::build(&u0, admissibility(&u0).unwrap().slab()).unwrap();
        let family = default_family(0.0, 2.0 * std::f64::consts::PI);
        let mut table = PairingTable::from_flow(&flow, Some(*u0.grid()), &[0.5], &family).unwrap();
        table.values[0][3][0] += 1e-3;
        let rep = verify_generalized_solution(&table, &flow).unwrap();
        assert!((rep.max_h() - 1e-3).abs() < 1e-7);
        assert!(rep.max_q() < 1e-7);
    }
}
