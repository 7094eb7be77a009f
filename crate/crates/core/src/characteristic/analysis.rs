//! String reconstruction from augmented states and discrete residuals.

use rayon::prelude::*;

use super::flow::CharacteristicFlow;
use crate::error::{Error, Result};
use crate::profile::{Boundary, Profile};
use crate::quadrature::{self, cumulative_fourth_order};
use crate::state_geometry::StateU;
use crate::wave_family::{string_coefficients, StringGraph};

/// Profiles at uniformly spaced times `t0 + j dt`, all on one grid.
#[derive(Debug, Clone)]
pub struct TimeSlices {
    pub t0: f64,
    pub dt: f64,
    pub slices: Vec<Profile<StateU>>,
}

impl TimeSlices {
    pub fn new(t0: f64, dt: f64, slices: Vec<Profile<StateU>>) -> Result<Self> {
        if slices.is_empty() || !(dt > 0.0) {
            return Err(Error::precondition("time slices need a positive step and at least one level"));
        }
        let g = *slices[0].grid();
        if slices.iter().any(|p| *p.grid() != g || p.boundary() != slices[0].boundary()) {
            return Err(Error::precondition("all time slices must share one grid and boundary mode"));
        }
        Ok(Self { t0, dt, slices })
    }

    /// Sample a flow at `t0 + j dt`, `j = 0..levels`.
    pub fn from_flow(flow: &CharacteristicFlow, grid: crate::UniformGrid, t0: f64, dt: f64, levels: usize) -> Result<Self> {
        let slices = (0..levels).map(|j| flow.solve_on(t0 + j as f64 * dt, grid)).collect::<Result<Vec<_>>>()?;
        Self::new(t0, dt, slices)
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }
}

/// `dX/ds = eta / tau`, `dX/dt = -zeta - v eta / tau`.
pub fn string_derivatives(u: &StateU) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = u.eta.iter().map(|e| e / u.tau).collect();
    let xt = u.zeta.iter().zip(&xs).map(|(z, y)| -z - u.v * y).collect();
    (xs, xt)
}

/// Reconstruct `X(t_j, .)` for every slice: integrate `eta / tau` in `s`
/// at `t = 0`, then `-zeta - v eta / tau` in `t`, normalised by
/// `X(0, 0) = 0`. Time zero must be one of the levels.
pub fn reconstruct_x(u: &TimeSlices, delta: f64) -> Result<Vec<StringGraph>> {
    let j0f = -u.t0 / u.dt;
    let j0 = j0f.round();
    if (j0f - j0).abs() > 1e-9 || j0 < 0.0 || j0 as usize >= u.slices.len() {
        return Err(Error::precondition("time zero must be one of the slice levels"));
    }
    let j0 = j0 as usize;
    for (j, p) in u.slices.iter().enumerate() {
        if let Some((k, s)) = p.values().iter().enumerate().find(|(_, s)| !(s.tau >= 0.5 * delta)) {
            return Err(Error::Degenerate(format!("tau = {} below delta/2 at level {j}, sample {k}", s.tau)));
        }
    }
    let base = &u.slices[j0];
    let g = *base.grid();
    let n = g.len;
    let d = base.values()[0].dim();
    let derivs: Vec<Vec<(Vec<f64>, Vec<f64>)>> =
        u.slices.iter().map(|p| p.values().iter().map(string_derivatives).collect()).collect();

    // X(0, s) from the cumulative in s, shifted so that X(0, 0) = 0
    let mut x0 = vec![vec![0.0; d]; n];
    let slope = base.map(|s| string_derivatives(s).0);
    for i in 0..d {
        let f: Vec<f64> = derivs[j0].iter().map(|(xs, _)| xs[i]).collect();
        let cum = cumulative_fourth_order(g.step, &f);
        let k = (((0.0 - g.start) / g.step).round().clamp(0.0, (n - 1) as f64)) as usize;
        let sk = g.point(k);
        let tail = if sk <= 0.0 {
            quadrature::integrate(sk, 0.0, &[], g.step, |s| slope.eval(s)[i])
        } else {
            -quadrature::integrate(0.0, sk, &[], g.step, |s| slope.eval(s)[i])
        };
        let at_zero = cum[k] + tail;
        for (xk, c) in x0.iter_mut().zip(&cum) {
            xk[i] = c - at_zero;
        }
    }

    let levels = u.slices.len();
    let mut xs_all = vec![vec![vec![0.0; d]; n]; levels];
    for k in 0..n {
        for i in 0..d {
            let f: Vec<f64> = (0..levels).map(|j| derivs[j][k].1[i]).collect();
            let fwd = cumulative_fourth_order(u.dt, &f[j0..]);
            let mut back: Vec<f64> = f[..=j0].to_vec();
            back.reverse();
            let bwd = cumulative_fourth_order(u.dt, &back);
            for (m, v) in fwd.iter().enumerate() {
                xs_all[j0 + m][k][i] = x0[k][i] + v;
            }
            for (m, v) in bwd.iter().enumerate() {
                xs_all[j0 - m][k][i] = x0[k][i] - v;
            }
        }
    }
    Ok(xs_all
        .into_iter()
        .enumerate()
        .map(|(j, x)| StringGraph {
            s_grid: g,
            t: u.time(j),
            x,
            dxds: derivs[j].iter().map(|p| p.0.clone()).collect(),
            dxdt: derivs[j].iter().map(|p| p.1.clone()).collect(),
        })
        .collect())
}

/// Pointwise residual field with its sup norm. Samples without a full
/// stencil (ends of constant-extension grids) hold zeros.
#[derive(Debug, Clone)]
pub struct ResidualField {
    pub field: Vec<Vec<f64>>,
    pub max_abs: f64,
}

fn neighbours(n: usize, k: usize, boundary: Boundary) -> Option<(usize, usize)> {
    match boundary {
        Boundary::Periodic => Some(((k + n - 1) % n, (k + 1) % n)),
        Boundary::ConstantExtension if k == 0 || k + 1 == n => None,
        Boundary::ConstantExtension => Some((k - 1, k + 1)),
    }
}

fn finish(field: Vec<Vec<f64>>) -> ResidualField {
    let max_abs = field.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    ResidualField { field, max_abs }
}

/// Centred residual of the augmented system at the middle of three levels:
/// `tau_t + v tau_s - tau v_s`, `v_t + v v_s - tau tau_s`,
/// `eta_t + v eta_s + tau zeta_s`, `zeta_t + v zeta_s + tau eta_s`.
pub fn residual_augmented(prev: &Profile<StateU>, mid: &Profile<StateU>, next: &Profile<StateU>, dt: f64) -> Result<ResidualField> {
    let g = *mid.grid();
    if *prev.grid() != g || *next.grid() != g {
        return Err(Error::precondition("residual levels must share one grid"));
    }
    let n = g.len;
    let d = mid.values()[0].dim();
    let (ds2, dt2) = (2.0 * g.step, 2.0 * dt);
    let field = (0..n)
        .into_par_iter()
        .map(|k| {
            let Some((km, kp)) = neighbours(n, k, mid.boundary()) else { return vec![0.0; 2 + 2 * d] };
            let (a, b) = (&prev.values()[k], &next.values()[k]);
            let (l, r, c) = (&mid.values()[km], &mid.values()[kp], &mid.values()[k]);
            let tau_s = (r.tau - l.tau) / ds2;
            let v_s = (r.v - l.v) / ds2;
            let mut out = Vec::with_capacity(2 + 2 * d);
            out.push((b.tau - a.tau) / dt2 + c.v * tau_s - c.tau * v_s);
            out.push((b.v - a.v) / dt2 + c.v * v_s - c.tau * tau_s);
            for i in 0..d {
                let eta_s = (r.eta[i] - l.eta[i]) / ds2;
                let zeta_s = (r.zeta[i] - l.zeta[i]) / ds2;
                out.push((b.eta[i] - a.eta[i]) / dt2 + c.v * eta_s + c.tau * zeta_s);
                out.push((b.zeta[i] - a.zeta[i]) / dt2 + c.v * zeta_s + c.tau * eta_s);
            }
            out
        })
        .collect();
    Ok(finish(field))
}

/// Centred residual of `d_t(B X_t - C X_s) - d_s(C X_t + D X_s)` at the
/// middle of three equally spaced graphs.
pub fn residual_string(prev: &StringGraph, mid: &StringGraph, next: &StringGraph, boundary: Boundary) -> Result<ResidualField> {
    let dt = 0.5 * (next.t - prev.t);
    if !(dt > 0.0) || ((mid.t - prev.t) - (next.t - mid.t)).abs() > 1e-12 * dt.max(1.0) {
        return Err(Error::precondition("string residual needs three equally spaced increasing times"));
    }
    let flux = |g: &StringGraph| -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let mut p = Vec::with_capacity(g.len());
        let mut q = Vec::with_capacity(g.len());
        for (xs, xt) in g.dxds.iter().zip(&g.dxdt) {
            let c = string_coefficients(xs, xt)?;
            p.push(xt.iter().zip(xs).map(|(a, b)| c.b * a - c.c * b).collect());
            q.push(xt.iter().zip(xs).map(|(a, b)| c.c * a + c.d * b).collect());
        }
        Ok((p, q))
    };
    let (pp, _) = flux(prev)?;
    let (pn, _) = flux(next)?;
    let (_, qm) = flux(mid)?;
    let n = mid.len();
    let d = mid.x[0].len();
    let ds2 = 2.0 * mid.s_grid.step;
    let field = (0..n)
        .map(|k| match neighbours(n, k, boundary) {
            None => vec![0.0; d],
            Some((km, kp)) => (0..d).map(|i| (pn[k][i] - pp[k][i]) / (2.0 * dt) - (qm[kp][i] - qm[km][i]) / ds2).collect(),
        })
        .collect();
    Ok(finish(field))
}

/// Sup of `|D_tt xi - D_yy xi|` with centred differences of steps `dt`, `dy`
/// over the points `(t, y)` of the given lists.
pub fn xi_wave_residual(flow: &CharacteristicFlow, ts: &[f64], ys: &[f64], dt: f64, dy: f64) -> f64 {
    ts.par_iter()
        .map(|&t| {
            ys.iter()
                .map(|&y| {
                    let c = flow.xi(t, y);
                    let tt = (flow.xi(t + dt, y) - 2.0 * c + flow.xi(t - dt, y)) / (dt * dt);
                    let yy = (flow.xi(t, y + dy) - 2.0 * c + flow.xi(t, y - dy)) / (dy * dy);
                    (tt - yy).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Least-squares slope of `log err` against `log h`.
pub fn convergence_order(h: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|x| x.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
