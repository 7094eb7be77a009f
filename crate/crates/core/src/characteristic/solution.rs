//! Evaluation of the global solution through the d'Alembert formulas.
//!
//! With `a_eps = v + eps tau`, `c_eps = eta - eps zeta`:
//! `(a+, c+)(t, xi(t, y)) = (a+, c+)(0, xi0(y + t))` and
//! `(a-, c-)(t, xi(t, y)) = (a-, c-)(0, xi0(y - t))`, with
//! `xi(t, y) = [xi0(y + t) + xi0(y - t)] / 2 + [W(y + t) - W(y - t)] / 2`.

use rayon::prelude::*;

use super::flow::CharacteristicFlow;
use crate::error::{Error, Result};
use crate::profile::{Profile, SampleKind, StepProfile, UniformGrid};
use crate::state_geometry::{galilean_shift, g_slack, ManifoldParams, SignBranch, StateU, DEFAULT_TOL};

/// Root tolerance in `y`.
pub const Y_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiSample {
    pub xi: f64,
    pub dxi_dt: f64,
    pub dxi_dy: f64,
}

/// Newton iteration safeguarded by bisection for an increasing `f` with
/// `f(lo) <= 0 <= f(hi)`.
fn newton_bisect(mut f: impl FnMut(f64) -> (f64, f64), mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Internal(format!("root not bracketed: f({lo}) = {flo}, f({hi}) = {fhi}")));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    let mut y = lo - flo * (hi - lo) / (fhi - flo);
    for _ in 0..200 {
        let (fy, dfy) = f(y);
        if fy == 0.0 {
            return Ok(y);
        }
        if fy < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let mut next = y - fy / dfy;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - y).abs();
        y = next;
        if step <= tol * y.abs().max(1.0) || hi - lo <= tol * y.abs().max(1.0) {
            return Ok(y);
        }
    }
    Ok(y)
}

impl CharacteristicFlow {
    /// `xi(t, y)` and its derivatives `d_t xi = v`, `d_y xi = tau`.
    pub fn xi_evaluate(&self, t: f64, y: f64) -> XiSample {
        let (xp, wp) = self.xi0_and_w(y + t);
        let (xm, wm) = self.xi0_and_w(y - t);
        let ap = self.initial_a(SignBranch::Plus, y + t);
        let am = self.initial_a(SignBranch::Minus, y - t);
        XiSample { xi: 0.5 * (xp + xm) + 0.5 * (wp - wm), dxi_dt: 0.5 * (ap + am), dxi_dy: 0.5 * (ap - am) }
    }

    #[inline]
    pub fn xi(&self, t: f64, y: f64) -> f64 {
        if t == 0.0 {
            return self.xi0(y);
        }
        let (xp, wp) = self.xi0_and_w(y + t);
        let (xm, wm) = self.xi0_and_w(y - t);
        0.5 * (xp + xm) + 0.5 * (wp - wm)
    }

    /// `y` with `xi0(y) = s`.
    pub fn xi0_inverse(&self, s: f64) -> Result<f64> {
        self.locate(0.0, s)
    }

    fn bracket_xi0(&self, s: f64) -> (f64, f64) {
        let (a, b) = (s / self.tau_max, s / self.tau_min);
        let pad = 1e-9 * (1.0 + s.abs() / self.tau_min);
        (a.min(b) - pad, a.max(b) + pad)
    }

    /// `y` with `xi(t, y) = s`.
    pub fn locate(&self, t: f64, s: f64) -> Result<f64> {
        let (lo, hi) = if t == 0.0 {
            self.bracket_xi0(s)
        } else {
            let reach = t.abs() * self.v_max + 1e-9 * (1.0 + s.abs());
            (self.bracket_xi0(s - reach).0, self.bracket_xi0(s + reach).1)
        };
        let f = |y: f64| {
            if t == 0.0 {
                let x = self.xi0(y);
                let a = 0.5 * (self.initial_a(SignBranch::Plus, y) - self.initial_a(SignBranch::Minus, y));
                (x - s, a)
            } else {
                let x = self.xi_evaluate(t, y);
                (x.xi - s, x.dxi_dy)
            }
        };
        newton_bisect(f, lo, hi, Y_TOL)
    }

    /// State at `(t, s)`.
    pub fn state(&self, t: f64, s: f64) -> Result<StateU> {
        let y = self.locate(t, s)?;
        Ok(self.state_at_y(t, y))
    }

    /// State at `(t, xi(t, y))`.
    pub fn state_at_y(&self, t: f64, y: f64) -> StateU {
        let p = self.initial_block(SignBranch::Plus, y + t);
        let m = self.initial_block(SignBranch::Minus, y - t);
        StateU::from_blocks(p[0], &p[1..], m[0], &m[1..])
    }

    /// String position `X(t, s)` normalised by `X(0, 0) = 0`.
    pub fn position(&self, t: f64, s: f64) -> Result<Vec<f64>> {
        let y = self.locate(t, s)?;
        Ok(self.position_at_y(t, y))
    }

    /// `X(t, xi(t, y)) = [K+(y + t) + K-(y - t)] / 2`.
    pub fn position_at_y(&self, t: f64, y: f64) -> Vec<f64> {
        let d = self.d;
        let p = self.channels(y + t);
        let m = self.channels(y - t);
        (0..d).map(|i| 0.5 * (p[2 + i] + m[2 + d + i])).collect()
    }

    /// Solution at time `t` sampled on `grid`; the boundary mode and sample
    /// kind follow the initial data.
    pub fn solve_on(&self, t: f64, grid: UniformGrid) -> Result<Profile<StateU>> {
        let values: Result<Vec<StateU>> = (0..grid.len).into_par_iter().map(|k| self.state(t, grid.point(k))).collect();
        let kind = if self.is_step_data() { SampleKind::PiecewiseConstant } else { SampleKind::Smooth };
        Profile::new(grid, self.boundary, kind, values?)
    }

    /// String graph `X(t, .)` with derivative fields on `grid`.
    pub fn graph_on(&self, t: f64, grid: UniformGrid) -> Result<crate::wave_family::StringGraph> {
        let rows: Result<Vec<(Vec<f64>, StateU)>> = (0..grid.len)
            .into_par_iter()
            .map(|k| {
                let y = self.locate(t, grid.point(k))?;
                Ok((self.position_at_y(t, y), self.state_at_y(t, y)))
            })
            .collect();
        let mut g = crate::wave_family::StringGraph { s_grid: grid, t, x: vec![], dxds: vec![], dxdt: vec![] };
        for (x, u) in rows? {
            let xs: Vec<f64> = u.eta.iter().map(|e| e / u.tau).collect();
            let xt = u.zeta.iter().zip(&xs).map(|(z, y)| -z - u.v * y).collect();
            g.x.push(x);
            g.dxds.push(xs);
            g.dxdt.push(xt);
        }
        Ok(g)
    }

    /// Exact time-`t` solution of step data as a step profile. Periodic
    /// data give one period starting at `xi(t, y_start)`; constant
    /// extension covers every moving breakpoint.
    pub fn step_field(&self, t: f64) -> Result<StepProfile<StateU>> {
        if !self.is_step_data() {
            return Err(Error::precondition("exact step fields exist only for piecewise-constant data"));
        }
        let (y_lo, y_hi) = match self.y_period() {
            Some(p) => {
                let y0 = self.y_breaks_between(-p - 1.0, p + 1.0).first().copied().unwrap_or(0.0);
                (y0, y0 + p)
            }
            None => {
                let all = self.y_breaks_between(f64::NEG_INFINITY, f64::INFINITY);
                let pad = t.abs() + 1.0;
                (all[0] - pad, all[all.len() - 1] + pad)
            }
        };
        let mut ys = vec![y_lo];
        for shift in [t, -t] {
            ys.extend(self.y_breaks_between(y_lo + shift, y_hi + shift).into_iter().map(|b| b - shift));
        }
        ys.push(y_hi);
        ys.sort_by(f64::total_cmp);
        let tol = 1e-13 * (1.0 + y_hi.abs().max(y_lo.abs()));
        let mut merged: Vec<f64> = Vec::with_capacity(ys.len());
        for y in ys {
            if y < y_lo || y > y_hi {
                continue;
            }
            match merged.last() {
                Some(&last) if y - last <= tol => {}
                _ => merged.push(y),
            }
        }
        if let Some(last) = merged.last_mut() {
            *last = y_hi;
        }
        let breaks: Vec<f64> = merged.iter().map(|&y| self.xi(t, y)).collect();
        let values: Vec<StateU> = merged.windows(2).map(|w| self.state_at_y(t, 0.5 * (w[0] + w[1]))).collect();
        let mut b2 = Vec::with_capacity(breaks.len());
        let mut v2 = Vec::with_capacity(values.len());
        b2.push(breaks[0]);
        for (j, v) in values.into_iter().enumerate() {
            if breaks[j + 1] > *b2.last().unwrap() {
                b2.push(breaks[j + 1]);
                v2.push(v);
            }
        }
        StepProfile::new(b2, v2, self.boundary)
    }
}

/// Time-`t` solution of admissible sampled initial data on the initial grid.
pub fn solve_augmented(u0: &Profile<StateU>, t: f64) -> Result<Profile<StateU>> {
    let adm = super::flow::admissibility(u0)?;
    let flow = CharacteristicFlow::build(u0, adm.slab())?;
    flow.solve_on(t, *u0.grid())
}

/// Galilean image `(t, s) -> (t, s + u t)`, `v -> v + u` of a solution.
#[derive(Debug, Clone, Copy)]
pub struct GalileanView<'a> {
    pub flow: &'a CharacteristicFlow,
    pub u: f64,
}

impl GalileanView<'_> {
    pub fn state(&self, t: f64, s: f64) -> Result<StateU> {
        Ok(galilean_shift(&self.flow.state(t, s - self.u * t)?, self.u))
    }

    pub fn solve_on(&self, t: f64, grid: UniformGrid) -> Result<Profile<StateU>> {
        let values: Result<Vec<StateU>> = (0..grid.len).into_par_iter().map(|k| self.state(t, grid.point(k))).collect();
        let kind = if self.flow.is_step_data() { SampleKind::PiecewiseConstant } else { SampleKind::Smooth };
        Profile::new(grid, self.flow.boundary(), kind, values?)
    }
}

/// Wrap a solution in its Galilean image after checking that the shifted
/// initial data still lie in `G_{alpha,delta}` for `params`.
pub fn galilean_on_solution<'a>(flow: &'a CharacteristicFlow, u0: &Profile<StateU>, u: f64, params: &ManifoldParams) -> Result<GalileanView<'a>> {
    for (k, s) in u0.values().iter().enumerate() {
        let sl = g_slack(&galilean_shift(s, u), params.alpha);
        for x in [sl.plus, sl.minus] {
            if !(x >= params.delta - DEFAULT_TOL && x <= 1.0 / params.delta + DEFAULT_TOL) {
                return Err(Error::precondition(format!(
                    "shift u = {u} takes sample {k} out of G (slack {x} outside [{}, {}])",
                    params.delta,
                    1.0 / params.delta
                )));
            }
        }
    }
    Ok(GalileanView { flow, u })
}
