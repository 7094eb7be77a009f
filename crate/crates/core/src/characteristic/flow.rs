//! Admissibility of initial data and construction of the characteristic
//! flow `xi`.

use serde::{Deserialize, Serialize};

use super::table::{LinearTable, NodeTable, Period, Table};
use crate::error::{Error, Result};
use crate::profile::{Boundary, Profile, SampleKind, StepProfile};
use crate::quadrature;
use crate::state_geometry::{g_slack, ManifoldParams, SignBranch, StateU, DEFAULT_TOL};

/// Constants `(alpha, delta)` of the slab `delta <= tau +- (v - alpha) <= 1/delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub alpha: f64,
    pub delta: f64,
}

impl From<&ManifoldParams> for Slab {
    fn from(p: &ManifoldParams) -> Self {
        Slab { alpha: p.alpha, delta: p.delta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub alpha: f64,
    pub delta: f64,
    /// `min tau +- (v - alpha)` over samples and branches.
    pub min_slack: f64,
    /// `max tau +- (v - alpha)` over samples and branches.
    pub max_slack: f64,
}

impl Admissibility {
    pub fn slab(&self) -> Slab {
        Slab { alpha: self.alpha, delta: self.delta }
    }

    pub fn params(&self, kappa: f64, d: usize) -> ManifoldParams {
        ManifoldParams { alpha: self.alpha, delta: self.delta, kappa, d }
    }
}

fn admissibility_of<'a>(samples: impl Iterator<Item = (usize, f64, &'a StateU)>) -> Result<Admissibility> {
    let mut sup_minus = (f64::NEG_INFINITY, 0, 0.0);
    let mut inf_plus = (f64::INFINITY, 0, 0.0);
    let mut sup_plus = f64::NEG_INFINITY;
    let mut inf_minus = f64::INFINITY;
    let mut any = false;
    for (k, s, u) in samples {
        any = true;
        if !(u.tau > 0.0) || !u.is_finite() {
            return Err(Error::precondition(format!("tau must be positive and finite at sample {k} (s = {s}), got {}", u.tau)));
        }
        let (m, p) = (u.v - u.tau, u.v + u.tau);
        if m > sup_minus.0 {
            sup_minus = (m, k, s);
        }
        if p < inf_plus.0 {
            inf_plus = (p, k, s);
        }
        sup_plus = sup_plus.max(p);
        inf_minus = inf_minus.min(m);
    }
    if !any {
        return Err(Error::precondition("empty initial profile"));
    }
    if sup_minus.0 >= inf_plus.0 {
        return Err(Error::Inadmissible {
            left_index: sup_minus.1,
            left_s: sup_minus.2,
            left_value: sup_minus.0,
            right_index: inf_plus.1,
            right_s: inf_plus.2,
            right_value: inf_plus.0,
        });
    }
    let alpha = 0.5 * (sup_minus.0 + inf_plus.0);
    let min_slack = 0.5 * (inf_plus.0 - sup_minus.0);
    let max_slack = (sup_plus - alpha).max(alpha - inf_minus);
    let delta = min_slack.min(1.0 / max_slack).min(1.0 - f64::EPSILON);
    Ok(Admissibility { alpha, delta, min_slack, max_slack })
}

/// Best `(alpha, delta)` for sampled initial data, or the sample pair
/// violating `v - tau < v' + tau'`.
pub fn admissibility(u0: &Profile<StateU>) -> Result<Admissibility> {
    admissibility_of(u0.values().iter().enumerate().map(|(k, u)| (k, u0.point(k), u)))
}

pub fn admissibility_steps(u0: &StepProfile<StateU>) -> Result<Admissibility> {
    admissibility_of(u0.values().iter().enumerate().map(|(k, u)| (k, u0.breaks()[k], u)))
}

fn check_slab<'a>(samples: impl Iterator<Item = (usize, f64, &'a StateU)>, slab: Slab, d: Option<usize>) -> Result<()> {
    for (k, s, u) in samples {
        if let Some(d) = d {
            if u.dim() != d {
                return Err(Error::precondition(format!("sample {k} has dimension {}, expected {d}", u.dim())));
            }
        }
        let sl = g_slack(u, slab.alpha);
        for x in [sl.plus, sl.minus] {
            if !(x >= slab.delta - DEFAULT_TOL && x <= 1.0 / slab.delta + DEFAULT_TOL) {
                return Err(Error::SlopeOutOfRange(format!(
                    "tau +- (v - alpha) = {x} at sample {k} (s = {s}) leaves [{}, {}]",
                    slab.delta,
                    1.0 / slab.delta
                )));
            }
        }
    }
    Ok(())
}

/// Flat block vector `(a_eps, c_eps)`.
pub(crate) fn block_flat(u: &StateU, b: SignBranch) -> Vec<f64> {
    let (a, c) = u.block(b);
    let mut out = Vec::with_capacity(1 + c.len());
    out.push(a);
    out.extend(c);
    out
}

#[derive(Debug, Clone)]
pub(crate) enum Source {
    Smooth {
        u0: Profile<StateU>,
        plus: Profile<Vec<f64>>,
        minus: Profile<Vec<f64>>,
        a_plus: Profile<f64>,
        a_minus: Profile<f64>,
    },
    Steps {
        u0: StepProfile<StateU>,
        plus: Vec<Vec<f64>>,
        minus: Vec<Vec<f64>>,
    },
}

/// Characteristic flow of admissible initial data: `xi(t, y)` with
/// `xi(0, 0) = 0`, `d_y xi = tau(t, xi)`, `d_t xi = v(t, xi)`.
#[derive(Debug, Clone)]
pub struct CharacteristicFlow {
    pub(crate) slab: Slab,
    pub(crate) d: usize,
    pub(crate) boundary: Boundary,
    pub(crate) source: Source,
    pub(crate) table: Table,
    pub(crate) tau_min: f64,
    pub(crate) tau_max: f64,
    pub(crate) v_max: f64,
    pub(crate) s_period: Option<f64>,
}

fn bounds<'a>(vals: impl Iterator<Item = &'a StateU>) -> (f64, f64, f64) {
    vals.fold((f64::INFINITY, 0.0f64, 0.0f64), |(lo, hi, vm), u| (lo.min(u.tau), hi.max(u.tau), vm.max(u.v.abs())))
}

/// Right-hand side `(tau, v, c+, c-)` from block vectors.
#[inline]
fn rhs_from_blocks(p: &[f64], m: &[f64], out: &mut [f64]) {
    let d = p.len() - 1;
    out[0] = 0.5 * (p[0] - m[0]);
    out[1] = 0.5 * (p[0] + m[0]);
    out[2..2 + d].copy_from_slice(&p[1..]);
    out[2 + d..2 + 2 * d].copy_from_slice(&m[1..]);
}

struct Rk<'a> {
    plus: &'a Profile<Vec<f64>>,
    minus: &'a Profile<Vec<f64>>,
    width: usize,
}

impl Rk<'_> {
    fn rhs(&self, xi: f64, out: &mut [f64]) {
        rhs_from_blocks(&self.plus.eval(xi), &self.minus.eval(xi), out);
    }

    /// One RK4 step of size `h`; only the `xi` channel feeds back.
    fn step(&self, z: &[f64], f0: &[f64], h: f64, out: &mut [f64]) {
        let w = self.width;
        let mut k2 = vec![0.0; w];
        let mut k3 = vec![0.0; w];
        let mut k4 = vec![0.0; w];
        self.rhs(z[0] + 0.5 * h * f0[0], &mut k2);
        self.rhs(z[0] + 0.5 * h * k2[0], &mut k3);
        self.rhs(z[0] + h * k3[0], &mut k4);
        for c in 0..w {
            out[c] = z[c] + h / 6.0 * (f0[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }

    /// Integrate `steps` steps from the origin; returns node values and
    /// slopes when `store` is set, else only the final state.
    fn run(&self, h: f64, steps: usize, store: bool) -> (Vec<f64>, Vec<f64>) {
        let w = self.width;
        let mut z = vec![0.0; w];
        let mut f = vec![0.0; w];
        self.rhs(0.0, &mut f);
        let mut values = Vec::new();
        let mut slopes = Vec::new();
        if store {
            values.extend_from_slice(&z);
            slopes.extend_from_slice(&f);
        }
        let mut next = vec![0.0; w];
        for _ in 0..steps {
            self.step(&z, &f, h, &mut next);
            std::mem::swap(&mut z, &mut next);
            self.rhs(z[0], &mut f);
            if store {
                values.extend_from_slice(&z);
                slopes.extend_from_slice(&f);
            }
        }
        if !store {
            values = z;
            slopes = f;
        }
        (values, slopes)
    }

    /// March from the origin until `xi` passes `target` in the direction of
    /// `h`; returns stored nodes in marching order.
    fn march(&self, h: f64, target: f64, min_steps: usize, max_steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let w = self.width;
        let mut z = vec![0.0; w];
        let mut f = vec![0.0; w];
        self.rhs(0.0, &mut f);
        let mut values = z.clone();
        let mut slopes = f.clone();
        let mut next = vec![0.0; w];
        let mut steps = 0;
        while steps < min_steps || (h > 0.0 && z[0] < target) || (h < 0.0 && z[0] > target) {
            if steps >= max_steps {
                return Err(Error::Internal("characteristic ODE did not reach the end of the grid".into()));
            }
            self.step(&z, &f, h, &mut next);
            std::mem::swap(&mut z, &mut next);
            self.rhs(z[0], &mut f);
            values.extend_from_slice(&z);
            slopes.extend_from_slice(&f);
            steps += 1;
        }
        Ok((values, slopes))
    }
}

impl CharacteristicFlow {
    /// Build the flow of sampled initial data. Piecewise-constant profiles
    /// are handled exactly as step data with cells centred on the samples.
    pub fn build(u0: &Profile<StateU>, slab: Slab) -> Result<Self> {
        if u0.kind() == SampleKind::PiecewiseConstant {
            return Self::build_steps(&u0.to_step_profile(), slab);
        }
        if u0.len() < 4 {
            return Err(Error::precondition("smooth initial data needs at least four samples"));
        }
        let d = u0.values()[0].dim();
        check_slab(u0.values().iter().enumerate().map(|(k, u)| (k, u0.point(k), u)), slab, Some(d))?;
        let (tau_min, tau_max, v_max) = bounds(u0.values().iter());
        let plus = u0.map(|u| block_flat(u, SignBranch::Plus));
        let minus = u0.map(|u| block_flat(u, SignBranch::Minus));
        let a_plus = u0.map(|u| u.v + u.tau);
        let a_minus = u0.map(|u| u.v - u.tau);
        let width = 2 + 2 * d;
        let rk = Rk { plus: &plus, minus: &minus, width };
        let g = *u0.grid();
        let h_target = g.step / (4.0 * tau_max);
        let (table, s_period) = match u0.boundary() {
            Boundary::Periodic => {
                let l = g.period();
                let p_est = quadrature::integrate(g.start, g.start + l, &[], g.step, |s| {
                    let (p, m) = (plus.eval(s), minus.eval(s));
                    2.0 / (p[0] - m[0])
                });
                let steps = ((p_est / h_target).ceil() as usize).max(8);
                let f = |h: f64| rk.run(h, steps, false).0[0] - l;
                let mut h0 = p_est / steps as f64;
                let mut f0 = f(h0);
                let mut h1 = h0 * l / (f0 + l);
                for _ in 0..60 {
                    let f1 = f(h1);
                    if f1.abs() <= 4.0 * f64::EPSILON * l || f1 == f0 {
                        break;
                    }
                    let h2 = h1 - f1 * (h1 - h0) / (f1 - f0);
                    h0 = h1;
                    f0 = f1;
                    h1 = h2;
                }
                let (values, slopes) = rk.run(h1, steps, true);
                let inc = values[steps * width..(steps + 1) * width].to_vec();
                let mut t = NodeTable {
                    h: h1,
                    first: 0,
                    width,
                    values,
                    slopes,
                    period: Some(Period { y: h1 * steps as f64, inc }),
                };
                t.limit_monotone();
                (t, Some(l))
            }
            Boundary::ConstantExtension => {
                let hi = g.end() + g.step;
                let lo = g.start - g.step;
                let reach = hi.abs().max(lo.abs());
                let max_steps = (reach / (tau_min * h_target)).ceil() as usize + 16;
                let (fv, fs) = rk.march(h_target, hi, 4, max_steps)?;
                let (bv, bs) = rk.march(-h_target, lo, 4, max_steps)?;
                let nb = bv.len() / width;
                let mut values = Vec::with_capacity(fv.len() + bv.len());
                let mut slopes = Vec::with_capacity(fs.len() + bs.len());
                for j in (1..nb).rev() {
                    values.extend_from_slice(&bv[j * width..(j + 1) * width]);
                    slopes.extend_from_slice(&bs[j * width..(j + 1) * width]);
                }
                values.extend_from_slice(&fv);
                slopes.extend_from_slice(&fs);
                let mut t = NodeTable { h: h_target, first: -(nb as i64 - 1), width, values, slopes, period: None };
                t.limit_monotone();
                (t, None)
            }
        };
        Ok(Self {
            slab,
            d,
            boundary: u0.boundary(),
            source: Source::Smooth { u0: u0.clone(), plus, minus, a_plus, a_minus },
            table: Table::Nodes(table),
            tau_min,
            tau_max,
            v_max,
            s_period,
        })
    }

    /// Exact flow of piecewise-constant data: every channel is piecewise
    /// linear in `y`.
    pub fn build_steps(u0: &StepProfile<StateU>, slab: Slab) -> Result<Self> {
        let d = u0.values()[0].dim();
        check_slab(u0.values().iter().enumerate().map(|(k, u)| (k, u0.breaks()[k], u)), slab, Some(d))?;
        let (tau_min, tau_max, v_max) = bounds(u0.values().iter());
        let width = 2 + 2 * d;
        let plus: Vec<Vec<f64>> = u0.values().iter().map(|u| block_flat(u, SignBranch::Plus)).collect();
        let minus: Vec<Vec<f64>> = u0.values().iter().map(|u| block_flat(u, SignBranch::Minus)).collect();
        let b = u0.breaks();
        let pieces = u0.pieces();
        let mut slopes = vec![0.0; pieces * width];
        for j in 0..pieces {
            rhs_from_blocks(&plus[j], &minus[j], &mut slopes[j * width..(j + 1) * width]);
        }
        let mut ybreaks = Vec::with_capacity(pieces + 1);
        let mut values = vec![0.0; (pieces + 1) * width];
        ybreaks.push(0.0);
        values[0] = b[0];
        for j in 0..pieces {
            let dy = u0.width(j) / slopes[j * width];
            ybreaks.push(ybreaks[j] + dy);
            for c in 0..width {
                values[(j + 1) * width + c] = values[j * width + c] + dy * slopes[j * width + c];
            }
            values[(j + 1) * width] = b[j + 1];
        }
        let (period, s_period) = match u0.boundary() {
            Boundary::Periodic => {
                let inc = (0..width).map(|c| values[pieces * width + c] - values[c]).collect();
                (Some(Period { y: ybreaks[pieces], inc }), Some(u0.period()))
            }
            Boundary::ConstantExtension => (None, None),
        };
        let mut table = LinearTable { width, ybreaks, values, slopes, period, shift: 0.0, base: vec![0.0; width] };
        // raw coordinate of s = 0
        let shift = {
            let tau = |j: usize| table.slopes[j * width];
            match u0.boundary() {
                Boundary::Periodic => {
                    let l = u0.period();
                    let m = ((0.0 - b[0]) / l).floor();
                    let r = 0.0 - m * l;
                    let j = b.partition_point(|x| *x <= r).saturating_sub(1).min(pieces - 1);
                    table.ybreaks[j] + (r - b[j]) / tau(j) + m * table.ybreaks[pieces]
                }
                Boundary::ConstantExtension => {
                    if 0.0 < b[0] {
                        (0.0 - b[0]) / tau(0)
                    } else if 0.0 >= b[pieces] {
                        table.ybreaks[pieces] + (0.0 - b[pieces]) / tau(pieces - 1)
                    } else {
                        let j = b.partition_point(|x| *x <= 0.0).saturating_sub(1).min(pieces - 1);
                        table.ybreaks[j] + (0.0 - b[j]) / tau(j)
                    }
                }
            }
        };
        table.shift = shift;
        let mut base = vec![0.0; width];
        table.eval(0.0, width, &mut base);
        table.base = base;
        Ok(Self {
            slab,
            d,
            boundary: u0.boundary(),
            source: Source::Steps { u0: u0.clone(), plus, minus },
            table: Table::Linear(table),
            tau_min,
            tau_max,
            v_max,
            s_period,
        })
    }

    pub fn slab(&self) -> Slab {
        self.slab
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// `(min tau0, max tau0)`
    pub fn tau_bounds(&self) -> (f64, f64) {
        (self.tau_min, self.tau_max)
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Period in `s` of periodic data.
    pub fn s_period(&self) -> Option<f64> {
        self.s_period
    }

    /// Period in `y` of periodic data.
    pub fn y_period(&self) -> Option<f64> {
        self.table.y_period()
    }

    pub fn is_step_data(&self) -> bool {
        matches!(self.source, Source::Steps { .. })
    }

    /// `(xi0(y), W(y))`
    #[inline]
    pub fn xi0_and_w(&self, y: f64) -> (f64, f64) {
        let mut out = [0.0; 2];
        self.table.eval(y, 2, &mut out);
        (out[0], out[1])
    }

    pub fn xi0(&self, y: f64) -> f64 {
        self.xi0_and_w(y).0
    }

    /// All channels `(xi0, W, K+, K-)` at `y`.
    pub fn channels(&self, y: f64) -> Vec<f64> {
        let w = 2 + 2 * self.d;
        let mut out = vec![0.0; w];
        self.table.eval(y, w, &mut out);
        out
    }

    /// `a_eps` of the initial data at `xi0(y)`.
    #[inline]
    pub fn initial_a(&self, b: SignBranch, y: f64) -> f64 {
        match &self.source {
            Source::Smooth { a_plus, a_minus, .. } => {
                let s = self.xi0(y);
                match b {
                    SignBranch::Plus => a_plus.eval(s),
                    SignBranch::Minus => a_minus.eval(s),
                }
            }
            Source::Steps { plus, minus, .. } => {
                let j = self.piece(y);
                match b {
                    SignBranch::Plus => plus[j][0],
                    SignBranch::Minus => minus[j][0],
                }
            }
        }
    }

    /// Block `(a_eps, c_eps)` of the initial data at `xi0(y)`.
    pub fn initial_block(&self, b: SignBranch, y: f64) -> Vec<f64> {
        match &self.source {
            Source::Smooth { plus, minus, .. } => {
                let s = self.xi0(y);
                match b {
                    SignBranch::Plus => plus.eval(s),
                    SignBranch::Minus => minus.eval(s),
                }
            }
            Source::Steps { plus, minus, .. } => {
                let j = self.piece(y);
                match b {
                    SignBranch::Plus => plus[j].clone(),
                    SignBranch::Minus => minus[j].clone(),
                }
            }
        }
    }

    /// Initial state at `xi0(y)`.
    pub fn initial_state(&self, y: f64) -> StateU {
        match &self.source {
            Source::Smooth { u0, .. } => u0.eval(self.xi0(y)),
            Source::Steps { u0, .. } => u0.values()[self.piece(y)].clone(),
        }
    }

    /// Initial-data piece owning `y` (step data only).
    pub(crate) fn piece(&self, y: f64) -> usize {
        match &self.table {
            Table::Linear(t) => t.piece(y),
            Table::Nodes(_) => 0,
        }
    }

    /// Breakpoints of step data in `(lo, hi)`; empty for smooth data.
    pub fn y_breaks_between(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.table {
            Table::Linear(t) => t.breaks_between(lo, hi),
            Table::Nodes(_) => Vec::new(),
        }
    }

    /// Largest `|xi0'(y) - tau0(xi0(y))|` at the midpoints of the stored
    /// integration steps (smooth data).
    pub fn ode_residual(&self) -> f64 {
        let Table::Nodes(t) = &self.table else { return 0.0 };
        let Source::Smooth { plus, minus, .. } = &self.source else { return 0.0 };
        let n = t.nodes();
        (0..n - 1)
            .map(|j| {
                let y = (t.first + j as i64) as f64 * t.h + 0.5 * t.h;
                let s = self.xi0(y);
                let tau = 0.5 * (plus.eval(s)[0] - minus.eval(s)[0]);
                (t.xi_slope(y) - tau).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Integration step in `y` (smooth data).
    pub fn y_step(&self) -> Option<f64> {
        match &self.table {
            Table::Nodes(t) => Some(t.h),
            Table::Linear(_) => None,
        }
    }
}

/// Admissibility check followed by flow construction.
pub fn build_flow(u0: &Profile<StateU>, params: &ManifoldParams) -> Result<CharacteristicFlow> {
    CharacteristicFlow::build(u0, Slab::from(params))
}
