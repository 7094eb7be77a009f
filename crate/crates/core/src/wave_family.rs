//! Linear wave strings `X_tt = kappa^2 X_ss` with relativistic or
//! subrelativistic initial constraints, and the explicit oscillating family
//! whose uniform limit is subrelativistic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::profile::{Boundary, Profile, SampleKind, UniformGrid};
use crate::state_geometry::{ByBranch, StateU};

#[derive(Debug, Clone)]
pub struct WaveInitialData {
    pub kappa: f64,
    /// `X(0, .)`
    pub x0: Profile<Vec<f64>>,
    /// `dX/ds(0, .)`, analytic when known.
    pub dx0: Profile<Vec<f64>>,
    /// `dX/dt(0, .)`
    pub v0: Profile<Vec<f64>>,
}

impl WaveInitialData {
    /// Initial data with `dX/ds` taken from fourth-order centred differences.
    pub fn new(kappa: f64, x0: Profile<Vec<f64>>, v0: Profile<Vec<f64>>) -> Result<Self> {
        let h = x0.grid().step;
        let dx: Vec<Vec<f64>> = (0..x0.len() as i64)
            .map(|k| {
                let (m2, m1, p1, p2) = (x0.sample(k - 2), x0.sample(k - 1), x0.sample(k + 1), x0.sample(k + 2));
                (0..m1.len()).map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h)).collect()
            })
            .collect();
        let dx0 = Profile::new(*x0.grid(), x0.boundary(), SampleKind::Smooth, dx)?;
        Self::with_derivative(kappa, x0, dx0, v0)
    }

    pub fn with_derivative(
        kappa: f64,
        x0: Profile<Vec<f64>>,
        dx0: Profile<Vec<f64>>,
        v0: Profile<Vec<f64>>,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::precondition(format!("kappa must lie in (0, 1), got {kappa}")));
        }
        if x0.grid() != dx0.grid() || x0.grid() != v0.grid() {
            return Err(Error::precondition("X0, dX0 and V0 must share one grid"));
        }
        if x0.boundary() != v0.boundary() || x0.boundary() != dx0.boundary() {
            return Err(Error::precondition("X0, dX0 and V0 must share one boundary mode"));
        }
        let d = x0.values()[0].len();
        let all = x0.values().iter().chain(dx0.values()).chain(v0.values());
        if d == 0 || all.clone().any(|x| x.len() != d) {
            return Err(Error::precondition("wave data must be vectors of one positive dimension"));
        }
        if all.flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("wave data has non-finite samples"));
        }
        Ok(Self { kappa, x0, dx0, v0 })
    }

    pub fn grid(&self) -> &UniformGrid {
        self.x0.grid()
    }

    pub fn dim(&self) -> usize {
        self.x0.values()[0].len()
    }
}

/// Sampled string `X(t, .)` with its derivative fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringGraph {
    pub s_grid: UniformGrid,
    pub t: f64,
    pub x: Vec<Vec<f64>>,
    pub dxds: Vec<Vec<f64>>,
    pub dxdt: Vec<Vec<f64>>,
}

/// Coefficients of the first-order string system at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// `A, B, C, D` from `(dX/ds, dX/dt)`; a non-positive `A^2` is superluminal.
pub fn string_coefficients(xs: &[f64], xt: &[f64]) -> Result<StringCoefficients> {
    let xs2 = norm2(xs);
    let xt2 = norm2(xt);
    let c0 = dot(xt, xs);
    let a2 = (1.0 + xs2) * (1.0 - xt2) + c0 * c0;
    if !(a2 > 0.0) {
        return Err(Error::domain(format!("superluminal graph: A^2 = {a2}")));
    }
    let a = a2.sqrt();
    Ok(StringCoefficients { a, b: (1.0 + xs2) / a, c: c0 / a, d: (1.0 - xt2) / a })
}

impl StringGraph {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn coefficients(&self) -> Result<Vec<StringCoefficients>> {
        self.dxds.iter().zip(&self.dxdt).map(|(xs, xt)| string_coefficients(xs, xt)).collect()
    }

    /// Largest centred-difference mismatch between `X` and `dX/ds` over
    /// interior samples.
    pub fn derivative_consistency(&self) -> f64 {
        let h = self.s_grid.step;
        (1..self.len().saturating_sub(1))
            .map(|k| {
                (0..self.x[k].len())
                    .map(|i| ((self.x[k + 1][i] - self.x[k - 1][i]) / (2.0 * h) - self.dxds[k][i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Trapezoidal antiderivative of a sampled vector profile, exact on the
/// piecewise-linear interpolant (including partial cells).
struct Antiderivative<'a> {
    p: &'a Profile<Vec<f64>>,
    prefix: Vec<Vec<f64>>,
}

impl<'a> Antiderivative<'a> {
    fn new(p: &'a Profile<Vec<f64>>) -> Self {
        let n = p.len();
        let h = p.grid().step;
        let cells = if p.boundary() == Boundary::Periodic { n } else { n - 1 };
        let mut prefix = vec![vec![0.0; p.values()[0].len()]];
        for k in 0..cells {
            let (a, b) = (p.sample(k as i64), p.sample(k as i64 + 1));
            let last = prefix.last().unwrap();
            let next = (0..a.len()).map(|i| last[i] + 0.5 * h * (a[i] + b[i])).collect();
            prefix.push(next);
        }
        Self { p, prefix }
    }

    /// `int_{s_0}^{s} V`
    fn at(&self, s: f64) -> Vec<f64> {
        let g = self.p.grid();
        let n = self.p.len();
        let h = g.step;
        let u = (s - g.start) / h;
        let d = self.prefix[0].len();
        let partial = |k: usize, x: f64, base: f64| -> Vec<f64> {
            let a = self.p.sample(k as i64);
            let b = self.p.sample(k as i64 + 1);
            let pk = &self.prefix[k];
            (0..d).map(|i| base * self.prefix[self.prefix.len() - 1][i] + pk[i] + h * (x * a[i] + 0.5 * x * x * (b[i] - a[i]))).collect()
        };
        match self.p.boundary() {
            Boundary::Periodic => {
                let m = (u / n as f64).floor();
                let r = u - m * n as f64;
                let k = (r.floor() as usize).min(n - 1);
                partial(k, r - k as f64, m)
            }
            Boundary::ConstantExtension => {
                if n == 1 || u <= 0.0 {
                    let v = &self.p.values()[0];
                    return v.iter().map(|x| u * h * x).collect();
                }
                if u >= (n - 1) as f64 {
                    let v = &self.p.values()[n - 1];
                    let last = &self.prefix[n - 1];
                    return (0..d).map(|i| last[i] + (u - (n - 1) as f64) * h * v[i]).collect();
                }
                let k = (u.floor() as usize).min(n - 2);
                partial(k, u - k as f64, 0.0)
            }
        }
    }
}

/// Cubic Hermite evaluation of `X0` from its samples and exact slopes.
fn hermite(x0: &Profile<Vec<f64>>, dx0: &Profile<Vec<f64>>, s: f64) -> Vec<f64> {
    let g = x0.grid();
    let n = x0.len();
    let u = (s - g.start) / g.step;
    if x0.boundary() == Boundary::ConstantExtension {
        if u <= 0.0 {
            return x0.values()[0].clone();
        }
        if u >= (n - 1) as f64 {
            return x0.values()[n - 1].clone();
        }
    }
    let k = u.floor();
    let x = u - k;
    let k = k as i64;
    let (p0, p1, m0, m1) = (x0.sample(k), x0.sample(k + 1), dx0.sample(k), dx0.sample(k + 1));
    let h = g.step;
    let x2 = x * x;
    let x3 = x2 * x;
    let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
    let h10 = x3 - 2.0 * x2 + x;
    let h01 = -2.0 * x3 + 3.0 * x2;
    let h11 = x3 - x2;
    (0..p0.len()).map(|i| h00 * p0[i] + h10 * h * m0[i] + h01 * p1[i] + h11 * h * m1[i]).collect()
}

/// Point evaluator of the d'Alembert solution.
pub struct WaveSolution<'a> {
    init: &'a WaveInitialData,
    antider: Antiderivative<'a>,
}

impl<'a> WaveSolution<'a> {
    pub fn new(init: &'a WaveInitialData) -> Self {
        Self { init, antider: Antiderivative::new(&init.v0) }
    }

    /// `(X, dX/ds, dX/dt)` at `(t, s)`.
    pub fn eval(&self, t: f64, s: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let k = self.init.kappa;
        let (sp, sm) = (s + k * t, s - k * t);
        let (xp, xm) = (hermite(&self.init.x0, &self.init.dx0, sp), hermite(&self.init.x0, &self.init.dx0, sm));
        let (dp, dm) = (self.init.dx0.eval(sp), self.init.dx0.eval(sm));
        let (vp, vm) = (self.init.v0.eval(sp), self.init.v0.eval(sm));
        let (ip, im) = (self.antider.at(sp), self.antider.at(sm));
        let d = xp.len();
        let x = (0..d).map(|i| 0.5 * (xp[i] + xm[i]) + (ip[i] - im[i]) / (2.0 * k)).collect();
        let xs = (0..d).map(|i| 0.5 * (dp[i] + dm[i]) + (vp[i] - vm[i]) / (2.0 * k)).collect();
        let xt = (0..d).map(|i| 0.5 * k * (dp[i] - dm[i]) + 0.5 * (vp[i] + vm[i])).collect();
        (x, xs, xt)
    }

    pub fn graph_on(&self, t: f64, grid: UniformGrid) -> StringGraph {
        let pts: Vec<_> = (0..grid.len).into_par_iter().map(|k| self.eval(t, grid.point(k))).collect();
        let mut g = StringGraph { s_grid: grid, t, x: Vec::new(), dxds: Vec::new(), dxdt: Vec::new() };
        for (x, xs, xt) in pts {
            g.x.push(x);
            g.dxds.push(xs);
            g.dxdt.push(xt);
        }
        g
    }
}

/// `X(t, .)` on the initial grid; `t = 0` returns the initial samples.
pub fn dalembert_wave_solve(init: &WaveInitialData, t: f64) -> Result<StringGraph> {
    if !t.is_finite() {
        return Err(Error::precondition("time must be finite"));
    }
    if t == 0.0 {
        return Ok(StringGraph {
            s_grid: *init.grid(),
            t,
            x: init.x0.values().to_vec(),
            dxds: init.dx0.values().to_vec(),
            dxdt: init.v0.values().to_vec(),
        });
    }
    Ok(WaveSolution::new(init).graph_on(t, *init.grid()))
}

/// `|dX/dt + eps kappa dX/ds|^2 - (1 - kappa^2)` for both branches.
pub fn constraint_defect(kappa: f64, xs: &[f64], xt: &[f64]) -> ByBranch<f64> {
    ByBranch::from_fn(|b| {
        let e = b.eps() * kappa;
        xt.iter().zip(xs).map(|(a, c)| (a + e * c).powi(2)).sum::<f64>() - (1.0 - kappa * kappa)
    })
}

/// Largest `|defect|` over the samples of a graph, both branches.
pub fn relativistic_defect(kappa: f64, xs: &[Vec<f64>], xt: &[Vec<f64>]) -> f64 {
    xs.iter()
        .zip(xt)
        .map(|(a, b)| {
            let d = constraint_defect(kappa, a, b);
            d.plus.abs().max(d.minus.abs())
        })
        .fold(0.0, f64::max)
}

/// Largest positive defect over the samples, both branches.
pub fn subrelativistic_excess(kappa: f64, xs: &[Vec<f64>], xt: &[Vec<f64>]) -> f64 {
    xs.iter()
        .zip(xt)
        .map(|(a, b)| {
            let d = constraint_defect(kappa, a, b);
            d.plus.max(d.minus)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn check_relativistic_init(init: &WaveInitialData, tol: f64) -> bool {
    relativistic_defect(init.kappa, init.dx0.values(), init.v0.values()) <= tol
}

pub fn check_subrelativistic_init(init: &WaveInitialData, tol: f64) -> bool {
    subrelativistic_excess(init.kappa, init.dx0.values(), init.v0.values()) <= tol
}

/// Wave speed of the oscillating example.
pub const THM1_KAPPA: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `X^(n)(0, s)`
pub fn thm1_x0(n: u32, s: f64) -> [f64; 3] {
    let a = (n + 1) as f64;
    let b = (n - 1) as f64;
    [
        s.cos() - 1.0,
        (a * s).sin() / (2.0 * a) + (b * s).sin() / (2.0 * b),
        ((a * s).cos() - 1.0) / (2.0 * a) + ((b * s).cos() - 1.0) / (2.0 * b),
    ]
}

/// `dX^(n)/ds(0, s) = (-sin s, cos s cos ns, -cos s sin ns)`
pub fn thm1_dx0(n: u32, s: f64) -> [f64; 3] {
    let ns = n as f64 * s;
    [-s.sin(), s.cos() * ns.cos(), -s.cos() * ns.sin()]
}

/// The uniform limit `(cos s cos(kappa t) - 1, 0, 0)`.
pub fn thm1_limit(t: f64, s: f64) -> [f64; 3] {
    [s.cos() * (THM1_KAPPA * t).cos() - 1.0, 0.0, 0.0]
}

pub fn thm1_example_init(n: u32, grid: UniformGrid) -> Result<WaveInitialData> {
    if n < 2 {
        return Err(Error::precondition(format!("the oscillating example needs n >= 2, got {n}")));
    }
    let x0 = Profile::from_fn(grid, Boundary::Periodic, SampleKind::Smooth, |s| thm1_x0(n, s).to_vec());
    let dx0 = Profile::from_fn(grid, Boundary::Periodic, SampleKind::Smooth, |s| thm1_dx0(n, s).to_vec());
    let v0 = Profile::from_fn(grid, Boundary::Periodic, SampleKind::Smooth, |_| vec![0.0; 3]);
    WaveInitialData::with_derivative(THM1_KAPPA, x0, dx0, v0)
}

/// Initial data of the limit string `(cos s - 1, 0, 0)` at rest.
pub fn thm1_limit_init(grid: UniformGrid) -> Result<WaveInitialData> {
    let x0 = Profile::from_fn(grid, Boundary::Periodic, SampleKind::Smooth, |s| thm1_limit(0.0, s).to_vec());
    let dx0 = Profile::from_fn(grid, Boundary::Periodic, SampleKind::Smooth, |s| vec![-s.sin(), 0.0, 0.0]);
    let v0 = Profile::from_fn(grid, Boundary::Periodic, SampleKind::Smooth, |_| vec![0.0; 3]);
    WaveInitialData::with_derivative(THM1_KAPPA, x0, dx0, v0)
}

/// `(kappa, 0, kappa dX/ds, -dX/dt)` at every sample.
pub fn wave_to_augmented(init: &WaveInitialData) -> Profile<StateU> {
    let k = init.kappa;
    let values = init
        .dx0
        .values()
        .iter()
        .zip(init.v0.values())
        .map(|(xs, xt)| StateU {
            tau: k,
            v: 0.0,
            eta: xs.iter().map(|x| k * x).collect(),
            zeta: xt.iter().map(|x| -x).collect(),
        })
        .collect();
    Profile::new(*init.grid(), init.x0.boundary(), SampleKind::Smooth, values).expect("same grid")
}

/// Sup-norm distance of the family member `n` from its limit over a
/// `(t, s)` grid.
pub fn thm1_sup_error(n: u32, data_grid: UniformGrid, ts: &UniformGrid, ss: &UniformGrid) -> Result<f64> {
    let init = thm1_example_init(n, data_grid)?;
    let sol = WaveSolution::new(&init);
    let err = (0..ts.len)
        .into_par_iter()
        .map(|i| {
            let t = ts.point(i);
            ss.points()
                .map(|s| {
                    let (x, _, _) = sol.eval(t, s);
                    let l = thm1_limit(t, s);
                    (0..3).map(|j| (x[j] - l[j]).powi(2)).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(err)
}
