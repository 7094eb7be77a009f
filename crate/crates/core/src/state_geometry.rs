//! Pointwise algebra of the augmented string system.
//!
//! States live either in the evolution variables `(h, q, Y, Z)` or in the
//! rescaled variables `(tau, v, eta, zeta) = (1, q, Y, Z) / h`. Every
//! formula with a stacked sign is evaluated for both [`SignBranch`]es; in
//! block coordinates `a_eps = v + eps*tau`, `c_eps = eta - eps*zeta` the
//! relativistic manifold is a product of two spheres and its convex hull a
//! product of two balls, which is what [`decompose_to_m`] exploits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, unit};
use crate::profile::Sample;

/// Default tolerance for equalities and memberships.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Below this gap a block already sits on its sphere.
const SPHERE_GAP: f64 = 1e-13;

/// Rescaled state `(tau, v, eta, zeta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateU {
    pub tau: f64,
    pub v: f64,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
}

/// Unrescaled state `(h, q, Y, Z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateHQYZ {
    pub h: f64,
    pub q: f64,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignBranch {
    Plus,
    Minus,
}

impl SignBranch {
    pub const BOTH: [SignBranch; 2] = [SignBranch::Plus, SignBranch::Minus];

    #[inline]
    pub fn eps(self) -> f64 {
        match self {
            SignBranch::Plus => 1.0,
            SignBranch::Minus => -1.0,
        }
    }
}

/// A value computed once per sign branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ByBranch<T> {
    pub plus: T,
    pub minus: T,
}

impl<T> ByBranch<T> {
    pub fn from_fn(mut f: impl FnMut(SignBranch) -> T) -> Self {
        ByBranch { plus: f(SignBranch::Plus), minus: f(SignBranch::Minus) }
    }

    pub fn get(&self, b: SignBranch) -> &T {
        match b {
            SignBranch::Plus => &self.plus,
            SignBranch::Minus => &self.minus,
        }
    }
}

impl ByBranch<bool> {
    pub fn both(&self) -> bool {
        self.plus && self.minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldParams {
    pub alpha: f64,
    pub delta: f64,
    pub kappa: f64,
    pub d: usize,
}

impl ManifoldParams {
    pub fn new(alpha: f64, delta: f64, kappa: f64, d: usize) -> Result<Self> {
        let p = Self { alpha, delta, kappa, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::precondition("alpha must be finite"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::precondition(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::precondition(format!("kappa must lie in (0, 1), got {}", self.kappa)));
        }
        if self.d == 0 {
            return Err(Error::precondition("target dimension d must be at least 1"));
        }
        Ok(())
    }
}

impl StateU {
    pub fn new(tau: f64, v: f64, eta: Vec<f64>, zeta: Vec<f64>) -> Result<Self> {
        if eta.len() != zeta.len() || eta.is_empty() {
            return Err(Error::precondition("eta and zeta must share a positive dimension"));
        }
        let s = Self { tau, v, eta, zeta };
        if !s.is_finite() {
            return Err(Error::domain("state has non-finite components"));
        }
        Ok(s)
    }

    pub fn zero_vectors(tau: f64, v: f64, d: usize) -> Self {
        Self { tau, v, eta: vec![0.0; d], zeta: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn is_finite(&self) -> bool {
        self.tau.is_finite()
            && self.v.is_finite()
            && self.eta.iter().chain(&self.zeta).all(|x| x.is_finite())
    }

    /// `tau^2 + v^2 + |eta|^2 + |zeta|^2`
    pub fn sum_squares(&self) -> f64 {
        self.tau * self.tau + self.v * self.v + norm2(&self.eta) + norm2(&self.zeta)
    }

    /// `tau v - eta . zeta`
    pub fn cross_defect(&self) -> f64 {
        self.tau * self.v - dot(&self.eta, &self.zeta)
    }

    /// Block coordinates `(v + eps tau, eta - eps zeta)`.
    pub fn block(&self, b: SignBranch) -> (f64, Vec<f64>) {
        let e = b.eps();
        let c = self.eta.iter().zip(&self.zeta).map(|(x, z)| x - e * z).collect();
        (self.v + e * self.tau, c)
    }

    pub fn blocks(&self) -> ByBranch<(f64, Vec<f64>)> {
        ByBranch::from_fn(|b| self.block(b))
    }

    /// Inverse of [`StateU::blocks`].
    pub fn from_blocks(a_plus: f64, c_plus: &[f64], a_minus: f64, c_minus: &[f64]) -> Self {
        let eta = c_plus.iter().zip(c_minus).map(|(p, m)| 0.5 * (p + m)).collect();
        let zeta = c_plus.iter().zip(c_minus).map(|(p, m)| 0.5 * (m - p)).collect();
        Self { tau: 0.5 * (a_plus - a_minus), v: 0.5 * (a_plus + a_minus), eta, zeta }
    }

    /// Flat component vector `(tau, v, eta.., zeta..)`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 + 2 * self.dim());
        out.push(self.tau);
        out.push(self.v);
        out.extend_from_slice(&self.eta);
        out.extend_from_slice(&self.zeta);
        out
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.len() < 4 || x.len() % 2 != 0 {
            return Err(Error::precondition(format!("flat state must have 2 + 2d entries, got {}", x.len())));
        }
        let d = (x.len() - 2) / 2;
        Self::new(x[0], x[1], x[2..2 + d].to_vec(), x[2 + d..].to_vec())
    }

    pub fn max_abs_diff(&self, other: &StateU) -> f64 {
        crate::linalg::max_abs_diff(&self.to_flat(), &other.to_flat())
    }
}

impl Sample for StateU {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let d = terms[0].1.dim();
        let mut out = StateU::zero_vectors(0.0, 0.0, d);
        for (c, x) in terms {
            out.tau += c * x.tau;
            out.v += c * x.v;
            axpy(*c, &x.eta, &mut out.eta);
            axpy(*c, &x.zeta, &mut out.zeta);
        }
        out
    }
}

impl StateHQYZ {
    /// The relativistic state attached to `(Y, Z)`: `q = Y.Z`, `h` from the
    /// Hamiltonian.
    pub fn relativistic(y: Vec<f64>, z: Vec<f64>) -> Self {
        let (h, q) = hamiltonian(&y, &z);
        Self { h, q, y, z }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }
}

impl Sample for StateHQYZ {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let d = terms[0].1.dim();
        let mut out = StateHQYZ { h: 0.0, q: 0.0, y: vec![0.0; d], z: vec![0.0; d] };
        for (c, x) in terms {
            out.h += c * x.h;
            out.q += c * x.q;
            axpy(*c, &x.y, &mut out.y);
            axpy(*c, &x.z, &mut out.z);
        }
        out
    }
}

/// `(1 + |Y|^2)(1 - |W|^2) + (Y.W)^2`
#[inline]
pub fn lagrangian_radicand(y: &[f64], w: &[f64]) -> f64 {
    let yw = dot(y, w);
    (1.0 + norm2(y)) * (1.0 - norm2(w)) + yw * yw
}

/// Nambu-Goto Lagrangian density `L(Y, W) = -sqrt((1+Y^2)(1-W^2)+(W.Y)^2)`.
pub fn lagrangian(y: &[f64], w: &[f64]) -> Result<f64> {
    let r = lagrangian_radicand(y, w);
    if !(r >= 0.0) {
        return Err(Error::domain(format!("superluminal state: Lagrangian radicand {r} < 0")));
    }
    Ok(-r.sqrt())
}

/// Partial Legendre transform of `L` in `W`: returns `(h, q)` with
/// `h = sqrt(1 + Y^2 + Z^2 + q^2)` and `q = Y.Z`.
pub fn hamiltonian(y: &[f64], z: &[f64]) -> (f64, f64) {
    let q = dot(y, z);
    ((1.0 + norm2(y) + norm2(z) + q * q).sqrt(), q)
}

/// Gradients of `h`: `V = (Y + qZ)/h`, `W = (Z + qY)/h`.
pub fn dual_vars(y: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (h, q) = hamiltonian(y, z);
    let v = y.iter().zip(z).map(|(yi, zi)| (yi + q * zi) / h).collect();
    let w = z.iter().zip(y).map(|(zi, yi)| (zi + q * yi) / h).collect();
    (v, w)
}

/// `T^{-1}`: `(h, q, Y, Z) -> (1, q, Y, Z) / h`.
pub fn to_rescaled(u: &StateHQYZ) -> Result<StateU> {
    if !(u.h > 0.0) {
        return Err(Error::domain(format!("h must be positive, got {}", u.h)));
    }
    let inv = 1.0 / u.h;
    Ok(StateU {
        tau: inv,
        v: u.q * inv,
        eta: u.y.iter().map(|x| x * inv).collect(),
        zeta: u.z.iter().map(|x| x * inv).collect(),
    })
}

/// `T`: `(tau, v, eta, zeta) -> (1, v, eta, zeta) / tau`.
pub fn from_rescaled(u: &StateU) -> Result<StateHQYZ> {
    if !(u.tau > 0.0) {
        return Err(Error::domain(format!("tau must be positive, got {}", u.tau)));
    }
    let inv = 1.0 / u.tau;
    Ok(StateHQYZ {
        h: inv,
        q: u.v * inv,
        y: u.eta.iter().map(|x| x * inv).collect(),
        z: u.zeta.iter().map(|x| x * inv).collect(),
    })
}

/// Augmented state attached to a string gradient `Y = dX/ds`, `W = -dX/dt`.
pub fn embed_from_gradient(y: &[f64], w: &[f64]) -> Result<StateU> {
    let l = lagrangian(y, w)?;
    if l == 0.0 {
        return Err(Error::domain("null Lagrangian: the graph is lightlike"));
    }
    let one_y2 = 1.0 + norm2(y);
    let yw = dot(y, w);
    let tau = -l / one_y2;
    let v = yw / one_y2;
    let eta = y.iter().map(|x| tau * x).collect();
    let zeta = w.iter().zip(y).map(|(wi, yi)| wi - v * yi).collect();
    Ok(StateU { tau, v, eta, zeta })
}

/// (tau, v, eta, zeta) -> (tau, v + u, eta, zeta); the companion change of
/// coordinates `s -> s + u t` is applied by the solver.
pub fn galilean_shift(state: &StateU, u: f64) -> StateU {
    StateU { v: state.v + u, ..state.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetId {
    /// Wave-family constraint `|W +- kappa Y|^2 = 1 - kappa^2`, for states
    /// of the form `(kappa, 0, kappa Y, W)`.
    SKappa,
    M,
    MEps(SignBranch),
    CM,
    G,
    MAlphaDelta,
    CMCapG,
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetId::SKappa => f.write_str("S_kappa"),
            SetId::M => f.write_str("M"),
            SetId::MEps(SignBranch::Plus) => f.write_str("M_eps(+1)"),
            SetId::MEps(SignBranch::Minus) => f.write_str("M_eps(-1)"),
            SetId::CM => f.write_str("CM"),
            SetId::G => f.write_str("G"),
            SetId::MAlphaDelta => f.write_str("M_alpha_delta"),
            SetId::CMCapG => f.write_str("CM_cap_G"),
        }
    }
}

impl FromStr for SetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "S_kappa" => SetId::SKappa,
            "M" => SetId::M,
            "M_eps(+1)" | "M_eps(1)" | "M_plus" => SetId::MEps(SignBranch::Plus),
            "M_eps(-1)" | "M_minus" => SetId::MEps(SignBranch::Minus),
            "CM" => SetId::CM,
            "G" => SetId::G,
            "M_alpha_delta" => SetId::MAlphaDelta,
            "CM_cap_G" => SetId::CMCapG,
            other => return Err(Error::UnknownSet(other.to_string())),
        })
    }
}

/// Deviation of block `b` from its sphere: `a^2 + |c|^2 - 1`.
pub fn block_defect(u: &StateU, b: SignBranch) -> f64 {
    let (a, c) = u.block(b);
    a * a + norm2(&c) - 1.0
}

/// Verdicts of the quadratic and block definitions of `M` at `tol`.
///
/// The quadratic test uses `|S - 1| + 2|tau v - eta.zeta| <= tol`, which
/// equals the larger of the two block defects, so both forms share one
/// tolerance band.
pub fn m_verdicts(u: &StateU, tol: f64) -> (bool, bool) {
    let quad = (u.sum_squares() - 1.0).abs() + 2.0 * u.cross_defect().abs() <= tol;
    let block = ByBranch::from_fn(|b| block_defect(u, b).abs() <= tol).both();
    (quad, block)
}

fn in_m(u: &StateU, tol: f64) -> Result<bool> {
    let (quad, block) = m_verdicts(u, tol);
    if quad != block {
        return Err(Error::InconsistentVerdict(format!(
            "quadratic form says {quad}, block form says {block} (sum of squares {}, cross defect {})",
            u.sum_squares(),
            u.cross_defect()
        )));
    }
    Ok(quad)
}

/// `tau + eps (v - alpha)` for both branches.
pub fn g_slack(u: &StateU, alpha: f64) -> ByBranch<f64> {
    ByBranch::from_fn(|b| u.tau + b.eps() * (u.v - alpha))
}

fn in_g(u: &StateU, p: &ManifoldParams, tol: f64) -> bool {
    let sl = g_slack(u, p.alpha);
    let ok = |x: f64| x >= p.delta - tol && x <= 1.0 / p.delta + tol;
    ok(sl.plus) && ok(sl.minus)
}

/// `S + 2 |tau v - eta.zeta|`; at most 1 inside `CM`.
pub fn cm_gauge(u: &StateU) -> f64 {
    u.sum_squares() + 2.0 * u.cross_defect().abs()
}

pub fn membership(u: &StateU, set: SetId, p: &ManifoldParams, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::precondition("membership tolerance must be non-negative"));
    }
    if !u.is_finite() {
        return Ok(false);
    }
    Ok(match set {
        SetId::SKappa => {
            let k = p.kappa;
            let target = 1.0 - k * k;
            (u.tau - k).abs() <= tol
                && u.v.abs() <= tol
                && SignBranch::BOTH.iter().all(|b| {
                    let e = b.eps();
                    let n: f64 = u.zeta.iter().zip(&u.eta).map(|(z, x)| (z + e * x).powi(2)).sum();
                    (n - target).abs() <= tol
                })
        }
        SetId::M => in_m(u, tol)?,
        SetId::MEps(b) => block_defect(u, b).abs() <= tol,
        SetId::CM => cm_gauge(u) <= 1.0 + tol,
        SetId::G => in_g(u, p, tol),
        SetId::MAlphaDelta => {
            let m = in_m(u, tol)?;
            m && in_g(u, p, tol)
        }
        SetId::CMCapG => cm_gauge(u) <= 1.0 + tol && in_g(u, p, tol),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDecomposition {
    pub points: Vec<(f64, StateU)>,
}

impl ConvexDecomposition {
    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|(w, _)| w).sum()
    }

    pub fn recombine(&self) -> StateU {
        let terms: Vec<(f64, &StateU)> = self.points.iter().map(|(w, s)| (*w, s)).collect();
        StateU::combine(&terms)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Direction orthogonal to `c`, from the coordinate axis least aligned with
/// it (ties to the lowest index). Requires `c.len() >= 2`.
fn orthogonal_direction(c: &[f64]) -> Vec<f64> {
    let mut k = 0;
    for (i, x) in c.iter().enumerate() {
        if x.abs() < c[k].abs() {
            k = i;
        }
    }
    let mut e = unit(c.len(), k);
    let c2 = norm2(c);
    if c2 > 0.0 {
        axpy(-c[k] / c2, c, &mut e);
    }
    let n = norm2(&e).sqrt();
    e.iter_mut().for_each(|x| *x /= n);
    e
}

/// Lift one block `c` with `|c|^2 <= 1 - a^2` onto the sphere of radius
/// `sqrt(1 - a^2)` as a convex combination of at most two points.
fn lift_block(a: f64, c: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let r2 = 1.0 - a * a;
    assert!(r2 >= -DEFAULT_TOL, "block outside the unit slab: a = {a}");
    let gap = r2 - norm2(c);
    if gap <= SPHERE_GAP {
        return vec![(1.0, c.to_vec())];
    }
    if c.len() == 1 {
        let r = r2.sqrt();
        let lambda = (c[0] + r) / (2.0 * r);
        return vec![(lambda, vec![r]), (1.0 - lambda, vec![-r])];
    }
    let e = orthogonal_direction(c);
    let mu = gap.sqrt();
    let plus = c.iter().zip(&e).map(|(x, y)| x + mu * y).collect();
    let minus = c.iter().zip(&e).map(|(x, y)| x - mu * y).collect();
    vec![(0.5, plus), (0.5, minus)]
}

/// Write `u` in `CM ∩ G_{alpha,delta}` as a convex combination of at most
/// four points of `M ∩ G_{alpha,delta}`.
///
/// Only the `c` blocks move, so `a_eps` and hence the `G` slack of every
/// point equal those of `u`. Points are ordered with the plus block in the
/// outer loop.
pub fn decompose_to_m(u: &StateU, p: &ManifoldParams) -> Result<ConvexDecomposition> {
    if !membership(u, SetId::CMCapG, p, DEFAULT_TOL)? {
        return Err(Error::precondition(format!(
            "state outside CM ∩ G (CM gauge {}, G slack {:?})",
            cm_gauge(u),
            g_slack(u, p.alpha)
        )));
    }
    let (a_p, c_p) = u.block(SignBranch::Plus);
    let (a_m, c_m) = u.block(SignBranch::Minus);
    let plus = lift_block(a_p, &c_p);
    let minus = lift_block(a_m, &c_m);
    let mut points = Vec::with_capacity(plus.len() * minus.len());
    for (wp, cp) in &plus {
        for (wm, cm) in &minus {
            let mut s = StateU::from_blocks(a_p, cp, a_m, cm);
            // keep tau, v bit-identical to the input
            s.tau = u.tau;
            s.v = u.v;
            points.push((wp * wm, s));
        }
    }
    Ok(ConvexDecomposition { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ManifoldParams {
        ManifoldParams::new(0.0, 0.4, std::f64::consts::FRAC_1_SQRT_2, 3).unwrap()
    }

    #[test]
    fn lagrangian_examples() {
        assert_eq!(lagrangian(&[0.0; 3], &[0.0; 3]).unwrap(), -1.0);
        assert!((lagrangian(&[1.0, 0.0, 0.0], &[0.0; 3]).unwrap() + 2f64.sqrt()).abs() < 1e-15);
        let l = lagrangian(&[1.0, 0.0, 0.0], &[0.0, 0.5, 0.0]).unwrap();
        // expanded radicand: 1 + Y^2 - W^2 - Y^2 W^2 + (Y.W)^2 = 1 + 1 - 0.25 - 0.25 + 0
        assert!((l + (1.0f64 + 1.0 - 0.25 - 0.25).sqrt()).abs() < 1e-15);
        assert!((l + 1.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(lagrangian(&[0.0], &[2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn hamiltonian_and_dual_examples() {
        assert_eq!(hamiltonian(&[0.0; 2], &[0.0; 2]), (1.0, 0.0));
        assert_eq!(hamiltonian(&[1.0, 0.0], &[1.0, 0.0]), (2.0, 1.0));
        let (v, w) = dual_vars(&[1.0, 0.0], &[1.0, 0.0]);
        assert_eq!(v, vec![1.0, 0.0]);
        assert_eq!(w, vec![1.0, 0.0]);
        let (v, w) = dual_vars(&[0.0; 2], &[0.0; 2]);
        assert_eq!((v, w), (vec![0.0; 2], vec![0.0; 2]));
    }

    #[test]
    fn transform_examples() {
        let u = StateHQYZ { h: 2.0, q: 1.0, y: vec![1.0, 0.0], z: vec![1.0, 0.0] };
        let r = to_rescaled(&u).unwrap();
        assert_eq!(r, StateU { tau: 0.5, v: 0.5, eta: vec![0.5, 0.0], zeta: vec![0.5, 0.0] });
        let one = StateHQYZ { h: 1.0, q: 0.0, y: vec![0.0], z: vec![0.0] };
        assert_eq!(to_rescaled(&one).unwrap(), StateU::zero_vectors(1.0, 0.0, 1));
        assert!(to_rescaled(&StateHQYZ { h: 0.0, ..one.clone() }).is_err());
        assert!(from_rescaled(&StateU::zero_vectors(-1.0, 0.0, 1)).is_err());
        assert_eq!(from_rescaled(&r).unwrap(), u);
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embed_from_gradient(&[0.0; 3], &[0.0; 3]).unwrap(), StateU::zero_vectors(1.0, 0.0, 3));
        let n = 5.0;
        for &s in &[0.0, 0.3, 1.7, -2.2] {
            let y = [-f64::sin(s), f64::cos(s) * f64::cos(n * s), -f64::cos(s) * f64::sin(n * s)];
            let u = embed_from_gradient(&y, &[0.0; 3]).unwrap();
            let k = std::f64::consts::FRAC_1_SQRT_2;
            assert!((u.tau - k).abs() < 1e-15);
            assert_eq!(u.v, 0.0);
            for i in 0..3 {
                assert!((u.eta[i] - k * y[i]).abs() < 1e-15);
                assert_eq!(u.zeta[i], 0.0);
            }
        }
    }

    #[test]
    fn membership_examples() {
        let p = params();
        let k = p.kappa;
        let u = StateU::new(k, 0.0, vec![k, 0.0, 0.0], vec![0.0; 3]).unwrap();
        assert!(membership(&u, SetId::M, &p, DEFAULT_TOL).unwrap());
        assert!(membership(&u, SetId::SKappa, &p, DEFAULT_TOL).unwrap());
        let h = StateU::zero_vectors(0.5, 0.0, 3);
        assert!(membership(&h, SetId::CM, &p, DEFAULT_TOL).unwrap());
        assert!(!membership(&h, SetId::M, &p, DEFAULT_TOL).unwrap());
        assert!(membership(&h, SetId::G, &p, DEFAULT_TOL).unwrap());
        assert!(membership(&h, SetId::CMCapG, &p, DEFAULT_TOL).unwrap());
        assert!(!membership(&h, SetId::MEps(SignBranch::Plus), &p, DEFAULT_TOL).unwrap());
        let tight = ManifoldParams { delta: 0.6, ..p };
        assert!(!membership(&h, SetId::G, &tight, DEFAULT_TOL).unwrap());
        assert!(membership(&h, SetId::G, &p, -1.0).is_err());
    }

    #[test]
    fn set_ids_parse() {
        for id in [
            SetId::SKappa,
            SetId::M,
            SetId::MEps(SignBranch::Plus),
            SetId::MEps(SignBranch::Minus),
            SetId::CM,
            SetId::G,
            SetId::MAlphaDelta,
            SetId::CMCapG,
        ] {
            assert_eq!(id.to_string().parse::<SetId>().unwrap(), id);
        }
        assert!(matches!("Q".parse::<SetId>(), Err(Error::UnknownSet(_))));
    }

    #[test]
    fn decomposition_of_the_centre_state() {
        let p = params();
        let u = StateU::zero_vectors(0.5, 0.0, 3);
        let dec = decompose_to_m(&u, &p).unwrap();
        assert_eq!(dec.len(), 4);
        let mu = 0.75f64.sqrt();
        let expected = [
            (vec![mu, 0.0, 0.0], vec![0.0; 3]),
            (vec![0.0; 3], vec![-mu, 0.0, 0.0]),
            (vec![0.0; 3], vec![mu, 0.0, 0.0]),
            (vec![-mu, 0.0, 0.0], vec![0.0; 3]),
        ];
        for ((w, s), (eta, zeta)) in dec.points.iter().zip(expected) {
            assert_eq!(*w, 0.25);
            assert_eq!((s.tau, s.v), (0.5, 0.0));
            assert!(crate::linalg::max_abs_diff(&s.eta, &eta) < 1e-15);
            assert!(crate::linalg::max_abs_diff(&s.zeta, &zeta) < 1e-15);
            // oracle: block form of M_{alpha,delta} by direct arithmetic
            for e in [1.0, -1.0] {
                let a = s.v + e * s.tau;
                let c2: f64 = s.eta.iter().zip(&s.zeta).map(|(x, z)| (x - e * z).powi(2)).sum();
                assert!((a * a + c2 - 1.0).abs() < 1e-14);
                assert!(s.tau + e * (s.v - p.alpha) >= p.delta);
            }
        }
        assert!(dec.recombine().max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn decomposition_of_manifold_point_is_trivial() {
        let p = params();
        let k = p.kappa;
        let u = StateU::new(k, 0.0, vec![0.0, k, 0.0], vec![0.0; 3]).unwrap();
        let dec = decompose_to_m(&u, &p).unwrap();
        assert_eq!(dec.points, vec![(1.0, u)]);
    }

    #[test]
    fn decomposition_in_one_dimension_is_collinear() {
        let p = ManifoldParams { d: 1, ..params() };
        let u = StateU::new(0.5, 0.05, vec![0.2], vec![-0.1]).unwrap();
        let dec = decompose_to_m(&u, &p).unwrap();
        assert_eq!(dec.len(), 4);
        assert!((dec.weight_sum() - 1.0).abs() < 1e-15);
        assert!(dec.recombine().max_abs_diff(&u) < 1e-15);
        for (_, s) in &dec.points {
            assert!(membership(s, SetId::MAlphaDelta, &p, 1e-12).unwrap());
        }
    }

    #[test]
    fn decomposition_rejects_points_outside_the_hull() {
        let p = params();
        let u = StateU::zero_vectors(0.9, 0.0, 3);
        assert!(membership(&u, SetId::CM, &p, 0.0).unwrap());
        let outside = StateU::new(0.5, 0.0, vec![0.9, 0.0, 0.0], vec![0.0; 3]).unwrap();
        assert!(matches!(decompose_to_m(&outside, &p), Err(Error::Precondition(_))));
    }

    #[test]
    fn galilean_examples() {
        let u = StateU::zero_vectors(0.5, 0.0, 2);
        assert_eq!(galilean_shift(&u, 0.0), u);
        assert_eq!(galilean_shift(&u, 0.1), StateU::zero_vectors(0.5, 0.1, 2));
        let p = params();
        // (0.5, u, 0, 0) stays in CM while 0.25 + u^2 <= 1
        assert!(membership(&galilean_shift(&u, 0.1), SetId::CM, &p, 0.0).unwrap());
        assert!(!membership(&galilean_shift(&u, 0.9), SetId::CM, &p, 0.0).unwrap());
    }
}
