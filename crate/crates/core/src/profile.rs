//! Sampled functions of `s`: uniform profiles with periodic or constant
//! extension, and non-uniform piecewise-constant step profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values that can be linearly combined pointwise (interpolation, averages).
pub trait Sample: Clone + Send + Sync {
    /// `sum_i c_i * x_i`; `terms` is never empty.
    fn combine(terms: &[(f64, &Self)]) -> Self;
}

impl Sample for f64 {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(c, x)| c * **x).sum()
    }
}

impl Sample for Vec<f64> {
    fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out = vec![0.0; terms[0].1.len()];
        for (c, x) in terms {
            crate::linalg::axpy(*c, x, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(Error::precondition(format!("grid step must be positive and finite, got {step}")));
        }
        if len == 0 {
            return Err(Error::precondition("grid must have at least one sample"));
        }
        Ok(Self { start, step, len })
    }

    /// `len` samples covering `[start, start + length)` (the periodic layout).
    pub fn covering(start: f64, length: f64, len: usize) -> Result<Self> {
        Self::new(start, length / len as f64, len)
    }

    /// `len` samples from `a` to `b` inclusive.
    pub fn linspace(a: f64, b: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Self::new(a, 1.0, len);
        }
        Self::new(a, (b - a) / (len - 1) as f64, len)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.point(k))
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn period(&self) -> f64 {
        self.len as f64 * self.step
    }

    /// The default grid: `[-2pi, 2pi)` with 4096 samples.
    pub fn default_periodic() -> Self {
        let l = 4.0 * std::f64::consts::PI;
        Self { start: -0.5 * l, step: l / 4096.0, len: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Period equals `len * step`.
    Periodic,
    /// End values are replicated beyond the grid.
    ConstantExtension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Four-point cubic interpolation between samples.
    Smooth,
    /// Nearest-sample lookup; each sample owns the cell centred on it.
    PiecewiseConstant,
}

#[derive(Debug, Clone)]
pub struct Profile<T> {
    grid: UniformGrid,
    boundary: Boundary,
    kind: SampleKind,
    values: Vec<T>,
}

impl<T: Sample> Profile<T> {
    pub fn new(grid: UniformGrid, boundary: Boundary, kind: SampleKind, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::precondition(format!(
                "profile has {} values for {} grid points",
                values.len(),
                grid.len
            )));
        }
        Ok(Self { grid, boundary, kind, values })
    }

    pub fn from_fn(grid: UniformGrid, boundary: Boundary, kind: SampleKind, f: impl Fn(f64) -> T) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, boundary, kind, values }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, k: usize) -> f64 {
        self.grid.point(k)
    }

    pub fn with_kind(mut self, kind: SampleKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn map<U: Sample>(&self, f: impl Fn(&T) -> U) -> Profile<U> {
        Profile {
            grid: self.grid,
            boundary: self.boundary,
            kind: self.kind,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Value at sample index `i`, any integer, resolved by the boundary mode.
    #[inline]
    pub fn sample(&self, i: i64) -> &T {
        let n = self.values.len() as i64;
        let k = match self.boundary {
            Boundary::Periodic => i.rem_euclid(n),
            Boundary::ConstantExtension => i.clamp(0, n - 1),
        };
        &self.values[k as usize]
    }

    /// Evaluate the profile at an arbitrary `s`.
    pub fn eval(&self, s: f64) -> T {
        let u = (s - self.grid.start) / self.grid.step;
        let n = self.values.len();
        if self.boundary == Boundary::ConstantExtension {
            if u <= 0.0 {
                return self.values[0].clone();
            }
            if u >= (n - 1) as f64 {
                return self.values[n - 1].clone();
            }
        }
        match self.kind {
            SampleKind::PiecewiseConstant => self.sample(u.round() as i64).clone(),
            SampleKind::Smooth => {
                if n < 4 {
                    let i = u.floor();
                    let x = u - i;
                    let i = i as i64;
                    return T::combine(&[(1.0 - x, self.sample(i)), (x, self.sample(i + 1))]);
                }
                let i = u.floor();
                let x = u - i;
                let i = i as i64;
                let w = lagrange4(x);
                T::combine(&[
                    (w[0], self.sample(i - 1)),
                    (w[1], self.sample(i)),
                    (w[2], self.sample(i + 1)),
                    (w[3], self.sample(i + 2)),
                ])
            }
        }
    }

    /// Convert a piecewise-constant profile to an explicit step profile
    /// whose cells are centred on the samples.
    pub fn to_step_profile(&self) -> StepProfile<T> {
        let g = &self.grid;
        let breaks = (0..=g.len).map(|k| g.start + (k as f64 - 0.5) * g.step).collect();
        StepProfile { breaks, values: self.values.clone(), boundary: self.boundary }
    }
}

/// Four-point Lagrange weights for nodes `-1, 0, 1, 2` at `x` in `[0, 1)`.
#[inline]
pub fn lagrange4(x: f64) -> [f64; 4] {
    [
        -x * (x - 1.0) * (x - 2.0) / 6.0,
        (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0,
        -(x + 1.0) * x * (x - 2.0) / 2.0,
        (x + 1.0) * x * (x - 1.0) / 6.0,
    ]
}

/// Piecewise-constant function with arbitrary breakpoints. Piece `j`
/// covers `[breaks[j], breaks[j + 1])`.
#[derive(Debug, Clone)]
pub struct StepProfile<T> {
    breaks: Vec<f64>,
    values: Vec<T>,
    boundary: Boundary,
}

impl<T: Sample> StepProfile<T> {
    pub fn new(breaks: Vec<f64>, values: Vec<T>, boundary: Boundary) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::precondition(format!(
                "step profile needs pieces + 1 breakpoints, got {} and {}",
                breaks.len(),
                values.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::precondition("step profile breakpoints must be finite and strictly increasing"));
        }
        Ok(Self { breaks, values, boundary })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    pub fn width(&self, j: usize) -> f64 {
        self.breaks[j + 1] - self.breaks[j]
    }

    pub fn start(&self) -> f64 {
        self.breaks[0]
    }

    pub fn end(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    pub fn period(&self) -> f64 {
        self.end() - self.start()
    }

    /// Index of the piece containing `s` after periodic reduction; for
    /// constant extension, `None` below the first and above the last piece.
    pub fn locate(&self, s: f64) -> Option<usize> {
        let s = match self.boundary {
            Boundary::Periodic => self.start() + (s - self.start()).rem_euclid(self.period()),
            Boundary::ConstantExtension => {
                if s < self.start() || s >= self.end() {
                    return None;
                }
                s
            }
        };
        let j = self.breaks.partition_point(|b| *b <= s);
        Some(j.saturating_sub(1).min(self.values.len() - 1))
    }

    pub fn eval(&self, s: f64) -> T {
        match self.locate(s) {
            Some(j) => self.values[j].clone(),
            None if s < self.start() => self.values[0].clone(),
            None => self.values[self.values.len() - 1].clone(),
        }
    }

    pub fn map<U: Sample>(&self, f: impl Fn(&T) -> U) -> StepProfile<U> {
        StepProfile {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(f).collect(),
            boundary: self.boundary,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let g = UniformGrid::new(0.0, 0.1, 40).unwrap();
        let p = Profile::from_fn(g, Boundary::ConstantExtension, SampleKind::Smooth, |s| s * s * s - s);
        let s = 1.234;
        assert!((p.eval(s) - (s * s * s - s)).abs() < 1e-12);
    }

    #[test]
    fn periodic_wraps_and_constant_extends() {
        let g = UniformGrid::covering(0.0, 1.0, 10).unwrap();
        let p = Profile::from_fn(g, Boundary::Periodic, SampleKind::PiecewiseConstant, |s| s);
        assert_eq!(p.eval(1.31), p.eval(0.31));
        let q = Profile::from_fn(g, Boundary::ConstantExtension, SampleKind::Smooth, |s| s);
        assert_eq!(q.eval(-5.0), 0.0);
        assert_eq!(q.eval(5.0), 0.9);
    }

    #[test]
    fn step_profile_lookup() {
        let p = StepProfile::new(vec![0.0, 0.5, 2.0], vec![1.0, 2.0], Boundary::Periodic).unwrap();
        assert_eq!(p.eval(0.2), 1.0);
        assert_eq!(p.eval(0.5), 2.0);
        assert_eq!(p.eval(2.2), 1.0);
        assert_eq!(p.eval(-0.1), 2.0);
        assert!(StepProfile::new(vec![0.0, 0.0], vec![1.0], Boundary::Periodic).is_err());
    }

    #[test]
    fn piecewise_constant_cells_are_centred() {
        let g = UniformGrid::new(0.0, 1.0, 3).unwrap();
        let p = Profile::new(g, Boundary::ConstantExtension, SampleKind::PiecewiseConstant, vec![1.0, 2.0, 3.0]).unwrap();
        let st = p.to_step_profile();
        assert_eq!(st.breaks(), &[-0.5, 0.5, 1.5, 2.5]);
        assert_eq!(p.eval(0.6), 2.0);
        assert_eq!(st.eval(0.6), 2.0);
    }
}
