use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::test_function::TestFunction;
use crate::characteristic::CharacteristicFlow;
use crate::error::{Error, Result};
use crate::profile::{Boundary, Profile, StepProfile, UniformGrid};
use crate::quadrature::integrate_vec;
use crate::state_geometry::{SignBranch, StateU};

/// Quantities paired against test functions. The T-coordinates are
/// `h = 1/tau`, `q = v/tau`, `Y = eta/tau`, `Z = zeta/tau`; the shifted
/// forms `q + eps` and `Y - eps Z` are the transported combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    H,
    Q,
    Y(usize),
    Z(usize),
    /// `q + eps`
    QShift(SignBranch),
    /// `Y_i - eps Z_i`
    YZ(SignBranch, usize),
}

/// `(h, q, Y, Z)` flattened: `[h, q, Y_1..Y_d, Z_1..Z_d]`.
pub fn t_coordinates(u: &StateU) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 + 2 * u.dim());
    write_t_coordinates(u, &mut out);
    out
}

fn write_t_coordinates(u: &StateU, out: &mut Vec<f64>) {
    let h = 1.0 / u.tau;
    out.push(h);
    out.push(u.v * h);
    out.extend(u.eta.iter().map(|x| x * h));
    out.extend(u.zeta.iter().map(|x| x * h));
}

impl Observable {
    /// Value from the paired T-coordinates `p` of a test function with
    /// integral `mass`.
    pub fn from_pairings(&self, p: &[f64], mass: f64) -> Result<f64> {
        let d = (p.len() - 2) / 2;
        let check = |i: usize| {
            if i < d {
                Ok(())
            } else {
                Err(Error::precondition(format!("component {i} out of range for dimension {d}")))
            }
        };
        Ok(match *self {
            Observable::H => p[0],
            Observable::Q => p[1],
            Observable::Y(i) => {
                check(i)?;
                p[2 + i]
            }
            Observable::Z(i) => {
                check(i)?;
                p[2 + d + i]
            }
            Observable::QShift(b) => p[1] + b.eps() * mass,
            Observable::YZ(b, i) => {
                check(i)?;
                p[2 + i] - b.eps() * p[2 + d + i]
            }
        })
    }
}

/// Field at one time, either sampled smooth data or an exact step field.
#[derive(Debug, Clone)]
pub enum Field {
    Smooth(Profile<StateU>),
    Steps(StepProfile<StateU>),
}

impl Field {
    pub fn dim(&self) -> usize {
        match self {
            Field::Smooth(p) => p.values()[0].dim(),
            Field::Steps(p) => p.values()[0].dim(),
        }
    }

    /// Pairings of every T-coordinate with each function of `family`.
    pub fn pair_family(&self, family: &[TestFunction]) -> Vec<Vec<f64>> {
        match self {
            Field::Smooth(p) => family.par_iter().map(|g| pair_smooth(p, g)).collect(),
            Field::Steps(p) => {
                let c = StepCoords::new(p);
                family.par_iter().map(|g| c.pair(g)).collect()
            }
        }
    }
}

/// Pairing `int observable * g ds` of sampled data. Periodic data pair with
/// the periodisation of `g` over one period.
pub fn pairing(p: &Profile<StateU>, g: &TestFunction, observable: Observable) -> Result<f64> {
    observable.from_pairings(&pair_smooth(p, g), g.integral())
}

/// Exact pairing of a step field.
pub fn pairing_steps(p: &StepProfile<StateU>, g: &TestFunction, observable: Observable) -> Result<f64> {
    observable.from_pairings(&StepCoords::new(p).pair(g), g.integral())
}

/// Image shifts `m L` of a periodic window `[start, start + period)` that
/// meet the support `[lo, hi]`: the window shifted is `[start + mL, ...)`.
fn image_range(start: f64, period: f64, lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
    let m_lo = ((lo - start - period) / period).floor() as i64;
    let m_hi = ((hi - start) / period).ceil() as i64;
    m_lo..=m_hi
}

/// Gauss quadrature against the cubic interpolant, split at grid nodes and
/// at the kinks of `g`.
fn pair_smooth(p: &Profile<StateU>, g: &TestFunction) -> Vec<f64> {
    let width = 2 + 2 * p.values()[0].dim();
    let grid = *p.grid();
    let panel = grid.step.min(g.scale() / 4.0);
    let (lo, hi) = g.support();
    let kinks = g.kinks();
    let integrand = |shift: f64| {
        move |s: f64, out: &mut [f64]| {
            let w = g.eval(s + shift);
            if w == 0.0 {
                return;
            }
            let u = p.eval(s);
            let h = 1.0 / u.tau;
            out[0] = w * h;
            out[1] = w * u.v * h;
            let d = u.dim();
            for i in 0..d {
                out[2 + i] = w * u.eta[i] * h;
                out[2 + d + i] = w * u.zeta[i] * h;
            }
        }
    };
    let nodes_in = |a: f64, b: f64| -> Vec<f64> {
        let k0 = ((a - grid.start) / grid.step).ceil().max(0.0) as i64;
        let k1 = ((b - grid.start) / grid.step).floor() as i64;
        (k0..=k1).map(|k| grid.start + k as f64 * grid.step).collect()
    };
    let mut total = vec![0.0; width];
    match p.boundary() {
        Boundary::Periodic => {
            let (start, period) = (grid.start, grid.period());
            for m in image_range(start, period, lo, hi) {
                let shift = m as f64 * period;
                let a = start.max(lo - shift);
                let b = (start + period).min(hi - shift);
                if !(b > a) {
                    continue;
                }
                let mut br = nodes_in(a, b);
                br.extend(kinks.iter().map(|k| k - shift));
                let part = integrate_vec(a, b, &br, panel, width, integrand(shift));
                total.iter_mut().zip(part).for_each(|(t, v)| *t += v);
            }
        }
        Boundary::ConstantExtension => {
            let mut br = nodes_in(lo, hi);
            br.extend(kinks.iter().copied());
            let tail_panel = panel.max(g.scale() / 8.0);
            let first = grid.start;
            let last = grid.end();
            let inner = integrate_vec(lo.max(first), hi.min(last), &br, panel, width, integrand(0.0));
            let left = integrate_vec(lo, hi.min(first), &kinks, tail_panel, width, integrand(0.0));
            let right = integrate_vec(lo.max(last), hi, &kinks, tail_panel, width, integrand(0.0));
            for c in 0..width {
                total[c] = inner[c] + left[c] + right[c];
            }
        }
    }
    total
}

/// Step field with precomputed T-coordinates per piece.
pub struct StepCoords {
    breaks: Vec<f64>,
    coords: Vec<f64>,
    width: usize,
    boundary: Boundary,
}

impl StepCoords {
    pub fn new(p: &StepProfile<StateU>) -> Self {
        let width = 2 + 2 * p.values()[0].dim();
        let mut coords = Vec::with_capacity(width * p.pieces());
        for u in p.values() {
            write_t_coordinates(u, &mut coords);
        }
        Self { breaks: p.breaks().to_vec(), coords, width, boundary: p.boundary() }
    }

    fn piece(&self, j: usize) -> &[f64] {
        &self.coords[j * self.width..(j + 1) * self.width]
    }

    /// Sum over the pieces meeting `[lo, hi]` after shifting by `shift`.
    fn accumulate(&self, g: &TestFunction, shift: f64, lo: f64, hi: f64, out: &mut [f64]) {
        let b = &self.breaks;
        let n = b.len() - 1;
        let j0 = b.partition_point(|x| x + shift <= lo).saturating_sub(1);
        let mut g_prev = g.antiderivative(b[j0] + shift);
        for j in j0..n {
            let g_next = g.antiderivative(b[j + 1] + shift);
            let m = g_next - g_prev;
            if m != 0.0 {
                for (o, c) in out.iter_mut().zip(self.piece(j)) {
                    *o += m * c;
                }
            }
            g_prev = g_next;
            if b[j + 1] + shift >= hi {
                break;
            }
        }
    }

    pub fn pair(&self, g: &TestFunction) -> Vec<f64> {
        let mut out = vec![0.0; self.width];
        let (lo, hi) = g.support();
        let start = self.breaks[0];
        let end = self.breaks[self.breaks.len() - 1];
        match self.boundary {
            Boundary::Periodic => {
                let period = end - start;
                // the window shifted by m L pairs with g directly
                for m in image_range(start, period, lo, hi) {
                    let shift = m as f64 * period;
                    if start + shift >= hi || end + shift <= lo {
                        continue;
                    }
                    self.accumulate(g, shift, lo, hi, &mut out);
                }
            }
            Boundary::ConstantExtension => {
                self.accumulate(g, 0.0, lo, hi, &mut out);
                let left = g.antiderivative(start);
                let right = g.integral() - g.antiderivative(end);
                let last = self.coords.len() / self.width - 1;
                for c in 0..self.width {
                    out[c] += left * self.coords[c] + right * self.piece(last)[c];
                }
            }
        }
        out
    }
}

/// Pairings `values[time][function][coordinate]` of an evolving field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingTable {
    pub times: Vec<f64>,
    pub family: Vec<TestFunction>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl PairingTable {
    pub fn build(times: &[f64], family: &[TestFunction], mut field_at: impl FnMut(f64) -> Result<Field>) -> Result<Self> {
        let mut values = Vec::with_capacity(times.len());
        for &t in times {
            values.push(field_at(t)?.pair_family(family));
        }
        Ok(Self { times: times.to_vec(), family: family.to_vec(), values })
    }

    /// Pairings of a characteristic solution; smooth data are sampled on
    /// `grid` at each time, step data are paired exactly.
    pub fn from_flow(flow: &CharacteristicFlow, grid: Option<UniformGrid>, times: &[f64], family: &[TestFunction]) -> Result<Self> {
        Self::build(times, family, |t| evolved_field(flow, t, grid))
    }

    pub fn dim(&self) -> usize {
        (self.values[0][0].len() - 2) / 2
    }

    fn check_shape(&self, other: &PairingTable) -> Result<()> {
        let same_times = self.times.len() == other.times.len() && self.times.iter().zip(&other.times).all(|(a, b)| a == b);
        if !same_times || self.family != other.family || self.dim() != other.dim() {
            return Err(Error::precondition("pairing tables differ in times, family or dimension"));
        }
        Ok(())
    }

    /// Largest gap per time slice.
    pub fn distance_per_time(&self, other: &PairingTable) -> Result<Vec<f64>> {
        self.check_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
                    .fold(0.0, f64::max)
            })
            .collect())
    }

    /// Largest gap per `(time, function)` pair.
    pub fn gaps(&self, other: &PairingTable) -> Result<Vec<Vec<f64>>> {
        self.check_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
                    .collect()
            })
            .collect())
    }

    pub fn zip_with(&self, other: &PairingTable, f: impl Fn(f64, f64) -> f64) -> Result<PairingTable> {
        self.check_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| f(*p, *q)).collect()).collect())
            .collect();
        Ok(PairingTable { times: self.times.clone(), family: self.family.clone(), values })
    }
}

/// Computable surrogate for the weak-* distance: the largest gap of
/// T-coordinate pairings over the sampled times and test family.
pub fn weak_distance(a: &PairingTable, b: &PairingTable) -> Result<f64> {
    Ok(a.distance_per_time(b)?.into_iter().fold(0.0, f64::max))
}

/// Richardson extrapolation in `1/n`: removes the first-order term of
/// pairings measured at oscillation counts `n1 < n2`.
pub fn richardson(p1: &PairingTable, n1: f64, p2: &PairingTable, n2: f64) -> Result<PairingTable> {
    if !(n2 > n1 && n1 > 0.0) {
        return Err(Error::precondition("Richardson extrapolation needs 0 < n1 < n2"));
    }
    p1.zip_with(p2, |a, b| (n2 * b - n1 * a) / (n2 - n1))
}

/// Field of a characteristic solution at time `t`.
pub fn evolved_field(flow: &CharacteristicFlow, t: f64, grid: Option<UniformGrid>) -> Result<Field> {
    if flow.is_step_data() {
        return Ok(Field::Steps(flow.step_field(t)?));
    }
    let grid = grid.ok_or_else(|| Error::precondition("smooth solutions need a sampling grid"))?;
    Ok(Field::Smooth(flow.solve_on(t, grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::{admissibility, CharacteristicFlow};
    use crate::fixtures::{localized_m_profile, smooth_hull_profile};
    use crate::profile::SampleKind;
    use crate::quadrature::integrate;
    use crate::weak::default_family;

    fn constant(boundary: Boundary) -> Profile<StateU> {
        let u = StateU::new(0.5, 0.2, vec![0.3, -0.1], vec![0.0, 0.4]).unwrap();
        let grid = UniformGrid::covering(-3.0, 6.0, 64).unwrap();
        Profile::from_fn(grid, boundary, SampleKind::Smooth, |_| u.clone())
    }

    #[test]
    fn constant_observable_pairs_to_mass() {
        for boundary in [Boundary::Periodic, Boundary::ConstantExtension] {
            let p = constant(boundary);
            for g in default_family(-3.0, 6.0) {
                let m = g.integral();
                assert!((pairing(&p, &g, Observable::H).unwrap() - 2.0 * m).abs() < 1e-8, "{}", g.label());
                assert!((pairing(&p, &g, Observable::Q).unwrap() - 0.4 * m).abs() < 1e-8);
                assert!((pairing(&p, &g, Observable::Z(1)).unwrap() - 0.8 * m).abs() < 1e-8);
                let plus = pairing(&p, &g, Observable::QShift(SignBranch::Plus)).unwrap();
                assert!((plus - 1.4 * m).abs() < 1e-8);
                let yz = pairing(&p, &g, Observable::YZ(SignBranch::Minus, 0)).unwrap();
                assert!((yz - 0.6 * m).abs() < 1e-8);
                let steps = p.to_step_profile();
                assert!((pairing_steps(&steps, &g, Observable::H).unwrap() - 2.0 * m).abs() < 1e-10);
            }
        }
        assert!(pairing(&constant(Boundary::Periodic), &default_family(0.0, 1.0)[0], Observable::Y(5)).is_err());
    }

    #[test]
    fn periodic_step_pairing_matches_direct_quadrature() {
        let base = smooth_hull_profile(2, 64).with_kind(SampleKind::PiecewiseConstant).to_step_profile();
        let c = StepCoords::new(&base);
        let l = base.period();
        for g in default_family(0.0, l) {
            let (lo, hi) = g.support();
            let mut br: Vec<f64> = g.kinks();
            let shifts = image_range(base.start(), l, lo, hi);
            for m in shifts {
                br.extend(base.breaks().iter().map(|b| b + m as f64 * l));
            }
            let exact = c.pair(&g);
            let q = integrate(lo, hi, &br, 0.01, |s| g.eval(s) * t_coordinates(&base.eval(s))[3]);
            assert!((exact[3] - q).abs() < 1e-9, "{} {} {}", g.label(), exact[3], q);
        }
    }

    #[test]
    fn h_pairing_counts_lagrangian_length() {
        // h ds = dy: the h-mass of [xi(t, a), xi(t, b)] is b - a
        let u0 = localized_m_profile(3, 801);
        let flow = CharacteristicFlow::build(&u0, admissibility(&u0).unwrap().slab()).unwrap();
        let grid = UniformGrid::linspace(-12.0, 12.0, 4801).unwrap();
        for (t, a, b) in [(0.0, -2.0, 1.5), (0.7, -1.0, 3.0), (-1.3, 0.5, 4.0)] {
            let p = flow.solve_on(t, grid).unwrap();
            let g = TestFunction::Indicator { a: flow.xi(t, a), b: flow.xi(t, b) };
            let v = pairing(&p, &g, Observable::H).unwrap();
            assert!((v - (b - a)).abs() < 1e-7, "t={t}: {v} vs {}", b - a);
        }
    }

    #[test]
    fn richardson_removes_first_order_term() {
        let g = default_family(0.0, 1.0);
        let mk = |n: f64| PairingTable {
            times: vec![0.0],
            family: g[..1].to_vec(),
            values: vec![vec![vec![1.0 + 3.0 / n, 2.0 - 1.0 / n, 0.0, 0.0]]],
        };
        let r = richardson(&mk(10.0), 10.0, &mk(20.0), 20.0).unwrap();
        assert!((r.values[0][0][0] - 1.0).abs() < 1e-14 && (r.values[0][0][1] - 2.0).abs() < 1e-14);
        assert_eq!(weak_distance(&mk(10.0), &mk(10.0)).unwrap(), 0.0);
        assert!((weak_distance(&mk(10.0), &mk(20.0)).unwrap() - 0.15).abs() < 1e-14);
    }
}
