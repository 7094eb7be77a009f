//! Canned initial data built in block coordinates, where membership in
//! `M`, `CM` and `G_{alpha,delta}` is explicit.

use crate::profile::{Boundary, Profile, SampleKind, UniformGrid};
use crate::state_geometry::StateU;

/// Unit vector in `R^d` from two angles.
pub fn unit_vector(d: usize, theta: f64, phi: f64) -> Vec<f64> {
    match d {
        1 => vec![1.0],
        2 => vec![theta.cos(), theta.sin()],
        _ => {
            let mut e = vec![0.0; d];
            e[0] = theta.cos();
            e[1] = theta.sin() * phi.cos();
            e[2] = theta.sin() * phi.sin();
            e
        }
    }
}

/// Block data `(a+, c+, a-, c-)` as functions of `s`.
pub trait BlockData: Sync {
    fn a_plus(&self, s: f64) -> f64;
    fn a_minus(&self, s: f64) -> f64;
    fn c_plus(&self, s: f64) -> Vec<f64>;
    fn c_minus(&self, s: f64) -> Vec<f64>;

    fn state(&self, s: f64) -> StateU {
        StateU::from_blocks(self.a_plus(s), &self.c_plus(s), self.a_minus(s), &self.c_minus(s))
    }
}

/// `2 pi`-periodic smooth data with `a+` in `[0.3, 0.8]`, `a-` in
/// `[-0.7, -0.3]` (so `alpha = 0`, `delta = 0.3`) and block radii scaled by
/// `rho` (`rho = 1` lies on `M`).
#[derive(Debug, Clone, Copy)]
pub struct SmoothBlocks {
    pub d: usize,
    pub hull: bool,
}

impl SmoothBlocks {
    fn rho_plus(&self, s: f64) -> f64 {
        if self.hull {
            0.7 + 0.2 * (s + 1.0).sin()
        } else {
            1.0
        }
    }

    fn rho_minus(&self, s: f64) -> f64 {
        if self.hull {
            0.7 - 0.2 * s.cos()
        } else {
            1.0
        }
    }
}

impl BlockData for SmoothBlocks {
    fn a_plus(&self, s: f64) -> f64 {
        0.55 + 0.25 * s.sin()
    }

    fn a_minus(&self, s: f64) -> f64 {
        -0.5 + 0.2 * (2.0 * s).cos()
    }

    fn c_plus(&self, s: f64) -> Vec<f64> {
        let a = self.a_plus(s);
        let r = self.rho_plus(s) * (1.0 - a * a).sqrt();
        let e = unit_vector(self.d, 1.0 + 0.5 * s.sin(), 0.8 * s.cos());
        e.into_iter().map(|x| r * x).collect()
    }

    fn c_minus(&self, s: f64) -> Vec<f64> {
        let a = self.a_minus(s);
        let r = self.rho_minus(s) * (1.0 - a * a).sqrt();
        let sign = if self.d == 1 { -1.0 } else { 1.0 };
        let e = unit_vector(self.d, 0.6 + 0.4 * s.cos(), 1.3 * (2.0 * s).sin());
        e.into_iter().map(|x| sign * r * x).collect()
    }
}

/// Localised data equal to a constant state outside `[-4, 4]`.
#[derive(Debug, Clone, Copy)]
pub struct LocalizedBlocks {
    pub d: usize,
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 4.0 {
        0.0
    } else {
        let x = s / 4.0;
        (1.0 - x * x).powi(4)
    }
}

impl BlockData for LocalizedBlocks {
    fn a_plus(&self, s: f64) -> f64 {
        0.5 + 0.2 * bump(s) * (1.5 * s).sin()
    }

    fn a_minus(&self, s: f64) -> f64 {
        -0.45 + 0.15 * bump(s) * s.cos()
    }

    fn c_plus(&self, s: f64) -> Vec<f64> {
        let a = self.a_plus(s);
        let e = unit_vector(self.d, 0.4 + 0.6 * bump(s), 0.5 * bump(s) * s);
        e.into_iter().map(|x| (1.0 - a * a).sqrt() * x).collect()
    }

    fn c_minus(&self, s: f64) -> Vec<f64> {
        let a = self.a_minus(s);
        let e = unit_vector(self.d, 1.2 - 0.5 * bump(s), -0.7 * bump(s));
        e.into_iter().map(|x| (1.0 - a * a).sqrt() * x).collect()
    }
}

pub fn sample_blocks(data: &dyn BlockData, grid: UniformGrid, boundary: Boundary) -> Profile<StateU> {
    Profile::from_fn(grid, boundary, SampleKind::Smooth, |s| data.state(s))
}

/// Smooth `M`-valued periodic data on `[0, 2 pi)`.
pub fn smooth_m_profile(d: usize, n: usize) -> Profile<StateU> {
    let g = UniformGrid::covering(0.0, 2.0 * std::f64::consts::PI, n).expect("positive n");
    sample_blocks(&SmoothBlocks { d, hull: false }, g, Boundary::Periodic)
}

/// Smooth `CM`-valued periodic data on `[0, 2 pi)`, off `M` everywhere.
pub fn smooth_hull_profile(d: usize, n: usize) -> Profile<StateU> {
    let g = UniformGrid::covering(0.0, 2.0 * std::f64::consts::PI, n).expect("positive n");
    sample_blocks(&SmoothBlocks { d, hull: true }, g, Boundary::Periodic)
}

/// Localised `M`-valued data on `[-6, 6]` with constant tails.
pub fn localized_m_profile(d: usize, n: usize) -> Profile<StateU> {
    let g = UniformGrid::linspace(-6.0, 6.0, n).expect("positive n");
    sample_blocks(&LocalizedBlocks { d }, g, Boundary::ConstantExtension)
}
