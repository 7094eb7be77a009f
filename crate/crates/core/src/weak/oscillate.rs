use serde::{Deserialize, Serialize};

use super::pairing::t_coordinates;
use crate::error::{Error, Result};
use crate::profile::{Boundary, Profile, StepProfile};
use crate::state_geometry::{decompose_to_m, membership, ConvexDecomposition, ManifoldParams, SetId, StateU};

/// Order of the decomposition points inside each oscillation cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    Forward,
    Reversed,
}

/// Cells of width about `1/n`, each split into subcells proportional to the
/// weights of the decomposition of the base state at the cell centre.
#[derive(Debug, Clone)]
pub struct OscillationPlan {
    pub n: f64,
    pub base: Profile<StateU>,
    pub start: f64,
    pub cell_width: f64,
    pub layout: Layout,
    pub decompositions: Vec<ConvexDecomposition>,
}

/// Subcells narrower than this fraction of a cell are dropped.
const MIN_SUBCELL: f64 = 1e-12;

impl OscillationPlan {
    pub fn cells(&self) -> usize {
        self.decompositions.len()
    }

    /// Cell count per unit length actually used.
    pub fn effective_n(&self) -> f64 {
        1.0 / self.cell_width
    }

    pub fn center(&self, i: usize) -> f64 {
        self.start + (i as f64 + 0.5) * self.cell_width
    }

    /// The oscillating `M`-valued step field.
    pub fn field(&self) -> Result<StepProfile<StateU>> {
        let mut breaks = Vec::with_capacity(4 * self.cells() + 1);
        let mut values = Vec::with_capacity(4 * self.cells());
        breaks.push(self.start);
        for (i, dec) in self.decompositions.iter().enumerate() {
            let left = self.start + i as f64 * self.cell_width;
            let right = self.start + (i + 1) as f64 * self.cell_width;
            let mut order: Vec<&(f64, StateU)> = dec.points.iter().collect();
            if self.layout == Layout::Reversed {
                order.reverse();
            }
            let mut acc = 0.0;
            for (w, u) in order {
                if *w < MIN_SUBCELL {
                    continue;
                }
                acc += w;
                let b = (left + acc * self.cell_width).min(right);
                if b > *breaks.last().unwrap() {
                    breaks.push(b);
                    values.push(u.clone());
                }
            }
            // close the cell exactly
            *breaks.last_mut().unwrap() = right;
        }
        let boundary = self.base.boundary();
        StepProfile::new(breaks, values, boundary)
    }

    /// Largest gap between cell averages of the T-coordinates and those of
    /// the base at the cell centres.
    pub fn cell_average_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, dec) in self.decompositions.iter().enumerate() {
            let target = t_coordinates(&self.base.eval(self.center(i)));
            let mut avg = vec![0.0; target.len()];
            for (w, u) in &dec.points {
                for (a, c) in avg.iter_mut().zip(t_coordinates(u)) {
                    *a += w * c;
                }
            }
            for (a, b) in avg.iter().zip(&target) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

/// Blocks this close to their sphere are treated as on it.
const SNAP: f64 = 1e-6;

/// Radial snap of each block `(a, c)` lying within `SNAP` of the sphere
/// `a^2 + |c|^2 = 1` onto it. Cubic interpolation of `M`-valued samples
/// misses the sphere by far less than `SNAP` in either direction; without
/// the snap an interior miss would split into points `sqrt(gap)` apart.
fn onto_hull(mut u: StateU) -> StateU {
    let mut blocks = u.blocks();
    let mut changed = false;
    for (a, c) in [&mut blocks.plus, &mut blocks.minus] {
        let cc: f64 = c.iter().map(|x| x * x).sum();
        let miss = (*a * *a + cc - 1.0).abs();
        if miss > 1e-13 && miss <= SNAP && cc > 0.0 {
            let r = ((1.0 - *a * *a).max(0.0) / cc).sqrt();
            c.iter_mut().for_each(|x| *x *= r);
            changed = true;
        }
    }
    if changed {
        let (tau, v) = (u.tau, u.v);
        u = StateU::from_blocks(blocks.plus.0, &blocks.plus.1, blocks.minus.0, &blocks.minus.1);
        u.tau = tau;
        u.v = v;
    }
    u
}

/// Oscillating `M`-valued approximation of `CM`-valued data. Periodic data
/// use one period; constant extension needs end states already on `M`.
pub fn oscillate_profile(base: &Profile<StateU>, n: f64, params: &ManifoldParams, layout: Layout) -> Result<OscillationPlan> {
    params.validate()?;
    if !(n >= 2.0) || !n.is_finite() {
        return Err(Error::precondition(format!("oscillation count must be at least 2, got {n}")));
    }
    let grid = *base.grid();
    let (start, length) = match base.boundary() {
        Boundary::Periodic => (grid.start, grid.period()),
        Boundary::ConstantExtension => {
            for u in [&base.values()[0], &base.values()[base.len() - 1]] {
                if !membership(u, SetId::MAlphaDelta, params, 1e-10)? {
                    return Err(Error::precondition("constant tails of oscillated data must lie on M"));
                }
            }
            (grid.start, grid.end() - grid.start)
        }
    };
    let cells = ((n * length).round() as usize).max(1);
    let cell_width = length / cells as f64;
    let decompositions = (0..cells)
        .map(|i| decompose_to_m(&onto_hull(base.eval(start + (i as f64 + 0.5) * cell_width)), params))
        .collect::<Result<Vec<_>>>()?;
    Ok(OscillationPlan { n, base: base.clone(), start, cell_width, layout, decompositions })
}
