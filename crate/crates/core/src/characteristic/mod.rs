//! Exact global integration of the augmented system along characteristics.
//!
//! Initial data are integrated once into the flow `xi0` (fourth-order
//! Runge-Kutta for smooth samples, exactly for step data); every later time
//! is an explicit evaluation of the d'Alembert formulas followed by a
//! monotone root solve for the Lagrangian coordinate.

mod analysis;
mod flow;
mod solution;
mod table;

pub use analysis::{
    convergence_order, reconstruct_x, residual_augmented, residual_string, string_derivatives, xi_wave_residual,
    ResidualField, TimeSlices,
};
pub use flow::{admissibility, admissibility_steps, build_flow, Admissibility, CharacteristicFlow, Slab};
pub use solution::{galilean_on_solution, solve_augmented, GalileanView, XiSample, Y_TOL};

#[cfg(test)]
mod tests;
