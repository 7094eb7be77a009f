//! Numerical laboratory for graph-like relativistic strings.
//!
//! The augmented system in the rescaled variables `(tau, v, eta, zeta)` is
//! integrated exactly through its characteristic flow and d'Alembert's
//! formula ([`characteristic`]), cross-checked against a first-order
//! finite-volume scheme for the conservative `(Y, Z)` form
//! ([`conservative`]), and used to run weak-* compactness experiments in
//! which relativistic strings accumulate on subrelativistic ones
//! ([`weak`]).
//!
//! Pointwise algebra (Legendre structure, the transform `T`, constraint
//! sets and the convex decomposition of hull points) lives in
//! [`state_geometry`]; the linear wave family and its explicit oscillating
//! example live in [`wave_family`].

pub mod characteristic;
pub mod conservative;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod profile;
pub mod quadrature;
pub mod state_geometry;
pub mod wave_family;
pub mod weak;

pub use error::{Error, Result};
pub use profile::{Boundary, Profile, SampleKind, StepProfile, UniformGrid};
pub use state_geometry::{ManifoldParams, SetId, SignBranch, StateHQYZ, StateU};
