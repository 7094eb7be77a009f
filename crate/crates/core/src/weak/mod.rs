//! Weak-* analysis: test-function pairings in the T-coordinates, the weak
//! solution identities, oscillatory approximation of hull data by
//! relativistic data and the completion experiment.

mod completion;
mod identities;
mod oscillate;
mod pairing;
mod test_function;

pub use completion::{run_completion, BaseKind, CompletionConfig, CompletionReport, GalileanSubtest, GapRow, ProbeVerdict};
pub use identities::{lagrangian_sides, verify_generalized_solution, IdentityReport, IdentityResiduals};
pub use oscillate::{oscillate_profile, Layout, OscillationPlan};
pub use pairing::{evolved_field, pairing, pairing_steps, richardson, t_coordinates, weak_distance, Field, Observable, PairingTable, StepCoords};
pub use test_function::{default_family, probe_family, TestFunction};
