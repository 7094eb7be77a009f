use crate::config::{ExperimentConfig, Tolerances};
use crate::output::Output;

pub mod completion;
pub mod simulate;
pub mod thm1;
pub mod validate;

/// Everything an experiment needs after flag and config merging.
pub struct Context {
    pub config: ExperimentConfig,
    pub tolerances: Tolerances,
    pub out: Output,
    pub seed: u64,
    pub inject_fault: bool,
}
