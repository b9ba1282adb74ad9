//! Silent self-stabilising leader election by movement for particles on the
//! triangular grid: grid geometry, configurations, the local rules, a
//! sequential scheduler, invariant checking and an exhaustive model checker.

pub mod algorithm;
pub mod configuration;
pub mod engine;
pub mod generate;
pub mod grid;
pub mod modelcheck;
pub mod render;
pub mod service;
pub mod verify;

pub use algorithm::{ConditionId, Decision, LocalView};
pub use configuration::{Body, Boundaries, ConfigError, Configuration, Pid};
pub use engine::{run, RunOptions, RunResult, StepEvent, Strategy, Trace};
pub use generate::generate_random;
pub use grid::{Direction, NodeCoord};
pub use verify::{CheckReport, ProgressVector};
