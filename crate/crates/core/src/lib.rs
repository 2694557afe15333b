//! Supervised actor-critic learning on deterministic gridworlds.
//!
//! The agent is a composite of three parts: an actor holding action values
//! and a softmax behaviour policy, a critic holding state values and emitting
//! temporal-difference errors, and a supervisor whose hints are mixed into
//! the actor's choices under a decaying gain. The [`experiment`] module runs
//! seeded multi-trial training on the 3x5 sailing grid and writes CSV logs.

pub mod actor;
pub mod critic;
pub mod env;
pub mod error;
pub mod experiment;
pub mod report;
pub mod supervisor;

pub use actor::{Policy, QTable};
pub use critic::{TdVariant, ValueTable};
pub use env::{grid_sailing_task, Action, Cell, GridWorld};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ExperimentLog, RunSummary};
pub use supervisor::SupervisorSpec;
