//! Scenario runner for `combpulse-core`: declarative JSON configs, the
//! figure presets, and CSV/JSON artifact emission.

pub mod error;
pub mod presets;
pub mod runner;
pub mod scenario;

pub use error::CliError;
pub use runner::{compute, load, Outcome, Overrides};
pub use scenario::Scenario;
