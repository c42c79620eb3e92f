//! Fairness-bounded centralized pedestrian routing toolkit.
//!
//! Pipeline: [`netmodel`] defines instances, [`pathgen`] enumerates the
//! eligible path set per OD pair, [`lpsolve`] is a generic two-phase
//! simplex solver, [`assignment`] assembles and solves the scalarized
//! path-flow LP, [`metrics`] computes the statistics suite and [`sweep`]
//! drives the (phi, alpha) grid and CSV emission.

pub mod assignment;
pub mod fixtures;
pub mod lpsolve;
pub mod metrics;
pub mod netmodel;
pub mod pathgen;
pub mod sweep;

pub use assignment::{Assignment, ScenarioParams};
pub use metrics::StatsRecord;
pub use netmodel::{GeneratorConfig, Instance};
pub use pathgen::{ODPathSet, Path};
pub use sweep::{SweepConfig, SweepReport};
