//! File formats, experiment runners and the command-line front end for
//! [`efe_core`].

pub mod compare;
pub mod config;
pub mod error;
pub mod io;
pub mod learn;
pub mod policy;
pub mod simulate;

pub use compare::{run_compare, BetaThreshold, ComparisonDetail, ComparisonReport, ComparisonRow};
pub use config::{ExperimentConfig, ModelSource, OutputPaths, RandomSuite, Scheme};
pub use error::{PlannerError, Result};
pub use learn::{run_learn, LearnOutcome, LearnedModel, LearningMetric};
pub use simulate::{run_simulate, EpisodeRecord, SimulationReport, SimulationRow};
