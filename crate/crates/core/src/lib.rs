//! Core library for hosting and analysing crowdsourced visual experiments.
//!
//! The crate covers the experiment model (specs, trial tables, result
//! schemas), gauge-figure geometry (slant/tilt conversion, Delaunay
//! sampling, relief integration), statistics, experiment authoring and the
//! report-producing analyses built on top of them.

pub mod analysis;
pub mod authoring;
pub mod geometry;
pub mod model;
pub mod shuffle;
pub mod stats;
pub mod table;

pub use analysis::{analyze, AnalysisError, AnalyzeOptions, ReportBundle};
pub use authoring::{make_experiment, AuthoringError, AuthoringOptions};
pub use geometry::{Point, Triangulation};
pub use model::{ExperimentSpec, Paradigm, ResultRecord, StimulusRef};
pub use shuffle::{mix_seed, randomize_trials};
pub use table::{parse_trial_table, TrialTable};
