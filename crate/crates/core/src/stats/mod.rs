//! Statistical procedures used by the analyses.

mod clicks;
mod modes;
mod regression;
mod ttest;

use thiserror::Error;

pub use clicks::{
    classify_click, click_density, filter_valid_trials, ClickEvent, DensityGrid, FlickerTarget,
    CORRECT_RADIUS, REVEAL_MS,
};
pub use modes::{composition_modes, kde, Mode};
pub use regression::{
    fit_elevation, fit_trend, Coefficient, ElevationEstimate, FigureAnnotation, OffsetMode,
    StatResult,
};
pub use ttest::{student_t_two_sided_p, ttest_independent, TTestResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} observations, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("pooled variance is zero")]
    ZeroVariance,
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("design is singular: all predictor values are equal")]
    SingularDesign,
    #[error("figure {0} has non-positive height")]
    ZeroHeight(usize),
    #[error("click ({x}, {y}) lies outside the {width}x{height} image")]
    ClickOutside {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("input contains a non-finite value")]
    NonFinite,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sum of squared deviations from the mean (two-pass).
fn sum_sq_dev(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}
