use std::fmt::Write as _;

use super::{csv, stats_err, AnalysisError, AnalyzeOptions, LoadedResults, ReportBundle};
use crate::model::{ExperimentSpec, ResultRecord};
use crate::stats::{composition_modes, kde};

/// Default bandwidth as a fraction of the canvas width.
pub const DEFAULT_BANDWIDTH_FRACTION: f64 = 0.02;

pub(super) fn run(
    spec: &ExperimentSpec,
    loaded: &LoadedResults,
    opts: &AnalyzeOptions,
    bundle: &mut ReportBundle,
    summary: &mut String,
) -> Result<(), AnalysisError> {
    let canvas = spec
        .stimuli
        .first()
        .ok_or_else(|| AnalysisError::Spec("composition experiment has no stimulus".into()))?;
    let width = canvas.width_px as f64;
    let bandwidth = opts.bandwidth.unwrap_or_else(|| {
        width
            * spec
                .parameter("bandwidth-fraction")
                .unwrap_or(DEFAULT_BANDWIDTH_FRACTION)
    });

    let xs: Vec<f64> = loaded
        .records()
        .filter_map(|r| match r {
            ResultRecord::Composition(c) => Some(c.x),
            _ => None,
        })
        .collect();
    let modes = composition_modes(&xs, bandwidth).map_err(stats_err("composition modes"))?;

    bundle.add(
        "modes.csv",
        csv(
            &["rank", "x", "density"],
            modes
                .iter()
                .enumerate()
                .map(|(i, m)| vec![(i + 1).to_string(), m.x.to_string(), m.density.to_string()]),
        ),
    );
    bundle.add(
        "density.csv",
        csv(
            &["x", "density"],
            (0..canvas.width_px)
                .map(|x| vec![x.to_string(), kde(&xs, bandwidth, x as f64).to_string()]),
        ),
    );

    let _ = writeln!(summary, "placements: {}", xs.len());
    let _ = writeln!(summary, "bandwidth: {bandwidth} px");
    let _ = writeln!(summary, "modes: {}", modes.len());
    for m in &modes {
        let _ = writeln!(summary, "  x = {:.2}, density = {:.6e}", m.x, m.density);
    }
    Ok(())
}
