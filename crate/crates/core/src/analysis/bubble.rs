use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{csv, file_stem, stats_err, AnalysisError, LoadedResults, ReportBundle};
use crate::geometry::Point;
use crate::model::{ExperimentSpec, ResultRecord};
use crate::stats::click_density;

const DEFAULT_RADIUS_PX: f64 = 32.0;

pub(super) fn run(
    spec: &ExperimentSpec,
    loaded: &LoadedResults,
    bundle: &mut ReportBundle,
    summary: &mut String,
) -> Result<(), AnalysisError> {
    let radius = spec.parameter("radius-px").unwrap_or(DEFAULT_RADIUS_PX);
    let mut clicks: BTreeMap<&str, Vec<Point>> = BTreeMap::new();
    let mut unknown = 0usize;
    let mut outside = 0usize;
    for r in loaded.records() {
        let ResultRecord::Bubble(b) = r else { continue };
        let Some(stim) = spec.stimulus(&b.image_name) else {
            unknown += 1;
            continue;
        };
        if !(b.x >= 0.0 && b.y >= 0.0 && b.x < stim.width_px as f64 && b.y < stim.height_px as f64)
        {
            outside += 1;
            continue;
        }
        clicks
            .entry(stim.name.as_str())
            .or_default()
            .push(Point::new(b.x, b.y));
    }

    let _ = writeln!(summary, "bubble radius: {radius} px");
    let _ = writeln!(summary, "clicks on unknown images: {unknown}");
    let _ = writeln!(summary, "clicks outside image bounds: {outside}");
    let mut rows = Vec::new();
    for (image, pts) in &clicks {
        let stim = spec.stimulus(image).expect("filtered above");
        let grid = click_density(pts, stim.width_px as usize, stim.height_px as usize, radius)
            .map_err(stats_err(format!("density for {image}")))?;
        let stem = file_stem(image);
        bundle.add(format!("density/{stem}.csv"), grid.to_csv());
        bundle.add(format!("density/{stem}.pgm"), grid.to_pgm());
        rows.push(vec![
            image.to_string(),
            pts.len().to_string(),
            grid.max().to_string(),
        ]);
        let _ = writeln!(
            summary,
            "{image}: {} clicks, peak overlap {}",
            pts.len(),
            grid.max()
        );
    }
    bundle.add(
        "images.csv",
        csv(&["imageName", "clicks", "peakCount"], rows),
    );

    let mut descriptions: Vec<Vec<String>> = loaded
        .descriptions
        .iter()
        .map(|d| vec![d.image_name.clone(), d.session.clone(), d.text.clone()])
        .collect();
    descriptions.sort();
    bundle.add(
        "descriptions.csv",
        csv(&["imageName", "session", "text"], descriptions),
    );
    Ok(())
}
