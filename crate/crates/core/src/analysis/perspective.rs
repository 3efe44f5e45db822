//! Per-image viewpoint elevation and its trend over creation year.
//!
//! Figure segments are recorded feet first: `(x1, y1)` is the feet and
//! `(x2, y2)` the head. Without a designated horizon annotator, each
//! annotator's figures are fitted against their own horizon and the image
//! elevation is the median over annotators. With one, that annotator's
//! horizon is applied to the pooled figures of everyone.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{csv, stats_err, AnalysisError, AnalyzeOptions, LoadedResults, ReportBundle};
use crate::model::{AnnotationKind, ExperimentSpec, ResultRecord};
use crate::stats::{fit_elevation, fit_trend, ElevationEstimate, FigureAnnotation, OffsetMode};

#[derive(Default)]
struct Annotations {
    horizon: Option<f64>,
    figures: Vec<FigureAnnotation>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn fit_row(image: &str, source: &str, e: &ElevationEstimate) -> Vec<String> {
    vec![
        image.to_string(),
        source.to_string(),
        e.h.to_string(),
        e.stderr.to_string(),
        e.t.to_string(),
        e.df.to_string(),
        e.p.to_string(),
        e.n.to_string(),
        e.offset.map_or_else(String::new, |o| o.to_string()),
    ]
}

pub(super) fn run(
    spec: &ExperimentSpec,
    loaded: &LoadedResults,
    opts: &AnalyzeOptions,
    bundle: &mut ReportBundle,
    summary: &mut String,
) -> Result<(), AnalysisError> {
    // image -> annotator -> annotations
    let mut images: BTreeMap<&str, BTreeMap<&str, Annotations>> = BTreeMap::new();
    let mut dropped = 0usize;
    for r in loaded.records() {
        let ResultRecord::Perspective(a) = r else {
            continue;
        };
        let entry = images
            .entry(a.image_name.as_str())
            .or_default()
            .entry(a.session.as_str())
            .or_default();
        match a.kind {
            AnnotationKind::Horizon => entry.horizon = Some((a.y1 + a.y2) / 2.0),
            AnnotationKind::Figure if a.y1 > a.y2 => entry.figures.push(FigureAnnotation {
                image_name: a.image_name.clone(),
                annotator: a.session.clone(),
                foot_x: a.x1,
                foot_y: a.y1,
                head_x: a.x2,
                head_y: a.y2,
            }),
            AnnotationKind::Figure => dropped += 1,
        }
    }

    let mode = opts.offset_mode;
    let min_figures = if mode == OffsetMode::FreeOffset { 3 } else { 2 };
    let mut fit_rows = Vec::new();
    let mut elevation_rows = Vec::new();
    let mut trend_points = Vec::new();

    for (image, annotators) in &images {
        let mut estimates = Vec::new();
        match &opts.horizon_annotator {
            Some(chosen) => {
                let Some(horizon) = annotators.get(chosen.as_str()).and_then(|a| a.horizon) else {
                    let _ = writeln!(summary, "{image}: no horizon from {chosen}, skipped");
                    continue;
                };
                let pooled: Vec<FigureAnnotation> = annotators
                    .values()
                    .flat_map(|a| a.figures.iter().cloned())
                    .collect();
                if pooled.len() < min_figures {
                    let _ = writeln!(summary, "{image}: {} figures, skipped", pooled.len());
                    continue;
                }
                let e = fit_elevation(&pooled, horizon, mode)
                    .map_err(stats_err(format!("elevation for {image}")))?;
                fit_rows.push(fit_row(image, &format!("pooled:{chosen}"), &e));
                estimates.push(e.h);
            }
            None => {
                for (annotator, a) in annotators {
                    let Some(horizon) = a.horizon else { continue };
                    if a.figures.len() < min_figures {
                        continue;
                    }
                    let e = fit_elevation(&a.figures, horizon, mode)
                        .map_err(stats_err(format!("elevation for {image} by {annotator}")))?;
                    fit_rows.push(fit_row(image, annotator, &e));
                    estimates.push(e.h);
                }
            }
        }
        if estimates.is_empty() {
            let _ = writeln!(summary, "{image}: no usable annotator, skipped");
            continue;
        }
        let n = estimates.len();
        let elevation = median(estimates);
        let year = spec.stimulus(image).and_then(|s| s.year);
        if let Some(y) = year {
            trend_points.push((y, elevation));
        }
        elevation_rows.push(vec![
            image.to_string(),
            year.map_or_else(String::new, |y| y.to_string()),
            elevation.to_string(),
            n.to_string(),
        ]);
        let _ = writeln!(
            summary,
            "{image}: elevation {elevation:.4} body heights from {n} fit(s)"
        );
    }

    bundle.add(
        "fits.csv",
        csv(
            &[
                "imageName",
                "source",
                "h",
                "stderr",
                "t",
                "df",
                "p",
                "nFigures",
                "offset",
            ],
            fit_rows,
        ),
    );
    bundle.add(
        "elevations.csv",
        csv(&["imageName", "year", "elevation", "nFits"], elevation_rows),
    );
    let _ = writeln!(
        summary,
        "figure segments with feet not below head: {dropped}"
    );

    if trend_points.len() >= 3 {
        let (years, elev): (Vec<f64>, Vec<f64>) = trend_points.into_iter().unzip();
        let trend = fit_trend(&years, &elev).map_err(stats_err("elevation trend"))?;
        let rows = trend.coefficients().map(|c| {
            vec![
                c.name,
                c.estimate.to_string(),
                c.stderr.to_string(),
                c.t.to_string(),
                c.df.to_string(),
                c.p.to_string(),
            ]
        });
        bundle.add(
            "trend.csv",
            csv(&["name", "estimate", "stderr", "t", "df", "p"], rows),
        );
        let _ = writeln!(
            summary,
            "trend: slope {:.6} per year, t({}) = {:.4}, p = {:e}",
            trend.slope, trend.df, trend.t, trend.p
        );
    } else {
        let _ = writeln!(summary, "trend: fewer than 3 dated images, not fitted");
    }
    Ok(())
}
