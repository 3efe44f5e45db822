use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{csv, file_stem, AnalysisError, LoadedResults, ReportBundle};
use crate::geometry::{
    reconstruct_relief, relief_csv, triangulation_csv, GaugeSetting, GradientSample,
};
use crate::model::{ExperimentSpec, ResultRecord};

/// Gradient samples for one observer, averaging repeated settings.
fn session_gradients(
    records: &[(usize, f64, f64)],
    triangles: usize,
) -> Result<Vec<GradientSample>, String> {
    let mut acc = vec![(0.0, 0.0, 0u32); triangles];
    for &(index, slant_deg, tilt_deg) in records {
        if index >= triangles {
            return Err(format!("pointIndex {index} has no triangle"));
        }
        let g = GaugeSetting::from_degrees(index, slant_deg, tilt_deg)
            .map_err(|e| format!("pointIndex {index}: {e}"))?
            .gradient();
        acc[index].0 += g.p;
        acc[index].1 += g.q;
        acc[index].2 += 1;
    }
    let missing = acc.iter().filter(|a| a.2 == 0).count();
    if missing > 0 {
        return Err(format!(
            "{missing} of {triangles} sample points have no setting"
        ));
    }
    Ok(acc
        .iter()
        .enumerate()
        .map(|(i, &(p, q, n))| GradientSample {
            triangle_index: i,
            p: p / n as f64,
            q: q / n as f64,
        })
        .collect())
}

pub(super) fn run(
    spec: &ExperimentSpec,
    loaded: &LoadedResults,
    bundle: &mut ReportBundle,
    summary: &mut String,
) -> Result<(), AnalysisError> {
    let tri = spec.triangulation.as_ref().ok_or_else(|| {
        AnalysisError::Spec("gauge experiment has no stored triangulation".into())
    })?;
    bundle.add("triangulation.csv", triangulation_csv(tri));

    let mut sessions: BTreeMap<&str, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for r in loaded.records() {
        if let ResultRecord::Gauge(g) = r {
            sessions.entry(g.session.as_str()).or_default().push((
                g.point_index,
                g.slant_deg,
                g.tilt_deg,
            ));
        }
    }

    let mut ranges = Vec::new();
    for (session, records) in &sessions {
        let samples = match session_gradients(records, tri.triangles().len()) {
            Ok(s) => s,
            Err(reason) => {
                bundle
                    .skipped
                    .push((format!("session {session}"), reason.clone()));
                let _ = writeln!(summary, "skipped session {session}: {reason}");
                continue;
            }
        };
        let relief =
            reconstruct_relief(tri, &samples).map_err(|source| AnalysisError::Geometry {
                context: format!("relief for session {session}"),
                source,
            })?;
        bundle.add(
            format!("relief/{}.csv", file_stem(session)),
            relief_csv(tri, &relief),
        );
        ranges.push((relief.depth_range(), session.to_string(), relief.residual));
    }
    if ranges.is_empty() {
        return Err(AnalysisError::Spec(
            "no session has a complete set of gauge settings".into(),
        ));
    }

    // Shallow to deep.
    ranges.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let rows = ranges
        .iter()
        .enumerate()
        .map(|(i, (range, session, residual))| {
            vec![
                (i + 1).to_string(),
                session.clone(),
                range.to_string(),
                residual.to_string(),
            ]
        });
    bundle.add(
        "depth_ranges.csv",
        csv(&["rank", "session", "depthRange", "residual"], rows),
    );
    let _ = writeln!(summary, "observers reconstructed: {}", ranges.len());
    for (range, session, _) in &ranges {
        let _ = writeln!(summary, "  {session}: depth range {range:.6}");
    }
    Ok(())
}
