use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{csv, file_stem, stats_err, AnalysisError, LoadedResults, ReportBundle};
use crate::geometry::Point;
use crate::model::{ExperimentSpec, FlickerRecord, ResultRecord};
use crate::stats::{
    classify_click, filter_valid_trials, ttest_independent, ClickEvent, FlickerTarget,
};

pub(super) fn run(
    spec: &ExperimentSpec,
    loaded: &LoadedResults,
    bundle: &mut ReportBundle,
    summary: &mut String,
) -> Result<(), AnalysisError> {
    let targets: HashMap<String, FlickerTarget> = spec
        .stimuli
        .iter()
        .filter_map(|s| {
            let t = s.target_ellipse?;
            let w = s.width_px as f64;
            Some((
                s.name.clone(),
                FlickerTarget {
                    center: Point::new(t.cx * w, t.cy * w),
                    image_width: w,
                },
            ))
        })
        .collect();
    let groups: HashMap<&str, &str> = spec
        .stimuli
        .iter()
        .filter_map(|s| Some((s.name.as_str(), s.group.as_deref()?)))
        .collect();

    let records: Vec<FlickerRecord> = loaded
        .records()
        .filter_map(|r| match r {
            ResultRecord::Flicker(f) => Some(f.clone()),
            _ => None,
        })
        .collect();
    let valid = filter_valid_trials(&records, &targets);

    // Reaction times in seconds per condition group.
    let mut by_group: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in &valid {
        if let Some(g) = groups.get(r.image_name.as_str()) {
            by_group.entry(g).or_default().push(r.rt_ms / 1000.0);
        }
    }

    let _ = writeln!(summary, "trials: {}", records.len());
    let _ = writeln!(
        summary,
        "valid trials (correct click within 60 s): {}",
        valid.len()
    );

    let mut per_image: BTreeMap<&str, Vec<Vec<String>>> = BTreeMap::new();
    for r in &records {
        let correct = targets.get(&r.image_name).is_some_and(|t| {
            let click = ClickEvent {
                x: r.click_x,
                y: r.click_y,
                t_ms: r.rt_ms,
                revealed: r.revealed,
            };
            classify_click(&click, t.center, t.image_width)
        });
        per_image.entry(&r.image_name).or_default().push(vec![
            r.session.clone(),
            r.trial.to_string(),
            r.click_x.to_string(),
            r.click_y.to_string(),
            r.rt_ms.to_string(),
            r.revealed.to_string(),
            correct.to_string(),
        ]);
    }
    for (image, mut rows) in per_image {
        rows.sort();
        bundle.add(
            format!("clicks/{}.csv", file_stem(image)),
            csv(
                &["session", "trial", "x", "y", "rtMs", "revealed", "correct"],
                rows,
            ),
        );
    }

    let group_rows = by_group.iter().map(|(g, rts)| {
        let mean = rts.iter().sum::<f64>() / rts.len() as f64;
        vec![g.to_string(), rts.len().to_string(), mean.to_string()]
    });
    bundle.add("groups.csv", csv(&["group", "n", "meanRtS"], group_rows));

    if by_group.len() != 2 {
        return Err(AnalysisError::Spec(format!(
            "reaction-time test needs exactly two stimulus groups with valid trials, found {}",
            by_group.len()
        )));
    }
    let mut it = by_group.iter();
    let (name_a, a) = it.next().expect("two groups");
    let (name_b, b) = it.next().expect("two groups");
    let t = ttest_independent(a, b).map_err(stats_err("reaction-time t-test"))?;
    bundle.add(
        "ttest.csv",
        csv(
            &[
                "groupA", "groupB", "nA", "nB", "meanA", "sdA", "meanB", "sdB", "t", "df", "p",
            ],
            [[
                name_a.to_string(),
                name_b.to_string(),
                t.n_a.to_string(),
                t.n_b.to_string(),
                t.mean_a.to_string(),
                t.sd_a.to_string(),
                t.mean_b.to_string(),
                t.sd_b.to_string(),
                t.t.to_string(),
                t.df.to_string(),
                t.p.to_string(),
            ]],
        ),
    );
    let _ = writeln!(
        summary,
        "{name_a}: M = {:.3} s, SD = {:.3} s, n = {}",
        t.mean_a, t.sd_a, t.n_a
    );
    let _ = writeln!(
        summary,
        "{name_b}: M = {:.3} s, SD = {:.3} s, n = {}",
        t.mean_b, t.sd_b, t.n_b
    );
    let _ = writeln!(summary, "t({}) = {:.4}, p = {:e}", t.df, t.t, t.p);
    Ok(())
}
