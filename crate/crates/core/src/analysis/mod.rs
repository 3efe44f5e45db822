//! Result-directory analyses producing deterministic report bundles.
//!
//! Every analysis reads all `*.csv` session files of one experiment in
//! lexicographic order, so identical inputs and options always produce
//! byte-identical bundles.

mod bubble;
mod composition;
mod flicker;
mod gauge;
mod perspective;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::model::{
    parse_descriptions, parse_results, DescriptionRecord, ExperimentSpec, ModelError, Paradigm,
    ResultRecord,
};
use crate::stats::{OffsetMode, StatsError};
use crate::table::{parse_records, write_record};

pub const DESCRIPTIONS_SUFFIX: &str = ".descriptions.csv";

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no parsable {0} results found")]
    EmptyResults(Paradigm),
    #[error("{file} holds {found} results but the analysis is for {expected}")]
    MixedParadigms {
        file: String,
        expected: Paradigm,
        found: Paradigm,
    },
    #[error("experiment `{id}` is a {actual} experiment, not {requested}")]
    ParadigmMismatch {
        id: String,
        requested: Paradigm,
        actual: Paradigm,
    },
    #[error("experiment spec: {0}")]
    Spec(String),
    #[error("{context}: {source}")]
    Stats { context: String, source: StatsError },
    #[error("{context}: {source}")]
    Geometry {
        context: String,
        source: GeometryError,
    },
}

impl AnalysisError {
    /// Input problems (missing or malformed files) as opposed to failures of
    /// the analysis itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            AnalysisError::Io { .. }
                | AnalysisError::EmptyResults(_)
                | AnalysisError::MixedParadigms { .. }
                | AnalysisError::ParadigmMismatch { .. }
                | AnalysisError::Spec(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    /// Kernel bandwidth in pixels for composition modes.
    pub bandwidth: Option<f64>,
    pub offset_mode: OffsetMode,
    /// Session whose horizon is used for every figure of an image.
    pub horizon_annotator: Option<String>,
    /// Recorded in the report header.
    pub seed: Option<u64>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            bandwidth: None,
            offset_mode: OffsetMode::ThroughOrigin,
            horizon_annotator: None,
            seed: None,
        }
    }
}

/// Output files keyed by relative path, plus the files that were skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportBundle {
    pub files: BTreeMap<String, Vec<u8>>,
    pub skipped: Vec<(String, String)>,
    pub summary: String,
}

impl ReportBundle {
    fn add(&mut self, path: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.insert(path.into(), contents.into());
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), AnalysisError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| AnalysisError::Io { path, source }
        };
        for (rel, contents) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(io(parent))?;
            }
            std::fs::write(&path, contents).map_err(io(&path))?;
        }
        Ok(())
    }
}

/// Session files of one experiment after parsing.
#[derive(Debug, Default)]
pub struct LoadedResults {
    /// Records per file, in file-name order.
    pub files: Vec<(String, Vec<ResultRecord>)>,
    pub descriptions: Vec<DescriptionRecord>,
    pub skipped: Vec<(String, String)>,
}

impl LoadedResults {
    pub fn records(&self) -> impl Iterator<Item = &ResultRecord> {
        self.files.iter().flat_map(|(_, r)| r.iter())
    }
}

/// Reads every session CSV in `dir` for `paradigm`.
///
/// A file whose header belongs to another paradigm is an error; a file that
/// does not parse is listed as skipped with the reason.
pub fn load_results(dir: &Path, paradigm: Paradigm) -> Result<LoadedResults, AnalysisError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| AnalysisError::Io { path, source }
    };
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.ends_with(".csv") && !n.starts_with('.'))
        .collect();
    names.sort();

    let mut loaded = LoadedResults::default();
    for name in names {
        let path = dir.join(&name);
        let text = std::fs::read_to_string(&path).map_err(io(&path))?;
        if name.ends_with(DESCRIPTIONS_SUFFIX) {
            if paradigm != Paradigm::Bubble {
                loaded.skipped.push((
                    name,
                    "description sidecar is only used by bubble analyses".into(),
                ));
                continue;
            }
            match parse_descriptions(&text) {
                Ok(d) => loaded.descriptions.extend(d),
                Err(e) => loaded.skipped.push((name, e.to_string())),
            }
            continue;
        }
        let header = parse_records(&text)
            .ok()
            .and_then(|r| r.into_iter().next())
            .and_then(|h| Paradigm::from_result_header(&h));
        if let Some(found) = header {
            if found != paradigm {
                return Err(AnalysisError::MixedParadigms {
                    file: name,
                    expected: paradigm,
                    found,
                });
            }
        }
        match parse_results(paradigm, &text) {
            Ok(records) if records.is_empty() => loaded.skipped.push((name, "no data rows".into())),
            Ok(records) => loaded.files.push((name, records)),
            Err(e) => loaded.skipped.push((name, e.to_string())),
        }
    }
    if loaded.files.is_empty() {
        return Err(AnalysisError::EmptyResults(paradigm));
    }
    Ok(loaded)
}

/// Runs the analysis for `paradigm` over the session files in `results_dir`.
pub fn analyze(
    paradigm: Paradigm,
    spec: &ExperimentSpec,
    results_dir: &Path,
    opts: &AnalyzeOptions,
) -> Result<ReportBundle, AnalysisError> {
    if spec.paradigm != paradigm {
        return Err(AnalysisError::ParadigmMismatch {
            id: spec.id.clone(),
            requested: paradigm,
            actual: spec.paradigm,
        });
    }
    let loaded = load_results(results_dir, paradigm)?;
    let mut bundle = ReportBundle {
        skipped: loaded.skipped.clone(),
        ..Default::default()
    };
    let mut summary = header(paradigm, spec, opts, &loaded);
    match paradigm {
        Paradigm::Flicker => flicker::run(spec, &loaded, &mut bundle, &mut summary)?,
        Paradigm::Bubble => bubble::run(spec, &loaded, &mut bundle, &mut summary)?,
        Paradigm::Gauge => gauge::run(spec, &loaded, &mut bundle, &mut summary)?,
        Paradigm::Composition => composition::run(spec, &loaded, opts, &mut bundle, &mut summary)?,
        Paradigm::Perspective => perspective::run(spec, &loaded, opts, &mut bundle, &mut summary)?,
    }
    bundle.add("summary.txt", summary.clone());
    bundle.summary = summary;
    Ok(bundle)
}

fn header(
    paradigm: Paradigm,
    spec: &ExperimentSpec,
    opts: &AnalyzeOptions,
    loaded: &LoadedResults,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "analysis: {paradigm}");
    let _ = writeln!(s, "experiment: {}", spec.id);
    let _ = writeln!(s, "experiment seed: {}", spec.seed);
    let _ = writeln!(
        s,
        "seed: {}",
        opts.seed
            .map_or_else(|| "none".to_string(), |v| v.to_string())
    );
    let _ = writeln!(
        s,
        "bandwidth: {}",
        opts.bandwidth
            .map_or_else(|| "default".to_string(), |v| v.to_string())
    );
    let _ = writeln!(s, "offset mode: {}", opts.offset_mode.as_str());
    let _ = writeln!(
        s,
        "horizon annotator: {}",
        opts.horizon_annotator.as_deref().unwrap_or("none")
    );
    let _ = writeln!(s, "files parsed: {}", loaded.files.len());
    for (name, _) in &loaded.files {
        let _ = writeln!(s, "  parsed {name}");
    }
    let _ = writeln!(s, "files skipped: {}", loaded.skipped.len());
    for (name, reason) in &loaded.skipped {
        let _ = writeln!(s, "  skipped {name}: {reason}");
    }
    s.push('\n');
    s
}

/// CSV text from a header and rows of display values.
fn csv<R: AsRef<[String]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut out = String::new();
    write_record(&mut out, header);
    for r in rows {
        write_record(&mut out, r.as_ref());
    }
    out
}

/// File-name-safe form of an image or session name.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn stats_err(context: impl Into<String>) -> impl FnOnce(StatsError) -> AnalysisError {
    let context = context.into();
    move |source| AnalysisError::Stats { context, source }
}

impl From<ModelError> for AnalysisError {
    fn from(e: ModelError) -> Self {
        AnalysisError::Spec(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(file_stem("boat harbour/1.png"), "boat_harbour_1.png");
        assert_eq!(file_stem("a-b_c.9"), "a-b_c.9");
    }

    #[test]
    fn missing_dir_is_input_error() {
        let err = load_results(Path::new("/nonexistent/results"), Paradigm::Gauge).unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn mixed_and_empty_dirs() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_results(dir.path(), Paradigm::Composition),
            Err(AnalysisError::EmptyResults(Paradigm::Composition))
        ));
        std::fs::write(dir.path().join("a.csv"), "session,x,y\ns,1,2\n").unwrap();
        std::fs::write(
            dir.path().join("b.csv"),
            "session,imageName,kind,x1,y1,x2,y2\n",
        )
        .unwrap();
        assert!(matches!(
            load_results(dir.path(), Paradigm::Composition),
            Err(AnalysisError::MixedParadigms {
                found: Paradigm::Perspective,
                ..
            })
        ));
        std::fs::remove_file(dir.path().join("b.csv")).unwrap();
        std::fs::write(dir.path().join("c.csv"), "session,x,y\ns,abc,2\n").unwrap();
        std::fs::write(dir.path().join(".tmp.csv"), "junk").unwrap();
        let loaded = load_results(dir.path(), Paradigm::Composition).unwrap();
        assert_eq!(loaded.files.len(), 1);
        assert_eq!(loaded.skipped.len(), 1);
        assert_eq!(loaded.skipped[0].0, "c.csv");
    }
}
