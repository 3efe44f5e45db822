//! Experiment descriptions, stimuli and the per-paradigm result schemas.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Triangulation;
use crate::table::{parse_trial_table, write_record, TableError, TrialTable};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("experiment id must be nonempty")]
    EmptyId,
    #[error("unknown paradigm `{0}`")]
    UnknownParadigm(String),
    #[error("parameter `{name}` must be strictly positive and finite, got {value}")]
    BadParameter { name: String, value: f64 },
    #[error("stimulus `{0}` has a zero dimension")]
    ZeroDimension(String),
    #[error("duplicate stimulus name `{0}`")]
    DuplicateStimulus(String),
    #[error("flicker stimulus `{0}` needs both pairUri and targetEllipse")]
    IncompleteFlickerStimulus(String),
    #[error("trial table row {row} references unknown stimulus `{name}`")]
    UnknownStimulus { row: usize, name: String },
    #[error("gauge experiment needs exactly one stimulus and a stored triangulation")]
    GaugeLayout,
    #[error("trial table: {0}")]
    Table(#[from] TableError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid experiment JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("records mix the {0} and {1} schemas")]
    MixedSchemas(Paradigm, Paradigm),
    #[error("row {row}, column `{column}`: {message}")]
    Field {
        row: usize,
        column: String,
        message: String,
    },
    #[error("header mismatch for {paradigm}: expected `{expected}`, found `{found}`")]
    Header {
        paradigm: Paradigm,
        expected: String,
        found: String,
    },
    #[error("{0}")]
    Geometry(#[from] crate::geometry::GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Paradigm {
    Flicker,
    Bubble,
    Gauge,
    Composition,
    Perspective,
}

impl Paradigm {
    pub const ALL: [Paradigm; 5] = [
        Paradigm::Flicker,
        Paradigm::Bubble,
        Paradigm::Gauge,
        Paradigm::Composition,
        Paradigm::Perspective,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Paradigm::Flicker => "flicker",
            Paradigm::Bubble => "bubble",
            Paradigm::Gauge => "gauge",
            Paradigm::Composition => "composition",
            Paradigm::Perspective => "perspective",
        }
    }

    /// Exact result CSV header, in column order.
    pub fn result_header(self) -> &'static [&'static str] {
        match self {
            Paradigm::Flicker => &[
                "session",
                "trial",
                "imageName",
                "clickX",
                "clickY",
                "rtMs",
                "revealed",
            ],
            Paradigm::Bubble => &[
                "session",
                "trial",
                "imageName",
                "clickIndex",
                "x",
                "y",
                "tMs",
            ],
            Paradigm::Gauge => &[
                "session",
                "trial",
                "pointIndex",
                "px",
                "py",
                "slantDeg",
                "tiltDeg",
                "rtMs",
            ],
            Paradigm::Composition => &["session", "x", "y"],
            Paradigm::Perspective => &["session", "imageName", "kind", "x1", "y1", "x2", "y2"],
        }
    }

    /// Identifies the paradigm whose result header matches exactly.
    pub fn from_result_header(header: &[String]) -> Option<Paradigm> {
        Paradigm::ALL
            .into_iter()
            .find(|p| p.result_header().iter().eq(header.iter()))
    }

    /// Default parameter set written by experiment authoring.
    pub fn default_parameters(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            Paradigm::Flicker => &[
                ("image-ms", 240.0),
                ("blank-ms", 80.0),
                ("frame-rate-hz", 12.5),
                ("reveal-seconds", 60.0),
                ("correct-radius", 0.1),
            ],
            Paradigm::Bubble => &[
                ("radius-px", 32.0),
                ("max-clicks", 20.0),
                ("display-width-px", 600.0),
                ("blur-sigma-px", 8.0),
            ],
            Paradigm::Gauge => &[
                ("max-trial-seconds", 3.0),
                ("sample-points", 64.0),
                ("slant-max-deg", 89.0),
                ("calibration-px", 150.0),
            ],
            Paradigm::Composition => &[("bandwidth-fraction", 0.02)],
            Paradigm::Perspective => &[("min-figures", 10.0), ("max-figures", 15.0)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Paradigm {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Paradigm::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ModelError::UnknownParadigm(s.to_string()))
    }
}

/// Flicker target region. Center and radii are in units of the image width,
/// for both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TargetEllipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StimulusRef {
    pub name: String,
    pub uri: String,
    pub width_px: u32,
    pub height_px: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_uri: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_ellipse: Option<TargetEllipse>,
    /// Condition label used to split flicker reaction times (e.g. easy/hard).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Creation year, used by the perspective trend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: String,
    pub paradigm: Paradigm,
    pub seed: u64,
    pub parameters: BTreeMap<String, f64>,
    pub stimuli: Vec<StimulusRef>,
    pub trial_table: TrialTable,
    pub triangulation: Option<Triangulation>,
}

/// On-disk shape of `experiment.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentFile {
    pub id: String,
    pub paradigm: Paradigm,
    pub seed: u64,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub stimuli: Vec<StimulusRef>,
    /// Inline CSV text, or a path ending in `.csv` relative to the JSON file.
    pub trial_table_csv: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangulation: Option<TriangulationFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangulationFile {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.id.trim().is_empty() {
            return Err(ModelError::EmptyId);
        }
        for (name, &value) in &self.parameters {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::BadParameter {
                    name: name.clone(),
                    value,
                });
            }
        }
        let mut names = HashSet::new();
        for s in &self.stimuli {
            if s.width_px == 0 || s.height_px == 0 {
                return Err(ModelError::ZeroDimension(s.name.clone()));
            }
            if !names.insert(s.name.as_str()) {
                return Err(ModelError::DuplicateStimulus(s.name.clone()));
            }
            if self.paradigm == Paradigm::Flicker
                && (s.pair_uri.is_none() || s.target_ellipse.is_none())
            {
                return Err(ModelError::IncompleteFlickerStimulus(s.name.clone()));
            }
        }
        if let Some(col) = self.trial_table.column("imageName") {
            for (i, row) in self.trial_table.rows().iter().enumerate() {
                if !names.contains(row[col].as_str()) {
                    return Err(ModelError::UnknownStimulus {
                        row: i + 1,
                        name: row[col].clone(),
                    });
                }
            }
        }
        if self.paradigm == Paradigm::Gauge
            && (self.stimuli.len() != 1 || self.triangulation.is_none())
        {
            return Err(ModelError::GaugeLayout);
        }
        Ok(())
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    pub fn stimulus(&self, name: &str) -> Option<&StimulusRef> {
        self.stimuli.iter().find(|s| s.name == name)
    }

    pub fn from_file(file: ExperimentFile, base_dir: &Path) -> Result<Self, ModelError> {
        let csv_text = if is_table_path(&file.trial_table_csv) {
            let path = base_dir.join(&file.trial_table_csv);
            std::fs::read_to_string(&path).map_err(|source| ModelError::Io { path, source })?
        } else {
            file.trial_table_csv
        };
        let triangulation = file
            .triangulation
            .map(|t| {
                let points = t
                    .points
                    .iter()
                    .map(|p| crate::geometry::Point::new(p[0], p[1]));
                Triangulation::new(points.collect(), t.triangles)
            })
            .transpose()?;
        let spec = Self {
            id: file.id,
            paradigm: file.paradigm,
            seed: file.seed,
            parameters: file.parameters,
            stimuli: file.stimuli,
            trial_table: parse_trial_table(&csv_text)?,
            triangulation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_file(&self) -> ExperimentFile {
        ExperimentFile {
            id: self.id.clone(),
            paradigm: self.paradigm,
            seed: self.seed,
            parameters: self.parameters.clone(),
            stimuli: self.stimuli.clone(),
            trial_table_csv: self.trial_table.to_csv(),
            triangulation: self.triangulation.as_ref().map(|t| TriangulationFile {
                points: t.points().iter().map(|p| [p.x, p.y]).collect(),
                triangles: t.triangles().to_vec(),
            }),
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("spec serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Parses JSON text; `path` is used for relative table paths and errors.
    pub fn parse(text: &str, path: &Path) -> Result<Self, ModelError> {
        let file: ExperimentFile =
            serde_json::from_str(text).map_err(|source| ModelError::Json {
                path: path.to_path_buf(),
                source,
            })?;
        Self::from_file(file, path.parent().unwrap_or(Path::new(".")))
    }
}

fn is_table_path(s: &str) -> bool {
    !s.contains('\n') && !s.contains(',') && s.ends_with(".csv")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlickerRecord {
    pub session: String,
    pub trial: u32,
    pub image_name: String,
    pub click_x: f64,
    pub click_y: f64,
    pub rt_ms: f64,
    pub revealed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleRecord {
    pub session: String,
    pub trial: u32,
    pub image_name: String,
    pub click_index: u32,
    pub x: f64,
    pub y: f64,
    pub t_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeRecord {
    pub session: String,
    pub trial: u32,
    pub point_index: usize,
    pub px: f64,
    pub py: f64,
    pub slant_deg: f64,
    pub tilt_deg: f64,
    pub rt_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionRecord {
    pub session: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationKind {
    Horizon,
    Figure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveRecord {
    pub session: String,
    pub image_name: String,
    pub kind: AnnotationKind,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

/// Free-text description sidecar row for bubble sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptionRecord {
    pub session: String,
    pub image_name: String,
    pub text: String,
}

pub const DESCRIPTIONS_HEADER: [&str; 3] = ["session", "imageName", "text"];

#[derive(Debug, Clone, PartialEq)]
pub enum ResultRecord {
    Flicker(FlickerRecord),
    Bubble(BubbleRecord),
    Gauge(GaugeRecord),
    Composition(CompositionRecord),
    Perspective(PerspectiveRecord),
}

impl ResultRecord {
    pub fn paradigm(&self) -> Paradigm {
        match self {
            ResultRecord::Flicker(_) => Paradigm::Flicker,
            ResultRecord::Bubble(_) => Paradigm::Bubble,
            ResultRecord::Gauge(_) => Paradigm::Gauge,
            ResultRecord::Composition(_) => Paradigm::Composition,
            ResultRecord::Perspective(_) => Paradigm::Perspective,
        }
    }

    pub fn session(&self) -> &str {
        match self {
            ResultRecord::Flicker(r) => &r.session,
            ResultRecord::Bubble(r) => &r.session,
            ResultRecord::Gauge(r) => &r.session,
            ResultRecord::Composition(r) => &r.session,
            ResultRecord::Perspective(r) => &r.session,
        }
    }

    fn fields(&self) -> Vec<String> {
        match self {
            ResultRecord::Flicker(r) => vec![
                r.session.clone(),
                r.trial.to_string(),
                r.image_name.clone(),
                r.click_x.to_string(),
                r.click_y.to_string(),
                r.rt_ms.to_string(),
                r.revealed.to_string(),
            ],
            ResultRecord::Bubble(r) => vec![
                r.session.clone(),
                r.trial.to_string(),
                r.image_name.clone(),
                r.click_index.to_string(),
                r.x.to_string(),
                r.y.to_string(),
                r.t_ms.to_string(),
            ],
            ResultRecord::Gauge(r) => vec![
                r.session.clone(),
                r.trial.to_string(),
                r.point_index.to_string(),
                r.px.to_string(),
                r.py.to_string(),
                r.slant_deg.to_string(),
                r.tilt_deg.to_string(),
                r.rt_ms.to_string(),
            ],
            ResultRecord::Composition(r) => {
                vec![r.session.clone(), r.x.to_string(), r.y.to_string()]
            }
            ResultRecord::Perspective(r) => vec![
                r.session.clone(),
                r.image_name.clone(),
                match r.kind {
                    AnnotationKind::Horizon => "horizon".into(),
                    AnnotationKind::Figure => "figure".into(),
                },
                r.x1.to_string(),
                r.y1.to_string(),
                r.x2.to_string(),
                r.y2.to_string(),
            ],
        }
    }
}

/// Writes records under the header of `paradigm`.
pub fn serialize_results(
    paradigm: Paradigm,
    records: &[ResultRecord],
) -> Result<String, ModelError> {
    let mut out = String::new();
    write_record(&mut out, paradigm.result_header());
    for r in records {
        if r.paradigm() != paradigm {
            return Err(ModelError::MixedSchemas(paradigm, r.paradigm()));
        }
        write_record(&mut out, &r.fields());
    }
    Ok(out)
}

pub fn serialize_descriptions(records: &[DescriptionRecord]) -> String {
    let mut out = String::new();
    write_record(&mut out, &DESCRIPTIONS_HEADER);
    for r in records {
        write_record(&mut out, &[&r.session, &r.image_name, &r.text]);
    }
    out
}

struct RowReader<'a> {
    row: usize,
    header: &'a [&'a str],
    fields: &'a [String],
}

impl RowReader<'_> {
    fn err(&self, col: usize, message: impl Into<String>) -> ModelError {
        ModelError::Field {
            row: self.row,
            column: self.header[col].to_string(),
            message: message.into(),
        }
    }

    fn text(&self, col: usize) -> Result<String, ModelError> {
        let v = &self.fields[col];
        if v.is_empty() {
            return Err(self.err(col, "empty value"));
        }
        Ok(v.clone())
    }

    fn num(&self, col: usize) -> Result<f64, ModelError> {
        let v = &self.fields[col];
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(self.err(col, format!("`{v}` is not a finite number"))),
        }
    }

    fn nonneg(&self, col: usize) -> Result<f64, ModelError> {
        let x = self.num(col)?;
        if x < 0.0 {
            return Err(self.err(col, format!("{x} is negative")));
        }
        Ok(x)
    }

    fn int<T: FromStr>(&self, col: usize) -> Result<T, ModelError> {
        let v = &self.fields[col];
        v.parse::<T>()
            .map_err(|_| self.err(col, format!("`{v}` is not a non-negative integer")))
    }

    fn flag(&self, col: usize) -> Result<bool, ModelError> {
        match self.fields[col].as_str() {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            v => Err(self.err(col, format!("`{v}` is not a boolean"))),
        }
    }
}

/// Parses a result upload, enforcing the exact header of `paradigm`.
///
/// Errors carry the 1-based data row and the column name.
pub fn parse_results(paradigm: Paradigm, text: &str) -> Result<Vec<ResultRecord>, ModelError> {
    let table = parse_trial_table(text)?;
    let header = paradigm.result_header();
    if !header.iter().eq(table.header().iter()) {
        return Err(ModelError::Header {
            paradigm,
            expected: header.join(","),
            found: table.header().join(","),
        });
    }
    let mut out = Vec::with_capacity(table.len());
    for (i, fields) in table.rows().iter().enumerate() {
        let r = RowReader {
            row: i + 1,
            header,
            fields,
        };
        let record = match paradigm {
            Paradigm::Flicker => ResultRecord::Flicker(FlickerRecord {
                session: r.text(0)?,
                trial: r.int(1)?,
                image_name: r.text(2)?,
                click_x: r.num(3)?,
                click_y: r.num(4)?,
                rt_ms: r.nonneg(5)?,
                revealed: r.flag(6)?,
            }),
            Paradigm::Bubble => ResultRecord::Bubble(BubbleRecord {
                session: r.text(0)?,
                trial: r.int(1)?,
                image_name: r.text(2)?,
                click_index: r.int(3)?,
                x: r.num(4)?,
                y: r.num(5)?,
                t_ms: r.nonneg(6)?,
            }),
            Paradigm::Gauge => ResultRecord::Gauge(GaugeRecord {
                session: r.text(0)?,
                trial: r.int(1)?,
                point_index: r.int(2)?,
                px: r.num(3)?,
                py: r.num(4)?,
                slant_deg: r.nonneg(5)?,
                tilt_deg: r.num(6)?,
                rt_ms: r.nonneg(7)?,
            }),
            Paradigm::Composition => ResultRecord::Composition(CompositionRecord {
                session: r.text(0)?,
                x: r.num(1)?,
                y: r.num(2)?,
            }),
            Paradigm::Perspective => ResultRecord::Perspective(PerspectiveRecord {
                session: r.text(0)?,
                image_name: r.text(1)?,
                kind: match fields[2].as_str() {
                    "horizon" => AnnotationKind::Horizon,
                    "figure" => AnnotationKind::Figure,
                    v => return Err(r.err(2, format!("`{v}` is not horizon or figure"))),
                },
                x1: r.num(3)?,
                y1: r.num(4)?,
                x2: r.num(5)?,
                y2: r.num(6)?,
            }),
        };
        out.push(record);
    }
    Ok(out)
}

pub fn parse_descriptions(text: &str) -> Result<Vec<DescriptionRecord>, ModelError> {
    let table = parse_trial_table(text)?;
    if !DESCRIPTIONS_HEADER.iter().eq(table.header().iter()) {
        return Err(ModelError::Header {
            paradigm: Paradigm::Bubble,
            expected: DESCRIPTIONS_HEADER.join(","),
            found: table.header().join(","),
        });
    }
    Ok(table
        .rows()
        .iter()
        .map(|f| DescriptionRecord {
            session: f[0].clone(),
            image_name: f[1].clone(),
            text: f[2].clone(),
        })
        .collect())
}
