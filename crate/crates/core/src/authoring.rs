//! Builds experiment specs from a directory of stimulus images.
//!
//! Stimuli come from `stimuli.csv` in the directory when present, with
//! columns `name,file` and optionally `pairFile`, `targetCx`, `targetCy`,
//! `targetRx`, `targetRy`, `group` and `year`. Without a manifest every
//! image file in the directory becomes a stimulus named after its stem.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::geometry::{delaunay_triangulate, GeometryError, Point};
use crate::model::{ExperimentSpec, ModelError, Paradigm, StimulusRef, TargetEllipse};
use crate::table::{parse_trial_table, TableError, TrialTable};

const IMAGE_EXTENSIONS: [&str; 6] = ["png", "jpg", "jpeg", "gif", "bmp", "webp"];
const MANIFEST: &str = "stimuli.csv";
/// Candidates drawn per accepted point in best-candidate sampling.
const CANDIDATES: usize = 16;

#[derive(Debug, Error)]
pub enum AuthoringError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: cannot read image size: {message}")]
    Image { path: PathBuf, message: String },
    #[error("no stimulus images in {0}")]
    NoStimuli(PathBuf),
    #[error("{MANIFEST}: {0}")]
    Manifest(String),
    #[error("gauge experiments use exactly one stimulus, found {0}")]
    GaugeStimulusCount(usize),
    #[error("need at least 3 sample points, got {0}")]
    TooFewPoints(usize),
    #[error("sampling region {0:?} is empty or outside the image")]
    DegenerateRegion([f64; 4]),
    #[error("triangulation failed: {0}")]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("trial table: {0}")]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuthoringOptions {
    pub id: Option<String>,
    pub seed: u64,
    /// Gauge sample points; defaults to the `sample-points` parameter.
    pub points: Option<usize>,
    /// Gauge sampling rectangle `[x, y, width, height]` in pixels; defaults
    /// to the image inset by 5% on each side.
    pub region: Option<[f64; 4]>,
    pub parameters: BTreeMap<String, f64>,
}

pub fn make_experiment(
    paradigm: Paradigm,
    stimuli_dir: &Path,
    opts: &AuthoringOptions,
) -> Result<ExperimentSpec, AuthoringError> {
    let stimuli = discover_stimuli(stimuli_dir)?;
    let mut parameters = paradigm.default_parameters();
    parameters.extend(opts.parameters.iter().map(|(k, v)| (k.clone(), *v)));
    let id = opts.id.clone().unwrap_or_else(|| {
        let dir = stimuli_dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("stimuli");
        format!("{paradigm}-{dir}")
    });

    let (trial_table, triangulation) = if paradigm == Paradigm::Gauge {
        if stimuli.len() != 1 {
            return Err(AuthoringError::GaugeStimulusCount(stimuli.len()));
        }
        let stim = &stimuli[0];
        let n = opts
            .points
            .unwrap_or_else(|| parameters.get("sample-points").copied().unwrap_or(64.0) as usize);
        parameters.insert("sample-points".into(), n as f64);
        let region = opts.region.unwrap_or_else(|| {
            let (w, h) = (stim.width_px as f64, stim.height_px as f64);
            [0.05 * w, 0.05 * h, 0.9 * w, 0.9 * h]
        });
        let points = sample_points(n, region, stim, opts.seed)?;
        let tri = delaunay_triangulate(&points)?;
        let mut csv = String::from("imageName,pointIndex,px,py\n");
        for (i, b) in tri.barycentres().iter().enumerate() {
            csv.push_str(&format!("{},{i},{},{}\n", quote(&stim.name), b.x, b.y));
        }
        (parse_trial_table(&csv)?, Some(tri))
    } else {
        let rows = stimuli.iter().map(|s| vec![s.name.clone()]).collect();
        (TrialTable::new(vec!["imageName".into()], rows)?, None)
    };

    let spec = ExperimentSpec {
        id,
        paradigm,
        seed: opts.seed,
        parameters,
        stimuli,
        trial_table,
        triangulation,
    };
    spec.validate()?;
    Ok(spec)
}

fn quote(s: &str) -> String {
    let mut out = String::new();
    crate::table::write_record(&mut out, &[s]);
    out.trim_end_matches('\n').to_string()
}

/// Spreads `n` points over the region with Mitchell's best-candidate
/// sampling, which avoids the slivers uniform sampling tends to produce.
fn sample_points(
    n: usize,
    region: [f64; 4],
    stim: &StimulusRef,
    seed: u64,
) -> Result<Vec<Point>, AuthoringError> {
    if n < 3 {
        return Err(AuthoringError::TooFewPoints(n));
    }
    let [x0, y0, w, h] = region;
    let inside =
        x0 >= 0.0 && y0 >= 0.0 && x0 + w <= stim.width_px as f64 && y0 + h <= stim.height_px as f64;
    if !(w > 0.0 && h > 0.0 && inside && region.iter().all(|v| v.is_finite())) {
        return Err(AuthoringError::DegenerateRegion(region));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut points: Vec<Point> = Vec::with_capacity(n);
    while points.len() < n {
        let mut best = None;
        let mut best_d = -1.0;
        for _ in 0..CANDIDATES {
            let c = Point::new(x0 + rng.random::<f64>() * w, y0 + rng.random::<f64>() * h);
            let d = points
                .iter()
                .map(|p| (p.x - c.x).powi(2) + (p.y - c.y).powi(2))
                .fold(f64::INFINITY, f64::min);
            if d > best_d {
                best_d = d;
                best = Some(c);
            }
        }
        points.push(best.expect("at least one candidate"));
    }
    Ok(points)
}

fn image_size(path: &Path) -> Result<(u32, u32), AuthoringError> {
    let size = imagesize::size(path).map_err(|e| AuthoringError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok((size.width as u32, size.height as u32))
}

fn stimulus_uri(file: &str) -> String {
    format!("/stimuli/{file}")
}

pub fn discover_stimuli(dir: &Path) -> Result<Vec<StimulusRef>, AuthoringError> {
    let manifest = dir.join(MANIFEST);
    if manifest.is_file() {
        return read_manifest(dir, &manifest);
    }
    let io = |source| AuthoringError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<String> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|name| {
            Path::new(name)
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(AuthoringError::NoStimuli(dir.to_path_buf()));
    }
    files
        .iter()
        .map(|file| {
            let (width_px, height_px) = image_size(&dir.join(file))?;
            let name = Path::new(file)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or(file)
                .to_string();
            Ok(StimulusRef {
                name,
                uri: stimulus_uri(file),
                width_px,
                height_px,
                pair_uri: None,
                target_ellipse: None,
                group: None,
                year: None,
            })
        })
        .collect()
}

fn read_manifest(dir: &Path, path: &Path) -> Result<Vec<StimulusRef>, AuthoringError> {
    let text = std::fs::read_to_string(path).map_err(|source| AuthoringError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let table = parse_trial_table(&text).map_err(|e| AuthoringError::Manifest(e.to_string()))?;
    let col = |name: &str| table.column(name);
    let (Some(name_col), Some(file_col)) = (col("name"), col("file")) else {
        return Err(AuthoringError::Manifest(
            "needs `name` and `file` columns".into(),
        ));
    };
    let opt =
        |row: &[String], name: &str| col(name).map(|c| row[c].clone()).filter(|v| !v.is_empty());
    let num = |row: &[String], name: &str, line: usize| -> Result<Option<f64>, AuthoringError> {
        opt(row, name)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    AuthoringError::Manifest(format!("row {line}: `{name}` is not a number"))
                })
            })
            .transpose()
    };

    let mut out = Vec::with_capacity(table.len());
    for (i, row) in table.rows().iter().enumerate() {
        let line = i + 1;
        let file = &row[file_col];
        let (width_px, height_px) = image_size(&dir.join(file))?;
        let pair_uri = match opt(row, "pairFile") {
            Some(pair) => {
                image_size(&dir.join(&pair))?;
                Some(stimulus_uri(&pair))
            }
            None => None,
        };
        let target = [
            num(row, "targetCx", line)?,
            num(row, "targetCy", line)?,
            num(row, "targetRx", line)?,
            num(row, "targetRy", line)?,
        ];
        let target_ellipse = match target {
            [Some(cx), Some(cy), rx, ry] => Some(TargetEllipse {
                cx,
                cy,
                rx: rx.unwrap_or(0.0),
                ry: ry.unwrap_or(0.0),
            }),
            [None, None, _, _] => None,
            _ => {
                return Err(AuthoringError::Manifest(format!(
                    "row {line}: targetCx and targetCy must be given together"
                )))
            }
        };
        out.push(StimulusRef {
            name: row[name_col].clone(),
            uri: stimulus_uri(file),
            width_px,
            height_px,
            pair_uri,
            target_ellipse,
            group: opt(row, "group"),
            year: num(row, "year", line)?,
        });
    }
    if out.is_empty() {
        return Err(AuthoringError::NoStimuli(dir.to_path_buf()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal valid PNG header with the given size; enough for size probing.
    pub(crate) fn fake_png(path: &Path, w: u32, h: u32) {
        let mut bytes = vec![0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a, 0, 0, 0, 13];
        bytes.extend_from_slice(b"IHDR");
        bytes.extend_from_slice(&w.to_be_bytes());
        bytes.extend_from_slice(&h.to_be_bytes());
        bytes.extend_from_slice(&[8, 2, 0, 0, 0, 0, 0, 0, 0]);
        std::fs::write(path, bytes).unwrap();
    }

    #[test]
    fn gauge_with_default_points() {
        let dir = tempfile::tempdir().unwrap();
        fake_png(&dir.path().join("statue.png"), 400, 600);
        let opts = AuthoringOptions {
            seed: 11,
            ..Default::default()
        };
        let spec = make_experiment(Paradigm::Gauge, dir.path(), &opts).unwrap();
        let tri = spec.triangulation.as_ref().unwrap();
        assert_eq!(tri.points().len(), 64);
        assert_eq!(spec.trial_table.len(), tri.triangles().len());
        assert!(tri
            .points()
            .iter()
            .all(|p| p.x >= 20.0 && p.x <= 380.0 && p.y >= 30.0 && p.y <= 570.0));
        let again = make_experiment(Paradigm::Gauge, dir.path(), &opts).unwrap();
        assert_eq!(again.to_json(), spec.to_json());
    }

    #[test]
    fn gauge_errors() {
        let dir = tempfile::tempdir().unwrap();
        fake_png(&dir.path().join("a.png"), 100, 100);
        let opts = AuthoringOptions {
            points: Some(2),
            ..Default::default()
        };
        assert!(matches!(
            make_experiment(Paradigm::Gauge, dir.path(), &opts),
            Err(AuthoringError::TooFewPoints(2))
        ));
        let opts = AuthoringOptions {
            region: Some([10.0, 10.0, 0.0, 50.0]),
            ..Default::default()
        };
        assert!(matches!(
            make_experiment(Paradigm::Gauge, dir.path(), &opts),
            Err(AuthoringError::DegenerateRegion(_))
        ));
        fake_png(&dir.path().join("b.png"), 100, 100);
        assert!(matches!(
            make_experiment(Paradigm::Gauge, dir.path(), &AuthoringOptions::default()),
            Err(AuthoringError::GaugeStimulusCount(2))
        ));
    }

    #[test]
    fn flicker_from_manifest() {
        let dir = tempfile::tempdir().unwrap();
        fake_png(&dir.path().join("boat.png"), 500, 300);
        fake_png(&dir.path().join("boat_mod.png"), 500, 300);
        std::fs::write(
            dir.path().join("stimuli.csv"),
            "name,file,pairFile,targetCx,targetCy,targetRx,targetRy,group\nboat,boat.png,boat_mod.png,0.4,0.2,0.05,0.05,easy\n",
        )
        .unwrap();
        let spec =
            make_experiment(Paradigm::Flicker, dir.path(), &AuthoringOptions::default()).unwrap();
        let s = &spec.stimuli[0];
        assert_eq!(s.pair_uri.as_deref(), Some("/stimuli/boat_mod.png"));
        assert_eq!(s.group.as_deref(), Some("easy"));
        assert_eq!((s.width_px, s.height_px), (500, 300));
        assert_eq!(spec.parameter("image-ms"), Some(240.0));
    }

    #[test]
    fn flicker_without_targets_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        fake_png(&dir.path().join("boat.png"), 500, 300);
        assert!(matches!(
            make_experiment(Paradigm::Flicker, dir.path(), &AuthoringOptions::default()),
            Err(AuthoringError::Model(
                ModelError::IncompleteFlickerStimulus(_)
            ))
        ));
    }

    #[test]
    fn unreadable_stimuli() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            make_experiment(Paradigm::Bubble, dir.path(), &AuthoringOptions::default()),
            Err(AuthoringError::NoStimuli(_))
        ));
        std::fs::write(dir.path().join("broken.png"), b"not a png").unwrap();
        assert!(matches!(
            make_experiment(Paradigm::Bubble, dir.path(), &AuthoringOptions::default()),
            Err(AuthoringError::Image { .. })
        ));
        assert!(make_experiment(
            Paradigm::Bubble,
            Path::new("/no/such/dir"),
            &AuthoringOptions::default()
        )
        .is_err());
    }
}
