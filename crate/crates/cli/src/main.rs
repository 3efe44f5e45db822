use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbench_core::geometry::triangulation_csv;
use pbench_core::stats::OffsetMode;
use pbench_core::{
    analyze, make_experiment, AnalyzeOptions, AuthoringOptions, ExperimentSpec, Paradigm,
};
use pbench_service::ServiceConfig;

const INPUT_ERROR: u8 = 2;
const ANALYSIS_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pbench",
    version,
    about = "Host picture-based crowd experiments and analyze their results"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the collection server.
    Serve(ServeArgs),
    /// Analyze uploaded session files and write a report bundle.
    Analyze(AnalyzeArgs),
    /// Build an experiment spec from a directory of stimulus images.
    MakeExperiment(MakeArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// JSON config with `port`, `dataDir`, `experimentsDir` and optional `stimuliDir`.
    #[arg(long, env = "PBENCH_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "PBENCH_HOST")]
    host: Option<String>,
    #[arg(long, env = "PBENCH_PORT")]
    port: Option<u16>,
    #[arg(long, env = "PBENCH_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[arg(long, env = "PBENCH_EXPERIMENTS_DIR")]
    experiments_dir: Option<PathBuf>,
    #[arg(long, env = "PBENCH_STIMULI_DIR")]
    stimuli_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParadigmArg {
    Flicker,
    Bubble,
    Gauge,
    Composition,
    Perspective,
}

impl From<ParadigmArg> for Paradigm {
    fn from(p: ParadigmArg) -> Self {
        match p {
            ParadigmArg::Flicker => Paradigm::Flicker,
            ParadigmArg::Bubble => Paradigm::Bubble,
            ParadigmArg::Gauge => Paradigm::Gauge,
            ParadigmArg::Composition => Paradigm::Composition,
            ParadigmArg::Perspective => Paradigm::Perspective,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OffsetArg {
    ThroughOrigin,
    FreeOffset,
}

#[derive(Args)]
struct AnalyzeArgs {
    paradigm: ParadigmArg,
    /// Directory of uploaded session CSVs.
    results_dir: PathBuf,
    #[arg(long)]
    experiment: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Recorded in the report header; the analyses themselves are deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Composition kernel bandwidth in pixels.
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value = "through-origin")]
    offset_mode: OffsetArg,
    /// Use this annotator's horizon for every figure of an image.
    #[arg(long)]
    horizon_annotator: Option<String>,
}

#[derive(Args)]
struct MakeArgs {
    paradigm: ParadigmArg,
    #[arg(long)]
    stimuli: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    id: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gauge sample points.
    #[arg(long)]
    points: Option<usize>,
    /// Gauge sampling rectangle in pixels: x,y,width,height.
    #[arg(long, value_parser = parse_region)]
    region: Option<[f64; 4]>,
    /// Parameter override, e.g. `--param radius-px=24`.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

fn parse_region(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|_| "expected four numbers x,y,width,height".to_string())
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v: f64 = v.parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.to_string(), v))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: INPUT_ERROR,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(a) => serve(a),
        Command::Analyze(a) => run_analyze(a),
        Command::MakeExperiment(a) => run_make(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let mut cfg = match &a.config {
        Some(path) => ServiceConfig::load(path).map_err(Failure::input)?,
        None => {
            let data = a
                .data_dir
                .clone()
                .ok_or_else(|| Failure::input("--data-dir is required without --config"))?;
            let exps = a
                .experiments_dir
                .clone()
                .ok_or_else(|| Failure::input("--experiments-dir is required without --config"))?;
            ServiceConfig::new(data, exps)
        }
    };
    if let Some(h) = a.host {
        cfg.host = h;
    }
    if let Some(p) = a.port {
        cfg.port = p;
    }
    if a.config.is_some() {
        if let Some(d) = a.data_dir {
            cfg.data_dir = d;
        }
        if let Some(d) = a.experiments_dir {
            cfg.experiments_dir = d;
        }
    }
    if a.stimuli_dir.is_some() {
        cfg.stimuli_dir = a.stimuli_dir;
    }
    let rt = tokio::runtime::Runtime::new().map_err(Failure::input)?;
    eprintln!("listening on {}:{}", cfg.host, cfg.port);
    rt.block_on(pbench_service::serve(&cfg))
        .map_err(Failure::input)
}

fn run_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let spec = ExperimentSpec::load(&a.experiment).map_err(Failure::input)?;
    let opts = AnalyzeOptions {
        bandwidth: a.bandwidth,
        offset_mode: match a.offset_mode {
            OffsetArg::ThroughOrigin => OffsetMode::ThroughOrigin,
            OffsetArg::FreeOffset => OffsetMode::FreeOffset,
        },
        horizon_annotator: a.horizon_annotator,
        seed: a.seed,
    };
    let classify = |e: pbench_core::AnalysisError| Failure {
        code: if e.is_input_error() {
            INPUT_ERROR
        } else {
            ANALYSIS_ERROR
        },
        message: e.to_string(),
    };
    let bundle = analyze(a.paradigm.into(), &spec, &a.results_dir, &opts).map_err(classify)?;
    bundle.write_to(&a.out).map_err(classify)?;
    print!("{}", bundle.summary);
    Ok(())
}

fn run_make(a: MakeArgs) -> Result<(), Failure> {
    let opts = AuthoringOptions {
        id: a.id,
        seed: a.seed,
        points: a.points,
        region: a.region,
        parameters: a.params.into_iter().collect::<BTreeMap<_, _>>(),
    };
    let spec = make_experiment(a.paradigm.into(), &a.stimuli, &opts).map_err(Failure::input)?;
    write(&a.out, spec.to_json().as_bytes())?;
    if let Some(tri) = &spec.triangulation {
        let path = a.out.with_file_name("triangulation.csv");
        write(&path, triangulation_csv(tri).as_bytes())?;
    }
    println!(
        "wrote {} ({} stimuli, {} trials)",
        a.out.display(),
        spec.stimuli.len(),
        spec.trial_table.len()
    );
    Ok(())
}

fn write(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| Failure::input(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}
