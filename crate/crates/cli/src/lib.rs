//! Command implementations behind the `lama` binary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lama_core::datasets::FormantSpec;
use lama_core::experiment::{parse_config, preset, presets, sweep, Problem, RunConfig, SweepReport};
use lama_core::metrics::ErrorReport;
use lama_core::trainer::TrainOptions;
use lama_core::viz::render::{
    curves_svg, mesh_svg, umatrix_svg, write_matrix_csv, write_pca_csv, write_trace_csv, write_umatrix_csv,
};
use lama_core::viz::{label_overlay, mesh_edges, pca_fit_project, umatrix};
use lama_core::{project_all, winner, Codebook};

#[derive(Debug, Parser)]
#[command(name = "lama", version, about = "Train and evaluate landmark maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one map and write its artifacts.
    Train(TrainArgs),
    /// Train many seeds and write mean error curves.
    Sweep(SweepArgs),
    /// Write a preset's config (and generated dataset, if any).
    Export(ExportArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Built-in experiment preset (see `lama presets`).
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Config file in the flat `key = value` format.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// UCI zoo.data file, required for zoo runs.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: ConfigArgs,
    /// Training seed; defaults to the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write the codebook at every checkpoint.
    #[arg(long)]
    pub snapshots: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: ConfigArgs,
    /// Number of runs; seeds are `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// First seed of the sweep.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Runs trained concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: ConfigArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn resolve_config(source: &ConfigArgs) -> Result<RunConfig> {
    match (&source.preset, &source.config) {
        (Some(name), None) => preset(name).with_context(|| {
            let names: Vec<&str> = presets().iter().map(|p| p.name).collect();
            format!("unknown preset {name:?}; available: {}", names.join(", "))
        }),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("invalid config {}", path.display()))
        }
        (None, None) => bail!("pass either --preset or --config"),
        (Some(_), Some(_)) => bail!("--preset and --config are mutually exclusive"),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let mut w = create(dir, name)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(dir.join(name))
}

fn write_codebook(dir: &Path, name: &str, cb: &Codebook) -> Result<PathBuf> {
    let header: Vec<String> = (0..cb.dim()).map(|d| format!("w{d}")).collect();
    let mut w = create(dir, name)?;
    write_matrix_csv(&mut w, cb.weights(), Some(&header))?;
    w.flush()?;
    Ok(dir.join(name))
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub files: Vec<PathBuf>,
    pub final_report: ErrorReport,
}

/// Trains once and writes `trace.csv`, `codebook.csv`, `umatrix.csv`,
/// `umatrix.svg`, `overlay.svg`, `pca.csv`, and `config.toml`.
pub fn run_train(args: &TrainArgs) -> Result<TrainSummary> {
    let mut cfg = resolve_config(&args.source)?;
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    let problem = Problem::load(&cfg, args.source.data.as_deref(), &FormantSpec::default())?;
    let opts = TrainOptions {
        checkpoints: None,
        snapshots: args.snapshots,
    };
    let (codebook, trace) = problem.train(&cfg.train, &opts)?;

    let out = &args.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::new();

    let mut w = create(out, "trace.csv")?;
    write_trace_csv(&mut w, &trace, cfg.train.seed)?;
    w.flush()?;
    files.push(out.join("trace.csv"));

    files.push(write_codebook(out, "codebook.csv", &codebook)?);

    let u = umatrix(&codebook, &problem.grid)?;
    let mut w = create(out, "umatrix.csv")?;
    write_umatrix_csv(&mut w, &u)?;
    w.flush()?;
    files.push(out.join("umatrix.csv"));

    let names: Vec<String> = (0..problem.data.len()).map(|n| problem.data.name(n)).collect();
    let projections = project_all(&codebook, &problem.data)?;
    let landmark_winners = (0..problem.landmarks.len())
        .map(|m| Ok((problem.landmark_names[m].clone(), winner(&codebook, problem.landmarks.datum(m))?)))
        .collect::<Result<Vec<_>>>()?;
    let overlay = label_overlay(&projections, &names, &landmark_winners)?;
    files.push(write_text(out, "umatrix.svg", &umatrix_svg(&u, Some(&overlay)))?);

    let pca = pca_fit_project(&codebook, &problem.data)?;
    let landmark_points: Vec<(String, [f64; 3])> = (0..problem.landmarks.len())
        .map(|m| (problem.landmark_names[m].clone(), pca.project(problem.landmarks.datum(m))))
        .collect();
    files.push(write_text(
        out,
        "overlay.svg",
        &mesh_svg(&pca, &mesh_edges(&problem.grid), &landmark_points),
    )?);
    let mut w = create(out, "pca.csv")?;
    write_pca_csv(&mut w, &pca, &names, &landmark_points)?;
    w.flush()?;
    files.push(out.join("pca.csv"));

    files.push(write_text(out, "config.toml", &cfg.to_text())?);

    if args.snapshots {
        let dir = out.join("snapshots");
        fs::create_dir_all(&dir)?;
        for (t, cb) in &trace.snapshots {
            files.push(write_codebook(&dir, &format!("codebook_t{t}.csv"), cb)?);
        }
    }

    let final_report = trace.last().context("training recorded no checkpoints")?.report;
    Ok(TrainSummary { files, final_report })
}

/// Runs a sweep and writes `sweep_means.csv`, `sweep_runs.csv`, and one
/// `sweep_<metric>.svg` curve per metric.
pub fn run_sweep(args: &SweepArgs) -> Result<SweepReport> {
    let cfg = resolve_config(&args.source)?;
    let problem = Problem::load(&cfg, args.source.data.as_deref(), &FormantSpec::default())?;
    let outcome = sweep(&problem, &cfg.train, args.runs, args.seed, args.jobs)?;
    let out = &args.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut w = create(out, "sweep_means.csv")?;
    outcome.report.write_csv(&mut w)?;
    w.flush()?;

    let mut w = create(out, "sweep_runs.csv")?;
    for (i, run) in outcome.runs.iter().enumerate() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &run.trace, run.seed)?;
        let text = String::from_utf8(buf).expect("csv is utf-8");
        let body = if i == 0 { text.as_str() } else { text.split_once('\n').map_or("", |(_, b)| b) };
        w.write_all(body.as_bytes())?;
    }
    w.flush()?;

    let label = args
        .source
        .preset
        .clone()
        .unwrap_or_else(|| "config".to_string());
    for (metric, values) in outcome.report.series() {
        let title = format!("mean {} over {} runs ({label})", metric.to_uppercase(), outcome.report.runs);
        let svg = curves_svg(&title, &outcome.report.steps, &[(label.clone(), values.to_vec())]);
        write_text(out, &format!("sweep_{metric}.svg"), &svg)?;
    }
    Ok(outcome.report)
}

/// Writes `config.toml` for the selected config and, for formant runs,
/// the generated dataset as `formant.csv`.
pub fn run_export(args: &ExportArgs) -> Result<Vec<PathBuf>> {
    let cfg = resolve_config(&args.source)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut files = vec![write_text(&args.out, "config.toml", &cfg.to_text())?];
    if cfg.dataset == lama_core::experiment::DatasetKind::Formant {
        let data = lama_core::datasets::gen_formant(&FormantSpec::default())?;
        let mut w = create(&args.out, "formant.csv")?;
        data.write_csv(&mut w)?;
        w.flush()?;
        files.push(args.out.join("formant.csv"));
    }
    Ok(files)
}

pub fn list_presets() -> String {
    let mut s = String::new();
    for p in presets() {
        let lms: Vec<String> = p.config.landmarks.iter().map(|l| l.to_string()).collect();
        s.push_str(&format!(
            "{:<13} {:<8} {}x{}  p_th={:<5} landmarks=[{}]  {}\n",
            p.name,
            p.config.dataset,
            p.config.train.kx,
            p.config.train.ky,
            p.config.train.p_th,
            lms.join(" "),
            p.description
        ));
    }
    s
}

pub fn format_report(r: &ErrorReport) -> String {
    match r.qel {
        Some(q) => format!("QED={:.4} QEL={:.4} TE={:.4} STE={:.4}", r.qed, q, r.te, r.ste),
        None => format!("QED={:.4} TE={:.4} STE={:.4}", r.qed, r.te, r.ste),
    }
}
