//! Experiment presets, the flat key/value config format, dataset and
//! landmark resolution, and multi-seed sweeps.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Deserialize;

use crate::datasets::{csv_io, gen_formant, load_zoo, verify_zoo_rows, FormantData, FormantSpec, VOWEL_FORMANTS};
use crate::error::{LamaError, Result};
use crate::grid::{Codebook, Dataset, LandmarkSet, NodeGrid};
use crate::schedules::TrainConfig;
use crate::trainer::{train_with, TrainOptions, TrainTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Zoo,
    Formant,
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Zoo => "zoo",
            DatasetKind::Formant => "formant",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = LamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zoo" => Ok(DatasetKind::Zoo),
            "formant" => Ok(DatasetKind::Formant),
            other => Err(LamaError::config("dataset", format!("unknown dataset {other:?}"))),
        }
    }
}

/// Where a landmark datum comes from: a data row (Zoo) or a vowel mean (formant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LandmarkSource {
    Row(usize),
    Vowel(String),
}

/// One `source:node` landmark assignment, e.g. `75:312` or `a:94`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkRef {
    pub source: LandmarkSource,
    pub node: usize,
}

impl LandmarkRef {
    pub fn row(n: usize, node: usize) -> Self {
        LandmarkRef {
            source: LandmarkSource::Row(n),
            node,
        }
    }

    pub fn vowel(v: &str, node: usize) -> Self {
        LandmarkRef {
            source: LandmarkSource::Vowel(v.to_string()),
            node,
        }
    }
}

impl fmt::Display for LandmarkRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            LandmarkSource::Row(n) => write!(f, "{n}:{}", self.node),
            LandmarkSource::Vowel(v) => write!(f, "{v}:{}", self.node),
        }
    }
}

impl FromStr for LandmarkRef {
    type Err = LamaError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || LamaError::config("landmarks", format!("expected `source:node`, got {s:?}"));
        let (src, node) = s.split_once(':').ok_or_else(bad)?;
        let node = node.trim().parse().map_err(|_| bad())?;
        let src = src.trim();
        let source = match src.parse::<usize>() {
            Ok(n) => LandmarkSource::Row(n),
            Err(_) if !src.is_empty() => LandmarkSource::Vowel(src.to_string()),
            Err(_) => return Err(bad()),
        };
        Ok(LandmarkRef { source, node })
    }
}

/// A complete run description: dataset, schedules, and landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetKind,
    pub train: TrainConfig,
    pub landmarks: Vec<LandmarkRef>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        let k = self.train.kx * self.train.ky;
        for (i, lm) in self.landmarks.iter().enumerate() {
            if lm.node >= k {
                return Err(LamaError::config(
                    "landmarks",
                    format!("node {} is outside the {}x{} grid", lm.node, self.train.kx, self.train.ky),
                ));
            }
            if self.landmarks[..i].iter().any(|o| o.node == lm.node) {
                return Err(LamaError::config(
                    "landmarks",
                    format!("node {} is assigned more than one landmark", lm.node),
                ));
            }
            match (&lm.source, self.dataset) {
                (LandmarkSource::Row(_), DatasetKind::Zoo) => {}
                (LandmarkSource::Vowel(v), DatasetKind::Formant) => {
                    if !VOWEL_FORMANTS.iter().any(|(name, _, _)| name == v) {
                        return Err(LamaError::config("landmarks", format!("unknown vowel {v:?}")));
                    }
                }
                _ => {
                    return Err(LamaError::config(
                        "landmarks",
                        format!("landmark {lm} does not fit the {} dataset", self.dataset),
                    ))
                }
            }
        }
        if self.train.p_th > 0.0 && self.landmarks.is_empty() {
            return Err(LamaError::config(
                "p_th",
                "a positive landmark-phase probability needs at least one landmark",
            ));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> RunConfig {
        let mut c = self.clone();
        c.train.seed = seed;
        c
    }

    /// Serializes to the flat key/value format read by [`parse_config`].
    pub fn to_text(&self) -> String {
        let t = &self.train;
        let mut s = String::new();
        s.push_str(&format!("dataset = \"{}\"\n", self.dataset));
        s.push_str(&format!("kx = {}\nky = {}\nt_max = {}\n", t.kx, t.ky, t.t_max));
        for (key, v) in [
            ("a_max", t.a_max),
            ("a_min", t.a_min),
            ("tau_a", t.tau_a),
            ("sigma_max", t.sigma_max),
            ("sigma_min", t.sigma_min),
            ("tau_sigma", t.tau_sigma),
            ("b_max", t.b_max),
            ("b_min", t.b_min),
            ("tau_b", t.tau_b),
            ("t_center", t.t_center),
            ("rho_b", t.rho_b),
            ("rho_max", t.rho_max),
            ("rho_min", t.rho_min),
            ("tau_rho", t.tau_rho),
            ("p_th", t.p_th),
        ] {
            s.push_str(&format!("{key} = {v:?}\n"));
        }
        let lms: Vec<String> = self.landmarks.iter().map(|l| format!("\"{l}\"")).collect();
        s.push_str(&format!("landmarks = [{}]\n", lms.join(", ")));
        s.push_str(&format!("seed = {}\n", t.seed));
        s
    }
}

const INTEGER_KEYS: [&str; 4] = ["kx", "ky", "t_max", "seed"];
const REAL_KEYS: [&str; 15] = [
    "a_max", "a_min", "tau_a", "sigma_max", "sigma_min", "tau_sigma", "b_max", "b_min", "tau_b", "t_center",
    "rho_b", "rho_max", "rho_min", "tau_rho", "p_th",
];

#[derive(Deserialize)]
struct ConfigFile {
    dataset: Option<String>,
    kx: usize,
    ky: usize,
    t_max: usize,
    a_max: f64,
    a_min: f64,
    tau_a: f64,
    sigma_max: f64,
    sigma_min: f64,
    tau_sigma: f64,
    b_max: Option<f64>,
    b_min: Option<f64>,
    tau_b: Option<f64>,
    t_center: Option<f64>,
    rho_b: Option<f64>,
    rho_max: Option<f64>,
    rho_min: Option<f64>,
    tau_rho: Option<f64>,
    p_th: Option<f64>,
    #[serde(default)]
    landmarks: Vec<String>,
    seed: Option<u64>,
}

/// Parses the flat key/value config text (TOML syntax). Keys follow the
/// parameter names (`kx`, `a_max`, `tau_sigma`, ...); landmark-phase keys
/// may be omitted for a plain SOM. Decay constants must be literals.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| LamaError::config("config", e.message().to_string()))?;
    for (key, value) in &table {
        let k = key.as_str();
        let ok = if INTEGER_KEYS.contains(&k) {
            matches!(value, toml::Value::Integer(i) if *i >= 0)
        } else if REAL_KEYS.contains(&k) {
            matches!(value, toml::Value::Integer(_) | toml::Value::Float(_))
        } else if k == "dataset" {
            value.is_str()
        } else if k == "landmarks" {
            matches!(value, toml::Value::Array(a) if a.iter().all(toml::Value::is_str))
        } else {
            return Err(LamaError::config(k, "unknown key"));
        };
        if !ok {
            return Err(LamaError::config(k, format!("unexpected value {value}")));
        }
    }
    for key in ["kx", "ky", "t_max", "a_max", "a_min", "tau_a", "sigma_max", "sigma_min", "tau_sigma"] {
        if !table.contains_key(key) {
            return Err(LamaError::config(key, "missing required key"));
        }
    }
    let file: ConfigFile = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| LamaError::config("config", e.message().to_string()))?;
    let inert = TrainConfig::som(0, 0, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let train = TrainConfig {
        kx: file.kx,
        ky: file.ky,
        t_max: file.t_max,
        a_max: file.a_max,
        a_min: file.a_min,
        tau_a: file.tau_a,
        sigma_max: file.sigma_max,
        sigma_min: file.sigma_min,
        tau_sigma: file.tau_sigma,
        b_max: file.b_max.unwrap_or(inert.b_max),
        b_min: file.b_min.unwrap_or(inert.b_min),
        tau_b: file.tau_b.unwrap_or(inert.tau_b),
        t_center: file.t_center.unwrap_or(inert.t_center),
        rho_b: file.rho_b.unwrap_or(inert.rho_b),
        rho_max: file.rho_max.unwrap_or(inert.rho_max),
        rho_min: file.rho_min.unwrap_or(inert.rho_min),
        tau_rho: file.tau_rho.unwrap_or(inert.tau_rho),
        p_th: file.p_th.unwrap_or(0.0),
        seed: file.seed.unwrap_or(0),
    };
    let landmarks = file
        .landmarks
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<LandmarkRef>>>()?;
    let dataset = match file.dataset {
        Some(d) => d.parse()?,
        None => DatasetKind::Zoo,
    };
    let cfg = RunConfig {
        dataset,
        train,
        landmarks,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: RunConfig,
}

/// Decay constant `t_max / 3 - 1` used throughout the published tables.
const TAU_60K: f64 = 19999.0;

fn zoo(sigma_min: f64, lama: Option<(f64, f64, f64, f64, f64)>, landmarks: &[(usize, usize)]) -> RunConfig {
    let mut train = TrainConfig::som(25, 25, 60000, 0.5, 0.15, TAU_60K, 19.0, sigma_min, TAU_60K);
    if let Some((b_min, rho_b, rho_min, p_th, t_center)) = lama {
        train.b_max = 0.4;
        train.b_min = b_min;
        train.tau_b = TAU_60K;
        train.t_center = t_center;
        train.rho_b = rho_b;
        train.rho_max = 13.0;
        train.rho_min = rho_min;
        train.tau_rho = TAU_60K;
        train.p_th = p_th;
    }
    RunConfig {
        dataset: DatasetKind::Zoo,
        train,
        landmarks: landmarks.iter().map(|&(n, k)| LandmarkRef::row(n, k)).collect(),
    }
}

/// The Zoo and formant experiment configurations.
pub fn presets() -> Vec<ExperimentPreset> {
    let formant_som = RunConfig {
        dataset: DatasetKind::Formant,
        train: TrainConfig::som(10, 10, 60000, 0.3, 0.1, TAU_60K, 4.0, 0.3, TAU_60K),
        landmarks: vec![],
    };
    let mut formant_lama = RunConfig {
        dataset: DatasetKind::Formant,
        train: TrainConfig::som(10, 10, 60000, 0.3, 0.05, TAU_60K, 4.0, 0.4, TAU_60K),
        landmarks: [("a", 94), ("i", 0), ("u", 4), ("e", 41), ("o", 49)]
            .iter()
            .map(|&(v, k)| LandmarkRef::vowel(v, k))
            .collect(),
    };
    let t = &mut formant_lama.train;
    t.b_max = 0.3;
    t.b_min = 0.08;
    t.tau_b = TAU_60K;
    t.t_center = 30000.0;
    t.rho_b = 15000.0;
    t.rho_max = 2.0;
    t.rho_min = 0.8;
    t.tau_rho = TAU_60K;
    t.p_th = 0.1;

    vec![
        ExperimentPreset {
            name: "zoo-som",
            description: "Zoo, plain SOM",
            config: zoo(0.1, None, &[]),
        },
        ExperimentPreset {
            name: "zoo-lama1",
            description: "Zoo, sea lion at the centre node",
            config: zoo(0.1, Some((0.01, 20000.0, 3.0, 0.01, 15000.0)), &[(75, 312)]),
        },
        ExperimentPreset {
            name: "zoo-lama2",
            description: "Zoo, duck middle-left and penguin middle-right",
            config: zoo(0.01, Some((0.075, 25000.0, 0.7, 0.05, 15000.0)), &[(21, 303), (58, 321)]),
        },
        ExperimentPreset {
            name: "zoo-lama3",
            description: "Zoo, mink top-centre, seal bottom-left, slowworm bottom-right",
            config: zoo(
                0.01,
                Some((0.075, 25000.0, 1.0, 0.07, 15000.0)),
                &[(48, 37), (74, 552), (80, 572)],
            ),
        },
        ExperimentPreset {
            name: "zoo-lama4",
            description: "Zoo, mink/toad/seal/slowworm at the four corners",
            config: zoo(
                0.01,
                Some((0.1, 25000.0, 1.5, 0.09, 15000.0)),
                &[(48, 0), (89, 24), (74, 600), (80, 624)],
            ),
        },
        ExperimentPreset {
            name: "formant-som",
            description: "Synthetic vowel formants, plain SOM",
            config: formant_som,
        },
        ExperimentPreset {
            name: "formant-lama",
            description: "Synthetic vowel formants, vowel landmarks",
            config: formant_lama,
        },
    ]
}

pub fn preset(name: &str) -> Option<RunConfig> {
    presets().into_iter().find(|p| p.name == name).map(|p| p.config)
}

/// Loaded data plus resolved landmarks, ready for training.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: NodeGrid,
    pub data: Dataset,
    pub landmarks: LandmarkSet,
    pub landmark_names: Vec<String>,
    /// Present for formant problems.
    pub formant: Option<FormantData>,
}

impl Problem {
    /// Zoo problem from an already loaded table.
    pub fn zoo(cfg: &RunConfig, data: Dataset) -> Result<Problem> {
        cfg.validate()?;
        if cfg.dataset != DatasetKind::Zoo {
            return Err(LamaError::config("dataset", "configuration is not a zoo run"));
        }
        if !cfg.landmarks.is_empty() {
            verify_zoo_rows(&data)?;
        }
        let mut rows = Array2::zeros((0, data.dim()));
        let mut labels = Vec::new();
        let mut names = Vec::new();
        for lm in &cfg.landmarks {
            let LandmarkSource::Row(n) = lm.source else {
                unreachable!("validated")
            };
            if n >= data.len() {
                return Err(LamaError::Index {
                    index: n,
                    len: data.len(),
                });
            }
            rows.push_row(ndarray::ArrayView1::from(data.row(n))).expect("same width");
            labels.push(lm.node);
            names.push(data.name(n));
        }
        Self::assemble(cfg, data, rows, labels, names, None)
    }

    pub fn formant(cfg: &RunConfig, formant: FormantData) -> Result<Problem> {
        cfg.validate()?;
        if cfg.dataset != DatasetKind::Formant {
            return Err(LamaError::config("dataset", "configuration is not a formant run"));
        }
        let mut rows = Array2::zeros((0, 2));
        let mut labels = Vec::new();
        let mut names = Vec::new();
        for lm in &cfg.landmarks {
            let LandmarkSource::Vowel(v) = &lm.source else {
                unreachable!("validated")
            };
            let mean = formant.vowel_mean(v).expect("validated vowel");
            rows.push_row(ndarray::ArrayView1::from(&mean[..])).expect("two columns");
            labels.push(lm.node);
            names.push(format!("/{v}/"));
        }
        let data = formant.dataset.clone();
        Self::assemble(cfg, data, rows, labels, names, Some(formant))
    }

    /// Loads the dataset named by `cfg`: the Zoo table from `zoo_path`, or
    /// a generated formant set from `formant_spec`.
    pub fn load(cfg: &RunConfig, zoo_path: Option<&Path>, formant_spec: &FormantSpec) -> Result<Problem> {
        match cfg.dataset {
            DatasetKind::Zoo => {
                let path = zoo_path.ok_or_else(|| {
                    LamaError::config("data", "zoo runs need the UCI zoo.data file (pass --data)")
                })?;
                let data = load_zoo(BufReader::new(File::open(path)?))?;
                Self::zoo(cfg, data)
            }
            DatasetKind::Formant => Self::formant(cfg, gen_formant(formant_spec)?),
        }
    }

    fn assemble(
        cfg: &RunConfig,
        data: Dataset,
        rows: Array2<f64>,
        labels: Vec<usize>,
        names: Vec<String>,
        formant: Option<FormantData>,
    ) -> Result<Problem> {
        let grid = NodeGrid::new(cfg.train.kx, cfg.train.ky)?;
        let landmarks = if labels.is_empty() {
            LandmarkSet::empty(data.dim())
        } else {
            LandmarkSet::new(rows, labels, grid.len())?
        };
        Ok(Problem {
            grid,
            data,
            landmarks,
            landmark_names: names,
            formant,
        })
    }

    pub fn train(&self, cfg: &TrainConfig, opts: &TrainOptions) -> Result<(Codebook, TrainTrace)> {
        train_with(&self.data, &self.landmarks, cfg, &self.grid, opts)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub seed: u64,
    pub codebook: Codebook,
    pub trace: TrainTrace,
}

/// Per-checkpoint means across the runs of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub steps: Vec<usize>,
    pub mean_qed: Vec<f64>,
    pub mean_qel: Option<Vec<f64>>,
    pub mean_te: Vec<f64>,
    pub mean_ste: Vec<f64>,
}

impl SweepReport {
    /// Aggregates runs after sorting them by seed, so the means do not
    /// depend on completion order.
    pub fn from_runs(runs: &[RunOutcome]) -> Result<SweepReport> {
        let first = runs.first().ok_or(LamaError::Empty("sweep"))?;
        let steps: Vec<usize> = first.trace.checkpoints.iter().map(|c| c.t).collect();
        let mut order: Vec<&RunOutcome> = runs.iter().collect();
        order.sort_by_key(|r| r.seed);
        for r in &order {
            let s: Vec<usize> = r.trace.checkpoints.iter().map(|c| c.t).collect();
            if s != steps {
                return Err(LamaError::config("checkpoints", "runs disagree on checkpoint steps"));
            }
        }
        let n = order.len() as f64;
        let mean = |f: &dyn Fn(&crate::trainer::Checkpoint) -> f64| -> Vec<f64> {
            (0..steps.len())
                .map(|i| order.iter().map(|r| f(&r.trace.checkpoints[i])).sum::<f64>() / n)
                .collect()
        };
        let has_qel = first.trace.checkpoints.iter().all(|c| c.report.qel.is_some());
        Ok(SweepReport {
            runs: order.len(),
            seeds: order.iter().map(|r| r.seed).collect(),
            mean_qed: mean(&|c| c.report.qed),
            mean_qel: has_qel.then(|| mean(&|c| c.report.qel.expect("checked"))),
            mean_te: mean(&|c| c.report.te),
            mean_ste: mean(&|c| c.report.ste),
            steps,
        })
    }

    /// `(metric, values)` pairs in the order qed, qel, te, ste.
    pub fn series(&self) -> Vec<(&'static str, &[f64])> {
        let mut out = vec![("qed", self.mean_qed.as_slice())];
        if let Some(q) = &self.mean_qel {
            out.push(("qel", q.as_slice()));
        }
        out.push(("te", self.mean_te.as_slice()));
        out.push(("ste", self.mean_ste.as_slice()));
        out
    }

    /// Long-form CSV: `metric,step,mean,runs`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["metric", "step", "mean", "runs"]).map_err(csv_io)?;
        for (name, values) in self.series() {
            for (t, v) in self.steps.iter().zip(values) {
                w.write_record([name.to_string(), t.to_string(), v.to_string(), self.runs.to_string()])
                    .map_err(csv_io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: SweepReport,
    /// Individual runs, sorted by seed.
    pub runs: Vec<RunOutcome>,
}

/// Trains `runs` independent maps with seeds `base_seed..base_seed + runs`
/// on up to `jobs` threads.
pub fn sweep(problem: &Problem, cfg: &TrainConfig, runs: usize, base_seed: u64, jobs: usize) -> Result<SweepOutcome> {
    if runs == 0 {
        return Err(LamaError::config("runs", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| LamaError::config("jobs", e.to_string()))?;
    let seeds: Vec<u64> = (0..runs as u64).map(|i| base_seed + i).collect();
    let results: Vec<(u64, Result<(Codebook, TrainTrace)>)> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let run_cfg = TrainConfig { seed, ..cfg.clone() };
                (seed, problem.train(&run_cfg, &TrainOptions::default()))
            })
            .collect()
    });
    let completed = results.iter().filter(|(_, r)| r.is_ok()).count();
    let mut outcomes = Vec::with_capacity(runs);
    for (seed, r) in results {
        match r {
            Ok((codebook, trace)) => outcomes.push(RunOutcome { seed, codebook, trace }),
            Err(e) => {
                return Err(LamaError::Degenerate(format!(
                    "sweep aborted: run with seed {seed} failed ({e}); {completed} of {runs} runs completed"
                )))
            }
        }
    }
    outcomes.sort_by_key(|r| r.seed);
    let report = SweepReport::from_runs(&outcomes)?;
    Ok(SweepOutcome { report, runs: outcomes })
}
