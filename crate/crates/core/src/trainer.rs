//! The alternating update method.
//!
//! Each step either performs a data-driven update (pick a random data row,
//! find its winner, pull every codebook vector toward it) or a
//! landmark-driven update (pick a random landmark, force its assigned node to
//! be the winner, pull every codebook vector toward the landmark datum).
//!
//! Randomness comes from [`RngStream`], a ChaCha8 generator seeded with
//! `TrainConfig::seed`. Per step the draws are, in order: the phase draw `p`
//! (only when the landmark phase is reachable, i.e. `p_th > 0` and `M > 0`),
//! then the sample index. Codebook initialization draws `K * D` uniforms in
//! row-major order before the first step.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LamaError, Result};
use crate::grid::{winner, Codebook, Dataset, LandmarkSet, NodeGrid};
use crate::metrics::{evaluate, ErrorReport};
use crate::schedules::{rate_a, rate_b, spread_rho, spread_sigma, TrainConfig};

/// Deterministic random stream (ChaCha8, 64-bit seed expansion from
/// `rand_core`). Output is identical on every platform.
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform draw on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    /// Uniform index in `0..n`. Sampled through `u64` so the result does not
    /// depend on the platform's pointer width.
    pub fn index(&mut self, n: usize) -> usize {
        self.0.random_range(0..n as u64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    DataDriven,
    LandmarkDriven,
}

pub fn init_codebook(rng: &mut RngStream, k: usize, d: usize) -> Codebook {
    let mut w = Array2::zeros((k, d));
    w.iter_mut().for_each(|v| *v = rng.uniform());
    Codebook::new(w).expect("uniform draws are finite")
}

/// Picks the phase for one step. The landmark phase runs iff a fresh uniform
/// `p` falls strictly below `p_th`; no draw is made when it is unreachable.
pub fn select_phase(rng: &mut RngStream, p_th: f64, landmark_count: usize) -> Phase {
    if p_th <= 0.0 || landmark_count == 0 {
        return Phase::DataDriven;
    }
    if rng.uniform() < p_th {
        Phase::LandmarkDriven
    } else {
        Phase::DataDriven
    }
}

fn check_step_inputs(codebook: &Codebook, x: &[f64], grid: &NodeGrid) -> Result<()> {
    if codebook.len() != grid.len() {
        return Err(LamaError::Shape {
            expected: grid.len(),
            found: codebook.len(),
        });
    }
    if x.len() != codebook.dim() {
        return Err(LamaError::Shape {
            expected: codebook.dim(),
            found: x.len(),
        });
    }
    Ok(())
}

/// `w_k += rate * exp(-|v_c - v_k|^2 / (2 spread^2)) * (x - w_k)` for every node.
fn pull_toward(codebook: &mut Codebook, x: &[f64], centre: usize, rate: f64, spread: f64, grid: &NodeGrid) {
    let denom = 2.0 * spread * spread;
    let d = x.len();
    let weights = codebook
        .weights_mut()
        .as_slice_mut()
        .expect("standard layout");
    for (k, w) in weights.chunks_exact_mut(d).enumerate() {
        let factor = rate * (-grid.sq_dist(centre, k) / denom).exp();
        for (wi, xi) in w.iter_mut().zip(x) {
            *wi += factor * (xi - *wi);
        }
    }
}

/// Data-driven update for input `x` at step `t`. Returns the winner node.
pub fn data_step(
    codebook: &mut Codebook,
    x: &[f64],
    t: usize,
    cfg: &TrainConfig,
    grid: &NodeGrid,
) -> Result<usize> {
    check_step_inputs(codebook, x, grid)?;
    let k_d = winner(codebook, x)?;
    pull_toward(codebook, x, k_d, rate_a(t, cfg), spread_sigma(t, cfg), grid);
    Ok(k_d)
}

/// Landmark-driven update: node `label` is the winner regardless of distance.
pub fn landmark_step(
    codebook: &mut Codebook,
    landmark: &[f64],
    label: usize,
    t: usize,
    cfg: &TrainConfig,
    grid: &NodeGrid,
) -> Result<()> {
    grid.check(label)?;
    check_step_inputs(codebook, landmark, grid)?;
    pull_toward(codebook, landmark, label, rate_b(t, cfg), spread_rho(t, cfg), grid);
    Ok(())
}

/// Default evaluation steps: `0, 9999, 19999, ..., 59999` for the standard
/// 60000-step horizon, otherwise eight evenly spaced steps ending at
/// `t_max - 1`.
pub fn default_checkpoints(t_max: usize) -> Vec<usize> {
    if t_max == 60000 {
        return std::iter::once(0)
            .chain((1..=6).map(|j| j * 10000 - 1))
            .collect();
    }
    let last = t_max.saturating_sub(1) as f64;
    let mut steps: Vec<usize> = (0..8).map(|j| (j as f64 * last / 7.0).round() as usize).collect();
    steps.dedup();
    steps
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Checkpoint {
    pub t: usize,
    pub report: ErrorReport,
}

#[derive(Debug, Clone, Default)]
pub struct TrainTrace {
    pub checkpoints: Vec<Checkpoint>,
    /// Codebooks captured at checkpoint steps when snapshots are requested.
    pub snapshots: Vec<(usize, Codebook)>,
}

impl TrainTrace {
    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Steps after which metrics are recorded; `None` uses [`default_checkpoints`].
    pub checkpoints: Option<Vec<usize>>,
    pub snapshots: bool,
}

struct Recorder {
    steps: Vec<usize>,
    next: usize,
    snapshots: bool,
    trace: TrainTrace,
}

impl Recorder {
    fn new(cfg: &TrainConfig, opts: &TrainOptions) -> Result<Self> {
        let steps = opts
            .checkpoints
            .clone()
            .unwrap_or_else(|| default_checkpoints(cfg.t_max));
        if steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LamaError::config("checkpoints", "steps must be strictly increasing"));
        }
        if let Some(&last) = steps.last() {
            if last >= cfg.t_max {
                return Err(LamaError::config(
                    "checkpoints",
                    format!("step {last} is beyond t_max - 1 = {}", cfg.t_max - 1),
                ));
            }
        }
        Ok(Recorder {
            steps,
            next: 0,
            snapshots: opts.snapshots,
            trace: TrainTrace::default(),
        })
    }

    fn after_step(
        &mut self,
        t: usize,
        codebook: &Codebook,
        data: &Dataset,
        landmarks: &LandmarkSet,
        grid: &NodeGrid,
    ) -> Result<()> {
        if self.steps.get(self.next) == Some(&t) {
            self.next += 1;
            let report = evaluate(codebook, data, landmarks, grid)?;
            self.trace.checkpoints.push(Checkpoint { t, report });
            if self.snapshots {
                self.trace.snapshots.push((t, codebook.clone()));
            }
        }
        Ok(())
    }
}

fn check_train_inputs(data: &Dataset, landmarks: &LandmarkSet, cfg: &TrainConfig, grid: &NodeGrid) -> Result<()> {
    cfg.validate()?;
    if grid.kx() != cfg.kx || grid.ky() != cfg.ky {
        return Err(LamaError::config(
            "kx",
            format!(
                "grid is {}x{} but config says {}x{}",
                grid.kx(),
                grid.ky(),
                cfg.kx,
                cfg.ky
            ),
        ));
    }
    if data.is_empty() {
        return Err(LamaError::Empty("dataset"));
    }
    if !landmarks.is_empty() && landmarks.dim() != data.dim() {
        return Err(LamaError::Shape {
            expected: data.dim(),
            found: landmarks.dim(),
        });
    }
    if let Some(&bad) = landmarks.labels().iter().find(|&&l| l >= grid.len()) {
        return Err(LamaError::Index {
            index: bad,
            len: grid.len(),
        });
    }
    if cfg.p_th > 0.0 && landmarks.is_empty() {
        return Err(LamaError::config(
            "p_th",
            "a positive landmark-phase probability needs at least one landmark",
        ));
    }
    Ok(())
}

/// Trains a landmark map with default options.
pub fn train(
    data: &Dataset,
    landmarks: &LandmarkSet,
    cfg: &TrainConfig,
    grid: &NodeGrid,
) -> Result<(Codebook, TrainTrace)> {
    train_with(data, landmarks, cfg, grid, &TrainOptions::default())
}

pub fn train_with(
    data: &Dataset,
    landmarks: &LandmarkSet,
    cfg: &TrainConfig,
    grid: &NodeGrid,
    opts: &TrainOptions,
) -> Result<(Codebook, TrainTrace)> {
    check_train_inputs(data, landmarks, cfg, grid)?;
    let mut recorder = Recorder::new(cfg, opts)?;
    let mut rng = RngStream::new(cfg.seed);
    let mut codebook = init_codebook(&mut rng, grid.len(), data.dim());

    for t in 0..cfg.t_max {
        match select_phase(&mut rng, cfg.p_th, landmarks.len()) {
            Phase::DataDriven => {
                let n = rng.index(data.len());
                data_step(&mut codebook, data.row(n), t, cfg, grid)?;
            }
            Phase::LandmarkDriven => {
                let m = rng.index(landmarks.len());
                landmark_step(&mut codebook, landmarks.datum(m), landmarks.labels()[m], t, cfg, grid)?;
            }
        }
        recorder.after_step(t, &codebook, data, landmarks, grid)?;
    }
    Ok((codebook, recorder.trace))
}

/// Plain online SOM: data-driven updates only, same RNG protocol.
pub fn train_som(
    data: &Dataset,
    cfg: &TrainConfig,
    grid: &NodeGrid,
    opts: &TrainOptions,
) -> Result<(Codebook, TrainTrace)> {
    let none = LandmarkSet::empty(data.dim());
    let cfg = TrainConfig { p_th: 0.0, ..cfg.clone() };
    check_train_inputs(data, &none, &cfg, grid)?;
    let mut recorder = Recorder::new(&cfg, opts)?;
    let mut rng = RngStream::new(cfg.seed);
    let mut codebook = init_codebook(&mut rng, grid.len(), data.dim());
    for t in 0..cfg.t_max {
        let n = rng.index(data.len());
        data_step(&mut codebook, data.row(n), t, &cfg, grid)?;
        recorder.after_step(t, &codebook, data, &none, grid)?;
    }
    Ok((codebook, recorder.trace))
}
