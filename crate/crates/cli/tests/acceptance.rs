//! Acceptance checks for the landmark map. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.
//!
//! Run with `cargo test -p lama-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use lama_cli::{run_train, ConfigArgs, TrainArgs};
use lama_core::datasets::FormantSpec;
use lama_core::experiment::{preset, sweep, Problem, SweepOutcome};
use lama_core::metrics::{qed, qel, ste, te};
use lama_core::schedules::{neigh_a, rate_a, rate_b, spread_rho, spread_sigma};
use lama_core::trainer::{data_step, init_codebook, landmark_step, select_phase, train_som, Phase, RngStream};
use lama_core::viz::umatrix;
use lama_core::{train_with, Codebook, Dataset, LandmarkSet, NodeGrid, TrainConfig, TrainOptions};
use ndarray::Array2;

const SEEDS: usize = 20;
const ZOO_PRESETS: [&str; 5] = ["zoo-som", "zoo-lama1", "zoo-lama2", "zoo-lama3", "zoo-lama4"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn zoo_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/zoo.data")
}

fn random_matrix(rng: &mut RngStream, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.uniform())
}

fn same_bits(a: &Codebook, b: &Codebook) -> bool {
    a.weights().shape() == b.weights().shape()
        && a.weights().iter().zip(b.weights()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn som_reduction() -> Outcome {
    let grid = NodeGrid::new(4, 3).unwrap();
    let mut rng = RngStream::new(99);
    let data = Dataset::new(random_matrix(&mut rng, 30, 3), None).unwrap();
    let cfg = TrainConfig {
        seed: 11,
        ..TrainConfig::som(4, 3, 500, 0.3, 0.01, 150.0, 2.0, 0.5, 150.0)
    };
    let every: Vec<usize> = (0..cfg.t_max).collect();
    let opts = TrainOptions {
        checkpoints: Some(every),
        snapshots: true,
    };
    let (lama_cb, lama_trace) = train_with(&data, &LandmarkSet::empty(3), &cfg, &grid, &opts).unwrap();
    let (som_cb, som_trace) = train_som(&data, &cfg, &grid, &opts).unwrap();
    let steps_match = lama_trace.snapshots.len() == cfg.t_max
        && lama_trace
            .snapshots
            .iter()
            .zip(&som_trace.snapshots)
            .all(|((ta, a), (tb, b))| ta == tb && same_bits(a, b));
    outcome(
        steps_match && same_bits(&lama_cb, &som_cb),
        format!("{} steps compared bitwise", lama_trace.snapshots.len()),
    )
}

fn brute_winners(w: &Array2<f64>, x: &[f64]) -> (usize, usize) {
    let mut order: Vec<(f64, usize)> = w
        .rows()
        .into_iter()
        .enumerate()
        .map(|(k, row)| (row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), k))
        .collect();
    order.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (order[0].1, order[1].1)
}

fn metric_oracle() -> Outcome {
    let mut rng = RngStream::new(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (kx, ky) = loop {
            let kx = 1 + rng.index(4);
            let ky = 1 + rng.index(4);
            if kx * ky >= 2 {
                break (kx, ky);
            }
        };
        let k = kx * ky;
        let n = 1 + rng.index(20);
        let d = 1 + rng.index(5);
        let grid = NodeGrid::new(kx, ky).unwrap();
        let w = random_matrix(&mut rng, k, d);
        let x = random_matrix(&mut rng, n, d);
        let m = 1 + rng.index(k.min(4));
        let mut labels: Vec<usize> = Vec::new();
        while labels.len() < m {
            let l = rng.index(k);
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
        let xl = random_matrix(&mut rng, m, d);
        let cb = Codebook::new(w.clone()).unwrap();
        let data = Dataset::new(x.clone(), None).unwrap();
        let lms = LandmarkSet::new(xl.clone(), labels.clone(), k).unwrap();

        let norm = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let lattice = |a: usize, b: usize| {
            let dx = (a % kx) as f64 - (b % kx) as f64;
            let dy = (a / kx) as f64 - (b / kx) as f64;
            (dx * dx + dy * dy).sqrt()
        };
        let mut qed_ref = 0.0;
        let (mut te_ref, mut ste_ref) = (0.0, 0.0);
        for row in x.rows() {
            let xs = row.to_vec();
            let (first, second) = brute_winners(&w, &xs);
            qed_ref += norm(&xs, &w.row(first).to_vec());
            let gap = lattice(first, second);
            if gap > 1.01 {
                te_ref += 1.0;
            }
            if gap > 2f64.sqrt() + 0.01 {
                ste_ref += 1.0;
            }
        }
        let nf = n as f64;
        let qel_ref = (0..m).map(|j| norm(&xl.row(j).to_vec(), &w.row(labels[j]).to_vec())).sum::<f64>() / m as f64;

        let diffs = [
            (qed(&cb, &data).unwrap() - qed_ref / nf).abs(),
            (qel(&cb, &lms).unwrap() - qel_ref).abs(),
            (te(&cb, &data, &grid).unwrap() - te_ref / nf).abs(),
            (ste(&cb, &data, &grid).unwrap() - ste_ref / nf).abs(),
        ];
        worst = diffs.iter().fold(worst, |acc, &v| acc.max(v));
    }
    outcome(worst <= 1e-12, format!("100 instances, max abs deviation {worst:.2e}"))
}

fn schedules() -> Outcome {
    let mut failures = Vec::new();
    for name in ["zoo-lama1", "zoo-lama4", "formant-lama"] {
        let cfg = preset(name).unwrap().train;
        let grid = NodeGrid::new(cfg.kx, cfg.ky).unwrap();
        if rate_a(0, &cfg) != cfg.a_max {
            failures.push(format!("{name}: rate_a(0)"));
        }
        let tc = cfg.t_center as usize;
        if tc as f64 != cfg.t_center || rate_b(tc, &cfg) != cfg.b_max {
            failures.push(format!("{name}: rate_b(t_center)"));
        }
        for t in [0, 1, 777, cfg.t_max - 1] {
            for k_d in [0, grid.len() / 2, grid.len() - 1] {
                if neigh_a(k_d, k_d, t, &cfg, &grid) != rate_a(t, &cfg) {
                    failures.push(format!("{name}: neigh_a at t={t}"));
                }
            }
        }
        let stride = (cfg.t_max / 1000).max(1);
        let steps: Vec<usize> = (0..1000).map(|i| i * stride).collect();
        for pair in steps.windows(2) {
            let (s, t) = (pair[0], pair[1]);
            if rate_a(t, &cfg) >= rate_a(s, &cfg)
                || spread_sigma(t, &cfg) >= spread_sigma(s, &cfg)
                || spread_rho(t, &cfg) >= spread_rho(s, &cfg)
            {
                failures.push(format!("{name}: not decreasing between {s} and {t}"));
                break;
            }
        }
    }
    if failures.is_empty() {
        outcome(true, "boundary values exact, 1000-step monotonicity on 3 presets")
    } else {
        outcome(false, failures.join("; "))
    }
}

fn boundedness() -> Outcome {
    let cfg = preset("zoo-lama4").unwrap();
    let problem = Problem::load(&cfg, Some(&zoo_path()), &FormantSpec::default()).unwrap();
    let tc = &cfg.train;
    let (data, lms, grid) = (&problem.data, &problem.landmarks, &problem.grid);

    // Step-by-step replay of the training loop, inspecting every update.
    let mut rng = RngStream::new(tc.seed);
    let mut cb = init_codebook(&mut rng, grid.len(), data.dim());
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    let mut inside = true;
    for t in 0..tc.t_max {
        match select_phase(&mut rng, tc.p_th, lms.len()) {
            Phase::DataDriven => {
                let n = rng.index(data.len());
                data_step(&mut cb, data.row(n), t, tc, grid).unwrap();
            }
            Phase::LandmarkDriven => {
                let m = rng.index(lms.len());
                landmark_step(&mut cb, lms.datum(m), lms.labels()[m], t, tc, grid).unwrap();
            }
        }
        for &v in cb.weights() {
            worst = (worst.0.min(v), worst.1.max(v));
            inside &= (0.0..=1.0).contains(&v);
        }
    }
    let (trained, _) = problem.train(tc, &TrainOptions::default()).unwrap();
    let replay_matches = same_bits(&cb, &trained);
    outcome(
        inside && replay_matches,
        format!(
            "{} steps, entries within [{:.6}, {:.6}], replay matches trainer: {replay_matches}",
            tc.t_max, worst.0, worst.1
        ),
    )
}

struct ZooSweeps {
    outcomes: Vec<(&'static str, SweepOutcome)>,
    seconds: f64,
}

fn zoo_sweeps() -> ZooSweeps {
    let start = Instant::now();
    let outcomes = ZOO_PRESETS
        .iter()
        .map(|&name| {
            let cfg = preset(name).unwrap();
            let problem = Problem::load(&cfg, Some(&zoo_path()), &FormantSpec::default()).unwrap();
            (name, sweep(&problem, &cfg.train, SEEDS, 0, 1).unwrap())
        })
        .collect();
    ZooSweeps {
        outcomes,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn descending_qed(z: &ZooSweeps) -> Outcome {
    let mut pass = z.seconds <= 300.0;
    let mut parts = Vec::new();
    for (name, o) in &z.outcomes {
        let q = &o.report.mean_qed;
        let worst_rise = q.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        pass &= worst_rise <= 0.01;
        parts.push(format!("{name} max rise {worst_rise:+.4}"));
    }
    outcome(pass, format!("{}; {:.0} s", parts.join(", "), z.seconds))
}

fn qel_level(z: &ZooSweeps) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, o) in &z.outcomes {
        if !["zoo-lama1", "zoo-lama3", "zoo-lama4"].contains(name) {
            continue;
        }
        let last = *o.report.mean_qel.as_ref().unwrap().last().unwrap();
        pass &= last < 3.12;
        parts.push(format!("{name} {last:.4}"));
    }
    outcome(pass, format!("final mean QEL: {}", parts.join(", ")))
}

fn som_lowest(z: &ZooSweeps) -> Outcome {
    let finals: Vec<(&str, f64)> = z
        .outcomes
        .iter()
        .map(|(name, o)| (*name, *o.report.mean_qed.last().unwrap()))
        .collect();
    let som = finals[0].1;
    let pass = finals[1..].iter().all(|(_, q)| som <= q + 0.02);
    let cells: Vec<String> = finals.iter().map(|(n, q)| format!("{n} {q:.4}")).collect();
    outcome(pass, format!("final mean QED: {}", cells.join(", ")))
}

fn formant_sweep(name: &str) -> (Problem, SweepOutcome) {
    let cfg = preset(name).unwrap();
    let problem = Problem::load(&cfg, None, &FormantSpec::default()).unwrap();
    let o = sweep(&problem, &cfg.train, SEEDS, 0, 1).unwrap();
    (problem, o)
}

fn formant_ste(o: &SweepOutcome) -> Outcome {
    let last = *o.report.mean_ste.last().unwrap();
    outcome(last < 0.08, format!("formant-som final mean STE {last:.4}"))
}

fn landmark_placement(z: &ZooSweeps, formant: &(Problem, SweepOutcome)) -> Outcome {
    let (_, lama1) = z.outcomes.iter().find(|(n, _)| *n == "zoo-lama1").unwrap();
    let cfg = preset("zoo-lama1").unwrap();
    let zoo = Problem::load(&cfg, Some(&zoo_path()), &FormantSpec::default()).unwrap();
    let x75 = zoo.data.row(75);
    let zoo_hits = lama1
        .runs
        .iter()
        .filter(|r| zoo.grid.chebyshev(lama_core::winner(&r.codebook, x75).unwrap(), 312) <= 3)
        .count();

    let (fp, fo) = formant;
    let lms = &fp.landmarks;
    let mut per_vowel = vec![0usize; lms.len()];
    let mut all_hits = 0;
    for run in &fo.runs {
        let mut all = true;
        for (m, hits) in per_vowel.iter_mut().enumerate() {
            let k = lama_core::winner(&run.codebook, lms.datum(m)).unwrap();
            if fp.grid.chebyshev(k, lms.labels()[m]) <= 2 {
                *hits += 1;
            } else {
                all = false;
            }
        }
        all_hits += usize::from(all);
    }
    let need = (SEEDS * 4).div_ceil(5);
    let vowels: Vec<String> = fp
        .landmark_names
        .iter()
        .zip(&per_vowel)
        .map(|(n, h)| format!("{n} {h}/{SEEDS}"))
        .collect();
    outcome(
        zoo_hits >= need && all_hits >= need,
        format!(
            "sealion near 312 in {zoo_hits}/{SEEDS}; all vowels placed in {all_hits}/{SEEDS} ({})",
            vowels.join(", ")
        ),
    )
}

fn ste_le_te(z: &ZooSweeps, formant: &[&SweepOutcome]) -> Outcome {
    let mut maps = 0;
    let mut violations = 0;
    let all = z.outcomes.iter().map(|(_, o)| o).chain(formant.iter().copied());
    for o in all {
        for run in &o.runs {
            for c in &run.trace.checkpoints {
                maps += 1;
                if c.report.ste > c.report.te {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{maps} evaluated maps, {violations} violations"))
}

fn umatrix_check() -> Outcome {
    let grid = NodeGrid::new(2, 2).unwrap();
    let mut w = Array2::zeros((4, 3));
    w[[0, 0]] = 1.0;
    let u = umatrix(&Codebook::new(w).unwrap(), &grid).unwrap();
    let hand = u.at(0, 0) == 2.0 && u.at(1, 0) == 1.0 && u.at(0, 1) == 1.0 && u.at(1, 1) == 0.0;

    let mut rng = RngStream::new(5);
    let mut worst = 0.0f64;
    let grid = NodeGrid::new(5, 5).unwrap();
    for _ in 0..50 {
        let d = 1 + rng.index(6);
        let w = random_matrix(&mut rng, 25, d);
        let u = umatrix(&Codebook::new(w.clone()).unwrap(), &grid).unwrap();
        for a in 0..25usize {
            let mut sum = 0.0;
            for b in 0..25usize {
                let (dx, dy) = ((a % 5).abs_diff(b % 5), (a / 5).abs_diff(b / 5));
                if dx + dy == 1 {
                    sum += w.row(a).iter().zip(w.row(b)).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
                }
            }
            worst = worst.max((u.at(a % 5, a / 5) - sum).abs());
        }
    }
    outcome(
        hand && worst <= 1e-12,
        format!("2x2 hand values exact: {hand}; 50 random 5x5, max deviation {worst:.2e}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        run_train(&TrainArgs {
            source: ConfigArgs {
                preset: Some("zoo-lama2".into()),
                config: None,
                data: Some(zoo_path()),
            },
            seed: Some(7),
            out: out.clone(),
            snapshots: false,
        })
        .unwrap();
        out
    };
    let (a, b) = (run("a"), run("b"));
    let mut same = true;
    for f in ["trace.csv", "codebook.csv"] {
        same &= std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap();
    }
    outcome(same, "trace.csv and codebook.csv compared byte for byte")
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    };

    report(1, "SOM reduction", som_reduction());
    report(2, "metric oracle", metric_oracle());
    report(3, "schedule boundaries", schedules());
    report(4, "codebook boundedness", boundedness());

    let zoo = zoo_sweeps();
    report(5, "zoo descending QED", descending_qed(&zoo));
    report(6, "zoo QEL level", qel_level(&zoo));
    report(7, "zoo SOM lowest QED", som_lowest(&zoo));

    let (_, formant_som) = formant_sweep("formant-som");
    let formant_lama = formant_sweep("formant-lama");
    report(8, "formant SOM STE", formant_ste(&formant_som));
    report(9, "landmark placement", landmark_placement(&zoo, &formant_lama));
    report(10, "STE <= TE", ste_le_te(&zoo, &[&formant_som, &formant_lama.1]));
    report(11, "U-matrix", umatrix_check());
    report(12, "determinism", determinism());

    if failed == 0 {
        println!("all 12 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
