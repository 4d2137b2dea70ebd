use std::fs;
use std::path::PathBuf;

use lama_cli::{list_presets, run_export, run_sweep, run_train, ConfigArgs, ExportArgs, SweepArgs, TrainArgs};

fn preset_source(name: &str) -> ConfigArgs {
    ConfigArgs {
        preset: Some(name.into()),
        config: None,
        data: None,
    }
}

fn train_args(source: ConfigArgs, out: PathBuf) -> TrainArgs {
    TrainArgs {
        source,
        seed: Some(3),
        out,
        snapshots: false,
    }
}

fn csv_rows(path: &PathBuf) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn train_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = train_args(preset_source("formant-lama"), dir.path().into());
    args.snapshots = true;
    let summary = run_train(&args).unwrap();
    for name in [
        "trace.csv",
        "codebook.csv",
        "umatrix.csv",
        "umatrix.svg",
        "overlay.svg",
        "pca.csv",
        "config.toml",
    ] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    assert_eq!(fs::read_dir(dir.path().join("snapshots")).unwrap().count(), 7);
    assert!(summary.final_report.qel.is_some());

    let trace = csv_rows(&dir.path().join("trace.csv"));
    assert!(trace.iter().any(|r| &r[0] == "qel"));
    assert!(trace.iter().all(|r| &r[3] == "3"));

    let codebook = csv_rows(&dir.path().join("codebook.csv"));
    assert_eq!(codebook.len(), 100);
    assert_eq!(codebook[0].len(), 2);
    assert!(fs::read_to_string(dir.path().join("umatrix.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        run_train(&train_args(preset_source("formant-som"), dir.path().join(sub))).unwrap();
    }
    for name in ["trace.csv", "codebook.csv", "pca.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
}

#[test]
fn single_run_sweep_matches_train() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_sweep(&SweepArgs {
        source: preset_source("formant-lama"),
        runs: 1,
        seed: 3,
        jobs: 1,
        out: dir.path().join("sweep"),
    })
    .unwrap();
    let summary = run_train(&train_args(preset_source("formant-lama"), dir.path().join("train"))).unwrap();

    assert_eq!(report.steps, vec![0, 9999, 19999, 29999, 39999, 49999, 59999]);
    assert_eq!(report.seeds, vec![3]);
    assert_eq!(*report.mean_qed.last().unwrap(), summary.final_report.qed);
    assert_eq!(report.mean_qel.as_ref().unwrap().last().copied(), summary.final_report.qel);
    let means = csv_rows(&dir.path().join("sweep/sweep_means.csv"));
    assert_eq!(means.len(), 4 * 7);
    assert!(dir.path().join("sweep/sweep_ste.svg").is_file());
}

#[test]
fn export_round_trips_through_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let files = run_export(&ExportArgs {
        source: preset_source("formant-lama"),
        out: dir.path().into(),
    })
    .unwrap();
    assert_eq!(files.len(), 2);
    assert_eq!(csv_rows(&dir.path().join("formant.csv")).len(), 200);

    let from_file = ConfigArgs {
        preset: None,
        config: Some(dir.path().join("config.toml")),
        data: None,
    };
    let a = run_train(&train_args(from_file, dir.path().join("a"))).unwrap();
    let b = run_train(&train_args(preset_source("formant-lama"), dir.path().join("b"))).unwrap();
    assert_eq!(a.final_report, b.final_report);
}

#[test]
fn presets_are_listed() {
    let text = list_presets();
    for name in ["zoo-som", "zoo-lama1", "zoo-lama4", "formant-som", "formant-lama"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    let text = lama_core::experiment::preset("formant-lama")
        .unwrap()
        .to_text()
        .lines()
        .map(|l| if l.starts_with("p_th") { "p_th = 1.0" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(&config, text).unwrap();
    let source = ConfigArgs {
        preset: None,
        config: Some(config),
        data: None,
    };
    let err = run_train(&train_args(source, dir.path().join("out"))).unwrap_err();
    assert!(format!("{err:#}").contains("p_th"), "{err:#}");

    let zoo = ConfigArgs {
        preset: Some("zoo-lama1".into()),
        config: None,
        data: Some(dir.path().join("missing.data")),
    };
    assert!(run_train(&train_args(zoo, dir.path().join("out"))).is_err());

    let err = run_train(&train_args(preset_source("nope"), dir.path().join("out"))).unwrap_err();
    assert!(format!("{err:#}").contains("zoo-som"));
}
