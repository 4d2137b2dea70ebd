use std::process::ExitCode;

use clap::Parser;
use lama_cli::{format_report, list_presets, run_export, run_sweep, run_train, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => run_train(args).map(|s| {
            println!("final {}", format_report(&s.final_report));
            for f in &s.files {
                println!("wrote {}", f.display());
            }
        }),
        Command::Sweep(args) => run_sweep(args).map(|r| {
            println!("{} runs, seeds {}..={}", r.runs, r.seeds[0], r.seeds[r.runs - 1]);
            for (metric, values) in r.series() {
                let cells: Vec<String> = r.steps.iter().zip(values).map(|(t, v)| format!("{t}:{v:.4}")).collect();
                println!("{metric:>4} {}", cells.join(" "));
            }
        }),
        Command::Export(args) => run_export(args).map(|files| {
            for f in files {
                println!("wrote {}", f.display());
            }
        }),
        Command::Presets => {
            print!("{}", list_presets());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
