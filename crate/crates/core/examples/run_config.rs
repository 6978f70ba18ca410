// Drive the benchmark harness from a JSON config, the same way the
// `dqj-bench` binary does.
//
//     cargo run --release --example run_config -- crates/core/configs/rabi_sweep.json

use dqj::bench::{output::to_csv, ExperimentConfig, Runner};

const INLINE: &str = r#"{
  "model": {"kind": "test_qubit", "variant": "rabi", "gamma": 0.05, "omega": 3.141592653589793},
  "method": {"kind": "dqj", "order": 1, "n_grid": 8},
  "T": 1.0,
  "metrics": ["fidelity_vs_lindblad", "observable:pe"],
  "sweep": {"n_grid": [4, 8, 16]}
}"#;

pub fn run_config(cfg: &ExperimentConfig) -> dqj::Result<String> {
    let mut runner = Runner::new();
    let rows = if cfg.sweep.is_some() { runner.sweep(cfg)? } else { runner.run(cfg)? };
    to_csv(&rows)
}

pub fn run_example() -> dqj::Result<()> {
    print!("{}", run_config(&ExperimentConfig::from_json(INLINE)?)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> std::process::ExitCode {
    let result = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref()).and_then(|cfg| run_config(&cfg)).map(|csv| print!("{csv}")),
        None => run_example(),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code() as u8)
        }
    }
}
