macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(dark_qubit, "dark_qubit.rs");
example!(rabi_scaling, "rabi_scaling.rs");
example!(tfim_plateau, "tfim_plateau.rs");
example!(kerr_spectrum, "kerr_spectrum.rs");
example!(sqj_vs_dqj, "sqj_vs_dqj.rs");
example!(trajectory_counts, "trajectory_counts.rs");
example!(run_config, "run_config.rs");

#[test]
fn dark_qubit_runs() {
    dark_qubit::run_example().unwrap();
}

#[test]
fn rabi_scaling_runs() {
    rabi_scaling::run_example().unwrap();
}

#[test]
fn tfim_plateau_runs() {
    tfim_plateau::run_example().unwrap();
}

#[test]
fn kerr_spectrum_runs() {
    kerr_spectrum::run_example().unwrap();
}

#[test]
fn sqj_vs_dqj_runs() {
    sqj_vs_dqj::run_example().unwrap();
}

#[test]
fn trajectory_counts_runs() {
    trajectory_counts::run_example().unwrap();
}

#[test]
fn run_config_runs() {
    run_config::run_example().unwrap();
}

#[test]
fn shipped_configs_validate() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            dqj::bench::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen > 0);
}
