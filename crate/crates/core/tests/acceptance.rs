//! One line per acceptance criterion: `[PASS]` or `[FAIL]` with the measured values.
//! Run with `cargo test --release --test acceptance`; pass criterion numbers to run a subset.

use std::process::Command;

use dqj::bench::{parse_csv, ExperimentConfig, Runner};
use dqj::dqj::{default_record_times, error_bound_order1, run_dqj, trajectory_specs, ErrorBoundInputs};
use dqj::grid::{build_grid, count_trajectories, generated_trajectory_count};
use dqj::lindblad::{integrate_master, LindbladSystem};
use dqj::metrics::{fidelity, fit_loglog_slope};
use dqj::models::{build_test_qubit, ModelInstance, TestQubit};
use dqj::propagation::PropagationConfig;
use dqj::sqj::{run_sqj, SqjConfig};
use dqj::{DensityMatrix, DensityMatrixSeries};

const PI: f64 = std::f64::consts::PI;

fn report(id: u32, pass: bool, detail: &str) -> bool {
    println!("[{}] criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn note(id: u32, detail: &str) {
    println!("       criterion {id} diagnostic: {detail}");
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn master(m: &ModelInstance, t: f64, h: f64) -> DensityMatrix {
    let sys = LindbladSystem::new(m.hamiltonian.clone(), m.jumps.clone(), DensityMatrix::pure(&m.psi0).unwrap()).unwrap();
    integrate_master(&sys, t, &[t], h).unwrap().last().unwrap().clone()
}

fn dqj_final(m: &ModelInstance, t: f64, order: usize, n: usize) -> DensityMatrix {
    let prop = PropagationConfig::for_grid(t, n, 20).unwrap();
    let run = run_dqj(&m.hamiltonian, &m.jumps, &m.psi0, t, order, n, &prop, &[t]).unwrap();
    run.assemble().unwrap().last().unwrap().clone()
}

fn bench(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn criterion_01_trajectory_counts() -> bool {
    let mut mismatches = Vec::new();
    for order in 1..=3 {
        for n in 1..=64u64 {
            for j in 1..=5u64 {
                let closed = count_trajectories(order, n, j).unwrap();
                let generated = generated_trajectory_count(order, n, j).unwrap();
                if closed != generated {
                    mismatches.push((order, n, j, closed, generated));
                }
            }
        }
    }

    // enumerated specs and actual runs agree with the generated count
    let m = build_test_qubit(TestQubit::Rabi, 0.1, 1.0);
    let two = dqj::models::build_tfim(2, 1.0, 0.5, 0.1).unwrap();
    let mut enumerated_ok = true;
    for order in 1..=3 {
        for n in [1usize, 2, 3, 5, 8] {
            for j in 1..=5usize {
                let specs = trajectory_specs(order, 1.0, n, j).unwrap().len() as u64 + 1;
                enumerated_ok &= specs == generated_trajectory_count(order, n as u64, j as u64).unwrap();
            }
            for model in [&m, &two] {
                let prop = PropagationConfig::for_grid(1.0, n, 4).unwrap();
                let run = run_dqj(&model.hamiltonian, &model.jumps, &model.psi0, 1.0, order, n, &prop, &[1.0]).unwrap();
                let j = model.jumps.len() as u64;
                enumerated_ok &= run.trajectory_count() as u64 == generated_trajectory_count(order, n as u64, j).unwrap();
            }
        }
    }

    let cli = Command::new(env!("CARGO_BIN_EXE_dqj-bench")).arg("counts").output().unwrap();
    let table = String::from_utf8(cli.stdout).unwrap();
    let cli_ok = cli.status.success()
        && table.lines().skip(1).all(|line| {
            let f: Vec<u64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            f[3] == count_trajectories(f[0] as usize, f[1], f[2]).unwrap()
                && f[4] == generated_trajectory_count(f[0] as usize, f[1], f[2]).unwrap()
        })
        && table.lines().count() == 1 + 3 * 64 * 5;

    let first = mismatches.first().map(|m| format!("{m:?}")).unwrap_or_default();
    let pass = report(
        1,
        mismatches.is_empty() && enumerated_ok && cli_ok,
        &format!(
            "{} of 960 (order, N_grid, N_J) cases differ between closed form and generated count \
             (first (order, N, J, closed, generated) = {first}); runs match generated count: {enumerated_ok}; counts CLI consistent: {cli_ok}",
            mismatches.len()
        ),
    );
    let orders: Vec<usize> = mismatches.iter().map(|m| m.0).collect();
    note(1, &format!("mismatching orders: {:?}", orders.iter().copied().collect::<std::collections::BTreeSet<_>>()));
    pass
}

fn criterion_02_grid_quadrature_closure() -> bool {
    let mut worst: f64 = 0.0;
    for order in 1..=3 {
        let exact = [1.0, 0.5, 1.0 / 6.0][order - 1] * 1.7f64.powi(order as i32);
        for n in 1..=64 {
            let grid = build_grid(order, 1.7, n).unwrap();
            worst = worst.max((grid.weight_sum() - exact).abs() / exact);
        }
    }
    report(2, worst <= 1e-12, &format!("max relative |sum w - T^n/n!| = {worst:.3e} (tol 1e-12)"))
}

fn criterion_03_dark_qubit_exact() -> bool {
    let mut worst_dqj: f64 = 0.0;
    let mut worst_sqj: f64 = 0.0;
    for gamma in [0.01, 0.1, 0.3] {
        let m = build_test_qubit(TestQubit::Dark, gamma, 0.0);
        let reference = master(&m, 1.0, 1e-3);
        for n in [4, 16, 64] {
            let rho = dqj_final(&m, 1.0, 1, n);
            worst_dqj = worst_dqj.max(1.0 - fidelity(&reference, &rho).unwrap());
        }
        let exact = DensityMatrix::from_matrix(nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            dqj::C64::new((-gamma).exp(), 0.0),
            dqj::C64::new(1.0 - (-gamma).exp(), 0.0),
        ])));
        for seed in [0, 1, 17, 12345] {
            let prop = PropagationConfig::new(0.01).unwrap();
            let run = run_sqj(&m.hamiltonian, &m.jumps, &m.psi0, 1.0, &SqjConfig::new(25, seed).unwrap(), &prop, &[1.0]).unwrap();
            let rho = run.assemble().unwrap().last().unwrap().clone();
            worst_sqj = worst_sqj.max(1.0 - fidelity(&exact, &rho).unwrap());
        }
    }
    let pass = worst_dqj <= 1e-9 && worst_sqj <= 1e-9;
    report(
        3,
        pass,
        &format!("max DQJ-1 infidelity vs master equation {worst_dqj:.3e}, max SQJ infidelity vs analytic {worst_sqj:.3e} (tol 1e-9)")
    )
}

fn rabi_infidelities(m: &ModelInstance, order: usize, grids: &[usize], reference: &DensityMatrix) -> (Vec<f64>, Vec<f64>) {
    let xs = grids.iter().map(|&n| count_trajectories(order, n as u64, 1).unwrap() as f64).collect();
    let ys = grids.iter().map(|&n| 1.0 - fidelity(reference, &dqj_final(m, 1.0, order, n)).unwrap()).collect();
    (xs, ys)
}

fn criterion_04_asymptotic_exponent() -> bool {
    let grids = [8, 16, 32, 64, 128];
    let m1 = build_test_qubit(TestQubit::Rabi, 0.05, PI);
    let m2 = build_test_qubit(TestQubit::Rabi, 0.2, PI);

    let (x1, y1) = rabi_infidelities(&m1, 1, &grids, &master(&m1, 1.0, 1e-4));
    let (x2, y2) = rabi_infidelities(&m2, 2, &grids, &master(&m2, 1.0, 1e-4));
    let s1 = fit_loglog_slope(&x1, &y1, 0..grids.len()).unwrap().slope;
    let s2 = fit_loglog_slope(&x2, &y2, 0..grids.len()).unwrap().slope;
    let pass = (s1 + 4.0).abs() <= 0.5 && (s2 + 2.0).abs() <= 0.4;
    let ok = report(
        4,
        pass,
        &format!(
            "vs master equation: order 1 slope {s1:.3} (target -4.0 +/- 0.5; infidelities {}), order 2 slope {s2:.3} (target -2.0 +/- 0.4; infidelities {})",
            sci(&y1),
            sci(&y2)
        ),
    );

    // same-order references isolate the grid error from the truncated jump orders
    let (_, c1) = rabi_infidelities(&m1, 1, &grids, &dqj_final(&m1, 1.0, 1, 4096));
    let (_, c2) = rabi_infidelities(&m2, 2, &grids[..4], &dqj_final(&m2, 1.0, 2, 512));
    let cs1 = fit_loglog_slope(&x1, &c1, 0..grids.len()).unwrap().slope;
    let cs2 = fit_loglog_slope(&x2[..4], &c2, 0..3).unwrap().slope;
    note(
        4,
        &format!(
            "vs converged same-order DQJ: order 1 slope {cs1:.3} ({}), order 2 slope {cs2:.3} over N_grid 8..32 ({})",
            sci(&c1),
            sci(&c2)
        ),
    );
    ok
}

fn criterion_05_error_bound() -> bool {
    let m = build_test_qubit(TestQubit::Rabi, 0.05, PI);
    let reference = master(&m, 1.0, 1e-4);
    let converged = dqj_final(&m, 1.0, 1, 4096);
    let mut pass = true;
    let mut lines = Vec::new();
    let mut diag = Vec::new();
    for n in [8, 16, 32, 64, 128] {
        let prop = PropagationConfig::for_grid(1.0, n, 20).unwrap();
        let run = run_dqj(&m.hamiltonian, &m.jumps, &m.psi0, 1.0, 1, n, &prop, &[1.0]).unwrap();
        let rho = run.assemble().unwrap().last().unwrap().clone();
        let bound = error_bound_order1(&ErrorBoundInputs::from_model(&m.hamiltonian, &m.jumps, run.p0(), 1.0, n)).unwrap();
        let dist = rho.distance_spectral(&reference);
        pass &= dist <= bound;
        lines.push(format!("N={n}: {dist:.3e} <= {bound:.3e}"));
        diag.push(format!("N={n}: {:.3e}", rho.distance_spectral(&converged)));
    }
    let ok = report(5, pass, &format!("spectral error vs master equation against bound: {}", lines.join("; ")));
    note(5, &format!("spectral error vs converged DQJ-1 (N_grid 4096): {}", diag.join("; ")));
    ok
}

fn criterion_06_tfim_plateau() -> bool {
    let mut runner = Runner::new();
    let mut values = Vec::new();
    for n in [16, 32, 64] {
        let cfg = bench(&format!(
            r#"{{"model": {{"kind": "tfim", "n_qubits": 5, "g": {g}, "coupling": {j}, "gamma": 0.03}},
                "method": {{"kind": "dqj", "order": 2, "n_grid": {n}}}, "T": 1.0}}"#,
            g = PI * PI,
            j = PI / 2.0
        ));
        values.push(runner.run(&cfg).unwrap()[0].value);
    }
    let plateau = *values.last().unwrap();
    let pass = (1e-8..=3.16e-7).contains(&plateau);
    report(
        6,
        pass,
        &format!("5-qubit TFIM DQJ-2 infidelity at N_grid 16/32/64: {}; plateau {plateau:.3e} in [1e-8, 3.16e-7]", sci(&values))
    )
}

fn criterion_07_dqj_vs_sqj() -> bool {
    let mut runner = Runner::new();
    let model = format!(r#"{{"kind": "tfim", "n_qubits": 3, "g": {}, "coupling": {}, "gamma": 0.03}}"#, PI * PI, PI / 2.0);
    let (mut ntraj, mut d, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for n in [16, 32, 64] {
        let dqj = bench(&format!(r#"{{"model": {model}, "method": {{"kind": "dqj", "order": 2, "n_grid": {n}}}, "T": 1.0}}"#));
        let row = &runner.run(&dqj).unwrap()[0];
        let matched = row.n_traj - 1;
        let sqj = bench(&format!(
            r#"{{"model": {model}, "method": {{"kind": "sqj", "n_traj": {matched}, "seed": 1, "repeats": 16, "n_grid": 32}}, "T": 1.0}}"#
        ));
        ntraj.push(row.n_traj as f64);
        d.push(row.value);
        s.push(runner.run(&sqj).unwrap()[0].value);
    }
    let ratios: Vec<f64> = s.iter().zip(&d).map(|(s, d)| s / d).collect();
    let slope = fit_loglog_slope(&ntraj, &s, 0..ntraj.len()).unwrap().slope;
    let pass = ratios.iter().all(|&r| r >= 10.0) && (slope + 1.0).abs() <= 0.3;
    report(
        7,
        pass,
        &format!(
            "3-qubit TFIM at N_traj {:?}: DQJ-2 {}, SQJ mean {}; ratios {} (>= 10); SQJ slope {slope:.3} (target -1.0 +/- 0.3)",
            ntraj,
            sci(&d),
            sci(&s),
            ratios.iter().map(|r| format!("{r:.0}")).collect::<Vec<_>>().join(", ")
        )
    )
}

fn criterion_08_kerr_plateau() -> bool {
    let mut runner = Runner::new();
    let mut values = Vec::new();
    for n in [32, 64, 128, 256] {
        let cfg = bench(&format!(
            r#"{{"model": {{"kind": "kerr", "n_fock": 6, "omega0": {w0}, "omega_k": {wk}, "gamma": 0.32, "alpha": [{a}, 0.0]}},
                "method": {{"kind": "dqj", "order": 1, "n_grid": {n}}}, "T": 1.0,
                "record": {{"uniform": 500}}, "substep": {{"fixed": 1e-4}}, "metrics": ["spectrum:omega0"]}}"#,
            w0 = 24.0 * PI,
            wk = 6.0 * PI,
            a = 1.5 / 2f64.sqrt()
        ));
        values.push(runner.run(&cfg).unwrap()[0].value);
    }
    let plateau = values.iter().sum::<f64>() / values.len() as f64;
    let target = 4.1e-5;
    let pass = plateau >= target / 3.0 && plateau <= target * 3.0;
    let ok = report(
        8,
        pass,
        &format!(
            "Kerr DQJ-1 |S(w0)| error at N_grid 32..256: {}; plateau {plateau:.3e} vs 4.1e-5 (factor 3 band [{:.3e}, {:.3e}])",
            sci(&values),
            target / 3.0,
            target * 3.0
        ),
    );
    note(8, &format!("plateau / target = {:.2}; the plateau scales as gamma^2 for L = sqrt(gamma) a", plateau / target));
    ok
}

fn criterion_09_sqj_statistics() -> bool {
    let gamma = 1.0;
    let m = build_test_qubit(TestQubit::Dark, gamma, 0.0);
    let prop = PropagationConfig::new(0.02).unwrap();
    let cfg = SqjConfig::new(100_000, 9).unwrap();
    let run = run_sqj(&m.hamiltonian, &m.jumps, &m.psi0, 1.0, &cfg, &prop, &[1.0]).unwrap();
    let mut taus: Vec<f64> = run.trajectories.iter().map(|t| t.jump_events[0].0).collect();
    taus.sort_by(f64::total_cmp);
    let n = taus.len() as f64;
    let norm = 1.0 - (-gamma).exp();
    let ks = taus
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = (1.0 - (-gamma * t).exp()) / norm;
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);

    let rabi = build_test_qubit(TestQubit::Rabi, 0.3, 3.0);
    let rec = default_record_times(1.0, 8);
    let series = |seed| -> DensityMatrixSeries {
        let cfg = SqjConfig::new(200, seed).unwrap();
        run_sqj(&rabi.hamiltonian, &rabi.jumps, &rabi.psi0, 1.0, &cfg, &prop, &rec).unwrap().assemble().unwrap()
    };
    let (a, b) = (series(4), series(4));
    let identical = a.states.iter().zip(&b.states).all(|(x, y)| {
        x.matrix().iter().zip(y.matrix().iter()).all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits())
    });
    report(9, ks < 0.01 && identical, &format!("KS statistic {ks:.4e} at 1e5 samples (< 0.01); same-seed runs bit-identical: {identical}"))
}

fn criterion_10_reproducible_csv() -> bool {
    let dir = std::env::temp_dir().join(format!("dqj-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let configs = [
        r#"{"model": {"kind": "tfim", "n_qubits": 2, "g": 1.0, "coupling": 0.5, "gamma": 0.1},
            "method": {"kind": "sqj", "n_traj": 50, "seed": 7, "repeats": 3, "n_grid": 16}, "T": 1.0,
            "metrics": ["fidelity_vs_lindblad", "observable:z1"]}"#,
        r#"{"model": {"kind": "kerr", "n_fock": 4, "omega0": 3.0, "omega_k": 0.5, "gamma": 0.2, "alpha": [0.5, 0.1]},
            "method": {"kind": "dqj", "order": 3, "n_grid": 6}, "T": 1.0, "record": "grid",
            "metrics": ["fidelity_vs_lindblad", "observable:n", "spectrum:omega0"], "sweep": {"n_grid": [4, 6]}}"#,
    ];
    let mut identical = true;
    let mut rows = 0;
    for (i, text) in configs.iter().enumerate() {
        let path = dir.join(format!("cfg{i}.json"));
        std::fs::write(&path, text).unwrap();
        let sub = if text.contains("sweep") { "sweep" } else { "run" };
        let outputs: Vec<_> = (0..2)
            .map(|_| {
                let out = Command::new(env!("CARGO_BIN_EXE_dqj-bench")).args([sub, "--config"]).arg(&path).output().unwrap();
                assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
                parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap()
            })
            .collect();
        rows += outputs[0].len();
        identical &= outputs[0].len() == outputs[1].len()
            && outputs[0].iter().zip(&outputs[1]).all(|(a, b)| {
                let strip = |r: &dqj::bench::ResultRow| dqj::bench::ResultRow { wallclock_s: 0.0, ..r.clone() };
                strip(a) == strip(b) && a.value.to_bits() == b.value.to_bits()
            });
    }
    std::fs::remove_dir_all(&dir).ok();
    report(10, identical && rows > 0, &format!("{rows} CSV rows from an SQJ run and a DQJ sweep identical across reruns (wallclock excluded): {identical}"))
}

fn main() {
    let criteria: [(u32, fn() -> bool); 10] = [
        (1, criterion_01_trajectory_counts),
        (2, criterion_02_grid_quadrature_closure),
        (3, criterion_03_dark_qubit_exact),
        (4, criterion_04_asymptotic_exponent),
        (5, criterion_05_error_bound),
        (6, criterion_06_tfim_plateau),
        (7, criterion_07_dqj_vs_sqj),
        (8, criterion_08_kerr_plateau),
        (9, criterion_09_sqj_statistics),
        (10, criterion_10_reproducible_csv),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let pass = std::panic::catch_unwind(check).unwrap_or_else(|_| report(id, false, "panicked"));
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
