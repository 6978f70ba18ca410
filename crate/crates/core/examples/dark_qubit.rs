// Amplitude damping with H = 0: after one jump the qubit sits in the dark
// ground state, so first-order DQJ and the stochastic baseline are exact.
//
//     cargo run --release --example dark_qubit

use dqj::dqj::{default_record_times, run_dqj};
use dqj::lindblad::{integrate_master, LindbladSystem};
use dqj::metrics::infidelity;
use dqj::models::{build_test_qubit, TestQubit};
use dqj::propagation::PropagationConfig;
use dqj::sqj::{run_sqj, SqjConfig};
use dqj::DensityMatrix;

pub fn run_example() -> dqj::Result<()> {
    let t = 1.0;
    let n_grid = 8;
    let record = default_record_times(t, n_grid);
    let prop = PropagationConfig::for_grid(t, n_grid, 20)?;

    for gamma in [0.01, 0.1, 0.3] {
        let m = build_test_qubit(TestQubit::Dark, gamma, 0.0);
        let sys = LindbladSystem::new(m.hamiltonian.clone(), m.jumps.clone(), DensityMatrix::pure(&m.psi0)?)?;
        let exact = integrate_master(&sys, t, &record, 1e-3)?;

        let dqj = run_dqj(&m.hamiltonian, &m.jumps, &m.psi0, t, 1, n_grid, &prop, &record)?.assemble()?;
        let sqj = run_sqj(&m.hamiltonian, &m.jumps, &m.psi0, t, &SqjConfig::new(10, 7)?, &prop, &record)?.assemble()?;

        let worst = |series: &dqj::DensityMatrixSeries| -> dqj::Result<f64> {
            let mut w: f64 = 0.0;
            for ((_, a), (_, b)) in series.iter().zip(exact.iter()) {
                w = w.max(infidelity(b, a)?);
            }
            Ok(w)
        };
        // sampled jump times only make the ensemble exact once every trajectory has jumped
        let sqj_final = infidelity(exact.last().unwrap(), sqj.last().unwrap())?;
        println!(
            "gamma {gamma:<5} p_e(T) {:.6}  dqj max infidelity {:.1e}  sqj infidelity at T {sqj_final:.1e}",
            exact.last().unwrap().matrix()[(0, 0)].re,
            worst(&dqj)?,
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> std::process::ExitCode {
    match run_example() {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code() as u8)
        }
    }
}
