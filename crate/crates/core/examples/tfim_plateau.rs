// Damped transverse-field Ising chain: DQJ at orders 1 and 2 against the
// master equation. The infidelity settles on a plateau set by the neglected
// higher jump orders.
//
//     cargo run --release --example tfim_plateau -- 5

use std::f64::consts::PI;

use dqj::dqj::{poisson_plateau, run_dqj};
use dqj::lindblad::{integrate_master, LindbladSystem};
use dqj::metrics::infidelity;
use dqj::models::build_tfim;
use dqj::propagation::PropagationConfig;
use dqj::DensityMatrix;

pub fn plateau(n_qubits: usize, grids: &[usize]) -> dqj::Result<()> {
    let (coupling, gamma, t) = (PI / 2.0, 0.03, 1.0);
    let m = build_tfim(n_qubits, 2.0 * PI * coupling, coupling, gamma)?;
    let sys = LindbladSystem::new(m.hamiltonian.clone(), m.jumps.clone(), DensityMatrix::pure(&m.psi0)?)?;
    let exact = integrate_master(&sys, t, &[t], t / 4000.0)?;
    let exact = exact.last().unwrap();

    println!("{n_qubits}-qubit TFIM, gamma {gamma}");
    for order in [1, 2] {
        for &n in grids {
            let prop = PropagationConfig::for_grid(t, n, 20)?;
            let run = run_dqj(&m.hamiltonian, &m.jumps, &m.psi0, t, order, n, &prop, &[t])?;
            let err = infidelity(exact, run.assemble()?.last().unwrap())?;
            println!("  order {order}  N_grid {n:>3}  N_traj {:>7}  infidelity {err:.3e}", run.trajectory_count());
        }
        let bound = poisson_plateau(gamma * n_qubits as f64, t, order, true);
        println!("  order {order}  Poisson plateau estimate {bound:.2e}");
    }
    Ok(())
}

pub fn run_example() -> dqj::Result<()> {
    plateau(3, &[8, 16, 32])
}

#[allow(dead_code)]
fn main() -> std::process::ExitCode {
    let n_qubits = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    match plateau(n_qubits, &[8, 16, 32, 64]) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code() as u8)
        }
    }
}
