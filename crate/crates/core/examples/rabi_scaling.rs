// Grid refinement on a driven, damped qubit. Against a converged run of the
// same jump order the infidelity falls as N_traj^(-4/n) for order n.
//
//     cargo run --release --example rabi_scaling

use std::f64::consts::PI;

use dqj::dqj::run_dqj;
use dqj::grid::count_trajectories;
use dqj::metrics::{fit_loglog_slope, infidelity};
use dqj::models::{build_test_qubit, ModelInstance, TestQubit};
use dqj::propagation::PropagationConfig;
use dqj::DensityMatrix;

fn final_state(m: &ModelInstance, order: usize, n_grid: usize) -> dqj::Result<DensityMatrix> {
    let prop = PropagationConfig::for_grid(1.0, n_grid, 20)?;
    let run = run_dqj(&m.hamiltonian, &m.jumps, &m.psi0, 1.0, order, n_grid, &prop, &[1.0])?;
    Ok(run.assemble()?.last().unwrap().clone())
}

pub fn run_example() -> dqj::Result<()> {
    for (order, gamma, grids, reference) in [(1, 0.05, vec![4, 8, 16, 32], 1024), (2, 0.2, vec![4, 8, 16], 256)] {
        let m = build_test_qubit(TestQubit::Rabi, gamma, PI);
        let converged = final_state(&m, order, reference)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        println!("order {order}, gamma {gamma}");
        for &n in &grids {
            let n_traj = count_trajectories(order, n as u64, 1)?;
            let err = infidelity(&converged, &final_state(&m, order, n)?)?;
            println!("  N_grid {n:>4}  N_traj {n_traj:>5}  infidelity {err:.3e}");
            xs.push(n_traj as f64);
            ys.push(err);
        }
        let fit = fit_loglog_slope(&xs, &ys, 0..xs.len())?;
        println!("  slope {:.2} (expected {:.1})", fit.slope, -4.0 / order as f64);
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
