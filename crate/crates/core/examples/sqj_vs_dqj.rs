// Same trajectory budget, two unravelings: deterministic jump grids against
// sampled jump times, on a two-qubit chain.
//
//     cargo run --release --example sqj_vs_dqj

use std::f64::consts::PI;

use dqj::dqj::run_dqj;
use dqj::lindblad::{integrate_master, LindbladSystem};
use dqj::metrics::infidelity;
use dqj::models::build_tfim;
use dqj::propagation::PropagationConfig;
use dqj::sqj::{run_sqj, SqjConfig};
use dqj::DensityMatrix;

pub fn run_example() -> dqj::Result<()> {
    let (coupling, t) = (PI / 2.0, 1.0);
    let m = build_tfim(2, 2.0 * PI * coupling, coupling, 0.03)?;
    let sys = LindbladSystem::new(m.hamiltonian.clone(), m.jumps.clone(), DensityMatrix::pure(&m.psi0)?)?;
    let exact = integrate_master(&sys, t, &[t], t / 4000.0)?;
    let exact = exact.last().unwrap();
    let seeds = 8;

    for n in [8, 16] {
        let run = run_dqj(&m.hamiltonian, &m.jumps, &m.psi0, t, 2, n, &PropagationConfig::for_grid(t, n, 20)?, &[t])?;
        let d = infidelity(exact, run.assemble()?.last().unwrap())?;
        let budget = run.trajectory_count() - 1;

        let prop = PropagationConfig::for_grid(t, 32, 20)?;
        let mut mean = 0.0;
        for seed in 0..seeds {
            let cfg = SqjConfig::new(budget, seed)?;
            let sqj = run_sqj(&m.hamiltonian, &m.jumps, &m.psi0, t, &cfg, &prop, &[t])?;
            mean += infidelity(exact, sqj.assemble()?.last().unwrap())? / seeds as f64;
        }
        println!("N_traj {:>5}  dqj {d:.2e}  sqj mean over {seeds} seeds {mean:.2e}", budget + 1);
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
