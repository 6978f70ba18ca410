// Lossy Kerr oscillator from a coherent state: quadrature trace and its
// spectrum at the bare frequency, DQJ order 1 against the master equation.
//
//     cargo run --release --example kerr_spectrum

use std::f64::consts::PI;

use dqj::dqj::run_dqj;
use dqj::lindblad::{integrate_master, LindbladSystem};
use dqj::metrics::{observable_trace, spectrum};
use dqj::models::build_kerr;
use dqj::propagation::PropagationConfig;
use dqj::{DensityMatrix, C64};

pub fn run_example() -> dqj::Result<()> {
    let (t, omega0) = (1.0, 24.0 * PI);
    let m = build_kerr(6, omega0, omega0 / 4.0, 0.32, C64::new(1.5 / 2f64.sqrt(), 0.0))?;
    // the spectrum needs the quadrature resolved well below its period
    let record: Vec<f64> = (0..=400).map(|k| k as f64 * t / 400.0).collect();
    let h = 1e-4;

    let sys = LindbladSystem::new(m.hamiltonian.clone(), m.jumps.clone(), DensityMatrix::pure(&m.psi0)?)?;
    let x = m.observable("X")?;
    let exact = observable_trace(&integrate_master(&sys, t, &record, h)?, x)?;
    let s_exact = spectrum(&exact, omega0).norm();
    println!("<X>(0) = {:.4}, |S(w0)| = {s_exact:.6}", exact.values[0].re);

    for n in [4, 16, 64] {
        let run = run_dqj(&m.hamiltonian, &m.jumps, &m.psi0, t, 1, n, &PropagationConfig::new(h)?, &record)?;
        let ours = observable_trace(&run.assemble()?, x)?;
        let max_dx = ours.values.iter().zip(&exact.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let ds = spectrum(&ours, omega0).norm() - s_exact;
        println!("N_grid {n:>3}  max |d<X>| {max_dx:.2e}  d|S(w0)| {ds:+.3e}");
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
