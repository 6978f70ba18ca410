//! Deterministic quantum jump (DQJ) unraveling of weakly dissipative Lindblad
//! dynamics.
//!
//! Trajectories with up to three jumps are placed on a deterministic grid of
//! jump times and weighted by their probability densities, so the ensemble
//! converges polynomially in the number of trajectories instead of as
//! `1/N_traj`. The crate also ships a restricted stochastic (SQJ) baseline, a
//! master-equation reference integrator, benchmark models and error metrics.
//!
//! ```
//! use dqj::models::{build_test_qubit, TestQubit};
//! use dqj::propagation::PropagationConfig;
//! use dqj::dqj::run_dqj;
//!
//! let m = build_test_qubit(TestQubit::Rabi, 0.05, std::f64::consts::PI);
//! let cfg = PropagationConfig::for_grid(1.0, 16, 20).unwrap();
//! let run = run_dqj(&m.hamiltonian, &m.jumps, &m.psi0, 1.0, 1, 16, &cfg, &[1.0]).unwrap();
//! let rho = run.assemble().unwrap();
//! assert!((rho.last().unwrap().trace().re - 1.0).abs() < 1e-10);
//! ```

pub mod bench;
pub mod dqj;
pub mod error;
pub mod grid;
pub mod lindblad;
pub mod metrics;
pub mod models;
pub mod propagation;
pub mod sqj;
pub mod state;

pub use error::{Error, Result};
pub use state::{DensityMatrix, DensityMatrixSeries, JumpOperatorSet, OperatorMatrix, StateVector, C64};
