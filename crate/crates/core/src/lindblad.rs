//! Reference density-matrix evolution under the Lindblad master equation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::propagation::{EffectiveHamiltonian, TimeLattice};
use crate::state::{DensityMatrix, DensityMatrixSeries, JumpOperatorSet, OperatorMatrix, C64, I};

#[derive(Debug, Clone)]
pub struct LindbladSystem {
    pub hamiltonian: OperatorMatrix,
    pub jumps: JumpOperatorSet,
    pub rho0: DensityMatrix,
}

impl LindbladSystem {
    pub fn new(hamiltonian: OperatorMatrix, jumps: JumpOperatorSet, rho0: DensityMatrix) -> Result<Self> {
        let d = hamiltonian.dim();
        for found in [jumps.dim(), rho0.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        rho0.validate(1e-10, 1e-10, 1e-10)?;
        Ok(Self { hamiltonian, jumps, rho0 })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

/// Precomputed pieces of `L[rho] = -i(H_eff rho - rho H_eff^dagger) + sum L rho L^dagger`.
struct Generator {
    /// `-i H_eff`
    a: DMatrix<C64>,
    /// `(-i H_eff)^dagger = i H_eff^dagger`
    a_dag: DMatrix<C64>,
    jumps: Vec<(DMatrix<C64>, DMatrix<C64>)>,
}

impl Generator {
    fn new(sys: &LindbladSystem) -> Result<Self> {
        let heff = EffectiveHamiltonian::build(&sys.hamiltonian, &sys.jumps)?;
        let a = heff.matrix().matrix() * (-I);
        let a_dag = a.adjoint();
        let jumps = sys
            .jumps
            .operators()
            .iter()
            .map(|l| (l.matrix().clone(), l.matrix().adjoint()))
            .collect();
        Ok(Self { a, a_dag, jumps })
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = &self.a * rho + rho * &self.a_dag;
        for (l, l_dag) in &self.jumps {
            out += l * rho * l_dag;
        }
        out
    }

    fn rk4_step(&self, rho: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
        let half = C64::new(0.5 * dt, 0.0);
        let full = C64::new(dt, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * full));
        rho + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
    }
}

/// `-i[H, rho] + sum_L (L rho L^dagger - 1/2 {L^dagger L, rho})`.
pub fn lindblad_rhs(rho: &DensityMatrix, sys: &LindbladSystem) -> Result<DMatrix<C64>> {
    if rho.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: rho.dim() });
    }
    let r = rho.matrix();
    let h = sys.hamiltonian.matrix();
    let mut out = (h * r - r * h) * (-I);
    for l in sys.jumps.operators() {
        let l = l.matrix();
        let ltl = l.adjoint() * l;
        out += l * r * l.adjoint() - (&ltl * r + r * &ltl) * C64::new(0.5, 0.0);
    }
    Ok(out)
}

/// Fixed-step RK4 integration of the master equation on the same lattice
/// policy as the trajectory propagator. Recorded states are re-symmetrized.
pub fn integrate_master(sys: &LindbladSystem, t_final: f64, record_at: &[f64], h: f64) -> Result<DensityMatrixSeries> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Config(format!("substep must be positive, got {h}")));
    }
    let tol = 1e-12 * t_final.abs().max(1.0);
    if let Some(&bad) = record_at.iter().find(|&&t| t < -tol || t > t_final + tol) {
        return Err(Error::Config(format!("recording time {bad} outside [0, {t_final}]")));
    }
    let gen = Generator::new(sys)?;
    let lattice = TimeLattice::new(h, record_at);
    let pts = lattice.boundaries(0.0, t_final);

    let mut rho = sys.rho0.matrix().clone();
    let mut sampled = vec![(0.0, rho.clone())];
    for w in pts.windows(2) {
        rho = gen.rk4_step(&rho, w[1] - w[0]);
        sampled.push((w[1], rho.clone()));
    }

    let mut states = Vec::with_capacity(record_at.len());
    for &t in record_at {
        let idx = sampled
            .iter()
            .position(|(s, _)| (s - t).abs() <= tol)
            .expect("recording time is a lattice boundary");
        let dm = DensityMatrix::from_matrix(sampled[idx].1.clone()).hermitized();
        let tr = dm.trace();
        if (tr.re - 1.0).abs() > 1e-8 {
            return Err(Error::NotADensityMatrix(format!("trace drifted to {tr} at t = {t}")));
        }
        states.push(dm);
    }
    Ok(DensityMatrixSeries::new(record_at.to_vec(), states))
}
