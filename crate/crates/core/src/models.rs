//! Benchmark systems: dissipative transverse-field Ising chain, damped Kerr
//! oscillator, and two-level test systems with analytic references.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::state::{JumpOperatorSet, OperatorMatrix, StateVector, C64};

#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub hamiltonian: OperatorMatrix,
    pub jumps: JumpOperatorSet,
    /// Unit-norm initial state.
    pub psi0: StateVector,
    pub dim: usize,
    pub label: String,
    pub observables: BTreeMap<String, OperatorMatrix>,
    /// Free-form facts about the construction (boundary conditions, rates).
    pub metadata: BTreeMap<String, String>,
}

impl ModelInstance {
    pub fn observable(&self, name: &str) -> Result<&OperatorMatrix> {
        self.observables
            .get(name)
            .ok_or_else(|| Error::Config(format!("model {} has no observable {name:?}", self.label)))
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Open 1D chain `H = g sum_k X_k + J sum_k Z_k Z_{k+1}` with local amplitude
/// damping `sqrt(gamma) sigma^-_k`, starting from all spins up.
pub fn build_tfim(n_qubits: usize, g: f64, coupling: f64, gamma: f64) -> Result<ModelInstance> {
    if !(2..=5).contains(&n_qubits) {
        return Err(Error::Config(format!("TFIM supports 2 to 5 qubits, got {n_qubits}")));
    }
    if gamma < 0.0 {
        return Err(Error::Config(format!("gamma must be non-negative, got {gamma}")));
    }
    let dim = 1usize << n_qubits;
    let x: Vec<OperatorMatrix> = (0..n_qubits)
        .map(|k| OperatorMatrix::embed(&OperatorMatrix::sigma_x(), k, n_qubits))
        .collect();
    let z: Vec<OperatorMatrix> = (0..n_qubits)
        .map(|k| OperatorMatrix::embed(&OperatorMatrix::sigma_z(), k, n_qubits))
        .collect();

    let mut h = OperatorMatrix::zeros(dim);
    for xk in &x {
        h = h.add(&xk.scaled(real(g)))?;
    }
    for k in 0..n_qubits - 1 {
        h = h.add(&z[k].mul(&z[k + 1])?.scaled(real(coupling)))?;
    }

    let lower = OperatorMatrix::sigma_minus().scaled(real(gamma.sqrt()));
    let ops = (0..n_qubits).map(|k| OperatorMatrix::embed(&lower, k, n_qubits)).collect();
    let jumps = JumpOperatorSet::new(dim, ops)?;

    let mut observables = BTreeMap::new();
    let mut mz = OperatorMatrix::zeros(dim);
    for zk in &z {
        mz = mz.add(&zk.scaled(real(1.0 / n_qubits as f64)))?;
    }
    observables.insert("mz".to_string(), mz);
    observables.insert("x1".to_string(), x[0].clone());
    observables.insert("z1".to_string(), z[0].clone());

    let mut metadata = BTreeMap::new();
    metadata.insert("boundary".to_string(), "open".to_string());
    metadata.insert("gamma".to_string(), format!("{gamma}"));

    Ok(ModelInstance {
        hamiltonian: h,
        jumps,
        psi0: StateVector::basis(dim, 0),
        dim,
        label: format!("tfim_n{n_qubits}"),
        observables,
        metadata,
    })
}

/// Probability mass of a coherent state outside `0..=n_fock`.
pub fn coherent_tail_mass(alpha: C64, n_fock: usize) -> f64 {
    let mean = alpha.norm_sqr();
    let mut term = (-mean).exp();
    let mut inside = term;
    for n in 1..=n_fock {
        term *= mean / n as f64;
        inside += term;
    }
    (1.0 - inside).max(0.0)
}

/// Coherent state amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` on `0..=n_fock`, renormalized.
pub fn truncated_coherent_state(alpha: C64, n_fock: usize) -> StateVector {
    let mut amps = Vec::with_capacity(n_fock + 1);
    let mut a = real((-alpha.norm_sqr() / 2.0).exp());
    amps.push(a);
    for n in 1..=n_fock {
        a = a * alpha / (n as f64).sqrt();
        amps.push(a);
    }
    StateVector::new(amps).unwrap().normalized().unwrap()
}

/// Truncated Kerr oscillator `H = w0 n + wK n(n-1)/2` with single-photon loss
/// `sqrt(gamma) a`, starting from a coherent state.
pub fn build_kerr(n_fock: usize, omega0: f64, omega_k: f64, gamma: f64, alpha: C64) -> Result<ModelInstance> {
    if n_fock < 2 {
        return Err(Error::Config(format!("n_fock must be at least 2, got {n_fock}")));
    }
    if gamma < 0.0 {
        return Err(Error::Config(format!("gamma must be non-negative, got {gamma}")));
    }
    let tail = coherent_tail_mass(alpha, n_fock);
    if tail >= 1e-3 {
        return Err(Error::TruncationTooSmall(tail));
    }
    let dim = n_fock + 1;
    let diag: Vec<f64> = (0..dim)
        .map(|n| {
            let n = n as f64;
            omega0 * n + 0.5 * omega_k * n * (n - 1.0)
        })
        .collect();
    let h = OperatorMatrix::diagonal(&diag);
    let a = OperatorMatrix::annihilation(n_fock);
    let jumps = JumpOperatorSet::new(dim, vec![a.scaled(real(gamma.sqrt()))])?;

    let mut observables = BTreeMap::new();
    let x = a.add(&a.adjoint())?.scaled(real(std::f64::consts::FRAC_1_SQRT_2));
    observables.insert("X".to_string(), x);
    observables.insert("n".to_string(), a.adjoint().mul(&a)?);

    let mut metadata = BTreeMap::new();
    metadata.insert("jump_operator".to_string(), "sqrt(gamma) a".to_string());
    metadata.insert("coherent_tail_mass".to_string(), format!("{tail:e}"));

    Ok(ModelInstance {
        hamiltonian: h,
        jumps,
        psi0: truncated_coherent_state(alpha, n_fock),
        dim,
        label: format!("kerr_n{n_fock}"),
        observables,
        metadata,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestQubit {
    /// `H = 0`: the post-jump ground state is dark.
    Dark,
    /// `H = (omega/2) sigma_x`.
    Rabi,
}

/// Amplitude-damped qubit starting in the excited state.
pub fn build_test_qubit(kind: TestQubit, gamma: f64, omega: f64) -> ModelInstance {
    assert!(gamma >= 0.0, "gamma must be non-negative");
    let h = match kind {
        TestQubit::Dark => OperatorMatrix::zeros(2),
        TestQubit::Rabi => OperatorMatrix::sigma_x().scaled(real(omega / 2.0)),
    };
    let l = OperatorMatrix::sigma_minus().scaled(real(gamma.sqrt()));
    let mut observables = BTreeMap::new();
    observables.insert("sz".to_string(), OperatorMatrix::sigma_z());
    observables.insert("pe".to_string(), OperatorMatrix::excited_projector());
    let label = match kind {
        TestQubit::Dark => "qubit_dark",
        TestQubit::Rabi => "qubit_rabi",
    };
    ModelInstance {
        hamiltonian: h,
        jumps: JumpOperatorSet::new(2, vec![l]).unwrap(),
        psi0: StateVector::basis(2, 0),
        dim: 2,
        label: label.to_string(),
        observables,
        metadata: BTreeMap::new(),
    }
}
