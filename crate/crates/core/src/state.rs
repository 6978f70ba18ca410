//! Dense complex state vectors, operators and density matrices.
//!
//! Basis convention for two-level systems: index 0 is the excited / spin-up
//! level, index 1 the ground / spin-down level, so `sigma_z = diag(1, -1)` and
//! `sigma_minus = |1><0|`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Squared norm below which a state counts as annihilated.
pub const NORM_EPS: f64 = 1e-14;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Possibly unnormalized pure state. Its squared norm doubles as the running
/// no-jump probability when evolved under an effective Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        Ok(Self { amps: DVector::from_vec(amplitudes) })
    }

    pub fn from_dvector(amps: DVector<C64>) -> Self {
        assert!(!amps.is_empty(), "state dimension must be positive");
        Self { amps }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amps = DVector::from_element(dim, ZERO);
        amps[index] = ONE;
        Self { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { amps: DVector::from_element(dim, ZERO) }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amps
    }

    pub fn squared_norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { amps: &self.amps * c }
    }

    /// Returns a unit-norm copy, or `NormUnderflow` for an annihilated state.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.squared_norm();
        if n2 <= NORM_EPS {
            return Err(Error::NormUnderflow(n2));
        }
        Ok(self.scaled(C64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn apply(&self, op: &OperatorMatrix) -> Result<Self> {
        check_dim(op.dim(), self.dim())?;
        Ok(Self { amps: op.matrix() * &self.amps })
    }

    /// `<psi|O|psi>` on the unnormalized state.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        check_dim(op.dim(), self.dim())?;
        Ok(self.amps.dotc(&(op.matrix() * &self.amps)))
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn outer_product_normalized(&self) -> Result<DensityMatrix> {
        let n2 = self.squared_norm();
        if n2 <= NORM_EPS {
            return Err(Error::NormUnderflow(n2));
        }
        let m = (&self.amps * self.amps.adjoint()) / C64::new(n2, 0.0);
        Ok(DensityMatrix { m })
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    m: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        Ok(Self { m })
    }

    /// Row-major construction from real entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        check_dim(dim * dim, entries.len())?;
        Self::from_dmatrix(DMatrix::from_row_iterator(
            dim,
            dim,
            entries.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::from_element(dim, dim, ZERO) }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self { m: DMatrix::from_diagonal(&d) }
    }

    pub fn sigma_x() -> Self {
        Self::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn sigma_y() -> Self {
        Self {
            m: DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        }
    }

    pub fn sigma_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    /// Lowering operator `|g><e|` (maps index 0 to index 1).
    pub fn sigma_minus() -> Self {
        Self::from_real_rows(2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
    }

    /// Projector onto the excited level, `|e><e|`.
    pub fn excited_projector() -> Self {
        Self::diagonal(&[1.0, 0.0])
    }

    /// Bosonic annihilation operator truncated to `n_fock + 1` levels.
    pub fn annihilation(n_fock: usize) -> Self {
        let dim = n_fock + 1;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for n in 1..dim {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self { m }
    }

    /// Places `op` on site `site` of a chain of `sites` factors of equal dimension.
    pub fn embed(op: &OperatorMatrix, site: usize, sites: usize) -> Self {
        assert!(site < sites);
        let id = OperatorMatrix::identity(op.dim());
        (0..sites)
            .map(|k| if k == site { op.clone() } else { id.clone() })
            .reduce(|acc, f| acc.kron(&f))
            .unwrap()
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn kron(&self, other: &OperatorMatrix) -> Self {
        Self { m: self.m.kronecker(&other.m) }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { m: &self.m - &other.m })
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { m: &self.m * &other.m })
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.m)
    }

    /// Eigenvalues (ascending) of the Hermitian part of the matrix.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    /// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
    pub fn hermitian_norm(&self) -> f64 {
        self.hermitian_eigenvalues()
            .into_iter()
            .fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }
}

/// Ordered set of jump operators, rates absorbed (`L = sqrt(gamma) A`).
/// The position of an operator is its persistent index.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperatorSet {
    dim: usize,
    ops: Vec<OperatorMatrix>,
}

impl JumpOperatorSet {
    pub fn new(dim: usize, ops: Vec<OperatorMatrix>) -> Result<Self> {
        for op in &ops {
            check_dim(dim, op.dim())?;
        }
        Ok(Self { dim, ops })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, ops: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn operators(&self) -> &[OperatorMatrix] {
        &self.ops
    }

    pub fn get(&self, index: usize) -> &OperatorMatrix {
        &self.ops[index]
    }

    /// `sum_j L_j^dagger L_j`.
    pub fn decay_sum(&self) -> OperatorMatrix {
        let mut acc = DMatrix::from_element(self.dim, self.dim, ZERO);
        for op in &self.ops {
            acc += op.matrix().adjoint() * op.matrix();
        }
        OperatorMatrix { m: acc }
    }
}

/// Dense density matrix. Construction does not enforce the physical
/// constraints; [`DensityMatrix::validate`] checks them.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "density matrix must be square");
        Self { m }
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        psi.outer_product_normalized()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.m)
    }

    /// `(rho + rho^dagger) / 2`.
    pub fn hermitized(&self) -> Self {
        Self { m: (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0) }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Checks Hermiticity, unit trace and positivity at the given tolerances.
    pub fn validate(&self, herm_tol: f64, trace_tol: f64, eig_tol: f64) -> Result<()> {
        let herr = self.hermiticity_error();
        if herr > herm_tol {
            return Err(Error::NotADensityMatrix(format!("hermiticity error {herr:e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::NotADensityMatrix(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -eig_tol {
            return Err(Error::NotADensityMatrix(format!("eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `Tr(rho O)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        check_dim(self.dim(), op.dim())?;
        Ok((&self.m * op.matrix()).trace())
    }

    /// Spectral norm of `self - other` (both assumed Hermitian).
    pub fn distance_spectral(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.m - &other.m;
        hermitian_eigenvalues(&diff)
            .into_iter()
            .fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }
}

/// Density matrices indexed by (strictly increasing) recording time.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixSeries {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl DensityMatrixSeries {
    pub fn new(times: Vec<f64>, states: Vec<DensityMatrix>) -> Self {
        assert_eq!(times.len(), states.len());
        Self { times, states }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State recorded at `t` (matched within 1e-12).
    pub fn at(&self, t: f64) -> Option<&DensityMatrix> {
        self.times
            .iter()
            .position(|&x| (x - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|i| &self.states[i])
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

pub(crate) fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h)
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_eigen(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
