//! Non-Hermitian effective-Hamiltonian propagation and quantum jumps.
//!
//! States are integrated with the classical fourth-order Runge-Kutta scheme on
//! a global time lattice `k * h`. A segment `[t0, t1]` steps through every
//! lattice point strictly inside it, every extra boundary registered with the
//! [`Propagator`] (recording times), and stops exactly on `t1`. Because the
//! boundary set only depends on the segment endpoints, a state obtained by
//! resuming from any intermediate boundary is bit-identical to one obtained by
//! integrating the whole segment in one call.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::state::{JumpOperatorSet, OperatorMatrix, StateVector, C64, I, NORM_EPS, ONE};

/// Two times closer than this (relative to the time scale) are the same boundary.
pub const TIME_TOL: f64 = 1e-12;

/// `H_eff = H - (i/2) sum_j L_j^dagger L_j`, with both parts kept.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    matrix: OperatorMatrix,
    hermitian_part: OperatorMatrix,
    decay_part: OperatorMatrix,
}

impl EffectiveHamiltonian {
    pub fn build(h: &OperatorMatrix, jumps: &JumpOperatorSet) -> Result<Self> {
        if h.dim() != jumps.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: jumps.dim() });
        }
        let herr = h.hermiticity_error();
        if herr > 1e-12 {
            return Err(Error::Config(format!("Hamiltonian not Hermitian (error {herr:e})")));
        }
        let decay = jumps.decay_sum();
        let matrix = h.sub(&decay.scaled(C64::new(0.0, 0.5)))?;
        let heff = Self { matrix, hermitian_part: h.clone(), decay_part: decay };
        debug_assert!(heff.decomposition_error() <= 1e-12);
        Ok(heff)
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn hermitian_part(&self) -> &OperatorMatrix {
        &self.hermitian_part
    }

    pub fn decay_part(&self) -> &OperatorMatrix {
        &self.decay_part
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Max elementwise deviation of `matrix` from `H - (i/2) decay`.
    pub fn decomposition_error(&self) -> f64 {
        let rebuilt = self.hermitian_part.matrix() - self.decay_part.matrix() * C64::new(0.0, 0.5);
        (self.matrix.matrix() - rebuilt).iter().fold(0.0, |m: f64, z| m.max(z.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub substep: f64,
    pub method: Integrator,
}

impl PropagationConfig {
    pub fn new(substep: f64) -> Result<Self> {
        if !(substep > 0.0 && substep.is_finite()) {
            return Err(Error::Config(format!("substep must be positive, got {substep}")));
        }
        Ok(Self { substep, method: Integrator::Rk4 })
    }

    /// `h = (T / n_grid) / div`, tying the integrator step to the jump-time grid.
    pub fn for_grid(t_final: f64, n_grid: usize, div: usize) -> Result<Self> {
        if n_grid == 0 || div == 0 {
            return Err(Error::Config("n_grid and substep divisor must be positive".into()));
        }
        Self::new(t_final / n_grid as f64 / div as f64)
    }
}

/// Global step lattice `k * h` plus extra boundaries that are always hit.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLattice {
    h: f64,
    extra: Vec<f64>,
}

impl TimeLattice {
    pub fn new(h: f64, extra_boundaries: &[f64]) -> Self {
        assert!(h > 0.0, "lattice step must be positive");
        let mut extra: Vec<f64> = extra_boundaries.to_vec();
        extra.sort_by(f64::total_cmp);
        extra.dedup();
        Self { h, extra }
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    fn tol(t: f64) -> f64 {
        TIME_TOL * t.abs().max(1.0)
    }

    /// Step boundaries of `[t0, t1]`, starting with `t0` and ending with `t1`.
    pub fn boundaries(&self, t0: f64, t1: f64) -> Vec<f64> {
        let tol = Self::tol(t1);
        let mut pts = vec![t0];
        if t1 - t0 <= tol {
            if t1 != t0 {
                pts.push(t1);
            }
            return pts;
        }
        let mut k = (t0 / self.h).floor() as i64 + 1;
        let mut extra = self
            .extra
            .iter()
            .copied()
            .filter(|&x| x > t0 + tol && x < t1 - tol)
            .peekable();
        loop {
            let lat = k as f64 * self.h;
            let next_lat = (lat < t1 - tol).then_some(lat);
            let next = match (next_lat, extra.peek().copied()) {
                (None, None) => break,
                (Some(a), None) => {
                    k += 1;
                    a
                }
                (None, Some(b)) => {
                    extra.next();
                    b
                }
                (Some(a), Some(b)) => {
                    if (a - b).abs() <= tol {
                        k += 1;
                        extra.next();
                        b
                    } else if a < b {
                        k += 1;
                        a
                    } else {
                        extra.next();
                        b
                    }
                }
            };
            if next > pts[pts.len() - 1] + tol {
                pts.push(next);
            }
        }
        pts.push(t1);
        pts
    }
}

/// Stepping machinery for one effective Hamiltonian and one step policy.
#[derive(Debug, Clone)]
pub struct Propagator {
    /// `-i H_eff`.
    generator: DMatrix<C64>,
    /// RK4 update matrix for a full lattice step.
    full_step: DMatrix<C64>,
    lattice: TimeLattice,
}

impl Propagator {
    /// `extra_boundaries` are always stepped on exactly (recording times).
    pub fn new(heff: &EffectiveHamiltonian, cfg: &PropagationConfig, extra_boundaries: &[f64]) -> Self {
        let generator = heff.matrix().matrix() * (-I);
        let full_step = rk4_matrix(&generator, cfg.substep);
        Self { generator, full_step, lattice: TimeLattice::new(cfg.substep, extra_boundaries) }
    }

    pub fn substep(&self) -> f64 {
        self.lattice.h
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn boundaries(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.lattice.boundaries(t0, t1)
    }

    /// Update matrix of one RK4 step of length `dt`.
    pub(crate) fn step_matrix(&self, dt: f64) -> DMatrix<C64> {
        let h = self.lattice.h;
        if (dt - h).abs() <= 1e-9 * h {
            self.full_step.clone()
        } else {
            rk4_matrix(&self.generator, dt)
        }
    }

    /// One RK4 step of length `dt`.
    pub fn step(&self, psi: &DVector<C64>, dt: f64) -> DVector<C64> {
        let h = self.lattice.h;
        if (dt - h).abs() <= 1e-9 * h {
            return &self.full_step * psi;
        }
        let a = &self.generator;
        let dtc = C64::new(dt, 0.0);
        let k1 = a * psi;
        let k2 = a * (psi + &k1 * (dtc * 0.5));
        let k3 = a * (psi + &k2 * (dtc * 0.5));
        let k4 = a * (psi + &k3 * dtc);
        psi + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (dtc / 6.0)
    }

    /// Integrates from `t0` to `t1`, calling `visit(t, psi)` at every boundary
    /// after the start. Returns the final state.
    pub fn evolve<F>(&self, psi0: &StateVector, t0: f64, t1: f64, mut visit: F) -> Result<StateVector>
    where
        F: FnMut(f64, &StateVector),
    {
        if t1 < t0 {
            return Err(Error::InvalidInterval { start: t0, end: t1 });
        }
        if psi0.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi0.dim() });
        }
        let pts = self.boundaries(t0, t1);
        let mut psi = psi0.clone();
        for w in pts.windows(2) {
            let next = self.step(psi.amplitudes(), w[1] - w[0]);
            *psi.amplitudes_mut() = next;
            visit(w[1], &psi);
        }
        Ok(psi)
    }

    /// Collects the state at every boundary of `[t0, t1]`, including `t0`.
    pub fn trace(&self, psi0: &StateVector, t0: f64, t1: f64) -> Result<StateTrace> {
        let mut times = vec![t0];
        let mut states = vec![psi0.clone()];
        self.evolve(psi0, t0, t1, |t, psi| {
            times.push(t);
            states.push(psi.clone());
        })?;
        Ok(StateTrace { times, states })
    }

    /// State at time `t` given a trace covering it: resumes from the last
    /// boundary at or before `t`. Identical to integrating from the trace start.
    pub fn state_at(&self, trace: &StateTrace, t: f64) -> StateVector {
        let tol = TimeLattice::tol(t);
        let idx = trace.last_index_at_or_before(t + tol);
        let (tb, psi) = (trace.times[idx], &trace.states[idx]);
        if (t - tb).abs() <= tol {
            return psi.clone();
        }
        StateVector::from_dvector(self.step(psi.amplitudes(), t - tb))
    }
}

/// States sampled at the step boundaries of one segment.
#[derive(Debug, Clone)]
pub struct StateTrace {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl StateTrace {
    fn last_index_at_or_before(&self, t: f64) -> usize {
        let pos = self.times.partition_point(|&x| x <= t);
        assert!(pos > 0, "time {t} precedes trace start {}", self.times[0]);
        pos - 1
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().unwrap()
    }

    /// State at an exact boundary (within tolerance) or `None`.
    pub fn at_boundary(&self, t: f64) -> Option<&StateVector> {
        let tol = TIME_TOL * t.abs().max(1.0);
        let idx = self.times.partition_point(|&x| x < t - tol);
        (idx < self.times.len() && (self.times[idx] - t).abs() <= tol).then(|| &self.states[idx])
    }
}

/// Products of step matrices from every boundary of `[0, T]` to the next
/// target time, so a trajectory starting anywhere reaches each target with
/// one partial step and one matrix-vector product per target.
#[derive(Debug, Clone)]
pub(crate) struct TargetChain {
    bounds: Vec<f64>,
    is_target: Vec<bool>,
    to_next: Vec<DMatrix<C64>>,
    next: Vec<usize>,
}

impl TargetChain {
    /// `targets` must be extra boundaries of `prop`; `t_final` is always a target.
    pub(crate) fn new(prop: &Propagator, t_final: f64, targets: &[f64]) -> Self {
        let bounds = prop.boundaries(0.0, t_final);
        let last = bounds.len() - 1;
        let tol = TimeLattice::tol(t_final);
        let is_target: Vec<bool> = bounds
            .iter()
            .enumerate()
            .map(|(i, &b)| i == last || targets.iter().any(|&t| (t - b).abs() <= tol))
            .collect();
        let dim = prop.dim();
        let mut to_next = vec![DMatrix::<C64>::zeros(dim, dim); last];
        let mut next = vec![last; last];
        for i in (0..last).rev() {
            let step = prop.step_matrix(bounds[i + 1] - bounds[i]);
            if is_target[i + 1] {
                to_next[i] = step;
                next[i] = i + 1;
            } else {
                to_next[i] = &to_next[i + 1] * step;
                next[i] = next[i + 1];
            }
        }
        Self { bounds, is_target, to_next, next }
    }

    /// Same boundaries as `Propagator::evolve(psi, t0, T, ..)`, but `visit` is
    /// only called at target times after `t0`.
    pub(crate) fn evolve<F>(&self, prop: &Propagator, psi0: &StateVector, t0: f64, mut visit: F) -> StateVector
    where
        F: FnMut(f64, &StateVector),
    {
        let last = self.bounds.len() - 1;
        let t_final = self.bounds[last];
        let tol = TimeLattice::tol(t_final);
        let mut i = self.bounds.partition_point(|&b| b <= t0 + tol);
        if i > last {
            if t0 == t_final {
                return psi0.clone();
            }
            let psi = StateVector::from_dvector(prop.step(psi0.amplitudes(), t_final - t0));
            visit(t_final, &psi);
            return psi;
        }
        let mut psi = StateVector::from_dvector(prop.step(psi0.amplitudes(), self.bounds[i] - t0));
        if self.is_target[i] {
            visit(self.bounds[i], &psi);
        }
        while i < last {
            psi = StateVector::from_dvector(&self.to_next[i] * psi.amplitudes());
            i = self.next[i];
            visit(self.bounds[i], &psi);
        }
        psi
    }
}

/// `I + A h + (A h)^2/2 + (A h)^3/6 + (A h)^4/24`: RK4 for a linear autonomous system.
pub(crate) fn rk4_matrix(generator: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let n = generator.nrows();
    let a = generator * C64::new(dt, 0.0);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut acc = term.clone();
    for k in 1..=4 {
        term = &term * &a / C64::new(k as f64, 0.0);
        acc += &term;
    }
    acc
}

#[derive(Debug, Clone)]
pub struct SegmentResult {
    pub final_state: StateVector,
    /// `(time, state)` in the order of the requested recording times.
    pub recorded_states: Vec<(f64, StateVector)>,
}

/// Integrates `dpsi/dt = -i H_eff psi` from `t0` to `t1`, stepping exactly on
/// every recording time. States are returned unnormalized.
pub fn propagate_segment(
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    heff: &EffectiveHamiltonian,
    cfg: &PropagationConfig,
    record_at: &[f64],
) -> Result<SegmentResult> {
    if t1 < t0 {
        return Err(Error::InvalidInterval { start: t0, end: t1 });
    }
    let tol = TIME_TOL * t1.abs().max(1.0);
    if let Some(&bad) = record_at.iter().find(|&&t| t < t0 - tol || t > t1 + tol) {
        return Err(Error::Config(format!("recording time {bad} outside [{t0}, {t1}]")));
    }
    let prop = Propagator::new(heff, cfg, record_at);
    let trace = prop.trace(psi0, t0, t1)?;
    let recorded_states = record_at
        .iter()
        .map(|&t| (t, prop.state_at(&trace, t)))
        .collect();
    Ok(SegmentResult { final_state: trace.final_state().clone(), recorded_states })
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpOutcome {
    /// Unit-norm post-jump state and the weight `<psi|L^dagger L|psi>` of the
    /// unnormalized incoming state.
    Jumped { state: StateVector, weight: f64 },
    Annihilated,
}

impl JumpOutcome {
    pub fn weight(&self) -> f64 {
        match self {
            JumpOutcome::Jumped { weight, .. } => *weight,
            JumpOutcome::Annihilated => 0.0,
        }
    }
}

pub fn apply_jump(psi: &StateVector, l: &OperatorMatrix) -> Result<JumpOutcome> {
    let jumped = psi.apply(l)?;
    let weight = jumped.squared_norm();
    if weight <= NORM_EPS * psi.squared_norm() || weight <= 0.0 {
        return Ok(JumpOutcome::Annihilated);
    }
    let state = jumped.scaled(ONE / weight.sqrt());
    Ok(JumpOutcome::Jumped { state, weight })
}

pub fn build_effective_hamiltonian(h: &OperatorMatrix, jumps: &JumpOperatorSet) -> Result<EffectiveHamiltonian> {
    EffectiveHamiltonian::build(h, jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ZERO;

    fn damped_qubit(gamma: f64) -> (OperatorMatrix, JumpOperatorSet) {
        let l = OperatorMatrix::sigma_minus().scaled(C64::new(gamma.sqrt(), 0.0));
        (OperatorMatrix::zeros(2), JumpOperatorSet::new(2, vec![l]).unwrap())
    }

    /// Matrix exponential by scaling and squaring of a Taylor series.
    fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
        let n = a.nrows();
        let norm = a.iter().map(|z| z.norm()).sum::<f64>();
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scaled = a / C64::new(2f64.powi(s), 0.0);
        let mut term = DMatrix::<C64>::identity(n, n);
        let mut acc = term.clone();
        for k in 1..30 {
            term = &term * &scaled / C64::new(k as f64, 0.0);
            acc += &term;
        }
        for _ in 0..s {
            acc = &acc * &acc;
        }
        acc
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let heff = build_effective_hamiltonian(&OperatorMatrix::zeros(3), &JumpOperatorSet::empty(3)).unwrap();
        let psi = StateVector::new(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.7, 0.0)]).unwrap();
        let cfg = PropagationConfig::new(0.01).unwrap();
        let out = propagate_segment(&psi, 0.2, 1.7, &heff, &cfg, &[0.5]).unwrap();
        assert_eq!(out.final_state, psi);
        assert_eq!(out.recorded_states[0].1, psi);
    }

    #[test]
    fn sigma_z_phase_matches_exponential() {
        let h = OperatorMatrix::sigma_z().scaled(C64::new(0.5, 0.0));
        let heff = build_effective_hamiltonian(&h, &JumpOperatorSet::empty(2)).unwrap();
        let cfg = PropagationConfig::new(0.01).unwrap();
        let out = propagate_segment(&StateVector::basis(2, 0), 0.0, std::f64::consts::PI, &heff, &cfg, &[]).unwrap();
        let expected = C64::new(0.0, -1.0);
        assert!((out.final_state.amplitudes()[0] - expected).norm() < 1e-9);
        assert!((out.final_state.squared_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn amplitude_damping_norm() {
        let (h, j) = damped_qubit(0.1);
        let heff = build_effective_hamiltonian(&h, &j).unwrap();
        let cfg = PropagationConfig::new(0.05).unwrap();
        let out = propagate_segment(&StateVector::basis(2, 0), 0.0, 1.0, &heff, &cfg, &[]).unwrap();
        assert!((out.final_state.squared_norm() - (-0.1f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn invalid_interval_rejected() {
        let (h, j) = damped_qubit(0.1);
        let heff = build_effective_hamiltonian(&h, &j).unwrap();
        let cfg = PropagationConfig::new(0.05).unwrap();
        let err = propagate_segment(&StateVector::basis(2, 0), 1.0, 0.5, &heff, &cfg, &[]);
        assert!(matches!(err, Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn recording_times_are_exact_boundaries() {
        let (h, j) = damped_qubit(0.1);
        let heff = build_effective_hamiltonian(&h, &j).unwrap();
        let prop = Propagator::new(&heff, &PropagationConfig::new(0.1).unwrap(), &[0.33, 0.5]);
        let b = prop.boundaries(0.05, 0.71);
        assert_eq!(b.first(), Some(&0.05));
        assert_eq!(b.last(), Some(&0.71));
        assert!(b.contains(&0.33));
        assert!(b.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.1 + 1e-12));
        // 0.5 coincides with the lattice point 5 * 0.1 and appears once
        assert_eq!(b.iter().filter(|&&t| (t - 0.5).abs() < 1e-9).count(), 1);
    }

    #[test]
    fn jump_examples() {
        let (_, j) = damped_qubit(0.3);
        let l = j.get(0);
        match apply_jump(&StateVector::basis(2, 0), l).unwrap() {
            JumpOutcome::Jumped { state, weight } => {
                assert!((weight - 0.3).abs() < 1e-15);
                assert!((state.amplitudes()[1] - ONE).norm() < 1e-15);
            }
            JumpOutcome::Annihilated => panic!("expected a jump"),
        }
        assert_eq!(apply_jump(&StateVector::basis(2, 1), l).unwrap(), JumpOutcome::Annihilated);
        let half = StateVector::basis(2, 0).scaled(C64::new(0.5, 0.0));
        let out = apply_jump(&half, l).unwrap();
        assert!((out.weight() - 0.075).abs() < 1e-15);
        if let JumpOutcome::Jumped { state, .. } = out {
            assert!((state.squared_norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn effective_hamiltonian_examples() {
        let (h, j) = damped_qubit(0.1);
        let heff = build_effective_hamiltonian(&h, &j).unwrap();
        assert!((heff.matrix().matrix()[(0, 0)] - C64::new(0.0, -0.05)).norm() < 1e-15);
        assert_eq!(heff.matrix().matrix()[(1, 1)], ZERO);

        let hx = OperatorMatrix::sigma_x();
        let heff = build_effective_hamiltonian(&hx, &JumpOperatorSet::empty(2)).unwrap();
        assert_eq!(heff.matrix(), &hx);

        let l = OperatorMatrix::sigma_minus().scaled(C64::new(0.1f64.sqrt(), 0.0));
        let j2 = JumpOperatorSet::new(2, vec![l.clone(), l]).unwrap();
        let heff = build_effective_hamiltonian(&hx, &j2).unwrap();
        assert!((heff.decay_part().matrix()[(0, 0)] - C64::new(0.2, 0.0)).norm() < 1e-15);
        assert!(heff.decomposition_error() <= 1e-12);
        assert!(heff.decay_part().hermitian_eigenvalues()[0] >= -1e-10);
    }

    fn rabi_heff() -> EffectiveHamiltonian {
        let h = OperatorMatrix::sigma_x().scaled(C64::new(1.3, 0.0));
        let l = OperatorMatrix::sigma_minus().scaled(C64::new(0.4f64.sqrt(), 0.0));
        build_effective_hamiltonian(&h, &JumpOperatorSet::new(2, vec![l]).unwrap()).unwrap()
    }

    #[test]
    fn norm_is_monotone() {
        let heff = rabi_heff();
        let prop = Propagator::new(&heff, &PropagationConfig::new(0.02).unwrap(), &[]);
        let trace = prop.trace(&StateVector::basis(2, 0), 0.0, 2.0).unwrap();
        for w in trace.states.windows(2) {
            assert!(w[1].squared_norm() <= w[0].squared_norm() + 1e-10);
        }
    }

    #[test]
    fn segment_composition() {
        let heff = rabi_heff();
        let cfg = PropagationConfig::new(0.01).unwrap();
        let psi0 = StateVector::basis(2, 0);
        let whole = propagate_segment(&psi0, 0.0, 1.0, &heff, &cfg, &[0.37]).unwrap();
        let first = propagate_segment(&psi0, 0.0, 0.37, &heff, &cfg, &[]).unwrap();
        let second = propagate_segment(&first.final_state, 0.37, 1.0, &heff, &cfg, &[]).unwrap();
        let diff = (whole.final_state.amplitudes() - second.final_state.amplitudes()).camax();
        assert!(diff <= 1e-11);
    }

    #[test]
    fn resuming_from_trace_is_bit_identical() {
        let heff = rabi_heff();
        let prop = Propagator::new(&heff, &PropagationConfig::new(0.03).unwrap(), &[0.25, 0.5]);
        let psi0 = StateVector::basis(2, 0);
        let trace = prop.trace(&psi0, 0.0, 1.0).unwrap();
        for &t in &[0.1111, 0.25, 0.3, 0.5, 0.99, 1.0] {
            let direct = prop.evolve(&psi0, 0.0, t, |_, _| {}).unwrap();
            assert_eq!(prop.state_at(&trace, t), direct, "t = {t}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let heff = rabi_heff();
        let psi0 = StateVector::basis(2, 0);
        let exact = expm(&(heff.matrix().matrix() * (-I))) * psi0.amplitudes();
        let err = |h: f64| {
            let out = propagate_segment(&psi0, 0.0, 1.0, &heff, &PropagationConfig::new(h).unwrap(), &[]).unwrap();
            (out.final_state.amplitudes() - &exact).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() <= 0.3 * 16.0, "ratio {ratio}");
    }

    #[test]
    fn closed_tfim_conserves_norm() {
        let m = crate::models::build_tfim(4, std::f64::consts::PI.powi(2), std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let heff = build_effective_hamiltonian(&m.hamiltonian, &JumpOperatorSet::empty(m.dim)).unwrap();
        // h = dt/20 on a 128-point grid
        let cfg = PropagationConfig::for_grid(1.0, 128, 20).unwrap();
        let out = propagate_segment(&m.psi0, 0.0, 1.0, &heff, &cfg, &[]).unwrap();
        assert!((out.final_state.squared_norm() - 1.0).abs() < 1e-10);
    }
}
