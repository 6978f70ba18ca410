//! Stochastic quantum-jump baseline with the first jump restricted to the
//! one-or-more-jump sector.
//!
//! The zero-jump branch is computed once and enters the ensemble with its
//! exact weight `p0`. Every sampled trajectory draws its first norm threshold
//! from `(p0, 1]`, so it jumps at least once before `T`. Later thresholds are
//! drawn from `(0, 1]` against the renormalized post-jump norm.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dqj::check_inputs;
use crate::error::{Error, Result};
use crate::propagation::{apply_jump, EffectiveHamiltonian, JumpOutcome, PropagationConfig, Propagator, TIME_TOL};
use crate::state::{DensityMatrix, DensityMatrixSeries, JumpOperatorSet, OperatorMatrix, StateVector, C64, NORM_EPS};

/// Attempts per trajectory before giving up on annihilating jumps.
const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SqjConfig {
    pub n_traj: usize,
    pub seed: u64,
    #[serde(default = "default_bisection_tol")]
    pub bisection_tol: f64,
}

fn default_bisection_tol() -> f64 {
    1e-10
}

impl SqjConfig {
    pub fn new(n_traj: usize, seed: u64) -> Result<Self> {
        let cfg = Self { n_traj, seed, bisection_tol: default_bisection_tol() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::Config("n_traj must be at least 1".into()));
        }
        if !(self.bisection_tol > 0.0 && self.bisection_tol <= 1e-6) {
            return Err(Error::Config(format!("bisection_tol must lie in (0, 1e-6], got {}", self.bisection_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqjTrajectory {
    /// `(time, operator index)`, strictly increasing in time.
    pub jump_events: Vec<(f64, usize)>,
    /// Unit-norm states at the recording times.
    pub recorded_states: Vec<(f64, StateVector)>,
}

#[derive(Debug, Clone)]
pub struct SqjRun {
    pub p0: f64,
    /// Normalized zero-jump density matrices at the recording times.
    pub zero_series: DensityMatrixSeries,
    pub trajectories: Vec<SqjTrajectory>,
    /// Trajectories redrawn after an annihilating jump.
    pub resampled: usize,
    pub record_at: Vec<f64>,
}

impl SqjRun {
    pub fn assemble(&self) -> Result<DensityMatrixSeries> {
        assemble_sqj(self.p0, &self.zero_series, &self.trajectories, &self.record_at)
    }

    pub fn jump_count(&self) -> usize {
        self.trajectories.iter().map(|t| t.jump_events.len()).sum()
    }
}

enum Segment {
    Jump { time: f64, state: StateVector },
    NoJump(StateVector),
}

struct Recorder<'a> {
    times: &'a [f64],
    next: usize,
    states: Vec<(f64, StateVector)>,
}

impl<'a> Recorder<'a> {
    fn new(times: &'a [f64]) -> Self {
        Self { times, next: 0, states: Vec::with_capacity(times.len()) }
    }

    fn visit(&mut self, t: f64, psi: &StateVector) -> Result<()> {
        let tol = TIME_TOL * t.abs().max(1.0);
        while self.next < self.times.len() && self.times[self.next] <= t + tol {
            let r = self.times[self.next];
            debug_assert!((r - t).abs() <= tol, "recording time {r} skipped at {t}");
            self.states.push((r, psi.normalized()?));
            self.next += 1;
        }
        Ok(())
    }
}

/// Propagates from `t0` until the squared norm reaches `s` or `t1` is hit.
fn advance(
    prop: &Propagator,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    s: f64,
    tol: f64,
    mut rec: Option<&mut Recorder>,
) -> Result<Segment> {
    if (psi0.squared_norm() - s).abs() <= tol * s {
        return Ok(Segment::Jump { time: t0, state: psi0.clone() });
    }
    let pts = prop.boundaries(t0, t1);
    let mut psi = psi0.clone();
    if let Some(r) = rec.as_deref_mut() {
        r.visit(t0, &psi)?;
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let next = StateVector::from_dvector(prop.step(psi.amplitudes(), b - a));
        let nb = next.squared_norm();
        if nb <= s {
            if (nb - s).abs() <= tol * s {
                return Ok(Segment::Jump { time: b, state: next });
            }
            return Ok(bisect(prop, &psi, a, b, s, tol));
        }
        psi = next;
        if let Some(r) = rec.as_deref_mut() {
            r.visit(b, &psi)?;
        }
    }
    Ok(Segment::NoJump(psi))
}

/// Bisection on the step length inside `[a, b]`, re-integrating from `psi_a`.
fn bisect(prop: &Propagator, psi_a: &StateVector, a: f64, b: f64, s: f64, tol: f64) -> Segment {
    let (mut lo, mut hi) = (0.0, b - a);
    let mut best = StateVector::from_dvector(prop.step(psi_a.amplitudes(), hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let psi = StateVector::from_dvector(prop.step(psi_a.amplitudes(), mid));
        let n = psi.squared_norm();
        if (n - s).abs() <= tol * s {
            return Segment::Jump { time: a + mid, state: psi };
        }
        if n > s {
            lo = mid;
        } else {
            hi = mid;
            best = psi;
        }
    }
    Segment::Jump { time: a + hi, state: best }
}

/// Time at which the squared norm of the no-jump evolution from `t_start`
/// reaches `s`, or `None` if it stays above `s` up to `t_final`.
pub fn find_jump_time(
    psi_start: &StateVector,
    t_start: f64,
    t_final: f64,
    s: f64,
    heff: &EffectiveHamiltonian,
    cfg: &PropagationConfig,
    bisection_tol: f64,
) -> Result<Option<f64>> {
    if psi_start.dim() != heff.dim() {
        return Err(Error::DimensionMismatch { expected: heff.dim(), found: psi_start.dim() });
    }
    if t_final < t_start {
        return Err(Error::InvalidInterval { start: t_start, end: t_final });
    }
    let prop = Propagator::new(heff, cfg, &[]);
    Ok(match advance(&prop, psi_start, t_start, t_final, s, bisection_tol, None)? {
        Segment::Jump { time, .. } => Some(time),
        Segment::NoJump(_) => None,
    })
}

/// Draws an operator index with probability proportional to `<psi|L^dagger L|psi>`.
pub fn choose_jump_operator<R: Rng + ?Sized>(psi: &StateVector, jumps: &JumpOperatorSet, rng: &mut R) -> Result<usize> {
    let weights: Vec<f64> = jumps
        .operators()
        .iter()
        .map(|l| psi.apply(l).map(|v| v.squared_norm()))
        .collect::<Result<_>>()?;
    let total: f64 = weights.iter().sum();
    if total <= NORM_EPS * psi.squared_norm() {
        return Err(Error::AllAnnihilated);
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if target < acc {
            return Ok(i);
        }
    }
    Ok(last)
}

/// Uniform draw from `(0, 1]`.
fn unit_open_below<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One trajectory with at least one jump. `Ok(None)` means a jump annihilated
/// the state and the trajectory must be redrawn.
#[allow(clippy::too_many_arguments)]
fn sample_trajectory(
    prop: &Propagator,
    jumps: &JumpOperatorSet,
    psi0: &StateVector,
    t_final: f64,
    p0: f64,
    tol: f64,
    record_at: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Option<SqjTrajectory>> {
    let mut rec = Recorder::new(record_at);
    let mut events = Vec::new();
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut s = 1.0 - (1.0 - p0) * rng.random::<f64>();
    loop {
        match advance(prop, &psi, t, t_final, s, tol, Some(&mut rec))? {
            Segment::NoJump(_) => break,
            Segment::Jump { time, state } => {
                let index = match choose_jump_operator(&state, jumps, rng) {
                    Ok(i) => i,
                    Err(Error::AllAnnihilated) => return Ok(None),
                    Err(e) => return Err(e),
                };
                match apply_jump(&state, jumps.get(index))? {
                    JumpOutcome::Annihilated => return Ok(None),
                    JumpOutcome::Jumped { state, .. } => {
                        events.push((time, index));
                        psi = state;
                        t = time;
                        s = unit_open_below(rng);
                    }
                }
            }
        }
    }
    debug_assert!(!events.is_empty());
    Ok(Some(SqjTrajectory { jump_events: events, recorded_states: rec.states }))
}

pub fn run_sqj(
    h: &OperatorMatrix,
    jumps: &JumpOperatorSet,
    psi0: &StateVector,
    t_final: f64,
    cfg: &SqjConfig,
    prop_cfg: &PropagationConfig,
    record_at: &[f64],
) -> Result<SqjRun> {
    cfg.validate()?;
    check_inputs(h, jumps, psi0, t_final, record_at)?;
    if jumps.is_empty() {
        return Err(Error::Config("the stochastic baseline needs at least one jump operator".into()));
    }
    let heff = EffectiveHamiltonian::build(h, jumps)?;
    let prop = Propagator::new(&heff, prop_cfg, record_at);

    let mut zero_rec = Recorder::new(record_at);
    let zero = match advance(&prop, psi0, 0.0, t_final, 0.0, 0.0, Some(&mut zero_rec))? {
        Segment::NoJump(psi) => psi,
        Segment::Jump { .. } => unreachable!("threshold zero is never reached"),
    };
    let p0 = zero.squared_norm();
    let zero_series = DensityMatrixSeries::new(
        record_at.to_vec(),
        zero_rec
            .states
            .iter()
            .map(|(_, psi)| psi.outer_product_normalized())
            .collect::<Result<_>>()?,
    );

    let mut trajectories = Vec::with_capacity(cfg.n_traj);
    let mut resampled = 0;
    if 1.0 - p0 > NORM_EPS {
        for index in 0..cfg.n_traj {
            let mut rng = trajectory_rng(cfg.seed, index);
            let mut attempts = 0;
            let traj = loop {
                if let Some(t) =
                    sample_trajectory(&prop, jumps, psi0, t_final, p0, cfg.bisection_tol, record_at, &mut rng)?
                {
                    break t;
                }
                resampled += 1;
                attempts += 1;
                if attempts >= MAX_RESAMPLES {
                    return Err(Error::AllAnnihilated);
                }
            };
            trajectories.push(traj);
        }
    }
    Ok(SqjRun { p0, zero_series, trajectories, resampled, record_at: record_at.to_vec() })
}

/// `rho(t) = p0 rho0(t) + (1 - p0) / N * sum_k |psi_k(t)><psi_k(t)|`.
pub fn assemble_sqj(
    p0: f64,
    zero_series: &DensityMatrixSeries,
    trajectories: &[SqjTrajectory],
    record_at: &[f64],
) -> Result<DensityMatrixSeries> {
    if zero_series.len() != record_at.len() {
        return Err(Error::DimensionMismatch { expected: record_at.len(), found: zero_series.len() });
    }
    let rest = if trajectories.is_empty() { 0.0 } else { (1.0 - p0) / trajectories.len() as f64 };
    let mut states = Vec::with_capacity(record_at.len());
    for (i, rho0) in zero_series.states.iter().enumerate() {
        let mut acc = rho0.matrix() * C64::new(if trajectories.is_empty() { 1.0 } else { p0 }, 0.0);
        for traj in trajectories {
            let psi = traj
                .recorded_states
                .get(i)
                .map(|(_, psi)| psi)
                .ok_or(Error::DimensionMismatch { expected: record_at.len(), found: traj.recorded_states.len() })?;
            let a = psi.amplitudes();
            acc += a * a.adjoint() * C64::new(rest, 0.0);
        }
        states.push(DensityMatrix::from_matrix(acc).hermitized());
    }
    Ok(DensityMatrixSeries::new(record_at.to_vec(), states))
}
