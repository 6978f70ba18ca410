//! Deterministic quantum jump (DQJ) unraveling up to three jumps.
//!
//! Every jump-order contribution `p_n rho^(n)(t)` is a weighted sum over
//! trajectories whose jump times come from [`build_grid`] and whose jump
//! operators run over all ordered tuples of the jump set. Trajectories sharing
//! a prefix of jumps share the propagation of that prefix: the trajectory set
//! is organized as a trie and walked depth first, so at most one stored
//! segment per jump level is alive at a time.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{build_grid, check_order, PointKind};
use crate::propagation::{apply_jump, EffectiveHamiltonian, JumpOutcome, PropagationConfig, Propagator, TargetChain, TIME_TOL};
use crate::state::{DensityMatrix, DensityMatrixSeries, JumpOperatorSet, OperatorMatrix, StateVector, C64, NORM_EPS, ZERO};

/// One deterministic trajectory: jump times, operator indices and the
/// quadrature weight of its grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub jump_times: Vec<f64>,
    pub jump_operator_indices: Vec<usize>,
    pub grid_weight: f64,
    pub kind: PointKind,
}

impl TrajectorySpec {
    pub fn order(&self) -> usize {
        self.jump_times.len()
    }
}

/// All trajectory specs with `1..=order` jumps, in generation order.
pub fn trajectory_specs(order: usize, t_final: f64, n_grid: usize, n_jumps: usize) -> Result<Vec<TrajectorySpec>> {
    check_order(order)?;
    let mut specs = Vec::new();
    for m in 1..=order {
        let grid = build_grid(m, t_final, n_grid)?;
        for p in &grid.points {
            for ops in operator_tuples(m, n_jumps) {
                specs.push(TrajectorySpec {
                    jump_times: p.times.clone(),
                    jump_operator_indices: ops,
                    grid_weight: p.weight,
                    kind: p.kind,
                });
            }
        }
    }
    Ok(specs)
}

fn operator_tuples(len: usize, n_jumps: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n_jumps).map(move |j| {
                    let mut v = prefix.clone();
                    v.push(j);
                    v
                })
            })
            .collect();
    }
    out
}

/// Weighted sum `sum p_n rho^(n)(t)` of one jump order at the recording times.
#[derive(Debug, Clone)]
pub struct JumpOrderContribution {
    pub order: usize,
    pub weighted_sum: Vec<DMatrix<C64>>,
    /// `N_n`, the sum of the trajectory weights. For order 0 this is `p0`.
    pub norm_constant: f64,
    /// No-jump probability over `[0, T]`; only set for order 0.
    pub p0: Option<f64>,
    pub trajectories: usize,
    pub annihilated: usize,
}

impl JumpOrderContribution {
    fn empty(order: usize, dim: usize, n_records: usize) -> Self {
        Self {
            order,
            weighted_sum: vec![DMatrix::from_element(dim, dim, ZERO); n_records],
            norm_constant: 0.0,
            p0: None,
            trajectories: 0,
            annihilated: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DqjRun {
    pub order: usize,
    pub n_grid: usize,
    pub record_at: Vec<f64>,
    /// Contributions for orders `0..=order`.
    pub contributions: Vec<JumpOrderContribution>,
}

impl DqjRun {
    pub fn p0(&self) -> f64 {
        self.contributions[0].p0.unwrap_or(1.0)
    }

    /// Trajectories generated, including the zero-jump one.
    pub fn trajectory_count(&self) -> usize {
        self.contributions.iter().map(|c| c.trajectories).sum()
    }

    pub fn annihilated_count(&self) -> usize {
        self.contributions.iter().map(|c| c.annihilated).sum()
    }

    pub fn assemble(&self) -> Result<DensityMatrixSeries> {
        assemble_density(&self.contributions, &self.record_at, self.order)
    }
}

/// Default recording times `dt * {1, ..., n_grid}`.
pub fn default_record_times(t_final: f64, n_grid: usize) -> Vec<f64> {
    let dt = t_final / n_grid as f64;
    (1..=n_grid).map(|k| if k == n_grid { t_final } else { k as f64 * dt }).collect()
}

#[derive(Debug)]
struct Node {
    time: f64,
    op: usize,
    /// Grid weight if a trajectory ends at this node.
    leaf: Option<f64>,
    children: Vec<Node>,
}

impl Node {
    fn leaves(&self) -> usize {
        self.leaf.is_some() as usize + self.children.iter().map(Node::leaves).sum::<usize>()
    }
}

fn insert(nodes: &mut Vec<Node>, spec: &TrajectorySpec, depth: usize) {
    let (t, op) = (spec.jump_times[depth], spec.jump_operator_indices[depth]);
    let idx = match nodes.iter().position(|n| n.time.to_bits() == t.to_bits() && n.op == op) {
        Some(i) => i,
        None => {
            nodes.push(Node { time: t, op, leaf: None, children: Vec::new() });
            nodes.len() - 1
        }
    };
    if depth + 1 == spec.order() {
        nodes[idx].leaf = Some(spec.grid_weight);
    } else {
        insert(&mut nodes[idx].children, spec, depth + 1);
    }
}

fn sort_trie(nodes: &mut [Node]) {
    nodes.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.op.cmp(&b.op)));
    for n in nodes {
        sort_trie(&mut n.children);
    }
}

struct Walker<'a> {
    prop: Propagator,
    chain: TargetChain,
    jumps: &'a JumpOperatorSet,
    t_final: f64,
    max_order: usize,
    record_at: &'a [f64],
    contributions: Vec<JumpOrderContribution>,
}

impl Walker<'_> {
    /// Applies `node`'s jump to `pre` (unnormalized), then continues the
    /// trajectory to `T`. `records` holds the path's states at the recording
    /// times before the jump.
    fn visit(&mut self, node: &Node, pre: &StateVector, weight: f64, depth: usize, records: &[StateVector]) -> Result<()> {
        let jumped = match apply_jump(pre, self.jumps.get(node.op))? {
            JumpOutcome::Jumped { state, weight: w } => (state, weight * w),
            JumpOutcome::Annihilated => {
                self.mark_annihilated(node, depth);
                return Ok(());
            }
        };
        let (state, weight) = jumped;
        let tau = node.time;
        let tol = TIME_TOL * self.t_final.abs().max(1.0);

        let mut records = records.to_vec();
        let first_after = self.record_at.partition_point(|&t| t < tau - tol);
        let trace = if node.children.is_empty() {
            let mut idx = first_after;
            let record_at = self.record_at;
            if idx < record_at.len() && (record_at[idx] - tau).abs() <= tol {
                records[idx] = state.clone();
                idx += 1;
            }
            let fin = self.chain.evolve(&self.prop, &state, tau, |t, psi| {
                while idx < record_at.len() && (record_at[idx] - t).abs() <= tol {
                    records[idx] = psi.clone();
                    idx += 1;
                }
            });
            debug_assert_eq!(idx, record_at.len());
            Err(fin)
        } else {
            let trace = self.prop.trace(&state, tau, self.t_final)?;
            for (slot, &t) in records.iter_mut().zip(self.record_at).skip(first_after) {
                *slot = self.prop.state_at(&trace, t);
            }
            Ok(trace)
        };
        let final_norm = match &trace {
            Ok(tr) => tr.final_state().squared_norm(),
            Err(fin) => fin.squared_norm(),
        };

        let order = depth + 1;
        if let Some(grid_weight) = node.leaf {
            let density = if order < self.max_order { weight * final_norm } else { weight };
            let p = grid_weight * density;
            let contrib = &mut self.contributions[order];
            contrib.trajectories += 1;
            contrib.norm_constant += p;
            if p > 0.0 {
                for (acc, psi) in contrib.weighted_sum.iter_mut().zip(&records) {
                    let n2 = psi.squared_norm();
                    if n2 <= NORM_EPS {
                        return Err(Error::NormUnderflow(n2));
                    }
                    let a = psi.amplitudes();
                    *acc += (a * a.adjoint()) * C64::new(p / n2, 0.0);
                }
            }
        }

        if let Ok(trace) = trace {
            let mut cached: Option<(f64, StateVector)> = None;
            for child in &node.children {
                let pre = match &cached {
                    Some((t, s)) if t.to_bits() == child.time.to_bits() => s.clone(),
                    _ => {
                        let s = self.prop.state_at(&trace, child.time);
                        cached = Some((child.time, s.clone()));
                        s
                    }
                };
                self.visit(child, &pre, weight, depth + 1, &records)?;
            }
        }
        Ok(())
    }

    fn mark_annihilated(&mut self, node: &Node, depth: usize) {
        if node.leaf.is_some() {
            let c = &mut self.contributions[depth + 1];
            c.trajectories += 1;
            c.annihilated += 1;
        }
        for child in &node.children {
            self.mark_annihilated(child, depth + 1);
        }
    }
}

pub(crate) fn check_inputs(h: &OperatorMatrix, jumps: &JumpOperatorSet, psi0: &StateVector, t_final: f64, record_at: &[f64]) -> Result<()> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    if (psi0.squared_norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Config(format!("initial state must be unit norm, got {}", psi0.squared_norm())));
    }
    if t_final.is_nan() || t_final <= 0.0 {
        return Err(Error::Config(format!("final time must be positive, got {t_final}")));
    }
    let tol = TIME_TOL * t_final.max(1.0);
    if record_at.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("recording times must be strictly increasing".into()));
    }
    if let Some(&bad) = record_at.iter().find(|&&t| t < -tol || t > t_final + tol) {
        return Err(Error::Config(format!("recording time {bad} outside [0, {t_final}]")));
    }
    let _ = jumps;
    Ok(())
}

/// Runs the DQJ method up to `order` jumps.
#[allow(clippy::too_many_arguments)]
pub fn run_dqj(
    h: &OperatorMatrix,
    jumps: &JumpOperatorSet,
    psi0: &StateVector,
    t_final: f64,
    order: usize,
    n_grid: usize,
    cfg: &PropagationConfig,
    record_at: &[f64],
) -> Result<DqjRun> {
    check_order(order)?;
    check_inputs(h, jumps, psi0, t_final, record_at)?;
    let heff = EffectiveHamiltonian::build(h, jumps)?;
    let prop = Propagator::new(&heff, cfg, record_at);
    let dim = h.dim();
    let n_rec = record_at.len();

    let zero = prop.trace(psi0, 0.0, t_final)?;
    // without jump operators the evolution is unitary; drop integrator drift
    let p0 = if jumps.is_empty() { 1.0 } else { zero.final_state().squared_norm() };
    let zero_records: Vec<StateVector> = record_at.iter().map(|&t| prop.state_at(&zero, t)).collect();
    let mut c0 = JumpOrderContribution::empty(0, dim, n_rec);
    for (acc, psi) in c0.weighted_sum.iter_mut().zip(&zero_records) {
        *acc = psi.outer_product_normalized()?.into_matrix() * C64::new(p0, 0.0);
    }
    c0.norm_constant = p0;
    c0.p0 = Some(p0);
    c0.trajectories = 1;

    let mut contributions = vec![c0];
    contributions.extend((1..=order).map(|m| JumpOrderContribution::empty(m, dim, n_rec)));

    if !jumps.is_empty() {
        let specs = trajectory_specs(order, t_final, n_grid, jumps.len())?;
        let mut roots = Vec::new();
        for spec in &specs {
            insert(&mut roots, spec, 0);
        }
        sort_trie(&mut roots);
        debug_assert_eq!(roots.iter().map(Node::leaves).sum::<usize>(), specs.len());
        drop(specs);

        let chain = TargetChain::new(&prop, t_final, record_at);
        let mut walker = Walker { prop, chain, jumps, t_final, max_order: order, record_at, contributions };
        let mut cached: Option<(f64, StateVector)> = None;
        for root in &roots {
            let pre = match &cached {
                Some((t, s)) if t.to_bits() == root.time.to_bits() => s.clone(),
                _ => {
                    let s = walker.prop.state_at(&zero, root.time);
                    cached = Some((root.time, s.clone()));
                    s
                }
            };
            walker.visit(root, &pre, 1.0, 0, &zero_records)?;
        }
        contributions = walker.contributions;
    }

    Ok(DqjRun { order, n_grid, record_at: record_at.to_vec(), contributions })
}

/// Result of integrating a single trajectory from `t = 0` without any reuse.
#[derive(Debug, Clone)]
pub struct ScratchTrajectory {
    /// Unnormalized states at the recording times.
    pub records: Vec<StateVector>,
    pub final_state: StateVector,
    /// Product of the jump weights `<L^dagger L>` on the pre-jump states.
    pub jump_weight: f64,
}

/// Integrates one trajectory from scratch segment by segment. Used to check
/// the shared-prefix evaluation in [`run_dqj`]. Returns `None` if a jump
/// annihilates the state.
pub fn evaluate_trajectory(
    h: &OperatorMatrix,
    jumps: &JumpOperatorSet,
    psi0: &StateVector,
    t_final: f64,
    cfg: &PropagationConfig,
    record_at: &[f64],
    spec: &TrajectorySpec,
) -> Result<Option<ScratchTrajectory>> {
    let heff = EffectiveHamiltonian::build(h, jumps)?;
    let prop = Propagator::new(&heff, cfg, record_at);
    let tol = TIME_TOL * t_final.abs().max(1.0);
    let mut records = vec![StateVector::zeros(h.dim()); record_at.len()];
    let mut state = psi0.clone();
    let mut t0 = 0.0;
    let mut weight = 1.0;
    let mut stops: Vec<(f64, Option<usize>)> = spec
        .jump_times
        .iter()
        .copied()
        .zip(spec.jump_operator_indices.iter().map(|&j| Some(j)))
        .collect();
    stops.push((t_final, None));
    for (t1, op) in stops {
        let trace = prop.trace(&state, t0, t1)?;
        for (i, &t) in record_at.iter().enumerate() {
            let in_segment = t >= t0 - tol && (t < t1 - tol || (op.is_none() && t <= t1 + tol));
            if in_segment {
                records[i] = prop.state_at(&trace, t);
            }
        }
        state = trace.final_state().clone();
        if let Some(j) = op {
            match apply_jump(&state, jumps.get(j))? {
                JumpOutcome::Jumped { state: s, weight: w } => {
                    weight *= w;
                    state = s;
                }
                JumpOutcome::Annihilated => return Ok(None),
            }
        }
        t0 = t1;
    }
    Ok(Some(ScratchTrajectory { records, final_state: state, jump_weight: weight }))
}

/// Trace-preserving assembly
/// `rho(t) = p0 rho0(t) + (1 - p0) / (N_1 + ... + N_n) * sum_n p_n rho^(n)(t)`.
pub fn assemble_density(contributions: &[JumpOrderContribution], record_at: &[f64], order: usize) -> Result<DensityMatrixSeries> {
    check_order(order)?;
    let zero = contributions
        .iter()
        .find(|c| c.order == 0)
        .ok_or_else(|| Error::Config("missing zero-jump contribution".into()))?;
    let p0 = zero.p0.ok_or_else(|| Error::Config("zero-jump contribution carries no p0".into()))?;
    let higher: Vec<&JumpOrderContribution> = (1..=order)
        .map(|m| {
            contributions
                .iter()
                .find(|c| c.order == m)
                .ok_or_else(|| Error::Config(format!("missing order-{m} contribution")))
        })
        .collect::<Result<_>>()?;
    let mass: f64 = higher.iter().map(|c| c.norm_constant).sum();
    let remainder = 1.0 - p0;
    let scale = if remainder.abs() <= NORM_EPS {
        0.0
    } else if mass <= NORM_EPS {
        return Err(Error::DegenerateNormalization(mass));
    } else {
        remainder / mass
    };

    let states = (0..record_at.len())
        .map(|i| {
            let mut rho = zero.weighted_sum[i].clone();
            for c in &higher {
                rho += &c.weighted_sum[i] * C64::new(scale, 0.0);
            }
            DensityMatrix::from_matrix(rho).hermitized()
        })
        .collect();
    Ok(DensityMatrixSeries::new(record_at.to_vec(), states))
}

/// Inputs of the first-order grid error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBoundInputs {
    /// Bound on the total jump rate `<sum L^dagger L>`.
    pub l0: f64,
    /// Bound on the norm of the no-jump generator.
    pub l_norm_bound: f64,
    pub z_min: f64,
    pub p0: f64,
    pub t_final: f64,
    pub n_grid: usize,
}

impl ErrorBoundInputs {
    /// `l0 = lambda_max(sum L^dagger L)`, `||L|| <= 2 ||H_eff|| + ||sum L^dagger L||`
    /// with `||H_eff|| <= ||H|| + ||sum L^dagger L|| / 2`.
    pub fn from_model(h: &OperatorMatrix, jumps: &JumpOperatorSet, p0: f64, t_final: f64, n_grid: usize) -> Self {
        let decay = jumps.decay_sum();
        let decay_norm = decay.hermitian_norm();
        let heff_norm = h.hermitian_norm() + 0.5 * decay_norm;
        Self {
            l0: decay_norm,
            l_norm_bound: 2.0 * heff_norm + decay_norm,
            z_min: p0.clamp(f64::MIN_POSITIVE, 1.0),
            p0,
            t_final,
            n_grid,
        }
    }
}

/// `(1 - p0) * 3 l0 ||L||^2 T^3 / (8 N^2)`: the midpoint-rule error of the
/// first-order jump-time integral, valid for small loss (`1/z_min ~ 1`).
pub fn error_bound_order1(inputs: &ErrorBoundInputs) -> Result<f64> {
    let ErrorBoundInputs { l0, l_norm_bound, z_min, p0, t_final, n_grid } = *inputs;
    if l0 < 0.0 || l_norm_bound < 0.0 || t_final <= 0.0 || n_grid == 0 {
        return Err(Error::Config("error bound inputs must be positive".into()));
    }
    if !(z_min > 0.0 && z_min <= 1.0) || !(0.0..=1.0).contains(&p0) {
        return Err(Error::Config("z_min must lie in (0, 1] and p0 in [0, 1]".into()));
    }
    let n = n_grid as f64;
    Ok((1.0 - p0) * 3.0 * l0 * l_norm_bound.powi(2) * t_final.powi(3) / (8.0 * n * n))
}

/// Leading-order probability of more than `order` jumps for a Poisson process
/// with rate `gamma_eff`: `(gamma_eff T)^(n+1) / (n+1)!`, squared on request.
pub fn poisson_plateau(gamma_eff: f64, t_final: f64, order: usize, squared: bool) -> f64 {
    let x = gamma_eff * t_final;
    let k = order + 1;
    let tail = x.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
    if squared {
        tail * tail
    } else {
        tail
    }
}
