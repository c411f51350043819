//! Chayes–Machta and Swendsen–Wang dynamics on mean-field random-cluster
//! states.
//!
//! On the complete graph both chains depend on a configuration only through
//! its component sizes, so the state is a [`ComponentMultiset`]. A CM step
//! activates each component with probability `1/q` and replaces all active
//! components by the components of `G(A, β/n)` on the `A` active vertices.
//! An SW step colours every component uniformly among `q` colours and
//! percolates inside every colour class.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MixerError, Result};
use crate::phase_diagram::{ModelParams, NoiseVariances, RcThresholds};
use crate::random_graph::{component_stats, ComponentMultiset, ComponentStats, ErSampler};
use crate::rng::{run_replicas, ReplicaRng};
use crate::stats::{ExitProbabilities, ExitSide};

/// Random-cluster state on `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcState {
    pub components: ComponentMultiset,
    pub n: usize,
}

impl RcState {
    pub fn new(components: ComponentMultiset) -> Self {
        let n = components.total() as usize;
        Self { components, n }
    }

    pub fn singletons(n: usize) -> Self {
        Self::new(ComponentMultiset::singletons(n))
    }

    pub fn l1(&self) -> u64 {
        self.components.largest() as u64
    }

    pub fn stats(&self) -> ComponentStats {
        component_stats(&self.components)
    }
}

/// What happened in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Whether the largest component (first in stored order) was active.
    pub giant_activated: bool,
    /// Number of vertices whose components were resampled.
    pub activated: u64,
}

/// Per-step record of a trajectory; `t = 0` is the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub l1: u64,
    pub l2: u64,
    pub r2_minus: u64,
    pub r3_minus: u128,
    pub i1: u64,
    pub giant_activated: bool,
    pub activated: u64,
}

impl StepRecord {
    pub fn observe(t: usize, state: &RcState, info: Option<StepInfo>) -> Self {
        let s = state.stats();
        let info = info.unwrap_or(StepInfo {
            giant_activated: false,
            activated: 0,
        });
        Self {
            t,
            l1: s.l1,
            l2: s.l2,
            r2_minus: s.r2_minus,
            r3_minus: s.r3_minus,
            i1: s.i1,
            giant_activated: info.giant_activated,
            activated: info.activated,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CmTrajectory {
    pub records: Vec<StepRecord>,
}

impl CmTrajectory {
    pub fn l1_series(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.l1).collect()
    }
}

/// Samples the product initialisation `G(n, λ0/n)`.
pub fn init_product<R: Rng + ?Sized>(n: usize, lambda0: f64, rng: &mut R) -> RcState {
    let p = (lambda0 / n as f64).clamp(0.0, 1.0);
    RcState::new(ErSampler::new().sample(n, p, rng))
}

/// One CM step.
pub fn cm_step<R: Rng + ?Sized>(state: &RcState, params: &ModelParams, rng: &mut R) -> (RcState, StepInfo) {
    let p_active = 1.0 / params.q;
    let active: Vec<bool> = (0..state.components.len())
        .map(|_| rng.random::<f64>() < p_active)
        .collect();
    cm_step_with_activation(state, params, &active, rng)
}

/// CM percolation step for a given activation pattern (`active[i]` refers to
/// the `i`-th component in stored order).
pub fn cm_step_with_activation<R: Rng + ?Sized>(
    state: &RcState,
    params: &ModelParams,
    active: &[bool],
    rng: &mut R,
) -> (RcState, StepInfo) {
    assert_eq!(
        active.len(),
        state.components.len(),
        "one activation flag per component"
    );
    let mut inactive = Vec::with_capacity(state.components.len());
    let mut activated = 0u64;
    for (&size, &on) in state.components.sizes().iter().zip(active) {
        if on {
            activated += size as u64;
        } else {
            inactive.push(size);
        }
    }
    let fresh = ErSampler::new().sample(activated as usize, params.edge_prob(), rng);
    let kept = ComponentMultiset::from_sorted_unchecked(inactive);
    let info = StepInfo {
        giant_activated: active.first().copied().unwrap_or(false),
        activated,
    };
    (
        RcState {
            components: kept.union(&fresh),
            n: state.n,
        },
        info,
    )
}

/// One SW step; `q` must be an integer.
pub fn sw_step<R: Rng + ?Sized>(state: &RcState, params: &ModelParams, rng: &mut R) -> Result<(RcState, StepInfo)> {
    let q = params
        .integer_q()
        .ok_or_else(|| MixerError::Type(format!("SW dynamics needs integer q, got {}", params.q)))?;
    let mut class_sizes = vec![0usize; q];
    for &size in state.components.sizes() {
        class_sizes[rng.random_range(0..q)] += size as usize;
    }
    let mut sampler = ErSampler::new();
    let p = params.edge_prob();
    let mut out = ComponentMultiset::empty();
    for &a in &class_sizes {
        if a > 0 {
            out = out.union(&sampler.sample(a, p, rng));
        }
    }
    let info = StepInfo {
        giant_activated: true,
        activated: state.n as u64,
    };
    Ok((
        RcState {
            components: out,
            n: state.n,
        },
        info,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RcPhase {
    Ordered,
    Disordered,
}

/// Ordered iff `L1 ≥ θ_* n`.
pub fn classify_rc_phase(state: &RcState, thresholds: &RcThresholds) -> RcPhase {
    classify_l1(state.l1(), state.n, thresholds.theta_star)
}

pub fn classify_l1(l1: u64, n: usize, theta_star: f64) -> RcPhase {
    if l1 as f64 >= theta_star * n as f64 {
        RcPhase::Ordered
    } else {
        RcPhase::Disordered
    }
}

/// Evaluation of the good-set predicates for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodSetReport {
    pub k: f64,
    /// Giant within `K √n log n` of `θ_* n`; `L2 ≤ K log n`; `R2^- ≤ Kn`;
    /// `R3^- ≤ Kn`; `I1 ≥ n/K`.
    pub items: [bool; 5],
    /// `|(1/q)(1-1/q) R2^-/n - v_t|`.
    pub variance_deviation: f64,
    /// Whether the deviation is within `log² n / √n`.
    pub variance_ok: bool,
    /// Smallest `K` for which all five items hold.
    pub required_k: f64,
}

impl GoodSetReport {
    pub fn in_good_set(&self) -> bool {
        self.items.iter().all(|&b| b) && self.variance_ok
    }
}

/// Good-set predicates at step `t` for a state given by its record.
pub fn good_set_check_record(
    record: &StepRecord,
    n: usize,
    theta_star: f64,
    q: f64,
    k: f64,
    variances: &NoiseVariances,
) -> GoodSetReport {
    let nf = n as f64;
    let ln = nf.ln();
    let sq = nf.sqrt();
    let giant_dev = (record.l1 as f64 - theta_star * nf).abs();
    let r2m = record.r2_minus as f64;
    let r3m = record.r3_minus as f64;
    let i1 = record.i1 as f64;
    let items = [
        giant_dev <= k * sq * ln,
        record.l2 as f64 <= k * ln,
        r2m <= k * nf,
        r3m <= k * nf,
        i1 >= nf / k,
    ];
    let required_k = [
        giant_dev / (sq * ln),
        record.l2 as f64 / ln,
        r2m / nf,
        r3m / nf,
        nf / i1,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let variance_deviation = ((1.0 / q) * (1.0 - 1.0 / q) * r2m / nf - variances.at(record.t)).abs();
    GoodSetReport {
        k,
        items,
        variance_deviation,
        variance_ok: variance_deviation <= ln * ln / sq,
        required_k,
    }
}

/// Good-set predicates for `state` at step `t`.
pub fn good_set_check(
    state: &RcState,
    t: usize,
    theta_star: f64,
    q: f64,
    k: f64,
    variances: &NoiseVariances,
) -> GoodSetReport {
    good_set_check_record(
        &StepRecord::observe(t, state, None),
        state.n,
        theta_star,
        q,
        k,
        variances,
    )
}

/// First times `L_t > θ_* n + γ√n` and `L_t < θ_* n - γ√n`.
pub fn exit_window_times(l1: &[u64], theta_star: f64, gamma: f64, n: usize) -> (Option<usize>, Option<usize>) {
    let centre = theta_star * n as f64;
    let half = gamma * (n as f64).sqrt();
    let plus = l1.iter().position(|&l| l as f64 > centre + half);
    let minus = l1.iter().position(|&l| (l as f64) < centre - half);
    (plus, minus)
}

/// Default horizon `⌈20 ln n⌉` for exit and equilibration runs.
pub fn default_horizon(n: usize) -> usize {
    (20.0 * (n as f64).ln()).ceil() as usize
}

/// Which chain to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dynamics {
    ChayesMachta,
    SwendsenWang,
}

/// One step of the selected dynamics.
pub fn step<R: Rng + ?Sized>(
    dynamics: Dynamics,
    state: &RcState,
    params: &ModelParams,
    rng: &mut R,
) -> Result<(RcState, StepInfo)> {
    match dynamics {
        Dynamics::ChayesMachta => Ok(cm_step(state, params, rng)),
        Dynamics::SwendsenWang => sw_step(state, params, rng),
    }
}

/// Result of one replica of a saddle-exit experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmExitRun {
    pub side: ExitSide,
    pub exit_step: Option<usize>,
    pub trajectory: CmTrajectory,
}

/// Settings for [`estimate_exit_probs`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitExperiment {
    pub dynamics: Dynamics,
    pub params: ModelParams,
    pub lambda0: f64,
    pub theta_star: f64,
    pub gamma: f64,
    pub replicas: usize,
    pub max_steps: usize,
    pub master_seed: u64,
}

fn run_exit_replica(exp: &ExitExperiment, rng: &mut ReplicaRng) -> Result<CmExitRun> {
    let n = exp.params.n;
    let mut state = init_product(n, exp.lambda0, rng);
    let mut records = vec![StepRecord::observe(0, &state, None)];
    let side_of = |l1: u64| match exit_window_times(&[l1], exp.theta_star, exp.gamma, n) {
        (Some(_), _) => Some(ExitSide::Right),
        (_, Some(_)) => Some(ExitSide::Left),
        _ => None,
    };
    let mut t = 0;
    loop {
        if let Some(side) = side_of(state.l1()) {
            return Ok(CmExitRun {
                side,
                exit_step: Some(t),
                trajectory: CmTrajectory { records },
            });
        }
        if t >= exp.max_steps {
            return Ok(CmExitRun {
                side: ExitSide::Timeout,
                exit_step: None,
                trajectory: CmTrajectory { records },
            });
        }
        let (next, info) = step(exp.dynamics, &state, &exp.params, rng)?;
        state = next;
        t += 1;
        records.push(StepRecord::observe(t, &state, Some(info)));
    }
}

/// Exit frequencies from `[θ_* n - γ√n, θ_* n + γ√n]` for chains started at
/// `G(n, λ0/n)`; replicas that stay inside for `max_steps` steps time out.
pub fn estimate_exit_probs(
    exp: &ExitExperiment,
    threads: Option<usize>,
) -> Result<(ExitProbabilities, Vec<CmExitRun>)> {
    let runs: Result<Vec<CmExitRun>> = run_replicas(exp.replicas, exp.master_seed, threads, |_, rng| {
        run_exit_replica(exp, rng)
    })
    .into_iter()
    .collect();
    let runs = runs?;
    Ok((ExitProbabilities::from_sides(runs.iter().map(|r| r.side)), runs))
}

/// CM exit frequencies; see [`estimate_exit_probs`].
#[allow(clippy::too_many_arguments)]
pub fn estimate_exit_probs_cm(
    n: usize,
    lambda0: f64,
    params: &ModelParams,
    theta_star: f64,
    gamma: f64,
    replicas: usize,
    max_steps: usize,
    master_seed: u64,
) -> Result<ExitProbabilities> {
    let exp = ExitExperiment {
        dynamics: Dynamics::ChayesMachta,
        params: ModelParams { n, ..*params },
        lambda0,
        theta_star,
        gamma,
        replicas,
        max_steps,
        master_seed,
    };
    Ok(estimate_exit_probs(&exp, None)?.0)
}

/// Settings for [`run_quasi_equilibration`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibrationConfig {
    pub steps: usize,
    /// Ordered settlement tolerance, as a fraction of `n`.
    pub delta: f64,
    /// Disordered settlement threshold `L1 ≤ c ln n`.
    pub disorder_c: f64,
}

impl EquilibrationConfig {
    pub fn for_n(n: usize) -> Self {
        Self {
            steps: default_horizon(n),
            delta: 0.05,
            disorder_c: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiEquilibration {
    pub final_phase: RcPhase,
    pub settled: bool,
    /// Whether every recorded state was classified ordered.
    pub ordered_throughout: bool,
    pub trajectory: CmTrajectory,
}

/// Runs `cfg.steps` steps from `state0` and reports the phase reached.
pub fn run_quasi_equilibration<R: Rng + ?Sized>(
    dynamics: Dynamics,
    state0: RcState,
    params: &ModelParams,
    thresholds: &RcThresholds,
    cfg: &EquilibrationConfig,
    rng: &mut R,
) -> Result<QuasiEquilibration> {
    let n = state0.n;
    let mut state = state0;
    let mut records = vec![StepRecord::observe(0, &state, None)];
    for t in 1..=cfg.steps {
        let (next, info) = step(dynamics, &state, params, rng)?;
        state = next;
        records.push(StepRecord::observe(t, &state, Some(info)));
    }
    let ordered_throughout = records
        .iter()
        .all(|r| classify_l1(r.l1, n, thresholds.theta_star) == RcPhase::Ordered);
    let final_phase = classify_rc_phase(&state, thresholds);
    let l1 = state.l1() as f64;
    let nf = n as f64;
    let settled = match final_phase {
        RcPhase::Ordered => (l1 - thresholds.theta_r * nf).abs() <= cfg.delta * nf,
        RcPhase::Disordered => l1 <= cfg.disorder_c * nf.ln(),
    };
    Ok(QuasiEquilibration {
        final_phase,
        settled,
        ordered_throughout,
        trajectory: CmTrajectory { records },
    })
}
