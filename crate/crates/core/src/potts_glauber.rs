//! Glauber dynamics for the mean-field Potts model, tracked through the
//! colour-count vector (an exact Markov chain on the complete graph).
//!
//! A step picks a uniform vertex (its colour `k` with probability
//! `counts_k / n`) and recolours it to `j` with probability proportional to
//! `exp((β/n)(counts_j - 1{j = k}))`, i.e. conditionally on the other
//! `n - 1` spins.
//!
//! Both choices are made by exponential races with one uniform per colour,
//! which makes a step equivariant under relabelling the colours together
//! with their uniforms.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{MixerError, Result};
use crate::phase_diagram::{vector_drift, PottsThresholds};
use crate::stats::ExitSide;

/// Colour counts summing to `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u32>,
    n: u32,
}

impl CountVector {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(MixerError::Domain("at least one colour is needed".into()));
        }
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        if n == 0 || n > u32::MAX as u64 {
            return Err(MixerError::Domain(format!("total count {n} out of range")));
        }
        Ok(Self { counts, n: n as u32 })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> usize {
        self.counts.len()
    }

    pub fn proportions(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn proportion(&self, colour: usize) -> f64 {
        self.counts[colour] as f64 / self.n as f64
    }
}

/// Glauber chain with a precomputed table of `exp(β c / n)`.
#[derive(Debug, Clone)]
pub struct GlauberChain {
    state: CountVector,
    beta: f64,
    weights: Vec<f64>,
    uniforms: Vec<f64>,
}

impl GlauberChain {
    pub fn new(state: CountVector, beta: f64) -> Self {
        let n = state.n as f64;
        let weights = (0..=state.n).map(|c| (beta * c as f64 / n).exp()).collect();
        let uniforms = vec![0.0; 2 * state.q()];
        Self {
            state,
            beta,
            weights,
            uniforms,
        }
    }

    pub fn state(&self) -> &CountVector {
        &self.state
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn into_state(self) -> CountVector {
        self.state
    }

    /// One update driven by `2q` uniforms in `(0, 1]`: `u[k]` races colour
    /// `k` for the updated vertex, `u[q + j]` races colour `j` as its new
    /// colour.
    pub fn step_with_uniforms(&mut self, u: &[f64]) {
        let q = self.state.q();
        debug_assert_eq!(u.len(), 2 * q);
        let counts = &mut self.state.counts;
        let mut old = usize::MAX;
        let mut best = f64::INFINITY;
        for k in 0..q {
            if counts[k] > 0 {
                let e = -u[k].ln() / counts[k] as f64;
                if e < best {
                    best = e;
                    old = k;
                }
            }
        }
        let mut new = old;
        best = f64::INFINITY;
        for j in 0..q {
            let c = counts[j] - (j == old) as u32;
            let e = -u[q + j].ln() / self.weights[c as usize];
            if e < best {
                best = e;
                new = j;
            }
        }
        counts[old] -= 1;
        counts[new] += 1;
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut u = std::mem::take(&mut self.uniforms);
        for x in u.iter_mut() {
            *x = 1.0 - rng.random::<f64>();
        }
        self.step_with_uniforms(&u);
        self.uniforms = u;
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }
}

/// One Glauber update of `counts` at inverse temperature `beta`.
pub fn glauber_step<R: Rng + ?Sized>(counts: &CountVector, beta: f64, rng: &mut R) -> CountVector {
    let mut chain = GlauberChain::new(counts.clone(), beta);
    chain.step(rng);
    chain.into_state()
}

/// Samples `ν̂^⊗(m0)`: a uniform dominant colour, then each vertex takes it
/// with probability `m0` and each other colour with probability
/// `(1 - m0)/(q - 1)`. Returns the counts and the dominant colour.
pub fn init_hat_nu<R: Rng + ?Sized>(n: u32, q: usize, m0: f64, rng: &mut R) -> Result<(CountVector, usize)> {
    if q < 2 {
        return Err(MixerError::Domain("need at least two colours".into()));
    }
    let floor = 1.0 / q as f64;
    if !(m0 >= floor - 1e-12 && m0 <= 1.0) {
        return Err(MixerError::Domain(format!("m0 = {m0} outside [1/q, 1]")));
    }
    let m0 = m0.max(floor);
    let dominant = rng.random_range(0..q);
    let binomial = |trials: u32, p: f64, rng: &mut R| -> u32 {
        if trials == 0 || p <= 0.0 {
            0
        } else if p >= 1.0 {
            trials
        } else {
            Binomial::new(trials as u64, p)
                .map(|b| b.sample(rng) as u32)
                .unwrap_or(0)
        }
    };
    let mut counts = vec![0u32; q];
    counts[dominant] = binomial(n, m0, rng);
    let mut left = n - counts[dominant];
    let others: Vec<usize> = (0..q).filter(|&k| k != dominant).collect();
    for (idx, &k) in others.iter().enumerate() {
        let remaining = (others.len() - idx) as f64;
        let c = if idx + 1 == others.len() {
            left
        } else {
            binomial(left, 1.0 / remaining, rng)
        };
        counts[k] = c;
        left -= c;
    }
    Ok((CountVector::new(counts)?, dominant))
}

/// Counts recorded every `stride` steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PottsTrajectory {
    pub stride: u64,
    pub records: Vec<(u64, Vec<u32>)>,
}

/// Runs `steps` updates, recording the counts at `t = 0, stride, 2·stride, …`.
pub fn run_recorded<R: Rng + ?Sized>(
    chain: &mut GlauberChain,
    steps: u64,
    stride: u64,
    rng: &mut R,
) -> PottsTrajectory {
    let stride = stride.max(1);
    let mut records = vec![(0, chain.state().counts().to_vec())];
    let mut t = 0;
    while t < steps {
        let chunk = stride.min(steps - t);
        chain.run(chunk, rng);
        t += chunk;
        if t.is_multiple_of(stride) {
            records.push((t, chain.state().counts().to_vec()));
        }
    }
    PottsTrajectory { stride, records }
}

/// First step at which `S_{t,coord}` leaves `[m_* - γ/√n, m_* + γ/√n]`
/// (checked from `t = 0`), as `(τ⁺, τ⁻)`; only the first exit is reported
/// and both are `None` on timeout.
pub fn saddle_exit_times_potts<R: Rng + ?Sized>(
    chain: &mut GlauberChain,
    coord: usize,
    m_star: f64,
    gamma: f64,
    max_steps: u64,
    rng: &mut R,
) -> (Option<u64>, Option<u64>) {
    let n = chain.state().n() as f64;
    let upper = (m_star + gamma / n.sqrt()) * n;
    let lower = (m_star - gamma / n.sqrt()) * n;
    let mut t = 0;
    loop {
        let c = chain.state().counts()[coord] as f64;
        if c > upper {
            return (Some(t), None);
        }
        if c < lower {
            return (None, Some(t));
        }
        if t >= max_steps {
            return (None, None);
        }
        chain.step(rng);
        t += 1;
    }
}

/// Largest pairwise difference of proportions, skipping `exclude` if given.
pub fn coordinate_gap(counts: &CountVector, exclude: Option<usize>) -> f64 {
    let (lo, hi) = counts
        .counts()
        .iter()
        .enumerate()
        .filter(|&(k, _)| Some(k) != exclude)
        .fold((u32::MAX, 0u32), |(lo, hi), (_, &c)| (lo.min(c), hi.max(c)));
    if lo > hi {
        return 0.0;
    }
    (hi - lo) as f64 / counts.n() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PottsPhase {
    Disordered,
    Ordered(usize),
    Unsettled,
}

/// Default `ℓ1` tolerance for phase classification.
pub const PHASE_TOL: f64 = 0.1;

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Classifies counts by `ℓ1` distance to the uniform point and to the `q`
/// ordered fixed points.
pub fn classify_potts_phase(counts: &CountVector, thresholds: &PottsThresholds, tol: f64) -> PottsPhase {
    let s = counts.proportions();
    let q = s.len();
    let uniform = vec![1.0 / q as f64; q];
    if l1_distance(&s, &uniform) <= tol {
        return PottsPhase::Disordered;
    }
    (0..q)
        .map(|i| (i, l1_distance(&s, &thresholds.ordered_point(i))))
        .filter(|&(_, d)| d <= tol)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(PottsPhase::Unsettled, |(i, _)| PottsPhase::Ordered(i))
}

/// Euler iteration `S ← S + d_β(S)/resolution`, returning `steps + 1`
/// proportion vectors.
pub fn deterministic_flow(s0: &[f64], beta: f64, q: usize, steps: usize, resolution: f64) -> Result<Vec<Vec<f64>>> {
    if !(resolution >= 1.0) {
        return Err(MixerError::Domain(format!(
            "resolution {resolution} must be at least 1"
        )));
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = s0.to_vec();
    vector_drift(&s, beta, q)?;
    out.push(s.clone());
    for _ in 0..steps {
        let d = vector_drift(&s, beta, q)?;
        for (x, dx) in s.iter_mut().zip(&d) {
            *x += dx / resolution;
        }
        // remove rounding drift off the simplex
        let total: f64 = s.iter().sum();
        s.iter_mut().for_each(|x| *x /= total);
        out.push(s.clone());
    }
    Ok(out)
}

/// Settings for [`run_from_hat_nu`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PottsRunConfig {
    pub max_steps: u64,
    /// Phase is classified every `stride` steps.
    pub stride: u64,
    pub tol: f64,
    /// Half-width of the saddle window, in units of `n^{-1/2}`.
    pub gamma: f64,
    /// Stop as soon as the saddle window is left, without waiting to settle.
    pub stop_at_exit: bool,
    /// Record the counts every `stride` steps.
    pub record: bool,
}

/// Outcome of one replica started from `ν̂^⊗(m0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PottsRun {
    pub dominant: usize,
    pub phase: PottsPhase,
    pub settle_step: Option<u64>,
    pub exit_side: ExitSide,
    pub exit_step: Option<u64>,
    /// Largest non-dominant coordinate gap seen before the saddle exit.
    pub max_gap_before_exit: f64,
    pub steps: u64,
    pub final_counts: Vec<u32>,
    pub trajectory: Option<PottsTrajectory>,
}

/// Runs Glauber dynamics from `ν̂^⊗(m0)`, tracking the saddle exit of the
/// dominant coordinate and the first settled phase classification.
pub fn run_from_hat_nu<R: Rng + ?Sized>(
    n: u32,
    thresholds: &PottsThresholds,
    m0: f64,
    cfg: &PottsRunConfig,
    rng: &mut R,
) -> Result<PottsRun> {
    let (counts, dominant) = init_hat_nu(n, thresholds.q, m0, rng)?;
    let mut chain = GlauberChain::new(counts, thresholds.beta);
    let nf = n as f64;
    let upper = (thresholds.m_star + cfg.gamma / nf.sqrt()) * nf;
    let lower = (thresholds.m_star - cfg.gamma / nf.sqrt()) * nf;
    let stride = cfg.stride.max(1);
    let mut exit_side = ExitSide::Timeout;
    let mut exit_step = None;
    let mut max_gap: f64 = 0.0;
    let mut phase = PottsPhase::Unsettled;
    let mut settle_step = None;
    let mut records = Vec::new();
    let mut t = 0u64;
    loop {
        if cfg.record && t.is_multiple_of(stride) {
            records.push((t, chain.state().counts().to_vec()));
        }
        if exit_step.is_none() {
            let c = chain.state().counts()[dominant] as f64;
            if c > upper {
                exit_side = ExitSide::Right;
                exit_step = Some(t);
            } else if c < lower {
                exit_side = ExitSide::Left;
                exit_step = Some(t);
            } else {
                max_gap = max_gap.max(coordinate_gap(chain.state(), Some(dominant)));
            }
        }
        if settle_step.is_none() && t.is_multiple_of(stride) {
            let p = classify_potts_phase(chain.state(), thresholds, cfg.tol);
            if p != PottsPhase::Unsettled {
                phase = p;
                settle_step = Some(t);
            }
        }
        let exited = exit_step.is_some();
        if (exited && cfg.stop_at_exit) || (exited && settle_step.is_some()) || t >= cfg.max_steps {
            break;
        }
        chain.step(rng);
        t += 1;
    }
    Ok(PottsRun {
        dominant,
        phase,
        settle_step,
        exit_side,
        exit_step,
        max_gap_before_exit: max_gap,
        steps: t,
        final_counts: chain.state().counts().to_vec(),
        trajectory: cfg.record.then_some(PottsTrajectory { stride, records }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;

    #[test]
    fn count_conservation() {
        let mut rng = seed_stream(1, 1);
        let mut chain = GlauberChain::new(CountVector::new(vec![10, 5, 0]).unwrap(), 2.0);
        for _ in 0..10_000 {
            chain.step(&mut rng);
            assert_eq!(chain.state().counts().iter().sum::<u32>(), 15);
        }
    }

    #[test]
    fn beta_zero_recolours_uniformly() {
        let mut rng = seed_stream(2, 0);
        let start = CountVector::new(vec![1, 0, 0]).unwrap();
        let mut hits = [0usize; 3];
        for _ in 0..30_000 {
            let next = glauber_step(&start, 0.0, &mut rng);
            hits[next.counts().iter().position(|&c| c == 1).unwrap()] += 1;
        }
        for h in hits {
            assert!((h as f64 - 10_000.0).abs() < 4.0 * (30_000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt());
        }
    }

    #[test]
    fn hat_nu_extremes() {
        let mut rng = seed_stream(3, 0);
        let (c, d) = init_hat_nu(500, 3, 1.0, &mut rng).unwrap();
        assert_eq!(c.counts()[d], 500);
        assert!(init_hat_nu(500, 3, 0.2, &mut rng).is_err());
        assert!(init_hat_nu(500, 3, 1.1, &mut rng).is_err());
        let (c, _) = init_hat_nu(500, 3, 1.0 / 3.0, &mut rng).unwrap();
        assert_eq!(c.counts().iter().sum::<u32>(), 500);
    }

    #[test]
    fn gap_values() {
        let c = CountVector::new(vec![6, 3, 1]).unwrap();
        assert!((coordinate_gap(&c, Some(0)) - 0.2).abs() < 1e-15);
        assert!((coordinate_gap(&c, None) - 0.5).abs() < 1e-15);
        assert_eq!(coordinate_gap(&CountVector::new(vec![4, 4, 4]).unwrap(), None), 0.0);
    }

    #[test]
    fn exit_at_time_zero_when_outside() {
        let n = 10_000u32;
        let gamma = 2.0;
        let m_star = 0.5;
        let dom = ((m_star + 2.0 * gamma / (n as f64).sqrt()) * n as f64) as u32;
        let rest = n - dom;
        let counts = CountVector::new(vec![dom, rest / 2, rest - rest / 2]).unwrap();
        let mut chain = GlauberChain::new(counts, 2.77);
        let mut rng = seed_stream(0, 0);
        assert_eq!(
            saddle_exit_times_potts(&mut chain, 0, m_star, gamma, 10, &mut rng),
            (Some(0), None)
        );
    }

    #[test]
    fn classification_of_fixed_points() {
        let th = PottsThresholds::compute(4.0 * 2f64.ln(), 3).unwrap();
        let uni = CountVector::new(vec![100, 100, 100]).unwrap();
        assert_eq!(classify_potts_phase(&uni, &th, PHASE_TOL), PottsPhase::Disordered);
        let n = 3000u32;
        let top = (th.m_r * n as f64).floor() as u32;
        let rest = n - top;
        let ord = CountVector::new(vec![top, rest / 2, rest - rest / 2]).unwrap();
        assert_eq!(classify_potts_phase(&ord, &th, 0.01), PottsPhase::Ordered(0));
        let mid = CountVector::new(vec![1500, 750, 750]).unwrap();
        assert_eq!(classify_potts_phase(&mid, &th, 0.05), PottsPhase::Unsettled);
    }

    #[test]
    fn flow_fixed_point_is_constant() {
        let traj = deterministic_flow(&[1.0 / 3.0; 3], 3.5, 3, 50, 100.0).unwrap();
        assert!(traj.iter().all(|s| s.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15)));
        assert!(deterministic_flow(&[0.5, 0.6, -0.1], 3.5, 3, 5, 100.0).is_err());
    }
}
