//! Exit problems at the two saddles.
//!
//! Random-cluster side: the normalised giant fluctuation
//! `z = (L - θ_* n)/√n` is tracked by the chain
//!
//! ```text
//! z_{t+1} = z_t + ε_t (f'(θ_*) z_t + N(0, b_t²)),   ε_t ~ Ber(1/q)
//! ```
//!
//! started from `N(c α'(λ_*), σ²(λ_*))`. Potts side: `Z = √n (S_1 - m_*)`
//! per unit of `n` Glauber steps follows `dZ = μ(Z) dt + A dB`, simulated by
//! Euler–Maruyama.
//!
//! Both exit probabilities are monotone in the initial offset under common
//! random numbers, which is what the offset bisections rely on.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{MixerError, Result};
use crate::phase_diagram::{potts_scalar_drift, PottsThresholds, SurrogateParams};
use crate::potts_glauber::{CountVector, GlauberChain};
use crate::rng::run_replicas;
use crate::stats::{ExitProbabilities, ExitSide};

/// Default half-width of the exit window in normalised units.
pub const DEFAULT_GAMMA: f64 = 8.0;

/// Offsets are searched in `[-OFFSET_BOUND, OFFSET_BOUND]`.
pub const OFFSET_BOUND: f64 = 50.0;

// ---------------------------------------------------------------------------
// Random-cluster surrogate chain.

/// One step of the surrogate given the activation flag and a standard normal.
pub fn zbar_step_with(z: f64, t: usize, params: &SurrogateParams, active: bool, normal: f64) -> f64 {
    if active {
        z + params.drift_slope * z + params.step_variance(t).sqrt() * normal
    } else {
        z
    }
}

/// One step of the surrogate. Always consumes one uniform and one normal so
/// that coupled runs stay aligned.
pub fn zbar_step<R: Rng + ?Sized>(z: f64, t: usize, params: &SurrogateParams, rng: &mut R) -> f64 {
    let active = rng.random::<f64>() < params.activation_prob;
    let normal: f64 = rng.sample(StandardNormal);
    zbar_step_with(z, t, params, active, normal)
}

/// Runs the surrogate from its initial law until `|z| > gamma` (checked from
/// `t = 0`) or `max_steps`.
pub fn zbar_exit<R: Rng + ?Sized>(
    params: &SurrogateParams,
    gamma: f64,
    max_steps: usize,
    rng: &mut R,
) -> (ExitSide, Option<usize>) {
    let n0: f64 = rng.sample(StandardNormal);
    let mut z = params.init_mean() + params.init_variance.sqrt() * n0;
    for t in 0..=max_steps {
        if z > gamma {
            return (ExitSide::Right, Some(t));
        }
        if z < -gamma {
            return (ExitSide::Left, Some(t));
        }
        if t < max_steps {
            z = zbar_step(z, t, params, rng);
        }
    }
    (ExitSide::Timeout, None)
}

/// Outcomes of a batch of surrogate replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateRun {
    pub z0_mean: f64,
    pub z0_var: f64,
    pub gamma: f64,
    pub max_steps: usize,
    pub outcomes: Vec<(ExitSide, Option<usize>)>,
}

impl SurrogateRun {
    pub fn probabilities(&self) -> ExitProbabilities {
        ExitProbabilities::from_sides(self.outcomes.iter().map(|o| o.0))
    }
}

pub fn simulate_zbar(
    params: &SurrogateParams,
    gamma: f64,
    replicas: usize,
    max_steps: usize,
    master_seed: u64,
    threads: Option<usize>,
) -> SurrogateRun {
    let outcomes = run_replicas(replicas, master_seed, threads, |_, rng| {
        zbar_exit(params, gamma, max_steps, rng)
    });
    SurrogateRun {
        z0_mean: params.init_mean(),
        z0_var: params.init_variance,
        gamma,
        max_steps,
        outcomes,
    }
}

/// Exit frequencies of the surrogate from `[-γ, γ]`.
pub fn zbar_exit_prob(
    params: &SurrogateParams,
    gamma: f64,
    replicas: usize,
    max_steps: usize,
    master_seed: u64,
    threads: Option<usize>,
) -> ExitProbabilities {
    simulate_zbar(params, gamma, replicas, max_steps, master_seed, threads).probabilities()
}

/// A critical offset together with the exit frequencies observed there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalOffset {
    pub c: f64,
    pub probs: ExitProbabilities,
    pub evaluations: usize,
}

/// Bisection on `c` for `p_left(c) = target`, where `p_left` is
/// nonincreasing in `c` (exactly so under common random numbers).
fn bisect_offset<F: FnMut(f64) -> ExitProbabilities>(
    target: f64,
    tol_prob: f64,
    mut eval: F,
) -> Result<CriticalOffset> {
    if !(target > 0.0 && target < 1.0) {
        return Err(MixerError::Domain(format!(
            "target probability {target} outside (0, 1)"
        )));
    }
    let mut lo = -OFFSET_BOUND;
    let mut hi = OFFSET_BOUND;
    let p_lo = eval(lo);
    let p_hi = eval(hi);
    let mut evaluations = 2;
    if !(p_lo.p_left >= target && p_hi.p_left <= target) {
        return Err(MixerError::Convergence(format!(
            "no bracket in [{lo}, {hi}]: p_left ranges over [{}, {}] against target {target}",
            p_hi.p_left, p_lo.p_left
        )));
    }
    let mut best = if (p_lo.p_left - target).abs() < (p_hi.p_left - target).abs() {
        CriticalOffset {
            c: lo,
            probs: p_lo,
            evaluations,
        }
    } else {
        CriticalOffset {
            c: hi,
            probs: p_hi,
            evaluations,
        }
    };
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        let p = eval(mid);
        evaluations += 1;
        if (p.p_left - target).abs() < (best.probs.p_left - target).abs() {
            best = CriticalOffset {
                c: mid,
                probs: p,
                evaluations,
            };
        }
        if (p.p_left - target).abs() <= tol_prob {
            break;
        }
        if p.p_left > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.evaluations = evaluations;
    let slack = tol_prob + 2.0 * best.probs.stderr_left;
    if (best.probs.p_left - target).abs() > slack {
        return Err(MixerError::Convergence(format!(
            "closest p_left = {} at c = {} misses target {target} by more than {slack}",
            best.probs.p_left, best.c
        )));
    }
    Ok(best)
}

/// Offset `c_*` with surrogate left-exit probability `target`
/// (`λ0 = λ_* + c_*/√n` on the CM side).
#[allow(clippy::too_many_arguments)]
pub fn find_c_star_rc(
    target: f64,
    base: &SurrogateParams,
    gamma: f64,
    replicas: usize,
    tol_prob: f64,
    max_steps: usize,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<CriticalOffset> {
    bisect_offset(target, tol_prob, |c| {
        zbar_exit_prob(&base.with_offset(c), gamma, replicas, max_steps, master_seed, threads)
    })
}

/// Marginal law of `z_t` as a Gaussian mixture over activation patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateMarginal {
    /// `(weight, mean, variance)` per activation pattern.
    pub components: Vec<(f64, f64, f64)>,
}

impl SurrogateMarginal {
    /// Marginal after `t` steps; `t` is capped at 20 (2^t components).
    pub fn at(params: &SurrogateParams, t: usize) -> Result<Self> {
        if t > 20 {
            return Err(MixerError::Size(format!("t = {t} exceeds 20 for the mixture marginal")));
        }
        let p = params.activation_prob;
        let grow = 1.0 + params.drift_slope;
        let mut components = Vec::with_capacity(1 << t);
        for pattern in 0u32..(1 << t) {
            let mut weight = 1.0;
            let mut mean = params.init_mean();
            let mut var = params.init_variance;
            for i in 0..t {
                if pattern >> i & 1 == 1 {
                    weight *= p;
                    mean *= grow;
                    var = var * grow * grow + params.step_variance(i);
                } else {
                    weight *= 1.0 - p;
                }
            }
            components.push((weight, mean, var));
        }
        Ok(Self { components })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|&(w, m, v)| w * crate::stats::standard_normal_cdf((x - m) / v.sqrt()))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|&(w, m, _)| w * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.components.iter().map(|&(w, m, v)| w * (v + m * m)).sum::<f64>() - mean * mean
    }
}

// ---------------------------------------------------------------------------
// Potts saddle diffusion.

/// Empirical diffusion of the dominant coordinate over one unit of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionEstimate {
    /// `Var(√n (S_{n,1} - S_{0,1}))`.
    pub variance: f64,
    pub stderr: f64,
    pub replicas: usize,
}

impl DiffusionEstimate {
    /// Raw volatility `sqrt(variance)`.
    pub fn a(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Volatility of `dZ = κ Z dt + A dB` whose one-unit variance from a
    /// fixed start equals the estimate: `A² = variance · 2κ/(e^{2κ} - 1)`.
    pub fn volatility(&self, kappa: f64) -> f64 {
        let factor = if kappa.abs() < 1e-12 {
            1.0
        } else {
            2.0 * kappa / (2.0 * kappa).exp_m1()
        };
        (self.variance * factor).sqrt()
    }
}

/// Runs `n` Glauber steps from `start` in each replica and estimates the
/// variance of the scaled change of the first coordinate.
pub fn estimate_diffusion(
    start: &CountVector,
    beta: f64,
    replicas: usize,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<DiffusionEstimate> {
    if replicas < 2 {
        return Err(MixerError::Domain("need at least two replicas".into()));
    }
    let n = start.n();
    let c0 = start.counts()[0] as f64;
    let deltas = run_replicas(replicas, master_seed, threads, |_, rng| {
        let mut chain = GlauberChain::new(start.clone(), beta);
        chain.run(n as u64, rng);
        (chain.state().counts()[0] as f64 - c0) / (n as f64).sqrt()
    });
    let r = replicas as f64;
    let mean = deltas.iter().sum::<f64>() / r;
    let m2 = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / r;
    let m4 = deltas.iter().map(|d| (d - mean).powi(4)).sum::<f64>() / r;
    let variance = m2 * r / (r - 1.0);
    let stderr = ((m4 - m2 * m2).max(0.0) / r).sqrt();
    Ok(DiffusionEstimate {
        variance,
        stderr,
        replicas,
    })
}

/// Counts nearest to `(m, (1-m)/(q-1), …)` with the first coordinate dominant.
pub fn counts_near(n: u32, q: usize, m: f64) -> Result<CountVector> {
    let first = ((m * n as f64).round() as u32).min(n);
    let rest = n - first;
    let others = (q - 1) as u32;
    let mut counts = vec![first];
    for k in 0..others {
        counts.push(rest / others + u32::from(k < rest % others));
    }
    CountVector::new(counts)
}

/// Diffusion estimate at the Potts saddle `(m_*, equal rest)` of size `n_probe`.
pub fn estimate_a_q(
    n_probe: u32,
    q: usize,
    beta: f64,
    replicas: usize,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<DiffusionEstimate> {
    if n_probe < 100 {
        return Err(MixerError::Domain(format!("n_probe = {n_probe} must be at least 100")));
    }
    let th = PottsThresholds::compute(beta, q)?;
    let start = counts_near(n_probe, q, th.m_star)?;
    estimate_diffusion(&start, beta, replicas, master_seed, threads)
}

/// Drift of the saddle SDE in the recentred coordinate `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SdeDrift {
    /// `D_β'(m_*) Z`.
    Linear,
    /// `√n D_β(m_* + Z/√n)` at the given `n`.
    FiniteN(u32),
    /// Odd part of the finite-`n` drift about `m_*` (a symmetric control).
    OddPart(u32),
}

/// Euler–Maruyama model of the Potts saddle exit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PottsSde {
    pub q: usize,
    pub beta: f64,
    pub m_star: f64,
    /// `D_β'(m_*)`.
    pub kappa: f64,
    /// Volatility `A`.
    pub a: f64,
    /// Standard deviation `d` of `Z_0` around its mean.
    pub init_sd: f64,
    pub drift: SdeDrift,
    pub dt: f64,
    pub max_time: f64,
}

impl PottsSde {
    /// SDE at the saddle of `(β, q)`, with `d² = m_*(1 - m_*)` from the
    /// binomial dominant count of the product initialiser.
    pub fn at_saddle(q: usize, beta: f64, a: f64, drift: SdeDrift, dt: f64, max_time: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= 1e-3) {
            return Err(MixerError::Domain(format!("dt = {dt} must lie in (0, 1e-3]")));
        }
        if !(a > 0.0) {
            return Err(MixerError::Domain(format!("volatility {a} must be positive")));
        }
        let th = PottsThresholds::compute(beta, q)?;
        let m = th.m_star;
        Ok(Self {
            q,
            beta,
            m_star: m,
            kappa: potts_scalar_drift(m, beta, q as f64).1,
            a,
            init_sd: (m * (1.0 - m)).sqrt(),
            drift,
            dt,
            max_time,
        })
    }

    pub fn drift_at(&self, z: f64) -> f64 {
        let finite = |n: u32, z: f64| {
            let rn = (n as f64).sqrt();
            rn * potts_scalar_drift(self.m_star + z / rn, self.beta, self.q as f64).0
        };
        match self.drift {
            SdeDrift::Linear => self.kappa * z,
            SdeDrift::FiniteN(n) => finite(n, z),
            SdeDrift::OddPart(n) => 0.5 * (finite(n, z) - finite(n, -z)),
        }
    }

    /// One replica started from `N(c, d²)`; exit from `[-γ, γ]`, checked from
    /// time zero. Returns the side and the exit time.
    pub fn exit<R: Rng + ?Sized>(&self, c: f64, gamma: f64, rng: &mut R) -> (ExitSide, Option<f64>) {
        let n0: f64 = rng.sample(StandardNormal);
        let mut z = c + self.init_sd * n0;
        let vol = self.a * self.dt.sqrt();
        let steps = (self.max_time / self.dt).ceil() as u64;
        for k in 0..=steps {
            if z > gamma {
                return (ExitSide::Right, Some(k as f64 * self.dt));
            }
            if z < -gamma {
                return (ExitSide::Left, Some(k as f64 * self.dt));
            }
            let normal: f64 = rng.sample(StandardNormal);
            z += self.drift_at(z) * self.dt + vol * normal;
        }
        (ExitSide::Timeout, None)
    }

    pub fn exit_prob(
        &self,
        c: f64,
        gamma: f64,
        replicas: usize,
        master_seed: u64,
        threads: Option<usize>,
    ) -> ExitProbabilities {
        let sides = run_replicas(replicas, master_seed, threads, |_, rng| self.exit(c, gamma, rng).0);
        ExitProbabilities::from_sides(sides)
    }
}

/// Left-exit probability of `dZ = κ Z dt + A dB` from `[-γ, γ]` started at
/// `z`, from the scale function (Simpson's rule on 2000 panels).
pub fn ou_left_exit_prob(z: f64, kappa: f64, a: f64, gamma: f64) -> f64 {
    if z <= -gamma {
        return 1.0;
    }
    if z >= gamma {
        return 0.0;
    }
    let density = |u: f64| (-kappa * u * u / (a * a)).exp();
    let integral = |lo: f64, hi: f64| {
        let panels = 2000;
        let h = (hi - lo) / panels as f64;
        let mut s = density(lo) + density(hi);
        for i in 1..panels {
            s += density(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    integral(z, gamma) / integral(-gamma, gamma)
}

/// Offset `ĉ_*` (mean of `Z_0`) with SDE left-exit probability `target`
/// (`m0 = m_* + ĉ_*/√n` on the Glauber side).
pub fn find_c_star_potts(
    target: f64,
    sde: &PottsSde,
    gamma: f64,
    replicas: usize,
    tol_prob: f64,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<CriticalOffset> {
    if !(sde.dt <= 1e-3) {
        return Err(MixerError::Domain(format!("dt = {} must not exceed 1e-3", sde.dt)));
    }
    bisect_offset(target, tol_prob, |c| {
        sde.exit_prob(c, gamma, replicas, master_seed, threads)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_diagram::{beta_thresholds, NoiseVariances};
    use crate::rng::seed_stream;

    fn flat_params(slope: f64, var: f64) -> SurrogateParams {
        SurrogateParams {
            drift_slope: slope,
            activation_prob: 1.0 / 3.0,
            noise: NoiseVariances {
                q: 3.0,
                r0: 0.0,
                r_star: 0.0,
                values: vec![0.0; 4],
            },
            h1: 0.0,
            h2: var,
            init_slope: 1.0,
            init_variance: 1.0,
            offset: 0.0,
        }
    }

    #[test]
    fn degenerate_step_is_identity() {
        let p = flat_params(0.0, 0.0);
        let mut rng = seed_stream(0, 0);
        for _ in 0..100 {
            assert_eq!(zbar_step(1.25, 3, &p, &mut rng), 1.25);
        }
    }

    #[test]
    fn edge_starts_exit_on_their_side() {
        let base = SurrogateParams::new(3.0, beta_thresholds(3.0).unwrap().beta_c, 0.0).unwrap();
        let right = base.with_offset(40.0 / base.init_slope);
        let left = base.with_offset(-40.0 / base.init_slope);
        assert_eq!(zbar_exit_prob(&right, 8.0, 200, 1000, 1, Some(1)).p_right, 1.0);
        assert_eq!(zbar_exit_prob(&left, 8.0, 200, 1000, 1, Some(1)).p_left, 1.0);
    }

    #[test]
    fn symmetric_target_gives_zero_offset() {
        let p = flat_params(0.0, 1.0);
        let c = find_c_star_rc(0.5, &p, 4.0, 4000, 0.01, 100_000, 9, Some(1)).unwrap();
        assert!(c.c.abs() < 0.3, "c = {}", c.c);
    }

    #[test]
    fn mixture_moments() {
        let p = flat_params(0.5, 2.0);
        let m = SurrogateMarginal::at(&p, 1).unwrap();
        // mean: (1 - p + p·1.5)·0, var: E over activation of var
        assert!(m.mean().abs() < 1e-15);
        let expected = (2.0 / 3.0) * 1.0 + (1.0 / 3.0) * (2.25 + 2.0);
        assert!((m.variance() - expected).abs() < 1e-12);
        assert!((m.cdf(0.0) - 0.5).abs() < 1e-12);
        assert!(SurrogateMarginal::at(&p, 21).is_err());
    }

    #[test]
    fn ou_exit_limits() {
        assert!((ou_left_exit_prob(0.0, 0.3, 1.0, 4.0) - 0.5).abs() < 1e-12);
        assert!((ou_left_exit_prob(1.0, 1e-14, 1.0, 4.0) - 3.0 / 8.0).abs() < 1e-9);
        assert_eq!(ou_left_exit_prob(-5.0, 0.3, 1.0, 4.0), 1.0);
    }

    #[test]
    fn sde_rejects_coarse_steps() {
        let bc = beta_thresholds(3.0).unwrap().beta_c;
        assert!(PottsSde::at_saddle(3, bc, 0.7, SdeDrift::Linear, 1e-2, 10.0).is_err());
        let sde = PottsSde::at_saddle(3, bc, 0.7, SdeDrift::Linear, 1e-3, 10.0).unwrap();
        assert!((sde.m_star - 0.5).abs() < 1e-10);
        assert!(sde.kappa > 0.0);
    }

    #[test]
    fn counts_near_saddle() {
        let c = counts_near(1001, 3, 0.5).unwrap();
        assert_eq!(c.counts(), &[501, 250, 250]);
        let c = counts_near(10, 3, 0.5).unwrap();
        assert_eq!(c.counts().iter().sum::<u32>(), 10);
    }
}
