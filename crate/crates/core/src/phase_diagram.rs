//! Static phase-diagram quantities for the mean-field random-cluster and
//! Potts models.
//!
//! Every scalar root is located by bracketed bisection carried to machine
//! precision; interior maxima are located by a coarse grid followed by
//! golden-section refinement. Nothing here depends on `n`.

use serde::{Deserialize, Serialize};

use crate::error::{MixerError, Result};

/// Margin above the percolation threshold `λ = 1` below which the giant
/// fraction is treated as undefined.
pub const EPS_SUPER: f64 = 1e-9;

/// Smallest cluster weight accepted by the threshold computations.
pub const MIN_Q: f64 = 2.0 + 1e-6;

/// Number of precomputed surrogate noise variances; later times use the limit.
pub const VARIANCE_HORIZON: usize = 64;

const GRID_POINTS: usize = 400;

/// `(q, β, n)`: cluster weight, inverse temperature and number of vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub q: f64,
    pub beta: f64,
    pub n: usize,
}

impl ModelParams {
    pub fn new(q: f64, beta: f64, n: usize) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(MixerError::Domain(format!("cluster weight q = {q} must be positive")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(MixerError::Domain(format!(
                "inverse temperature beta = {beta} must be >= 0"
            )));
        }
        if n == 0 {
            return Err(MixerError::Domain("n must be at least 1".into()));
        }
        Ok(Self { q, beta, n })
    }

    /// Percolation probability `β/n` used by the CM and SW steps.
    pub fn edge_prob(&self) -> f64 {
        (self.beta / self.n as f64).min(1.0)
    }

    /// Whether `q` is an integer, as the SW dynamics and Potts semantics need.
    pub fn integer_q(&self) -> Option<usize> {
        (self.q.fract() == 0.0 && self.q >= 1.0).then_some(self.q as usize)
    }
}

/// Critical inverse temperatures `β_u < β_c < β_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaThresholds {
    pub beta_u: f64,
    pub beta_c: f64,
    pub beta_s: f64,
}

/// Fixed points of the giant-fraction drift `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcFixedPoints {
    pub theta_s: f64,
    pub theta_star: f64,
    pub theta_r: f64,
}

/// Fixed points of the dominant-colour drift `D_β` in `[1/q, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PottsFixedPoints {
    pub m_star: f64,
    pub m_r: f64,
}

/// All random-cluster phase-diagram constants at a given `(q, β)` in the
/// metastable window `(β_u, β_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcThresholds {
    pub beta_u: f64,
    pub beta_c: f64,
    pub beta_s: f64,
    pub theta_s: f64,
    pub theta_star: f64,
    pub theta_r: f64,
    pub lambda_star: f64,
    pub xi: f64,
}

impl RcThresholds {
    pub fn compute(q: f64, beta: f64) -> Result<Self> {
        let betas = beta_thresholds(q)?;
        let params = ModelParams::new(q, beta, 1)?;
        let fp = rc_fixed_points(&params)?;
        let lambda_star = lambda_for_giant(fp.theta_star)?;
        Ok(Self {
            beta_u: betas.beta_u,
            beta_c: betas.beta_c,
            beta_s: betas.beta_s,
            theta_s: fp.theta_s,
            theta_star: fp.theta_star,
            theta_r: fp.theta_r,
            lambda_star,
            xi: xi_weight(q)?,
        })
    }

    /// Residual of `e^{-βx} = (1-x)/(1+(q-1)x)` at `θ_r`; a diagnostic for
    /// the closed-form characterisation of the stable giant fraction.
    pub fn theta_r_implicit_residual(&self, q: f64, beta: f64) -> f64 {
        let x = self.theta_r;
        (-beta * x).exp() - (1.0 - x) / (1.0 + (q - 1.0) * x)
    }
}

/// Potts phase-diagram constants at a given `(β, q)` with `β > β_u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PottsThresholds {
    pub q: usize,
    pub beta: f64,
    pub beta_u: f64,
    pub beta_c: f64,
    pub beta_s: f64,
    pub m_star: f64,
    pub m_r: f64,
}

impl PottsThresholds {
    pub fn compute(beta: f64, q: usize) -> Result<Self> {
        let qf = q as f64;
        let betas = beta_thresholds(qf)?;
        let fp = potts_fixed_points(beta, qf)?;
        Ok(Self {
            q,
            beta,
            beta_u: betas.beta_u,
            beta_c: betas.beta_c,
            beta_s: betas.beta_s,
            m_star: fp.m_star,
            m_r: fp.m_r,
        })
    }

    /// The ordered fixed point with colour `i` dominant.
    pub fn ordered_point(&self, i: usize) -> Vec<f64> {
        let rest = (1.0 - self.m_r) / (self.q as f64 - 1.0);
        (0..self.q).map(|k| if k == i { self.m_r } else { rest }).collect()
    }
}

// ---------------------------------------------------------------------------
// Scalar root finding.

/// Bisection on a sign change between `lo` and `hi`, carried until the
/// midpoint is no longer representable strictly inside the bracket.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let lo_negative = f(lo) < 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        }
        if (hi - lo) <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Grid scan followed by golden-section refinement around the best node.
pub(crate) fn grid_golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let step = (hi - lo) / GRID_POINTS as f64;
    let (best, _) =
        (0..=GRID_POINTS)
            .map(|i| (i, f(lo + step * i as f64)))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(hi);
    let (x, fx) = golden_max(&f, a, b, 1e-12);
    let f_best = f(lo + step * best as f64);
    if fx >= f_best {
        (x, fx)
    } else {
        (lo + step * best as f64, f_best)
    }
}

// ---------------------------------------------------------------------------
// Erdős–Rényi giant component.

fn check_supercritical(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 1.0 + EPS_SUPER {
        Ok(())
    } else {
        Err(MixerError::Domain(format!(
            "lambda = {lambda} is not supercritical (need lambda > 1 + {EPS_SUPER:e})"
        )))
    }
}

/// Asymptotic giant-component fraction `α(λ)`: the largest `x > 0` with
/// `e^{-λx} = 1 - x`.
pub fn giant_fraction(lambda: f64) -> Result<f64> {
    check_supercritical(lambda)?;
    let g = |x: f64| (-lambda * x).exp_m1() + x;
    let mut lo = ((lambda - 1.0) / (lambda * lambda)).min(0.5);
    while g(lo) >= 0.0 && lo > f64::MIN_POSITIVE {
        lo *= 0.5;
    }
    if g(1.0) <= 0.0 {
        return Ok(1.0);
    }
    Ok(bisect(g, lo, 1.0))
}

/// `α'(λ) = α(1-α) / (1 - λ(1-α))`, by implicit differentiation.
pub fn giant_fraction_derivative(lambda: f64) -> Result<f64> {
    let a = giant_fraction(lambda)?;
    Ok(a * (1.0 - a) / (1.0 - lambda * (1.0 - a)))
}

/// Variance coefficient `σ²(λ)` of the giant: `Var|L1| ≈ σ²(λ) n`.
pub fn giant_variance_coeff(lambda: f64) -> Result<f64> {
    let a = giant_fraction(lambda)?;
    let denom = 1.0 - lambda * (1.0 - a);
    Ok(a * (1.0 - a) / (denom * denom))
}

/// Limiting `E[R2]/m` of a subcritical `G(m, λ/m)`.
pub fn subcritical_r2_density(lambda: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(MixerError::Domain(format!("lambda = {lambda} is not subcritical")));
    }
    Ok(1.0 / (1.0 - lambda))
}

/// Limiting `E[R2^-]/m` of a supercritical `G(m, λ/m)`: the complement of the
/// giant is a subcritical graph on `(1-α)m` vertices with parameter `λ(1-α)`.
pub fn giant_complement_r2_density(lambda: f64) -> Result<f64> {
    let a = giant_fraction(lambda)?;
    Ok((1.0 - a) / (1.0 - lambda * (1.0 - a)))
}

/// `λ` with `α(λ) = theta`.
pub fn lambda_for_giant(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(MixerError::Domain(format!("giant fraction {theta} outside (0,1)")));
    }
    let lo = 1.0 + 2.0 * EPS_SUPER;
    let mut hi = 2.0;
    while giant_fraction(hi)? < theta {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(MixerError::NoRoot(format!("no lambda reaches giant fraction {theta}")));
        }
    }
    Ok(bisect(|l| giant_fraction(l).unwrap_or(0.0) - theta, lo, hi))
}

// ---------------------------------------------------------------------------
// CM giant-fraction drift.

/// `(k_a, k_ia)`: expected activated fraction when a giant of fraction
/// `theta` is, respectively is not, activated.
pub fn activation_fractions(theta: f64, q: f64) -> (f64, f64) {
    let k_ia = (1.0 - theta) / q;
    (theta + k_ia, k_ia)
}

/// `θ_s = (q-β)/(β(q-1))`, below which the percolation step is subcritical.
pub fn theta_s(q: f64, beta: f64) -> f64 {
    (q - beta) / (beta * (q - 1.0))
}

/// Giant-fraction drift `f(θ) = α(β k_a(θ)) k_a(θ) - θ`.
pub fn cm_drift(theta: f64, params: &ModelParams) -> Result<f64> {
    cm_drift_qb(theta, params.q, params.beta)
}

fn cm_drift_qb(theta: f64, q: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) || theta <= theta_s(q, beta) {
        return Err(MixerError::Domain(format!(
            "theta = {theta} is not in (theta_s, 1] = ({}, 1]",
            theta_s(q, beta)
        )));
    }
    let (ka, _) = activation_fractions(theta, q);
    Ok(giant_fraction(beta * ka)? * ka - theta)
}

/// `f'(θ) = (α(λ) + λ α'(λ)) (1 - 1/q) - 1` with `λ = β k_a(θ)`.
pub fn cm_drift_derivative(theta: f64, params: &ModelParams) -> Result<f64> {
    cm_drift_qb(theta, params.q, params.beta)?;
    let (ka, _) = activation_fractions(theta, params.q);
    let lambda = params.beta * ka;
    let slope = giant_fraction(lambda)? + lambda * giant_fraction_derivative(lambda)?;
    Ok(slope * (1.0 - 1.0 / params.q) - 1.0)
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q >= MIN_Q {
        Ok(())
    } else {
        Err(MixerError::Domain(format!("q = {q} must be at least {MIN_Q}")))
    }
}

/// The two roots `θ_* < θ_r` of the drift in `(θ_s, 1]`, available only for
/// `β ∈ (β_u, β_s)`.
pub fn rc_fixed_points(params: &ModelParams) -> Result<RcFixedPoints> {
    let (q, beta) = (params.q, params.beta);
    check_q(q)?;
    let betas = beta_thresholds(q)?;
    if !(beta > betas.beta_u && beta < betas.beta_s) {
        return Err(MixerError::NoRoot(format!(
            "beta = {beta} outside the two-root window ({}, {})",
            betas.beta_u, betas.beta_s
        )));
    }
    let ts = theta_s(q, beta);
    // smallest theta with beta k_a(theta) = 1 + 2 EPS_SUPER
    let lo = (((1.0 + 2.0 * EPS_SUPER) / beta - 1.0 / q) / (1.0 - 1.0 / q)).max(ts);
    let lo = if cm_drift_qb(lo, q, beta).is_err() {
        lo + 1e-12
    } else {
        lo
    };
    let f = |t: f64| cm_drift_qb(t, q, beta).unwrap_or(f64::NEG_INFINITY);
    let (x_max, f_max) = grid_golden_max(f, lo, 1.0);
    if !(f_max > 0.0) {
        return Err(MixerError::NoRoot(format!(
            "drift has no positive part at beta = {beta}"
        )));
    }
    let a = bisect(f, lo, x_max);
    let b = bisect(f, x_max, 1.0);
    // the repulsive root is the one with positive drift slope
    let slope_a = cm_drift_derivative(a, params)?;
    let (theta_star, theta_r) = if slope_a > 0.0 { (a, b) } else { (b, a) };
    Ok(RcFixedPoints {
        theta_s: ts,
        theta_star,
        theta_r,
    })
}

/// `λ_*` with `α(λ_*) = θ_*`.
pub fn lambda_star(params: &ModelParams) -> Result<f64> {
    lambda_for_giant(rc_fixed_points(params)?.theta_star)
}

// ---------------------------------------------------------------------------
// Critical temperatures and the coexistence weight.

fn beta_c_closed_form(q: f64) -> f64 {
    2.0 * (q - 1.0) * (q - 2.0).ln_1p() / (q - 2.0)
}

/// `D_β(x)/(x - 1/q)`: shares the roots of `D_β` in `(1/q, 1]` but not the
/// trivial one at `1/q`.
fn reduced_potts_drift(x: f64, beta: f64, q: f64) -> f64 {
    potts_scalar_drift(x, beta, q).0 / (x - 1.0 / q)
}

fn reduced_drift_max(beta: f64, q: f64) -> (f64, f64) {
    let lo = 1.0 / q + 1e-7;
    grid_golden_max(|x| reduced_potts_drift(x, beta, q), lo, 1.0)
}

/// `β_u`, `β_c`, `β_s` for `q > 2`.
///
/// `β_u` is where the non-trivial local maximum of `D_β` first touches zero;
/// it is found by bisection on `β` over `[0, β_c]`.
pub fn beta_thresholds(q: f64) -> Result<BetaThresholds> {
    check_q(q)?;
    let beta_c = beta_c_closed_form(q);
    let beta_s = q;
    let beta_u = bisect(|b| reduced_drift_max(b, q).1, 0.0, beta_c);
    Ok(BetaThresholds { beta_u, beta_c, beta_s })
}

/// Location and value of the non-trivial local maximum of `D_β` on
/// `(1/q, 1]` (the maximum of the reduced drift, mapped back to `D_β`).
pub fn potts_drift_local_max(beta: f64, q: f64) -> (f64, f64) {
    let (x, _) = reduced_drift_max(beta, q);
    (x, potts_scalar_drift(x, beta, q).0)
}

/// Weight `ξ(q)` of the disordered phase at `β_c`.
pub fn xi_weight(q: f64) -> Result<f64> {
    check_q(q)?;
    let bc = beta_c_closed_form(q);
    let base = (q - bc / (q - 1.0)) / (q - bc);
    let expo = bc * bc * (q - 2.0) * (q * q - 4.0 * q + 2.0) / (4.0 * q * (q - 1.0) * (q - 1.0));
    let xi_prime = base.powf((2.0 - q) / 2.0) * expo.exp() / (q - 1.0);
    Ok(1.0 / (1.0 + xi_prime))
}

// ---------------------------------------------------------------------------
// Potts drift.

/// `(D_β(x), D_β'(x))` for the dominant-colour proportion `x`.
pub fn potts_scalar_drift(x: f64, beta: f64, q: f64) -> (f64, f64) {
    let e = (beta * (1.0 - q * x) / (q - 1.0)).exp();
    let denom = 1.0 + (q - 1.0) * e;
    (1.0 / denom - x, q * beta * e / (denom * denom) - 1.0)
}

/// Roots `m_* ≤ m_r` of `D_β` in `[1/q, 1)`.
///
/// For `β ∈ (β_u, β_s)` both are interior; for `β ≥ β_s` the saddle sits at
/// `m_* = 1/q` and `m_r` is the unique interior root.
pub fn potts_fixed_points(beta: f64, q: f64) -> Result<PottsFixedPoints> {
    check_q(q)?;
    let betas = beta_thresholds(q)?;
    if !(beta > betas.beta_u) {
        return Err(MixerError::NoRoot(format!(
            "beta = {beta} does not exceed beta_u = {}",
            betas.beta_u
        )));
    }
    let h = |x: f64| reduced_potts_drift(x, beta, q);
    let (x_max, h_max) = reduced_drift_max(beta, q);
    if !(h_max > 0.0) {
        return Err(MixerError::NoRoot(format!(
            "D_beta has no interior root at beta = {beta}"
        )));
    }
    let m_r = bisect(h, x_max, 1.0);
    if beta >= betas.beta_s {
        return Ok(PottsFixedPoints { m_star: 1.0 / q, m_r });
    }
    let lo = 1.0 / q + 1e-9;
    let m_star = if h(lo) >= 0.0 { lo } else { bisect(h, lo, x_max) };
    Ok(PottsFixedPoints { m_star, m_r })
}

fn check_simplex(s: &[f64], q: usize) -> Result<()> {
    if s.len() != q {
        return Err(MixerError::Simplex(format!(
            "expected {q} coordinates, got {}",
            s.len()
        )));
    }
    if s.iter().any(|&x| !(x >= -1e-12)) {
        return Err(MixerError::Simplex(format!("negative coordinate in {s:?}")));
    }
    let total: f64 = s.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(MixerError::Simplex(format!("coordinates sum to {total}")));
    }
    Ok(())
}

/// Softmax `g_β(s)`.
pub fn softmax_proportions(s: &[f64], beta: f64) -> Vec<f64> {
    let top = s.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let w: Vec<f64> = s.iter().map(|&x| (beta * (x - top)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Proportion-vector drift `d_β(s) = g_β(s) - s`.
pub fn vector_drift(s: &[f64], beta: f64, q: usize) -> Result<Vec<f64>> {
    check_simplex(s, q)?;
    Ok(softmax_proportions(s, beta)
        .into_iter()
        .zip(s)
        .map(|(g, x)| g - x)
        .collect())
}

/// Potential `F_β(s) = -(1/β) log Σ e^{β s_i} + ½‖s‖²`, whose gradient is `-d_β`.
pub fn potts_potential(s: &[f64], beta: f64, q: usize) -> Result<f64> {
    check_simplex(s, q)?;
    if !(beta > 0.0) {
        return Err(MixerError::Domain("potential needs beta > 0".into()));
    }
    let top = s.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let lse = top + s.iter().map(|&x| (beta * (x - top)).exp()).sum::<f64>().ln() / beta;
    Ok(-lse + 0.5 * s.iter().map(|x| x * x).sum::<f64>())
}

// ---------------------------------------------------------------------------
// Surrogate-chain coefficients.

/// `(h1, h2)` at percolation parameter `λ`: the sensitivity of the new giant
/// to the number of activated vertices, and the giant's own variance, both
/// per unit of `n` at inverse temperature `beta`.
///
/// `h1 = α(λ) + λ α'(λ)` is `d/dA [α(βA/n) A]` at `A = λn/β`;
/// `h2 = σ²(λ) λ/β`.
pub fn noise_scales(lambda: f64, beta: f64) -> Result<(f64, f64)> {
    let h1 = giant_fraction(lambda)? + giant_fraction_derivative(lambda)? * lambda;
    let h2 = giant_variance_coeff(lambda)? * lambda / beta;
    Ok((h1, h2))
}

/// Normalised variances `v_t = σ_t²/n` of the activated non-giant mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseVariances {
    pub q: f64,
    /// `E[R2^-]/n` of the initial supercritical graph.
    pub r0: f64,
    /// `E[R2]/n` of the freshly percolated inactive-side graph.
    pub r_star: f64,
    pub values: Vec<f64>,
}

impl NoiseVariances {
    pub fn limit(&self) -> f64 {
        (1.0 - 1.0 / self.q) * self.r_star
    }

    /// `v_t`, clamped to the limit beyond the stored horizon.
    pub fn at(&self, t: usize) -> f64 {
        self.values.get(t).copied().unwrap_or_else(|| self.limit())
    }
}

/// `v_0 … v_horizon` for the CM chain started from `G(n, λ0/n)` at `(q, β)`.
pub fn surrogate_variance_sequence(horizon: usize, q: f64, beta: f64, lambda0: f64) -> Result<NoiseVariances> {
    if !(lambda0 > 1.0) {
        return Err(MixerError::Domain(format!("lambda0 = {lambda0} must exceed 1")));
    }
    let fp = rc_fixed_points(&ModelParams::new(q, beta, 1)?)?;
    let (_, kia) = activation_fractions(fp.theta_star, q);
    let r_star = kia / (1.0 - beta * kia);
    let r0 = giant_complement_r2_density(lambda0)?;
    let keep = 1.0 - 1.0 / q;
    let scale = keep / q;
    let values = (0..=horizon)
        .map(|s| {
            let fresh: f64 = (1..=s).map(|i| keep.powi((s - i) as i32)).sum();
            scale * (keep.powi(s as i32) * r0 + fresh * r_star)
        })
        .collect();
    Ok(NoiseVariances { q, r0, r_star, values })
}

/// Parameters of the normalised 1-D surrogate chain near `θ_* n`.
///
/// The state is `z = (L - θ_* n)/√n`; none of the fields depend on `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateParams {
    pub drift_slope: f64,
    pub activation_prob: f64,
    pub noise: NoiseVariances,
    pub h1: f64,
    pub h2: f64,
    /// `α'(λ_*)`: converts the initialisation offset `c` into a mean shift.
    pub init_slope: f64,
    /// `σ²(λ_*)`.
    pub init_variance: f64,
    /// Offset `c` in `λ0 = λ_* + c/√n`.
    pub offset: f64,
}

impl SurrogateParams {
    /// Surrogate at `(q, β)` for the initialisation `λ0 = λ_* + c/√n`.
    pub fn new(q: f64, beta: f64, offset: f64) -> Result<Self> {
        let params = ModelParams::new(q, beta, 1)?;
        let fp = rc_fixed_points(&params)?;
        let lambda_star = lambda_for_giant(fp.theta_star)?;
        let (ka, _) = activation_fractions(fp.theta_star, q);
        let (h1, h2) = noise_scales(beta * ka, beta)?;
        Ok(Self {
            drift_slope: cm_drift_derivative(fp.theta_star, &params)?,
            activation_prob: 1.0 / q,
            noise: surrogate_variance_sequence(VARIANCE_HORIZON, q, beta, lambda_star)?,
            h1,
            h2,
            init_slope: giant_fraction_derivative(lambda_star)?,
            init_variance: giant_variance_coeff(lambda_star)?,
            offset,
        })
    }

    /// Same as [`SurrogateParams::new`]; the vertex count is not used.
    pub fn from_model(params: &ModelParams, offset: f64) -> Result<Self> {
        Self::new(params.q, params.beta, offset)
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        Self { offset, ..self.clone() }
    }

    pub fn init_mean(&self) -> f64 {
        self.offset * self.init_slope
    }

    /// `b_t² = h1² v_t + h2`.
    pub fn step_variance(&self, t: usize) -> f64 {
        self.h1 * self.h1 * self.noise.at(t) + self.h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: f64, beta: f64) -> ModelParams {
        ModelParams::new(q, beta, 1000).unwrap()
    }

    #[test]
    fn giant_fraction_subcritical_boundary() {
        assert!(matches!(giant_fraction(1.0 + 1e-12), Err(MixerError::Domain(_))));
        assert!(matches!(giant_fraction(0.5), Err(MixerError::Domain(_))));
        assert!(giant_fraction(20.0).unwrap() > 0.9999);
    }

    #[test]
    fn giant_fraction_residual() {
        for &l in &[1.0 + 1e-6, 1.01, 1.5, 2.0, 3.0, 10.0] {
            let a = giant_fraction(l).unwrap();
            assert!(a > 0.0 && a < 1.0);
            assert!(((-l * a).exp() - (1.0 - a)).abs() < 1e-12, "lambda {l}");
        }
    }

    #[test]
    fn derivative_and_variance_reject_subcritical() {
        assert!(giant_fraction_derivative(1.0 + 1e-12).is_err());
        assert!(giant_variance_coeff(1.0).is_err());
        assert!(noise_scales(0.9, 2.0).is_err());
    }

    #[test]
    fn activation_fraction_values() {
        assert_eq!(activation_fractions(0.0, 3.0), (1.0 / 3.0, 1.0 / 3.0));
        assert_eq!(activation_fractions(1.0, 3.0), (1.0, 0.0));
        let (ka, kia) = activation_fractions(0.5, 3.0);
        assert!((ka - 2.0 / 3.0).abs() < 1e-15 && (kia - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn cm_drift_rejects_subcritical_theta() {
        let p = params(3.0, 2.8);
        let ts = theta_s(3.0, 2.8);
        assert!(matches!(cm_drift(ts, &p), Err(MixerError::Domain(_))));
        assert!(cm_drift(ts * 0.5, &p).is_err());
    }

    #[test]
    fn beta_c_closed_form_q3() {
        let b = beta_thresholds(3.0).unwrap();
        assert!((b.beta_c - 4.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(b.beta_s, 3.0);
        assert!(b.beta_u > 2.0 && b.beta_u < b.beta_c);
    }

    #[test]
    fn q_near_two_stays_finite() {
        let b = beta_thresholds(2.0 + 1e-6).unwrap();
        assert!(b.beta_c.is_finite() && (b.beta_c - 2.0).abs() < 1e-5);
        assert!(b.beta_u.is_finite());
        assert!(xi_weight(2.0 + 1e-6).unwrap().is_finite());
        assert!(beta_thresholds(2.0 + 1e-9).is_err());
        assert!(xi_weight(2.0).is_err());
    }

    #[test]
    fn rc_fixed_points_at_beta_c() {
        let bc = 4.0 * 2f64.ln();
        let fp = rc_fixed_points(&params(3.0, bc)).unwrap();
        assert!((fp.theta_r - 0.5).abs() < 1e-10);
        assert!(fp.theta_star > fp.theta_s && fp.theta_star < 0.5);
        let p = params(3.0, bc);
        assert!(cm_drift(fp.theta_star, &p).unwrap().abs() < 1e-10);
        assert!(cm_drift((fp.theta_star + fp.theta_r) / 2.0, &p).unwrap() > 0.0);
    }

    #[test]
    fn rc_fixed_points_outside_window() {
        let b = beta_thresholds(3.0).unwrap();
        assert!(matches!(
            rc_fixed_points(&params(3.0, b.beta_u - 0.01)),
            Err(MixerError::NoRoot(_))
        ));
        assert!(matches!(rc_fixed_points(&params(3.0, 3.2)), Err(MixerError::NoRoot(_))));
    }

    #[test]
    fn potts_fixed_points_at_beta_c() {
        let fp = potts_fixed_points(4.0 * 2f64.ln(), 3.0).unwrap();
        assert!((fp.m_star - 0.5).abs() < 1e-10);
        assert!((fp.m_r - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn potts_fixed_points_low_temperature() {
        let fp = potts_fixed_points(3.5, 3.0).unwrap();
        assert_eq!(fp.m_star, 1.0 / 3.0);
        assert!(fp.m_r > 1.0 / 3.0 && potts_scalar_drift(fp.m_r, 3.5, 3.0).0.abs() < 1e-12);
        let at_s = potts_fixed_points(3.0, 3.0).unwrap();
        assert_eq!(at_s.m_star, 1.0 / 3.0);
        assert!(potts_scalar_drift(at_s.m_r, 3.0, 3.0).1 < 0.0);
    }

    #[test]
    fn potts_fixed_points_below_onset() {
        let b = beta_thresholds(3.0).unwrap();
        assert!(matches!(
            potts_fixed_points(b.beta_u - 0.01, 3.0),
            Err(MixerError::NoRoot(_))
        ));
    }

    #[test]
    fn potts_drift_zero_at_uniform_and_beta_c_roots() {
        for &(b, q) in &[(0.3, 3.0), (2.0, 4.0), (7.0, 5.0)] {
            assert!(potts_scalar_drift(1.0 / q, b, q).0.abs() < 1e-15);
        }
        let bc = 4.0 * 2f64.ln();
        // 4^{1-3x}: e = 1/2 at x = 1/2 and 1/4 at x = 2/3
        assert!(potts_scalar_drift(0.5, bc, 3.0).0.abs() < 1e-15);
        assert!(potts_scalar_drift(2.0 / 3.0, bc, 3.0).0.abs() < 1e-15);
    }

    #[test]
    fn vector_drift_rejects_off_simplex() {
        assert!(matches!(
            vector_drift(&[0.5, 0.6, 0.0], 2.0, 3),
            Err(MixerError::Simplex(_))
        ));
        assert!(matches!(vector_drift(&[0.5, 0.5], 2.0, 3), Err(MixerError::Simplex(_))));
        assert!(matches!(
            potts_potential(&[1.2, -0.2, 0.0], 2.0, 3),
            Err(MixerError::Simplex(_))
        ));
    }

    #[test]
    fn vector_drift_zero_at_fixed_points() {
        let d = vector_drift(&[1.0 / 3.0; 3], 2.5, 3).unwrap();
        assert!(d.iter().all(|x| x.abs() < 1e-15));
        let mr = potts_fixed_points(3.5, 3.0).unwrap().m_r;
        let s = [mr, (1.0 - mr) / 2.0, (1.0 - mr) / 2.0];
        let d = vector_drift(&s, 3.5, 3).unwrap();
        assert!(d.iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn xi_in_unit_interval() {
        for &q in &[2.5, 3.0, 4.0, 10.0] {
            let xi = xi_weight(q).unwrap();
            assert!(xi > 0.0 && xi < 1.0);
        }
    }

    #[test]
    fn noise_scale_ratio() {
        let (_, h2) = noise_scales(1.7, 2.5).unwrap();
        assert!((h2 / giant_variance_coeff(1.7).unwrap() - 1.7 / 2.5).abs() < 1e-14);
    }

    #[test]
    fn variance_sequence_rejects_subcritical_start() {
        assert!(surrogate_variance_sequence(5, 3.0, 2.77, 0.9).is_err());
    }
}
