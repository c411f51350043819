//! wasm-bindgen exports for `www/index.html`.
//!
//! Every export returns a flat `Float64Array` so the page needs no glue
//! beyond the generated bindings.

use mixer_core::cm_dynamics::{cm_step, init_product};
use mixer_core::phase_diagram::{
    beta_thresholds, cm_drift, potts_scalar_drift, ModelParams, PottsThresholds, RcThresholds,
};
use mixer_core::potts_glauber::{init_hat_nu, GlauberChain};
use mixer_core::{seed_stream, Result};
use wasm_bindgen::prelude::*;

fn js(e: mixer_core::MixerError) -> JsError {
    JsError::new(&e.to_string())
}

/// `[β_u, β_c, β_s, θ_*, θ_r, λ_*, m_*, m_r]`, NaN where undefined at `(q, β)`.
pub fn threshold_values(q: f64, beta: f64) -> Result<Vec<f64>> {
    let b = beta_thresholds(q)?;
    let rc = RcThresholds::compute(q, beta).ok();
    let potts = (q.fract() == 0.0)
        .then(|| PottsThresholds::compute(beta, q as usize).ok())
        .flatten();
    Ok(vec![
        b.beta_u,
        b.beta_c,
        b.beta_s,
        rc.map_or(f64::NAN, |t| t.theta_star),
        rc.map_or(f64::NAN, |t| t.theta_r),
        rc.map_or(f64::NAN, |t| t.lambda_star),
        potts.map_or(f64::NAN, |t| t.m_star),
        potts.map_or(f64::NAN, |t| t.m_r),
    ])
}

/// Triples `(x, f(x), D(x))` on a uniform grid of `[0, 1]`; the giant drift
/// `f` is NaN below `θ_s`.
pub fn drift_values(q: f64, beta: f64, points: usize) -> Result<Vec<f64>> {
    let params = ModelParams::new(q, beta, 1)?;
    let points = points.max(2);
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let x = i as f64 / (points - 1) as f64;
        out.push(x);
        out.push(cm_drift(x, &params).unwrap_or(f64::NAN));
        out.push(if x >= 1.0 / q {
            potts_scalar_drift(x, beta, q).0
        } else {
            f64::NAN
        });
    }
    Ok(out)
}

/// `L1/n` after each of `steps` CM steps from `G(n, λ0/n)`.
pub fn cm_values(q: f64, beta: f64, n: usize, lambda0: f64, steps: usize, seed: u64) -> Result<Vec<f64>> {
    let params = ModelParams::new(q, beta, n)?;
    let mut rng = seed_stream(seed, 0);
    let mut state = init_product(n, lambda0, &mut rng);
    let nf = n as f64;
    let mut out = vec![state.l1() as f64 / nf];
    for _ in 0..steps {
        state = cm_step(&state, &params, &mut rng).0;
        out.push(state.l1() as f64 / nf);
    }
    Ok(out)
}

/// Colour proportions after each sweep (`n` Glauber steps), `q` values per
/// sweep, starting from a random colour dominant at proportion `m0`.
pub fn glauber_values(q: usize, beta: f64, n: u32, m0: f64, sweeps: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = seed_stream(seed, 0);
    let (counts, _) = init_hat_nu(n, q, m0, &mut rng)?;
    let mut chain = GlauberChain::new(counts, beta);
    let mut out = chain.state().proportions();
    for _ in 0..sweeps {
        chain.run(n as u64, &mut rng);
        out.extend(chain.state().proportions());
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn thresholds(q: f64, beta: f64) -> std::result::Result<Vec<f64>, JsError> {
    threshold_values(q, beta).map_err(js)
}

#[wasm_bindgen]
pub fn drift_curves(q: f64, beta: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    drift_values(q, beta, points).map_err(js)
}

#[wasm_bindgen]
pub fn cm_trajectory(
    q: f64,
    beta: f64,
    n: usize,
    lambda0: f64,
    steps: usize,
    seed: u64,
) -> std::result::Result<Vec<f64>, JsError> {
    cm_values(q, beta, n, lambda0, steps, seed).map_err(js)
}

#[wasm_bindgen]
pub fn glauber_trajectory(
    q: usize,
    beta: f64,
    n: u32,
    m0: f64,
    sweeps: usize,
    seed: u64,
) -> std::result::Result<Vec<f64>, JsError> {
    glauber_values(q, beta, n, m0, sweeps, seed).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_at_critical_point() {
        let bc = 4.0 * 2f64.ln();
        let t = threshold_values(3.0, bc).unwrap();
        assert!((t[1] - bc).abs() < 1e-12);
        assert!(t[3] > 0.0 && t[3] < t[4]);
        assert!(t[6] > 1.0 / 3.0 && t[6] < t[7]);
    }

    #[test]
    fn drift_grid_shape() {
        let v = drift_values(3.0, 2.8, 11).unwrap();
        assert_eq!(v.len(), 33);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[30], 1.0);
        assert!(v[2].is_nan());
    }

    #[test]
    fn cm_run_is_seeded() {
        let a = cm_values(3.0, 2.8, 2000, 1.2, 10, 4).unwrap();
        assert_eq!(a, cm_values(3.0, 2.8, 2000, 1.2, 10, 4).unwrap());
        assert_eq!(a.len(), 11);
        assert!(a.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn glauber_rows_sum_to_one() {
        let v = glauber_values(3, 2.8, 300, 0.5, 5, 1).unwrap();
        assert_eq!(v.len(), 18);
        for row in v.chunks(3) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
