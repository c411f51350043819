//! Samplers checked against independent exact or closed-form answers.

use std::collections::HashMap;

use mixer_core::cm_dynamics::{cm_step, sw_step, RcState};
use mixer_core::exact_oracle::{
    cm_exact_kernel, empirical_tv, er_partition_law, glauber_count_kernel, sw_exact_kernel, ExactKernel,
};
use mixer_core::phase_diagram::ModelParams;
use mixer_core::potts_glauber::{deterministic_flow, CountVector, GlauberChain};
use mixer_core::random_graph::{ComponentMultiset, ErSampler};
use mixer_core::stats::ExitSide;
use mixer_core::surrogate::{counts_near, estimate_diffusion, ou_left_exit_prob, PottsSde, SdeDrift};
use mixer_core::{run_replicas, seed_stream};

#[test]
fn skip_sampler_matches_exact_partition_law() {
    for &(m, p) in &[(4usize, 0.5), (6, 0.2), (7, 0.15), (7, 0.6)] {
        let exact = er_partition_law(m, p).unwrap();
        let mut rng = seed_stream(100 + m as u64, 0);
        let mut sampler = ErSampler::new();
        let samples: Vec<Vec<u32>> = (0..200_000)
            .map(|_| sampler.sample(m, p, &mut rng).sizes().to_vec())
            .collect();
        let (tv, se) = empirical_tv(&samples, &exact).unwrap();
        assert!(tv < 0.01, "m={m} p={p}: tv {tv} (se {se})");
    }
}

/// Row-by-row comparison of a sampled one-step law with the exact kernel.
fn check_rows<F: FnMut(&[u32], &mut mixer_core::ReplicaRng) -> Vec<u32>>(
    kernel: &ExactKernel,
    draws: usize,
    mut step: F,
) {
    let index: HashMap<Vec<u32>, usize> = kernel.states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    for (i, start) in kernel.states.iter().enumerate() {
        let mut rng = seed_stream(4242, i as u64);
        let mut hits = vec![0usize; kernel.states.len()];
        for _ in 0..draws {
            let next = step(start, &mut rng);
            hits[*index.get(&next).unwrap_or_else(|| panic!("unexpected state {next:?}"))] += 1;
        }
        for (j, &h) in hits.iter().enumerate() {
            let p = kernel.entry(i, j);
            let phat = h as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!(
                (phat - p).abs() <= 4.5 * se + 1e-4,
                "{start:?} -> {:?}: {phat} vs {p}",
                kernel.states[j]
            );
        }
    }
}

fn rc_state(sizes: &[u32]) -> RcState {
    RcState::new(ComponentMultiset::from_sizes(sizes.to_vec()).unwrap())
}

#[test]
fn cm_step_rows_match_exact_kernel() {
    let (n, beta, q) = (5usize, 2.5, 3.0);
    let params = ModelParams::new(q, beta, n).unwrap();
    let kernel = cm_exact_kernel(n, params.edge_prob(), q).unwrap();
    check_rows(&kernel, 20_000, |s, rng| {
        cm_step(&rc_state(s), &params, rng).0.components.sizes().to_vec()
    });
}

#[test]
fn sw_step_rows_match_exact_kernel() {
    let (n, beta, q) = (4usize, 2.0, 3usize);
    let params = ModelParams::new(q as f64, beta, n).unwrap();
    let kernel = sw_exact_kernel(n, params.edge_prob(), q).unwrap();
    check_rows(&kernel, 20_000, |s, rng| {
        sw_step(&rc_state(s), &params, rng)
            .unwrap()
            .0
            .components
            .sizes()
            .to_vec()
    });
}

#[test]
fn glauber_step_rows_match_exact_kernel() {
    let (n, q, beta) = (6u32, 3usize, 1.7);
    let kernel = glauber_count_kernel(n, q, beta, true).unwrap();
    check_rows(&kernel, 10_000, |s, rng| {
        let mut chain = GlauberChain::new(CountVector::new(s.to_vec()).unwrap(), beta);
        chain.step(rng);
        chain.state().counts().to_vec()
    });
}

#[test]
fn diffusion_at_infinite_temperature_matches_moment_recursion() {
    // At β = 0 the first count is a birth-death chain:
    // up with probability (n - X)/(nq), down with probability X(q-1)/(nq).
    let (n, q) = (1000u32, 3usize);
    let start = counts_near(n, q, 0.5).unwrap();
    let (nf, qf) = (n as f64, q as f64);
    let x0 = start.counts()[0] as f64;
    let (mut m1, mut m2) = (x0, x0 * x0);
    for _ in 0..n {
        let next_m2 = m2 + 2.0 * (m1 / qf - m2 / nf) + 1.0 / qf + m1 * (qf - 2.0) / (nf * qf);
        m1 = m1 * (1.0 - 1.0 / nf) + 1.0 / qf;
        m2 = next_m2;
    }
    let exact = (m2 - m1 * m1) / nf;
    let est = estimate_diffusion(&start, 0.0, 20_000, 77, None).unwrap();
    assert!(
        (est.variance - exact).abs() < 4.0 * est.stderr,
        "estimate {} ± {} vs exact {exact}",
        est.variance,
        est.stderr
    );
}

#[test]
fn linear_sde_exit_matches_scale_function() {
    let sde = PottsSde {
        q: 3,
        beta: 0.0,
        m_star: 0.5,
        kappa: 0.5,
        a: 1.0,
        init_sd: 0.0,
        drift: SdeDrift::Linear,
        dt: 1e-3,
        max_time: 200.0,
    };
    let gamma = 2.0;
    for &z in &[-0.8, 0.0, 0.3] {
        let p = sde.exit_prob(z, gamma, 4000, 31, None);
        let exact = ou_left_exit_prob(z, sde.kappa, sde.a, gamma);
        assert_eq!(p.p_timeout, 0.0);
        assert!(
            (p.p_left - exact).abs() < 4.0 * p.stderr_left + 0.01,
            "z={z}: {} vs {exact}",
            p.p_left
        );
    }
}

#[test]
fn halving_the_sde_step_changes_little() {
    let base = PottsSde::at_saddle(3, 4.0 * 2f64.ln(), 0.7, SdeDrift::FiniteN(20_000), 1e-3, 2000.0).unwrap();
    let fine = PottsSde { dt: 5e-4, ..base };
    let a = base.exit_prob(-2.0, 8.0, 3000, 5, None);
    let b = fine.exit_prob(-2.0, 8.0, 3000, 6, None);
    let se = (a.stderr_left.powi(2) + b.stderr_left.powi(2)).sqrt();
    assert!(
        (a.p_left - b.p_left).abs() < 4.0 * se + 0.01,
        "{} vs {}",
        a.p_left,
        b.p_left
    );
}

#[test]
fn glauber_mean_follows_the_flow() {
    let (n, q, beta) = (4000u32, 3usize, 2.9);
    let start = CountVector::new(vec![2400, 1000, 600]).unwrap();
    let s0 = start.proportions();
    let flow = deterministic_flow(&s0, beta, q, 4000, 4000.0).unwrap();
    let target = flow.last().unwrap();
    let finals = run_replicas(800, 9, None, |_, rng| {
        let mut chain = GlauberChain::new(start.clone(), beta);
        chain.run(n as u64, rng);
        chain.state().proportions()
    });
    for k in 0..q {
        let xs: Vec<f64> = finals.iter().map(|s| s[k]).collect();
        let (mean, se) = mixer_core::stats::mean_stderr(&xs);
        assert!(
            (mean - target[k]).abs() < 4.0 * se + 2.0 / n as f64,
            "colour {k}: {mean} vs {}",
            target[k]
        );
    }
}

#[test]
fn exit_sides_are_exhaustive() {
    let sde = PottsSde::at_saddle(3, 3.0, 0.7, SdeDrift::Linear, 1e-3, 0.01).unwrap();
    let sides = run_replicas(200, 1, None, |_, rng| sde.exit(0.0, 8.0, rng).0);
    assert!(sides.iter().all(|s| *s == ExitSide::Timeout));
}
