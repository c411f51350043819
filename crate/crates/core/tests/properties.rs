use mixer_core::exact_oracle::{
    cm_exact_kernel, glauber_count_kernel, partitions, potts_counts_stationary, sw_exact_kernel,
};
use mixer_core::phase_diagram::{
    cm_drift, cm_drift_derivative, giant_fraction, giant_fraction_derivative, potts_potential, potts_scalar_drift,
    surrogate_variance_sequence, theta_s, vector_drift, ModelParams,
};
use mixer_core::potts_glauber::{CountVector, GlauberChain};
use mixer_core::random_graph::{sample_er_edges, ComponentMultiset, UnionFind};
use mixer_core::seed_stream;
use proptest::prelude::*;

fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn giant_fraction_solves_its_equation(lambda in 1.01f64..12.0) {
        let a = giant_fraction(lambda).unwrap();
        prop_assert!((a - (1.0 - (-lambda * a).exp())).abs() < 1e-12);
        let fd = central_diff(|l| giant_fraction(l).unwrap(), lambda, 1e-5);
        prop_assert!((giant_fraction_derivative(lambda).unwrap() - fd).abs() < 1e-5 * (1.0 + fd.abs()));
    }

    #[test]
    fn cm_drift_derivative_matches_difference(beta in 2.75f64..2.99, u in 0.02f64..0.95) {
        let params = ModelParams::new(3.0, beta, 1).unwrap();
        let lo = theta_s(3.0, beta).max(0.0);
        let theta = lo + u * (1.0 - lo);
        prop_assume!(theta - lo > 1e-3 && theta < 1.0 - 1e-4);
        let fd = central_diff(|t| cm_drift(t, &params).unwrap(), theta, 1e-6);
        let exact = cm_drift_derivative(theta, &params).unwrap();
        prop_assert!((exact - fd).abs() < 1e-5, "exact {} fd {}", exact, fd);
    }

    #[test]
    fn potts_drift_derivative_matches_difference(beta in 0.5f64..5.0, x in 0.34f64..0.99) {
        let (_, d1) = potts_scalar_drift(x, beta, 3.0);
        let fd = central_diff(|y| potts_scalar_drift(y, beta, 3.0).0, x, 1e-6);
        prop_assert!((d1 - fd).abs() < 1e-6);
    }

    #[test]
    fn vector_drift_stays_on_simplex_and_reduces(beta in 0.5f64..5.0, w in prop::collection::vec(0.01f64..1.0, 4)) {
        let total: f64 = w.iter().sum();
        let s: Vec<f64> = w.iter().map(|x| x / total).collect();
        let d = vector_drift(&s, beta, 4).unwrap();
        prop_assert!(d.iter().sum::<f64>().abs() < 1e-12);
        // With equal non-dominant coordinates the first component is the scalar drift.
        let m = s[0];
        let sym = [m, (1.0 - m) / 3.0, (1.0 - m) / 3.0, (1.0 - m) / 3.0];
        let dv = vector_drift(&sym, beta, 4).unwrap()[0];
        prop_assert!((dv - potts_scalar_drift(m, beta, 4.0).0).abs() < 1e-12);
    }

    #[test]
    fn potential_gradient_is_minus_drift(beta in 0.5f64..5.0, a in 0.05f64..0.9, b in 0.05f64..0.9) {
        prop_assume!(a + b < 0.95);
        let s = [a, b, 1.0 - a - b];
        let d = vector_drift(&s, beta, 3).unwrap();
        // Directional derivative along e_0 - e_2 stays on the simplex.
        let h = 1e-6;
        let f = |t: f64| potts_potential(&[a + t, b, 1.0 - a - b - t], beta, 3).unwrap();
        let dir = (f(h) - f(-h)) / (2.0 * h);
        prop_assert!((dir + (d[0] - d[2])).abs() < 1e-6);
    }

    #[test]
    fn variance_sequence_recursion(beta in 2.75f64..2.99, lambda0 in 1.05f64..1.5) {
        let v = surrogate_variance_sequence(12, 3.0, beta, lambda0).unwrap();
        let keep = 2.0 / 3.0;
        let scale = keep / 3.0;
        prop_assert!((v.values[0] - scale * v.r0).abs() < 1e-12);
        for t in 0..12 {
            let next = keep * v.values[t] + scale * v.r_star;
            prop_assert!((v.values[t + 1] - next).abs() < 1e-12);
        }
        prop_assert!((v.at(10_000) - v.limit()).abs() < 1e-15);
    }

    #[test]
    fn glauber_conserves_mass_and_is_label_equivariant(
        counts in prop::collection::vec(0u32..40, 3),
        beta in 0.0f64..4.0,
        u in prop::collection::vec(1e-9f64..1.0, 6),
    ) {
        prop_assume!(counts.iter().sum::<u32>() > 0);
        let n: u32 = counts.iter().sum();
        let mut a = GlauberChain::new(CountVector::new(counts.clone()).unwrap(), beta);
        a.step_with_uniforms(&u);
        prop_assert_eq!(a.state().n(), n);
        // Relabel colours by the cycle 0→1→2→0, moving the uniforms along.
        let perm = [1usize, 2, 0];
        let mut pc = vec![0; 3];
        let mut pu = vec![0.0; 6];
        for (k, &pk) in perm.iter().enumerate() {
            pc[pk] = counts[k];
            pu[pk] = u[k];
            pu[3 + pk] = u[3 + k];
        }
        let mut b = GlauberChain::new(CountVector::new(pc).unwrap(), beta);
        b.step_with_uniforms(&pu);
        for (k, &pk) in perm.iter().enumerate() {
            prop_assert_eq!(b.state().counts()[pk], a.state().counts()[k]);
        }
    }

    #[test]
    fn union_find_agrees_with_bfs(m in 1usize..40, p in 0.0f64..0.3, seed in any::<u64>()) {
        let edges = sample_er_edges(m, p, &mut seed_stream(seed, 0));
        let mut uf = UnionFind::new(m);
        let mut adj = vec![vec![]; m];
        for &(a, b) in &edges {
            uf.union(a, b);
            adj[a as usize].push(b as usize);
            adj[b as usize].push(a as usize);
        }
        let mut seen = vec![false; m];
        let mut bfs = vec![];
        for s in 0..m {
            if seen[s] { continue; }
            seen[s] = true;
            let mut queue = vec![s];
            let mut size = 0u32;
            while let Some(v) = queue.pop() {
                size += 1;
                for &w in &adj[v] {
                    if !seen[w] { seen[w] = true; queue.push(w); }
                }
            }
            bfs.push(size);
        }
        let mut got = uf.component_sizes();
        got.sort_unstable();
        bfs.sort_unstable();
        prop_assert_eq!(got, bfs);
    }

    #[test]
    fn multiset_union_keeps_total(a in prop::collection::vec(1u32..50, 0..20), b in prop::collection::vec(1u32..50, 0..20)) {
        let x = ComponentMultiset::from_sizes(a.clone()).unwrap();
        let y = ComponentMultiset::from_sizes(b.clone()).unwrap();
        let u = x.union(&y);
        prop_assert_eq!(u.total(), x.total() + y.total());
        prop_assert_eq!(u.len(), a.len() + b.len());
        prop_assert!(u.sizes().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn exact_kernels_are_stochastic(n in 1usize..5, beta in 0.1f64..4.0, q in 1.1f64..5.0) {
        let p = (beta / n as f64).min(1.0);
        prop_assert!(cm_exact_kernel(n, p, q).unwrap().max_row_sum_error() < 1e-12);
        let qi = q.round().max(1.0) as usize;
        prop_assert!(sw_exact_kernel(n, p, qi).unwrap().max_row_sum_error() < 1e-12);
    }

    #[test]
    fn potts_count_law_is_normalised_and_symmetric(n in 1u32..9, beta in 0.0f64..4.0) {
        let law = potts_counts_stationary(n, 3, beta).unwrap();
        prop_assert!((law.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (s, p) in law.support.iter().zip(&law.probs) {
            let swapped = [s[1], s[0], s[2]];
            prop_assert!((law.prob_of(&swapped).unwrap() - p).abs() < 1e-14);
        }
        prop_assert!(glauber_count_kernel(n, 3, beta, true).unwrap().max_row_sum_error() < 1e-12);
    }
}

#[test]
fn integer_partition_counts() {
    let expected = [1usize, 1, 2, 3, 5, 7, 11, 15, 22];
    for (n, &p) in expected.iter().enumerate().skip(1) {
        assert_eq!(partitions(n).len(), p, "p({n})");
    }
}
