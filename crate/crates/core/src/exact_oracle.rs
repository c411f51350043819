//! Brute-force ground truth at tiny `n`: random-cluster and Potts-count
//! stationary laws, one-step kernels of the CM, SW and Glauber chains, and
//! total-variation helpers.
//!
//! Random-cluster states are integer partitions of `n` (component sizes,
//! descending); Potts states are count vectors enumerated in colex order.

use std::collections::HashMap;

use serde_json::{Map, Value};

use crate::error::{MixerError, Result};
use crate::stats::standard_normal_cdf;

/// Largest `n` for edge-subset enumeration of the random-cluster measure.
pub const MAX_RC_N: usize = 6;
/// Largest `n` for exact CM/SW kernels.
pub const MAX_KERNEL_N: usize = 5;
/// Largest vertex count for exhaustive `G(m, p)` laws.
pub const MAX_ER_M: usize = 7;
/// Largest `n` for the Glauber detailed-balance check.
pub const MAX_BALANCE_N: u32 = 10;
/// Largest Potts count state space.
pub const MAX_COUNT_STATES: usize = 200_000;

/// A probability vector over an explicitly listed support.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub support: Vec<Vec<u32>>,
    pub probs: Vec<f64>,
}

fn state_key(s: &[u32]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExactDistribution {
    fn from_weights(support: Vec<Vec<u32>>, weights: Vec<f64>) -> Self {
        let z: f64 = weights.iter().sum();
        Self {
            support,
            probs: weights.into_iter().map(|w| w / z).collect(),
        }
    }

    pub fn index(&self) -> HashMap<Vec<u32>, usize> {
        self.support.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect()
    }

    pub fn prob_of(&self, state: &[u32]) -> Option<f64> {
        self.support.iter().position(|s| s == state).map(|i| self.probs[i])
    }

    /// `{"3,1": p, …}` map for fixtures.
    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = self
            .support
            .iter()
            .zip(&self.probs)
            .map(|(s, &p)| (state_key(s), Value::from(p)))
            .collect();
        Value::Object(map)
    }
}

/// Sparse one-step transition kernel on an enumerated state space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactKernel {
    pub states: Vec<Vec<u32>>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl ExactKernel {
    /// `dist · P`.
    pub fn apply(&self, dist: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.states.len()];
        for (i, row) in self.rows.iter().enumerate() {
            if dist[i] != 0.0 {
                for &(j, p) in row {
                    out[j] += dist[i] * p;
                }
            }
        }
        out
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().filter(|e| e.0 == j).map(|e| e.1).sum()
    }

    /// `ℓ1` distance between `μP` and `μ`.
    pub fn stationarity_residual(&self, mu: &[f64]) -> f64 {
        self.apply(mu).iter().zip(mu).map(|(a, b)| (a - b).abs()).sum()
    }

    /// `{"from": {"to": p}}` map for fixtures.
    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let inner: Map<String, Value> = row
                    .iter()
                    .map(|&(j, p)| (state_key(&self.states[j]), Value::from(p)))
                    .collect();
                (state_key(&self.states[i]), Value::Object(inner))
            })
            .collect();
        Value::Object(map)
    }
}

/// Total-variation distance `½‖a - b‖₁`.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

// ---------------------------------------------------------------------------
// Random-cluster side.

/// Integer partitions of `n`, parts descending, in reverse lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=max.min(left)).rev() {
            prefix.push(part);
            rec(left - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n as u32, n as u32, &mut Vec::new(), &mut out);
    out
}

fn complete_graph_edges(m: usize) -> Vec<(usize, usize)> {
    (1..m).flat_map(|j| (0..j).map(move |i| (i, j))).collect()
}

/// Component sizes (descending) of the subgraph of `K_m` with edge `mask`.
fn mask_partition(m: usize, edges: &[(usize, usize)], mask: u32) -> Vec<u32> {
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (e, &(i, j)) in edges.iter().enumerate() {
        if mask >> e & 1 == 1 {
            let (a, b) = (root(&mut parent, i), root(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut sizes = vec![0u32; m];
    for v in 0..m {
        let r = root(&mut parent, v);
        sizes[r] += 1;
    }
    let mut parts: Vec<u32> = sizes.into_iter().filter(|&s| s > 0).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

/// Sums `weight(|A|, k(A))` over all edge subsets `A` of `K_m`, by component
/// partition.
fn edge_subset_law<W: Fn(u32, usize) -> f64>(m: usize, weight: W) -> HashMap<Vec<u32>, f64> {
    let edges = complete_graph_edges(m);
    let mut law: HashMap<Vec<u32>, f64> = HashMap::new();
    for mask in 0u32..(1u32 << edges.len()) {
        let parts = mask_partition(m, &edges, mask);
        let w = weight(mask.count_ones(), parts.len());
        if w != 0.0 {
            *law.entry(parts).or_insert(0.0) += w;
        }
    }
    law
}

/// Exact law of the component partition of `G(m, p)`.
pub fn er_partition_law(m: usize, p: f64) -> Result<ExactDistribution> {
    if m > MAX_ER_M {
        return Err(MixerError::Size(format!("m = {m} exceeds {MAX_ER_M}")));
    }
    let total = (m * m.saturating_sub(1) / 2) as i32;
    let law = edge_subset_law(m, |a, _| p.powi(a as i32) * (1.0 - p).powi(total - a as i32));
    Ok(project(partitions(m), &law))
}

fn project(support: Vec<Vec<u32>>, law: &HashMap<Vec<u32>, f64>) -> ExactDistribution {
    let weights = support.iter().map(|s| law.get(s).copied().unwrap_or(0.0)).collect();
    ExactDistribution::from_weights(support, weights)
}

/// Random-cluster measure on `K_n` with edge parameter `p` and cluster
/// weight `q`, projected to component partitions.
pub fn rc_exact_stationary(n: usize, p: f64, q: f64) -> Result<ExactDistribution> {
    if n > MAX_RC_N {
        return Err(MixerError::Size(format!("n = {n} exceeds {MAX_RC_N}")));
    }
    if n == 0 || !(0.0..=1.0).contains(&p) || !(q > 0.0) {
        return Err(MixerError::Domain(format!("invalid (n, p, q) = ({n}, {p}, {q})")));
    }
    let total = (n * (n - 1) / 2) as i32;
    let law = edge_subset_law(n, |a, k| {
        p.powi(a as i32) * (1.0 - p).powi(total - a as i32) * q.powi(k as i32)
    });
    Ok(project(partitions(n), &law))
}

fn merge_parts(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = a.iter().chain(b).copied().collect();
    out.sort_unstable_by(|x, y| y.cmp(x));
    out
}

struct ErCache {
    p: f64,
    laws: Vec<Vec<(Vec<u32>, f64)>>,
}

impl ErCache {
    fn new(max_m: usize, p: f64) -> Result<Self> {
        let mut laws = vec![vec![(Vec::new(), 1.0)]];
        for m in 1..=max_m {
            let d = er_partition_law(m, p)?;
            laws.push(d.support.into_iter().zip(d.probs).filter(|e| e.1 > 0.0).collect());
        }
        Ok(Self { p, laws })
    }
}

fn kernel_from_rows(states: Vec<Vec<u32>>, rows: Vec<HashMap<Vec<u32>, f64>>) -> ExactKernel {
    let index: HashMap<Vec<u32>, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let rows = rows
        .into_iter()
        .map(|row| {
            let mut r: Vec<(usize, f64)> = row.into_iter().map(|(s, p)| (index[&s], p)).collect();
            r.sort_by_key(|e| e.0);
            r
        })
        .collect();
    ExactKernel { states, rows }
}

fn check_kernel_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_KERNEL_N {
        return Err(MixerError::Size(format!("n = {n} outside 1..={MAX_KERNEL_N}")));
    }
    Ok(())
}

/// One-step CM kernel: every activation pattern of the components, then
/// every percolation outcome on the active vertices.
pub fn cm_exact_kernel(n: usize, p: f64, q: f64) -> Result<ExactKernel> {
    check_kernel_n(n)?;
    let cache = ErCache::new(n, p)?;
    let states = partitions(n);
    let a = 1.0 / q;
    let rows = states
        .iter()
        .map(|state| {
            let k = state.len();
            let mut row: HashMap<Vec<u32>, f64> = HashMap::new();
            for pattern in 0u32..(1 << k) {
                let active = pattern.count_ones() as i32;
                let w = a.powi(active) * (1.0 - a).powi(k as i32 - active);
                let mass: u32 = (0..k).filter(|&i| pattern >> i & 1 == 1).map(|i| state[i]).sum();
                let inactive: Vec<u32> = (0..k).filter(|&i| pattern >> i & 1 == 0).map(|i| state[i]).collect();
                for (outcome, po) in &cache.laws[mass as usize] {
                    *row.entry(merge_parts(&inactive, outcome)).or_insert(0.0) += w * po;
                }
            }
            row
        })
        .collect();
    debug_assert!(cache.p == p);
    Ok(kernel_from_rows(states, rows))
}

/// One-step SW kernel: every uniform colouring of the components by `q`
/// colours, then independent percolation inside each colour class.
pub fn sw_exact_kernel(n: usize, p: f64, q: usize) -> Result<ExactKernel> {
    check_kernel_n(n)?;
    if q == 0 {
        return Err(MixerError::Domain("q must be positive".into()));
    }
    let cache = ErCache::new(n, p)?;
    let states = partitions(n);
    let rows = states
        .iter()
        .map(|state| {
            let k = state.len();
            let colourings = q.pow(k as u32);
            let w = 1.0 / colourings as f64;
            let mut row: HashMap<Vec<u32>, f64> = HashMap::new();
            for code in 0..colourings {
                let mut mass = vec![0u32; q];
                let mut c = code;
                for &s in state {
                    mass[c % q] += s;
                    c /= q;
                }
                let mut acc: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), w)];
                for &m in mass.iter().filter(|&&m| m > 0) {
                    let mut next = Vec::new();
                    for (parts, pa) in &acc {
                        for (outcome, po) in &cache.laws[m as usize] {
                            next.push((merge_parts(parts, outcome), pa * po));
                        }
                    }
                    acc = next;
                }
                for (parts, pr) in acc {
                    *row.entry(parts).or_insert(0.0) += pr;
                }
            }
            row
        })
        .collect();
    Ok(kernel_from_rows(states, rows))
}

/// `‖μP - μ‖₁` for the CM kernel at `p = β/n` against the random-cluster
/// measure with the same `(p, q)`.
pub fn cm_exact_kernel_check(n: usize, beta: f64, q: f64) -> Result<f64> {
    check_kernel_n(n)?;
    let p = (beta / n as f64).min(1.0);
    let mu = rc_exact_stationary(n, p, q)?;
    Ok(cm_exact_kernel(n, p, q)?.stationarity_residual(&mu.probs))
}

/// Same as [`cm_exact_kernel_check`] for the SW kernel.
pub fn sw_exact_kernel_check(n: usize, beta: f64, q: usize) -> Result<f64> {
    check_kernel_n(n)?;
    let p = (beta / n as f64).min(1.0);
    let mu = rc_exact_stationary(n, p, q as f64)?;
    Ok(sw_exact_kernel(n, p, q)?.stationarity_residual(&mu.probs))
}

// ---------------------------------------------------------------------------
// Potts side.

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1u64, |acc, i| acc * (n - k + i) / i)
}

/// Count vectors of `n` into `q` colours, in colex order (last coordinate
/// most significant).
pub fn count_states(n: u32, q: usize) -> Result<Vec<Vec<u32>>> {
    if q == 0 {
        return Err(MixerError::Domain("q must be positive".into()));
    }
    let size = binomial(n as u64 + q as u64 - 1, q as u64 - 1);
    if size as usize > MAX_COUNT_STATES {
        return Err(MixerError::Size(format!(
            "{size} count states exceed {MAX_COUNT_STATES}"
        )));
    }
    fn rec(left: u32, slots: usize, suffix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            let mut s = vec![left];
            s.extend(suffix.iter().rev());
            out.push(s);
            return;
        }
        for last in 0..=left {
            suffix.push(last);
            rec(left - last, slots - 1, suffix, out);
            suffix.pop();
        }
    }
    let mut out = Vec::with_capacity(size as usize);
    rec(n, q, &mut Vec::new(), &mut out);
    Ok(out)
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Law of the colour counts under the mean-field Potts measure:
/// `π(a) ∝ n!/∏ a_k! · exp((β/n) Σ_k C(a_k, 2))`.
pub fn potts_counts_stationary(n: u32, q: usize, beta: f64) -> Result<ExactDistribution> {
    if n == 0 {
        return Err(MixerError::Domain("n must be positive".into()));
    }
    let support = count_states(n, q)?;
    let lnf: Vec<f64> = (0..=n).map(ln_factorial).collect();
    let logw: Vec<f64> = support
        .iter()
        .map(|a| {
            let pairs: f64 = a.iter().map(|&c| c as f64 * (c as f64 - 1.0) / 2.0).sum();
            lnf[n as usize] - a.iter().map(|&c| lnf[c as usize]).sum::<f64>() + beta / n as f64 * pairs
        })
        .collect();
    let top = logw.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let weights = logw.into_iter().map(|l| (l - top).exp()).collect();
    Ok(ExactDistribution::from_weights(support, weights))
}

/// Count-chain Glauber kernel. With `self_exclusion = false` the updated
/// vertex is wrongly counted in its own colour's weight (negative control).
pub fn glauber_count_kernel(n: u32, q: usize, beta: f64, self_exclusion: bool) -> Result<ExactKernel> {
    let states = count_states(n, q)?;
    let index: HashMap<&[u32], usize> = states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let nf = n as f64;
    let mut rows = Vec::with_capacity(states.len());
    for a in &states {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for k in (0..q).filter(|&k| a[k] > 0) {
            let pick = a[k] as f64 / nf;
            let w: Vec<f64> = (0..q)
                .map(|j| {
                    let c = a[j] as f64 - if self_exclusion && j == k { 1.0 } else { 0.0 };
                    (beta / nf * c).exp()
                })
                .collect();
            let z: f64 = w.iter().sum();
            for j in 0..q {
                let mut b = a.clone();
                b[k] -= 1;
                b[j] += 1;
                row.push((index[b.as_slice()], pick * w[j] / z));
            }
        }
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (j, p) in row {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += p,
                _ => merged.push((j, p)),
            }
        }
        rows.push(merged);
    }
    Ok(ExactKernel { states, rows })
}

/// Largest `|π(a)P(a,b) - π(b)P(b,a)|` over pairs of count vectors.
pub fn glauber_balance_residual(n: u32, q: usize, beta: f64, self_exclusion: bool) -> Result<f64> {
    if n > MAX_BALANCE_N {
        return Err(MixerError::Size(format!("n = {n} exceeds {MAX_BALANCE_N}")));
    }
    let pi = potts_counts_stationary(n, q, beta)?;
    let kernel = glauber_count_kernel(n, q, beta, self_exclusion)?;
    let mut worst: f64 = 0.0;
    for (i, row) in kernel.rows.iter().enumerate() {
        for &(j, pij) in row {
            let flow = pi.probs[i] * pij - pi.probs[j] * kernel.entry(j, i);
            worst = worst.max(flow.abs());
        }
    }
    Ok(worst)
}

pub fn glauber_balance_check(n: u32, q: usize, beta: f64) -> Result<f64> {
    glauber_balance_residual(n, q, beta, true)
}

// ---------------------------------------------------------------------------
// Empirical total variation.

/// Empirical TV distance of `samples` to `exact`, over the full support, with
/// a delta-method standard error.
pub fn empirical_tv<S: AsRef<[u32]>>(samples: &[S], exact: &ExactDistribution) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(MixerError::Domain("no samples".into()));
    }
    let index = exact.index();
    let mut hits = vec![0usize; exact.support.len()];
    for s in samples {
        let s = s.as_ref();
        let i = index
            .get(s)
            .ok_or_else(|| MixerError::Support(format!("state {s:?} outside the exact support")))?;
        hits[*i] += 1;
    }
    let r = samples.len() as f64;
    let phat: Vec<f64> = hits.iter().map(|&h| h as f64 / r).collect();
    let tv = tv_distance(&phat, &exact.probs);
    let sign: Vec<f64> = phat
        .iter()
        .zip(&exact.probs)
        .map(|(a, b)| (a - b).signum() * f64::from(a != b))
        .collect();
    let first: f64 = sign.iter().zip(&phat).map(|(s, p)| s * p).sum();
    let second: f64 = sign.iter().zip(&phat).map(|(s, p)| s * s * p).sum();
    let stderr = 0.5 * ((second - first * first).max(0.0) / r).sqrt();
    Ok((tv, stderr))
}

/// Mean of the empirical TV estimator when `replicas` samples are drawn from
/// `law` and compared with `reference` (normal approximation per cell), and
/// an upper bound on its standard deviation.
pub fn expected_empirical_tv(law: &[f64], reference: &[f64], replicas: usize) -> (f64, f64) {
    let r = replicas as f64;
    let mut mean = 0.0;
    let mut sd = 0.0;
    for (&p, &m) in law.iter().zip(reference) {
        let mu = p - m;
        let s = (p * (1.0 - p) / r).sqrt();
        let e_abs = if s == 0.0 {
            mu.abs()
        } else {
            s * (2.0 / std::f64::consts::PI).sqrt() * (-mu * mu / (2.0 * s * s)).exp()
                + mu * (1.0 - 2.0 * standard_normal_cdf(-mu / s))
        };
        mean += 0.5 * e_abs;
        sd += 0.5 * s;
    }
    (mean, sd)
}

/// Exact TV to `stationary` of the chain started at `start` after each of
/// `0..=steps` steps.
pub fn kernel_power_tv(kernel: &ExactKernel, start: usize, stationary: &[f64], steps: usize) -> Vec<f64> {
    let mut dist = vec![0.0; kernel.states.len()];
    dist[start] = 1.0;
    let mut out = vec![tv_distance(&dist, stationary)];
    for _ in 0..steps {
        dist = kernel.apply(&dist);
        out.push(tv_distance(&dist, stationary));
    }
    out
}

/// Distribution after `steps` steps from `start`.
pub fn kernel_power(kernel: &ExactKernel, start: usize, steps: usize) -> Vec<f64> {
    let mut dist = vec![0.0; kernel.states.len()];
    dist[start] = 1.0;
    for _ in 0..steps {
        dist = kernel.apply(&dist);
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (1..=7).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15]);
        assert_eq!(partitions(3), vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn two_vertex_edge_probability() {
        for &(p, q) in &[(0.3, 2.0), (0.5, 3.0), (0.9, 1.5)] {
            let d = rc_exact_stationary(2, p, q).unwrap();
            let expected = p / (p + (1.0 - p) * q);
            assert!((d.prob_of(&[2]).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn three_vertex_hand_enumeration() {
        // p = 1/2 so every subset has the same base weight; q = 2.
        // {1,1,1}: empty set, k = 3 -> 8. {2,1}: 3 single edges, k = 2 -> 12.
        // {3}: 3 two-edge paths + triangle, k = 1 -> 8. Total 28.
        let d = rc_exact_stationary(3, 0.5, 2.0).unwrap();
        assert!((d.prob_of(&[1, 1, 1]).unwrap() - 8.0 / 28.0).abs() < 1e-14);
        assert!((d.prob_of(&[2, 1]).unwrap() - 12.0 / 28.0).abs() < 1e-14);
        assert!((d.prob_of(&[3]).unwrap() - 8.0 / 28.0).abs() < 1e-14);
    }

    #[test]
    fn size_gates() {
        assert!(matches!(rc_exact_stationary(7, 0.5, 2.0), Err(MixerError::Size(_))));
        assert!(matches!(cm_exact_kernel_check(6, 1.0, 2.0), Err(MixerError::Size(_))));
        assert!(matches!(glauber_balance_check(11, 3, 1.0), Err(MixerError::Size(_))));
    }

    #[test]
    fn count_states_colex() {
        let s = count_states(2, 3).unwrap();
        assert_eq!(
            s,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
    }

    #[test]
    fn two_spin_potts_counts() {
        // Four configurations: two agreeing (weight e^{β/2}) and two disagreeing.
        let beta = 1.3;
        let d = potts_counts_stationary(2, 2, beta).unwrap();
        let agree = d.prob_of(&[2, 0]).unwrap() + d.prob_of(&[0, 2]).unwrap();
        let disagree = d.prob_of(&[1, 1]).unwrap();
        assert!((agree / disagree - (beta / 2.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn kernels_are_stochastic() {
        assert!(cm_exact_kernel(4, 0.4, 1.5).unwrap().max_row_sum_error() < 1e-12);
        assert!(sw_exact_kernel(4, 0.4, 3).unwrap().max_row_sum_error() < 1e-12);
        assert!(glauber_count_kernel(6, 3, 1.7, true).unwrap().max_row_sum_error() < 1e-12);
    }

    #[test]
    fn tv_basics() {
        let a = [0.2, 0.3, 0.5];
        let b = [0.5, 0.3, 0.2];
        assert_eq!(tv_distance(&a, &a), 0.0);
        assert!((tv_distance(&a, &b) - 0.3).abs() < 1e-15);
        let d = ExactDistribution {
            support: vec![vec![1], vec![2]],
            probs: vec![0.5, 0.5],
        };
        assert!(matches!(empirical_tv(&[vec![3u32]], &d), Err(MixerError::Support(_))));
    }

    #[test]
    fn json_export() {
        let d = rc_exact_stationary(2, 0.5, 1.0).unwrap();
        let v = d.to_json();
        assert!((v["2"].as_f64().unwrap() - 0.5).abs() < 1e-15);
        assert!((v["1,1"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    }
}
