//! Sparse Erdős–Rényi sampling reduced to component sizes.
//!
//! Edges of `G(m, p)` are generated by geometric jumps over the colex pair
//! index `k = j(j-1)/2 + i` (`i < j`), so the work is proportional to the
//! number of edges rather than `m²`. Components are tracked with a
//! union-find using path halving and union by size; only the multiset of
//! component sizes is ever returned.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MixerError, Result};
use crate::rng::run_replicas;
use crate::stats::mean_stderr;

/// Multiset of component sizes, stored in descending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentMultiset {
    sizes: Vec<u32>,
    total: u64,
}

impl ComponentMultiset {
    pub fn from_sizes(mut sizes: Vec<u32>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(MixerError::Domain("component sizes must be positive".into()));
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let total = sizes.iter().map(|&s| s as u64).sum();
        Ok(Self { sizes, total })
    }

    pub(crate) fn from_sorted_unchecked(sizes: Vec<u32>) -> Self {
        debug_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
        let total = sizes.iter().map(|&s| s as u64).sum();
        Self { sizes, total }
    }

    pub fn empty() -> Self {
        Self {
            sizes: Vec::new(),
            total: 0,
        }
    }

    pub fn singletons(m: usize) -> Self {
        Self {
            sizes: vec![1; m],
            total: m as u64,
        }
    }

    /// Sizes in descending order; ties keep their stored order.
    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of components.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn largest(&self) -> u32 {
        self.sizes.first().copied().unwrap_or(0)
    }

    /// Disjoint union of two multisets.
    pub fn union(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.sizes.len() + other.sizes.len());
        let (mut a, mut b) = (self.sizes.iter().peekable(), other.sizes.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x >= y {
                        out.push(x);
                        a.next();
                    } else {
                        out.push(y);
                        b.next();
                    }
                }
                (Some(_), None) => {
                    out.extend(a);
                    break;
                }
                (None, Some(_)) => {
                    out.extend(b);
                    break;
                }
                (None, None) => break,
            }
        }
        Self {
            sizes: out,
            total: self.total + other.total,
        }
    }
}

/// Summary statistics of a component multiset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentStats {
    pub l1: u64,
    pub l2: u64,
    pub r2: u64,
    pub r2_minus: u64,
    pub r3: u128,
    pub r3_minus: u128,
    /// Number of isolated vertices.
    pub i1: u64,
}

pub fn component_stats(cm: &ComponentMultiset) -> ComponentStats {
    let sizes = cm.sizes();
    let l1 = sizes.first().copied().unwrap_or(0) as u64;
    let l2 = sizes.get(1).copied().unwrap_or(0) as u64;
    let mut r2 = 0u64;
    let mut r3 = 0u128;
    let mut i1 = 0u64;
    for &s in sizes {
        let s = s as u64;
        r2 += s * s;
        r3 += (s as u128).pow(3);
        if s == 1 {
            i1 += 1;
        }
    }
    ComponentStats {
        l1,
        l2,
        r2,
        r2_minus: r2 - l1 * l1,
        r3,
        r3_minus: r3 - (l1 as u128).pow(3),
        i1,
    }
}

/// Union-find over `0..m` with path halving and union by size.
#[derive(Debug, Clone, Default)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(m: usize) -> Self {
        let mut uf = Self::default();
        uf.reset(m);
        uf
    }

    pub fn reset(&mut self, m: usize) {
        self.parent.clear();
        self.parent.extend(0..m as u32);
        self.size.clear();
        self.size.resize(m, 1);
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }

    /// Component sizes in descending order.
    pub fn component_sizes(&mut self) -> Vec<u32> {
        let m = self.parent.len();
        let mut sizes: Vec<u32> = (0..m as u32)
            .filter(|&v| self.parent[v as usize] == v)
            .map(|v| self.size[v as usize])
            .collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

/// Decodes the colex pair index `k = j(j-1)/2 + i` into `(i, j)`, `i < j`.
pub fn decode_pair(k: u64) -> (u32, u32) {
    let mut j = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0) as u64;
    while j * (j - 1) / 2 > k {
        j -= 1;
    }
    while (j + 1) * j / 2 <= k {
        j += 1;
    }
    let i = k - j * (j - 1) / 2;
    (i as u32, j as u32)
}

/// Calls `edge(i, j)` for every edge of one `G(m, p)` draw, in pair-index order.
pub fn for_each_er_edge<R: Rng + ?Sized, F: FnMut(u32, u32)>(m: usize, p: f64, rng: &mut R, mut edge: F) {
    let pairs = (m as u64) * (m as u64).saturating_sub(1) / 2;
    if pairs == 0 || !(p > 0.0) {
        return;
    }
    if p >= 1.0 {
        for k in 0..pairs {
            let (i, j) = decode_pair(k);
            edge(i, j);
        }
        return;
    }
    let log_keep = (-p).ln_1p();
    let mut k: u64 = 0;
    let mut first = true;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_keep).floor();
        // jump to the next present pair
        let step = if first { skip } else { skip + 1.0 };
        first = false;
        if !(step < (pairs - k) as f64) {
            return;
        }
        k += step as u64;
        if k >= pairs {
            return;
        }
        let (i, j) = decode_pair(k);
        edge(i, j);
    }
}

/// Edge list of one `G(m, p)` draw.
pub fn sample_er_edges<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for_each_er_edge(m, p, rng, |i, j| edges.push((i, j)));
    edges
}

/// Reusable workspace for repeated component sampling.
#[derive(Debug, Clone, Default)]
pub struct ErSampler {
    uf: UnionFind,
}

impl ErSampler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Component sizes of one `G(m, p)` draw, in descending order.
    pub fn sample_sizes<R: Rng + ?Sized>(&mut self, m: usize, p: f64, rng: &mut R) -> Vec<u32> {
        self.uf.reset(m);
        let uf = &mut self.uf;
        for_each_er_edge(m, p, rng, |i, j| uf.union(i, j));
        self.uf.component_sizes()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, m: usize, p: f64, rng: &mut R) -> ComponentMultiset {
        ComponentMultiset::from_sorted_unchecked(self.sample_sizes(m, p, rng))
    }
}

/// Component-size multiset of `G(m, p)`. Identical generator state gives
/// identical output.
pub fn sample_er_components<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> ComponentMultiset {
    ErSampler::new().sample(m, p, rng)
}

/// Monte Carlo estimate of `E[R2]/m` when `mp ≤ 1`, or of `E[R2^-]/m` when
/// `mp > 1`, with its standard error.
pub fn mc_r2_density(m: usize, p: f64, replicas: usize, master_seed: u64) -> (f64, f64) {
    let supercritical = m as f64 * p > 1.0;
    let samples = run_replicas(replicas, master_seed, None, |_, rng| {
        let stats = component_stats(&sample_er_components(m, p, rng));
        let r = if supercritical { stats.r2_minus } else { stats.r2 };
        r as f64 / m as f64
    });
    mean_stderr(&samples)
}

/// Keeps each component independently with probability `(1 - 1/q)^rounds`:
/// the components never activated in `rounds` activation steps.
pub fn survivors_after_rounds<R: Rng + ?Sized>(
    cm: &ComponentMultiset,
    rounds: u32,
    q: f64,
    rng: &mut R,
) -> ComponentMultiset {
    if rounds == 0 {
        return cm.clone();
    }
    let keep = (1.0 - 1.0 / q).powi(rounds as i32);
    let sizes = cm
        .sizes()
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < keep)
        .collect();
    ComponentMultiset::from_sorted_unchecked(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;

    #[test]
    fn stats_of_small_multiset() {
        let cm = ComponentMultiset::from_sizes(vec![1, 3, 1]).unwrap();
        let s = component_stats(&cm);
        assert_eq!((s.l1, s.l2, s.r2, s.r2_minus, s.i1), (3, 1, 11, 2, 2));
        assert_eq!((s.r3, s.r3_minus), (29, 2));
    }

    #[test]
    fn stats_of_singletons_and_empty() {
        let s = component_stats(&ComponentMultiset::singletons(17));
        assert_eq!((s.r2, s.i1, s.l1), (17, 17, 1));
        assert_eq!(component_stats(&ComponentMultiset::empty()), ComponentStats::default());
    }

    #[test]
    fn zero_size_rejected() {
        assert!(ComponentMultiset::from_sizes(vec![2, 0]).is_err());
    }

    #[test]
    fn decode_pair_enumerates_colex() {
        let mut k = 0;
        for j in 1..60u32 {
            for i in 0..j {
                assert_eq!(decode_pair(k), (i, j));
                k += 1;
            }
        }
        let big = 499_999u64 * 500_000 / 2 + 1234;
        assert_eq!(decode_pair(big), (1234, 500_000));
    }

    #[test]
    fn extreme_edge_probabilities() {
        let mut rng = seed_stream(1, 0);
        assert_eq!(sample_er_components(9, 0.0, &mut rng), ComponentMultiset::singletons(9));
        assert_eq!(sample_er_components(5, 1.0, &mut rng).sizes(), &[5]);
        assert_eq!(sample_er_edges(5, 1.0, &mut rng).len(), 10);
        assert!(sample_er_components(0, 0.5, &mut rng).is_empty());
        assert_eq!(sample_er_components(1, 0.5, &mut rng).sizes(), &[1]);
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let a = sample_er_components(5000, 1.5 / 5000.0, &mut seed_stream(11, 3));
        let b = sample_er_components(5000, 1.5 / 5000.0, &mut seed_stream(11, 3));
        assert_eq!(a, b);
        assert_eq!(a.total(), 5000);
    }

    #[test]
    fn union_preserves_order_and_total() {
        let a = ComponentMultiset::from_sizes(vec![5, 2, 1]).unwrap();
        let b = ComponentMultiset::from_sizes(vec![4, 2]).unwrap();
        let u = a.union(&b);
        assert_eq!(u.sizes(), &[5, 4, 2, 2, 1]);
        assert_eq!(u.total(), 14);
    }

    #[test]
    fn survivors_identity_and_large_q() {
        let cm = ComponentMultiset::from_sizes(vec![7, 3, 3, 1, 1]).unwrap();
        let mut rng = seed_stream(2, 0);
        assert_eq!(survivors_after_rounds(&cm, 0, 3.0, &mut rng), cm);
        let kept = (0..1000)
            .filter(|_| survivors_after_rounds(&cm, 1, 1e9, &mut rng) == cm)
            .count();
        assert!(kept >= 999);
    }
}
