//! Small statistics helpers shared by the Monte Carlo estimators.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    (mean, (sample_variance(xs) / n as f64).sqrt())
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
}

/// Binomial standard error of a frequency `p` over `n` trials.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and a
/// continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).map(|d| d.cdf(x)).unwrap_or(f64::NAN)
}

/// Pearson χ² goodness-of-fit p-value of `counts` against the uniform law.
pub fn chi2_uniform_pvalue(counts: &[usize]) -> f64 {
    let k = counts.len();
    let total: usize = counts.iter().sum();
    if k < 2 || total == 0 {
        return 1.0;
    }
    let expected = total as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    ChiSquared::new((k - 1) as f64)
        .map(|d| 1.0 - d.cdf(stat))
        .unwrap_or(f64::NAN)
}


/// Side through which a trajectory left a window around a saddle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ExitSide {
    Right,
    Left,
    Timeout,
}

impl ExitSide {
    pub fn label(self) -> &'static str {
        match self {
            ExitSide::Right => "right",
            ExitSide::Left => "left",
            ExitSide::Timeout => "timeout",
        }
    }
}

/// Empirical exit frequencies with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExitProbabilities {
    pub p_right: f64,
    pub p_left: f64,
    pub p_timeout: f64,
    pub stderr_right: f64,
    pub stderr_left: f64,
    pub stderr_timeout: f64,
    pub replicas: usize,
}

impl ExitProbabilities {
    pub fn from_sides<I: IntoIterator<Item = ExitSide>>(sides: I) -> Self {
        let (mut r, mut l, mut t) = (0usize, 0usize, 0usize);
        for s in sides {
            match s {
                ExitSide::Right => r += 1,
                ExitSide::Left => l += 1,
                ExitSide::Timeout => t += 1,
            }
        }
        let n = r + l + t;
        let freq = |c: usize| if n == 0 { f64::NAN } else { c as f64 / n as f64 };
        let (pr, pl, pt) = (freq(r), freq(l), freq(t));
        Self {
            p_right: pr,
            p_left: pl,
            p_timeout: pt,
            stderr_right: binomial_stderr(pr, n),
            stderr_left: binomial_stderr(pl, n),
            stderr_timeout: binomial_stderr(pt, n),
            replicas: n,
        }
    }
}
