//! Sample statistics used by the reports.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self { mean, se, n }
    }

    /// `(mean - target) / se`.
    pub fn z(&self, target: f64) -> f64 {
        (self.mean - target) / self.se
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.se
    }
}

/// Binomial frequency of `k` successes in `n` trials against `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency {
    pub observed: f64,
    pub expected: f64,
    /// `sqrt(p (1 - p) / n)`.
    pub sigma: f64,
    pub z: f64,
}

impl Frequency {
    pub fn new(k: usize, n: usize, p: f64) -> Self {
        let observed = k as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        Self { observed, expected: p, sigma, z: (observed - p) / sigma }
    }
}

/// Pearson goodness of fit of `counts` against probabilities `p`.
pub fn chi_square_gof(counts: &[usize], p: &[f64]) -> (f64, f64) {
    let n: usize = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(p)
        .filter(|(_, &q)| q > 0.0)
        .map(|(&c, &q)| {
            let e = q * n as f64;
            (c as f64 - e) * (c as f64 - e) / e
        })
        .sum();
    (stat, upper_tail(stat, counts.len().saturating_sub(1)))
}

/// Compares two estimates of a probability vector whose per-sample
/// contributions are `a[s][k]` and `b[s][k]` (independent samples). Returns the
/// Wald statistic on the first `k - 1` components with the pooled covariance,
/// and its chi-square p-value.
pub fn compare_probability_vectors(a: &[Vec<f64>], b: &[Vec<f64>]) -> (f64, f64) {
    let k = a.first().map_or(0, Vec::len);
    if k < 2 {
        return (0.0, 1.0);
    }
    let m = k - 1;
    let (ma, ca) = mean_cov(a, m);
    let (mb, cb) = mean_cov(b, m);
    let d: Vec<f64> = (0..m).map(|i| ma[i] - mb[i]).collect();
    let mut cov: Vec<f64> = ca.iter().zip(&cb).map(|(x, y)| x + y).collect();
    let Some(sol) = solve(&mut cov, d.clone(), m) else {
        return if d.iter().all(|v| *v == 0.0) { (0.0, 1.0) } else { (f64::INFINITY, 0.0) };
    };
    let stat: f64 = d.iter().zip(&sol).map(|(x, y)| x * y).sum();
    (stat, upper_tail(stat, m))
}

fn mean_cov(rows: &[Vec<f64>], m: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; m];
    for r in rows {
        for i in 0..m {
            mean[i] += r[i] / n;
        }
    }
    let mut cov = vec![0.0; m * m];
    for r in rows {
        for i in 0..m {
            for j in 0..m {
                cov[i * m + j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    // covariance of the mean
    let scale = 1.0 / ((n - 1.0) * n);
    (mean, cov.into_iter().map(|c| c * scale).collect())
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve(a: &mut [f64], mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r * n + c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}

fn upper_tail(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
}

/// Median of a non-empty sample.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
