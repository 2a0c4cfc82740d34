//! Spearman rank correlation with a two-sided p-value.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Largest sample for which the exact permutation test is offered.
pub const EXACT_MAX_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueMethod {
    /// Student-t approximation with `n - 2` degrees of freedom.
    #[default]
    TApprox,
    /// Enumerate all permutations of the second ranking (`n <= 10`).
    Exact,
}

/// Fractional ranks starting at 1; tied values share their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of two equal-length samples, `None` if either is constant.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooShort { len: a.len(), min: 2 });
    }
    Ok(pearson(a, b))
}

fn t_approx_p(rho: f64, n: usize) -> f64 {
    let denom = 1.0 - rho * rho;
    if denom <= 1e-15 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Two-sided permutation p-value: the share of orderings of `rb` whose rank
/// correlation with `ra` is at least as extreme as the observed one.
fn exact_p(ra: &[f64], rb: &[f64], rho: f64) -> f64 {
    let n = rb.len();
    let mut perm = rb.to_vec();
    let mut c = vec![0usize; n];
    let threshold = rho.abs() - 1e-12;
    let mut total = 0u64;
    let mut extreme = 0u64;
    let mut visit = |p: &[f64]| {
        total += 1;
        if pearson(ra, p).is_some_and(|r| r.abs() >= threshold) {
            extreme += 1;
        }
    };
    // Heap's algorithm
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    extreme as f64 / total as f64
}

pub fn spearman(a: &[f64], b: &[f64]) -> Result<Spearman> {
    spearman_with(a, b, PValueMethod::TApprox)
}

pub fn spearman_with(a: &[f64], b: &[f64], method: PValueMethod) -> Result<Spearman> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 3 {
        return Err(Error::TooShort { len: n, min: 3 });
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let rho = pearson(&ra, &rb).ok_or(Error::ConstantInput)?;
    let p_value = match method {
        PValueMethod::TApprox => t_approx_p(rho, n),
        PValueMethod::Exact => {
            if n > EXACT_MAX_N {
                return Err(Error::InvalidConfig(format!(
                    "exact permutation p-value supports n <= {EXACT_MAX_N}, got {n}"
                )));
            }
            exact_p(&ra, &rb, rho)
        }
    };
    Ok(Spearman { rho, p_value })
}
