//! Quartiles, Wilcoxon rank-sum test and Cohen's kappa.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degenerate marginals: chance agreement is 1 but observed agreement is not")]
    DegenerateMarginals,
    #[error("non-finite value in sample")]
    NonFinite,
}

/// Smallest reported p-value.
pub const P_FLOOR: f64 = 1e-300;
/// Largest pooled size handled by full enumeration.
pub const EXACT_MAX_N: usize = 20;

/// Linear interpolation between closest ranks on a sorted slice (`h = (n-1)p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(series: &[f64], p: f64) -> Result<f64, StatsError> {
    let sorted = sorted_copy(series)?;
    Ok(quantile_sorted(&sorted, p))
}

fn sorted_copy(series: &[f64]) -> Result<Vec<f64>, StatsError> {
    if series.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// `(q1, median, q3)`.
pub fn quartiles(series: &[f64]) -> Result<(f64, f64, f64), StatsError> {
    let sorted = sorted_copy(series)?;
    Ok((
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
    ))
}

pub fn median(series: &[f64]) -> Result<f64, StatsError> {
    quantile(series, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

impl std::fmt::Display for WilcoxonMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WilcoxonMethod::Exact => "exact",
            WilcoxonMethod::NormalApprox => "normal_approx",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Mann-Whitney U of the first sample: its rank sum minus `n1(n1+1)/2`.
    pub u_statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Midranks (1-based) of the pooled sample.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Number of size-`m` subsets of `{1..m+n}` for each value of U = rank sum − m(m+1)/2.
fn u_distribution(m: usize, n: usize) -> Vec<u64> {
    // counts[i][u]: subsets of size i from the first j ranks, rolled over j.
    let max_u = m * n;
    let mut counts = vec![vec![0u64; max_u + 1]; m + 1];
    counts[0][0] = 1;
    for j in 1..=(m + n) {
        for i in (1..=m.min(j)).rev() {
            // choosing rank j as the i-th smallest adds j - i to U
            let shift = j - i;
            if shift > n {
                continue;
            }
            for u in (shift..=max_u).rev() {
                counts[i][u] += counts[i - 1][u - shift];
            }
        }
    }
    counts.swap_remove(m)
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(P_FLOOR, 1.0)
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney U) test.
///
/// Pooled samples of at most [`EXACT_MAX_N`] values without ties use the exact
/// null distribution; otherwise the normal approximation with tie-corrected
/// variance and a 0.5 continuity correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (m, n) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..m].iter().sum();
    let u = rank_sum_a - (m * (m + 1)) as f64 / 2.0;

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut has_ties = false;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        if t > 1.0 {
            has_ties = true;
            tie_term += t * t * t - t;
        }
        i = j + 1;
    }

    if m + n <= EXACT_MAX_N && !has_ties {
        let dist = u_distribution(m, n);
        let total: u64 = dist.iter().sum();
        let observed = u.round() as usize;
        let lower: u64 = dist[..=observed].iter().sum();
        let upper: u64 = dist[observed..].iter().sum();
        let tail = lower.min(upper).saturating_mul(2).min(total);
        return Ok(WilcoxonResult {
            u_statistic: u,
            p_value: clamp_p(tail as f64 / total as f64),
            method: WilcoxonMethod::Exact,
        });
    }

    let (mf, nf) = (m as f64, n as f64);
    let big_n = mf + nf;
    let mean = mf * nf / 2.0;
    let variance = mf * nf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if variance <= 0.0 {
        return Ok(WilcoxonResult {
            u_statistic: u,
            p_value: 1.0,
            method: WilcoxonMethod::NormalApprox,
        });
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    let p = statrs::function::erf::erfc(z / std::f64::consts::SQRT_2);
    Ok(WilcoxonResult {
        u_statistic: u,
        p_value: clamp_p(p),
        method: WilcoxonMethod::NormalApprox,
    })
}

/// Cohen's kappa over paired labels.
pub fn cohen_kappa<T: Eq + Hash>(labels_a: &[T], labels_b: &[T]) -> Result<f64, StatsError> {
    if labels_a.len() != labels_b.len() {
        return Err(StatsError::LengthMismatch(labels_a.len(), labels_b.len()));
    }
    if labels_a.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = labels_a.len() as u128;
    let agree = labels_a.iter().zip(labels_b).filter(|(x, y)| x == y).count() as u128;
    let mut marg_a: HashMap<&T, u128> = HashMap::new();
    let mut marg_b: HashMap<&T, u128> = HashMap::new();
    for (x, y) in labels_a.iter().zip(labels_b) {
        *marg_a.entry(x).or_default() += 1;
        *marg_b.entry(y).or_default() += 1;
    }
    let chance: u128 = marg_a
        .iter()
        .map(|(label, ca)| ca * marg_b.get(label).copied().unwrap_or(0))
        .sum();
    // kappa = (n*agree - chance) / (n^2 - chance), all in integer counts
    let denom = n * n - chance;
    if denom == 0 {
        return if agree == n {
            Ok(1.0)
        } else {
            Err(StatsError::DegenerateMarginals)
        };
    }
    Ok(((n * agree) as f64 - chance as f64) / denom as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartile_examples() {
        assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0]).unwrap(), (1.75, 2.5, 3.25));
        assert_eq!(quartiles(&[5.0]).unwrap(), (5.0, 5.0, 5.0));
        assert_eq!(quartiles(&[1.0, 1.0, 1.0, 9.0]).unwrap(), (1.0, 1.0, 3.0));
        assert_eq!(quartiles(&[]), Err(StatsError::EmptySample));
        // input order does not matter
        assert_eq!(quartiles(&[4.0, 1.0, 3.0, 2.0]).unwrap(), (1.75, 2.5, 3.25));
    }

    #[test]
    fn quantile_of_maxima() {
        let maxima: Vec<f64> = (1..=20).map(f64::from).collect();
        assert!((quantile(&maxima, 0.95).unwrap() - 19.05).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_small_exact() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert!((r.p_value - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn wilcoxon_disjoint_five_five() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [6.0, 7.0, 8.0, 9.0, 10.0];
        let r = wilcoxon_rank_sum(&a, &b).unwrap();
        assert_eq!(r.p_value, 2.0 / 252.0);
        assert_eq!(wilcoxon_rank_sum(&b, &a).unwrap().p_value, r.p_value);
        assert_eq!(wilcoxon_rank_sum(&b, &a).unwrap().u_statistic, 25.0);
    }

    #[test]
    fn wilcoxon_identical_samples() {
        let a = [1.0, 5.0, 3.0];
        assert_eq!(wilcoxon_rank_sum(&a, &a).unwrap().p_value, 1.0);
        let r = wilcoxon_rank_sum(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((r.p_value, r.method), (1.0, WilcoxonMethod::NormalApprox));
        assert_eq!(wilcoxon_rank_sum(&[], &[1.0]), Err(StatsError::EmptySample));
    }

    #[test]
    fn wilcoxon_ties_use_normal() {
        // scipy.stats.mannwhitneyu(..., use_continuity=True, method="asymptotic")
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 2.0, 3.0], &[2.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.method, WilcoxonMethod::NormalApprox);
        assert_eq!(r.u_statistic, 2.0);
        assert!((r.p_value - 0.10375367752098565).abs() < 1e-9, "{}", r.p_value);
    }

    #[test]
    fn distribution_counts() {
        assert_eq!(u_distribution(2, 2), vec![1, 1, 2, 1, 1]);
        assert_eq!(u_distribution(5, 5).iter().sum::<u64>(), 252);
    }

    #[test]
    fn kappa_examples() {
        let a = ["P", "P", "N", "N"];
        let b = ["P", "N", "N", "N"];
        assert_eq!(cohen_kappa(&a, &b).unwrap(), 0.5);
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&["x", "x"], &["x", "x"]).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&a, &b[..3]), Err(StatsError::LengthMismatch(4, 3)));
        // total disagreement on a balanced binary split
        assert_eq!(cohen_kappa(&["a", "b"], &["b", "a"]).unwrap(), -1.0);
    }
}
