//! One-sample Wilcoxon signed-rank test.

use alloc::vec;
use alloc::vec::Vec;

use super::normal::norm_cdf;
use crate::error::{Error, Result};

/// Largest number of nonzero differences handled by exact enumeration.
pub const EXACT_MAX: usize = 25;
/// Minimum number of usable differences.
pub const MIN_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Alternative {
    /// Differences tend to be positive.
    Greater,
}

/// Treatment of exact-zero differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ZeroPolicy {
    /// Discard zeros before ranking (Wilcoxon's original treatment).
    #[default]
    Drop,
    /// Rank zeros with the rest and credit half of each zero's rank to the
    /// positive sum. When every difference is zero there is no evidence
    /// either way and the p-value is 1/2.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WilcoxonResult {
    /// Sum of ranks of positive differences (plus split zero ranks).
    pub statistic: f64,
    pub p_value: f64,
    pub n_nonzero: usize,
    pub exact: bool,
}

/// One-sided p-value with zeros dropped.
pub fn wilcoxon_signed_rank(diffs: &[f64], alternative: Alternative) -> Result<f64> {
    wilcoxon_signed_rank_with(diffs, alternative, ZeroPolicy::Drop).map(|r| r.p_value)
}

pub fn wilcoxon_signed_rank_with(diffs: &[f64], alternative: Alternative, zeros: ZeroPolicy) -> Result<WilcoxonResult> {
    let Alternative::Greater = alternative;
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(crate::error::domain("Wilcoxon differences must be finite"));
    }
    let n_nonzero = diffs.iter().filter(|&&d| d != 0.0).count();
    let ranked: Vec<f64> = match zeros {
        ZeroPolicy::Drop => diffs.iter().copied().filter(|&d| d != 0.0).collect(),
        ZeroPolicy::Split => diffs.to_vec(),
    };
    if ranked.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, found: ranked.len() });
    }

    // doubled midranks are integers
    let ranks2 = doubled_midranks(&ranked);
    let mut w2_nonzero: u64 = 0;
    let mut w2_zero: u64 = 0;
    let mut nz_ranks2 = Vec::with_capacity(n_nonzero);
    for (d, &r2) in ranked.iter().zip(&ranks2) {
        if *d > 0.0 {
            w2_nonzero += r2;
        } else if *d == 0.0 {
            w2_zero += r2;
        }
        if *d != 0.0 {
            nz_ranks2.push(r2);
        }
    }
    // Each zero contributes half its rank: in doubled units, r2 / 2.
    let statistic = (w2_nonzero as f64 + 0.5 * w2_zero as f64) / 2.0;

    if n_nonzero == 0 {
        return Ok(WilcoxonResult { statistic, p_value: 0.5, n_nonzero, exact: true });
    }

    if n_nonzero <= EXACT_MAX {
        let p_value = exact_upper_tail(&nz_ranks2, w2_nonzero);
        return Ok(WilcoxonResult { statistic, p_value, n_nonzero, exact: true });
    }

    // Normal approximation on the nonzero part; midranks already carry the
    // tie correction through the sum of squared ranks.
    let total2: u64 = nz_ranks2.iter().sum();
    let mean = total2 as f64 / 4.0;
    let var = nz_ranks2
        .iter()
        .map(|&r| {
            let half = r as f64 / 2.0;
            half * half
        })
        .sum::<f64>()
        / 4.0;
    let w = w2_nonzero as f64 / 2.0;
    let z = (w - mean - 0.5) / libm::sqrt(var);
    Ok(WilcoxonResult { statistic, p_value: norm_cdf(-z), n_nonzero, exact: false })
}

fn doubled_midranks(xs: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs()));
    let mut ranks = vec![0u64; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]].abs() == xs[order[i]].abs() {
            j += 1;
        }
        // ranks i+1 ..= j+1 share (i + j + 2) / 2; doubled: i + j + 2
        let r2 = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            ranks[k] = r2;
        }
        i = j + 1;
    }
    ranks
}

// P(sum of a random subset of `ranks2` >= observed) under fair signs.
fn exact_upper_tail(ranks2: &[u64], observed2: u64) -> f64 {
    let total: u64 = ranks2.iter().sum();
    let mut counts = vec![0.0_f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            let c = counts[s];
            if c != 0.0 {
                counts[s + r] += c;
            }
        }
        reach += r;
    }
    let tail: f64 = counts[observed2 as usize..].iter().sum();
    tail / libm::ldexp(1.0, ranks2.len() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Enumerate all sign assignments of |d| and count W+ >= observed.
    fn brute_force(diffs: &[f64]) -> f64 {
        let n = diffs.len();
        let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
        let rank = |i: usize| {
            let less = abs.iter().filter(|&&a| a < abs[i]).count() as f64;
            let eq = abs.iter().filter(|&&a| a == abs[i]).count() as f64;
            less + (eq + 1.0) / 2.0
        };
        let ranks: Vec<f64> = (0..n).map(rank).collect();
        let obs: f64 = (0..n).filter(|&i| diffs[i] > 0.0).map(|i| ranks[i]).sum();
        let mut hits = 0u32;
        for mask in 0u32..(1 << n) {
            let w: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if w >= obs - 1e-9 {
                hits += 1;
            }
        }
        f64::from(hits) / f64::from(1u32 << n)
    }

    #[test]
    fn all_positive_is_extreme() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let p = wilcoxon_signed_rank(&d, Alternative::Greater).unwrap();
        assert!((p - 1.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pairs_near_half() {
        let d = [1.0, -1.0, 2.0, -2.0, 3.0, -3.0, 4.0, -4.0, 5.0, -5.0];
        let p = wilcoxon_signed_rank(&d, Alternative::Greater).unwrap();
        assert!((p - 0.5).abs() < 0.15, "p={p}");
    }

    #[test]
    fn matches_enumeration_with_ties() {
        let d = [0.8, -0.3, 1.2, 0.3, -2.1, 0.5, 1.9, -0.7, 0.8, 2.4, -0.1, 1.1];
        let p = wilcoxon_signed_rank(&d, Alternative::Greater).unwrap();
        let oracle = brute_force(&d);
        assert!((p - oracle).abs() < 1e-14, "{p} vs {oracle}");
    }

    #[test]
    fn too_few_nonzero() {
        let d = [1.0, 0.0, 0.0, 2.0, -1.0, 0.0, 3.0];
        assert!(matches!(
            wilcoxon_signed_rank(&d, Alternative::Greater),
            Err(Error::TooFewSamples { needed: 5, found: 4 })
        ));
    }

    #[test]
    fn split_zeros() {
        let z = [0.0; 12];
        let r = wilcoxon_signed_rank_with(&z, Alternative::Greater, ZeroPolicy::Split).unwrap();
        assert_eq!(r.p_value, 0.5);
        assert_eq!(r.statistic, 39.0); // half of 1 + ... + 12
    }

    #[test]
    fn normal_branch_close_to_exact_scale() {
        // 40 differences with a mild positive shift
        let d: Vec<f64> = (0..40).map(|i| f64::from(i % 7) - 2.6 + 0.01 * f64::from(i)).collect();
        let r = wilcoxon_signed_rank_with(&d, Alternative::Greater, ZeroPolicy::Drop).unwrap();
        assert!(!r.exact);
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        let rn = wilcoxon_signed_rank_with(&neg, Alternative::Greater, ZeroPolicy::Drop).unwrap();
        // continuity correction makes the two tails sum to slightly more than 1
        assert!(r.p_value + rn.p_value >= 1.0 && r.p_value + rn.p_value < 1.1);
    }
}
