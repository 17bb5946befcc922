use alloc::vec::Vec;

use super::sum::NeumaierSum;
use crate::error::{domain, Error, Result};

/// Type-7 sample quantile: linear interpolation between order statistics at
/// position `(n - 1) * alpha`.
pub fn sample_quantile(xs: &[f64], alpha: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty("sample_quantile input"));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(domain("sample_quantile input contains NaN"));
    }
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sample_quantile_sorted(&sorted, alpha)
}

/// [`sample_quantile`] on data that is already sorted ascending.
pub fn sample_quantile_sorted(sorted: &[f64], alpha: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Empty("sample_quantile input"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain(alloc::format!("quantile level {alpha} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * alpha;
    let lo = libm::floor(h) as usize;
    if lo + 1 >= sorted.len() {
        return Ok(sorted[sorted.len() - 1]);
    }
    let frac = h - lo as f64;
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().copied().collect::<NeumaierSum>().value() / xs.len() as f64
}

/// Sample standard deviation with the `n - 1` divisor; 0 for a single value.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss = xs.iter().map(|x| (x - m) * (x - m)).collect::<NeumaierSum>().value();
    libm::sqrt(ss / (xs.len() - 1) as f64)
}
