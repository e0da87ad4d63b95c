//! Order-based summaries (median, MAD, percentile, IQR) and the pooled
//! standard deviation.
//!
//! Percentiles use linear interpolation at fractional rank
//! `h = (r / 100) * (len - 1)` on the sorted values, so `q_50` is the usual
//! midpoint median and `q_100` is the maximum. None of the functions modify
//! their input.

use crate::error::{Error, Result};

/// Consistency factor that makes the MAD estimate the standard deviation
/// of normal data.
pub const MAD_SCALE: f64 = 1.4826;

fn sorted_copy(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn non_empty(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        Err(Error::invalid(format!("{what} of an empty vector")))
    } else {
        Ok(())
    }
}

/// Median of an ascending slice. Panics on empty input.
pub(crate) fn median_sorted(s: &[f64]) -> f64 {
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Interpolated percentile of an ascending slice; `r` must lie in [0, 100].
pub(crate) fn percentile_sorted(s: &[f64], r: f64) -> f64 {
    let h = r / 100.0 * (s.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        s[lo]
    } else {
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    }
}

/// Median of `|v_j - center|` over the supplied values (not scaled).
pub(crate) fn abs_dev_median<'a>(
    groups: impl IntoIterator<Item = (&'a [f64], f64)>,
    scratch: &mut Vec<f64>,
) -> f64 {
    scratch.clear();
    for (vals, center) in groups {
        scratch.extend(vals.iter().map(|v| (v - center).abs()));
    }
    scratch.sort_by(f64::total_cmp);
    median_sorted(scratch)
}

pub fn median(v: &[f64]) -> Result<f64> {
    non_empty(v, "median")?;
    Ok(median_sorted(&sorted_copy(v)))
}

/// Median absolute deviation from `center`, multiplied by [`MAD_SCALE`]
/// when `scaled` is set.
pub fn mad(v: &[f64], center: f64, scaled: bool) -> Result<f64> {
    non_empty(v, "mad")?;
    let raw = abs_dev_median([(v, center)], &mut Vec::with_capacity(v.len()));
    Ok(if scaled { MAD_SCALE * raw } else { raw })
}

pub fn percentile(v: &[f64], r: f64) -> Result<f64> {
    non_empty(v, "percentile")?;
    if !(0.0..=100.0).contains(&r) {
        return Err(Error::invalid(format!(
            "percentile rank {r} outside [0, 100]"
        )));
    }
    Ok(percentile_sorted(&sorted_copy(v), r))
}

/// Interquartile range `q_75 - q_25`.
pub fn iqr(v: &[f64]) -> Result<f64> {
    non_empty(v, "iqr")?;
    let s = sorted_copy(v);
    Ok(percentile_sorted(&s, 75.0) - percentile_sorted(&s, 25.0))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pooled two-sample standard deviation with `n + m - 2` degrees of freedom.
pub fn pooled_sd(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() + y.len() < 3 || x.is_empty() || y.is_empty() {
        return Err(Error::invalid(format!(
            "pooled sd needs both groups non-empty and n + m >= 3 (got n={}, m={})",
            x.len(),
            y.len()
        )));
    }
    let ss = |v: &[f64]| {
        let c = mean(v);
        v.iter().map(|a| (a - c) * (a - c)).sum::<f64>()
    };
    let df = (x.len() + y.len() - 2) as f64;
    Ok(((ss(x) + ss(y)) / df).sqrt())
}
