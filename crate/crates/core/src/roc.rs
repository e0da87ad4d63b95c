//! ROC curves and AUC for scores of known differentially expressed (DE) and
//! null genes. Genes are called when their score exceeds the threshold, and
//! the threshold sweeps every observed value from the top down, so tied
//! scores across the two classes produce a diagonal segment.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub statistic: String,
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, non-decreasing in both.
    pub points: Vec<(f64, f64)>,
    /// Trapezoidal area under `points`.
    pub auc: f64,
    pub n_de: usize,
    pub n_null: usize,
}

/// Trapezoidal area under a piecewise-linear curve.
pub fn auc(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5)
        .sum()
}

pub fn build_roc(statistic: &str, de: &[f64], null: &[f64]) -> Result<RocCurve> {
    if de.is_empty() || null.is_empty() {
        return Err(Error::invalid(format!(
            "ROC for {statistic} needs scores on both sides (got {} DE, {} null)",
            de.len(),
            null.len()
        )));
    }
    if de.iter().chain(null).any(|v| v.is_nan()) {
        return Err(Error::invalid(format!("NaN score in ROC input for {statistic}")));
    }
    let mut all: Vec<(f64, bool)> = de
        .iter()
        .map(|&v| (v, true))
        .chain(null.iter().map(|&v| (v, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (p, n) = (de.len() as f64, null.len() as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let v = all[i].0;
        while i < all.len() && all[i].0 == v {
            if all[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n, tp as f64 / p));
    }
    let area = auc(&points);
    Ok(RocCurve {
        statistic: statistic.to_owned(),
        points,
        auc: area,
        n_de: de.len(),
        n_null: null.len(),
    })
}

/// Mann-Whitney estimate `P(de > null) + P(de = null) / 2` via midranks.
pub fn mann_whitney_auc(de: &[f64], null: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = de
        .iter()
        .map(|&v| (v, true))
        .chain(null.iter().map(|&v| (v, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + j + 1) as f64 / 2.0;
        rank_sum += midrank * all[i..j].iter().filter(|e| e.1).count() as f64;
        i = j;
    }
    let (p, n) = (de.len() as f64, null.len() as f64);
    (rank_sum - p * (p + 1.0) / 2.0) / (p * n)
}

/// Hanley-McNeil standard error of an AUC estimate.
pub fn auc_standard_error(auc: f64, n_de: usize, n_null: usize) -> f64 {
    let (p, n) = (n_de as f64, n_null as f64);
    let q1 = auc / (2.0 - auc);
    let q2 = 2.0 * auc * auc / (1.0 + auc);
    ((auc * (1.0 - auc) + (p - 1.0) * (q1 - auc * auc) + (n - 1.0) * (q2 - auc * auc)) / (p * n))
        .sqrt()
}

/// `statistic,fpr,tpr` rows for all curves.
pub fn curves_csv(curves: &[RocCurve]) -> String {
    let mut out = String::from("statistic,fpr,tpr\n");
    for c in curves {
        for (f, t) in &c.points {
            let _ = writeln!(out, "{},{},{}", c.statistic, f, t);
        }
    }
    out
}

/// `statistic,auc,n_de,n_null,excluded` rows; `excluded` pairs with `curves`.
pub fn summary_csv(curves: &[RocCurve], excluded: &[usize]) -> String {
    let mut out = String::from("statistic,auc,n_de,n_null,excluded\n");
    for (c, x) in curves.iter().zip(excluded) {
        let _ = writeln!(out, "{},{},{},{},{}", c.statistic, c.auc, c.n_de, c.n_null, x);
    }
    out
}
