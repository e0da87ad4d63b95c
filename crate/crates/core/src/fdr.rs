//! Permutation estimate of the false discovery rate, SAM style.
//!
//! Thresholds are the distinct observed scores. At threshold `t` a gene is
//! called when its score exceeds `t`; the expected number of false calls is
//! `pi0` times the mean (or median) over label permutations of the number of
//! permuted scores above `t`.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataset::{Class, ExpressionDataset};
use crate::detectors::{score_split, ScoreConfig, Statistic};
use crate::error::{Error, Result};
use crate::rng::{stream, StreamDomain};

pub const DEFAULT_PERMUTATIONS: usize = 200;

/// How per-permutation false-call counts are summarized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FalseCount {
    Mean,
    Median,
}

impl FromStr for FalseCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(FalseCount::Mean),
            "median" => Ok(FalseCount::Median),
            _ => Err(Error::invalid(format!("false-count summary must be mean or median, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrConfig {
    pub permutations: usize,
    pub seed: u64,
    /// Assumed proportion of true nulls.
    pub pi0: f64,
    pub false_count: FalseCount,
}

impl Default for FdrConfig {
    fn default() -> Self {
        Self {
            permutations: DEFAULT_PERMUTATIONS,
            seed: 1,
            pi0: 1.0,
            false_count: FalseCount::Mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdrRow {
    pub threshold: f64,
    pub called: usize,
    pub expected_false: f64,
    pub fdr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrTable {
    pub statistic: Statistic,
    /// Descending threshold, so `called` never decreases down the table.
    pub rows: Vec<FdrRow>,
    pub permutations: usize,
    pub seed: u64,
}

/// Observed scores and the sorted score sets of every label permutation.
/// Degenerate genes are dropped from each set independently.
#[derive(Debug, Clone)]
pub struct PermutationNull {
    pub observed: Vec<f64>,
    permuted: Vec<Vec<f64>>,
    pi0: f64,
    false_count: FalseCount,
}

impl PermutationNull {
    pub fn build(
        dataset: &ExpressionDataset,
        statistic: Statistic,
        score: &ScoreConfig<'_>,
        config: &FdrConfig,
    ) -> Result<Self> {
        if config.permutations == 0 {
            return Err(Error::invalid("need at least one permutation"));
        }
        if !(config.pi0 > 0.0 && config.pi0 <= 1.0) {
            return Err(Error::invalid(format!("pi0 = {} outside (0, 1]", config.pi0)));
        }
        let normal = dataset.class_indices(Class::Normal);
        let cancer = dataset.class_indices(Class::Cancer);
        let score = ScoreConfig {
            statistics: vec![statistic],
            ..score.clone()
        };
        score.check(normal.len(), cancer.len())?;

        let labels = dataset.labels().to_vec();
        let observed = score_split(dataset, &normal, &cancer, statistic, &score)
            .into_iter()
            .flatten()
            .collect();
        let permuted = (0..config.permutations)
            .into_par_iter()
            .map(|b| {
                let mut perm = labels.clone();
                perm.shuffle(&mut stream(config.seed, StreamDomain::Permutation, b as u64));
                let split = |c| {
                    perm.iter()
                        .enumerate()
                        .filter(|(_, &l)| l == c)
                        .map(|(i, _)| i)
                        .collect::<Vec<_>>()
                };
                let mut s: Vec<f64> =
                    score_split(dataset, &split(Class::Normal), &split(Class::Cancer), statistic, &score)
                        .into_iter()
                        .flatten()
                        .collect();
                s.sort_by(f64::total_cmp);
                s
            })
            .collect();
        Ok(Self {
            observed,
            permuted,
            pi0: config.pi0,
            false_count: config.false_count,
        })
    }

    /// Estimated number of false calls at threshold `t`.
    pub fn expected_false(&self, t: f64) -> f64 {
        let mut counts: Vec<usize> = self
            .permuted
            .iter()
            .map(|s| s.len() - s.partition_point(|&v| v <= t))
            .collect();
        let b = counts.len();
        let summary = match self.false_count {
            FalseCount::Mean => counts.iter().sum::<usize>() as f64 / b as f64,
            FalseCount::Median => {
                counts.sort_unstable();
                if b % 2 == 1 {
                    counts[b / 2] as f64
                } else {
                    0.5 * (counts[b / 2 - 1] + counts[b / 2]) as f64
                }
            }
        };
        self.pi0 * summary
    }

    pub fn table(&self, statistic: Statistic, config: &FdrConfig) -> FdrTable {
        let mut obs = self.observed.clone();
        obs.sort_by(|a, b| b.total_cmp(a));
        let mut rows = Vec::new();
        let mut i = 0;
        while i < obs.len() {
            let t = obs[i];
            // Genes strictly above t are the ones before the run of ties.
            let called = i;
            while i < obs.len() && obs[i] == t {
                i += 1;
            }
            let expected_false = self.expected_false(t);
            let fdr = if called == 0 {
                0.0
            } else {
                (expected_false / called as f64).min(1.0)
            };
            rows.push(FdrRow {
                threshold: t,
                called,
                expected_false,
                fdr,
            });
        }
        FdrTable {
            statistic,
            rows,
            permutations: config.permutations,
            seed: config.seed,
        }
    }
}

pub fn fdr_curve(
    dataset: &ExpressionDataset,
    statistic: Statistic,
    score: &ScoreConfig<'_>,
    config: &FdrConfig,
) -> Result<FdrTable> {
    Ok(PermutationNull::build(dataset, statistic, score, config)?.table(statistic, config))
}

/// `(called, fdr)` with one point per distinct call count.
pub fn fdr_vs_called(table: &FdrTable) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(table.rows.len());
    for r in &table.rows {
        if out.last().map(|p| p.0) != Some(r.called) {
            out.push((r.called, r.fdr));
        }
    }
    out
}

impl FdrTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,called,expected_false,fdr\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.threshold, r.called, r.expected_false, r.fdr);
        }
        out
    }
}

pub fn projection_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("called,fdr\n");
    for (c, f) in points {
        let _ = writeln!(out, "{c},{f}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_dataset, SimConfig};

    fn null_dataset(seed: u64) -> ExpressionDataset {
        let c = SimConfig {
            n: 8,
            m: 8,
            k: 1,
            mu: 0.0,
            n_de: 100,
            n_null: 100,
            seed,
        };
        generate_dataset(&c).unwrap().0
    }

    fn t_config() -> ScoreConfig<'static> {
        ScoreConfig::new(vec![Statistic::T], None)
    }

    #[test]
    fn rejects_zero_permutations_and_bad_pi0() {
        let d = null_dataset(1);
        let cfg = FdrConfig { permutations: 0, ..Default::default() };
        assert!(fdr_curve(&d, Statistic::T, &t_config(), &cfg).is_err());
        let cfg = FdrConfig { pi0: 0.0, ..Default::default() };
        assert!(fdr_curve(&d, Statistic::T, &t_config(), &cfg).is_err());
    }

    #[test]
    fn table_invariants_and_determinism() {
        let d = null_dataset(2);
        let cfg = FdrConfig { permutations: 2, seed: 5, ..Default::default() };
        let a = fdr_curve(&d, Statistic::T, &t_config(), &cfg).unwrap();
        let b = fdr_curve(&d, Statistic::T, &t_config(), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows[0].called, 0);
        assert_eq!(a.rows[0].fdr, 0.0);
        for w in a.rows.windows(2) {
            assert!(w[0].threshold > w[1].threshold);
            assert!(w[0].called <= w[1].called);
        }
        for r in &a.rows {
            assert!((0.0..=1.0).contains(&r.fdr));
            assert!(r.expected_false >= 0.0);
            if r.called > 0 {
                assert_eq!(r.fdr, (r.expected_false / r.called as f64).min(1.0));
            }
        }
    }

    #[test]
    fn separated_scores_have_zero_fdr() {
        // One gene per row with a massive cancer shift on every cancer sample.
        let n = 6;
        let mut values = Vec::new();
        let mut ids = Vec::new();
        for g in 0..5 {
            ids.push(format!("g{g}"));
            for j in 0..2 * n {
                let base = (j % 3) as f64 * 0.1 + g as f64 * 0.01;
                values.push(if j >= n { base + 100.0 } else { base });
            }
        }
        let labels = (0..2 * n)
            .map(|j| if j >= n { Class::Cancer } else { Class::Normal })
            .collect();
        let d = ExpressionDataset::new(
            ids,
            (0..2 * n).map(|j| format!("s{j}")).collect(),
            values,
            labels,
        )
        .unwrap();
        // Permutations that leave labels intact reproduce observed scores, so
        // only check that no permutation exceeds the top observed score.
        let null = PermutationNull::build(&d, Statistic::T, &t_config(), &FdrConfig::default()).unwrap();
        let max = null.observed.iter().cloned().fold(f64::MIN, f64::max);
        let min = null.observed.iter().cloned().fold(f64::MAX, f64::min);
        assert!(null.expected_false(max) == 0.0);
        assert!(null.expected_false(min) < 1.0);
    }

    #[test]
    fn expected_false_is_monotone_between_thresholds() {
        let d = null_dataset(3);
        let cfg = FdrConfig { permutations: 20, ..Default::default() };
        let null = PermutationNull::build(&d, Statistic::T, &t_config(), &cfg).unwrap();
        let table = null.table(Statistic::T, &cfg);
        for w in table.rows.windows(2) {
            let mid = 0.5 * (w[0].threshold + w[1].threshold);
            let e = null.expected_false(mid);
            assert!(w[0].expected_false <= e && e <= w[1].expected_false);
        }
    }

    #[test]
    fn null_labels_give_high_fdr() {
        let mut mean_fdr = 0.0;
        let mut count = 0;
        for seed in 0..3 {
            let d = null_dataset(10 + seed);
            let cfg = FdrConfig { permutations: 50, seed, ..Default::default() };
            let t = fdr_curve(&d, Statistic::T, &t_config(), &cfg).unwrap();
            for r in t.rows.iter().filter(|r| r.called >= 50) {
                mean_fdr += r.fdr;
                count += 1;
            }
        }
        assert!(mean_fdr / count as f64 >= 0.5);
    }

    #[test]
    fn median_summary_and_pi0_scale() {
        let d = null_dataset(4);
        let mean = FdrConfig { permutations: 11, ..Default::default() };
        let median = FdrConfig { false_count: FalseCount::Median, ..mean.clone() };
        let half = FdrConfig { pi0: 0.5, ..mean.clone() };
        let a = fdr_curve(&d, Statistic::T, &t_config(), &mean).unwrap();
        let b = fdr_curve(&d, Statistic::T, &t_config(), &median).unwrap();
        let c = fdr_curve(&d, Statistic::T, &t_config(), &half).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rc) in a.rows.iter().zip(&c.rows) {
            assert_eq!(rc.expected_false, 0.5 * ra.expected_false);
        }
        assert!(b.rows.iter().all(|r| r.expected_false.fract() == 0.0));
        assert!("median".parse::<FalseCount>().is_ok());
        assert!("mode".parse::<FalseCount>().is_err());
    }

    #[test]
    fn gene_order_does_not_matter() {
        let d = null_dataset(6);
        let rev: Vec<usize> = (0..d.n_genes()).rev().collect();
        let r = ExpressionDataset::new(
            rev.iter().map(|&g| d.gene_ids()[g].clone()).collect(),
            d.sample_ids().to_vec(),
            rev.iter().flat_map(|&g| d.row(g).to_vec()).collect(),
            d.labels().to_vec(),
        )
        .unwrap();
        let cfg = FdrConfig { permutations: 5, ..Default::default() };
        assert_eq!(
            fdr_curve(&d, Statistic::T, &t_config(), &cfg).unwrap(),
            fdr_curve(&r, Statistic::T, &t_config(), &cfg).unwrap()
        );
    }

    #[test]
    fn projection() {
        let empty = FdrTable { statistic: Statistic::T, rows: vec![], permutations: 1, seed: 0 };
        assert!(fdr_vs_called(&empty).is_empty());
        let d = null_dataset(7);
        let t = fdr_curve(&d, Statistic::T, &t_config(), &FdrConfig { permutations: 3, ..Default::default() }).unwrap();
        assert_eq!(fdr_vs_called(&t).len(), t.rows.len());
        assert!(projection_csv(&fdr_vs_called(&t)).starts_with("called,fdr\n0,0\n"));
    }
}
