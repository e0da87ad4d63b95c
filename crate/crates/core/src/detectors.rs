//! Per-gene two-sample statistics for cancer outlier profiles.
//!
//! All five statistics are oriented so that large values indicate higher
//! expression in the cancer group:
//!
//! * `T`: mean difference over the pooled standard deviation, without the
//!   gene-independent sample-size factor.
//! * `COPA`: a percentile of the cancer group, centred by the pooled median
//!   and scaled by the pooled MAD.
//! * `OS`: outlier sum over cancer values beyond `q75 + IQR` of the pooled
//!   sample, with the same pooled centre and scale.
//! * `ORT`: outlier sum with threshold and centre taken from the normal
//!   group, scaled by the MAD of the group-wise centred values.
//! * `MOST`: maximum over `k` of the top-`k` partial sums under the ORT
//!   centre and scale, each standardized by the moments of top-`k` sums of
//!   standard-normal order statistics.
//!
//! A statistic whose denominator is zero is reported as `None` (degenerate)
//! rather than an infinity.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dataset::{Class, ExpressionDataset};
use crate::error::{Error, Result};
use crate::moments::MomentTable;
use crate::robust::{abs_dev_median, median_sorted, percentile_sorted, pooled_sd, MAD_SCALE};

pub const DEFAULT_COPA_PERCENTILE: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statistic {
    T,
    Copa,
    Os,
    Ort,
    Most,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::T,
        Statistic::Copa,
        Statistic::Os,
        Statistic::Ort,
        Statistic::Most,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::T => "T",
            Statistic::Copa => "COPA",
            Statistic::Os => "OS",
            Statistic::Ort => "ORT",
            Statistic::Most => "MOST",
        }
    }

    /// Parses a comma-separated list such as `MOST,T`.
    pub fn parse_list(s: &str) -> Result<Vec<Statistic>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let stat: Statistic = part.parse()?;
            if out.contains(&stat) {
                return Err(Error::invalid(format!("statistic {stat} listed twice")));
            }
            out.push(stat);
        }
        if out.is_empty() {
            return Err(Error::invalid("no statistics requested"));
        }
        Ok(out)
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown statistic `{s}` (expected one of T, COPA, OS, ORT, MOST)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MostScore {
    pub value: f64,
    /// Maximizing number of top cancer values; the smallest on exact ties.
    pub k_hat: usize,
}

/// Expression of one gene split into normal (`x`) and cancer (`y`) samples.
#[derive(Debug, Clone, Copy)]
pub struct GenePair<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

impl<'a> GenePair<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Result<Self> {
        if x.len() < 2 || y.is_empty() {
            return Err(Error::invalid(format!(
                "gene pair needs n >= 2 normal and m >= 1 cancer values (got n={}, m={})",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("gene pair contains non-finite values"));
        }
        Ok(Self { x, y })
    }

    pub fn t_stat(&self) -> Option<f64> {
        Prepared::new(self.x, self.y).t()
    }

    pub fn copa_stat(&self, r: f64) -> Result<Option<f64>> {
        check_percentile(r)?;
        Ok(Prepared::new(self.x, self.y).copa(r))
    }

    pub fn os_stat(&self) -> Option<f64> {
        Prepared::new(self.x, self.y).os()
    }

    pub fn ort_stat(&self) -> Option<f64> {
        Prepared::new(self.x, self.y).ort()
    }

    pub fn most_stat(&self, moments: &MomentTable) -> Result<Option<MostScore>> {
        check_moments(moments, self.y.len())?;
        Ok(Prepared::new(self.x, self.y).most(moments))
    }
}

fn check_percentile(r: f64) -> Result<()> {
    if (0.0..=100.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::invalid(format!("COPA percentile {r} outside [0, 100]")))
    }
}

fn check_moments(moments: &MomentTable, m: usize) -> Result<()> {
    if moments.m() == m {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "moment table built for m={} but the cancer group has {m} samples",
            moments.m()
        )))
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

/// Sorted copies and lazily computed shared summaries of one gene.
struct Prepared {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Pooled median and scaled pooled MAD.
    pooled: Option<(f64, f64, Vec<f64>)>,
    /// Normal-group median and the scaled group-centred MAD.
    ort: Option<(f64, f64)>,
    scratch: Vec<f64>,
}

impl Prepared {
    fn new(x_raw: &[f64], y_raw: &[f64]) -> Self {
        let mut x = x_raw.to_vec();
        let mut y = y_raw.to_vec();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        Self {
            x,
            y,
            pooled: None,
            ort: None,
            scratch: Vec::new(),
        }
    }

    fn pooled(&mut self) -> (f64, f64, &[f64]) {
        if self.pooled.is_none() {
            let mut all: Vec<f64> = self.x.iter().chain(&self.y).copied().collect();
            all.sort_by(f64::total_cmp);
            let med = median_sorted(&all);
            let mad = MAD_SCALE * abs_dev_median([(all.as_slice(), med)], &mut self.scratch);
            self.pooled = Some((med, mad, all));
        }
        let (med, mad, all) = self.pooled.as_ref().unwrap();
        (*med, *mad, all)
    }

    fn ort_centre_scale(&mut self) -> (f64, f64) {
        if self.ort.is_none() {
            let med_x = median_sorted(&self.x);
            let med_y = median_sorted(&self.y);
            let raw = abs_dev_median(
                [(self.x.as_slice(), med_x), (self.y.as_slice(), med_y)],
                &mut self.scratch,
            );
            self.ort = Some((med_x, MAD_SCALE * raw));
        }
        self.ort.unwrap()
    }

    fn t(&self) -> Option<f64> {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let s = pooled_sd(&self.x, &self.y).ok()?;
        ratio(mean(&self.y) - mean(&self.x), s)
    }

    fn copa(&mut self, r: f64) -> Option<f64> {
        let q = percentile_sorted(&self.y, r);
        let (med, mad, _) = self.pooled();
        ratio(q - med, mad)
    }

    fn os(&mut self) -> Option<f64> {
        let (med, mad, all) = self.pooled();
        let q75 = percentile_sorted(all, 75.0);
        let cut = q75 + (q75 - percentile_sorted(all, 25.0));
        let num: f64 = self.y.iter().filter(|&&v| v > cut).map(|v| v - med).sum();
        ratio(num, mad)
    }

    fn ort(&mut self) -> Option<f64> {
        let (med_x, scale) = self.ort_centre_scale();
        let q75 = percentile_sorted(&self.x, 75.0);
        let cut = q75 + (q75 - percentile_sorted(&self.x, 25.0));
        let num: f64 = self.y.iter().filter(|&&v| v > cut).map(|v| v - med_x).sum();
        ratio(num, scale)
    }

    fn most(&mut self, moments: &MomentTable) -> Option<MostScore> {
        let (med_x, scale) = self.ort_centre_scale();
        if scale == 0.0 {
            return None;
        }
        let mut best = MostScore {
            value: f64::NEG_INFINITY,
            k_hat: 0,
        };
        let mut partial = 0.0;
        let stats = self.y.iter().rev().zip(moments.mu().iter().zip(moments.sigma()));
        for (k, (v, (mu, sigma))) in stats.enumerate() {
            partial += v - med_x;
            let z = (partial / scale - mu) / sigma;
            if z > best.value {
                best = MostScore { value: z, k_hat: k + 1 };
            }
        }
        Some(best)
    }

    fn evaluate(&mut self, stat: Statistic, config: &ScoreConfig<'_>) -> (Option<f64>, Option<usize>) {
        match stat {
            Statistic::T => (self.t(), None),
            Statistic::Copa => (self.copa(config.copa_percentile), None),
            Statistic::Os => (self.os(), None),
            Statistic::Ort => (self.ort(), None),
            Statistic::Most => {
                let moments = config.moments.expect("validated by ScoreConfig::check");
                match self.most(moments) {
                    Some(s) => (Some(s.value), Some(s.k_hat)),
                    None => (None, None),
                }
            }
        }
    }
}

/// Which statistics to compute, and their parameters.
#[derive(Debug, Clone)]
pub struct ScoreConfig<'a> {
    pub statistics: Vec<Statistic>,
    pub copa_percentile: f64,
    /// Required when `statistics` contains MOST.
    pub moments: Option<&'a MomentTable>,
}

impl<'a> ScoreConfig<'a> {
    pub fn new(statistics: Vec<Statistic>, moments: Option<&'a MomentTable>) -> Self {
        Self {
            statistics,
            copa_percentile: DEFAULT_COPA_PERCENTILE,
            moments,
        }
    }

    pub(crate) fn check(&self, n: usize, m: usize) -> Result<()> {
        if self.statistics.is_empty() {
            return Err(Error::invalid("no statistics requested"));
        }
        if n < 2 || m < 1 {
            return Err(Error::invalid(format!(
                "scoring needs at least 2 normal and 1 cancer samples (got {n} and {m})"
            )));
        }
        check_percentile(self.copa_percentile)?;
        if self.statistics.contains(&Statistic::Most) {
            let moments = self
                .moments
                .ok_or_else(|| Error::invalid("MOST requested without a moment table"))?;
            check_moments(moments, m)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneScores {
    pub gene_id: String,
    /// `None` marks a degenerate (zero-denominator) statistic.
    pub values: BTreeMap<Statistic, Option<f64>>,
    pub k_hat: Option<usize>,
}

impl GeneScores {
    pub fn value(&self, stat: Statistic) -> Option<f64> {
        self.values.get(&stat).copied().flatten()
    }

    pub fn is_degenerate(&self, stat: Statistic) -> bool {
        matches!(self.values.get(&stat), Some(None))
    }

    pub fn degenerate(&self) -> impl Iterator<Item = Statistic> + '_ {
        self.values
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(s, _)| *s)
    }
}

fn gather(row: &[f64], idx: &[usize], out: &mut Vec<f64>) {
    out.clear();
    out.extend(idx.iter().map(|&i| row[i]));
}

/// Scores every gene with the requested statistics, in gene order.
pub fn score_all(dataset: &ExpressionDataset, config: &ScoreConfig<'_>) -> Result<Vec<GeneScores>> {
    let normal = dataset.class_indices(Class::Normal);
    let cancer = dataset.class_indices(Class::Cancer);
    config.check(normal.len(), cancer.len())?;
    Ok((0..dataset.n_genes())
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(x, y), g| {
                let row = dataset.row(g);
                gather(row, &normal, x);
                gather(row, &cancer, y);
                let mut prep = Prepared::new(x, y);
                let mut values = BTreeMap::new();
                let mut k_hat = None;
                for &stat in &config.statistics {
                    let (v, k) = prep.evaluate(stat, config);
                    values.insert(stat, v);
                    k_hat = k_hat.or(k);
                }
                GeneScores {
                    gene_id: dataset.gene_ids()[g].clone(),
                    values,
                    k_hat,
                }
            },
        )
        .collect())
}

/// One statistic for every gene under an arbitrary split of the columns.
pub(crate) fn score_split(
    dataset: &ExpressionDataset,
    normal: &[usize],
    cancer: &[usize],
    stat: Statistic,
    config: &ScoreConfig<'_>,
) -> Vec<Option<f64>> {
    (0..dataset.n_genes())
        .map(|g| {
            let row = dataset.row(g);
            let x: Vec<f64> = normal.iter().map(|&i| row[i]).collect();
            let y: Vec<f64> = cancer.iter().map(|&i| row[i]).collect();
            Prepared::new(&x, &y).evaluate(stat, config).0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const X5: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn t_examples() {
        let g = |x: &'static [f64], y: &'static [f64]| GenePair::new(x, y).unwrap().t_stat();
        assert!(close(g(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(), 3.0, 1e-12));
        assert_eq!(g(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), Some(0.0));
        assert_eq!(g(&[0.0, 0.0], &[1.0, 1.0]), None);
    }

    #[test]
    fn copa_examples() {
        let c = GenePair::new(&X5, &[7.0, 8.0, 2.0]).unwrap().copa_stat(90.0).unwrap();
        assert!(close(c.unwrap(), 1.9335401771662395, 1e-12));
        let sym = [-1.0, 0.0, 1.0];
        let c = GenePair::new(&sym, &sym).unwrap().copa_stat(50.0).unwrap();
        assert_eq!(c, Some(0.0));
        assert!(GenePair::new(&X5, &[1.0]).unwrap().copa_stat(101.0).is_err());
        let flat = [2.0; 4];
        assert_eq!(GenePair::new(&flat, &flat).unwrap().copa_stat(90.0).unwrap(), None);
    }

    #[test]
    fn copa_shift_invariance() {
        let y = [7.0, 8.0, 2.0];
        let base = GenePair::new(&X5, &y).unwrap().copa_stat(90.0).unwrap().unwrap();
        let xs: Vec<f64> = X5.iter().map(|v| v + 3.0).collect();
        let ys: Vec<f64> = y.iter().map(|v| v + 3.0).collect();
        let shifted = GenePair::new(&xs, &ys).unwrap().copa_stat(90.0).unwrap().unwrap();
        assert!(close(base, shifted, 1e-12));
    }

    #[test]
    fn os_examples() {
        assert_eq!(GenePair::new(&X5, &[7.0, 8.0, 2.0]).unwrap().os_stat(), Some(0.0));
        let os = GenePair::new(&X5, &[20.0, 2.0, 3.0]).unwrap().os_stat().unwrap();
        assert!(close(os, 11.46634291110212, 1e-12));
        assert_eq!(GenePair::new(&X5, &[0.0, 1.0]).unwrap().os_stat(), Some(0.0));
    }

    #[test]
    fn ort_examples() {
        let ort = GenePair::new(&X5, &[7.0, 8.0, 2.0]).unwrap().ort_stat().unwrap();
        assert!(close(ort, 6.070416835289357, 1e-12));
        assert_eq!(GenePair::new(&X5, &[3.0, 3.0, 3.0]).unwrap().ort_stat(), Some(0.0));
        let xs: Vec<f64> = X5.iter().map(|v| 2.5 * v).collect();
        let scaled = GenePair::new(&xs, &[17.5, 20.0, 5.0]).unwrap().ort_stat().unwrap();
        assert!(close(scaled, ort, 1e-12));
        assert_eq!(GenePair::new(&[1.0, 1.0, 1.0], &[1.0, 1.0]).unwrap().ort_stat(), None);
    }

    #[test]
    fn most_single_cancer_sample() {
        let unit = MomentTable::from_parts(vec![0.0], vec![1.0], 0, 0).unwrap();
        let s = GenePair::new(&X5, &[7.0]).unwrap().most_stat(&unit).unwrap().unwrap();
        assert!(close(s.value, 2.697963037906381, 1e-12));
        assert_eq!(s.k_hat, 1);
    }

    #[test]
    fn most_flat_cancer_group() {
        // Exact m = 3 moments: E[z_(1)] = 3 / (2 sqrt(pi)) and mu_2 = mu_1.
        let mu1 = 1.5 / std::f64::consts::PI.sqrt();
        let table = MomentTable::from_parts(vec![mu1, mu1, 0.0], vec![0.75, 1.1, 3f64.sqrt()], 0, 0).unwrap();
        let s = GenePair::new(&X5, &[3.0, 3.0, 3.0]).unwrap().most_stat(&table).unwrap().unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.k_hat, 3);
    }

    #[test]
    fn most_rejects_mismatched_table() {
        let unit = MomentTable::from_parts(vec![0.0], vec![1.0], 0, 0).unwrap();
        assert!(GenePair::new(&X5, &[1.0, 2.0]).unwrap().most_stat(&unit).is_err());
    }

    #[test]
    fn most_tie_takes_smallest_k() {
        // Top two equal cancer values give identical standardized terms for
        // k = 1 and k = 2 under this table.
        let table = MomentTable::from_parts(vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 3.0], 0, 0).unwrap();
        let x = [-1.0, 0.0, 1.0];
        // med_x = 0, scale = 1.4826 * median{1,0,1, 0,0,3} = 1.4826 * 0.5.
        let s = GenePair::new(&x, &[3.0, 3.0, 0.0]).unwrap().most_stat(&table).unwrap().unwrap();
        assert_eq!(s.k_hat, 1);
    }

    #[test]
    fn gene_pair_validation() {
        assert!(GenePair::new(&[1.0], &[1.0]).is_err());
        assert!(GenePair::new(&[1.0, 2.0], &[]).is_err());
        assert!(GenePair::new(&[1.0, f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn statistic_names() {
        for s in Statistic::ALL {
            assert_eq!(s.name().parse::<Statistic>().unwrap(), s);
        }
        assert_eq!("most".parse::<Statistic>().unwrap(), Statistic::Most);
        assert_eq!(
            Statistic::parse_list("MOST,T").unwrap(),
            vec![Statistic::Most, Statistic::T]
        );
        assert!(Statistic::parse_list("T,T").is_err());
        assert!(Statistic::parse_list("Q").is_err());
        assert!(Statistic::parse_list("").is_err());
    }

    fn two_gene_dataset() -> ExpressionDataset {
        ExpressionDataset::new(
            vec!["a".into(), "b".into()],
            (0..5).map(|i| format!("s{i}")).collect(),
            vec![1.0, 2.0, 3.0, 9.0, 4.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            vec![Class::Normal, Class::Normal, Class::Normal, Class::Cancer, Class::Cancer],
        )
        .unwrap()
    }

    #[test]
    fn score_all_shape_selection_and_degeneracy() {
        let d = two_gene_dataset();
        let only_t = ScoreConfig::new(vec![Statistic::T], None);
        let out = score_all(&d, &only_t).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].gene_id, "a");
        assert_eq!(out[0].values.len(), 1);
        assert!(out[0].value(Statistic::T).unwrap() > 0.0);
        assert!(out[1].is_degenerate(Statistic::T));

        let table = MomentTable::from_parts(vec![0.5, 0.0], vec![0.8, 1.4], 0, 0).unwrap();
        let all = ScoreConfig::new(Statistic::ALL.to_vec(), Some(&table));
        let out = score_all(&d, &all).unwrap();
        assert_eq!(out[0].values.len(), 5);
        assert!(out[0].k_hat.is_some());
        // Gene b: normal group constant at 0, cancer constant at 1.
        assert!(out[1].is_degenerate(Statistic::Most));
        assert_eq!(out[1].k_hat, None);
        assert_eq!(score_all(&d, &all).unwrap(), out);
    }

    #[test]
    fn score_all_requires_matching_moments() {
        let d = two_gene_dataset();
        let cfg = ScoreConfig::new(vec![Statistic::Most], None);
        assert!(score_all(&d, &cfg).is_err());
        let wrong = MomentTable::from_parts(vec![0.0], vec![1.0], 0, 0).unwrap();
        let cfg = ScoreConfig::new(vec![Statistic::Most], Some(&wrong));
        assert!(score_all(&d, &cfg).is_err());
    }
}
