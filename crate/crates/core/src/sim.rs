//! Simulated two-class studies with partially activated DE genes.
//!
//! Every value is a standard-normal draw; DE genes get a constant shift on
//! the first `k` cancer columns. Each gene row draws from its own stream, so
//! adding genes never changes the rows already present for a seed.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dataset::{Class, ExpressionDataset};
use crate::detectors::{score_all, ScoreConfig, Statistic};
use crate::error::{Error, Result};
use crate::moments::MomentTable;
use crate::rng::{stream, StreamDomain};
use crate::roc::{build_roc, RocCurve};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    /// Number of activated cancer samples per DE gene.
    pub k: usize,
    pub mu: f64,
    pub n_de: usize,
    pub n_null: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 20,
            m: 20,
            k: 1,
            mu: 2.0,
            n_de: 1000,
            n_null: 1000,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.m < 1 {
            return Err(Error::invalid(format!(
                "simulation needs n >= 2 and m >= 1 (got n={}, m={})",
                self.n, self.m
            )));
        }
        if self.k < 1 || self.k > self.m {
            return Err(Error::invalid(format!(
                "activated count k={} outside 1..={}",
                self.k, self.m
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::invalid("activation shift mu must be finite"));
        }
        if self.n_de == 0 || self.n_null == 0 {
            return Err(Error::invalid("simulation needs DE and null genes"));
        }
        Ok(())
    }

    /// Applies `key=value` overrides (`n`, `m`, `k`, `mu`, `n_de`, `n_null`,
    /// `seed`) separated by whitespace.
    pub fn with_overrides(&self, spec: &str) -> Result<Self> {
        let mut c = self.clone();
        for tok in spec.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value, got `{tok}`")))?;
            let bad = || Error::invalid(format!("bad value in `{tok}`"));
            match key {
                "n" => c.n = val.parse().map_err(|_| bad())?,
                "m" => c.m = val.parse().map_err(|_| bad())?,
                "k" => c.k = val.parse().map_err(|_| bad())?,
                "mu" => c.mu = val.parse().map_err(|_| bad())?,
                "n_de" | "n-de" => c.n_de = val.parse().map_err(|_| bad())?,
                "n_null" | "n-null" => c.n_null = val.parse().map_err(|_| bad())?,
                "seed" => c.seed = val.parse().map_err(|_| bad())?,
                _ => return Err(Error::invalid(format!("unknown key `{key}`"))),
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// One configuration per non-blank, non-comment line of a grid file, each
/// line overriding `base`.
pub fn parse_grid(text: &str, base: &SimConfig) -> Result<Vec<SimConfig>> {
    let mut cells = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        cells.push(
            base.with_overrides(line)
                .map_err(|e| Error::invalid(format!("grid line {}: {e}", i + 1)))?,
        );
    }
    if cells.is_empty() {
        return Err(Error::invalid("grid file has no cells"));
    }
    Ok(cells)
}

/// Simulated matrix plus the DE mask (true for DE rows).
pub fn generate_dataset(c: &SimConfig) -> Result<(ExpressionDataset, Vec<bool>)> {
    c.validate()?;
    let cols = c.n + c.m;
    let genes = c.n_de + c.n_null;
    let values: Vec<f64> = (0..genes)
        .into_par_iter()
        .flat_map_iter(|g| {
            let de = g < c.n_de;
            let mut rng = if de {
                stream(c.seed, StreamDomain::SimulatedDe, g as u64)
            } else {
                stream(c.seed, StreamDomain::SimulatedNull, (g - c.n_de) as u64)
            };
            let mut row: Vec<f64> = (0..cols).map(|_| rng.sample(StandardNormal)).collect();
            if de {
                for v in &mut row[c.n..c.n + c.k] {
                    *v += c.mu;
                }
            }
            row
        })
        .collect();
    let gene_ids = (0..genes)
        .map(|g| {
            if g < c.n_de {
                format!("de{}", g + 1)
            } else {
                format!("null{}", g - c.n_de + 1)
            }
        })
        .collect();
    let sample_ids = (0..c.n)
        .map(|j| format!("N{}", j + 1))
        .chain((0..c.m).map(|j| format!("C{}", j + 1)))
        .collect();
    let labels = std::iter::repeat_n(Class::Normal, c.n)
        .chain(std::iter::repeat_n(Class::Cancer, c.m))
        .collect();
    let ds = ExpressionDataset::new(gene_ids, sample_ids, values, labels)?;
    let mask = (0..genes).map(|g| g < c.n_de).collect();
    Ok((ds, mask))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    pub statistic: Statistic,
    pub de_scores: Vec<f64>,
    pub null_scores: Vec<f64>,
    /// Genes dropped because the statistic was degenerate.
    pub excluded: usize,
}

impl LabeledScores {
    pub fn roc(&self) -> Result<RocCurve> {
        build_roc(self.statistic.name(), &self.de_scores, &self.null_scores)
    }
}

/// Splits per-gene scores by a DE mask, dropping degenerate genes.
pub fn label_scores(
    dataset: &ExpressionDataset,
    mask: &[bool],
    config: &ScoreConfig<'_>,
) -> Result<BTreeMap<Statistic, LabeledScores>> {
    if mask.len() != dataset.n_genes() {
        return Err(Error::invalid("DE mask length differs from gene count"));
    }
    let scores = score_all(dataset, config)?;
    let mut out = BTreeMap::new();
    for &stat in &config.statistics {
        let mut ls = LabeledScores {
            statistic: stat,
            de_scores: Vec::new(),
            null_scores: Vec::new(),
            excluded: 0,
        };
        for (g, &de) in scores.iter().zip(mask) {
            match g.value(stat) {
                Some(v) if de => ls.de_scores.push(v),
                Some(v) => ls.null_scores.push(v),
                None => ls.excluded += 1,
            }
        }
        out.insert(stat, ls);
    }
    Ok(out)
}

/// Generates a study and scores it with every requested statistic.
pub fn run_study(
    c: &SimConfig,
    statistics: &[Statistic],
    copa_percentile: f64,
    moments: Option<&MomentTable>,
) -> Result<BTreeMap<Statistic, LabeledScores>> {
    let (ds, mask) = generate_dataset(c)?;
    let config = ScoreConfig {
        statistics: statistics.to_vec(),
        copa_percentile,
        moments,
    };
    label_scores(&ds, &mask, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::estimate_moments;

    fn small(mu: f64, k: usize) -> SimConfig {
        SimConfig {
            n: 10,
            m: 10,
            k,
            mu,
            n_de: 30,
            n_null: 30,
            seed: 4,
        }
    }

    #[test]
    fn validation() {
        assert!(SimConfig { k: 0, ..small(1.0, 1) }.validate().is_err());
        assert!(SimConfig { k: 11, ..small(1.0, 1) }.validate().is_err());
        assert!(SimConfig { mu: f64::NAN, ..small(1.0, 1) }.validate().is_err());
        assert!(SimConfig { n_null: 0, ..small(1.0, 1) }.validate().is_err());
        assert!(SimConfig::default().validate().is_ok());
    }

    #[test]
    fn zero_shift_rows_share_distribution_and_seed_repeats() {
        let (a, _) = generate_dataset(&small(0.0, 3)).unwrap();
        let (b, mask) = generate_dataset(&small(0.0, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(mask.iter().filter(|&&d| d).count(), 30);
    }

    #[test]
    fn shift_lands_on_first_k_cancer_columns() {
        let mut shifted = small(5.0, 3);
        let (with, _) = generate_dataset(&shifted).unwrap();
        shifted.mu = 0.0;
        let (without, _) = generate_dataset(&shifted).unwrap();
        for g in 0..30 {
            for j in 0..20 {
                let d = with.row(g)[j] - without.row(g)[j];
                let expect = if (10..13).contains(&j) { 5.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
        }
        for g in 30..60 {
            assert_eq!(with.row(g), without.row(g));
        }
    }

    #[test]
    fn full_activation_shifts_group_means() {
        let c = SimConfig {
            k: 10,
            mu: 6.0,
            n_de: 200,
            ..small(6.0, 10)
        };
        let (ds, _) = generate_dataset(&c).unwrap();
        let mut diff = 0.0;
        for g in 0..200 {
            let r = ds.row(g);
            diff += r[10..].iter().sum::<f64>() / 10.0 - r[..10].iter().sum::<f64>() / 10.0;
        }
        assert!((diff / 200.0 - 6.0).abs() < 0.1);
    }

    #[test]
    fn adding_genes_keeps_existing_rows() {
        let (a, _) = generate_dataset(&small(2.0, 2)).unwrap();
        let bigger = SimConfig {
            n_de: 40,
            n_null: 45,
            ..small(2.0, 2)
        };
        let (b, _) = generate_dataset(&bigger).unwrap();
        for g in 0..30 {
            assert_eq!(a.row(g), b.row(g));
            assert_eq!(a.row(30 + g), b.row(40 + g));
        }
    }

    #[test]
    fn study_shape() {
        let table = estimate_moments(10, 20_000, 1).unwrap();
        let c = SimConfig {
            n_de: 10,
            n_null: 10,
            ..small(2.0, 3)
        };
        let out = run_study(&c, &Statistic::ALL, 90.0, Some(&table)).unwrap();
        assert_eq!(out.len(), 5);
        for ls in out.values() {
            assert!(ls.de_scores.len() <= 10 && ls.null_scores.len() <= 10);
            assert_eq!(ls.de_scores.len() + ls.null_scores.len() + ls.excluded, 20);
        }
    }

    #[test]
    fn cancer_column_permutation_changes_nothing() {
        let table = estimate_moments(10, 20_000, 1).unwrap();
        let c = small(3.0, 2);
        let (ds, mask) = generate_dataset(&c).unwrap();
        // Reverse the cancer columns.
        let order: Vec<usize> = (0..10).chain((10..20).rev()).collect();
        let values: Vec<f64> = ds.rows().flat_map(|r| order.iter().map(move |&j| r[j])).collect();
        let permuted = ExpressionDataset::new(
            ds.gene_ids().to_vec(),
            order.iter().map(|&j| ds.sample_ids()[j].clone()).collect(),
            values,
            ds.labels().to_vec(),
        )
        .unwrap();
        let cfg = ScoreConfig::new(Statistic::ALL.to_vec(), Some(&table));
        assert_eq!(
            label_scores(&ds, &mask, &cfg).unwrap(),
            label_scores(&permuted, &mask, &cfg).unwrap()
        );
    }

    #[test]
    fn grid_parsing() {
        let base = SimConfig::default();
        let cells = parse_grid("# comment\nmu=1 k=12\n\nmu=4 k=1 seed=9 # trailing\n", &base).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!((cells[0].mu, cells[0].k), (1.0, 12));
        assert_eq!(cells[1].seed, 9);
        assert!(parse_grid("mu=1 k=40\n", &base).is_err());
        assert!(parse_grid("mu=x\n", &base).is_err());
        assert!(parse_grid("bogus=1\n", &base).is_err());
        assert!(parse_grid("# nothing\n", &base).is_err());
    }
}
