//! Differential-expression statistics for genes activated in only a subset
//! of cancer samples.
//!
//! The crate scores two-class expression matrices with the t-statistic,
//! COPA, the outlier sum (OS), the outlier robust t (ORT) and the maximum
//! ordered subset t (MOST); it also simulates partially activated studies,
//! evaluates statistics by ROC/AUC and estimates permutation FDR curves.
//!
//! ```
//! use most_core::{estimate_moments, GenePair};
//!
//! let moments = estimate_moments(3, 10_000, 1).unwrap();
//! let gene = GenePair::new(&[0.1, -0.3, 0.2, 0.0], &[4.0, 0.1, -0.2]).unwrap();
//! let most = gene.most_stat(&moments).unwrap().unwrap();
//! assert_eq!(most.k_hat, 1);
//! ```
// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod detectors;
pub mod error;
pub mod fdr;
pub mod io;
pub mod moments;
pub mod rng;
pub mod robust;
pub mod roc;
pub mod sim;
pub mod svg;

pub use dataset::{parse_matrix, Class, ExpressionDataset, LabelSpec, Preprocess, Provenance};
pub use detectors::{score_all, GenePair, GeneScores, MostScore, ScoreConfig, Statistic};
pub use error::{Error, Result};
pub use fdr::{fdr_curve, fdr_vs_called, FalseCount, FdrConfig, FdrRow, FdrTable};
pub use moments::{estimate_moments, load_or_build, CacheOutcome, MomentTable};
pub use roc::{build_roc, RocCurve};
pub use sim::{generate_dataset, run_study, LabeledScores, SimConfig};
