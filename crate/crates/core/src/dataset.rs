//! Two-class expression matrices: TSV ingestion, validation and
//! preprocessing.
//!
//! Matrix files are tab-separated. The first row holds a corner cell and
//! the sample names; each further row holds a gene id followed by one value
//! per sample. Class labels (`0` = normal, `1` = cancer) come either from a
//! second header row in the matrix itself or from a sidecar file with
//! `sample_name<TAB>label` rows.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::robust::median;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Normal,
    Cancer,
}

impl Class {
    fn from_code(code: &str) -> Option<Self> {
        match code {
            "0" => Some(Class::Normal),
            "1" => Some(Class::Cancer),
            _ => None,
        }
    }

    fn code(self) -> char {
        match self {
            Class::Normal => '0',
            Class::Cancer => '1',
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub source: Option<PathBuf>,
    /// Transforms applied after loading, in order.
    pub transforms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionDataset {
    gene_ids: Vec<String>,
    sample_ids: Vec<String>,
    /// Row-major, one row per gene.
    values: Vec<f64>,
    labels: Vec<Class>,
    provenance: Provenance,
}

impl ExpressionDataset {
    pub fn new(
        gene_ids: Vec<String>,
        sample_ids: Vec<String>,
        values: Vec<f64>,
        labels: Vec<Class>,
    ) -> Result<Self> {
        if labels.len() != sample_ids.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} samples",
                labels.len(),
                sample_ids.len()
            )));
        }
        if values.len() != gene_ids.len() * sample_ids.len() {
            return Err(Error::invalid(format!(
                "{} values do not fill a {} x {} matrix",
                values.len(),
                gene_ids.len(),
                sample_ids.len()
            )));
        }
        let mut seen = HashSet::new();
        for s in &sample_ids {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSample(s.clone()));
            }
        }
        let mut seen = HashSet::new();
        for (i, g) in gene_ids.iter().enumerate() {
            if !seen.insert(g.as_str()) {
                return Err(Error::DuplicateGene {
                    id: g.clone(),
                    line: i + 2,
                });
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let cols = sample_ids.len();
            return Err(Error::invalid(format!(
                "non-finite value for gene `{}`, sample `{}`",
                gene_ids[i / cols],
                sample_ids[i % cols]
            )));
        }
        if !labels.contains(&Class::Normal) {
            return Err(Error::EmptyClass("normal"));
        }
        if !labels.contains(&Class::Cancer) {
            return Err(Error::EmptyClass("cancer"));
        }
        Ok(Self {
            gene_ids,
            sample_ids,
            values,
            labels,
            provenance: Provenance::default(),
        })
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn row(&self, gene: usize) -> &[f64] {
        let c = self.n_samples();
        &self.values[gene * c..(gene + 1) * c]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_samples())
    }

    /// Column indices of the samples in `class`, in column order.
    pub fn class_indices(&self, class: Class) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Matrix with an inline label row, values at 17 significant digits.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("gene_id");
        for s in &self.sample_ids {
            out.push('\t');
            out.push_str(s);
        }
        out.push_str("\nclass");
        for l in &self.labels {
            out.push('\t');
            out.push(l.code());
        }
        out.push('\n');
        for (g, row) in self.gene_ids.iter().zip(self.rows()) {
            out.push_str(g);
            for v in row {
                let _ = write!(out, "\t{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Median-scales columns and/or log2-transforms values.
    ///
    /// Normalization multiplies each column so that its median equals the
    /// median of all column medians. The log step maps `v` to
    /// `log2(max(v, floor))` and runs after normalization.
    pub fn preprocess(&self, opts: &Preprocess) -> Result<Self> {
        let mut out = self.clone();
        let cols = self.n_samples();
        if opts.normalize {
            let col_medians: Vec<f64> = (0..cols)
                .map(|j| {
                    let col: Vec<f64> = self.rows().map(|r| r[j]).collect();
                    median(&col)
                })
                .collect::<Result<_>>()?;
            let grand = median(&col_medians)?;
            if !(grand > 0.0) {
                return Err(Error::invalid(format!(
                    "cannot median-normalize: grand median {grand} is not positive"
                )));
            }
            if let Some(j) = col_medians.iter().position(|c| !(*c > 0.0)) {
                return Err(Error::invalid(format!(
                    "cannot median-normalize: sample `{}` has median {}",
                    self.sample_ids[j], col_medians[j]
                )));
            }
            for row in out.values.chunks_exact_mut(cols) {
                for (v, c) in row.iter_mut().zip(&col_medians) {
                    *v *= grand / c;
                }
            }
            out.provenance
                .transforms
                .push(format!("median-normalize(grand={grand})"));
        }
        if opts.log2 {
            if !(opts.floor > 0.0) {
                return Err(Error::invalid(format!(
                    "log floor must be positive, got {}",
                    opts.floor
                )));
            }
            for v in out.values.iter_mut() {
                *v = v.max(opts.floor).log2();
            }
            out.provenance
                .transforms
                .push(format!("log2(floor={})", opts.floor));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preprocess {
    pub normalize: bool,
    pub log2: bool,
    pub floor: f64,
}

impl Default for Preprocess {
    fn default() -> Self {
        Self {
            normalize: false,
            log2: false,
            floor: 1.0,
        }
    }
}

/// Where the class labels come from.
#[derive(Debug, Clone, Copy)]
pub enum LabelSpec<'a> {
    /// Second row of the matrix file: a corner cell then `0`/`1` per sample.
    InlineRow,
    /// Two-column `sample_name<TAB>{0|1}` file.
    Sidecar(&'a Path),
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::UnreadableInput {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty lines with their 1-based line numbers, CR stripped.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_matrix(path: &Path, labels: LabelSpec<'_>) -> Result<ExpressionDataset> {
    let text = read(path)?;
    let sidecar = match labels {
        LabelSpec::InlineRow => None,
        LabelSpec::Sidecar(p) => Some((p, read(p)?)),
    };
    let sidecar = sidecar.as_ref().map(|(p, t)| (*p, t.as_str()));
    let mut ds = parse_matrix_text(&text, path, sidecar)?;
    ds.provenance.source = Some(path.to_path_buf());
    Ok(ds)
}

/// Parses matrix text; `sidecar` carries the label file path and contents,
/// `None` selects the inline label row.
pub fn parse_matrix_text(
    text: &str,
    path: &Path,
    sidecar: Option<(&Path, &str)>,
) -> Result<ExpressionDataset> {
    let parse_err = |line, column, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut it = lines(text);
    let (_, header) = it
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty matrix file".into()))?;
    let sample_ids: Vec<String> = header.split('\t').skip(1).map(str::to_owned).collect();
    if sample_ids.is_empty() {
        return Err(parse_err(1, 2, "header names no samples".into()));
    }
    let width = sample_ids.len() + 1;

    let labels = match sidecar {
        None => {
            let (line, row) = it
                .next()
                .ok_or_else(|| parse_err(2, 1, "missing inline label row".into()))?;
            let fields: Vec<&str> = row.split('\t').collect();
            if fields.len() != width {
                return Err(Error::RowLength {
                    path: path.to_path_buf(),
                    line,
                    expected: width,
                    found: fields.len(),
                });
            }
            fields[1..]
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    Class::from_code(f.trim()).ok_or_else(|| {
                        parse_err(line, j + 2, format!("label `{f}` is not 0 or 1"))
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        Some((label_path, label_text)) => parse_sidecar(label_path, label_text, &sample_ids)?,
    };

    let mut gene_ids = Vec::new();
    let mut values = Vec::new();
    let mut first_line: HashMap<String, usize> = HashMap::new();
    for (line, row) in it {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != width {
            return Err(Error::RowLength {
                path: path.to_path_buf(),
                line,
                expected: width,
                found: fields.len(),
            });
        }
        let id = fields[0].trim().to_owned();
        if first_line.insert(id.clone(), line).is_some() {
            return Err(Error::DuplicateGene { id, line });
        }
        for (j, cell) in fields[1..].iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(line, j + 2, format!("`{cell}` is not a finite number")))?;
            values.push(v);
        }
        gene_ids.push(id);
    }
    if gene_ids.is_empty() {
        return Err(parse_err(1, 1, "matrix has no gene rows".into()));
    }
    ExpressionDataset::new(gene_ids, sample_ids, values, labels)
}

fn parse_sidecar(path: &Path, text: &str, sample_ids: &[String]) -> Result<Vec<Class>> {
    let index: HashMap<&str, usize> = sample_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut labels: Vec<Option<Class>> = vec![None; sample_ids.len()];
    for (line, row) in lines(text) {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::RowLength {
                path: path.to_path_buf(),
                line,
                expected: 2,
                found: fields.len(),
            });
        }
        let name = fields[0].trim();
        let class = Class::from_code(fields[1].trim()).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line,
            column: 2,
            message: format!("label `{}` is not 0 or 1", fields[1]),
        })?;
        let &col = index
            .get(name)
            .ok_or_else(|| Error::UnknownSample(name.to_owned()))?;
        labels[col] = Some(class);
    }
    labels
        .into_iter()
        .zip(sample_ids)
        .map(|(l, s)| l.ok_or_else(|| Error::MissingLabel(s.clone())))
        .collect()
}
