//! Monte-Carlo moments of top-k sums of standard-normal order statistics.
//!
//! For a cancer group of size `m`, MOST normalizes each partial-sum ratio by
//! `mu_k = E[z_(1) + ... + z_(k)]` and `sigma_k = sd(z_(1) + ... + z_(k))`,
//! where `z_(1) > ... > z_(m)` are the order statistics of `m` independent
//! standard normals. Both are estimated by simulation.
//!
//! Replicates come in antithetic pairs: replicate `2p` uses the variates of
//! stream `p` and replicate `2p + 1` uses their negation. Each replicate is
//! still a sample of `m` standard normals, but the pairing makes the full sum
//! (`k = m`) exactly zero-mean and the `mu_k = mu_{m-k}` symmetry exact for an
//! even replicate count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::rng::{stream, StreamDomain};

pub const MIN_REPLICATES: u64 = 1000;
pub const DEFAULT_REPLICATES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_080_507;

const CACHE_VERSION: u32 = 1;
/// Replicates per work unit. Must stay even so pairs never straddle chunks.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    m: usize,
    mu: Vec<f64>,
    sigma: Vec<f64>,
    replicates: u64,
    seed: u64,
}

impl MomentTable {
    /// Assembles a table from known values, e.g. exact moments in tests.
    pub fn from_parts(
        mu: Vec<f64>,
        sigma: Vec<f64>,
        replicates: u64,
        seed: u64,
    ) -> Result<Self> {
        let m = mu.len();
        if m == 0 || sigma.len() != m {
            return Err(Error::invalid(format!(
                "moment table needs m >= 1 and equal-length mu/sigma (got {} and {})",
                mu.len(),
                sigma.len()
            )));
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite mu in moment table"));
        }
        if let Some(k) = sigma.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid(format!(
                "sigma_{} = {} is not positive",
                k + 1,
                sigma[k]
            )));
        }
        Ok(Self {
            m,
            mu,
            sigma,
            replicates,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `mu[k - 1]` is the expected sum of the `k` largest order statistics.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `sigma[k - 1]` is the standard deviation of that sum.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn replicates(&self) -> u64 {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Cache-file text: a key header followed by `k<TAB>mu<TAB>sigma` rows.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# m={} replicates={} seed={} version={}\n",
            self.m, self.replicates, self.seed, CACHE_VERSION
        );
        for (k, (mu, sigma)) in self.mu.iter().zip(&self.sigma).enumerate() {
            let _ = writeln!(out, "{}\t{:.16e}\t{:.16e}", k + 1, mu, sigma);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty moment table"))?;
        let key = CacheKey::parse_header(header)?;
        let mut mu = Vec::with_capacity(key.m);
        let mut sigma = Vec::with_capacity(key.m);
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = || Error::invalid(format!("malformed moment row {}: `{line}`", i + 1));
            if fields.len() != 3 || fields[0].parse::<usize>().ok() != Some(mu.len() + 1) {
                return Err(bad());
            }
            mu.push(fields[1].parse::<f64>().map_err(|_| bad())?);
            sigma.push(fields[2].parse::<f64>().map_err(|_| bad())?);
        }
        if mu.len() != key.m {
            return Err(Error::invalid(format!(
                "moment table declares m={} but has {} rows",
                key.m,
                mu.len()
            )));
        }
        Self::from_parts(mu, sigma, key.replicates, key.seed)
    }
}

#[derive(Debug, PartialEq, Eq)]
struct CacheKey {
    m: usize,
    replicates: u64,
    seed: u64,
}

impl CacheKey {
    fn parse_header(line: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("malformed moment table header `{line}`"));
        let rest = line.strip_prefix("# ").ok_or_else(bad)?;
        let (mut m, mut replicates, mut seed, mut version) = (None, None, None, None);
        for field in rest.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(bad)?;
            match k {
                "m" => m = v.parse().ok(),
                "replicates" => replicates = v.parse().ok(),
                "seed" => seed = v.parse().ok(),
                "version" => version = v.parse::<u32>().ok(),
                _ => return Err(bad()),
            }
        }
        if version != Some(CACHE_VERSION) {
            return Err(Error::invalid(format!(
                "unsupported moment table version in `{line}`"
            )));
        }
        Ok(Self {
            m: m.ok_or_else(bad)?,
            replicates: replicates.ok_or_else(bad)?,
            seed: seed.ok_or_else(bad)?,
        })
    }
}

/// Running mean and sum of squared deviations for each `k`.
#[derive(Clone)]
struct Accumulator {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Accumulator {
    fn new(m: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; m],
            m2: vec![0.0; m],
        }
    }

    fn push(&mut self, sums: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), &s) in self.mean.iter_mut().zip(&mut self.m2).zip(sums) {
            let d = s - *mean;
            *mean += d / n;
            *m2 += d * (s - *mean);
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for k in 0..self.mean.len() {
            let d = other.mean[k] - self.mean[k];
            self.mean[k] += d * nb / n;
            self.m2[k] += other.m2[k] + d * d * na * nb / n;
        }
        self.count += other.count;
    }
}

fn simulate_chunk(m: usize, seed: u64, start: u64, end: u64) -> Accumulator {
    let mut acc = Accumulator::new(m);
    let mut z = vec![0.0; m];
    let mut top = vec![0.0; m];
    let mut mirrored = vec![0.0; m];
    let mut r = start;
    while r < end {
        let mut rng = stream(seed, StreamDomain::Moments, r / 2);
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        z.sort_by(f64::total_cmp);
        // top[k-1]: sum of the k largest of z; mirrored[k-1]: sum of the k
        // largest of -z, i.e. minus the sum of the k smallest of z.
        let (mut hi, mut lo) = (0.0, 0.0);
        for k in 0..m {
            hi += z[m - 1 - k];
            lo += z[k];
            top[k] = hi;
            mirrored[k] = -lo;
        }
        acc.push(&top);
        if r + 1 < end {
            acc.push(&mirrored);
        }
        r += 2;
    }
    acc
}

/// Estimates `mu_k` and `sigma_k` for `k = 1..=m` from `replicates` draws.
///
/// The result depends only on `(m, replicates, seed)`; the rayon pool size
/// has no influence on any bit of the output.
pub fn estimate_moments(m: usize, replicates: u64, seed: u64) -> Result<MomentTable> {
    if m == 0 {
        return Err(Error::invalid("moment table needs m >= 1"));
    }
    if replicates < MIN_REPLICATES {
        return Err(Error::invalid(format!(
            "moment table needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    let chunks = replicates.div_ceil(CHUNK);
    let parts: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| simulate_chunk(m, seed, c * CHUNK, ((c + 1) * CHUNK).min(replicates)))
        .collect();
    let mut total = Accumulator::new(m);
    for part in &parts {
        total.merge(part);
    }
    let denom = (total.count - 1) as f64;
    let sigma: Vec<f64> = total.m2.iter().map(|v| (v / denom).sqrt()).collect();
    if let Some(k) = sigma.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::Internal(format!(
            "simulated sigma_{} is not positive",
            k + 1
        )));
    }
    MomentTable::from_parts(total.mean, sigma, replicates, seed)
}

/// How [`load_or_build`] obtained its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    /// Built and written to the cache.
    Built,
    /// Built, but the cache could not be written.
    BuiltUncached,
}

pub fn cache_path(cache_dir: &Path, m: usize, replicates: u64, seed: u64) -> PathBuf {
    cache_dir.join(format!("moments_m{m}_r{replicates}_s{seed}.tsv"))
}

/// Returns the cached table for `(m, replicates, seed)` or builds and
/// stores it. A corrupt or mismatched cache file is rebuilt; an unwritable
/// cache directory only costs the persistence.
pub fn load_or_build(
    m: usize,
    replicates: u64,
    seed: u64,
    cache_dir: &Path,
) -> Result<(MomentTable, CacheOutcome)> {
    let path = cache_path(cache_dir, m, replicates, seed);
    if let Ok(text) = fs::read_to_string(&path) {
        match MomentTable::from_text(&text) {
            Ok(t) if t.m == m && t.replicates == replicates && t.seed == seed => {
                return Ok((t, CacheOutcome::Hit));
            }
            Ok(_) => log::warn!("{}: cache key mismatch, rebuilding", path.display()),
            Err(e) => log::warn!("{}: corrupt cache ({e}), rebuilding", path.display()),
        }
    }
    let table = estimate_moments(m, replicates, seed)?;
    let outcome = match fs::create_dir_all(cache_dir)
        .map_err(|e| Error::io(format!("creating {}", cache_dir.display()), e))
        .and_then(|_| write_atomic(&path, table.to_text().as_bytes()))
    {
        Ok(()) => CacheOutcome::Built,
        Err(e) => {
            log::warn!("moment cache not written, continuing in memory: {e}");
            CacheOutcome::BuiltUncached
        }
    };
    Ok((table, outcome))
}
