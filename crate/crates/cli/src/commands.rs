use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;

use most_core::fdr::{projection_csv, PermutationNull};
use most_core::io::write_atomic;
use most_core::roc::{curves_csv, summary_csv};
use most_core::sim::parse_grid;
use most_core::svg::{fdr_svg, roc_svg};
use most_core::{
    estimate_moments, fdr_vs_called, load_or_build, parse_matrix, score_all, sim, CacheOutcome,
    Class, ExpressionDataset, FalseCount, FdrConfig, LabelSpec, MomentTable, Preprocess,
    ScoreConfig, SimConfig, Statistic,
};

use crate::{Command, FdrArgs, InputOpts, MomentOpts, MomentsArgs, ScoreArgs, SimulateArgs};

/// Failure with the process exit code it maps to: 1 for invalid input,
/// 2 for runtime problems.
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl From<most_core::Error> for CliError {
    fn from(e: most_core::Error) -> Self {
        let code = if e.is_validation() { 1 } else { 2 };
        Self {
            code,
            error: e.into(),
        }
    }
}

fn invalid(msg: impl std::fmt::Display) -> CliError {
    CliError {
        code: 1,
        error: anyhow!("{msg}"),
    }
}

fn runtime(context: String, e: std::io::Error) -> CliError {
    CliError {
        code: 2,
        error: anyhow::Error::new(e).context(context),
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Score(a) => score(a),
        Command::Simulate(a) => simulate(a),
        Command::Fdr(a) => fdr(a),
        Command::Moments(a) => moments(a),
    }
}

fn reproducibility(line: String) {
    eprintln!("most {} {line}", env!("CARGO_PKG_VERSION"));
}

fn load_dataset(opts: &InputOpts) -> CliResult<ExpressionDataset> {
    let spec = match &opts.labels {
        Some(p) => LabelSpec::Sidecar(p),
        None => LabelSpec::InlineRow,
    };
    let ds = parse_matrix(&opts.input, spec)?;
    let pre = Preprocess {
        normalize: opts.normalize,
        log2: opts.log2,
        floor: opts.floor,
    };
    let ds = if pre.normalize || pre.log2 {
        ds.preprocess(&pre)?
    } else {
        ds
    };
    log::info!(
        "{}: {} genes, {} samples, transforms {:?}",
        opts.input.display(),
        ds.n_genes(),
        ds.n_samples(),
        ds.provenance().transforms
    );
    Ok(ds)
}

fn moment_table(m: usize, opts: &MomentOpts) -> CliResult<MomentTable> {
    match &opts.moments_cache {
        Some(dir) => {
            let (table, outcome) = load_or_build(m, opts.replicates, opts.moment_seed, dir)?;
            log::info!("moment table m={m}: {outcome:?}");
            Ok(table)
        }
        None => Ok(estimate_moments(m, opts.replicates, opts.moment_seed)?),
    }
}

fn check_copa(r: f64) -> CliResult {
    if (0.0..=100.0).contains(&r) {
        Ok(())
    } else {
        Err(invalid(format!("--copa-r {r} outside [0, 100]")))
    }
}

fn score(a: ScoreArgs) -> CliResult {
    let stats = Statistic::parse_list(&a.stats)?;
    check_copa(a.copa_r)?;
    let ds = load_dataset(&a.input)?;
    reproducibility(format!(
        "score stats={} copa_r={} replicates={} moment_seed={}",
        a.stats, a.copa_r, a.moments.replicates, a.moments.moment_seed
    ));
    let m = ds.class_indices(Class::Cancer).len();
    let table = if stats.contains(&Statistic::Most) {
        Some(moment_table(m, &a.moments)?)
    } else {
        None
    };
    let config = ScoreConfig {
        statistics: stats.clone(),
        copa_percentile: a.copa_r,
        moments: table.as_ref(),
    };
    let mut scores = score_all(&ds, &config)?;
    let key = stats[0];
    // Descending by the first statistic, degenerate genes last, stable.
    scores.sort_by(|x, y| match (x.value(key), y.value(key)) {
        (Some(p), Some(q)) => q.total_cmp(&p),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });

    let mut out = String::from("gene_id");
    for s in &stats {
        out.push(',');
        out.push_str(s.name());
    }
    out.push_str(",k_hat,degenerate_flags\n");
    for g in &scores {
        out.push_str(&g.gene_id);
        for s in &stats {
            match g.value(*s) {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push_str(",NA"),
            }
        }
        out.push(',');
        if let Some(k) = g.k_hat {
            let _ = write!(out, "{k}");
        }
        let flags: Vec<&str> = stats
            .iter()
            .filter(|s| g.is_degenerate(**s))
            .map(|s| s.name())
            .collect();
        let _ = writeln!(out, ",{}", flags.join(";"));
    }
    write_atomic(&a.out, out.as_bytes())?;
    Ok(())
}

fn cell_label(c: &SimConfig) -> String {
    format!("mu{}_k{}", c.mu, c.k)
}

fn simulate(a: SimulateArgs) -> CliResult {
    let stats = Statistic::parse_list(&a.stats)?;
    check_copa(a.copa_r)?;
    let base = SimConfig {
        n: a.n,
        m: a.m,
        k: a.k,
        mu: a.mu,
        n_de: a.n_de,
        n_null: a.n_null,
        seed: a.seed,
    };
    let cells = match &a.grid {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| runtime(format!("reading {}", path.display()), e))?;
            parse_grid(&text, &base).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None => {
            base.validate()?;
            vec![base]
        }
    };
    let mut labels = HashSet::new();
    for c in &cells {
        if !labels.insert(cell_label(c)) {
            return Err(invalid(format!(
                "grid repeats the cell {}; outputs would collide",
                cell_label(c)
            )));
        }
    }
    fs::create_dir_all(&a.out_dir)
        .map_err(|e| runtime(format!("creating {}", a.out_dir.display()), e))?;

    let mut tables: BTreeMap<usize, MomentTable> = BTreeMap::new();
    for c in &cells {
        reproducibility(format!(
            "simulate n={} m={} k={} mu={} n_de={} n_null={} seed={} copa_r={} replicates={} moment_seed={}",
            c.n, c.m, c.k, c.mu, c.n_de, c.n_null, c.seed, a.copa_r, a.moments.replicates, a.moments.moment_seed
        ));
        if stats.contains(&Statistic::Most) && !tables.contains_key(&c.m) {
            tables.insert(c.m, moment_table(c.m, &a.moments)?);
        }
        let study = sim::run_study(c, &stats, a.copa_r, tables.get(&c.m))?;
        let mut curves = Vec::new();
        let mut excluded = Vec::new();
        for s in &stats {
            let ls = &study[s];
            curves.push(ls.roc()?);
            excluded.push(ls.excluded);
        }
        let label = cell_label(c);
        let write = |name: String, body: String| write_atomic(&a.out_dir.join(name), body.as_bytes());
        write(format!("roc_{label}.csv"), curves_csv(&curves))?;
        write(format!("auc_{label}.csv"), summary_csv(&curves, &excluded))?;
        if a.svg {
            write(format!("roc_{label}.svg"), roc_svg(&format!("mu={} k={}", c.mu, c.k), &curves))?;
        }
        for curve in &curves {
            println!("{label}\t{}\t{:.4}", curve.statistic, curve.auc);
        }
    }
    Ok(())
}

fn default_projection(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "fdr".into());
    out.with_file_name(format!("{stem}.called.csv"))
}

fn fdr(a: FdrArgs) -> CliResult {
    let stat: Statistic = a.stat.parse()?;
    let false_count: FalseCount = a.false_count.parse()?;
    check_copa(a.copa_r)?;
    if a.permutations == 0 {
        return Err(invalid("--permutations must be at least 1"));
    }
    let ds = load_dataset(&a.input)?;
    reproducibility(format!(
        "fdr stat={stat} permutations={} seed={} pi0={} false_count={} copa_r={} replicates={} moment_seed={}",
        a.permutations, a.seed, a.pi0, a.false_count, a.copa_r, a.moments.replicates, a.moments.moment_seed
    ));
    let m = ds.class_indices(Class::Cancer).len();
    let table = if stat == Statistic::Most {
        Some(moment_table(m, &a.moments)?)
    } else {
        None
    };
    let score = ScoreConfig {
        statistics: vec![stat],
        copa_percentile: a.copa_r,
        moments: table.as_ref(),
    };
    let config = FdrConfig {
        permutations: a.permutations,
        seed: a.seed,
        pi0: a.pi0,
        false_count,
    };
    let fdr_table = PermutationNull::build(&ds, stat, &score, &config)?.table(stat, &config);
    let points = fdr_vs_called(&fdr_table);
    write_atomic(&a.out, fdr_table.to_csv().as_bytes())?;
    let projection = a.projection_out.clone().unwrap_or_else(|| default_projection(&a.out));
    write_atomic(&projection, projection_csv(&points).as_bytes())?;
    if let Some(svg) = &a.svg {
        let body = fdr_svg("FDR vs genes called", &[(stat.name().to_owned(), points)]);
        write_atomic(svg, body.as_bytes())?;
    }
    Ok(())
}

fn moments(a: MomentsArgs) -> CliResult {
    if a.m == 0 {
        return Err(invalid("--m must be at least 1"));
    }
    reproducibility(format!("moments m={} replicates={} seed={}", a.m, a.replicates, a.seed));
    let (table, outcome) = load_or_build(a.m, a.replicates, a.seed, &a.cache_dir)?;
    match outcome {
        CacheOutcome::Hit => eprintln!("cache hit: {}", a.cache_dir.display()),
        CacheOutcome::Built => eprintln!("built and cached in {}", a.cache_dir.display()),
        CacheOutcome::BuiltUncached => eprintln!("built; cache not writable"),
    }
    print!("{}", table.to_text());
    Ok(())
}
