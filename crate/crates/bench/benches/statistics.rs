use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use most_core::fdr::FdrConfig;
use most_core::{
    build_roc, estimate_moments, fdr_curve, generate_dataset, score_all, ScoreConfig, SimConfig,
    Statistic,
};

fn bench_moments(c: &mut Criterion) {
    c.bench_function("moments m=20 r=100k", |b| {
        b.iter(|| estimate_moments(20, 100_000, 1).unwrap())
    });
}

fn bench_scoring(c: &mut Criterion) {
    let moments = estimate_moments(20, 100_000, 1).unwrap();
    let (ds, _) = generate_dataset(&SimConfig {
        k: 3,
        ..SimConfig::default()
    })
    .unwrap();
    let mut group = c.benchmark_group("score 2000 genes");
    for stat in Statistic::ALL {
        let cfg = ScoreConfig::new(vec![stat], Some(&moments));
        group.bench_function(stat.name(), |b| b.iter(|| score_all(&ds, &cfg).unwrap()));
    }
    let all = ScoreConfig::new(Statistic::ALL.to_vec(), Some(&moments));
    group.bench_function("all", |b| b.iter(|| score_all(&ds, &all).unwrap()));
    group.finish();
}

fn bench_roc(c: &mut Criterion) {
    let de: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 * 0.01 + 0.5).collect();
    let null: Vec<f64> = (0..1000).map(|i| ((i * 104_729) % 1000) as f64 * 0.01).collect();
    c.bench_function("roc 1000+1000", |b| {
        b.iter_batched(|| (de.clone(), null.clone()), |(d, n)| build_roc("s", &d, &n).unwrap(), BatchSize::SmallInput)
    });
}

fn bench_fdr(c: &mut Criterion) {
    let (ds, _) = generate_dataset(&SimConfig {
        n_de: 100,
        n_null: 900,
        k: 3,
        mu: 4.0,
        ..SimConfig::default()
    })
    .unwrap();
    let cfg = ScoreConfig::new(vec![Statistic::T], None);
    let fdr = FdrConfig {
        permutations: 20,
        ..FdrConfig::default()
    };
    let mut group = c.benchmark_group("fdr");
    group.sample_size(10);
    group.bench_function("T 1000 genes B=20", |b| {
        b.iter(|| fdr_curve(&ds, Statistic::T, &cfg, &fdr).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_moments, bench_scoring, bench_roc, bench_fdr);
criterion_main!(benches);
