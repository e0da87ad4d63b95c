use std::fs;

use most_core::fdr::FdrConfig;
use most_core::{
    estimate_moments, fdr_curve, fdr_vs_called, generate_dataset, parse_matrix, score_all,
    Class, LabelSpec, Preprocess, ScoreConfig, SimConfig, Statistic,
};

#[test]
fn file_round_trip_then_score_and_fdr() {
    let dir = tempfile::tempdir().unwrap();
    let c = SimConfig {
        n: 12,
        m: 10,
        k: 3,
        mu: 5.0,
        n_de: 20,
        n_null: 80,
        seed: 3,
    };
    let (ds, mask) = generate_dataset(&c).unwrap();
    let path = dir.path().join("sim.tsv");
    fs::write(&path, ds.to_tsv()).unwrap();
    let back = parse_matrix(&path, LabelSpec::InlineRow).unwrap();
    assert_eq!(back.rows().flatten().copied().collect::<Vec<_>>(), ds.rows().flatten().copied().collect::<Vec<_>>());
    assert_eq!(back.provenance().source.as_deref(), Some(path.as_path()));
    assert_eq!(back.class_indices(Class::Cancer).len(), 10);

    let table = estimate_moments(10, 20_000, 1).unwrap();
    let cfg = ScoreConfig::new(vec![Statistic::Most, Statistic::T], Some(&table));
    let scores = score_all(&back, &cfg).unwrap();
    let mut ranked: Vec<(f64, bool)> = scores
        .iter()
        .zip(&mask)
        .map(|(g, &de)| (g.value(Statistic::Most).unwrap(), de))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let top_de = ranked[..20].iter().filter(|r| r.1).count();
    assert!(top_de >= 15, "only {top_de} DE genes in the top 20");

    let fdr = fdr_curve(&back, Statistic::Most, &cfg, &FdrConfig { permutations: 10, ..Default::default() }).unwrap();
    let proj = fdr_vs_called(&fdr);
    assert_eq!(proj.len(), fdr.rows.len());
    assert!(proj.iter().all(|p| (0.0..=1.0).contains(&p.1)));
}

#[test]
fn sidecar_labels_and_preprocessing_keep_columns() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.tsv");
    let l = dir.path().join("l.tsv");
    fs::write(&m, "id\tA\tB\tC\tD\ng1\t16\t4\t8\t2\ng2\t8\t8\t4\t4\ng3\t4\t16\t2\t8\n").unwrap();
    fs::write(&l, "D\t1\nB\t0\nA\t0\nC\t1\n").unwrap();
    let d = parse_matrix(&m, LabelSpec::Sidecar(&l)).unwrap();
    let p = d
        .preprocess(&Preprocess { normalize: true, log2: true, floor: 1.0 })
        .unwrap();
    assert_eq!(p.sample_ids(), d.sample_ids());
    assert_eq!(p.labels(), &[Class::Normal, Class::Normal, Class::Cancer, Class::Cancer]);
    assert_eq!(p.provenance().transforms.len(), 2);
    // Column medians 8, 8, 4, 4 -> grand median 6.
    assert!((p.row(1)[0] - 6f64.log2()).abs() < 1e-12);
    assert!((p.row(1)[2] - 6f64.log2()).abs() < 1e-12);
}

#[test]
fn missing_files_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let e = parse_matrix(&dir.path().join("none.tsv"), LabelSpec::InlineRow).unwrap_err();
    assert!(e.is_validation());
}
