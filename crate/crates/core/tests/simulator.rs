use alcc::simulator::{
    generate_data, manifest, relative_error, results_csv, run_experiment, sweep, Axis, ExperimentConfig, Protocol,
    StragglerSpec, CSV_HEADER,
};
use alcc::Error;

fn small() -> ExperimentConfig {
    ExperimentConfig { m_prime: 200, n: 8, trials: 2, ..Default::default() }
}

fn key_of(e: Error) -> String {
    e.config_key().expect("config error").to_string()
}

#[test]
fn noiseless_identity_is_exact() {
    let cfg = ExperimentConfig { f: "identity".into(), sigma_n: 0.0, ..small() };
    let r = run_experiment(&cfg).unwrap();
    assert!(r.e_rel_mean <= 1e-9, "{}", r.e_rel_mean);
    assert_eq!(r.used_workers, (1..=8).collect::<Vec<_>>());
}

#[test]
fn noiseless_gram_is_exact_under_every_straggler() {
    let base = ExperimentConfig { sigma_n: 0.0, s: 1, ..small() };
    let n_workers = 16;
    for w in 1..=n_workers {
        let cfg = ExperimentConfig { stragglers: StragglerSpec::Fixed(vec![w]), ..base.clone() };
        let r = run_experiment(&cfg).unwrap();
        assert!(r.e_rel_mean <= 1e-7, "straggler {w}: {}", r.e_rel_mean);
        assert!(r.stragglers.iter().all(|s| s == &vec![w]));
    }
    let random = ExperimentConfig { stragglers: StragglerSpec::Random(1), ..base };
    assert!(run_experiment(&random).unwrap().e_rel_mean <= 1e-7);
}

#[test]
fn small_gram_accuracy() {
    // m = 20 rows per block.
    let cfg = ExperimentConfig { m_prime: 100, trials: 20, ..Default::default() };
    let r = run_experiment(&cfg).unwrap();
    assert!((r.neg_log10_e_rel - 3.3).abs() <= 0.3, "{}", r.neg_log10_e_rel);
    assert!(r.imag_residue_max.is_some() && r.overflow_flag.is_none());
}

#[test]
fn beta_row_is_decreasing() {
    let cfg = ExperimentConfig { m_prime: 2000, ..Default::default() };
    let values: Vec<String> = ["1.1", "1.5", "1.8", "2"].map(String::from).to_vec();
    let res = sweep(&cfg, Axis::Beta, &values).unwrap();
    let col: Vec<f64> = res.iter().map(|r| r.neg_log10_e_rel).collect();
    assert!(col.windows(2).all(|w| w[1] < w[0]), "{col:?}");
}

#[test]
fn determinism_and_thread_independence() {
    let cfg = ExperimentConfig { threads: Some(1), ..small() };
    let csv = |c: &ExperimentConfig| {
        let r = run_experiment(c).unwrap();
        results_csv(None, &[0.0], c.protocol, &[r])
    };
    let a = csv(&cfg);
    assert_eq!(a, csv(&cfg));
    assert_eq!(a, csv(&ExperimentConfig { threads: Some(4), ..cfg.clone() }));
    assert_ne!(a, csv(&ExperimentConfig { seed: 1, ..cfg }));
}

#[test]
fn lcc_safe_region_is_quantization_limited() {
    let cfg = ExperimentConfig { protocol: Protocol::Lcc, ..small() };
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.overflow_observed, Some(false));
    assert!(r.e_rel_mean < 1e-2, "{}", r.e_rel_mean);
    assert!(r.imag_residue_max.is_none());
}

#[test]
fn lcc_overflow_is_reported() {
    let cfg = ExperimentConfig { protocol: Protocol::Lcc, p: Some(8191), b: 32, m_prime: 2000, ..small() };
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.overflow_flag, Some(true));
    assert_eq!(r.overflow_observed, Some(true));
    assert!(r.e_rel_mean > 0.1);
}

#[test]
fn config_errors_name_the_key() {
    let bad = [
        (ExperimentConfig { m_prime: 13, ..small() }, "m_prime"),
        (ExperimentConfig { s: 0, stragglers: StragglerSpec::Random(1), ..small() }, "stragglers"),
        (ExperimentConfig { s: 1, stragglers: StragglerSpec::Fixed(vec![17]), ..small() }, "stragglers"),
        (ExperimentConfig { beta: -1.0, ..small() }, "beta"),
        (ExperimentConfig { f: "cube".into(), ..small() }, "f"),
        (ExperimentConfig { protocol: Protocol::Lcc, p: Some(100), ..small() }, "p"),
        (ExperimentConfig { trials: 0, ..small() }, "trials"),
    ];
    for (cfg, key) in bad {
        assert_eq!(key_of(run_experiment(&cfg).unwrap_err()), key);
    }
    let mut cfg = small();
    assert_eq!(key_of(cfg.set("gamma", "1").unwrap_err()), "gamma");
    assert_eq!(key_of(cfg.set("k", "many").unwrap_err()), "k");
    cfg.set("stragglers", "fixed:2,5").unwrap();
    assert_eq!(cfg.stragglers, StragglerSpec::Fixed(vec![2, 5]));
    assert_eq!(key_of(ExperimentConfig::from_json(r#"{"bogus": 3}"#).unwrap_err()), "bogus");
    assert_eq!(key_of(sweep(&small(), Axis::B, &["32".into()]).unwrap_err()), "axis");
}

#[test]
fn csv_shape() {
    let cfg = small();
    let r = run_experiment(&cfg).unwrap();
    let csv = results_csv(Some(Axis::MPrime), &[200.0], Protocol::Alcc, &[r]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols.len(), CSV_HEADER.split(',').count());
    assert_eq!(cols[0], "m_prime");
    assert_eq!(cols[1], "2.0000000000000000e2");
    let mean: f64 = cols[4].parse().unwrap();
    assert_eq!(format!("{mean:.16e}"), cols[4]);
}

#[test]
fn manifest_reruns_exactly() {
    let cfg = ExperimentConfig { threads: Some(1), ..small() };
    let r = run_experiment(&cfg).unwrap();
    let m = manifest(&cfg, None, &["200".into()], std::slice::from_ref(&r));
    let text = serde_json::to_string(&m["config"]).unwrap();
    let again: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(again, cfg);
    let r2 = run_experiment(&again).unwrap();
    assert_eq!(results_csv(None, &[0.0], Protocol::Alcc, &[r]), results_csv(None, &[0.0], Protocol::Alcc, &[r2]));
}

#[test]
fn uniform_data_respects_bound() {
    let cfg = ExperimentConfig { distribution: alcc::simulator::Distribution::Uniform, r: Some(0.5), ..small() };
    let x = generate_data(&cfg, 3).unwrap();
    assert!(x.max_abs() <= 0.5);
    assert_eq!(x.len(), 5);
    assert_eq!(x.dims(), (40, 8));
    assert!(run_experiment(&cfg).unwrap().e_rel_mean.is_finite());
}

#[test]
fn relative_error_definition() {
    use alcc::numerics::RMatrix;
    let want = vec![RMatrix::filled(2, 2, 1.0), RMatrix::filled(2, 2, 1.0)];
    let got = vec![RMatrix::filled(2, 2, 1.5), RMatrix::filled(2, 2, 1.0)];
    // Summed: ‖(2.5) − (2)‖ / ‖2‖ entrywise.
    assert!((relative_error(&got, &want, true) - 0.25).abs() < 1e-15);
    // Blockwise: ‖0.5·1‖_F over 4 entries against ‖1‖_F over 8.
    assert!((relative_error(&got, &want, false) - (1.0f64 / 8.0).sqrt()).abs() < 1e-15);
}
