//! `alcc`: run ALCC experiments, bound sweeps and the LCC comparison.
//!
//! Exit status is 0 on success, 2 for usage or configuration errors and 1
//! when a computation fails.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use alcc::accuracy::{alcc_error_bound, BoundKind};
use alcc::alcc::{decode, Eval, EvalSet};
use alcc::exec;
use alcc::lcc::largest_prime_at_most;
use alcc::numerics::{condition_number, dft, mix_seed, sample_truncated_complex_gaussian, unit_root, ComplexGaussianSpec};
use alcc::polyfun::PolyFn;
use alcc::privacy::{mis_bound, SearchMode};
use alcc::simulator::{
    self, compare_lcc, fmt_f64, manifest, prepare_alcc, relative_error, results_csv, run_experiment, series_csv,
    Axis, ExperimentConfig, COMPARE_BETAS, COMPARE_M_PRIME, COMPARE_P_BITS,
};
use alcc::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "alcc", version, about = "Analog Lagrange coded computing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set beta=2`. Repeatable; wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory for result files and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to ALCC_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    General,
    MatrixPoly,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset, encode it and write the shares.
    Encode {
        #[command(flatten)]
        common: Common,
        /// Also evaluate f at every answering worker and write the answers.
        #[arg(long)]
        apply: bool,
    },
    /// Decode worker answers written by `encode --apply`.
    Decode {
        #[command(flatten)]
        common: Common,
        /// Answer files stem (`<stem>.json` + `<stem>.bin`); defaults to `<out>/evals`.
        #[arg(long)]
        evals: Option<PathBuf>,
    },
    /// One experiment.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// One experiment per value along an axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Mutual-information and distinguishing-security bounds.
    PrivacyBounds {
        #[command(flatten)]
        common: Common,
        /// `start:stop:step` over β.
        #[arg(long, conflicts_with_all = ["axis", "values"])]
        beta_sweep: Option<String>,
        /// `beta` or `sigma_n`.
        #[arg(long, requires = "values")]
        axis: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        /// Evaluate this many random collusion sets instead of all of them.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Floating-point ALCC error bound against the fixed-point LCC bounds.
    AccuracyBounds {
        #[command(flatten)]
        common: Common,
        /// `start:stop:step` over the word size b.
        #[arg(long, conflicts_with_all = ["beta_sweep", "axis", "values"])]
        b_sweep: Option<String>,
        /// `start:stop:step` over β.
        #[arg(long, conflicts_with_all = ["axis", "values"])]
        beta_sweep: Option<String>,
        /// `b` or `beta`.
        #[arg(long, requires = "values")]
        axis: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        #[arg(long, value_enum, default_value = "matrix-poly")]
        kind: Kind,
    },
    /// ALCC and LCC over the same m′ sweep.
    CompareLcc {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        betas: Vec<f64>,
        /// Field primes; defaults to the largest primes below 2^25, 2^26, 2^28.
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
    },
    /// Quick built-in checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.config_key().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.into(), reason: reason.into() }
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_err("config", format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for kv in &c.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| config_err(kv, "expected KEY=VALUE"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(t) = c.threads {
        cfg.threads = Some(t);
    } else if let Ok(env) = std::env::var("ALCC_THREADS") {
        let t = env
            .parse()
            .map_err(|_| config_err("ALCC_THREADS", format!("`{env}` is not a thread count")))?;
        cfg.threads = Some(t);
    }
    if cfg.threads == Some(0) {
        return Err(config_err("threads", "must be positive"));
    }
    Ok(cfg)
}

fn emit(c: &Common, csv: &str, json: &serde_json::Value, manifest: &serde_json::Value) -> Result<()> {
    if let Some(dir) = &c.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("results.csv"), csv)?;
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest)?)?;
    }
    if c.json {
        println!("{}", serde_json::to_string_pretty(json)?);
    } else {
        print!("{csv}");
    }
    Ok(())
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
fn parse_range(key: &str, spec: &str) -> Result<Vec<String>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| config_err(key, format!("`{spec}` is not start:stop:step")))?;
    let [start, stop, step] = parts[..] else {
        return Err(config_err(key, format!("`{spec}` is not start:stop:step")));
    };
    if !(step > 0.0) || stop < start {
        return Err(config_err(key, "needs step > 0 and stop ≥ start"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| format!("{}", ((start + i as f64 * step) * 1e12).round() / 1e12)).collect())
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse().map_err(|_| config_err(key, format!("`{v}` is not a number")))
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Encode { common, apply } => encode_cmd(&common, apply),
        Command::Decode { common, evals } => decode_cmd(&common, evals),
        Command::Run { common } => {
            let cfg = load_config(&common)?;
            let r = run_experiment(&cfg)?;
            let csv = results_csv(None, &[0.0], cfg.protocol, std::slice::from_ref(&r));
            let m = manifest(&cfg, None, &["-".into()], std::slice::from_ref(&r));
            emit(&common, &csv, &json!(r), &m)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, axis, values } => {
            let cfg = load_config(&common)?;
            let axis: Axis = axis.parse()?;
            let nums = values.iter().map(|v| parse_f64(axis.key(), v)).collect::<Result<Vec<_>>>()?;
            let results = simulator::sweep(&cfg, axis, &values)?;
            let csv = results_csv(Some(axis), &nums, cfg.protocol, &results);
            let m = manifest(&cfg, Some(axis), &values, &results);
            emit(&common, &csv, &json!(results), &m)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::PrivacyBounds { common, beta_sweep, axis, values, samples } => {
            privacy_cmd(&common, beta_sweep, axis, values, samples)
        }
        Command::AccuracyBounds { common, b_sweep, beta_sweep, axis, values, kind } => {
            accuracy_cmd(&common, b_sweep, beta_sweep, axis, values, kind)
        }
        Command::CompareLcc { common, values, betas, primes } => {
            let cfg = load_config(&common)?;
            let values = if values.is_empty() { COMPARE_M_PRIME.to_vec() } else { values };
            let betas = if betas.is_empty() { COMPARE_BETAS.to_vec() } else { betas };
            let primes = if primes.is_empty() {
                COMPARE_P_BITS
                    .iter()
                    .map(|&b| largest_prime_at_most(1 << b).expect("prime"))
                    .collect()
            } else {
                primes
            };
            let series = compare_lcc(&cfg, &values, &betas, &primes)?;
            let csv = series_csv(&series, &values);
            let m = json!({
                "library": "alcc",
                "version": env!("CARGO_PKG_VERSION"),
                "config": cfg,
                "m_prime": values,
                "betas": betas,
                "primes": primes,
                "series": series,
            });
            emit(&common, &csv, &json!(series), &m)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => Ok(selftest()),
    }
}

fn encode_cmd(common: &Common, apply: bool) -> Result<ExitCode> {
    let cfg = load_config(common)?;
    let out = common.out.clone().ok_or_else(|| config_err("out", "encode needs --out"))?;
    let f = cfg.poly()?;
    let (batch, params) = prepare_alcc(&cfg, 0)?;
    let withheld = cfg
        .stragglers
        .resolve(params.n_workers(), mix_seed(mix_seed(cfg.seed, 0), 2));
    exec::with_threads(cfg.threads, || -> Result<()> {
        let shares = alcc::alcc::encode(&batch, &params)?;
        fs::create_dir_all(&out)?;
        fs::write(out.join("data.json"), serde_json::to_string(batch.matrices())?)?;
        shares.save(&out.join("shares"))?;
        if apply {
            let answering: Vec<_> = shares.shares.iter().filter(|s| !withheld.contains(&s.worker)).collect();
            let results = answering
                .iter()
                .map(|s| Ok(Eval { worker: s.worker, value: f.eval(&s.value)? }))
                .collect::<Result<Vec<_>>>()?;
            EvalSet { results, poly_degree: params.degree }.save(&out.join("evals"))?;
        }
        Ok(())
    })?;
    let m = json!({
        "library": "alcc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "params": params,
        "params_fingerprint": params.fingerprint(),
        "withheld": withheld,
    });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&m)?)?;
    println!("{}", serde_json::to_string_pretty(&json!({"workers": params.n_workers(), "withheld": withheld}))?);
    Ok(ExitCode::SUCCESS)
}

fn decode_cmd(common: &Common, evals: Option<PathBuf>) -> Result<ExitCode> {
    let cfg = load_config(common)?;
    let stem = match (evals, &common.out) {
        (Some(s), _) => s,
        (None, Some(dir)) => dir.join("evals"),
        (None, None) => return Err(config_err("evals", "give --evals or --out")),
    };
    let f = cfg.poly()?;
    let (batch, params) = prepare_alcc(&cfg, 0)?;
    let answers = EvalSet::load(&stem)?;
    let (m, n) = batch.dims();
    let decoded = decode(&answers, &params, f.output_dims(m, n)?)?;
    let want = batch
        .matrices()
        .iter()
        .map(|x| f.eval_in(&alcc::numerics::RealRing, x))
        .collect::<Result<Vec<_>>>()?;
    let e_rel = relative_error(&decoded.outputs, &want, f.is_gram());
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("decoded.json"), serde_json::to_string(&decoded.outputs)?)?;
    }
    let summary = json!({
        "used_workers": decoded.used_workers,
        "imag_residue_max": decoded.imag_residue_max,
        "e_rel": e_rel,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}

fn sweep_values(
    beta_sweep: Option<String>,
    extra: Option<(&str, String)>,
    axis: Option<String>,
    values: Vec<String>,
    allowed: &[&str],
) -> Result<Option<(String, Vec<String>)>> {
    if let Some(spec) = beta_sweep {
        return Ok(Some(("beta".into(), parse_range("beta_sweep", &spec)?)));
    }
    if let Some((key, spec)) = extra {
        return Ok(Some((key.into(), parse_range(key, &spec)?)));
    }
    match axis {
        Some(a) if allowed.contains(&a.as_str()) => Ok(Some((a, values))),
        Some(a) => Err(config_err("axis", format!("`{a}` is not one of {}", allowed.join(", ")))),
        None => Ok(None),
    }
}

fn privacy_cmd(
    common: &Common,
    beta_sweep: Option<String>,
    axis: Option<String>,
    values: Vec<String>,
    samples: Option<usize>,
) -> Result<ExitCode> {
    let cfg = load_config(common)?;
    let r = cfg.r.ok_or_else(|| config_err("r", "privacy bounds need a data bound"))?;
    let mode = match samples {
        Some(count) => SearchMode::Sampled { count, seed: cfg.seed },
        None => SearchMode::Exhaustive,
    };
    let sweep = sweep_values(beta_sweep, None, axis, values, &["beta", "sigma_n"])?;
    let cells: Vec<ExperimentConfig> = match &sweep {
        Some((key, vals)) => vals
            .iter()
            .map(|v| {
                let mut c = cfg.clone();
                c.set(key, v)?;
                Ok(c)
            })
            .collect::<Result<_>>()?,
        None => vec![cfg.clone()],
    };
    let mut csv = String::from("beta,sigma_n,eta_c,eta_c_trace,eta_s,eta_s_truncated,argmax_t\n");
    let mut reports = Vec::new();
    exec::with_threads(cfg.threads, || -> Result<()> {
        for c in &cells {
            let params = c.alcc_params(r, c.seed)?;
            match mis_bound(&params, mode) {
                Ok(rep) => {
                    let t: Vec<String> = rep.argmax_t.iter().map(|i| i.to_string()).collect();
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        fmt_f64(c.beta),
                        fmt_f64(c.sigma_n),
                        fmt_f64(rep.eta_c_bound),
                        fmt_f64(rep.eta_c_trace_approx),
                        fmt_f64(rep.eta_s_bound),
                        rep.eta_s_truncated_bound.map_or(String::new(), fmt_f64),
                        t.join(" ")
                    ));
                    reports.push(json!({"beta": c.beta, "sigma_n": c.sigma_n, "report": rep}));
                }
                Err(e @ (Error::SingularCollusion(_) | Error::UnboundedLeakage)) => {
                    csv.push_str(&format!("{},{},inf,inf,inf,inf,\n", fmt_f64(c.beta), fmt_f64(c.sigma_n)));
                    reports.push(json!({"beta": c.beta, "sigma_n": c.sigma_n, "unbounded": e.to_string()}));
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    })?;
    let m = json!({
        "library": "alcc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "sweep": sweep,
        "search": mode,
    });
    emit(common, &csv, &json!(reports), &m)?;
    Ok(ExitCode::SUCCESS)
}

fn accuracy_cmd(
    common: &Common,
    b_sweep: Option<String>,
    beta_sweep: Option<String>,
    axis: Option<String>,
    values: Vec<String>,
    kind: Kind,
) -> Result<ExitCode> {
    let cfg = load_config(common)?;
    let r = cfg.r.ok_or_else(|| config_err("r", "accuracy bounds need a data bound"))?;
    let f: PolyFn = cfg.poly()?;
    let kind = match kind {
        Kind::General => BoundKind::General,
        Kind::MatrixPoly => BoundKind::MatrixPoly,
    };
    let sweep = sweep_values(beta_sweep, b_sweep.map(|s| ("b", s)), axis, values, &["b", "beta"])?;
    let cells: Vec<ExperimentConfig> = match &sweep {
        Some((key, vals)) => vals
            .iter()
            .map(|v| {
                let mut c = cfg.clone();
                c.set(key, v)?;
                Ok(c)
            })
            .collect::<Result<_>>()?,
        None => vec![cfg.clone()],
    };
    let mut csv = String::from("b,beta,alcc_upper_bound,lcc_case1,lcc_case2,beta_bar,kappa_b\n");
    let mut reports = Vec::new();
    for c in &cells {
        let params = c.alcc_params(r, c.seed)?;
        let rep = alcc_error_bound(&params, &f, kind, None, c.b)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.b,
            fmt_f64(c.beta),
            fmt_f64(rep.alcc_upper_bound),
            fmt_f64(rep.lcc_lower_bound_case1),
            fmt_f64(rep.lcc_lower_bound_case2),
            fmt_f64(rep.beta_bar),
            fmt_f64(rep.kappa_b)
        ));
        reports.push(rep);
    }
    let m = json!({
        "library": "alcc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "sweep": sweep,
    });
    emit(common, &csv, &json!(reports), &m)?;
    Ok(ExitCode::SUCCESS)
}

fn selftest() -> ExitCode {
    let checks: Vec<(&str, Box<dyn Fn() -> Result<bool>>)> = vec![
        ("dft impulse", Box::new(|| {
            let one = unit_root(0, 1);
            let mut v = vec![one * 0.0; 4];
            v[0] = one;
            Ok(dft(&v)?.iter().all(|z| (z - one).norm() < 1e-15))
        })),
        ("dft constant", Box::new(|| {
            let v = vec![unit_root(1, 3) * 2.0; 5];
            let out = dft(&v)?;
            Ok((out[0] - v[0] * 5.0).norm() < 1e-12 && out[1..].iter().all(|z| z.norm() < 1e-12))
        })),
        ("roots of unity are perfectly conditioned", Box::new(|| {
            let nodes: Vec<_> = (0..8).map(|j| unit_root(j, 8)).collect();
            Ok((condition_number(&nodes)? - 1.0).abs() < 1e-9)
        })),
        ("zero-variance noise is zero", Box::new(|| {
            let z = sample_truncated_complex_gaussian(&ComplexGaussianSpec { sigma: 0.0, theta: 3.0, seed: 1 }, 3, 3)?;
            Ok(z.max_abs() == 0.0)
        })),
        ("noiseless identity roundtrip", Box::new(|| {
            let cfg = ExperimentConfig { f: "identity".into(), sigma_n: 0.0, m_prime: 50, n: 6, trials: 1, ..Default::default() };
            Ok(run_experiment(&cfg)?.e_rel_mean <= 1e-9)
        })),
        ("noiseless gram roundtrip with a straggler", Box::new(|| {
            let cfg = ExperimentConfig {
                sigma_n: 0.0,
                m_prime: 50,
                n: 6,
                s: 1,
                trials: 1,
                stragglers: "random:1".parse().expect("spec"),
                ..Default::default()
            };
            Ok(run_experiment(&cfg)?.e_rel_mean <= 1e-7)
        })),
        ("no colluders, no leakage", Box::new(|| {
            let p = alcc::alcc::AlccParams { k: 2, t: 0, degree: 1, sigma_n: 1.0, ..Default::default() };
            Ok(mis_bound(&p, SearchMode::Exhaustive)?.eta_c_bound == 0.0)
        })),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let ok = matches!(check(), Ok(true));
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
