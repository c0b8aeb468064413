//! In-process master/worker experiments.
//!
//! A run draws a dataset, computes the centralized reference in double
//! precision, pushes the batch through ALCC or the fixed-point LCC baseline
//! with some workers withheld, and reports the relative error
//! `‖Y′ − Y‖_F / ‖Y‖_F`. For `f(X) = XᵀX` the reference is `Σ_j X_jᵀX_j`;
//! for other polynomials the `k` outputs are compared blockwise.
//!
//! Gram experiments under ALCC stream the encoding in row slices, so the
//! complex shares are never held in full.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::alcc::{self, AlccParams, Eval, EvalSet, MatrixBatch, NoiseStreams};
use crate::error::{Error, Result};
use crate::exec;
use crate::lcc::{self, FieldParams, IntermediateMode};
use crate::numerics::{mix_seed, rng_from_seed, transpose_matmul_acc_in, CMatrix, ComplexRing, RMatrix, RealRing};
use crate::polyfun::PolyFn;

/// Rows encoded per slice in the streamed Gram path.
const STREAM_ROWS: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Alcc,
    Lcc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    StandardNormal,
    /// Uniform on `(−r, r)`; needs `r`.
    Uniform,
}

/// Which workers never answer: `none`, `fixed:2,5` or `random:1`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StragglerSpec {
    #[default]
    None,
    Fixed(Vec<usize>),
    Random(usize),
}

impl StragglerSpec {
    pub fn count(&self) -> usize {
        match self {
            Self::None => 0,
            Self::Fixed(v) => v.len(),
            Self::Random(c) => *c,
        }
    }

    /// The withheld workers for one trial, sorted.
    pub fn resolve(&self, n_workers: usize, seed: u64) -> Vec<usize> {
        let mut out = match self {
            Self::None => Vec::new(),
            Self::Fixed(v) => v.clone(),
            Self::Random(c) => {
                let mut rng = rng_from_seed(seed);
                sample(&mut rng, n_workers, (*c).min(n_workers)).into_iter().map(|i| i + 1).collect()
            }
        };
        out.sort_unstable();
        out
    }
}

impl fmt::Display for StragglerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => f.write_str("none"),
            Self::Fixed(v) => {
                let list: Vec<String> = v.iter().map(|i| i.to_string()).collect();
                write!(f, "fixed:{}", list.join(","))
            }
            Self::Random(c) => write!(f, "random:{c}"),
        }
    }
}

impl FromStr for StragglerSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(Self::None);
        }
        if let Some(list) = s.strip_prefix("fixed:") {
            return list
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad worker index `{x}`: {e}")))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Self::Fixed);
        }
        if let Some(c) = s.strip_prefix("random:") {
            return c.trim().parse().map(Self::Random).map_err(|e| format!("bad count `{c}`: {e}"));
        }
        Err(format!("expected `none`, `fixed:i,j,…` or `random:c`, got `{s}`"))
    }
}

impl TryFrom<String> for StragglerSpec {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<StragglerSpec> for String {
    fn from(s: StragglerSpec) -> String {
        s.to_string()
    }
}

/// Flat experiment description; every key can be overridden as `key=value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    /// Preset name: `identity`, `gram` or `square`.
    pub f: String,
    pub distribution: Distribution,
    /// Total rows `m′ = k·m`.
    pub m_prime: usize,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub s: usize,
    pub beta: f64,
    pub sigma_n: f64,
    pub theta: f64,
    /// Data bound; taken from the data when absent.
    pub r: Option<f64>,
    /// Field prime; the largest prime below `2^25` when absent.
    pub p: Option<u64>,
    pub b: u32,
    pub delta: f64,
    pub mode: IntermediateMode,
    pub stragglers: StragglerSpec,
    pub trials: usize,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::Alcc,
            f: "gram".into(),
            distribution: Distribution::StandardNormal,
            m_prime: 10_000,
            n: 100,
            k: 5,
            t: 3,
            s: 0,
            beta: 1.5,
            sigma_n: 1e6,
            theta: 3.0,
            r: None,
            p: None,
            b: 64,
            delta: 2f64.powi(-6),
            mode: IntermediateMode::Modular,
            stragglers: StragglerSpec::None,
            trials: 5,
            seed: 0,
            threads: None,
        }
    }
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.into(), reason: reason.into() }
}

/// Default field prime.
pub const DEFAULT_P_BITS: u32 = 25;

impl ExperimentConfig {
    pub fn poly(&self) -> Result<PolyFn> {
        PolyFn::preset(&self.f)
    }

    pub fn m(&self) -> usize {
        self.m_prime / self.k.max(1)
    }

    /// Sets one key from its textual value. Numbers, booleans and `null`
    /// are read as JSON, anything else as a string.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut map = match serde_json::to_value(&*self)? {
            Value::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        if !map.contains_key(key) {
            return Err(config_err(key, "unknown key"));
        }
        let parsed = serde_json::from_str::<Value>(value).unwrap_or_else(|_| Value::String(value.into()));
        map.insert(key.into(), parsed);
        *self = serde_json::from_value(Value::Object(map)).map_err(|e| config_err(key, e.to_string()))?;
        Ok(())
    }

    /// Reads a flat JSON object over the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let map: serde_json::Map<String, Value> =
            serde_json::from_str(text).map_err(|e| config_err("<file>", e.to_string()))?;
        let mut cfg = Self::default();
        for (key, v) in map {
            let text = match &v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            cfg.set(&key, &text)?;
        }
        Ok(cfg)
    }

    pub fn alcc_params(&self, r: f64, seed: u64) -> Result<AlccParams> {
        let f = self.poly()?;
        let p = AlccParams {
            k: self.k,
            t: self.t,
            s: self.s,
            degree: f.degree(),
            beta: self.beta,
            sigma_n: self.sigma_n,
            theta: self.theta,
            r,
            m: self.m(),
            n: self.n,
            seed,
        };
        p.validate().map_err(as_config)?;
        Ok(p)
    }

    pub fn field(&self) -> Result<FieldParams> {
        let p = match self.p {
            Some(p) => p,
            None => lcc::largest_prime_at_most(1 << DEFAULT_P_BITS).expect("prime below 2^25"),
        };
        FieldParams::new(p, self.b, self.delta, self.mode).map_err(|e| match e {
            Error::NotPrime(_) => config_err("p", e.to_string()),
            other => as_config(other),
        })
    }

    /// Checks everything that can be checked before drawing data.
    pub fn validate(&self) -> Result<()> {
        let f = self.poly().map_err(|e| config_err("f", e.to_string()))?;
        if self.k == 0 {
            return Err(config_err("k", "must be positive"));
        }
        if self.m_prime == 0 || self.m_prime % self.k != 0 {
            return Err(config_err("m_prime", format!("{} is not a positive multiple of k = {}", self.m_prime, self.k)));
        }
        if self.n == 0 {
            return Err(config_err("n", "must be positive"));
        }
        if self.trials == 0 {
            return Err(config_err("trials", "must be positive"));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads", "must be positive"));
        }
        if let Some(r) = self.r {
            if !(r > 0.0) || !r.is_finite() {
                return Err(config_err("r", "must be positive"));
            }
        } else if self.distribution == Distribution::Uniform {
            return Err(config_err("r", "uniform data needs a bound"));
        }
        if self.stragglers.count() > self.s {
            return Err(config_err(
                "stragglers",
                format!("{} stragglers exceed s = {}", self.stragglers.count(), self.s),
            ));
        }
        let n_workers = (self.k + self.t - 1) * f.degree() + self.s + 1;
        if let StragglerSpec::Fixed(v) = &self.stragglers {
            let mut seen = v.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != v.len() || v.iter().any(|&i| i == 0 || i > n_workers) {
                return Err(config_err("stragglers", format!("indices must be distinct and in 1..={n_workers}")));
            }
        }
        match self.protocol {
            Protocol::Alcc => {
                self.alcc_params(self.r.unwrap_or(1.0), 0)?;
            }
            Protocol::Lcc => {
                let field = self.field()?;
                if !f.is_homogeneous() {
                    return Err(config_err("f", "the fixed-point baseline needs a homogeneous polynomial"));
                }
                if (self.k + self.t + n_workers) as u64 >= field.p {
                    return Err(config_err("p", format!("{} is too small for {} points", field.p, self.k + self.t + n_workers)));
                }
            }
        }
        Ok(())
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::Config { key: name.to_string(), reason },
        other => other,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub encode: f64,
    pub worker_eval: f64,
    pub decode: f64,
}

impl PhaseTimes {
    fn add(&mut self, o: &PhaseTimes) {
        self.encode += o.encode;
        self.worker_eval += o.worker_eval;
        self.decode += o.decode;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub e_rel: Vec<f64>,
    pub e_rel_mean: f64,
    /// `−log₁₀` of the mean relative error.
    pub neg_log10_e_rel: f64,
    /// Seconds summed over trials; informational.
    pub wall_times: PhaseTimes,
    /// LCC: the overflow criterion failed for the data bound.
    pub overflow_flag: Option<bool>,
    /// LCC: an exact output of `f` on the quantized data left `(−p/2, p/2)`.
    pub overflow_observed: Option<bool>,
    /// LCC: some quantized input aliased.
    pub input_overflow: Option<bool>,
    /// ALCC: largest imaginary part discarded by the decoder.
    pub imag_residue_max: Option<f64>,
    /// Workers whose answers were decoded, last trial.
    pub used_workers: Vec<usize>,
    pub stragglers: Vec<Vec<usize>>,
}

struct Trial {
    e_rel: f64,
    times: PhaseTimes,
    overflow_flag: Option<bool>,
    overflow_observed: Option<bool>,
    input_overflow: Option<bool>,
    imag_residue_max: Option<f64>,
    used_workers: Vec<usize>,
    stragglers: Vec<usize>,
}

/// Draws the `k` blocks, each from its own stream.
pub fn generate_data(cfg: &ExperimentConfig, seed: u64) -> Result<MatrixBatch> {
    let m = cfg.m();
    let blocks = (0..cfg.k as u64)
        .map(|j| {
            let mut rng = rng_from_seed(mix_seed(seed, j));
            let data = match cfg.distribution {
                Distribution::StandardNormal => (0..m * cfg.n).map(|_| rng.sample(StandardNormal)).collect(),
                Distribution::Uniform => {
                    let r = cfg.r.unwrap_or(1.0);
                    (0..m * cfg.n).map(|_| rng.random_range(-r..r)).collect()
                }
            };
            RMatrix::from_vec(m, cfg.n, data)
        })
        .collect::<Result<Vec<_>>>()?;
    MatrixBatch::new(blocks)
}

fn reference(batch: &MatrixBatch, f: &PolyFn) -> Result<Vec<RMatrix>> {
    exec::map_slice(batch.matrices(), |x| f.eval_in(&RealRing, x)).into_iter().collect()
}

/// `‖Y′ − Y‖_F / ‖Y‖_F`, summing the blocks first for the Gram.
pub fn relative_error(got: &[RMatrix], want: &[RMatrix], sum_blocks: bool) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    if sum_blocks {
        let len = want[0].as_slice().len();
        for i in 0..len {
            let g: f64 = got.iter().map(|m| m.as_slice()[i]).sum();
            let w: f64 = want.iter().map(|m| m.as_slice()[i]).sum();
            num += (g - w) * (g - w);
            den += w * w;
        }
    } else {
        for (g, w) in got.iter().zip(want) {
            for (a, b) in g.as_slice().iter().zip(w.as_slice()) {
                num += (a - b) * (a - b);
                den += b * b;
            }
        }
    }
    (num / den).sqrt()
}

fn r_of(cfg: &ExperimentConfig, batch: &MatrixBatch) -> f64 {
    cfg.r.unwrap_or_else(|| batch.max_abs().max(f64::MIN_POSITIVE))
}

fn row_slice(batch: &MatrixBatch, start: usize, rows: usize) -> Result<MatrixBatch> {
    let n = batch.dims().1;
    MatrixBatch::new(
        batch
            .matrices()
            .iter()
            .map(|x| RMatrix::from_vec(rows, n, x.as_slice()[start * n..(start + rows) * n].to_vec()))
            .collect::<Result<Vec<_>>>()?,
    )
}

fn answering(n_workers: usize, withheld: &[usize]) -> Vec<usize> {
    (1..=n_workers).filter(|i| !withheld.contains(i)).collect()
}

fn run_alcc(cfg: &ExperimentConfig, f: &PolyFn, batch: &MatrixBatch, seed: u64, withheld: &[usize]) -> Result<Trial> {
    let params = cfg.alcc_params(r_of(cfg, batch), mix_seed(seed, 1))?;
    let workers = answering(params.n_workers(), withheld);
    let needed = params.d_tilde() + 1;
    let used: Vec<usize> = workers.iter().copied().take(needed).collect();
    let mut times = PhaseTimes::default();
    let (m, n) = batch.dims();
    let out_dims = f.output_dims(m, n)?;

    let answers: Vec<CMatrix> = if f.is_gram() {
        let mut noise = NoiseStreams::new(&params)?;
        let mut acc: Vec<CMatrix> = vec![CMatrix::zeros(n, n); used.len()];
        let mut start = 0;
        while start < m {
            let rows = STREAM_ROWS.min(m - start);
            let clock = Instant::now();
            let slice = row_slice(batch, start, rows)?;
            let z = noise.next_rows(rows, n)?;
            let shares = alcc::encode_rows(&slice, &z, &params)?;
            times.encode += clock.elapsed().as_secs_f64();
            let clock = Instant::now();
            for (a, &w) in acc.iter_mut().zip(&used) {
                let s = shares.get(w).expect("worker share");
                transpose_matmul_acc_in(&ComplexRing, s, s, a)?;
            }
            times.worker_eval += clock.elapsed().as_secs_f64();
            start += rows;
        }
        acc
    } else {
        let clock = Instant::now();
        let shares = alcc::encode(batch, &params)?;
        times.encode += clock.elapsed().as_secs_f64();
        let clock = Instant::now();
        let out = exec::map_slice(&used, |&w| f.eval(shares.get(w).expect("worker share")));
        times.worker_eval += clock.elapsed().as_secs_f64();
        out.into_iter().collect::<Result<_>>()?
    };

    let clock = Instant::now();
    let evals = EvalSet {
        results: used.iter().zip(answers).map(|(&worker, value)| Eval { worker, value }).collect(),
        poly_degree: params.degree,
    };
    let decoded = alcc::decode(&evals, &params, out_dims)?;
    times.decode += clock.elapsed().as_secs_f64();
    let want = reference(batch, f)?;
    Ok(Trial {
        e_rel: relative_error(&decoded.outputs, &want, f.is_gram()),
        times,
        overflow_flag: None,
        overflow_observed: None,
        input_overflow: None,
        imag_residue_max: Some(decoded.imag_residue_max),
        used_workers: decoded.used_workers,
        stragglers: withheld.to_vec(),
    })
}

fn run_lcc(cfg: &ExperimentConfig, f: &PolyFn, batch: &MatrixBatch, seed: u64, withheld: &[usize]) -> Result<Trial> {
    let field = cfg.field()?;
    let n_workers = (cfg.k + cfg.t - 1) * f.degree() + cfg.s + 1;
    let mut times = PhaseTimes::default();
    let clock = Instant::now();
    let q = lcc::quantize(batch, &field);
    let mut shares = lcc::lcc_encode(&q, cfg.k, cfg.t, n_workers, &field, mix_seed(seed, 1))?;
    if let Some(r) = cfg.r {
        shares.data_bound = r;
    }
    shares.shares.retain(|s| !withheld.contains(&s.worker));
    times.encode += clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let decoded = lcc::lcc_eval_and_decode(&shares, f)?;
    times.worker_eval += clock.elapsed().as_secs_f64();

    let half = (field.p / 2) as i128;
    let observed = lcc::exact_quantized_outputs(&q, f)?
        .iter()
        .any(|y| y.as_slice().iter().any(|v| v.abs() > half));
    let want = reference(batch, f)?;
    Ok(Trial {
        e_rel: relative_error(&decoded.outputs, &want, f.is_gram()),
        times,
        overflow_flag: Some(decoded.overflow_flag),
        overflow_observed: Some(observed),
        input_overflow: Some(decoded.input_overflow),
        imag_residue_max: None,
        used_workers: decoded.used_workers,
        stragglers: withheld.to_vec(),
    })
}

fn or_opt(acc: Option<bool>, v: Option<bool>) -> Option<bool> {
    match (acc, v) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(a || b),
    }
}

/// Runs `cfg.trials` independent trials and averages them in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    exec::with_threads(cfg.threads, || run_trials(cfg))
}

fn run_trials(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let f = cfg.poly()?;
    let n_workers = (cfg.k + cfg.t - 1) * f.degree() + cfg.s + 1;
    let mut trials = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials as u64 {
        let seed = mix_seed(cfg.seed, trial);
        let batch = generate_data(cfg, mix_seed(seed, 0))?;
        let withheld = cfg.stragglers.resolve(n_workers, mix_seed(seed, 2));
        trials.push(match cfg.protocol {
            Protocol::Alcc => run_alcc(cfg, &f, &batch, seed, &withheld)?,
            Protocol::Lcc => run_lcc(cfg, &f, &batch, seed, &withheld)?,
        });
    }
    let e_rel: Vec<f64> = trials.iter().map(|t| t.e_rel).collect();
    let e_rel_mean = e_rel.iter().sum::<f64>() / e_rel.len() as f64;
    let mut wall_times = PhaseTimes::default();
    let (mut flag, mut observed, mut input) = (None, None, None);
    let mut imag: Option<f64> = None;
    for t in &trials {
        wall_times.add(&t.times);
        flag = or_opt(flag, t.overflow_flag);
        observed = or_opt(observed, t.overflow_observed);
        input = or_opt(input, t.input_overflow);
        if let Some(v) = t.imag_residue_max {
            imag = Some(imag.map_or(v, |m| m.max(v)));
        }
    }
    Ok(ExperimentResult {
        e_rel,
        e_rel_mean,
        neg_log10_e_rel: -e_rel_mean.log10(),
        wall_times,
        overflow_flag: flag,
        overflow_observed: observed,
        input_overflow: input,
        imag_residue_max: imag,
        used_workers: trials.last().map(|t| t.used_workers.clone()).unwrap_or_default(),
        stragglers: trials.into_iter().map(|t| t.stragglers).collect(),
    })
}

/// Data and protocol parameters exactly as trial `trial` of
/// [`run_experiment`] would draw them.
pub fn prepare_alcc(cfg: &ExperimentConfig, trial: u64) -> Result<(MatrixBatch, AlccParams)> {
    cfg.validate()?;
    let seed = mix_seed(cfg.seed, trial);
    let batch = generate_data(cfg, mix_seed(seed, 0))?;
    let params = cfg.alcc_params(r_of(cfg, &batch), mix_seed(seed, 1))?;
    Ok((batch, params))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    MPrime,
    Beta,
    B,
    SigmaN,
    P,
}

impl Axis {
    pub fn key(self) -> &'static str {
        match self {
            Axis::MPrime => "m_prime",
            Axis::Beta => "beta",
            Axis::B => "b",
            Axis::SigmaN => "sigma_n",
            Axis::P => "p",
        }
    }

    fn applies_to(self, p: Protocol) -> bool {
        match self {
            Axis::MPrime => true,
            Axis::Beta | Axis::SigmaN => p == Protocol::Alcc,
            Axis::B | Axis::P => p == Protocol::Lcc,
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "m_prime" | "m'" | "mprime" => Axis::MPrime,
            "beta" => Axis::Beta,
            "b" => Axis::B,
            "sigma_n" => Axis::SigmaN,
            "p" => Axis::P,
            other => return Err(config_err("axis", format!("unknown axis `{other}`"))),
        })
    }
}

/// The config for cell `idx` of a sweep: the axis value applied and a
/// seed of its own, so every cell sees fresh data.
pub fn sweep_cell(template: &ExperimentConfig, axis: Axis, value: &str, idx: usize) -> Result<ExperimentConfig> {
    let mut cfg = template.clone();
    cfg.set(axis.key(), value)?;
    cfg.seed = mix_seed(template.seed, 0x5eed_0000 + idx as u64);
    Ok(cfg)
}

/// One experiment per value, in input order. All cells are validated
/// before any runs.
pub fn sweep(template: &ExperimentConfig, axis: Axis, values: &[String]) -> Result<Vec<ExperimentResult>> {
    if !axis.applies_to(template.protocol) {
        return Err(config_err("axis", format!("`{}` does not apply to {:?}", axis.key(), template.protocol)));
    }
    let cells = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = sweep_cell(template, axis, v, i)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    cells.iter().map(run_experiment).collect()
}

/// The `m′` grid of the paired protocol comparison. With `Δ = 2^-6` it
/// brackets the LCC overflow threshold for `p ≈ 2^25, 2^26, 2^28`.
pub const COMPARE_M_PRIME: [usize; 8] = [10_000, 15_000, 25_000, 30_000, 50_000, 100_000, 130_000, 200_000];
pub const COMPARE_BETAS: [f64; 2] = [1.5, 2.0];
pub const COMPARE_P_BITS: [u32; 3] = [25, 26, 28];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub config: ExperimentConfig,
    pub results: Vec<ExperimentResult>,
}

/// The same `m′` sweep under ALCC for each `β` and under LCC for each
/// `p`. Cell `i` sees the same data in every series.
pub fn compare_lcc(template: &ExperimentConfig, m_primes: &[usize], betas: &[f64], primes: &[u64]) -> Result<Vec<Series>> {
    let values: Vec<String> = m_primes.iter().map(|m| m.to_string()).collect();
    let mut configs = Vec::new();
    for &beta in betas {
        let cfg = ExperimentConfig { protocol: Protocol::Alcc, beta, ..template.clone() };
        configs.push((format!("alcc_beta_{beta}"), cfg));
    }
    for &p in primes {
        let cfg = ExperimentConfig { protocol: Protocol::Lcc, p: Some(p), ..template.clone() };
        configs.push((format!("lcc_p_{p}"), cfg));
    }
    for (_, c) in &configs {
        for (i, v) in values.iter().enumerate() {
            sweep_cell(c, Axis::MPrime, v, i)?.validate()?;
        }
    }
    configs
        .into_iter()
        .map(|(label, config)| {
            let results = sweep(&config, Axis::MPrime, &values)?;
            Ok(Series { label, config, results })
        })
        .collect()
}

/// [`results_csv`] for several series, with a leading `series` column.
pub fn series_csv(series: &[Series], m_primes: &[usize]) -> String {
    let values: Vec<f64> = m_primes.iter().map(|&m| m as f64).collect();
    let mut out = format!("series,{CSV_HEADER}\n");
    for s in series {
        let body = results_csv(Some(Axis::MPrime), &values, s.config.protocol, &s.results);
        for line in body.lines().skip(1) {
            out.push_str(&s.label);
            out.push(',');
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

/// Doubles as 17 significant digits, scientific.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    v.map_or(String::new(), |b| b.to_string())
}

pub const CSV_HEADER: &str = "axis,value,protocol,trials,e_rel_mean,neg_log10_e_rel,e_rel_min,e_rel_max,imag_residue_max,overflow_flag,overflow_observed,input_overflow";

/// One row per cell; timings are left out so reruns compare byte for byte.
pub fn results_csv(axis: Option<Axis>, values: &[f64], protocol: Protocol, results: &[ExperimentResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (v, r) in values.iter().zip(results) {
        let min = r.e_rel.iter().copied().fold(f64::INFINITY, f64::min);
        let max = r.e_rel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let row = [
            axis.map_or("none", Axis::key).to_string(),
            fmt_f64(*v),
            match protocol {
                Protocol::Alcc => "alcc".into(),
                Protocol::Lcc => "lcc".into(),
            },
            r.e_rel.len().to_string(),
            fmt_f64(r.e_rel_mean),
            fmt_f64(r.neg_log10_e_rel),
            fmt_f64(min),
            fmt_f64(max),
            r.imag_residue_max.map_or(String::new(), fmt_f64),
            fmt_opt_bool(r.overflow_flag),
            fmt_opt_bool(r.overflow_observed),
            fmt_opt_bool(r.input_overflow),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Everything needed to rerun: effective config, sweep, seeds and version.
pub fn manifest(
    cfg: &ExperimentConfig,
    axis: Option<Axis>,
    values: &[String],
    results: &[ExperimentResult],
) -> Value {
    let cells: Vec<Value> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let seed = axis.map_or(cfg.seed, |_| mix_seed(cfg.seed, 0x5eed_0000 + i as u64));
            json!({ "value": v, "seed": seed })
        })
        .collect();
    json!({
        "library": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "parallel": exec::is_parallel(),
        "config": cfg,
        "axis": axis.map(Axis::key),
        "cells": cells,
        "results": results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straggler_spec_text() {
        for s in ["none", "fixed:2,5", "random:1"] {
            assert_eq!(s.parse::<StragglerSpec>().unwrap().to_string(), s);
        }
        assert!("sometimes".parse::<StragglerSpec>().is_err());
        let r = StragglerSpec::Random(2).resolve(10, 7);
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|&i| (1..=10).contains(&i)));
        assert_eq!(r, StragglerSpec::Random(2).resolve(10, 7));
    }

    #[test]
    fn overrides_name_the_key() {
        let mut c = ExperimentConfig::default();
        c.set("beta", "2").unwrap();
        assert_eq!(c.beta, 2.0);
        c.set("protocol", "lcc").unwrap();
        assert_eq!(c.protocol, Protocol::Lcc);
        c.set("stragglers", "fixed:1").unwrap();
        assert_eq!(c.stragglers, StragglerSpec::Fixed(vec![1]));
        match c.set("bogus", "1") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "bogus"),
            other => panic!("{other:?}"),
        }
        match c.set("k", "many") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "k"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_catches_bad_rows() {
        let c = ExperimentConfig { m_prime: 11, ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "m_prime"));
        let c = ExperimentConfig { stragglers: StragglerSpec::Random(1), ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "stragglers"));
        let c = ExperimentConfig { protocol: Protocol::Lcc, p: Some(100), ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "p"));
    }

    #[test]
    fn small_noiseless_gram() {
        let c = ExperimentConfig { sigma_n: 0.0, m_prime: 50, n: 4, trials: 2, ..Default::default() };
        let r = run_experiment(&c).unwrap();
        assert!(r.e_rel_mean < 1e-9, "{}", r.e_rel_mean);
    }
}
