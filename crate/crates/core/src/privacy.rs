//! Privacy upper bounds against `t` colluding workers.
//!
//! The colluders in `T` see `Y_T = L_T·X + L̃_T·N`. With `G = L̃_T⁻¹·L_T`,
//! the mutual-information bound is
//! `log₂ det(I + (r²t/σ_n²)·G·Gᴴ) = Σ log₂(1 + (r²t/σ_n²)·σ_i(G)²)`,
//! maximized over `T`; the distinguishing bound is `√(2·η_c)`.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::alcc::{lagrange_monomial, AlccParams};
use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{lstsq, rng_from_seed, singular_values, CMatrix};

/// Exhaustive search is refused above this many subsets.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    /// `count` subsets drawn uniformly; the result is a lower estimate of the max.
    Sampled { count: usize, seed: u64 },
}

/// The matrices seen by one colluding set.
#[derive(Clone, Debug)]
pub struct CollusionContext {
    pub subset: Vec<usize>,
    /// `L_T[a][j] = l_j(α_{T_a})`, `j ∈ 1..=k`.
    pub l_t: CMatrix,
    /// `L̃_T[a][b] = l_{k+b}(α_{T_a})`, `b ∈ 1..=t`.
    pub ltilde_t: CMatrix,
}

impl CollusionContext {
    pub fn new(params: &AlccParams, subset: &[usize]) -> Result<Self> {
        params.validate()?;
        if subset.len() != params.t {
            return Err(Error::DimensionMismatch(format!(
                "colluding set has {} workers, t = {}",
                subset.len(),
                params.t
            )));
        }
        let (k, t) = (params.k, params.t);
        let mut l_t = CMatrix::zeros(t, k);
        let mut ltilde_t = CMatrix::zeros(t, t);
        for (a, &i) in subset.iter().enumerate() {
            let z = params.alpha_point(i)?;
            for j in 1..=k {
                l_t.set(a, j - 1, lagrange_monomial(j, z, params)?);
            }
            for b in 1..=t {
                ltilde_t.set(a, b - 1, lagrange_monomial(k + b, z, params)?);
            }
        }
        Ok(Self { subset: subset.to_vec(), l_t, ltilde_t })
    }

    /// Singular values of `L̃_T⁻¹·L_T`; their squares are the eigenvalues of
    /// `Σ̃_T⁻¹·Σ_T`.
    pub fn mixing_singular_values(&self) -> Result<Vec<f64>> {
        let g = lstsq(&self.ltilde_t, &self.l_t).map_err(|e| match e {
            Error::SingularSystem => Error::SingularCollusion(self.subset.clone()),
            other => other,
        })?;
        let sv = singular_values(&g);
        if sv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularCollusion(self.subset.clone()));
        }
        Ok(sv)
    }
}

/// Per-subset leakage terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubsetLeakage {
    /// `log₂ det(I + c·Σ̃⁻¹Σ)`.
    pub eta_c: f64,
    /// `c·tr(Σ̃⁻¹Σ)/ln 2`, the small-`r/σ_n` form.
    pub trace_approx: f64,
}

/// Leakage bound for one colluding set.
pub fn subset_leakage(params: &AlccParams, subset: &[usize]) -> Result<SubsetLeakage> {
    if params.sigma_n == 0.0 {
        return Err(Error::UnboundedLeakage);
    }
    let sv = CollusionContext::new(params, subset)?.mixing_singular_values()?;
    let c = snr(params);
    let eta_c = sv.iter().map(|s| (c * s * s).ln_1p()).sum::<f64>() / std::f64::consts::LN_2;
    let trace = sv.iter().map(|s| s * s).sum::<f64>();
    Ok(SubsetLeakage { eta_c, trace_approx: c * trace / std::f64::consts::LN_2 })
}

/// `r²t/σ_n²`, formed in log space so extreme ratios neither overflow nor underflow early.
fn snr(params: &AlccParams) -> f64 {
    (2.0 * params.r.ln() + (params.t as f64).ln() - 2.0 * params.sigma_n.ln()).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    /// Mutual-information bound, bits.
    pub eta_c_bound: f64,
    /// Small-`r/σ_n` trace form of the same bound at the maximizing set.
    pub eta_c_trace_approx: f64,
    /// `√(2·η_c)`.
    pub eta_s_bound: f64,
    /// Bound for truncated noise; `None` when the truncation level is too
    /// small for it to apply.
    pub eta_s_truncated_bound: Option<f64>,
    pub d_mean_bound: f64,
    pub argmax_t: Vec<usize>,
    pub search_mode: SearchMode,
    /// True for sampled searches, whose max may miss the worst set.
    pub lower_estimate: bool,
    pub subsets_evaluated: usize,
}

pub fn ds_from_mis(eta_c: f64) -> f64 {
    (2.0 * eta_c).sqrt()
}

pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// All `r`-subsets of `1..=n` in lexicographic order.
fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=r).collect();
    if r > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..r).rev().find(|&i| cur[i] < n - r + i + 1) else {
            return out;
        };
        cur[pos] += 1;
        for i in pos + 1..r {
            cur[i] = cur[i - 1] + 1;
        }
    }
}

fn candidate_sets(params: &AlccParams, mode: SearchMode) -> Result<Vec<Vec<usize>>> {
    let n = params.n_workers();
    match mode {
        SearchMode::Exhaustive => {
            let total = binomial(n, params.t);
            if total > EXHAUSTIVE_LIMIT {
                return Err(Error::SearchSpaceTooLarge(total));
            }
            Ok(combinations(n, params.t))
        }
        SearchMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::InvalidParameter { name: "count", reason: "must be positive".into() });
            }
            let mut rng = rng_from_seed(seed);
            Ok((0..count)
                .map(|_| {
                    let mut s: Vec<usize> = index::sample(&mut rng, n, params.t).into_iter().map(|i| i + 1).collect();
                    s.sort_unstable();
                    s
                })
                .collect())
        }
    }
}

/// Mutual-information bound maximized over colluding sets. Ties go to the
/// lexicographically smallest set.
pub fn mis_bound(params: &AlccParams, mode: SearchMode) -> Result<PrivacyReport> {
    params.validate()?;
    let d_mean = d_mean_bound(params)?;
    let lower_estimate = matches!(mode, SearchMode::Sampled { .. });
    if params.t == 0 {
        return Ok(PrivacyReport {
            eta_c_bound: 0.0,
            eta_c_trace_approx: 0.0,
            eta_s_bound: 0.0,
            eta_s_truncated_bound: Some(0.0),
            d_mean_bound: d_mean,
            argmax_t: Vec::new(),
            search_mode: mode,
            lower_estimate,
            subsets_evaluated: 0,
        });
    }
    if params.sigma_n == 0.0 {
        return Err(Error::UnboundedLeakage);
    }
    let mut sets = candidate_sets(params, mode)?;
    sets.sort();
    sets.dedup();
    let leaks = exec::map_slice(&sets, |s| subset_leakage(params, s));
    let mut best: Option<(usize, SubsetLeakage)> = None;
    for (i, leak) in leaks.into_iter().enumerate() {
        let leak = leak?;
        if best.is_none_or(|(_, b)| leak.eta_c > b.eta_c) {
            best = Some((i, leak));
        }
    }
    let (i, leak) = best.expect("at least one subset");
    let evaluated = sets.len();
    let eta_s = ds_from_mis(leak.eta_c);
    Ok(PrivacyReport {
        eta_c_bound: leak.eta_c,
        eta_c_trace_approx: leak.trace_approx,
        eta_s_bound: eta_s,
        eta_s_truncated_bound: truncated_ds_bound(params, eta_s).ok(),
        d_mean_bound: d_mean,
        argmax_t: sets.swap_remove(i),
        search_mode: mode,
        lower_estimate,
        subsets_evaluated: evaluated,
    })
}

/// Distinguishing-security bound; the same search as [`mis_bound`], whose
/// report already carries `η_s = √(2·η_c)`.
pub fn ds_bound(params: &AlccParams, mode: SearchMode) -> Result<PrivacyReport> {
    mis_bound(params, mode)
}

/// `d̄_mean = (k·r/(k+t))·Σ_{l<k+t} β^{−l}`; equals `k·r` at `β = 1`.
pub fn d_mean_bound(params: &AlccParams) -> Result<f64> {
    params.validate()?;
    let kk = params.big_k();
    let q = 1.0 / params.beta;
    let geom = if (q - 1.0).abs() < 1e-8 {
        (0..kk).map(|l| q.powi(l as i32)).sum::<f64>()
    } else {
        (q.powi(kk as i32) - 1.0) / (q - 1.0)
    };
    Ok(params.k as f64 * params.r / kk as f64 * geom)
}

/// Bound on `η′_s` for noise truncated at `θ`:
/// `η_s/w + (2·exp(−½(θ − d̄√t/σ_n)²))^t / w`, `w = (1 − 2e^{−θ²/2})^t`.
pub fn truncated_ds_bound(params: &AlccParams, eta_s: f64) -> Result<f64> {
    params.validate()?;
    if params.t == 0 {
        return Ok(eta_s);
    }
    if params.sigma_n == 0.0 {
        return Err(Error::UnboundedLeakage);
    }
    let t = params.t as f64;
    let threshold = d_mean_bound(params)? * t.sqrt() / params.sigma_n;
    let theta = params.theta;
    if theta <= threshold {
        return Err(Error::TruncationTooSmall { theta, threshold });
    }
    let log_w = t * (-2.0 * (-0.5 * theta * theta).exp()).ln_1p();
    let w = log_w.exp();
    if !(w > 0.0) {
        return Err(Error::NonPositiveWeight(w));
    }
    let gap = theta - threshold;
    let tail = (t * (2f64.ln() - 0.5 * gap * gap)).exp();
    Ok(eta_s / w + tail / w)
}
