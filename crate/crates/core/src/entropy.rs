//! Relative entropy, Renyi entropies, the variance identity, and the
//! conditional-entropy chain rule.
//!
//! Conventions, used throughout:
//!
//! * `0 ln 0 = 0`, and `x ln(x/0) = +inf` for `x > 0` (domination failure).
//! * `renyi_entropy_finite(eta, mu, alpha)` is the order-`alpha` Renyi
//!   divergence `(1/(alpha-1)) ln sum_i eta_i^alpha mu_i^{1-alpha}`, the
//!   parametrization under which `alpha = 1` is the KL limit and
//!   `Var(eta/mu) = exp(renyi(2)) - 1`. Equivalently, in likelihood-ratio
//!   form with `Y = d(eta)/d(mu)` under `mu`:
//!   `renyi(1 + t) = (1/t) ln E[Y^{1+t}]`.
//! * Endpoints: `alpha = 0` returns `-ln mu(supp eta)` and
//!   `alpha = +inf` returns `ln ess-sup (eta/mu)`. The sample-size bounds
//!   only need orders in `[0, 2]`; the endpoints are conveniences.
//! * Whenever `eta` is not dominated by `mu`, every order returns `+inf`.
//!
//! Exact finite-space KL is clamped at 0 when the signed sum lands in
//! `(-1e-14, 0)`, which absorbs floating-point noise on near-identical
//! pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{FiniteDistribution, WeightedEnsemble};
use crate::numeric::logsumexp;
use crate::serde_ext::{maybe_inf, maybe_inf_pairs};

/// How an [`EntropyReport`] was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorKind {
    Exact,
    MonteCarlo { draws: usize, std_error: f64 },
}

/// Relative entropy together with a Renyi profile and the log-likelihood
/// variance, in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    #[serde(with = "maybe_inf")]
    pub kl: f64,
    /// `(alpha, value)` pairs, nondecreasing in `alpha` wherever finite.
    #[serde(with = "maybe_inf_pairs")]
    pub renyi: Vec<(f64, f64)>,
    /// `Var_eta ln(d eta / d mu)`, in nats^2.
    #[serde(with = "maybe_inf")]
    pub log_likelihood_variance: f64,
    pub estimator: EstimatorKind,
}

impl EntropyReport {
    /// Exact report for a finite pair at the given Renyi orders.
    pub fn exact(
        eta: &FiniteDistribution,
        mu: &FiniteDistribution,
        orders: &[f64],
    ) -> Result<Self> {
        let kl = relative_entropy_finite(eta, mu)?;
        let mut renyi = Vec::with_capacity(orders.len());
        for &a in orders {
            renyi.push((a, renyi_entropy_finite(eta, mu, a)?));
        }
        Ok(EntropyReport {
            kl,
            renyi,
            log_likelihood_variance: log_likelihood_variance_finite(eta, mu)?,
            estimator: EstimatorKind::Exact,
        })
    }

    /// Dense default order grid `1 +/- theta` on a log-spaced `theta` grid,
    /// plus the endpoints of interest for the sample-size bounds.
    pub fn default_orders() -> Vec<f64> {
        let mut orders = vec![0.0, 1.0, 2.0];
        let n = 200;
        for i in 0..=n {
            let theta = 10f64.powf(-4.0 + 4.0 * i as f64 / n as f64);
            orders.push(1.0 - theta);
            orders.push(1.0 + theta);
        }
        orders.sort_by(|a, b| a.partial_cmp(b).unwrap());
        orders.dedup();
        orders
    }
}

/// `Ent(eta | mu) = sum_i eta_i ln(eta_i / mu_i)` on a shared atom set.
pub fn relative_entropy_finite(
    eta: &FiniteDistribution,
    mu: &FiniteDistribution,
) -> Result<f64> {
    if !eta.same_atoms(mu) {
        return Err(Error::MismatchedSupport);
    }
    let mut sum = 0.0;
    for (&e, &m) in eta.probs().iter().zip(mu.probs()) {
        if e == 0.0 {
            continue;
        }
        if m == 0.0 {
            return Ok(f64::INFINITY);
        }
        sum += e * (e / m).ln();
    }
    if sum < 0.0 && sum > -1e-14 {
        sum = 0.0;
    }
    Ok(sum)
}

/// Order-`alpha` Renyi divergence of `eta` from `mu` (see module docs for
/// the convention and endpoint definitions).
pub fn renyi_entropy_finite(
    eta: &FiniteDistribution,
    mu: &FiniteDistribution,
    alpha: f64,
) -> Result<f64> {
    if !eta.same_atoms(mu) {
        return Err(Error::MismatchedSupport);
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::DomainError {
            what: "alpha",
            value: alpha,
            domain: "[0, +inf]",
        });
    }
    // The paper's convention: +inf at every order when domination fails.
    let dominated = eta
        .probs()
        .iter()
        .zip(mu.probs())
        .all(|(&e, &m)| e == 0.0 || m > 0.0);
    if !dominated {
        return Ok(f64::INFINITY);
    }
    if alpha == 0.0 {
        let mass: f64 = eta
            .probs()
            .iter()
            .zip(mu.probs())
            .filter(|(&e, _)| e > 0.0)
            .map(|(_, &m)| m)
            .sum();
        return Ok(-mass.ln());
    }
    if alpha == 1.0 {
        return relative_entropy_finite(eta, mu);
    }
    if alpha == f64::INFINITY {
        let sup = eta
            .probs()
            .iter()
            .zip(mu.probs())
            .filter(|(&e, _)| e > 0.0)
            .map(|(&e, &m)| e / m)
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(sup.ln());
    }
    // (1/(alpha-1)) ln sum_i exp(alpha ln eta_i + (1-alpha) ln mu_i),
    // accumulated in log space.
    let terms: Vec<f64> = eta
        .probs()
        .iter()
        .zip(mu.probs())
        .filter(|(&e, _)| e > 0.0)
        .map(|(&e, &m)| alpha * e.ln() + (1.0 - alpha) * m.ln())
        .collect();
    let value = logsumexp(&terms) / (alpha - 1.0);
    Ok(value)
}

/// `Var_eta ln(d eta / d mu)` on a finite pair; `+inf` when domination
/// fails.
pub fn log_likelihood_variance_finite(
    eta: &FiniteDistribution,
    mu: &FiniteDistribution,
) -> Result<f64> {
    if !eta.same_atoms(mu) {
        return Err(Error::MismatchedSupport);
    }
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    for (&e, &m) in eta.probs().iter().zip(mu.probs()) {
        if e == 0.0 {
            continue;
        }
        if m == 0.0 {
            return Ok(f64::INFINITY);
        }
        let l = (e / m).ln();
        mean += e * l;
        mean_sq += e * l * l;
    }
    Ok((mean_sq - mean * mean).max(0.0))
}

/// `Var(Y) = exp(Ent_2(eta|mu)) - 1`, the relative variance of the
/// normalizing-constant estimator.
pub fn variance_from_renyi2(ent2: f64) -> f64 {
    ent2.exp() - 1.0
}

/// Self-normalized Monte Carlo estimate of `Ent(eta | mu)` from an ensemble
/// drawn from `eta`, with a delete-one-block jackknife standard error
/// (blocks of 100; self-normalized estimators have biased naive variance).
///
/// `log_eta` and `log_mu` must be normalized log-densities, or carry the
/// caller's log-normalizer offsets.
pub fn relative_entropy_mc(
    log_eta: &dyn Fn(&[f64]) -> f64,
    log_mu: &dyn Fn(&[f64]) -> f64,
    draws_from_eta: &WeightedEnsemble,
) -> Result<(f64, f64)> {
    let w = draws_from_eta.normalized_weights()?;
    let g: Vec<f64> = draws_from_eta
        .points()
        .iter()
        .map(|p| log_eta(p) - log_mu(p))
        .collect();

    let estimate: f64 = w.iter().zip(&g).map(|(&wi, &gi)| wi * gi).sum();

    let n = w.len();
    let block = 100.min(n).max(1);
    let n_blocks = n.div_ceil(block);
    if n_blocks < 2 {
        return Ok((estimate, f64::NAN));
    }
    let mut leave_out = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let (lo, hi) = (b * block, ((b + 1) * block).min(n));
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            if i >= lo && i < hi {
                continue;
            }
            num += w[i] * g[i];
            den += w[i];
        }
        if den > 0.0 {
            leave_out.push(num / den);
        }
    }
    let b = leave_out.len() as f64;
    let mean = leave_out.iter().sum::<f64>() / b;
    let var = leave_out.iter().map(|x| (x - mean).powi(2)).sum::<f64>() * (b - 1.0) / b;
    Ok((estimate, var.sqrt()))
}

/// Self-normalized Monte Carlo estimate of the order-`alpha` Renyi
/// divergence from an ensemble drawn from `eta`:
/// `(1/(alpha-1)) ln E_eta (d eta / d mu)^{alpha-1}`, with the KL limit at
/// `alpha = 1`.
pub fn renyi_entropy_mc(
    log_eta: &dyn Fn(&[f64]) -> f64,
    log_mu: &dyn Fn(&[f64]) -> f64,
    draws_from_eta: &WeightedEnsemble,
    alpha: f64,
) -> Result<f64> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::DomainError {
            what: "alpha",
            value: alpha,
            domain: "[0, +inf)",
        });
    }
    if alpha == 1.0 {
        return Ok(relative_entropy_mc(log_eta, log_mu, draws_from_eta)?.0);
    }
    let norm = draws_from_eta.normalized()?;
    let terms: Vec<f64> = norm
        .points()
        .iter()
        .zip(norm.log_weights())
        .map(|(p, &lw)| lw + (alpha - 1.0) * (log_eta(p) - log_mu(p)))
        .collect();
    Ok(logsumexp(&terms) / (alpha - 1.0))
}

/// Weighted-sample estimate of `Var_eta ln(d eta / d mu)`.
pub fn log_likelihood_variance_mc(
    log_eta: &dyn Fn(&[f64]) -> f64,
    log_mu: &dyn Fn(&[f64]) -> f64,
    draws_from_eta: &WeightedEnsemble,
) -> Result<f64> {
    let w = draws_from_eta.normalized_weights()?;
    let g: Vec<f64> = draws_from_eta
        .points()
        .iter()
        .map(|p| log_eta(p) - log_mu(p))
        .collect();
    let mean: f64 = w.iter().zip(&g).map(|(&wi, &gi)| wi * gi).sum();
    let var: f64 = w
        .iter()
        .zip(&g)
        .map(|(&wi, &gi)| wi * (gi - mean) * (gi - mean))
        .sum();
    Ok(var)
}

/// Atom-index groups implementing the projection onto the row coordinate of
/// a row-major `rows x cols` product grid.
pub fn row_projection_groups(rows: usize, cols: usize) -> Vec<usize> {
    (0..rows * cols).map(|idx| idx / cols).collect()
}

/// Chain rule of conditional entropy for a projection `T` described by
/// per-atom group ids: returns `(marginal_term, conditional_term)` with
///
/// * `marginal_term = Ent(T#eta | T#pi)`,
/// * `conditional_term = sum_t T#eta(t) Ent(eta(.|t) | pi(.|t))`,
///
/// whose sum is `Ent(eta | pi)`.
pub fn chain_rule_decompose(
    eta: &FiniteDistribution,
    pi: &FiniteDistribution,
    groups: &[usize],
) -> Result<(f64, f64)> {
    if !eta.same_atoms(pi) || groups.len() != eta.len() {
        return Err(Error::MismatchedSupport);
    }
    let n_groups = groups.iter().copied().max().map_or(0, |g| g + 1);
    let mut eta_marg = vec![0.0; n_groups];
    let mut pi_marg = vec![0.0; n_groups];
    for (i, &g) in groups.iter().enumerate() {
        eta_marg[g] += eta.prob(i);
        pi_marg[g] += pi.prob(i);
    }

    let mut marginal = 0.0;
    for (&e, &m) in eta_marg.iter().zip(&pi_marg) {
        if e == 0.0 {
            continue;
        }
        if m == 0.0 {
            return Ok((f64::INFINITY, 0.0));
        }
        marginal += e * (e / m).ln();
    }
    if marginal < 0.0 && marginal > -1e-14 {
        marginal = 0.0;
    }

    let mut conditional = 0.0;
    for (i, &g) in groups.iter().enumerate() {
        let e = eta.prob(i);
        if e == 0.0 {
            continue;
        }
        let m = pi.prob(i);
        if m == 0.0 {
            return Ok((marginal, f64::INFINITY));
        }
        // eta(i|t) = e / eta_marg, pi(i|t) = m / pi_marg; the t-weights
        // eta_marg cancel one level of the ratio.
        let cond_ratio = (e / eta_marg[g]) / (m / pi_marg[g]);
        conditional += e * cond_ratio.ln();
    }
    if conditional < 0.0 && conditional > -1e-14 {
        conditional = 0.0;
    }
    Ok((marginal, conditional))
}
