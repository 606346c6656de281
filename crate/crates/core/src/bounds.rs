//! Required-sample-size machinery for importance sampling.
//!
//! The driving estimate is a two-sided bracket on the critical sample size
//! `N*` at which the deviation probability of the normalizing-constant
//! estimator first drops to a prescribed level:
//!
//! `|ln N* - Ent(eta|mu)| <= R(Y)`,
//!
//! where `Y` is the unit-mean likelihood ratio and the slack
//!
//! `R(Y) = inf_theta [ factor * (Ent_{1+theta} - Ent_{1-theta}) + ln(c) / theta ]`
//!
//! is minimized over `theta` in `(0, 1]`. Two variants are implemented and
//! labelled rather than silently merged: `Theorem` uses factor 1 on the
//! Renyi gap and `Corollary` uses factor 2; the underlying constant
//! `c(delta, p_alpha)` is shared. The search domain is floored at
//! `theta = 1e-4`: below that, `ln(c)/theta` exceeds any desk-scale gap by
//! three orders of magnitude whenever `c > 1`.

use serde::{Deserialize, Serialize};

use crate::entropy::EntropyReport;
use crate::error::{Error, Result};
use crate::measures::FiniteDistribution;
use crate::numeric::{g12, golden_section_min};
use crate::rng::StreamRng;

/// Lower end of the `theta` search domain.
pub const THETA_MIN: f64 = 1e-4;

// ---------------------------------------------------------------------------
// The numerical constant and the slack minimization
// ---------------------------------------------------------------------------

/// `c(delta, p_alpha) = max( (3/(p_alpha delta))^4, (2/((1-p_alpha)(1-delta)))^2 )`.
pub fn c_constant(delta: f64, p_alpha: f64) -> Result<f64> {
    for (what, v) in [("delta", delta), ("p_alpha", p_alpha)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::DomainError {
                what,
                value: v,
                domain: "(0, 1)",
            });
        }
    }
    let upper = (3.0 / (p_alpha * delta)).powi(4);
    let lower = (2.0 / ((1.0 - p_alpha) * (1.0 - delta))).powi(2);
    Ok(upper.max(lower))
}

/// Which displayed form of the bracket is being used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Factor 1 on the Renyi gap.
    Theorem,
    /// Factor 2 on the Renyi gap.
    Corollary,
}

impl BoundVariant {
    pub fn gap_factor(self) -> f64 {
        match self {
            BoundVariant::Theorem => 1.0,
            BoundVariant::Corollary => 2.0,
        }
    }
}

/// Minimizes `factor * gap(theta) + ln(c)/theta` over `theta` in
/// `[THETA_MIN, 1]`: a 100-point log-grid seed followed by golden-section
/// refinement between the seed's neighbors. Returns `(theta_star, slack)`.
fn minimize_slack(gap: &dyn Fn(f64) -> f64, ln_c: f64, factor: f64) -> Result<(f64, f64)> {
    let n = 100;
    let grid: Vec<f64> = (0..=n)
        .map(|i| {
            10f64.powf(THETA_MIN.log10() + (0.0 - THETA_MIN.log10()) * i as f64 / n as f64)
        })
        .collect();
    let objective = |theta: f64| -> f64 {
        let g = gap(theta);
        if g.is_finite() {
            factor * g + ln_c / theta
        } else {
            f64::INFINITY
        }
    };
    let mut best = (0usize, f64::INFINITY);
    for (i, &t) in grid.iter().enumerate() {
        let v = objective(t);
        if v < best.1 {
            best = (i, v);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::ProfileIncomplete);
    }
    let lo = grid[best.0.saturating_sub(1)];
    let hi = grid[(best.0 + 1).min(n)];
    let (theta, value) = golden_section_min(objective, lo, hi, 1e-12);
    // The boundary can beat the interior refinement when the objective is
    // monotone on the whole domain.
    if best.1 < value {
        Ok((grid[best.0], best.1))
    } else {
        Ok((theta, value))
    }
}

/// Slack `R(Y)` from a Renyi profile: the gap `Ent_{1+theta} - Ent_{1-theta}`
/// is linearly interpolated on the profile's `(order, value)` pairs, and
/// `theta` is restricted to orders the profile covers.
pub fn slack_r(
    profile: &EntropyReport,
    c: f64,
    variant: BoundVariant,
) -> Result<(f64, f64)> {
    if c <= 0.0 {
        return Err(Error::DomainError {
            what: "c",
            value: c,
            domain: "(0, +inf)",
        });
    }
    let mut pts: Vec<(f64, f64)> = profile
        .renyi
        .iter()
        .filter(|(_, v)| v.is_finite())
        .cloned()
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.is_empty() {
        return Err(Error::ProfileIncomplete);
    }
    let (amin, amax) = (pts[0].0, pts[pts.len() - 1].0);
    let theta_cap = (amax - 1.0).min(1.0 - amin).min(1.0);
    if theta_cap < THETA_MIN {
        return Err(Error::ProfileIncomplete);
    }
    let interp = move |order: f64| -> f64 {
        match pts.binary_search_by(|p| p.0.partial_cmp(&order).unwrap()) {
            Ok(i) => pts[i].1,
            Err(i) => {
                // Orders outside the covered range were excluded above.
                let (a, b) = (&pts[i - 1], &pts[i]);
                a.1 + (b.1 - a.1) * (order - a.0) / (b.0 - a.0)
            }
        }
    };
    let gap = move |theta: f64| -> f64 {
        if theta > theta_cap {
            f64::INFINITY
        } else {
            interp(1.0 + theta) - interp(1.0 - theta)
        }
    };
    minimize_slack(&gap, c.ln(), variant.gap_factor())
}

/// The full bracket for a finite target/proposal pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `Ent(eta | mu) = E(Y ln Y)`, nats.
    pub ent: f64,
    pub theta_star: f64,
    pub slack_r: f64,
    pub c_constant: f64,
    /// `[ent - slack_r, ent + slack_r]`.
    pub ln_nstar_interval: [f64; 2],
    pub variant: BoundVariant,
}

impl BoundReport {
    pub fn from_profile(
        profile: &EntropyReport,
        delta: f64,
        p_alpha: f64,
        variant: BoundVariant,
    ) -> Result<Self> {
        let c = c_constant(delta, p_alpha)?;
        let (theta_star, slack) = slack_r(profile, c, variant)?;
        Ok(BoundReport {
            ent: profile.kl,
            theta_star,
            slack_r: slack,
            c_constant: c,
            ln_nstar_interval: [profile.kl - slack, profile.kl + slack],
            variant,
        })
    }

    pub fn contains_ln_n(&self, ln_n: f64) -> bool {
        ln_n >= self.ln_nstar_interval[0] && ln_n <= self.ln_nstar_interval[1]
    }
}

// ---------------------------------------------------------------------------
// The three-point likelihood family
// ---------------------------------------------------------------------------

/// Three-point unit-mean likelihood `Y`: mass on `{0, l1, l2}` with
/// `alpha = p1 l1 = 1 - p2 l2` and `r = l2 / l1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreePointParams {
    pub l1: f64,
    pub r: f64,
    pub alpha: f64,
}

impl ThreePointParams {
    pub fn new(l1: f64, r: f64, alpha: f64) -> Result<Self> {
        let p = ThreePointParams { l1, r, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l1 > 0.0 && self.l1.is_finite()) {
            return Err(Error::DomainError {
                what: "l1",
                value: self.l1,
                domain: "(0, +inf)",
            });
        }
        for (what, v) in [("r", self.r), ("alpha", self.alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::DomainError {
                    what,
                    value: v,
                    domain: "(0, 1)",
                });
            }
        }
        let (p1, p2) = (self.p1(), self.p2());
        if !(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0 && p1 + p2 <= 1.0) {
            return Err(Error::invalid(format!(
                "derived masses p1={p1}, p2={p2} are not a sub-probability"
            )));
        }
        Ok(())
    }

    pub fn l2(&self) -> f64 {
        self.r * self.l1
    }

    pub fn p1(&self) -> f64 {
        self.alpha / self.l1
    }

    pub fn p2(&self) -> f64 {
        (1.0 - self.alpha) / self.l2()
    }

    /// How deep into the `alpha >> r^{1-alpha}` regime the parameters sit.
    pub fn regime_ratio(&self) -> f64 {
        self.alpha / self.r.powf(1.0 - self.alpha)
    }

    /// The explicit `(eta, mu)` pair on three atoms whose likelihood ratio
    /// is this `Y`.
    pub fn distribution_pair(&self) -> Result<(FiniteDistribution, FiniteDistribution)> {
        let (p1, p2) = (self.p1(), self.p2());
        let atoms = vec!["y0".to_string(), "y_l1".to_string(), "y_l2".to_string()];
        let mu = FiniteDistribution::new(atoms.clone(), vec![1.0 - p1 - p2, p1, p2])?;
        let eta = FiniteDistribution::new(atoms, vec![0.0, self.alpha, 1.0 - self.alpha])?;
        Ok((eta, mu))
    }

    pub fn y_sampler(&self) -> Result<DiscreteY> {
        DiscreteY::new(
            vec![0.0, self.l1, self.l2()],
            vec![1.0 - self.p1() - self.p2(), self.p1(), self.p2()],
        )
    }

    /// The exact Renyi gap `Ent_{1+theta} - Ent_{1-theta}` of this family:
    /// `(1/theta) ln(1 + alpha (1-alpha) (r^theta + r^-theta - 2))`.
    pub fn renyi_gap(&self, theta: f64) -> f64 {
        let a = self.alpha;
        (1.0 + a * (1.0 - a) * (self.r.powf(theta) + self.r.powf(-theta) - 2.0)).ln() / theta
    }
}

/// Per-parameter summary of the entropy-vs-variance comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreePointReport {
    pub l1: f64,
    pub r: f64,
    pub alpha: f64,
    /// `E(Y ln Y) = alpha ln l1 + (1-alpha) ln l2`.
    pub ent: f64,
    /// `ln E(Y^2) = ln(alpha l1 + (1-alpha) l2)`: the log-variance proxy
    /// (the `-1` of the true variance is negligible in this regime).
    pub ln_var: f64,
    /// `ln_var - ent`, the amount by which variance overstates the cost.
    pub gap: f64,
    pub theta_star: f64,
    pub slack_r: f64,
    /// `gap / slack_r`: how decisively the bracket separates the entropy
    /// estimate from the variance estimate.
    pub dominance_ratio: f64,
}

impl ThreePointReport {
    pub const CSV_HEADER: &'static str =
        "l1,r,alpha,ent,ln_var,gap,theta_star,slack_r,dominance_ratio";

    pub fn csv_row(&self) -> String {
        [
            self.l1,
            self.r,
            self.alpha,
            self.ent,
            self.ln_var,
            self.gap,
            self.theta_star,
            self.slack_r,
            self.dominance_ratio,
        ]
        .iter()
        .map(|x| g12(*x))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Evaluates the closed-form three-point quantities, with the slack
/// minimized over `theta` for the supplied constant `c` (use `c = 1` to
/// measure the distribution-dependent part of the slack alone).
pub fn three_point_report(params: &ThreePointParams, c: f64) -> Result<ThreePointReport> {
    params.validate()?;
    if c <= 0.0 {
        return Err(Error::DomainError {
            what: "c",
            value: c,
            domain: "(0, +inf)",
        });
    }
    let (l1, r, alpha) = (params.l1, params.r, params.alpha);
    let l2 = params.l2();
    let ent = alpha * l1.ln() + (1.0 - alpha) * l2.ln();
    let ln_var = (alpha * l1 + (1.0 - alpha) * l2).ln();
    let gap = ln_var - ent;
    let (theta_star, slack) =
        minimize_slack(&|t| params.renyi_gap(t), c.ln(), BoundVariant::Theorem.gap_factor())?;
    Ok(ThreePointReport {
        l1,
        r,
        alpha,
        ent,
        ln_var,
        gap,
        theta_star,
        slack_r: slack,
        dominance_ratio: gap / slack,
    })
}

/// The scaling family `l1 = 10^k`, `r = 10^{-k/2}`, `alpha = 10^{-k/4}`:
/// as `k` grows, the entropy-variance gap diverges while the slack shrinks,
/// so the dominance ratio increases without bound.
pub fn three_point_sweep(k_range: std::ops::RangeInclusive<u32>, c: f64) -> Result<Vec<ThreePointReport>> {
    let mut out = Vec::new();
    for k in k_range {
        let k = k as f64;
        let params = ThreePointParams::new(
            10f64.powf(k),
            10f64.powf(-k / 2.0),
            10f64.powf(-k / 4.0),
        )?;
        out.push(three_point_report(&params, c)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Empirical critical sample size
// ---------------------------------------------------------------------------

/// A unit-mean nonnegative random variable that can be sampled.
pub trait UnitMeanSampler: Send + Sync {
    fn draw(&self, rng: &mut StreamRng) -> f64;

    /// Sum of `n` independent copies. Implementations may use an exact
    /// distributional shortcut.
    fn sum_of(&self, n: usize, rng: &mut StreamRng) -> f64 {
        (0..n).map(|_| self.draw(rng)).sum()
    }

    /// Exact mean when available; used to verify unit mean without Monte
    /// Carlo.
    fn exact_mean(&self) -> Option<f64> {
        None
    }
}

/// `Y = 1` almost surely.
#[derive(Debug, Clone, Copy)]
pub struct ConstantY;

impl UnitMeanSampler for ConstantY {
    fn draw(&self, _rng: &mut StreamRng) -> f64 {
        1.0
    }
    fn sum_of(&self, n: usize, _rng: &mut StreamRng) -> f64 {
        n as f64
    }
    fn exact_mean(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Finitely supported `Y`. Sums are drawn from the exact multinomial law of
/// the atom counts (sequential binomials), which keeps the probe cost
/// independent of `n`.
#[derive(Debug, Clone)]
pub struct DiscreteY {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteY {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return Err(Error::invalid("values and probs must have equal, positive length"));
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::invalid("values must be finite and >= 0"));
        }
        if probs.iter().any(|p| *p < 0.0) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("probs must be a probability vector"));
        }
        Ok(DiscreteY { values, probs })
    }

    /// Two-atom family: mass `epsilon` at `1/epsilon`, the rest at 0.
    pub fn heavy_atom(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::DomainError {
                what: "epsilon",
                value: epsilon,
                domain: "(0, 1)",
            });
        }
        DiscreteY::new(vec![0.0, 1.0 / epsilon], vec![1.0 - epsilon, epsilon])
    }
}

impl UnitMeanSampler for DiscreteY {
    fn draw(&self, rng: &mut StreamRng) -> f64 {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (&v, &p) in self.values.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return v;
            }
        }
        *self.values.last().unwrap()
    }

    fn sum_of(&self, n: usize, rng: &mut StreamRng) -> f64 {
        use rand::RngExt;
        let mut total = 0.0;
        let mut remaining = n as u64;
        let mut rem_p = 1.0f64;
        for (i, (&v, &p)) in self.values.iter().zip(&self.probs).enumerate() {
            if remaining == 0 {
                break;
            }
            if i + 1 == self.values.len() {
                total += v * remaining as f64;
                break;
            }
            let cond = (p / rem_p).clamp(0.0, 1.0);
            let binom = rand_distr::Binomial::new(remaining, cond)
                .expect("conditional probability is in [0,1]");
            let count = rng.sample(binom);
            total += v * count as f64;
            remaining -= count;
            rem_p = (rem_p - p).max(0.0);
        }
        total
    }

    fn exact_mean(&self) -> Option<f64> {
        Some(
            self.values
                .iter()
                .zip(&self.probs)
                .map(|(&v, &p)| v * p)
                .sum(),
        )
    }
}

/// Configuration for the deviation-probability probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationProbeConfig {
    /// Accuracy threshold on `|mean - 1|`.
    pub delta: f64,
    /// Target deviation probability.
    pub p_alpha: f64,
    /// Monte Carlo replications per grid point; at least 1000.
    pub replications: usize,
    /// Increasing sample sizes, usually log-spaced.
    pub n_grid: Vec<usize>,
}

impl DeviationProbeConfig {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("delta", self.delta), ("p_alpha", self.p_alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::DomainError {
                    what,
                    value: v,
                    domain: "(0, 1)",
                });
            }
        }
        if self.replications < 1000 {
            return Err(Error::invalid("replications must be at least 1000"));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("n_grid must be nonempty and strictly increasing"));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::invalid("n_grid entries must be positive"));
        }
        Ok(())
    }

    /// `points` log-spaced integers from `n_min` to `n_max`, deduplicated.
    pub fn log_grid(n_min: usize, n_max: usize, points: usize) -> Vec<usize> {
        let (a, b) = ((n_min as f64).ln(), (n_max as f64).ln());
        let mut grid: Vec<usize> = (0..points)
            .map(|i| {
                (a + (b - a) * i as f64 / (points - 1).max(1) as f64)
                    .exp()
                    .round() as usize
            })
            .collect();
        grid.dedup();
        grid
    }
}

/// One grid point of the deviation-probability curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdevPoint {
    pub n: usize,
    pub raw: f64,
    pub isotonic: f64,
}

/// Result of the empirical critical-sample-size probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSampleSize {
    pub n_star: f64,
    pub ln_n_star: f64,
    /// Bootstrap 95% interval on `n_star`.
    pub ci: (f64, f64),
    /// `true` when no deviation was ever observed (`Y` essentially
    /// deterministic); `n_star` is then the smallest grid point.
    pub no_deviation_ever: bool,
    pub curve: Vec<PdevPoint>,
}

impl CriticalSampleSize {
    pub const CURVE_CSV_HEADER: &'static str = "n,p_raw,p_isotonic";

    pub fn curve_csv(&self) -> String {
        let mut out = String::from(Self::CURVE_CSV_HEADER);
        out.push('\n');
        for p in &self.curve {
            out.push_str(&format!("{},{},{}\n", p.n, g12(p.raw), g12(p.isotonic)));
        }
        out
    }
}

/// Pool-adjacent-violators fit of a nonincreasing sequence (equal weights).
pub fn isotonic_nonincreasing(ys: &[f64]) -> Vec<f64> {
    // Fit nondecreasing on the negated values.
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        let mut sum = -y;
        let mut count = 1usize;
        while let Some(&(bs, bc)) = blocks.last() {
            if bs / bc as f64 > sum / count as f64 {
                sum += bs;
                count += bc;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push((sum, count));
    }
    let mut out = Vec::with_capacity(ys.len());
    for (sum, count) in blocks {
        let v = -(sum / count as f64);
        out.extend(std::iter::repeat_n(v, count));
    }
    out
}

/// Estimates the critical sample size at which
/// `P(|sum Y_i / N - 1| >= delta)` crosses `p_alpha`.
///
/// The raw curve is monotonized (deviation probabilities decrease in `N`
/// up to Monte Carlo noise) before inversion by log-linear interpolation;
/// the confidence interval is a parametric bootstrap over the binomial
/// counts, clamped to the grid.
pub fn empirical_critical_n(
    y: &dyn UnitMeanSampler,
    cfg: &DeviationProbeConfig,
    rng: &StreamRng,
) -> Result<CriticalSampleSize> {
    cfg.validate()?;
    verify_unit_mean(y, rng)?;

    let m = cfg.replications;
    let probe_rng = rng.split("pdev");
    let mut raw = Vec::with_capacity(cfg.n_grid.len());
    for (gi, &n) in cfg.n_grid.iter().enumerate() {
        let grid_rng = probe_rng.split_index(gi as u64);
        let mut count = 0usize;
        for rep in 0..m {
            let mut r = grid_rng.split_index(rep as u64);
            let mean = y.sum_of(n, &mut r) / n as f64;
            if (mean - 1.0).abs() >= cfg.delta {
                count += 1;
            }
        }
        raw.push(count as f64 / m as f64);
    }
    let iso = isotonic_nonincreasing(&raw);
    let curve: Vec<PdevPoint> = cfg
        .n_grid
        .iter()
        .zip(raw.iter().zip(&iso))
        .map(|(&n, (&r, &i))| PdevPoint {
            n,
            raw: r,
            isotonic: i,
        })
        .collect();

    if raw.iter().all(|&p| p == 0.0) {
        let n0 = cfg.n_grid[0] as f64;
        return Ok(CriticalSampleSize {
            n_star: n0,
            ln_n_star: n0.ln(),
            ci: (n0, n0),
            no_deviation_ever: true,
            curve,
        });
    }

    let ln_n_star = invert_monotone_curve(&cfg.n_grid, &iso, cfg.p_alpha)
        .ok_or(Error::GridTooNarrow { level: cfg.p_alpha })?;

    // Parametric bootstrap on the per-point binomial counts.
    let boots = 200;
    let boot_rng = rng.split("bootstrap");
    let (ln_lo, ln_hi) = (
        (cfg.n_grid[0] as f64).ln(),
        (*cfg.n_grid.last().unwrap() as f64).ln(),
    );
    let mut draws = Vec::with_capacity(boots);
    for b in 0..boots {
        use rand::RngExt;
        let mut r = boot_rng.split_index(b as u64);
        let resampled: Vec<f64> = raw
            .iter()
            .map(|&p| {
                let binom = rand_distr::Binomial::new(m as u64, p.clamp(0.0, 1.0))
                    .expect("probability in [0,1]");
                r.sample(binom) as f64 / m as f64
            })
            .collect();
        let iso_b = isotonic_nonincreasing(&resampled);
        let v = invert_monotone_curve(&cfg.n_grid, &iso_b, cfg.p_alpha)
            .unwrap_or(if iso_b[0] < cfg.p_alpha { ln_lo } else { ln_hi });
        draws.push(v);
    }
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| -> f64 {
        let idx = ((boots as f64 - 1.0) * q).round() as usize;
        draws[idx]
    };
    let ci = (quantile(0.025).exp(), quantile(0.975).exp());

    Ok(CriticalSampleSize {
        n_star: ln_n_star.exp(),
        ln_n_star,
        ci,
        no_deviation_ever: false,
        curve,
    })
}

fn verify_unit_mean(y: &dyn UnitMeanSampler, rng: &StreamRng) -> Result<()> {
    if let Some(mean) = y.exact_mean() {
        if (mean - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("sampler mean {mean} is not 1")));
        }
        return Ok(());
    }
    let n = 10_000;
    let mut r = rng.split("unit-mean-check");
    let draws: Vec<f64> = (0..n).map(|_| y.draw(&mut r)).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let tol = 3.0 * sd / (n as f64).sqrt();
    if (mean - 1.0).abs() > tol.max(0.05) {
        return Err(Error::invalid(format!(
            "sampler mean {mean} deviates from 1 beyond 3 standard errors"
        )));
    }
    Ok(())
}

/// Log-linear inversion of a nonincreasing curve at `level`; `None` when the
/// grid does not bracket the level.
fn invert_monotone_curve(n_grid: &[usize], iso: &[f64], level: f64) -> Option<f64> {
    if iso[0] < level || *iso.last().unwrap() > level {
        return None;
    }
    for i in 0..iso.len() {
        if iso[i] <= level {
            if i == 0 {
                return Some((n_grid[0] as f64).ln());
            }
            let (p0, p1) = (iso[i - 1], iso[i]);
            let (x0, x1) = ((n_grid[i - 1] as f64).ln(), (n_grid[i] as f64).ln());
            if p0 == p1 {
                return Some(0.5 * (x0 + x1));
            }
            let t = (p0 - level) / (p0 - p1);
            return Some(x0 + t * (x1 - x0));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyReport;
    use approx::assert_abs_diff_eq;

    #[test]
    fn c_constant_examples() {
        assert_abs_diff_eq!(c_constant(0.5, 0.5).unwrap(), 20736.0, epsilon = 1e-9);
        // delta = p_alpha = 0.1: (3/0.01)^4 = 8.1e9 dominates.
        assert_abs_diff_eq!(c_constant(0.1, 0.1).unwrap(), 8.1e9, epsilon = 1.0);
        assert!(c_constant(0.0, 0.5).is_err());
        assert!(c_constant(0.5, 1.0).is_err());
    }

    #[test]
    fn c_constant_first_branch_depends_on_product_only() {
        // Pick pairs with the same product, dominated by the first branch.
        let a = (3.0f64 / (0.2 * 0.3)).powi(4);
        let b = (3.0f64 / (0.3 * 0.2)).powi(4);
        assert_eq!(a, b);
        assert_eq!(c_constant(0.2, 0.3).unwrap(), a);
        assert_eq!(c_constant(0.3, 0.2).unwrap(), a);
    }

    #[test]
    fn slack_degenerate_likelihood() {
        // Y = 1: every Renyi entropy vanishes, the objective is ln(c)/theta,
        // minimized at theta = 1 with value ln c.
        let profile = EntropyReport {
            kl: 0.0,
            renyi: EntropyReport::default_orders()
                .into_iter()
                .map(|a| (a, 0.0))
                .collect(),
            log_likelihood_variance: 0.0,
            estimator: crate::entropy::EstimatorKind::Exact,
        };
        let c = 20736.0;
        let (theta, slack) = slack_r(&profile, c, BoundVariant::Theorem).unwrap();
        assert_abs_diff_eq!(theta, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(slack, c.ln(), epsilon = 1e-10);
    }

    #[test]
    fn slack_three_point_matches_brute_force_oracle() {
        // Fine-grid minimization is the oracle for the golden-section path.
        let params = ThreePointParams::new(1e6, 1e-4, 0.01).unwrap();
        let c = c_constant(0.5, 0.5).unwrap();
        for variant in [BoundVariant::Theorem, BoundVariant::Corollary] {
            let factor = variant.gap_factor();
            let mut best = f64::INFINITY;
            let mut best_theta = 0.0;
            for i in 0..=10_000 {
                let t = 10f64.powf(-4.0 + 4.0 * i as f64 / 10_000.0);
                let v = factor * params.renyi_gap(t) + c.ln() / t;
                if v < best {
                    best = v;
                    best_theta = t;
                }
            }
            let (theta, slack) =
                minimize_slack(&|t| params.renyi_gap(t), c.ln(), factor).unwrap();
            assert!(
                (slack - best).abs() <= 1e-6,
                "variant {variant:?}: slack {slack} vs oracle {best} (theta {theta} vs {best_theta})"
            );
        }
    }

    #[test]
    fn slack_profile_route_matches_analytic_route() {
        // The interpolated-profile slack agrees with the closed-form gap on
        // the explicit three-atom pair.
        let params = ThreePointParams::new(1e6, 1e-4, 0.01).unwrap();
        let (eta, mu) = params.distribution_pair().unwrap();
        let profile = EntropyReport::exact(&eta, &mu, &EntropyReport::default_orders()).unwrap();
        let c = c_constant(0.5, 0.5).unwrap();
        let (_, slack_profile) = slack_r(&profile, c, BoundVariant::Theorem).unwrap();
        let (_, slack_analytic) =
            minimize_slack(&|t| params.renyi_gap(t), c.ln(), 1.0).unwrap();
        assert!(
            (slack_profile - slack_analytic).abs() <= 1e-4,
            "{slack_profile} vs {slack_analytic}"
        );
    }

    #[test]
    fn corollary_variant_dominates_theorem_variant() {
        let params = ThreePointParams::new(1e6, 1e-4, 0.01).unwrap();
        let c = c_constant(0.3, 0.3).unwrap();
        let (_, s1) = minimize_slack(&|t| params.renyi_gap(t), c.ln(), 1.0).unwrap();
        let (_, s2) = minimize_slack(&|t| params.renyi_gap(t), c.ln(), 2.0).unwrap();
        assert!(s2 >= s1);
    }

    #[test]
    fn three_point_report_reference_values() {
        let params = ThreePointParams::new(1e6, 1e-4, 0.01).unwrap();
        let rep = three_point_report(&params, 1.0).unwrap();
        assert_abs_diff_eq!(rep.ent, 4.697273589707854, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.ln_var, 9.220191688026556, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.gap, rep.ln_var - rep.ent, epsilon = 1e-12);
    }

    #[test]
    fn three_point_ent_matches_finite_kl() {
        let params = ThreePointParams::new(1e6, 1e-4, 0.01).unwrap();
        let (eta, mu) = params.distribution_pair().unwrap();
        let kl = crate::entropy::relative_entropy_finite(&eta, &mu).unwrap();
        let rep = three_point_report(&params, 1.0).unwrap();
        assert_abs_diff_eq!(rep.ent, kl, epsilon = 1e-12);
    }

    #[test]
    fn three_point_degenerate_limit() {
        // alpha -> 1, r -> 1: the gap collapses.
        let params = ThreePointParams::new(10.0, 0.999, 0.999).unwrap();
        let rep = three_point_report(&params, 1.0).unwrap();
        assert!(rep.gap.abs() < 1e-2, "gap {}", rep.gap);
    }

    #[test]
    fn dominance_sweep_increases() {
        let reports = three_point_sweep(4..=12, 1.0).unwrap();
        assert_eq!(reports.len(), 9);
        for w in reports.windows(2) {
            assert!(
                w[1].dominance_ratio > w[0].dominance_ratio,
                "dominance not increasing: {} -> {}",
                w[0].dominance_ratio,
                w[1].dominance_ratio
            );
        }
        assert!(reports.last().unwrap().dominance_ratio > 5.0);
    }

    #[test]
    fn isotonic_basic() {
        let fit = isotonic_nonincreasing(&[1.0, 0.8, 0.9, 0.2]);
        for (a, b) in fit.iter().zip([1.0, 0.85, 0.85, 0.2]) {
            assert_abs_diff_eq!(a, &b, epsilon = 1e-12);
        }
        assert_eq!(isotonic_nonincreasing(&[0.5]), vec![0.5]);
        // Already monotone input is unchanged.
        let ys = [0.9, 0.5, 0.5, 0.1];
        assert_eq!(isotonic_nonincreasing(&ys), ys.to_vec());
        // Output is nonincreasing and mean-preserving.
        let raw = [0.3, 0.9, 0.1, 0.5, 0.2];
        let fit = isotonic_nonincreasing(&raw);
        assert!(fit.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert_abs_diff_eq!(
            fit.iter().sum::<f64>(),
            raw.iter().sum::<f64>(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn discrete_y_sum_matches_draw_distribution() {
        // The binomial shortcut and the naive draw loop agree in mean and
        // variance.
        let y = DiscreteY::heavy_atom(0.01).unwrap();
        let n = 200;
        let reps = 4000;
        let base = StreamRng::seed_from(5).split("sum-check");
        let (mut m1, mut m2) = (0.0, 0.0);
        let (mut d1, mut d2) = (0.0, 0.0);
        for i in 0..reps {
            let mut r1 = base.split_index(i as u64);
            let s = y.sum_of(n, &mut r1) / n as f64;
            m1 += s;
            m2 += s * s;
            let mut r2 = base.split("naive").split_index(i as u64);
            let s2: f64 = (0..n).map(|_| y.draw(&mut r2)).sum::<f64>() / n as f64;
            d1 += s2;
            d2 += s2 * s2;
        }
        let (m1, m2) = (m1 / reps as f64, m2 / reps as f64);
        let (d1, d2) = (d1 / reps as f64, d2 / reps as f64);
        // Var of the mean = Var(Y)/n = 99/200 = 0.495; se over reps ~ 0.016.
        assert!((m1 - d1).abs() < 0.07, "means {m1} vs {d1}");
        assert!(((m2 - m1 * m1) - (d2 - d1 * d1)).abs() < 0.2);
    }

    #[test]
    fn critical_n_constant_y() {
        let cfg = DeviationProbeConfig {
            delta: 0.3,
            p_alpha: 0.3,
            replications: 1000,
            n_grid: vec![10, 100, 1000],
        };
        let rng = StreamRng::seed_from(3).split("const-y");
        let res = empirical_critical_n(&ConstantY, &cfg, &rng).unwrap();
        assert!(res.no_deviation_ever);
        assert_eq!(res.n_star, 10.0);
    }

    #[test]
    fn critical_n_heavy_atom_vs_binomial_tail_oracle() {
        use statrs::distribution::{Binomial, DiscreteCDF};
        let eps = 1e-3;
        let y = DiscreteY::heavy_atom(eps).unwrap();
        let cfg = DeviationProbeConfig {
            delta: 0.5,
            p_alpha: 0.3,
            replications: 4000,
            n_grid: DeviationProbeConfig::log_grid(100, 100_000, 13),
        };
        let rng = StreamRng::seed_from(8).split("heavy");
        let res = empirical_critical_n(&y, &cfg, &rng).unwrap();
        assert!(!res.no_deviation_ever);

        // Closed-form oracle: the mean stays within delta iff the count of
        // heavy atoms lies strictly inside (n eps (1-delta), n eps (1+delta));
        // boundary counts are deviations because the criterion is inclusive.
        for p in res.curve.iter().step_by(4) {
            let n = p.n as u64;
            let bin = Binomial::new(eps, n).unwrap();
            let lo = (p.n as f64 * eps * (1.0 - cfg.delta)).floor() as u64 + 1;
            let hi = (p.n as f64 * eps * (1.0 + cfg.delta)).ceil() as u64 - 1;
            let exact = if lo > hi {
                1.0
            } else {
                let below = if lo == 0 { 0.0 } else { bin.cdf(lo - 1) };
                below + (1.0 - bin.cdf(hi))
            };
            let se = (exact * (1.0 - exact) / cfg.replications as f64)
                .sqrt()
                .max(1e-3);
            assert!(
                (p.raw - exact).abs() <= 4.0 * se,
                "n={}: raw {} vs exact {exact} (se {se})",
                p.n,
                p.raw
            );
        }
        // The estimate sits inside its own bootstrap interval.
        assert!(res.ci.0 <= res.n_star && res.n_star <= res.ci.1);
    }

    #[test]
    fn grid_too_narrow_detected() {
        let y = DiscreteY::heavy_atom(1e-3).unwrap();
        let cfg = DeviationProbeConfig {
            delta: 0.5,
            p_alpha: 0.3,
            replications: 1000,
            n_grid: vec![2, 4, 8], // far too small to cross p = 0.3 downward
        };
        let rng = StreamRng::seed_from(9).split("narrow");
        assert!(matches!(
            empirical_critical_n(&y, &cfg, &rng),
            Err(Error::GridTooNarrow { .. })
        ));
    }

    #[test]
    fn bound_report_round_trip_and_interval() {
        let params = ThreePointParams::new(1e6, 1e-4, 0.01).unwrap();
        let (eta, mu) = params.distribution_pair().unwrap();
        let profile = EntropyReport::exact(&eta, &mu, &EntropyReport::default_orders()).unwrap();
        let rep = BoundReport::from_profile(&profile, 0.3, 0.3, BoundVariant::Corollary).unwrap();
        assert!(rep.slack_r >= rep.c_constant.ln());
        assert_abs_diff_eq!(
            rep.ln_nstar_interval[1] - rep.ent,
            rep.ent - rep.ln_nstar_interval[0],
            epsilon = 1e-12
        );
        let json = serde_json::to_string(&rep).unwrap();
        let back: BoundReport = serde_json::from_str(&json).unwrap();
        assert_eq!(rep, back);
    }
}
