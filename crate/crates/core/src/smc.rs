//! Tempered sequential Monte Carlo for Gibbs proposals.
//!
//! The sampler interpolates from the reference `pi` to the tilt
//! `mu_beta ∝ exp<beta, T> d pi` along a temperature ladder
//! `0 = l_0 < ... < l_K = 1`, reweighting by the potential increment at
//! each stage, resampling when the effective sample size degrades, and
//! optionally applying a Markov move kernel that leaves the current
//! tempered law invariant. Without a move kernel this is annealed
//! importance sampling with resampling.
//!
//! The normalizing-constant estimator accumulates the unnormalized
//! incremental weights before each resample, the standard unbiased SMC
//! estimator: `ln Z = sum_k [lse(w + a_k) - lse(w)]`, which reduces to
//! `sum_k ln (1/N) sum_n exp((l_{k+1} - l_k) <beta, T(X_n)>)` under
//! per-stage resampling.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Point, SampleableModel, Statistic, WeightedEnsemble};
use crate::numeric::logsumexp;
use crate::rng::StreamRng;

/// Resampling scheme; systematic has the lowest variance among the
/// standard unbiased schemes, multinomial is kept for unbiasedness tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplingScheme {
    Systematic,
    Multinomial,
}

/// A Markov kernel leaving a target log-density invariant.
pub trait MoveKernel: Send + Sync {
    /// One transition of `x`; returns whether the proposal was accepted.
    fn step(
        &self,
        x: &mut Point,
        scale: f64,
        log_target: &dyn Fn(&[f64]) -> f64,
        rng: &mut StreamRng,
    ) -> bool;
}

/// Symmetric Gaussian random-walk Metropolis kernel.
#[derive(Debug, Clone, Default)]
pub struct RandomWalkMove;

impl MoveKernel for RandomWalkMove {
    fn step(
        &self,
        x: &mut Point,
        scale: f64,
        log_target: &dyn Fn(&[f64]) -> f64,
        rng: &mut StreamRng,
    ) -> bool {
        let current = log_target(x);
        let proposal: Point = x.iter().map(|&c| c + scale * rng.standard_normal()).collect();
        let candidate = log_target(&proposal);
        let accept = candidate - current >= 0.0 || rng.uniform().ln() < candidate - current;
        if accept {
            *x = proposal;
        }
        accept
    }
}

/// Move-kernel configuration for one SMC run.
#[derive(Clone)]
pub struct MoveConfig {
    pub kernel: Arc<dyn MoveKernel>,
    pub steps_per_stage: usize,
    pub initial_scale: f64,
    /// Adapt the proposal scale between stages to hold acceptance in the
    /// 30-50% band.
    pub adapt_scale: bool,
}

impl MoveConfig {
    pub fn random_walk(steps_per_stage: usize, initial_scale: f64) -> Self {
        MoveConfig {
            kernel: Arc::new(RandomWalkMove),
            steps_per_stage,
            initial_scale,
            adapt_scale: true,
        }
    }
}

impl std::fmt::Debug for MoveConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MoveConfig")
            .field("steps_per_stage", &self.steps_per_stage)
            .field("initial_scale", &self.initial_scale)
            .field("adapt_scale", &self.adapt_scale)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct SmcConfig {
    pub particle_count: usize,
    /// Strictly increasing, endpoints exactly 0 and 1.
    pub temperature_ladder: Vec<f64>,
    /// Resample when `ESS / N` falls below this; in `(0, 1]`.
    pub ess_threshold: f64,
    pub resampling: ResamplingScheme,
    pub move_config: Option<MoveConfig>,
}

impl SmcConfig {
    /// Default configuration: 20 uniform stages, resampling at half the
    /// particle count, systematic scheme, no move kernel.
    pub fn new(particle_count: usize) -> Self {
        SmcConfig {
            particle_count,
            temperature_ladder: uniform_ladder(20),
            ess_threshold: 0.5,
            resampling: ResamplingScheme::Systematic,
            move_config: None,
        }
    }

    pub fn with_move(mut self, mv: MoveConfig) -> Self {
        self.move_config = Some(mv);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.particle_count == 0 {
            return Err(Error::invalid("particle_count must be positive"));
        }
        let l = &self.temperature_ladder;
        if l.len() < 2 || l[0] != 0.0 || *l.last().unwrap() != 1.0 {
            return Err(Error::invalid(
                "temperature ladder must run from exactly 0 to exactly 1",
            ));
        }
        if l.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("temperature ladder must be strictly increasing"));
        }
        if !(self.ess_threshold > 0.0 && self.ess_threshold <= 1.0) {
            return Err(Error::invalid("ess_threshold must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// `0, 1/K, ..., 1` with exact endpoints.
pub fn uniform_ladder(stages: usize) -> Vec<f64> {
    (0..=stages).map(|k| k as f64 / stages as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub stage: usize,
    pub lambda: f64,
    /// ESS after reweighting, before any resampling.
    pub ess: f64,
    pub resampled: bool,
    pub acceptance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SmcResult {
    /// Final ensemble targeting `mu_beta` with self-normalized weights.
    pub ensemble: WeightedEnsemble,
    pub log_z_estimate: f64,
    /// Standard error across independent replicas; `None` for single runs.
    pub log_z_std_error: Option<f64>,
    pub stage_diagnostics: Vec<StageDiagnostics>,
    pub warnings: Vec<String>,
}

/// Serialization mirror of [`SmcResult`] (the ensemble travels separately
/// as CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmcResultRecord {
    pub log_z_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_z_std_error: Option<f64>,
    pub particle_count: usize,
    pub stage_diagnostics: Vec<StageDiagnostics>,
    pub warnings: Vec<String>,
}

impl SmcResult {
    pub fn record(&self) -> SmcResultRecord {
        SmcResultRecord {
            log_z_estimate: self.log_z_estimate,
            log_z_std_error: self.log_z_std_error,
            particle_count: self.ensemble.len(),
            stage_diagnostics: self.stage_diagnostics.clone(),
            warnings: self.warnings.clone(),
        }
    }

    /// CSV with columns `stage,lambda,ess,resampled,acceptance`.
    pub fn stage_diagnostics_csv(&self) -> String {
        use crate::numeric::g12;
        let mut out = String::from("stage,lambda,ess,resampled,acceptance\n");
        for d in &self.stage_diagnostics {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                d.stage,
                g12(d.lambda),
                g12(d.ess),
                d.resampled,
                d.acceptance.map_or(String::new(), g12),
            ));
        }
        out
    }
}

/// Runs tempered SMC toward `mu_beta`; deterministic given the rng stream.
pub fn run_smc(
    pi: &dyn SampleableModel,
    stat: &Statistic,
    beta: &[f64],
    cfg: &SmcConfig,
    rng: &StreamRng,
) -> Result<SmcResult> {
    cfg.validate()?;
    if beta.len() != stat.dimension() {
        return Err(Error::invalid("beta dimension must match the statistic"));
    }
    let n = cfg.particle_count;
    let init_rng = rng.split("init");
    let mut points: Vec<Point> = (0..n)
        .map(|i| pi.draw(&mut init_rng.split_index(i as u64)))
        .collect();
    let dot = |b: &[f64], t: &[f64]| -> f64 { b.iter().zip(t).map(|(x, y)| x * y).sum() };
    // Potential of each particle, g = <beta, T(x)>.
    let mut potential: Vec<f64> = points.iter().map(|p| dot(beta, &stat.evaluate(p))).collect();
    let mut log_w = vec![0.0f64; n];
    let mut log_z = 0.0f64;
    let mut diagnostics = Vec::with_capacity(cfg.temperature_ladder.len() - 1);
    let mut warnings = Vec::new();
    let mut scale = cfg.move_config.as_ref().map_or(0.0, |m| m.initial_scale);
    let mut low_acceptance_stages = 0usize;
    let resample_rng = rng.split("resample");
    let move_rng = rng.split("move");

    for (k, win) in cfg.temperature_ladder.windows(2).enumerate() {
        let (lambda_prev, lambda) = (win[0], win[1]);
        let dl = lambda - lambda_prev;

        let before = logsumexp(&log_w);
        for (w, g) in log_w.iter_mut().zip(&potential) {
            *w += dl * g;
        }
        let after = logsumexp(&log_w);
        if after == f64::NEG_INFINITY {
            return Err(Error::AllWeightsDegenerate);
        }
        log_z += after - before;

        let ensemble_view = WeightedEnsemble::new(points.clone(), log_w.clone())?;
        let ess = ensemble_view.effective_sample_size()?;
        let resampled = ess / (n as f64) < cfg.ess_threshold;
        if resampled {
            let weights = ensemble_view.normalized_weights()?;
            let mut stage_rng = resample_rng.split_index(k as u64);
            let idx = match cfg.resampling {
                ResamplingScheme::Systematic => systematic_indices(&weights, n, &mut stage_rng),
                ResamplingScheme::Multinomial => multinomial_indices(&weights, n, &mut stage_rng),
            };
            points = idx.iter().map(|&i| points[i].clone()).collect();
            potential = idx.iter().map(|&i| potential[i]).collect();
            log_w = vec![0.0; n];
        }

        let mut acceptance = None;
        if let Some(mv) = &cfg.move_config {
            let log_target = |x: &[f64]| -> f64 {
                pi.log_density_wrt_reference(x) + lambda * dot(beta, &stat.evaluate(x))
            };
            let stage_rng = move_rng.split_index(k as u64);
            let mut accepted = 0usize;
            for (i, p) in points.iter_mut().enumerate() {
                let mut particle_rng = stage_rng.split_index(i as u64);
                for _ in 0..mv.steps_per_stage {
                    if mv.kernel.step(p, scale, &log_target, &mut particle_rng) {
                        accepted += 1;
                    }
                }
            }
            let total = (n * mv.steps_per_stage).max(1);
            let rate = accepted as f64 / total as f64;
            acceptance = Some(rate);
            for (p, g) in points.iter().zip(potential.iter_mut()) {
                *g = dot(beta, &stat.evaluate(p));
            }
            if rate < 0.01 {
                low_acceptance_stages += 1;
                if low_acceptance_stages == 3 {
                    warnings.push(
                        "move kernel acceptance below 1% for 3 consecutive stages".to_string(),
                    );
                }
            } else {
                low_acceptance_stages = 0;
            }
            if mv.adapt_scale {
                if rate < 0.30 {
                    scale *= 0.7;
                } else if rate > 0.50 {
                    scale *= 1.4;
                }
                scale = scale.clamp(mv.initial_scale * 1e-3, mv.initial_scale * 1e3);
            }
        }

        diagnostics.push(StageDiagnostics {
            stage: k,
            lambda,
            ess,
            resampled,
            acceptance,
        });
    }

    Ok(SmcResult {
        ensemble: WeightedEnsemble::new(points, log_w)?,
        log_z_estimate: log_z,
        log_z_std_error: None,
        stage_diagnostics: diagnostics,
        warnings,
    })
}

/// Runs `replicas` fully independent copies (split rng streams) and
/// summarizes: `log_z_estimate` is the replica mean, `log_z_std_error` the
/// replica standard error; the ensemble and diagnostics come from the last
/// replica.
pub fn run_smc_replicated(
    pi: &dyn SampleableModel,
    stat: &Statistic,
    beta: &[f64],
    cfg: &SmcConfig,
    rng: &StreamRng,
    replicas: usize,
) -> Result<SmcResult> {
    if replicas == 0 {
        return Err(Error::invalid("replicas must be positive"));
    }
    let (mean, se, _values, last) = replicate_log_z(pi, stat, beta, cfg, rng, replicas)?;
    let mut result = last;
    result.log_z_estimate = mean;
    result.log_z_std_error = Some(se);
    Ok(result)
}

/// Replica log-normalizer summary: `(mean, standard error, values, last run)`.
pub fn replicate_log_z(
    pi: &dyn SampleableModel,
    stat: &Statistic,
    beta: &[f64],
    cfg: &SmcConfig,
    rng: &StreamRng,
    replicas: usize,
) -> Result<(f64, f64, Vec<f64>, SmcResult)> {
    let base = rng.split("replica");
    let mut values = Vec::with_capacity(replicas);
    let mut last = None;
    for r in 0..replicas {
        let run = run_smc(pi, stat, beta, cfg, &base.split_index(r as u64))?;
        values.push(run.log_z_estimate);
        last = Some(run);
    }
    let m = values.iter().sum::<f64>() / replicas as f64;
    let se = if replicas > 1 {
        let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>()
            / (replicas as f64 - 1.0);
        (var / replicas as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok((m, se, values, last.expect("at least one replica")))
}

fn systematic_indices(weights: &[f64], n_out: usize, rng: &mut StreamRng) -> Vec<usize> {
    // A single uniform draw drives the whole sweep.
    let start = rng.uniform() / n_out as f64;
    let mut idx = Vec::with_capacity(n_out);
    let mut cum = 0.0;
    let mut i = 0usize;
    for j in 0..n_out {
        let u = start + j as f64 / n_out as f64;
        while cum + weights[i] < u && i + 1 < weights.len() {
            cum += weights[i];
            i += 1;
        }
        idx.push(i);
    }
    idx
}

fn multinomial_indices(weights: &[f64], n_out: usize, rng: &mut StreamRng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cdf.push(acc);
    }
    (0..n_out)
        .map(|_| {
            let u = rng.uniform() * acc;
            cdf.partition_point(|&c| c < u).min(weights.len() - 1)
        })
        .collect()
}

/// Systematic resampling: `N` equally weighted points whose expected
/// replication counts equal `N W^n`.
pub fn systematic_resample(
    ensemble: &WeightedEnsemble,
    rng: &mut StreamRng,
) -> Result<WeightedEnsemble> {
    systematic_resample_n(ensemble, ensemble.len(), rng)
}

/// Systematic resampling to a chosen output size.
pub fn systematic_resample_n(
    ensemble: &WeightedEnsemble,
    n_out: usize,
    rng: &mut StreamRng,
) -> Result<WeightedEnsemble> {
    let weights = ensemble.normalized_weights()?;
    let idx = systematic_indices(&weights, n_out, rng);
    WeightedEnsemble::equal_weights(idx.iter().map(|&i| ensemble.points()[i].clone()).collect())
}

/// Multinomial resampling, kept for unbiasedness cross-checks.
pub fn multinomial_resample(
    ensemble: &WeightedEnsemble,
    rng: &mut StreamRng,
) -> Result<WeightedEnsemble> {
    let weights = ensemble.normalized_weights()?;
    let n = ensemble.len();
    let idx = multinomial_indices(&weights, n, rng);
    WeightedEnsemble::equal_weights(idx.iter().map(|&i| ensemble.points()[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{log_partition_finite, moment_map_finite};
    use crate::measures::{DiagonalGaussian, FiniteDistribution, FiniteEmbedding};
    use approx::assert_abs_diff_eq;

    #[test]
    fn untilted_run_is_exact() {
        let pi = DiagonalGaussian::standard(1);
        let cfg = SmcConfig::new(200);
        let rng = StreamRng::seed_from(1).split("untilted");
        let res = run_smc(&pi, &Statistic::identity(1), &[0.0], &cfg, &rng).unwrap();
        assert_eq!(res.log_z_estimate, 0.0);
        assert!(res.stage_diagnostics.iter().all(|d| !d.resampled));
        assert_abs_diff_eq!(
            res.ensemble.effective_sample_size().unwrap(),
            200.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn gaussian_log_normalizer() {
        // ln Z_beta = beta^2/2 for the standard Gaussian with T(x) = x.
        let pi = DiagonalGaussian::standard(1);
        let beta = 1.0;
        let cfg = SmcConfig::new(2000).with_move(MoveConfig::random_walk(1, 1.0));
        let rng = StreamRng::seed_from(42).split("gauss-z");
        let (mean, se, _, _) =
            replicate_log_z(&pi, &Statistic::identity(1), &[beta], &cfg, &rng, 12).unwrap();
        assert!(
            (mean - 0.5).abs() <= 3.0 * se,
            "log Z {mean} not within 3 se ({se}) of 0.5"
        );
    }

    #[test]
    fn finite_embedding_log_normalizer() {
        let dist = FiniteDistribution::from_probs(vec![0.5, 0.5]).unwrap();
        let pi = FiniteEmbedding::new(dist.clone());
        let stat = Statistic::from_table("t01", vec![vec![0.0], vec![1.0]]).unwrap();
        let beta = 3f64.ln();
        let exact = log_partition_finite(&dist, &stat, &[beta]);
        assert_abs_diff_eq!(exact, 2f64.ln(), epsilon = 1e-12);

        let cfg = SmcConfig::new(2000);
        let rng = StreamRng::seed_from(7).split("finite-z");
        let (mean, se, _, _) = replicate_log_z(&pi, &stat, &[beta], &cfg, &rng, 12).unwrap();
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "log Z {mean} not within 3 se ({se}) of {exact}"
        );
    }

    #[test]
    fn final_ensemble_matches_moment_map() {
        let dist = FiniteDistribution::from_probs(vec![0.5, 0.5]).unwrap();
        let pi = FiniteEmbedding::new(dist.clone());
        let stat = Statistic::from_table("t01", vec![vec![0.0], vec![1.0]]).unwrap();
        let beta = [3f64.ln()];
        let oracle = moment_map_finite(&dist, &stat, &beta).unwrap()[0];

        let cfg = SmcConfig::new(4000);
        let rng = StreamRng::seed_from(9).split("finite-moment");
        let res = run_smc(&pi, &stat, &beta, &cfg, &rng).unwrap();
        let m = res.ensemble.empirical_mean(&stat).unwrap()[0];
        let w = res.ensemble.normalized_weights().unwrap();
        let se = res
            .ensemble
            .points()
            .iter()
            .zip(&w)
            .map(|(p, &wi)| (wi * (stat.evaluate(p)[0] - m)).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(
            (m - oracle).abs() <= 3.0 * se.max(1e-6),
            "moment {m} not within 3 se ({se}) of {oracle}"
        );
    }

    #[test]
    fn identical_seeds_identical_results() {
        let pi = DiagonalGaussian::standard(2);
        let stat = Statistic::identity(2);
        let cfg = SmcConfig::new(500).with_move(MoveConfig::random_walk(2, 0.8));
        let rng1 = StreamRng::seed_from(3).split("det");
        let rng2 = StreamRng::seed_from(3).split("det");
        let a = run_smc(&pi, &stat, &[0.4, -0.2], &cfg, &rng1).unwrap();
        let b = run_smc(&pi, &stat, &[0.4, -0.2], &cfg, &rng2).unwrap();
        assert_eq!(a.log_z_estimate.to_bits(), b.log_z_estimate.to_bits());
        assert_eq!(a.ensemble, b.ensemble);
        assert_eq!(a.stage_diagnostics, b.stage_diagnostics);
    }

    #[test]
    fn systematic_resample_uniform_is_near_identity() {
        // Uniform weights: each point replicated to within one count.
        let points: Vec<Point> = (0..10).map(|i| vec![i as f64]).collect();
        let ens = WeightedEnsemble::equal_weights(points).unwrap();
        let mut rng = StreamRng::seed_from(11).split("resample-uniform");
        let out = systematic_resample(&ens, &mut rng).unwrap();
        let mut counts = [0usize; 10];
        for p in out.points() {
            counts[p[0] as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c == 1), "counts {counts:?}");
    }

    #[test]
    fn systematic_resample_degenerate_weight() {
        let points: Vec<Point> = (0..5).map(|i| vec![i as f64]).collect();
        let mut lw = vec![f64::NEG_INFINITY; 5];
        lw[0] = 0.0;
        let ens = WeightedEnsemble::new(points, lw).unwrap();
        let mut rng = StreamRng::seed_from(12).split("resample-degenerate");
        let out = systematic_resample(&ens, &mut rng).unwrap();
        assert!(out.points().iter().all(|p| p[0] == 0.0));
    }

    #[test]
    fn systematic_resample_unbiased_counts() {
        // Weights (0.5, 0.3, 0.2), N = 10: mean replication counts over
        // seeded trials match (5, 3, 2) within 3 binomial standard errors.
        let probs = [0.5, 0.3, 0.2];
        let points: Vec<Point> = (0..3).map(|i| vec![i as f64]).collect();
        let lw: Vec<f64> = probs.iter().map(|p: &f64| p.ln()).collect();
        let ens = WeightedEnsemble::new(points, lw).unwrap();
        let trials = 100_000;
        let base = StreamRng::seed_from(13).split("resample-unbiased");
        let mut totals = [0.0f64; 3];
        for t in 0..trials {
            let mut rng = base.split_index(t as u64);
            let out = systematic_resample_n(&ens, 10, &mut rng).unwrap();
            for p in out.points() {
                totals[p[0] as usize] += 1.0;
            }
        }
        for (i, &p) in probs.iter().enumerate() {
            let mean_count = totals[i] / trials as f64;
            let expected = 10.0 * p;
            // Conservative binomial se for the mean of `trials` counts.
            let se = (10.0 * p * (1.0 - p) / trials as f64).sqrt();
            assert!(
                (mean_count - expected).abs() <= 3.0 * se,
                "atom {i}: mean count {mean_count} vs {expected} (se {se})"
            );
        }
    }

    #[test]
    fn stalled_move_kernel_warns() {
        // An absurd proposal scale drives acceptance to zero; after three
        // consecutive starved stages the run carries a warning.
        let pi = DiagonalGaussian::standard(1);
        let mut mv = MoveConfig::random_walk(1, 1e9);
        mv.adapt_scale = false;
        let cfg = SmcConfig::new(300).with_move(mv);
        let rng = StreamRng::seed_from(10).split("stall");
        let res = run_smc(&pi, &Statistic::identity(1), &[1.0], &cfg, &rng).unwrap();
        assert!(
            res.warnings.iter().any(|w| w.contains("acceptance below 1%")),
            "warnings: {:?}",
            res.warnings
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = SmcConfig::new(10);
        cfg.temperature_ladder = vec![0.0, 0.5, 0.5, 1.0];
        assert!(cfg.validate().is_err());
        cfg.temperature_ladder = vec![0.1, 1.0];
        assert!(cfg.validate().is_err());
        cfg.temperature_ladder = uniform_ladder(5);
        cfg.ess_threshold = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn result_record_round_trip() {
        let pi = DiagonalGaussian::standard(1);
        let cfg = SmcConfig::new(100);
        let rng = StreamRng::seed_from(21).split("record");
        let res = run_smc(&pi, &Statistic::identity(1), &[0.5], &cfg, &rng).unwrap();
        let rec = res.record();
        let json = serde_json::to_string(&rec).unwrap();
        let back: SmcResultRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(rec, back);
        let csv = res.stage_diagnostics_csv();
        assert!(csv.starts_with("stage,lambda,ess,resampled,acceptance\n"));
        assert_eq!(csv.lines().count(), 21);
    }
}
