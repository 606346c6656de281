//! Core probability objects: finite distributions, weighted ensembles,
//! statistics, and the sampler/log-density contract for continuous
//! reference measures.
//!
//! Discrete spaces are represented by [`FiniteDistribution`] and handled
//! with exact arithmetic; continuous spaces go through [`SampleableModel`]
//! and Monte Carlo. All weight arithmetic is done in log space: likelihood
//! ratios in this problem class routinely span hundreds of orders of
//! magnitude.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{g12, logsumexp};
use crate::rng::StreamRng;

/// A point of the state space: a fixed-dimension real vector.
pub type Point = Vec<f64>;

/// Shared evaluation closure of a [`Statistic`].
type StatFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Tolerance on `|sum(probs) - 1|` accepted at construction.
pub const PROB_SUM_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// FiniteDistribution
// ---------------------------------------------------------------------------

/// A probability vector on labelled atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    atoms: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Builds a distribution, validating non-negativity, normalization to
    /// within `1e-12`, and distinctness of atom labels.
    pub fn new(atoms: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if atoms.len() != probs.len() {
            return Err(Error::invalid("atoms and probs must have equal length"));
        }
        if probs.is_empty() {
            return Err(Error::invalid("a distribution needs at least one atom"));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0 || !p.is_finite()) {
            return Err(Error::invalid("probabilities must be finite and >= 0"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invalid(format!(
                "probabilities sum to {sum}, not 1 within {PROB_SUM_TOL}"
            )));
        }
        let distinct: HashSet<&str> = atoms.iter().map(|a| a.as_str()).collect();
        if distinct.len() != atoms.len() {
            return Err(Error::invalid("atom labels must be distinct"));
        }
        Ok(FiniteDistribution { atoms, probs })
    }

    /// Distribution on atoms `"0", "1", ...`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let atoms = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::new(atoms, probs)
    }

    /// Normalizes arbitrary non-negative weights into a distribution.
    pub fn from_weights(atoms: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| w.is_nan() || w < 0.0 || !w.is_finite()) {
            return Err(Error::invalid("weights must be finite and >= 0"));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::invalid("weights must have a positive sum"));
        }
        let probs = weights.iter().map(|w| w / sum).collect();
        Self::new(atoms, probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_probs(vec![1.0 / n as f64; n])
    }

    /// Point mass on atom `index` of an `n`-atom space.
    pub fn dirac(n: usize, index: usize) -> Result<Self> {
        let mut probs = vec![0.0; n];
        if index >= n {
            return Err(Error::invalid("dirac index out of range"));
        }
        probs[index] = 1.0;
        Self::from_probs(probs)
    }

    /// Distribution on an `rows x cols` product grid with row-major cell
    /// probabilities and labels `r{i}c{j}`.
    pub fn product_grid(rows: usize, cols: usize, cell_probs: Vec<f64>) -> Result<Self> {
        if cell_probs.len() != rows * cols {
            return Err(Error::invalid("cell_probs must have rows*cols entries"));
        }
        let atoms = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| format!("r{i}c{j}")))
            .collect();
        Self::new(atoms, cell_probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn same_atoms(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }

    /// Embedding of atom `i` as the real point `[i]`, so that a
    /// [`Statistic`] can be evaluated on discrete spaces.
    pub fn embedded_points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| vec![i as f64]).collect()
    }

    /// Draws an atom index by inverse-CDF.
    pub fn sample_index(&self, rng: &mut StreamRng) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.len() - 1
    }

    /// CSV serialization with header `atom,prob`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("atom,prob\n");
        for (a, &p) in self.atoms.iter().zip(&self.probs) {
            out.push_str(&format!("{},{}\n", a, g12(p)));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Statistic
// ---------------------------------------------------------------------------

/// A vector-valued statistic `T: E -> R^d`, total on the support of the
/// reference, with an optional declared sup-norm bound.
#[derive(Clone)]
pub struct Statistic {
    name: String,
    dimension: usize,
    declared_bound: Option<f64>,
    eval: StatFn,
}

impl std::fmt::Debug for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Statistic")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("declared_bound", &self.declared_bound)
            .finish()
    }
}

impl Statistic {
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Statistic {
            name: name.into(),
            dimension,
            declared_bound: None,
            eval: Arc::new(eval),
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.declared_bound = Some(bound);
        self
    }

    /// `T(x) = x`.
    pub fn identity(dimension: usize) -> Self {
        Statistic::new("identity", dimension, |x: &[f64]| x.to_vec())
    }

    /// `T(x) = [x_i]`.
    pub fn coordinate(index: usize) -> Self {
        Statistic::new(format!("coordinate_{index}"), 1, move |x: &[f64]| {
            vec![x[index]]
        })
    }

    /// Statistic on a finite space given by a per-atom value table; points
    /// are atom embeddings `[i]`.
    pub fn from_table(name: impl Into<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("statistic table must be non-empty"));
        }
        let d = values[0].len();
        if d == 0 || values.iter().any(|v| v.len() != d) {
            return Err(Error::invalid("statistic table rows must share a dimension > 0"));
        }
        let bound = values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        Ok(Statistic::new(name, d, move |x: &[f64]| {
            let i = x[0].round() as usize;
            values[i].clone()
        })
        .with_bound(bound))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn declared_bound(&self) -> Option<f64> {
        self.declared_bound
    }

    pub fn evaluate(&self, point: &[f64]) -> Vec<f64> {
        let v = (self.eval)(point);
        debug_assert_eq!(v.len(), self.dimension);
        v
    }

    /// The statistic evaluated on every atom embedding of a finite space.
    pub fn table_for(&self, pi: &FiniteDistribution) -> Vec<Vec<f64>> {
        pi.embedded_points()
            .iter()
            .map(|p| self.evaluate(p))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// SampleableModel
// ---------------------------------------------------------------------------

/// A reference measure with a sampler and an unnormalized log-density
/// against the ambient dominating measure (Lebesgue for continuous models,
/// counting measure for embedded discrete ones). Returns `-inf` exactly on
/// null sets of the model.
pub trait SampleableModel: Send + Sync {
    fn dimension(&self) -> usize;
    fn draw(&self, rng: &mut StreamRng) -> Point;
    fn log_density_wrt_reference(&self, point: &[f64]) -> f64;
}

// ---------------------------------------------------------------------------
// WeightedEnsemble
// ---------------------------------------------------------------------------

/// Importance-sampling output: points with unnormalized log-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnsemble {
    points: Vec<Point>,
    log_weights: Vec<f64>,
}

impl WeightedEnsemble {
    pub fn new(points: Vec<Point>, log_weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("an ensemble needs at least one point"));
        }
        if points.len() != log_weights.len() {
            return Err(Error::invalid("points and log_weights must have equal length"));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::invalid("all points must share one dimension"));
        }
        if log_weights.iter().any(|w| w.is_nan()) {
            return Err(Error::invalid("log-weights must not be NaN"));
        }
        Ok(WeightedEnsemble {
            points,
            log_weights,
        })
    }

    /// Equal-weight ensemble.
    pub fn equal_weights(points: Vec<Point>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Rescales log-weights so that their log-sum-exp is 0; relative
    /// weights are unchanged.
    pub fn normalized(&self) -> Result<Self> {
        let lse = logsumexp(&self.log_weights);
        if lse == f64::NEG_INFINITY {
            return Err(Error::AllWeightsDegenerate);
        }
        let log_weights = self.log_weights.iter().map(|&w| w - lse).collect();
        Ok(WeightedEnsemble {
            points: self.points.clone(),
            log_weights,
        })
    }

    /// Normalized probability weights `W^n`.
    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        let lse = logsumexp(&self.log_weights);
        if lse == f64::NEG_INFINITY {
            return Err(Error::AllWeightsDegenerate);
        }
        Ok(self.log_weights.iter().map(|&w| (w - lse).exp()).collect())
    }

    /// Self-normalized importance-sampling estimate of the mean of `stat`.
    ///
    /// Accumulation is centered on the first statistic value, so a constant
    /// statistic is reproduced exactly.
    pub fn empirical_mean(&self, stat: &Statistic) -> Result<Vec<f64>> {
        let w = self.normalized_weights()?;
        let center = stat.evaluate(&self.points[0]);
        let mut mean = vec![0.0; stat.dimension()];
        for (wi, p) in w.iter().zip(&self.points) {
            if *wi == 0.0 {
                continue;
            }
            for ((m, t), c) in mean.iter_mut().zip(stat.evaluate(p)).zip(&center) {
                *m += wi * (t - c);
            }
        }
        for (m, c) in mean.iter_mut().zip(&center) {
            *m += c;
        }
        Ok(mean)
    }

    /// Effective sample size `(sum w)^2 / sum w^2`, computed in log space;
    /// equals `N` iff the weights are uniform. Always in `[1, N]`.
    pub fn effective_sample_size(&self) -> Result<f64> {
        let lse1 = logsumexp(&self.log_weights);
        if lse1 == f64::NEG_INFINITY {
            return Err(Error::AllWeightsDegenerate);
        }
        let doubled: Vec<f64> = self.log_weights.iter().map(|&w| 2.0 * w).collect();
        let lse2 = logsumexp(&doubled);
        let ess = (2.0 * lse1 - lse2).exp();
        Ok(ess.clamp(1.0, self.len() as f64))
    }

    /// CSV serialization with columns `point_0..point_{d-1},log_weight`.
    pub fn to_csv(&self) -> String {
        let d = self.dimension();
        let mut out = String::new();
        for j in 0..d {
            out.push_str(&format!("point_{j},"));
        }
        out.push_str("log_weight\n");
        for (p, &w) in self.points.iter().zip(&self.log_weights) {
            for x in p {
                out.push_str(&g12(*x));
                out.push(',');
            }
            out.push_str(&g12(w));
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Concrete models
// ---------------------------------------------------------------------------

/// Diagonal Gaussian on `R^d`; log-density is the normalized density with
/// respect to Lebesgue measure.
#[derive(Debug, Clone)]
pub struct DiagonalGaussian {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl DiagonalGaussian {
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() || mean.is_empty() {
            return Err(Error::invalid("mean and std must share a dimension > 0"));
        }
        if std.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return Err(Error::invalid("std entries must be finite and > 0"));
        }
        Ok(DiagonalGaussian { mean, std })
    }

    pub fn standard(dimension: usize) -> Self {
        DiagonalGaussian {
            mean: vec![0.0; dimension],
            std: vec![1.0; dimension],
        }
    }
}

impl SampleableModel for DiagonalGaussian {
    fn dimension(&self) -> usize {
        self.mean.len()
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        self.mean
            .iter()
            .zip(&self.std)
            .map(|(&m, &s)| m + s * rng.standard_normal())
            .collect()
    }

    fn log_density_wrt_reference(&self, point: &[f64]) -> f64 {
        const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
        point
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| {
                let z = (x - m) / s;
                -0.5 * z * z - s.ln() - LN_SQRT_2PI
            })
            .sum()
    }
}

/// Uniform distribution on the unit cube `[0,1]^d`.
#[derive(Debug, Clone)]
pub struct UnitCubeUniform {
    dimension: usize,
}

impl UnitCubeUniform {
    pub fn new(dimension: usize) -> Self {
        UnitCubeUniform { dimension }
    }
}

impl SampleableModel for UnitCubeUniform {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        (0..self.dimension).map(|_| rng.uniform()).collect()
    }

    fn log_density_wrt_reference(&self, point: &[f64]) -> f64 {
        if point.iter().all(|&x| (0.0..=1.0).contains(&x)) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// A finite distribution embedded as a categorical sampler on the points
/// `[0], [1], ...`; log-density is taken against counting measure.
#[derive(Debug, Clone)]
pub struct FiniteEmbedding {
    dist: FiniteDistribution,
}

impl FiniteEmbedding {
    pub fn new(dist: FiniteDistribution) -> Self {
        FiniteEmbedding { dist }
    }

    pub fn distribution(&self) -> &FiniteDistribution {
        &self.dist
    }
}

impl SampleableModel for FiniteEmbedding {
    fn dimension(&self) -> usize {
        1
    }

    fn draw(&self, rng: &mut StreamRng) -> Point {
        vec![self.dist.sample_index(rng) as f64]
    }

    fn log_density_wrt_reference(&self, point: &[f64]) -> f64 {
        let i = point[0].round();
        if i < 0.0 || i >= self.dist.len() as f64 || (point[0] - i).abs() > 1e-9 {
            return f64::NEG_INFINITY;
        }
        let p = self.dist.prob(i as usize);
        if p > 0.0 {
            p.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn finite_distribution_validates() {
        assert!(FiniteDistribution::from_probs(vec![0.5, 0.5]).is_ok());
        assert!(FiniteDistribution::from_probs(vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::from_probs(vec![-0.1, 1.1]).is_err());
        assert!(
            FiniteDistribution::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err(),
            "duplicate atoms must be rejected"
        );
    }

    #[test]
    fn normalize_uniform_log_weights() {
        let ens =
            WeightedEnsemble::new(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]], vec![0.0; 4])
                .unwrap();
        let w = ens.normalized_weights().unwrap();
        for wi in w {
            assert_abs_diff_eq!(wi, 0.25, epsilon = 1e-15);
        }
        let n = ens.normalized().unwrap();
        assert_abs_diff_eq!(logsumexp(n.log_weights()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn normalize_one_to_three_ratio() {
        let ens = WeightedEnsemble::new(vec![vec![0.0], vec![1.0]], vec![0.0, 3f64.ln()]).unwrap();
        let w = ens.normalized_weights().unwrap();
        assert_abs_diff_eq!(w[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn normalize_extreme_log_weight_no_overflow() {
        // Exact rational expectation: weights are exactly (0, 1) because
        // exp(-1e308) underflows to zero while log-sum-exp stays finite.
        let ens = WeightedEnsemble::new(vec![vec![0.0], vec![1.0]], vec![-1e308, 0.0]).unwrap();
        let w = ens.normalized_weights().unwrap();
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 1.0);
    }

    #[test]
    fn normalize_all_degenerate_errors() {
        let ens =
            WeightedEnsemble::new(vec![vec![0.0]], vec![f64::NEG_INFINITY]).unwrap();
        assert!(matches!(
            ens.normalized(),
            Err(Error::AllWeightsDegenerate)
        ));
    }

    #[test]
    fn empirical_mean_identity_and_midpoint() {
        let single = WeightedEnsemble::new(vec![vec![2.5, -1.0]], vec![0.0]).unwrap();
        let m = single.empirical_mean(&Statistic::identity(2)).unwrap();
        assert_eq!(m, vec![2.5, -1.0]);

        let two = WeightedEnsemble::new(vec![vec![0.0], vec![2.0]], vec![0.0, 0.0]).unwrap();
        let m = two.empirical_mean(&Statistic::identity(1)).unwrap();
        assert_abs_diff_eq!(m[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn empirical_mean_gibbs_tilted_gaussian() {
        // pi = N(0,1), weights prop to exp(0.5 x): tilted mean is 0.5.
        let beta = 0.5;
        let n = 100_000;
        let model = DiagonalGaussian::standard(1);
        let mut rng = StreamRng::seed_from(11).split("tilt-test");
        let points: Vec<Point> = (0..n).map(|_| model.draw(&mut rng)).collect();
        let log_weights: Vec<f64> = points.iter().map(|p| beta * p[0]).collect();
        let ens = WeightedEnsemble::new(points, log_weights).unwrap();
        let m = ens.empirical_mean(&Statistic::identity(1)).unwrap()[0];
        // Monte Carlo standard error of the self-normalized estimate.
        let w = ens.normalized_weights().unwrap();
        let se = ens
            .points()
            .iter()
            .zip(&w)
            .map(|(p, &wi)| (wi * (p[0] - m)).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(
            (m - beta).abs() <= 3.0 * se,
            "mean {m} not within 3 se ({se}) of {beta}"
        );
    }

    #[test]
    fn ess_examples() {
        let ens4 = WeightedEnsemble::new(vec![vec![0.0]; 4], vec![0.0; 4]).unwrap();
        assert_abs_diff_eq!(ens4.effective_sample_size().unwrap(), 4.0, epsilon = 1e-12);

        let dirac = WeightedEnsemble::new(
            vec![vec![0.0]; 4],
            vec![0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
        )
        .unwrap();
        assert_abs_diff_eq!(dirac.effective_sample_size().unwrap(), 1.0, epsilon = 1e-12);

        // Weights (0.5, 0.25, 0.25): ESS = 1/(0.25 + 0.0625 + 0.0625) = 8/3.
        let ens = WeightedEnsemble::new(
            vec![vec![0.0]; 3],
            vec![0.5f64.ln(), 0.25f64.ln(), 0.25f64.ln()],
        )
        .unwrap();
        assert_abs_diff_eq!(
            ens.effective_sample_size().unwrap(),
            8.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ensemble_csv_round_shape() {
        let ens = WeightedEnsemble::new(vec![vec![1.0, 2.0]], vec![-0.5]).unwrap();
        let csv = ens.to_csv();
        assert!(csv.starts_with("point_0,point_1,log_weight\n"));
        assert!(csv.contains("1,2,-0.5"));
    }

    #[test]
    fn finite_embedding_density() {
        let d = FiniteDistribution::from_probs(vec![0.25, 0.75]).unwrap();
        let m = FiniteEmbedding::new(d);
        assert_abs_diff_eq!(
            m.log_density_wrt_reference(&[1.0]),
            0.75f64.ln(),
            epsilon = 1e-15
        );
        assert_eq!(m.log_density_wrt_reference(&[5.0]), f64::NEG_INFINITY);
    }

    proptest! {
        // Additive shifts of the log-weights leave normalized weights, the
        // empirical mean, and the ESS unchanged.
        #[test]
        fn shift_invariance(
            raw in proptest::collection::vec((-5.0f64..5.0, -10.0f64..10.0), 2..20),
            shift in -200.0f64..200.0,
        ) {
            let points: Vec<Point> = raw.iter().map(|(x, _)| vec![*x]).collect();
            let lw: Vec<f64> = raw.iter().map(|(_, w)| *w).collect();
            let shifted: Vec<f64> = lw.iter().map(|w| w + shift).collect();
            let a = WeightedEnsemble::new(points.clone(), lw).unwrap();
            let b = WeightedEnsemble::new(points, shifted).unwrap();

            let (wa, wb) = (a.normalized_weights().unwrap(), b.normalized_weights().unwrap());
            for (x, y) in wa.iter().zip(&wb) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            let stat = Statistic::identity(1);
            let (ma, mb) = (a.empirical_mean(&stat).unwrap(), b.empirical_mean(&stat).unwrap());
            prop_assert!((ma[0] - mb[0]).abs() <= 1e-12);
            let (ea, eb) = (
                a.effective_sample_size().unwrap(),
                b.effective_sample_size().unwrap(),
            );
            prop_assert!((ea - eb).abs() <= 1e-12 * ea.max(1.0));
        }

        // ESS is always within [1, N].
        #[test]
        fn ess_bounds(lw in proptest::collection::vec(-30.0f64..30.0, 1..50)) {
            let n = lw.len();
            let points = vec![vec![0.0]; n];
            let ens = WeightedEnsemble::new(points, lw).unwrap();
            let ess = ens.effective_sample_size().unwrap();
            prop_assert!(ess >= 1.0 && ess <= n as f64);
        }

        // The empirical mean of a constant statistic is that constant exactly.
        #[test]
        fn constant_statistic_exact(
            lw in proptest::collection::vec(-10.0f64..10.0, 1..30),
            c in -7.0f64..7.0,
        ) {
            let n = lw.len();
            let ens = WeightedEnsemble::new(vec![vec![0.0]; n], lw).unwrap();
            let stat = Statistic::new("const", 1, move |_: &[f64]| vec![c]);
            let m = ens.empirical_mean(&stat).unwrap();
            prop_assert_eq!(m[0], c);
        }
    }
}
