//! Experiment runner for the `entis` library.
//!
//! Every subcommand reads one flat TOML config (unknown keys rejected),
//! derives all randomness from the single `seed` through named stream
//! splits, and writes CSV/JSON artifacts into the output directory.
//! Identical config and seed produce byte-identical files.
//!
//! Exit codes: 0 on success, 2 on configuration/validation errors, 3 on
//! numerical failures.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use entis::adaptive::{run_cross_entropy, CeVariant, CrossEntropyConfig, FiniteCeProblem};
use entis::bounds::{
    c_constant, empirical_critical_n, three_point_report, BoundReport, BoundVariant, ConstantY,
    CriticalSampleSize, DeviationProbeConfig, DiscreteY, ThreePointParams, ThreePointReport,
    UnitMeanSampler,
};
use entis::entropy::{
    log_likelihood_variance_mc, relative_entropy_mc, renyi_entropy_mc, EntropyReport,
    EstimatorKind,
};
use entis::error::Error;
use entis::gibbs::{solve_convex_constraint, ConvexMomentSet, GibbsModelRecord};
use entis::measures::{
    DiagonalGaussian, FiniteDistribution, FiniteEmbedding, SampleableModel, Statistic,
    WeightedEnsemble,
};
use entis::numeric::g12;
use entis::rng::StreamRng;
use entis::smc::{run_smc_replicated, MoveConfig, ResamplingScheme, SmcConfig};
use entis::wlc::{two_atom_argmin, two_atom_regime, TwoAtomRegime};

// ---------------------------------------------------------------------------
// CLI surface
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "entis",
    about = "Entropy-based importance sampling experiments",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relative entropy and Renyi profile of a distribution pair.
    Entropy(RunArgs),
    /// Entropy-vs-variance sweep over three-point likelihood families.
    BoundSweep(RunArgs),
    /// Two-atom worst-case proposal sweep over entropy budgets.
    WlcSweep(RunArgs),
    /// Entropy projection of a finite reference onto a moment constraint.
    GibbsFit(RunArgs),
    /// Tempered SMC run toward a Gibbs tilt.
    Smc(RunArgs),
    /// Cross-entropy adaptive proposal fitting.
    CrossEntropy(RunArgs),
    /// Empirical critical sample size against the entropy bracket.
    Nstar(RunArgs),
}

#[derive(Debug, Parser)]
pub struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Process exit classification.
#[derive(Debug)]
pub enum RunError {
    /// Bad configuration or invalid inputs (exit code 2).
    Config(String),
    /// A numerical routine failed (exit code 3).
    Numerical(String),
    /// Filesystem trouble (exit code 3).
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) | RunError::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Config(m) | RunError::Numerical(m) | RunError::Io(m) => m,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_) | Error::DomainError { .. } | Error::MismatchedSupport => {
                RunError::Config(e.to_string())
            }
            other => RunError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

/// Verifies that an emitted JSON artifact re-parses into its originating
/// type; used by the integration tests' round-trip checks.
pub fn reparses(name: &str, json: &str) -> bool {
    match name {
        "entropy_report.json" => serde_json::from_str::<EntropyReport>(json).is_ok(),
        "gibbs_model.json" => serde_json::from_str::<GibbsFitOutput>(json).is_ok(),
        "smc_result.json" => serde_json::from_str::<entis::smc::SmcResultRecord>(json).is_ok(),
        "cross_entropy.json" => serde_json::from_str::<CrossEntropyOutput>(json).is_ok(),
        "nstar.json" => serde_json::from_str::<NstarOutput>(json).is_ok(),
        _ => false,
    }
}

/// Executes one subcommand; returns the list of files written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, RunError> {
    match cli.command {
        Command::Entropy(args) => cmd_entropy(&args),
        Command::BoundSweep(args) => cmd_bound_sweep(&args),
        Command::WlcSweep(args) => cmd_wlc_sweep(&args),
        Command::GibbsFit(args) => cmd_gibbs_fit(&args),
        Command::Smc(args) => cmd_smc(&args),
        Command::CrossEntropy(args) => cmd_cross_entropy(&args),
        Command::Nstar(args) => cmd_nstar(&args),
    }
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| {
        // toml errors carry line/column spans.
        RunError::Config(format!("{}: {e}", path.display()))
    })
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, RunError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, RunError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| RunError::Io(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------------------
// Shared config fragments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DistSpec {
    Finite {
        probs: Vec<f64>,
        #[serde(default)]
        atoms: Option<Vec<String>>,
    },
    Gaussian {
        mean: Vec<f64>,
        std: Vec<f64>,
    },
}

impl DistSpec {
    fn finite(&self) -> Result<FiniteDistribution, RunError> {
        match self {
            DistSpec::Finite { probs, atoms } => Ok(match atoms {
                Some(a) => FiniteDistribution::new(a.clone(), probs.clone())?,
                None => FiniteDistribution::from_probs(probs.clone())?,
            }),
            DistSpec::Gaussian { .. } => Err(RunError::Config(
                "expected a finite distribution here".into(),
            )),
        }
    }

    fn gaussian(&self) -> Result<DiagonalGaussian, RunError> {
        match self {
            DistSpec::Gaussian { mean, std } => {
                Ok(DiagonalGaussian::new(mean.clone(), std.clone())?)
            }
            DistSpec::Finite { .. } => Err(RunError::Config(
                "expected a gaussian distribution here".into(),
            )),
        }
    }

    fn is_finite_kind(&self) -> bool {
        matches!(self, DistSpec::Finite { .. })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StatSpec {
    Identity { dimension: usize },
    Coordinate { index: usize },
    Table { values: Vec<Vec<f64>> },
}

impl StatSpec {
    fn build(&self) -> Result<Statistic, RunError> {
        Ok(match self {
            StatSpec::Identity { dimension } => Statistic::identity(*dimension),
            StatSpec::Coordinate { index } => Statistic::coordinate(*index),
            StatSpec::Table { values } => Statistic::from_table("table", values.clone())?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ConstraintSpec {
    Singleton { point: Vec<f64> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Halfspaces { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
}

impl ConstraintSpec {
    fn build(&self) -> ConvexMomentSet {
        match self.clone() {
            ConstraintSpec::Singleton { point } => ConvexMomentSet::Singleton { point },
            ConstraintSpec::Box { lo, hi } => ConvexMomentSet::Box { lo, hi },
            ConstraintSpec::Ball { center, radius } => ConvexMomentSet::Ball { center, radius },
            ConstraintSpec::Halfspaces { normals, offsets } => {
                ConvexMomentSet::Halfspaces { normals, offsets }
            }
        }
    }
}

fn effective_seed(config_seed: u64, args: &RunArgs) -> u64 {
    args.seed.unwrap_or(config_seed)
}

// ---------------------------------------------------------------------------
// entropy
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntropyConfig {
    seed: u64,
    target: DistSpec,
    proposal: DistSpec,
    #[serde(default)]
    renyi: RenyiSpec,
    #[serde(default)]
    mc: Option<McSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenyiSpec {
    #[serde(default)]
    orders: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct McSpec {
    draws: usize,
}

fn cmd_entropy(args: &RunArgs) -> Result<Vec<PathBuf>, RunError> {
    let cfg: EntropyConfig = load_config(&args.config)?;
    let seed = effective_seed(cfg.seed, args);
    let orders = cfg
        .renyi
        .orders
        .clone()
        .unwrap_or_else(EntropyReport::default_orders);

    let report = if cfg.target.is_finite_kind() && cfg.proposal.is_finite_kind() {
        let eta = cfg.target.finite()?;
        let mu = cfg.proposal.finite()?;
        EntropyReport::exact(&eta, &mu, &orders)?
    } else {
        let draws = cfg
            .mc
            .as_ref()
            .ok_or_else(|| {
                RunError::Config("continuous pairs need an [mc] section with draws".into())
            })?
            .draws;
        let eta = cfg.target.gaussian()?;
        let mu = cfg.proposal.gaussian()?;
        let rng = StreamRng::seed_from(seed).split("entropy");
        let init = rng.split("draws");
        let points: Vec<_> = (0..draws)
            .map(|i| eta.draw(&mut init.split_index(i as u64)))
            .collect();
        let ens = WeightedEnsemble::equal_weights(points)?;
        let le = |x: &[f64]| eta.log_density_wrt_reference(x);
        let lm = |x: &[f64]| mu.log_density_wrt_reference(x);
        let (kl, se) = relative_entropy_mc(&le, &lm, &ens)?;
        let mut renyi = Vec::with_capacity(orders.len());
        for &a in &orders {
            renyi.push((a, renyi_entropy_mc(&le, &lm, &ens, a)?));
        }
        EntropyReport {
            kl,
            renyi,
            log_likelihood_variance: log_likelihood_variance_mc(&le, &lm, &ens)?,
            estimator: EstimatorKind::MonteCarlo {
                draws,
                std_error: se,
            },
        }
    };

    let mut csv = String::from("alpha,value\n");
    for (a, v) in &report.renyi {
        csv.push_str(&format!("{},{}\n", g12(*a), g12(*v)));
    }
    Ok(vec![
        write_output(&args.out, "entropy_report.json", &to_json(&report)?)?,
        write_output(&args.out, "renyi_profile.csv", &csv)?,
    ])
}

// ---------------------------------------------------------------------------
// bound-sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundSweepConfig {
    seed: u64,
    #[serde(default)]
    c: Option<f64>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    p_alpha: Option<f64>,
    #[serde(default)]
    sweep: Option<SweepSpec>,
    #[serde(default)]
    rows: Vec<RowSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    k_min: u32,
    k_max: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowSpec {
    l1: f64,
    r: f64,
    alpha: f64,
}

fn resolve_constant(
    c: Option<f64>,
    delta: Option<f64>,
    p_alpha: Option<f64>,
) -> Result<f64, RunError> {
    match (c, delta, p_alpha) {
        (Some(c), None, None) => Ok(c),
        (None, Some(d), Some(p)) => Ok(c_constant(d, p)?),
        (None, None, None) => Ok(1.0),
        _ => Err(RunError::Config(
            "give either c, or both delta and p_alpha, or neither".into(),
        )),
    }
}

fn cmd_bound_sweep(args: &RunArgs) -> Result<Vec<PathBuf>, RunError> {
    let cfg: BoundSweepConfig = load_config(&args.config)?;
    let _ = effective_seed(cfg.seed, args); // deterministic command; seed kept for uniformity
    let c = resolve_constant(cfg.c, cfg.delta, cfg.p_alpha)?;
    let mut reports: Vec<ThreePointReport> = Vec::new();
    if let Some(sweep) = &cfg.sweep {
        if sweep.k_max < sweep.k_min {
            return Err(RunError::Config("sweep needs k_min <= k_max".into()));
        }
        reports.extend(entis::bounds::three_point_sweep(
            sweep.k_min..=sweep.k_max,
            c,
        )?);
    }
    for row in &cfg.rows {
        let params = ThreePointParams::new(row.l1, row.r, row.alpha)?;
        reports.push(three_point_report(&params, c)?);
    }
    if reports.is_empty() {
        return Err(RunError::Config(
            "config needs a [sweep] block or at least one [[rows]] entry".into(),
        ));
    }
    let mut csv = String::from(ThreePointReport::CSV_HEADER);
    csv.push('\n');
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    Ok(vec![write_output(&args.out, "bound_sweep.csv", &csv)?])
}

// ---------------------------------------------------------------------------
// wlc-sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WlcSweepConfig {
    seed: u64,
    pi: Vec<f64>,
    h_min: f64,
    h_max: f64,
    steps: usize,
}

fn cmd_wlc_sweep(args: &RunArgs) -> Result<Vec<PathBuf>, RunError> {
    let cfg: WlcSweepConfig = load_config(&args.config)?;
    let _ = effective_seed(cfg.seed, args);
    if cfg.pi.len() != 2 {
        return Err(RunError::Config("wlc-sweep expects a two-atom pi".into()));
    }
    if cfg.steps < 2 || cfg.h_max <= cfg.h_min || cfg.h_min < 0.0 {
        return Err(RunError::Config("need 0 <= h_min < h_max and steps >= 2".into()));
    }
    let pi = FiniteDistribution::from_probs(cfg.pi.clone())?;
    let mut csv = String::from("h,regime,argmin_0,argmin_1,wlc_value\n");
    for i in 0..cfg.steps {
        let h = cfg.h_min + (cfg.h_max - cfg.h_min) * i as f64 / (cfg.steps - 1) as f64;
        let regime = match two_atom_regime(&pi, h)? {
            TwoAtomRegime::Reference => "reference",
            TwoAtomRegime::Interior => "interior",
            TwoAtomRegime::Uniform => "uniform",
        };
        let sol = two_atom_argmin(&pi, h)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            g12(h),
            regime,
            g12(sol.proposal_probs[0]),
            g12(sol.proposal_probs[1]),
            g12(sol.wlc_value),
        ));
    }
    Ok(vec![write_output(&args.out, "wlc_sweep.csv", &csv)?])
}

// ---------------------------------------------------------------------------
// gibbs-fit
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GibbsFitConfig {
    seed: u64,
    pi: Vec<f64>,
    stat: Vec<Vec<f64>>,
    constraint: ConstraintSpec,
}

#[derive(Debug, Serialize, Deserialize)]
struct GibbsFitOutput {
    model: GibbsModelRecord,
    achieved_moment: Vec<f64>,
    entropy_vs_reference: f64,
}

fn cmd_gibbs_fit(args: &RunArgs) -> Result<Vec<PathBuf>, RunError> {
    let cfg: GibbsFitConfig = load_config(&args.config)?;
    let _ = effective_seed(cfg.seed, args);
    let pi = FiniteDistribution::from_probs(cfg.pi.clone())?;
    let stat = Statistic::from_table("table", cfg.stat.clone())?;
    let set = cfg.constraint.build();
    let model = solve_convex_constraint(&pi, &stat, &set)?;
    let out = GibbsFitOutput {
        model: model.record(),
        achieved_moment: model.moment_map()?,
        entropy_vs_reference: model.entropy_vs_reference(),
    };
    Ok(vec![write_output(
        &args.out,
        "gibbs_model.json",
        &to_json(&out)?,
    )?])
}

// ---------------------------------------------------------------------------
// smc
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SmcCommandConfig {
    seed: u64,
    particles: usize,
    #[serde(default = "default_stages")]
    stages: usize,
    #[serde(default = "default_ess_threshold")]
    ess_threshold: f64,
    #[serde(default = "default_replicas")]
    replicas: usize,
    beta: Vec<f64>,
    reference: DistSpec,
    statistic: StatSpec,
    #[serde(default)]
    resampling: Option<ResamplingSpec>,
    #[serde(default, rename = "move")]
    move_spec: Option<MoveSpec>,
}

fn default_stages() -> usize {
    20
}
fn default_ess_threshold() -> f64 {
    0.5
}
fn default_replicas() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ResamplingSpec {
    Systematic,
    Multinomial,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveSpec {
    steps: usize,
    scale: f64,
    #[serde(default = "default_true")]
    adapt: bool,
}

fn default_true() -> bool {
    true
}

fn cmd_smc(args: &RunArgs) -> Result<Vec<PathBuf>, RunError> {
    let cfg: SmcCommandConfig = load_config(&args.config)?;
    let seed = effective_seed(cfg.seed, args);

    let model: Box<dyn SampleableModel> = match &cfg.reference {
        DistSpec::Finite { .. } => Box::new(FiniteEmbedding::new(cfg.reference.finite()?)),
        DistSpec::Gaussian { .. } => Box::new(cfg.reference.gaussian()?),
    };
    let stat = cfg.statistic.build()?;
    let mut smc_cfg = SmcConfig::new(cfg.particles);
    smc_cfg.temperature_ladder = entis::smc::uniform_ladder(cfg.stages);
    smc_cfg.ess_threshold = cfg.ess_threshold;
    if let Some(r) = cfg.resampling {
        smc_cfg.resampling = match r {
            ResamplingSpec::Systematic => ResamplingScheme::Systematic,
            ResamplingSpec::Multinomial => ResamplingScheme::Multinomial,
        };
    }
    if let Some(mv) = &cfg.move_spec {
        let mut mc = MoveConfig::random_walk(mv.steps, mv.scale);
        mc.adapt_scale = mv.adapt;
        smc_cfg = smc_cfg.with_move(mc);
    }

    let rng = StreamRng::seed_from(seed).split("smc");
    let result = run_smc_replicated(model.as_ref(), &stat, &cfg.beta, &smc_cfg, &rng, cfg.replicas)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(vec![
        write_output(&args.out, "smc_result.json", &to_json(&result.record())?)?,
        write_output(
            &args.out,
            "stage_diagnostics.csv",
            &result.stage_diagnostics_csv(),
        )?,
        write_output(&args.out, "ensemble.csv", &result.ensemble.to_csv())?,
    ])
}

// ---------------------------------------------------------------------------
// cross-entropy
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossEntropyCommandConfig {
    seed: u64,
    pi: Vec<f64>,
    stat: Vec<Vec<f64>>,
    target: TargetSpec,
    sample_size: usize,
    #[serde(default = "default_iterations")]
    iterations: usize,
    #[serde(default = "default_variant")]
    variant: VariantSpec,
    #[serde(default = "default_z")]
    z_multiplier: f64,
    #[serde(default = "default_bootstrap")]
    bootstrap: usize,
}

fn default_iterations() -> usize {
    50
}
fn default_variant() -> VariantSpec {
    VariantSpec::Moment
}
fn default_z() -> f64 {
    3.0
}
fn default_bootstrap() -> usize {
    200
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariantSpec {
    Moment,
    Confidence,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TargetSpec {
    /// Target density `exp<beta, T>` against the reference.
    Tilt { beta: Vec<f64> },
    /// Explicit per-atom unnormalized log-density against the reference.
    LogDensity { values: Vec<f64> },
}

#[derive(Debug, Serialize, Deserialize)]
struct CrossEntropyOutput {
    final_model: GibbsModelRecord,
    final_moment: Vec<f64>,
    iterations: usize,
    converged: bool,
    warnings: Vec<String>,
}

fn cmd_cross_entropy(args: &RunArgs) -> Result<Vec<PathBuf>, RunError> {
    let cfg: CrossEntropyCommandConfig = load_config(&args.config)?;
    let seed = effective_seed(cfg.seed, args);
    let pi = FiniteDistribution::from_probs(cfg.pi.clone())?;
    let stat = Statistic::from_table("table", cfg.stat.clone())?;
    let problem = match &cfg.target {
        TargetSpec::Tilt { beta } => FiniteCeProblem::tilt_target(pi, stat, beta)?,
        TargetSpec::LogDensity { values } => FiniteCeProblem::new(pi, stat, values.clone())?,
    };
    let ce_cfg = CrossEntropyConfig {
        sample_size: cfg.sample_size,
        max_iterations: cfg.iterations,
        variant: match cfg.variant {
            VariantSpec::Moment => CeVariant::MomentMatch,
            VariantSpec::Confidence => CeVariant::Confidence {
                z_multiplier: cfg.z_multiplier,
                bootstrap: cfg.bootstrap,
            },
        },
        ..CrossEntropyConfig::default()
    };
    let rng = StreamRng::seed_from(seed).split("cross-entropy");
    let run = run_cross_entropy(&problem, &ce_cfg, &rng)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    let out = CrossEntropyOutput {
        final_model: run.final_model.record(),
        final_moment: run.final_model.moment_map()?,
        iterations: run.states.len(),
        converged: run.converged,
        warnings: run.warnings.clone(),
    };
    Ok(vec![
        write_output(&args.out, "trajectory.csv", &run.trajectory_csv())?,
        write_output(&args.out, "cross_entropy.json", &to_json(&out)?)?,
    ])
}

// ---------------------------------------------------------------------------
// nstar
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NstarConfig {
    seed: u64,
    delta: f64,
    p_alpha: f64,
    replications: usize,
    #[serde(default = "default_bound_variant")]
    variant: BoundVariantSpec,
    y: YSpec,
    grid: GridSpec,
}

fn default_bound_variant() -> BoundVariantSpec {
    BoundVariantSpec::Corollary
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BoundVariantSpec {
    Theorem,
    Corollary,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum YSpec {
    ThreePoint { l1: f64, r: f64, alpha: f64 },
    TwoAtom { epsilon: f64 },
    Constant,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    n_min: usize,
    n_max: usize,
    points: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct NstarOutput {
    bound: BoundReport,
    n_star: f64,
    ln_n_star: f64,
    ci: (f64, f64),
    no_deviation_ever: bool,
    /// Whether `ln n_star` landed inside the bracket.
    bracket_ok: bool,
}

fn nstar_pair(spec: &YSpec) -> Result<(FiniteDistribution, FiniteDistribution), RunError> {
    match spec {
        YSpec::ThreePoint { l1, r, alpha } => {
            Ok(ThreePointParams::new(*l1, *r, *alpha)?.distribution_pair()?)
        }
        YSpec::TwoAtom { epsilon } => {
            let atoms = vec!["y0".to_string(), "y_heavy".to_string()];
            let mu = FiniteDistribution::new(atoms.clone(), vec![1.0 - epsilon, *epsilon])?;
            let eta = FiniteDistribution::new(atoms, vec![0.0, 1.0])?;
            Ok((eta, mu))
        }
        YSpec::Constant => {
            let pi = FiniteDistribution::from_probs(vec![0.5, 0.5])?;
            Ok((pi.clone(), pi))
        }
    }
}

fn cmd_nstar(args: &RunArgs) -> Result<Vec<PathBuf>, RunError> {
    let cfg: NstarConfig = load_config(&args.config)?;
    let seed = effective_seed(cfg.seed, args);
    let (eta, mu) = nstar_pair(&cfg.y)?;
    let profile = EntropyReport::exact(&eta, &mu, &EntropyReport::default_orders())?;
    let variant = match cfg.variant {
        BoundVariantSpec::Theorem => BoundVariant::Theorem,
        BoundVariantSpec::Corollary => BoundVariant::Corollary,
    };
    let bound = BoundReport::from_profile(&profile, cfg.delta, cfg.p_alpha, variant)?;

    let sampler: Box<dyn UnitMeanSampler> = match &cfg.y {
        YSpec::ThreePoint { l1, r, alpha } => {
            Box::new(ThreePointParams::new(*l1, *r, *alpha)?.y_sampler()?)
        }
        YSpec::TwoAtom { epsilon } => Box::new(DiscreteY::heavy_atom(*epsilon)?),
        YSpec::Constant => Box::new(ConstantY),
    };
    let probe = DeviationProbeConfig {
        delta: cfg.delta,
        p_alpha: cfg.p_alpha,
        replications: cfg.replications,
        n_grid: DeviationProbeConfig::log_grid(cfg.grid.n_min, cfg.grid.n_max, cfg.grid.points),
    };
    let rng = StreamRng::seed_from(seed).split("nstar");
    let result: CriticalSampleSize = empirical_critical_n(sampler.as_ref(), &probe, &rng)?;

    let out = NstarOutput {
        bracket_ok: bound.contains_ln_n(result.ln_n_star),
        n_star: result.n_star,
        ln_n_star: result.ln_n_star,
        ci: result.ci,
        no_deviation_ever: result.no_deviation_ever,
        bound,
    };
    Ok(vec![
        write_output(&args.out, "nstar.json", &to_json(&out)?)?,
        write_output(&args.out, "pdev_curve.csv", &result.curve_csv())?,
    ])
}
