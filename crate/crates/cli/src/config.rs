//! Command-line grammar and the serializable run description built from it.
//!
//! Every leaf subcommand parses into an [`Operation`]; together with the seed,
//! output path and format it forms a [`RunConfig`], which is what actually
//! gets executed. A run printed with `--print-config` can be replayed with
//! `replay --config FILE`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Rejects NaN and infinities, which `f64::from_str` would accept.
pub fn finite_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("`{s}` is not a number: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not a finite number"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracsde", version, about = "Time-fractional SDE toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub group: Group,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed of the counter-based noise streams.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format; each command has a natural default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Overwrite an existing output file.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "FRACSDE_JOBS")]
    pub jobs: Option<usize>,
    /// Print the run configuration as JSON instead of running it.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    /// Binary path block; ensembles only.
    Bin,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Mittag-Leffler functions.
    #[command(subcommand)]
    Ml(MlCmd),
    /// Fractional integrals and derivatives of a sampled path.
    #[command(subcommand)]
    Frac(FracCmd),
    /// Numeric Laplace transforms.
    #[command(subcommand)]
    Laplace(LaplaceCmd),
    /// Path simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Fractional Ornstein-Uhlenbeck moments.
    #[command(subcommand)]
    Ou(OuCmd),
    /// Chaos expansions of the fractional geometric Brownian motion.
    #[command(subcommand)]
    Chaos(ChaosCmd),
    /// Well-posedness of the fractional stochastic heat-type equation.
    #[command(subcommand)]
    Spde(SpdeCmd),
    /// Run a configuration written by `--print-config`.
    Replay {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum MlCmd {
    /// E_{beta,rho}(z).
    Eval(MlEvalArgs),
}

#[derive(Debug, Subcommand)]
pub enum FracCmd {
    /// Apply an operator to a `t,value` CSV file.
    Apply(FracApplyArgs),
}

#[derive(Debug, Subcommand)]
pub enum LaplaceCmd {
    /// Transform of t^(rho-1) E_{beta,rho}(a t^beta) against its closed form.
    Probe(LaplaceProbeArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Gaussian Volterra process with a chosen kernel.
    Volterra(SimVolterraArgs),
    /// Fractional Ornstein-Uhlenbeck paths.
    Fou(SimFouArgs),
}

#[derive(Debug, Subcommand)]
pub enum OuCmd {
    /// Variance on a uniform time grid.
    Variance(OuVarianceArgs),
    /// Limiting variance as t -> infinity.
    Limit(OuLimitArgs),
    /// Long-time regime.
    Regime(OuRegimeArgs),
}

#[derive(Debug, Subcommand)]
pub enum ChaosCmd {
    /// Second moment from the layer series.
    GbmMoment(GbmMomentArgs),
    /// Table of chaos coefficients.
    Propagator(PropagatorArgs),
    /// Weighted norm of first-order coefficients with a ratio test.
    Qnorm(QnormArgs),
}

#[derive(Debug, Subcommand)]
pub enum SpdeCmd {
    /// Classify one parameter set.
    Classify(SpdeClassifyArgs),
    /// Second-moment growth of Fourier modes.
    Probe(SpdeProbeArgs),
    /// Classify the Cartesian product of parameter lists.
    Sweep(SpdeSweepArgs),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct MlEvalArgs {
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub rho: f64,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true)]
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FracOp {
    /// Riemann-Liouville integral.
    Integral,
    /// Integral of `f - f(0)`.
    KochubeiIntegral,
    RlDerivative,
    CaputoDerivative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct FracApplyArgs {
    #[arg(long, value_enum)]
    pub op: FracOp,
    #[arg(long, value_parser = finite_f64)]
    pub order: f64,
    /// CSV with header `t,value` on a uniform grid starting at 0.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct LaplaceProbeArgs {
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub rho: f64,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, value_parser = finite_f64, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 100_000)]
    pub n_steps: usize,
    /// Comma-separated, increasing.
    #[arg(long, value_parser = finite_f64, value_delimiter = ',', required = true)]
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `scale * (t-s)^exponent`.
    Power,
    /// Standard Brownian motion.
    Brownian,
    /// `(t-s)^-gamma / Gamma(1-gamma)`.
    FractionalNoise,
    /// Driftless kernel `(t-s)^(beta-gamma) / Gamma(1+beta-gamma)`.
    Fsode,
    /// Mean-reverting kernel with rate `a`.
    Fou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Exact increment variances per cell (`O(n^2)` per path).
    Quadrature,
    /// Cholesky factor of the node covariance.
    Covariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SimVolterraArgs {
    #[arg(long, value_enum)]
    pub kernel: KernelKind,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true)]
    pub scale: Option<f64>,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true)]
    pub exponent: Option<f64>,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, value_parser = finite_f64)]
    pub beta: Option<f64>,
    #[arg(long, value_parser = finite_f64)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = Method::Quadrature)]
    pub method: Method,
    #[arg(long, value_parser = finite_f64, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 256)]
    pub n_steps: usize,
    #[arg(long, default_value_t = 1)]
    pub n_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SimFouArgs {
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true, default_value_t = 0.0)]
    pub x0: f64,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub gamma: f64,
    #[arg(long, value_parser = finite_f64, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 256)]
    pub n_steps: usize,
    #[arg(long, default_value_t = 1)]
    pub n_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct OuVarianceArgs {
    #[arg(long, value_parser = finite_f64)]
    pub a: f64,
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub gamma: f64,
    #[arg(long, value_parser = finite_f64, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 100)]
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct OuLimitArgs {
    #[arg(long, value_parser = finite_f64)]
    pub a: f64,
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct OuRegimeArgs {
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct GbmArgs {
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true, default_value_t = 1.0)]
    pub x0: f64,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct GbmMomentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub gbm: GbmArgs,
    #[arg(long, value_parser = finite_f64)]
    pub t: f64,
    #[arg(long, value_parser = finite_f64, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct PropagatorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub gbm: GbmArgs,
    /// Number of basis modes.
    #[arg(long)]
    pub k_max: usize,
    /// Highest chaos order.
    #[arg(long)]
    pub n_max: usize,
    #[arg(long, value_parser = finite_f64, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 256)]
    pub n_steps: usize,
    /// Refuse tables with more entries than this.
    #[arg(long, default_value_t = fracsde_core::chaos::DEFAULT_TABLE_LIMIT)]
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct QnormArgs {
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub gamma: f64,
    #[arg(long, value_parser = finite_f64, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, value_parser = finite_f64, default_value_t = 1.0)]
    pub horizon: f64,
    /// Number of modes; dyadic blocks up to the largest power of two below it.
    #[arg(long, default_value_t = 1024)]
    pub k_max: usize,
    /// Weights `q_k = scale * k^-power`.
    #[arg(long, value_parser = finite_f64, default_value_t = 0.5)]
    pub scale: f64,
    #[arg(long, value_parser = finite_f64)]
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SpdeArgs {
    #[arg(long, value_parser = finite_f64)]
    pub beta: f64,
    #[arg(long, value_parser = finite_f64)]
    pub gamma: f64,
    #[arg(long, value_parser = finite_f64)]
    pub alpha: f64,
    #[arg(long, value_parser = finite_f64)]
    pub nu: f64,
    #[arg(long, value_parser = finite_f64)]
    pub b: f64,
    #[arg(long, value_parser = finite_f64, allow_hyphen_values = true)]
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SpdeClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spde: SpdeArgs,
    /// Snap gamma to 1/2 and alpha to the critical order when within this distance.
    #[arg(long, value_parser = finite_f64, default_value_t = 0.0)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SpdeProbeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spde: SpdeArgs,
    /// Comma-separated wavenumbers.
    #[arg(long, value_parser = finite_f64, value_delimiter = ',', required = true)]
    pub ys: Vec<f64>,
    #[arg(long, value_parser = finite_f64, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 256)]
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SpdeSweepArgs {
    #[arg(long, value_parser = finite_f64, value_delimiter = ',', required = true)]
    pub betas: Vec<f64>,
    #[arg(long, value_parser = finite_f64, value_delimiter = ',', required = true)]
    pub gammas: Vec<f64>,
    #[arg(long, value_parser = finite_f64, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
    #[arg(long, value_parser = finite_f64, value_delimiter = ',', required = true)]
    pub nus: Vec<f64>,
    #[arg(long, value_parser = finite_f64, value_delimiter = ',', required = true)]
    pub bs: Vec<f64>,
    #[arg(long, value_parser = finite_f64, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub sigmas: Vec<f64>,
    #[arg(long, value_parser = finite_f64, default_value_t = 0.0)]
    pub tol: f64,
}

/// One leaf command with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params")]
pub enum Operation {
    #[serde(rename = "ml eval")]
    MlEval(MlEvalArgs),
    #[serde(rename = "frac apply")]
    FracApply(FracApplyArgs),
    #[serde(rename = "laplace probe")]
    LaplaceProbe(LaplaceProbeArgs),
    #[serde(rename = "sim volterra")]
    SimVolterra(SimVolterraArgs),
    #[serde(rename = "sim fou")]
    SimFou(SimFouArgs),
    #[serde(rename = "ou variance")]
    OuVariance(OuVarianceArgs),
    #[serde(rename = "ou limit")]
    OuLimit(OuLimitArgs),
    #[serde(rename = "ou regime")]
    OuRegime(OuRegimeArgs),
    #[serde(rename = "chaos gbm-moment")]
    ChaosGbmMoment(GbmMomentArgs),
    #[serde(rename = "chaos propagator")]
    ChaosPropagator(PropagatorArgs),
    #[serde(rename = "chaos qnorm")]
    ChaosQnorm(QnormArgs),
    #[serde(rename = "spde classify")]
    SpdeClassify(SpdeClassifyArgs),
    #[serde(rename = "spde probe")]
    SpdeProbe(SpdeProbeArgs),
    #[serde(rename = "spde sweep")]
    SpdeSweep(SpdeSweepArgs),
}

/// Everything that determines the output of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub operation: Operation,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

impl Group {
    /// The operation of a leaf command; `None` for `replay`.
    pub fn into_operation(self) -> Option<Operation> {
        Some(match self {
            Group::Ml(MlCmd::Eval(a)) => Operation::MlEval(a),
            Group::Frac(FracCmd::Apply(a)) => Operation::FracApply(a),
            Group::Laplace(LaplaceCmd::Probe(a)) => Operation::LaplaceProbe(a),
            Group::Sim(SimCmd::Volterra(a)) => Operation::SimVolterra(a),
            Group::Sim(SimCmd::Fou(a)) => Operation::SimFou(a),
            Group::Ou(OuCmd::Variance(a)) => Operation::OuVariance(a),
            Group::Ou(OuCmd::Limit(a)) => Operation::OuLimit(a),
            Group::Ou(OuCmd::Regime(a)) => Operation::OuRegime(a),
            Group::Chaos(ChaosCmd::GbmMoment(a)) => Operation::ChaosGbmMoment(a),
            Group::Chaos(ChaosCmd::Propagator(a)) => Operation::ChaosPropagator(a),
            Group::Chaos(ChaosCmd::Qnorm(a)) => Operation::ChaosQnorm(a),
            Group::Spde(SpdeCmd::Classify(a)) => Operation::SpdeClassify(a),
            Group::Spde(SpdeCmd::Probe(a)) => Operation::SpdeProbe(a),
            Group::Spde(SpdeCmd::Sweep(a)) => Operation::SpdeSweep(a),
            Group::Replay { .. } => return None,
        })
    }
}

impl RunConfig {
    pub fn new(operation: Operation, common: &Common) -> Self {
        RunConfig {
            operation,
            seed: common.seed,
            output_path: common.output.as_ref().map(|p| p.to_string_lossy().into_owned()),
            format: common.format,
        }
    }
}
