use std::path::PathBuf;

use clap::ValueEnum;
use mwlab_core::sharpness::{GridPolicy, MaximalRatioConfig, SharpnessConfig};
use mwlab_core::weights::{CounterexampleParams, ExponentTuple};
use mwlab_core::{FamilySpec, WeightExpr};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ApConstant,
    MultiWeightAudit,
    BesselAsymptotics,
    HormanderNorm,
    Apply,
    DecomposeSymbol,
    SharpnessRun,
    MaximalRatio,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ApConstant => "ap-constant",
            Command::MultiWeightAudit => "multi-weight-audit",
            Command::BesselAsymptotics => "bessel-asymptotics",
            Command::HormanderNorm => "hormander-norm",
            Command::Apply => "apply",
            Command::DecomposeSymbol => "decompose-symbol",
            Command::SharpnessRun => "sharpness-run",
            Command::MaximalRatio => "maximal-ratio",
        }
    }
}

fn default_extensions() -> Vec<i32> {
    vec![0, 4, 8, 12]
}
fn five_percent() -> f64 {
    0.05
}
fn ten_percent() -> f64 {
    0.10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApConstantParams {
    pub weight: WeightExpr,
    pub p: f64,
    /// Defaults to the anchored family on `{0, e_1}` with scales `2^-12..2^12`.
    #[serde(default)]
    pub family: Option<FamilySpec>,
    /// Scale-range widenings at which the constant is re-sampled.
    #[serde(default = "default_extensions")]
    pub extensions: Vec<i32>,
    #[serde(default = "five_percent")]
    pub growth_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    pub n: usize,
    pub l: usize,
    pub p_list: Vec<f64>,
    pub delta: f64,
}

fn default_eps_list() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.3]
}
fn two() -> i32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiWeightAuditParams {
    pub q: f64,
    #[serde(default)]
    pub weights: Option<Vec<WeightExpr>>,
    #[serde(default)]
    pub p_list: Option<Vec<f64>>,
    #[serde(default)]
    pub counterexample: Option<CounterexampleSpec>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default = "two")]
    pub extend_by: i32,
    #[serde(default = "five_percent")]
    pub growth_tolerance: f64,
}

fn r_min() -> f64 {
    1e-12
}
fn r_max() -> f64 {
    1e-8
}
fn twelve() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesselParams {
    pub dim: usize,
    pub t: f64,
    #[serde(default = "r_min")]
    pub r_min: f64,
    #[serde(default = "r_max")]
    pub r_max: f64,
    #[serde(default = "twelve")]
    pub points: usize,
    /// Relative tolerance on the power-law slope.
    #[serde(default = "five_percent")]
    pub slope_tolerance: f64,
    /// Relative tolerance on the logarithmic coefficient.
    #[serde(default = "ten_percent")]
    pub log_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayCheck {
    pub k_min: i32,
    pub k_max: i32,
    pub tolerance: f64,
}

fn default_decay() -> Option<DecayCheck> {
    Some(DecayCheck { k_min: 4, k_max: 8, tolerance: 0.10 })
}
fn minus_eight() -> i32 {
    -8
}
fn eight() -> i32 {
    8
}
fn three() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HormanderParams {
    pub n: usize,
    pub l: usize,
    pub mu: f64,
    /// Sobolev order; defaults to `mu`.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default = "minus_eight")]
    pub k_min: i32,
    #[serde(default = "eight")]
    pub k_max: i32,
    #[serde(default = "three")]
    pub max_ratio: f64,
    /// Decay of the per-k norms at `s = 0` against `2^{-k mu}`.
    #[serde(default = "default_decay")]
    pub decay: Option<DecayCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolParams {
    Model {
        mu: f64,
    },
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    Modulation {
        center: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    Gaussian { center: Vec<f64>, width: f64 },
    Bump { epsilon: f64 },
    /// A `.json`/`.bin` pair written by `SampledFunction::write_binary`.
    File { stem: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyParams {
    pub n: usize,
    pub symbol: SymbolParams,
    pub grid: GridParams,
    pub inputs: Vec<InputSpec>,
}

fn half() -> f64 {
    0.5
}
fn ten() -> i32 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeParams {
    pub n: usize,
    pub l: usize,
    /// The symbol is `sigma_mu` with `mu = nl/r` unless `mu` is given.
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "half")]
    pub rho: f64,
    #[serde(default = "ten")]
    pub k_max: i32,
}

fn five() -> f64 {
    5.0
}
fn minus_point_two() -> f64 {
    -0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximalRatioParams {
    pub n: usize,
    pub l: usize,
    pub r: f64,
    pub q: f64,
    #[serde(default = "default_ratio_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub grid: GridPolicy,
    /// Largest max/min spread allowed when `q >= r`.
    #[serde(default = "five")]
    pub max_spread: f64,
    /// Largest slope allowed when `q < r`.
    #[serde(default = "minus_point_two")]
    pub max_slope: f64,
}

fn default_ratio_epsilons() -> Vec<f64> {
    vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
}

impl MaximalRatioParams {
    pub fn sweep(&self) -> MaximalRatioConfig {
        MaximalRatioConfig { n: self.n, l: self.l, r: self.r, q: self.q, epsilons: self.epsilons.clone(), grid: self.grid }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    ApConstant(ApConstantParams),
    MultiWeightAudit(MultiWeightAuditParams),
    BesselAsymptotics(BesselParams),
    HormanderNorm(HormanderParams),
    Apply(ApplyParams),
    DecomposeSymbol(DecomposeParams),
    SharpnessRun(SharpnessConfig),
    MaximalRatio(MaximalRatioParams),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Parses and validates the parameter document of `command`.
pub fn parse_config(command: Command, text: &str) -> Result<Params> {
    let params = match command {
        Command::ApConstant => Params::ApConstant(parse(text)?),
        Command::MultiWeightAudit => Params::MultiWeightAudit(parse(text)?),
        Command::BesselAsymptotics => Params::BesselAsymptotics(parse(text)?),
        Command::HormanderNorm => Params::HormanderNorm(parse(text)?),
        Command::Apply => Params::Apply(parse(text)?),
        Command::DecomposeSymbol => Params::DecomposeSymbol(parse(text)?),
        Command::SharpnessRun => Params::SharpnessRun(parse(text)?),
        Command::MaximalRatio => Params::MaximalRatio(parse(text)?),
    };
    validate(&params)?;
    Ok(params)
}

fn validate(params: &Params) -> Result<()> {
    match params {
        Params::ApConstant(p) => {
            p.weight.clone().normalized()?;
            if !(p.p >= 1.0) {
                return Err(CliError::Config(format!("p must be at least 1, got {}", p.p)));
            }
            if p.extensions.is_empty() || p.extensions.iter().any(|&e| e < 0) {
                return Err(CliError::Config("extensions must be a non-empty list of non-negative integers".into()));
            }
        }
        Params::MultiWeightAudit(p) => {
            match (&p.counterexample, &p.weights, &p.p_list) {
                (Some(c), None, None) => {
                    CounterexampleParams::new(c.n, c.l, p.q, ExponentTuple::new(c.p_list.clone())?, c.delta)?;
                }
                (None, Some(_), Some(_)) => {}
                _ => {
                    return Err(CliError::Config(
                        "give either `counterexample` or both `weights` and `p_list`".into(),
                    ))
                }
            }
            if p.eps_list.windows(2).any(|w| w[0] > w[1]) {
                return Err(CliError::Config("eps_list must be sorted ascending".into()));
            }
        }
        Params::BesselAsymptotics(p) => {
            if !(p.r_min > 0.0 && p.r_min < p.r_max) || p.points < 3 {
                return Err(CliError::Config("need 0 < r_min < r_max and at least 3 points".into()));
            }
        }
        Params::HormanderNorm(p) => {
            if p.k_min > p.k_max {
                return Err(CliError::Config(format!("empty k range {}..{}", p.k_min, p.k_max)));
            }
        }
        Params::Apply(p) => {
            if p.inputs.is_empty() {
                return Err(CliError::Config("apply needs at least one input".into()));
            }
        }
        Params::DecomposeSymbol(p) => {
            if p.r.is_some() == p.mu.is_some() {
                return Err(CliError::Config("give exactly one of `r` and `mu`".into()));
            }
        }
        Params::SharpnessRun(c) => {
            c.validate()?;
        }
        Params::MaximalRatio(_) => {}
    }
    Ok(())
}
