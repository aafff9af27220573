//! Experiment configuration: a single JSON document, schema-validated by
//! construction (unknown keys rejected everywhere).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentSpec,
    /// Seed for randomized probes (numerical-range checks).
    #[serde(default)]
    pub seed: u64,
    /// Output directory; overridden by --out or SSPC_OUT.
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Worker threads; default = available parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum ExperimentSpec {
    Pseudospectrum(PseudospectrumParams),
    Semigroup(SemigroupParams),
    CriticalRadius(CriticalRadiusParams),
    Hjb(HjbParams),
    Special(SpecialParams),
    Quasimode(QuasimodeParams),
    Brackets(BracketsParams),
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::Pseudospectrum(_) => "pseudospectrum",
            ExperimentSpec::Semigroup(_) => "semigroup",
            ExperimentSpec::CriticalRadius(_) => "critical-radius",
            ExperimentSpec::Hjb(_) => "hjb",
            ExperimentSpec::Special(_) => "special",
            ExperimentSpec::Quasimode(_) => "quasimode",
            ExperimentSpec::Brackets(_) => "brackets",
        }
    }

    /// The measured quantity this experiment targets.
    pub fn target(&self) -> &'static str {
        match self {
            ExperimentSpec::Pseudospectrum(_) => "resolvent-norm-map",
            ExperimentSpec::Semigroup(_) => "semigroup-decay-exponent",
            ExperimentSpec::CriticalRadius(_) => "resolvent-extension-radius-scaling",
            ExperimentSpec::Hjb(_) => "weight-decay-certification",
            ExperimentSpec::Special(_) => "laplace-integral-regime-constants",
            ExperimentSpec::Quasimode(_) => "quasimode-residual-scaling",
            ExperimentSpec::Brackets(_) => "bracket-order-classification",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Registry name: circle-advection | nsa-harmonic | torus-schrodinger | kfp.
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudospectrumParams {
    pub model: ModelConfig,
    pub h: f64,
    pub n: usize,
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupParams {
    pub model: ModelConfig,
    pub n: usize,
    pub h_list: Vec<f64>,
    pub t_max: f64,
    pub t_steps: usize,
    pub fit_window: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    /// "exp-power" (scale * exp(h^-exponent)) or "power" (scale * h^-exponent).
    pub rule: String,
    pub scale: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalRadiusParams {
    pub model: ModelConfig,
    pub n: usize,
    pub h_list: Vec<f64>,
    pub z0: [f64; 2],
    pub direction: [f64; 2],
    pub threshold: ThresholdConfig,
    pub range_hi: f64,
    pub tol: f64,
    /// Scale z0, direction reach anchor, and bisection range with 1/h
    /// (the large-eigenvalue sweep of the oscillator).
    #[serde(default)]
    pub scale_with_inverse_h: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HjbParams {
    pub model: ModelConfig,
    pub x: [f64; 2],
    pub nx: usize,
    pub xi: [f64; 2],
    pub nxi: usize,
    pub t_end: f64,
    /// dt = cfl_fraction * spacing / max |grad Im p| with the 0.25 guard.
    pub cfl_fraction: f64,
    pub orbit_start: [f64; 2],
    pub k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialParams {
    pub k_list: Vec<usize>,
    pub s_min: f64,
    pub s_max: f64,
    pub s_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasimodeParams {
    pub model: ModelConfig,
    pub center: [f64; 2],
    pub h_list: Vec<f64>,
    pub n: usize,
    pub beam_grid: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketsParams {
    pub model: ModelConfig,
    pub points: Vec<Vec<f64>>,
    pub j_max: usize,
    pub tol: f64,
}

/// Parse and semantically validate a config file.
pub fn load(path: &Path) -> Result<Config, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let config: Config = serde_json::from_str(&text).map_err(|e| format!("schema violation: {e}"))?;
    validate(&config)?;
    Ok(config)
}

pub fn validate(config: &Config) -> Result<(), String> {
    match &config.experiment {
        ExperimentSpec::Semigroup(p) => {
            if p.h_list.is_empty() {
                return Err("semigroup: empty h list".into());
            }
            if p.t_steps < 2 || p.t_max <= 0.0 {
                return Err("semigroup: need t_steps >= 2 and t_max > 0".into());
            }
        }
        ExperimentSpec::CriticalRadius(p) => {
            if p.h_list.is_empty() {
                return Err("critical-radius: empty h list".into());
            }
            if !matches!(p.threshold.rule.as_str(), "exp-power" | "power") {
                return Err(format!(
                    "critical-radius: unknown threshold rule '{}'",
                    p.threshold.rule
                ));
            }
        }
        ExperimentSpec::Quasimode(p) => {
            if p.h_list.is_empty() {
                return Err("quasimode: empty h list".into());
            }
        }
        ExperimentSpec::Special(p) => {
            if p.k_list.is_empty() || p.s_count < 3 {
                return Err("special: need k values and s_count >= 3".into());
            }
        }
        ExperimentSpec::Brackets(p) => {
            if p.points.is_empty() {
                return Err("brackets: no probe points".into());
            }
            if p.points.iter().any(|pt| pt.len() % 2 != 0 || pt.is_empty()) {
                return Err("brackets: points must be even-length (x..., xi...)".into());
            }
        }
        ExperimentSpec::Pseudospectrum(p) => {
            if p.nx < 2 || p.ny < 2 {
                return Err("pseudospectrum: lattice needs nx, ny >= 2".into());
            }
        }
        ExperimentSpec::Hjb(p) => {
            if !(p.cfl_fraction > 0.0 && p.cfl_fraction <= 0.25) {
                return Err("hjb: cfl_fraction must lie in (0, 0.25]".into());
            }
        }
    }
    Ok(())
}
