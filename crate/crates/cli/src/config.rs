//! Experiment configuration: one versioned JSON document, fully validated
//! before any sampling starts. Every numeric default is resolved at load
//! time and echoed into the run metadata.

use coxballs::field::{classify_regime, Regime};
use coxballs::laws::{Kernel, KernelFamily, MarkLaw, RadiusLaw, StableParams};
use coxballs::measures::{Component, TestMeasure};
use coxballs::pointprocess::{ModelSpec, ScalingLaw, Truncation};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config error: {0}")]
    Invalid(String),
    #[error("config i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelConfig,
    pub measures: Vec<MeasureConfig>,
    pub rhos: Vec<f64>,
    pub replicates: u64,
    #[serde(default)]
    pub thetas: ThetaConfig,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dimension: usize,
    pub kernel: KernelConfig,
    pub radius: RadiusConfig,
    pub marks: MarkConfig,
    pub scaling: ScalingConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelConfig {
    Gaussian { bandwidth: f64 },
    UniformBall { bandwidth: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadiusConfig {
    pub beta: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MarkConfig {
    Rademacher,
    Gaussian,
    Dirac { value: f64 },
    ExactStable { alpha: f64, sigma: f64, b: f64 },
    TwoSidedPareto { alpha: f64, x_m: f64, p_upper: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum ScalingConfig {
    Local {
        v: f64,
        #[serde(default = "one")]
        c_lambda: f64,
    },
    Global {
        u: f64,
        v: f64,
        #[serde(default = "one")]
        c_kappa: f64,
        #[serde(default = "one")]
        c_lambda: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub name: String,
    pub components: Vec<ComponentConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum ComponentConfig {
    Interval {
        a: f64,
        b: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "one")]
        weight: f64,
    },
    Disk {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        weight: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaConfig {
    Grid { min: f64, max: f64, count: usize },
    List { values: Vec<f64> },
}

impl Default for ThetaConfig {
    fn default() -> Self {
        // Informative range for the reference configurations; the CF decays
        // below Monte Carlo noise beyond |theta| ~ 4.
        ThetaConfig::Grid {
            min: -4.0,
            max: 4.0,
            count: 41,
        }
    }
}

impl ThetaConfig {
    pub fn grid(&self) -> Vec<f64> {
        match self {
            ThetaConfig::Grid { min, max, count } => {
                if *count == 1 {
                    return vec![*min];
                }
                (0..*count)
                    .map(|i| min + (max - min) * i as f64 / (*count as f64 - 1.0))
                    .collect()
            }
            ThetaConfig::List { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Additive bias allowance for limit-CF comparisons at finite rate
    /// (the asymptotic limits come with no convergence rate); exact identities carry none.
    pub allowance: f64,
    /// Relative tolerance of variance checks.
    pub variance_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            allowance: 0.05,
            variance_rel: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationConfig {
    /// Radius cap; `null` resolves the default rule (truncation bias below
    /// 1e-3 of the mean-absolute-field bound).
    pub r_cap: Option<f64>,
    pub eps_kernel: Option<f64>,
}

/// Config resolved into core types; built only after every invariant has
/// been checked (including regime classification).
pub struct Resolved {
    pub config: ExperimentConfig,
    pub model: ModelSpec,
    pub measures: Vec<(String, TestMeasure)>,
    pub regime: Regime,
    pub thetas: Vec<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    pub fn resolve(mut self, seed_override: Option<u64>) -> Result<Resolved, ConfigError> {
        if self.schema_version != 1 {
            return Err(ConfigError::Invalid(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if let Some(seed) = seed_override {
            self.seed = seed;
        }
        if self.rhos.is_empty() {
            return Err(ConfigError::Invalid("need at least one rho".into()));
        }
        for &rho in &self.rhos {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(ConfigError::Invalid(format!("rho {rho} outside (0, 1)")));
            }
        }
        let d = self.model.dimension;
        let kernel = match self.model.kernel {
            KernelConfig::Gaussian { bandwidth } => {
                Kernel::new(KernelFamily::Gaussian, bandwidth, d)
            }
            KernelConfig::UniformBall { bandwidth } => {
                Kernel::new(KernelFamily::UniformBall, bandwidth, d)
            }
        }
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let radius = RadiusLaw::new(self.model.radius.beta, self.model.radius.r0)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let marks = match &self.model.marks {
            MarkConfig::Rademacher => MarkLaw::rademacher(),
            MarkConfig::Gaussian => MarkLaw::standard_gaussian(),
            MarkConfig::Dirac { value } => {
                MarkLaw::dirac(*value).map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
            MarkConfig::ExactStable { alpha, sigma, b } => MarkLaw::exact_stable(
                StableParams::new(*alpha, *sigma, *b)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?,
            )
            .map_err(|e| ConfigError::Invalid(e.to_string()))?,
            MarkConfig::TwoSidedPareto {
                alpha,
                x_m,
                p_upper,
            } => MarkLaw::two_sided_pareto(*alpha, *x_m, *p_upper)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?,
        };
        let scaling = match self.model.scaling {
            ScalingConfig::Local { v, c_lambda } => ScalingLaw::local(v, c_lambda),
            ScalingConfig::Global {
                u,
                v,
                c_kappa,
                c_lambda,
            } => ScalingLaw::global(u, v, c_kappa, c_lambda),
        }
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let model = ModelSpec::new(kernel, radius, marks, scaling)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let regime = classify_regime(&model).map_err(|e| ConfigError::Invalid(e.to_string()))?;

        if self.measures.is_empty() {
            return Err(ConfigError::Invalid("need at least one measure".into()));
        }
        let mut measures = Vec::new();
        for mc in &self.measures {
            let comps: Result<Vec<(f64, Component)>, ConfigError> = mc
                .components
                .iter()
                .map(|c| build_component(c, d))
                .collect();
            let mu = TestMeasure::weighted(comps?)
                .map_err(|e| ConfigError::Invalid(format!("measure '{}': {e}", mc.name)))?;
            if mu.dimension() != d {
                return Err(ConfigError::Invalid(format!(
                    "measure '{}' has dimension {} but the model is d = {d}",
                    mc.name,
                    mu.dimension()
                )));
            }
            measures.push((mc.name.clone(), mu));
        }
        let thetas = self.thetas.grid();
        for t in &thetas {
            if !t.is_finite() {
                return Err(ConfigError::Invalid("non-finite theta".into()));
            }
        }
        Ok(Resolved {
            config: self,
            model,
            measures,
            regime,
            thetas,
        })
    }
}

fn build_component(c: &ComponentConfig, d: usize) -> Result<(f64, Component), ConfigError> {
    match c {
        ComponentConfig::Interval { a, b, weight } => {
            if d != 1 {
                return Err(ConfigError::Invalid(
                    "interval components need a d = 1 model".into(),
                ));
            }
            Ok((*weight, Component::Interval { a: *a, b: *b }))
        }
        ComponentConfig::Box { lo, hi, weight } => match d {
            1 => {
                if lo.len() != 1 || hi.len() != 1 {
                    return Err(ConfigError::Invalid("1-d box needs single bounds".into()));
                }
                Ok((*weight, Component::Interval { a: lo[0], b: hi[0] }))
            }
            2 => {
                if lo.len() != 2 || hi.len() != 2 {
                    return Err(ConfigError::Invalid(
                        "2-d box needs two bounds per corner".into(),
                    ));
                }
                Ok((
                    *weight,
                    Component::Rect {
                        lo: [lo[0], lo[1]],
                        hi: [hi[0], hi[1]],
                    },
                ))
            }
            _ => Err(ConfigError::Invalid(format!(
                "box components support d <= 2, model is d = {d}"
            ))),
        },
        ComponentConfig::Disk {
            center,
            radius,
            weight,
        } => {
            if d != 2 || center.len() != 2 {
                return Err(ConfigError::Invalid(
                    "disk components need a d = 2 model".into(),
                ));
            }
            Ok((
                *weight,
                Component::Disk {
                    center: [center[0], center[1]],
                    radius: *radius,
                },
            ))
        }
    }
}

impl Resolved {
    /// Resolved truncation for one rho.
    pub fn truncation(&self, rho: f64) -> Truncation {
        let mut t = match self.config.truncation.r_cap {
            Some(cap) => Truncation::with_cap(cap),
            None => Truncation::auto(&self.model, rho),
        };
        if let Some(eps) = self.config.truncation.eps_kernel {
            t.eps_kernel = eps;
        }
        t
    }
}
