//! TOML experiment configuration.
//!
//! One file describes one experiment; `configs/` in the repository root
//! carries a commented example per experiment kind. The only environment
//! variable the tool reads is `SPDE_LAB_THREADS` (worker count).

use serde::{Deserialize, Serialize};
use spde_lab_core::bounds::ConstantsOptions;
use spde_lab_core::schemes::{Initial1d, SchemeKind, Sode1dConfig};
use spde_lab_core::spectral::SemigroupKind;
use spde_lab_core::{SchemeConfig, SpectralState};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config invariant violation: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sweep,
    Simulate,
    Bounds,
    ValidateOu,
    ValidateGaussianBounds,
    ValidateAbstractBound,
    Sode1dSweep,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Sweep => "sweep",
            Self::Simulate => "simulate",
            Self::Bounds => "bounds",
            Self::ValidateOu => "validate-ou",
            Self::ValidateGaussianBounds => "validate-gaussian-bounds",
            Self::ValidateAbstractBound => "validate-abstract-bound",
            Self::Sode1dSweep => "sode1d-sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupChoice {
    Exponential,
    LinearImplicit,
}

impl From<SemigroupChoice> for SemigroupKind {
    fn from(c: SemigroupChoice) -> Self {
        match c {
            SemigroupChoice::Exponential => SemigroupKind::ExponentialEuler,
            SemigroupChoice::LinearImplicit => SemigroupKind::LinearImplicitEuler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    #[default]
    FullDiscrete,
    Tamed,
}

impl From<SchemeChoice> for SchemeKind {
    fn from(c: SchemeChoice) -> Self {
        match c {
            SchemeChoice::FullDiscrete => SchemeKind::FullDiscrete,
            SchemeChoice::Tamed => SchemeKind::Tamed,
        }
    }
}

fn default_one() -> f64 {
    1.0
}
fn default_nu() -> f64 {
    0.5
}
fn default_chi() -> f64 {
    0.5
}

/// `[scheme]` section: the SPDE problem description (the per-run `N` comes
/// from `n_list`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub t_final: f64,
    /// Drift polynomial `a_0..a_q`.
    pub a: Vec<f64>,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_chi")]
    pub chi: f64,
    #[serde(default = "default_one")]
    pub eta: f64,
    /// Initial condition coefficients `c_{-K}..c_K` (odd length; empty
    /// means zero).
    #[serde(default)]
    pub xi: Vec<f64>,
    pub semigroup: SemigroupChoice,
    #[serde(default)]
    pub scheme: SchemeChoice,
    #[serde(default = "default_one")]
    pub noise_scale: f64,
}

impl SchemeSection {
    pub fn to_core(&self, steps: usize) -> Result<SchemeConfig, ConfigError> {
        let xi = if self.xi.is_empty() {
            SpectralState::zeros(0)
        } else {
            SpectralState::from_coeffs(self.xi.clone())
                .map_err(|e| ConfigError::Invalid(e.to_string()))?
        };
        Ok(SchemeConfig {
            t_final: self.t_final,
            steps,
            a: self.a.clone(),
            nu: self.nu,
            chi: self.chi,
            eta: self.eta,
            xi,
            semigroup: self.semigroup.into(),
            scheme: self.scheme.into(),
            noise_scale: self.noise_scale,
        })
    }
}

/// `[bounds]` section: overrides for the divergence constant pack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub embedding_constant: Option<f64>,
    pub p_exponent: Option<f64>,
    pub s_exponent: Option<f64>,
    pub op_norm_neg_s: Option<f64>,
}

impl BoundsSection {
    pub fn to_options(&self) -> ConstantsOptions {
        ConstantsOptions {
            embedding_constant: self.embedding_constant,
            p_exponent: self.p_exponent,
            s_exponent: self.s_exponent,
            op_norm_neg_s: self.op_norm_neg_s,
        }
    }
}

/// `[sode1d]` section: the 1-D Euler–Maruyama problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sode1dSection {
    pub t_final: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Constant initial condition, or the mean when `xi0_std_dev` is set.
    #[serde(default)]
    pub xi0: f64,
    #[serde(default)]
    pub xi0_std_dev: Option<f64>,
}

impl Sode1dSection {
    pub fn to_core(&self, steps: usize) -> Sode1dConfig {
        let xi0 = match self.xi0_std_dev {
            Some(sd) => Initial1d::Normal {
                mean: self.xi0,
                std_dev: sd,
            },
            None => Initial1d::Constant(self.xi0),
        };
        Sode1dConfig {
            t_final: self.t_final,
            steps,
            mu: self.mu.clone(),
            sigma: self.sigma.clone(),
            xi0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    #[serde(default)]
    pub n_samples: usize,
    /// Step/mode counts for sweeps; strictly increasing.
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// Moment orders.
    #[serde(default)]
    pub p_list: Vec<f64>,
    /// Bound exponents `r` for the `bounds` experiment.
    #[serde(default)]
    pub r_list: Vec<f64>,
    /// File-name stem for the emitted CSV(s) and the metadata sidecar.
    pub output_prefix: String,
    /// `simulate` only: also dump trajectory 0 step by step.
    #[serde(default)]
    pub dump_trajectory: bool,
    #[serde(default)]
    pub scheme: Option<SchemeSection>,
    #[serde(default)]
    pub bounds: Option<BoundsSection>,
    #[serde(default)]
    pub sode1d: Option<Sode1dSection>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn scheme(&self) -> Result<&SchemeSection, ConfigError> {
        self.scheme
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [scheme] section".into()))
    }

    pub fn sode1d(&self) -> Result<&Sode1dSection, ConfigError> {
        self.sode1d
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [sode1d] section".into()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError::Invalid(
                "n_list must be strictly increasing".into(),
            ));
        }
        if self.output_prefix.is_empty()
            || self.output_prefix.contains('/')
            || self.output_prefix.contains("..")
        {
            return Err(ConfigError::Invalid(
                "output_prefix must be a bare file-name stem".into(),
            ));
        }
        let need_scheme = |this: &Self| -> Result<(), ConfigError> {
            this.scheme()?;
            Ok(())
        };
        match self.kind {
            ExperimentKind::Sweep => {
                need_scheme(self)?;
                if self.n_list.is_empty() {
                    return Err(ConfigError::Invalid("sweep needs a non-empty n_list".into()));
                }
                if self.p_list.is_empty() {
                    return Err(ConfigError::Invalid("sweep needs a non-empty p_list".into()));
                }
                if self.n_samples < 2 {
                    return Err(ConfigError::Invalid("sweep needs n_samples >= 2".into()));
                }
            }
            ExperimentKind::Simulate => {
                need_scheme(self)?;
                if self.n_list.len() != 1 {
                    return Err(ConfigError::Invalid(
                        "simulate needs n_list with exactly one entry".into(),
                    ));
                }
                if self.p_list.is_empty() {
                    return Err(ConfigError::Invalid(
                        "simulate needs a non-empty p_list".into(),
                    ));
                }
                if self.n_samples < 2 {
                    return Err(ConfigError::Invalid("simulate needs n_samples >= 2".into()));
                }
            }
            ExperimentKind::Bounds => {
                need_scheme(self)?;
                if self.n_list.is_empty() || self.r_list.is_empty() {
                    return Err(ConfigError::Invalid(
                        "bounds needs non-empty n_list and r_list".into(),
                    ));
                }
                if self.n_list.iter().any(|&m| m < 2) {
                    return Err(ConfigError::Invalid(
                        "bounds needs every M in n_list >= 2".into(),
                    ));
                }
                let scheme = self.scheme()?;
                if scheme.a.last().copied().unwrap_or(0.0) == 0.0 {
                    return Err(ConfigError::Invalid(
                        "bounds needs a nonzero leading drift coefficient".into(),
                    ));
                }
            }
            ExperimentKind::ValidateOu => {
                need_scheme(self)?;
                let scheme = self.scheme()?;
                if scheme.a.iter().any(|&c| c != 0.0) {
                    return Err(ConfigError::Invalid(
                        "validate-ou needs an all-zero drift polynomial".into(),
                    ));
                }
                if self.n_list.len() != 1 {
                    return Err(ConfigError::Invalid(
                        "validate-ou needs n_list with exactly one entry".into(),
                    ));
                }
                if self.n_samples < 2 {
                    return Err(ConfigError::Invalid(
                        "validate-ou needs n_samples >= 2".into(),
                    ));
                }
            }
            ExperimentKind::ValidateGaussianBounds | ExperimentKind::ValidateAbstractBound => {}
            ExperimentKind::Sode1dSweep => {
                self.sode1d()?;
                if self.n_list.is_empty() {
                    return Err(ConfigError::Invalid(
                        "sode1d-sweep needs a non-empty n_list".into(),
                    ));
                }
                if self.p_list.is_empty() {
                    return Err(ConfigError::Invalid(
                        "sode1d-sweep needs a non-empty p_list".into(),
                    ));
                }
                if self.n_samples < 2 {
                    return Err(ConfigError::Invalid(
                        "sode1d-sweep needs n_samples >= 2".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}
