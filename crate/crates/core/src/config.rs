//! Scenario files (TOML).
//!
//! ```toml
//! [kernel]
//! family = { kind = "exponential", a = 1.0, kappa = 1.0 }
//!
//! [operator]
//! domain = "dirichlet-laplacian-interval"
//! n = 4
//!
//! [initial]
//! u0 = [1.0, 0.5, 0.0, 0.0]
//! v0 = { seed = 7, amplitude = 1.0 }
//! source = { kind = "history", profile = { kind = "exponential", rate = 1.0 } }
//!
//! [run]
//! formulation = "compare-all"
//! t_end = 10.0
//! dt = 1e-3
//!
//! [stability]
//! delta = 1.0
//!
//! [output]
//! dir = "out"
//! stride = 10
//! ```
//!
//! Relative CSV paths are resolved against the directory of the config file.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernel::{AlphaMode, Family, KernelSpec};
use crate::spectral::OperatorSpec;
use crate::tolerances::EPS_TAIL;
use crate::volterra::step_count;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kernel: KernelConfig,
    pub operator: OperatorSpec,
    pub initial: InitialConfig,
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Either a family or `table_csv` (columns s, mu).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_csv: Option<PathBuf>,
    #[serde(default)]
    pub alpha: AlphaMode,
    #[serde(default = "default_eps_tail")]
    pub eps_tail: f64,
}

fn default_eps_tail() -> f64 {
    EPS_TAIL
}

/// Explicit values or a seeded uniform draw in [−amplitude, amplitude].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Values(Vec<f64>),
    Random { seed: u64, amplitude: f64 },
}

impl VectorSpec {
    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            VectorSpec::Values(v) if v.len() == n => Ok(v.clone()),
            VectorSpec::Values(v) => Err(Error::Config(format!("vector has {} entries, operator has {n} modes", v.len()))),
            VectorSpec::Random { seed, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n).map(|_| amplitude * rng.gen_range(-1.0..=1.0)).collect())
            }
        }
    }
}

/// Scalar profile g(s); the field is g(s)·w with w a modal vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// e^{−rate·s}
    Exponential {
        rate: f64,
    },
    /// Σ cᵢ sⁱ
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// factor·μ(s)
    Kernel {
        factor: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSource {
    /// Past history φ₀ from a profile or a CSV (s, mode, value) on cell midpoints.
    History {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        profile: Option<Profile>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
        /// Modal weights for the profile; defaults to u0.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// F₀ from a CSV (t, mode, value) at t_j = jΔt.
    StateFunction { csv: PathBuf },
    /// ξ₀ = g(τ)·w directly.
    ProperState {
        profile: Profile,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub u0: VectorSpec,
    pub v0: VectorSpec,
    pub source: InitialSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    Direct,
    History,
    State,
    CompareAll,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub formulation: Formulation,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub delta: f64,
    /// Defaults to half of min(ℓ, L_trunc).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Write every stride-th step.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Also write the state function F₀ used by the run.
    #[serde(default)]
    pub write_f0: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_stride() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), stride: default_stride(), write_f0: false }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks that do not need files or a built kernel.
    pub fn validate(&self) -> Result<()> {
        match (&self.kernel.family, &self.kernel.table_csv) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::Config("kernel needs exactly one of `family` and `table_csv`".into())),
        }
        if !(self.kernel.eps_tail > 0.0 && self.kernel.eps_tail < 1.0) {
            return Err(Error::Config(format!("eps_tail = {} must lie in (0, 1)", self.kernel.eps_tail)));
        }
        step_count(self.run.t_end, self.run.dt).map_err(|e| Error::Config(e.to_string()))?;
        if let InitialSource::History { profile, csv, .. } = &self.initial.source {
            if profile.is_some() == csv.is_some() {
                return Err(Error::Config("history source needs exactly one of `profile` and `csv`".into()));
            }
        }
        if self.run.snapshot_times.iter().any(|t| !(*t >= 0.0 && *t <= self.run.t_end)) {
            return Err(Error::Config("snapshot times must lie in [0, t_end]".into()));
        }
        if let Some(s) = &self.stability {
            if !(s.delta > 0.0) {
                return Err(Error::Config(format!("delta = {} must be positive", s.delta)));
            }
        }
        if self.output.stride == 0 {
            return Err(Error::Config("output stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Kernel spec with a CSV table loaded relative to `base`.
    pub fn kernel_spec(&self, base: &Path) -> Result<KernelSpec> {
        let family = match (&self.kernel.family, &self.kernel.table_csv) {
            (Some(f), _) => f.clone(),
            (None, Some(p)) => {
                let (s, mu) = crate::io::read_kernel_table(&base.join(p))?;
                Family::Tabulated { s, mu }
            }
            (None, None) => return Err(Error::Config("kernel has no family".into())),
        };
        Ok(KernelSpec { family, alpha: self.kernel.alpha.clone() })
    }
}

impl Profile {
    pub fn eval(&self, s: f64, mu: impl Fn(f64) -> f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => *value,
            Profile::Exponential { rate } => (-rate * s).exp(),
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c),
            Profile::Kernel { factor } => factor * mu(s),
        }
    }
}
