//! Job configuration (JSON).

use std::path::Path;

use anyhow::Context;
use forge_core::{BoundaryCondition, Direction, Endpoint, KernelForm};
use serde::{Deserialize, Serialize};

/// Raised for schema and consistency problems; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Darboux,
    Bargmann,
    Chain,
    Multichannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSpec {
    #[default]
    FromLeft,
    FromRight,
}

impl From<DirectionSpec> for Direction {
    fn from(d: DirectionSpec) -> Self {
        match d {
            DirectionSpec::FromLeft => Direction::FromLeft,
            DirectionSpec::FromRight => Direction::FromRight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndSpec {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BcSpec {
    #[default]
    Regular,
    Jost,
    Custom {
        value: f64,
        slope: f64,
        #[serde(default)]
        at: EndSpec,
    },
}

impl From<BcSpec> for BoundaryCondition {
    fn from(bc: BcSpec) -> Self {
        match bc {
            BcSpec::Regular => BoundaryCondition::RegularAtLeft,
            BcSpec::Jost => BoundaryCondition::JostAtRight,
            BcSpec::Custom { value, slope, at } => BoundaryCondition::Custom {
                value,
                slope,
                at: match at {
                    EndSpec::Left => Endpoint::Left,
                    EndSpec::Right => Endpoint::Right,
                },
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    #[default]
    Integral,
    Wronskian,
}

impl From<KernelSpec> for KernelForm {
    fn from(k: KernelSpec) -> Self {
        match k {
            KernelSpec::Integral => KernelForm::Integral,
            KernelSpec::Wronskian => KernelForm::Wronskian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

fn unit_weight() -> String {
    "1".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    /// Base potential; unused in multichannel mode.
    #[serde(default)]
    pub v0: Option<String>,
    #[serde(default = "unit_weight")]
    pub h: String,
}

/// A seed is either a closed-form expression or integrated from a
/// boundary condition (regular by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub gamma_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    #[serde(default)]
    pub gamma_sq: Vec<f64>,
    #[serde(default)]
    pub bc: BcSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// Diagonal base potentials, one per channel.
    pub v0: Vec<String>,
    pub seed_gamma_sq: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub seed_bc: BcSpec,
    /// Each entry holds one spectral parameter per channel.
    #[serde(default)]
    pub eval_gamma_sq: Vec<Vec<f64>>,
    #[serde(default)]
    pub kernel: KernelSpec,
}

fn default_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Relative paths are taken from the directory holding the config file.
    #[serde(default = "default_dir")]
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub grid: GridSpec,
    pub base: BaseSpec,
    pub mode: Mode,
    #[serde(default)]
    pub direction: DirectionSpec,
    #[serde(default)]
    pub seeds: Vec<SeedSpec>,
    #[serde(default)]
    pub eval: EvalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<ChannelSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Parsed config together with the bytes it came from.
pub struct LoadedConfig {
    pub config: JobConfig,
    pub raw: Vec<u8>,
}

pub fn load(path: &Path) -> anyhow::Result<LoadedConfig> {
    let raw = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let config: JobConfig =
        serde_json::from_slice(&raw).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(LoadedConfig { config, raw })
}

fn fail<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(ConfigError(msg.into()).into())
}

impl JobConfig {
    /// Mode-specific required fields. Expressions are checked when the job
    /// builds its fields.
    pub fn validate(&self) -> anyhow::Result<()> {
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return fail(format!("tolerance must be positive, got {t}"));
            }
        }
        for s in &self.seeds {
            if s.expr.is_some() && s.bc.is_some() {
                return fail(format!("seed at gamma_sq = {} has both expr and bc", s.gamma_sq));
            }
        }
        let needs_c = |what: &str| -> anyhow::Result<()> {
            if let Some(s) = self.seeds.iter().find(|s| s.c.is_none()) {
                return fail(format!("{what} seed at gamma_sq = {} needs a constant c", s.gamma_sq));
            }
            Ok(())
        };
        match self.mode {
            Mode::Darboux | Mode::Chain | Mode::Bargmann if self.base.v0.is_none() => {
                return fail("base.v0 is required");
            }
            Mode::Darboux if self.seeds.len() != 1 => {
                return fail(format!("darboux mode takes exactly one seed, got {}", self.seeds.len()));
            }
            Mode::Chain => {
                if self.seeds.len() != 1 {
                    return fail(format!("chain mode takes exactly one seed, got {}", self.seeds.len()));
                }
                needs_c("chain")?;
            }
            Mode::Bargmann => {
                if self.seeds.is_empty() {
                    return fail("bargmann mode needs at least one seed");
                }
                needs_c("bargmann")?;
            }
            Mode::Multichannel => {
                let Some(ch) = &self.channels else {
                    return fail("multichannel mode needs a channels section");
                };
                let n = ch.v0.len();
                if n == 0 || ch.seed_gamma_sq.len() != n || ch.c.len() != n {
                    return fail(format!(
                        "channels: v0, seed_gamma_sq and c must have the same non-zero length (got {}, {}, {})",
                        n,
                        ch.seed_gamma_sq.len(),
                        ch.c.len()
                    ));
                }
                if let Some(g) = ch.eval_gamma_sq.iter().find(|g| g.len() != n) {
                    return fail(format!("eval_gamma_sq entry {g:?} does not have {n} components"));
                }
            }
            _ => {}
        }
        if self.mode != Mode::Multichannel && self.channels.is_some() {
            return fail("channels section is only used in multichannel mode");
        }
        Ok(())
    }
}
