//! The versioned JSON analysis configuration and its translation into
//! engine inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use probounds::domain::{AbstractOutput, Interval};
use probounds::lang::{parse_program, NumKind, Program};
use probounds::num::parse_rational;
use probounds::partition::{Cell, InputPartition, PartitionMode};
use probounds::termination::{TermVerdict, TerminationFacts};
use probounds::OutputEvent;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnalysisConfig {
    pub schema: u32,
    /// Program source path, relative to the config file.
    pub program: String,
    pub partition: PartitionConfig,
    /// Built-in analysis choice when no external tables are given.
    #[serde(default = "default_domain")]
    pub domain: String,
    /// External table paths; they take precedence over the built-in
    /// analysis and are combined left to right.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<String>,
    /// Force the divergence atom onto every built-in table entry, as a
    /// partial-correctness analysis would report it.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub assume_divergence: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<TerminationConfig>,
    pub events: Vec<EventConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    /// `"monniaux"` enables the pair-propagation comparison column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn default_domain() -> String {
    "interval".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PartitionConfig {
    pub mode: String,
    /// Ordered dimensions; the last one varies fastest in grids.
    pub domain: Vec<DimensionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<BTreeMap<String, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellConfig>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DimensionConfig {
    pub var: String,
    pub interval: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CellConfig {
    /// Variable -> interval, e.g. `{"x": "[-inf,-1]"}`.
    #[serde(rename = "box")]
    pub region: BTreeMap<String, String>,
    pub weight: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum TerminationConfig {
    /// `"syntactic"`: the built-in loop-free check.
    Builtin(String),
    Facts {
        default: String,
        #[serde(default)]
        cells: BTreeMap<String, String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EventConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Interval list, `[lo,hi]|[lo,hi]`; empty for no numeric part.
    #[serde(default)]
    pub set: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub bottom: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OracleConfig {
    /// `"mc"`, `"exhaustive"`, or `"none"`.
    pub mode: String,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Weighted points for the exhaustive mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PointConfig {
    pub args: Vec<String>,
    pub weight: String,
}

fn default_samples() -> u64 {
    100_000
}

fn default_confidence() -> f64 {
    0.99
}

fn default_budget() -> u64 {
    10_000
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<(AnalysisConfig, PathBuf)> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config `{}`", path.display()))?;
        let config: AnalysisConfig =
            serde_json::from_str(&text).with_context(|| "invalid config JSON")?;
        if config.schema != SCHEMA_VERSION {
            bail!("unsupported schema version {} (expected {SCHEMA_VERSION})", config.schema);
        }
        let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        Ok((config, base))
    }

    pub fn load_program(&self, base: &Path) -> Result<Program> {
        let path = base.join(&self.program);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("cannot read program `{}`", path.display()))?;
        parse_program(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
    }

    pub fn build_partition(&self) -> Result<InputPartition> {
        let mode = match self.partition.mode.as_str() {
            "discrete-int" => PartitionMode::DiscreteInt,
            "continuous-real" => PartitionMode::ContinuousReal,
            other => bail!("unknown partition mode `{other}`"),
        };
        let kind = mode.kind();
        let dims = self
            .partition
            .domain
            .iter()
            .map(|d| {
                let itv = Interval::parse(&d.interval, kind)
                    .map_err(|e| anyhow!("dimension `{}`: {e}", d.var))?;
                Ok((d.var.clone(), itv))
            })
            .collect::<Result<Vec<_>>>()?;
        match (&self.partition.grid, &self.partition.cells) {
            (Some(grid), None) => Ok(InputPartition::grid(dims, grid)?),
            (None, Some(cells)) => {
                let cells = cells
                    .iter()
                    .map(|c| {
                        let region = c
                            .region
                            .iter()
                            .map(|(var, s)| {
                                let itv = Interval::parse(s, kind)
                                    .map_err(|e| anyhow!("cell box `{var}`: {e}"))?;
                                Ok((var.clone(), itv))
                            })
                            .collect::<Result<BTreeMap<_, _>>>()?;
                        let weight = parse_rational(&c.weight)?;
                        Ok(Cell { region, weight })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(InputPartition::explicit(dims, cells, mode)?)
            }
            _ => bail!("partition needs exactly one of `grid` or `cells`"),
        }
    }

    pub fn build_events(&self, kind: NumKind) -> Result<Vec<OutputEvent>> {
        self.events
            .iter()
            .map(|e| {
                let shape = AbstractOutput::parse_numeric(&e.set, kind, e.bottom)
                    .map_err(|err| anyhow!("event `{}`: {err}", e.name.as_deref().unwrap_or(&e.set)))?;
                let name = e.name.clone().unwrap_or_else(|| {
                    if e.bottom && e.set.is_empty() {
                        "bot".to_string()
                    } else if e.bottom {
                        format!("bot|{}", e.set)
                    } else {
                        e.set.clone()
                    }
                });
                Ok(OutputEvent::new(name, shape))
            })
            .collect()
    }

    pub fn build_termination(
        &self,
        program: &Program,
        partition: &Arc<InputPartition>,
    ) -> Result<Option<TerminationFacts>> {
        let Some(termination) = &self.termination else {
            return Ok(None);
        };
        let facts = match termination {
            TerminationConfig::Builtin(name) if name == "syntactic" => {
                TerminationFacts::from_syntactic(program)
            }
            TerminationConfig::Builtin(other) => {
                bail!("unknown termination mode `{other}` (expected \"syntactic\" or facts)")
            }
            TerminationConfig::Facts { default, cells } => {
                let parse = |s: &str| -> Result<TermVerdict> {
                    match s {
                        "terminates" => Ok(TermVerdict::Terminates),
                        "unknown" => Ok(TermVerdict::Unknown),
                        other => bail!("unknown termination verdict `{other}`"),
                    }
                };
                let default = parse(default)?;
                let cells = cells
                    .iter()
                    .map(|(index, verdict)| {
                        let index: usize = index
                            .parse()
                            .map_err(|_| anyhow!("bad cell index `{index}` in termination facts"))?;
                        if index >= partition.len() {
                            bail!(
                                "termination fact for cell {index} of a {}-cell partition",
                                partition.len()
                            );
                        }
                        Ok((index, parse(verdict)?))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                TerminationFacts::new(default, cells)
            }
        };
        Ok(Some(facts))
    }
}
