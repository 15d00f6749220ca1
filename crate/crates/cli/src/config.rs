//! Run configuration (TOML, `schema_version = 1`).

use std::path::{Path, PathBuf};

use curlcurl::coefficient::{EllipticityBounds, Wave};
use curlcurl::table::TableEntry;
use curlcurl::{CoefficientSpec, Grid3, IndexTable, KInverse, KatoPonceModel, MspModel, Topology};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "CoefficientSpec::identity")]
    pub coefficient: CoefficientSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msp: Option<MspSection>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Cube(usize),
    Axes([usize; 3]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub topology: Topology,
    pub n: Resolution,
    #[serde(default = "unit_extent")]
    pub extent: [f64; 3],
}

fn unit_extent() -> [f64; 3] {
    [1.0; 3]
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            topology: Topology::Torus,
            n: Resolution::Cube(16),
            extent: unit_extent(),
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid3, CliError> {
        let n = match self.n {
            Resolution::Cube(n) => [n; 3],
            Resolution::Axes(n) => n,
        };
        Grid3::new(self.topology, n, self.extent).map_err(|e| CliError::field("grid", e))
    }
}

/// Right-hand side or manufactured solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Band-limited random field on the torus, random interior edges on the box.
    Random {
        #[serde(default = "default_bandwidth")]
        bandwidth: usize,
    },
    /// `amplitude · sin|cos(2π k·x/L)`
    Mode {
        amplitude: [f64; 3],
        wavenumber: [i64; 3],
        #[serde(default = "default_wave")]
        wave: Wave,
    },
}

fn default_bandwidth() -> usize {
    4
}

fn default_wave() -> Wave {
    Wave::Sin
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Random {
            bandwidth: default_bandwidth(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// `field` is the exact solution `u*`; `f = A u*`.
    Manufactured,
    /// `field` is the right-hand side.
    Direct,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub k2: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinv: Option<KInverse>,
    #[serde(default = "default_mode")]
    pub mode: SolveMode,
    #[serde(default)]
    pub field: FieldSpec,
    #[serde(default = "default_window")]
    pub window: [usize; 2],
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    500
}

fn default_mode() -> SolveMode {
    SolveMode::Manufactured
}

fn default_window() -> [usize; 2] {
    [5, 30]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub coefficient: CoefficientSpec,
    pub k2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionSection {
    pub rows: Vec<ContractionRow>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_sweep_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub field: FieldSpec,
    /// Exponent for the reported Hoelder estimate `M̃`.
    #[serde(default = "default_holder_s")]
    pub holder_s: f64,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn default_sweep_iter() -> usize {
    1000
}

fn default_holder_s() -> f64 {
    0.5
}

fn default_slack() -> f64 {
    0.02
}

/// Table given inline or as a path to an `s p value` text file, relative to
/// the configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableSource {
    Inline { entries: Vec<TableEntry> },
    File { file: PathBuf },
}

impl TableSource {
    pub fn load(&self, base: &Path, field: &str) -> Result<IndexTable, CliError> {
        match self {
            TableSource::Inline { entries } => Ok(IndexTable::new(entries.clone())),
            TableSource::File { file } => {
                let path = base.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!("{field}: cannot read {}: {e}", path.display()))
                })?;
                IndexTable::from_text(&text).map_err(|e| CliError::field(field, e))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum CModelSpec {
    #[default]
    UnitAtSZero,
    UserTable {
        table: TableSource,
    },
}

impl CModelSpec {
    pub fn build(&self, base: &Path) -> Result<KatoPonceModel, CliError> {
        Ok(match self {
            CModelSpec::UnitAtSZero => KatoPonceModel::UnitAtSZero,
            CModelSpec::UserTable { table } => KatoPonceModel::UserTable {
                table: table.load(base, "region.c_model.table")?,
            },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum MspModelSpec {
    InterpolationOnly {
        #[serde(default)]
        anchors: Vec<TableEntry>,
    },
    UserTable {
        table: TableSource,
    },
    /// Uses the run seed.
    DiscreteEstimate {
        n: usize,
        trials: usize,
        #[serde(default = "default_lattice")]
        lattice: f64,
    },
}

fn default_lattice() -> f64 {
    0.0625
}

impl Default for MspModelSpec {
    fn default() -> Self {
        MspModelSpec::InterpolationOnly {
            anchors: Vec::new(),
        }
    }
}

impl MspModelSpec {
    pub fn build(&self, base: &Path, seed: Option<u64>) -> Result<MspModel, CliError> {
        Ok(match self {
            MspModelSpec::InterpolationOnly { anchors } => MspModel::InterpolationOnly {
                anchors: anchors.clone(),
            },
            MspModelSpec::UserTable { table } => MspModel::UserTable {
                table: table.load(base, "region.msp_model.table")?,
            },
            MspModelSpec::DiscreteEstimate { n, trials, lattice } => MspModel::DiscreteEstimate {
                n: *n,
                trials: *trials,
                seed: require_seed(seed, "region.msp_model")?,
                lattice: *lattice,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(default)]
    pub holder: f64,
    #[serde(default)]
    pub s: f64,
}

impl BoundsSpec {
    pub fn build(&self) -> Result<EllipticityBounds, CliError> {
        EllipticityBounds::new(self.m, self.big_m, self.holder, self.s)
            .map_err(|e| CliError::field("region.bounds", e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub p_omega: f64,
    pub k2: f64,
    /// Explicit constants; when absent they are measured from `[coefficient]`
    /// on `[grid]` with the Hoelder exponent `holder_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
    #[serde(default = "default_holder_s")]
    pub holder_s: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_theta_steps")]
    pub theta_steps: usize,
    #[serde(default)]
    pub c_model: CModelSpec,
    #[serde(default)]
    pub msp_model: MspModelSpec,
}

fn default_resolution() -> usize {
    200
}

fn default_theta_steps() -> usize {
    512
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSpec {
    pub s: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    #[serde(default = "default_s_values")]
    pub s_values: Vec<f64>,
    #[serde(default = "default_p_values")]
    pub p_values: Vec<f64>,
    /// Random fields in the monotonicity-in-s check.
    #[serde(default = "default_monotone_fields")]
    pub monotone_fields: usize,
    /// Random pairs in the `s = 0` Kato-Ponce check.
    #[serde(default = "default_kp_pairs")]
    pub kp_pairs: usize,
    /// Indices for which Kato-Ponce constants are estimated and tabulated.
    #[serde(default = "default_kp_indices")]
    pub kp_estimates: Vec<IndexSpec>,
}

fn default_s_values() -> Vec<f64> {
    vec![-0.5, -0.2, 0.0, 0.3, 0.6, 0.9]
}

fn default_p_values() -> Vec<f64> {
    vec![1.5, 2.0, 3.0]
}

fn default_monotone_fields() -> usize {
    50
}

fn default_kp_pairs() -> usize {
    1000
}

fn default_kp_indices() -> Vec<IndexSpec> {
    vec![IndexSpec {
        s: 0.5,
        p: 2.0,
        trials: Some(500),
    }]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MspSection {
    pub indices: Vec<IndexSpec>,
    #[serde(default = "default_msp_trials")]
    pub trials: usize,
    /// Power-iteration steps for `(0, 2)`; 0 disables.
    #[serde(default = "default_power_iterations")]
    pub power_iterations: usize,
}

fn default_msp_trials() -> usize {
    500
}

fn default_power_iterations() -> usize {
    50
}

pub fn require_seed(seed: Option<u64>, field: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| {
        CliError::Config(format!(
            "{field}: randomized routine needs `seed` (in the config or via --seed)"
        ))
    })
}

/// Reads, parses and checks the schema version. Parse errors carry the
/// line, column and key path reported by the TOML reader.
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version: expected {SCHEMA_VERSION}, found {}",
            config.schema_version
        )));
    }
    Ok(config)
}
