//! Run configuration: loading, search path and hashing.

use std::path::{Path, PathBuf};

use hqs_core::bounds::DeviceScenario;
use hqs_core::device::DeviceParams;
use hqs_core::hilbert::HilbertLayout;
use hqs_core::lindblad::EvolveSettings;
use hqs_core::protocol::{Numerics, ProtocolSettings, SweepSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CONFIG_DIR_ENV: &str = "HQS_CONFIG_DIR";

/// Configs and data files compiled into the binary, looked up by file name.
const BUNDLED: &[(&str, &str)] = &[
    ("table1.json", include_str!("../configs/table1.json")),
    ("ideal.json", include_str!("../configs/ideal.json")),
    ("table2_current.json", include_str!("../configs/table2_current.json")),
    (
        "table2_next_generation.json",
        include_str!("../configs/table2_next_generation.json"),
    ),
    ("table2_mhz_device.json", include_str!("../configs/table2_mhz_device.json")),
    ("synthetic_blocks.csv", include_str!("../configs/synthetic_blocks.csv")),
    ("synthetic_thermometry.csv", include_str!("../configs/synthetic_thermometry.csv")),
    ("records.csv", include_str!("../configs/records.csv")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub true_population: f64,
    /// Also invert this measured population into an upper bound.
    #[serde(default)]
    pub infer_measured: Option<f64>,
    #[serde(default = "SimulateBlock::default_bath_range")]
    pub bath_range: [f64; 2],
}

impl SimulateBlock {
    fn default_bath_range() -> [f64; 2] {
        [0.037, 0.053]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundBlock {
    #[serde(default)]
    pub population: Option<f64>,
    #[serde(default = "BoundBlock::default_e33")]
    pub e33: f64,
    #[serde(default)]
    pub assumptions: hqs_core::bounds::GwAssumptions,
}

impl BoundBlock {
    fn default_e33() -> f64 {
        0.4
    }
}

impl Default for BoundBlock {
    fn default() -> Self {
        Self {
            population: None,
            e33: Self::default_e33(),
            assumptions: Default::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StatsMode {
    WeightedMean,
    Blocks,
    FitBose,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticBlocks {
    pub n_blocks: usize,
    pub mean: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsBlock {
    pub mode: StatsMode,
    /// CSV path, relative to the config file; bundled names also resolve.
    #[serde(default)]
    pub input: Option<String>,
    /// Mode frequency for the Bose fit, Hz.
    #[serde(default)]
    pub freq_hz: Option<f64>,
    /// Generate a seeded series instead of reading `input` (blocks mode).
    #[serde(default)]
    pub synthetic: Option<SyntheticBlocks>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceParams,
    #[serde(default)]
    pub protocol: ProtocolSettings,
    #[serde(default)]
    pub layout: HilbertLayout,
    #[serde(default)]
    pub engine: EvolveSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<DeviceScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsBlock>,
}

impl RunConfig {
    pub fn numerics(&self) -> Numerics {
        Numerics {
            layout: self.layout,
            engine: self.engine,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.device.validate()?;
        self.protocol.validate()?;
        self.layout.validate()?;
        self.engine.validate()?;
        Ok(())
    }
}

/// Where a config came from; relative data paths resolve against it.
#[derive(Clone, Debug)]
pub enum Origin {
    File(PathBuf),
    Bundled,
}

pub struct LoadedConfig {
    pub config: RunConfig,
    pub origin: Origin,
}

/// Finds `name` as a path, then under `$HQS_CONFIG_DIR`, then among the
/// bundled configs.
pub fn load(name: &str) -> Result<LoadedConfig, CliError> {
    let (text, origin) = locate(name)?;
    let config = parse(&text, name)?;
    Ok(LoadedConfig { config, origin })
}

fn locate(name: &str) -> Result<(String, Origin), CliError> {
    let direct = Path::new(name);
    let mut candidates = vec![direct.to_path_buf()];
    if direct.is_relative() {
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            candidates.push(Path::new(&dir).join(direct));
        }
    }
    for path in candidates {
        if path.is_file() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?;
            return Ok((text, Origin::File(path)));
        }
    }
    if let Some(text) = bundled(name) {
        return Ok((text.to_string(), Origin::Bundled));
    }
    Err(CliError::User(format!(
        "config `{name}` not found (searched the path, ${CONFIG_DIR_ENV}, and bundled configs: {})",
        bundled_names().filter(|n| n.ends_with(".json")).collect::<Vec<_>>().join(", ")
    )))
}

pub fn parse(text: &str, name: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::User(format!(
            "{name}: line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

/// Reads a data file referenced from a config.
pub fn read_data(reference: &str, origin: &Origin) -> Result<String, CliError> {
    let path = Path::new(reference);
    let mut candidates = Vec::new();
    if path.is_absolute() {
        candidates.push(path.to_path_buf());
    } else {
        if let Origin::File(cfg) = origin {
            if let Some(dir) = cfg.parent() {
                candidates.push(dir.join(path));
            }
        }
        candidates.push(path.to_path_buf());
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            candidates.push(Path::new(&dir).join(path));
        }
    }
    for c in candidates {
        if c.is_file() {
            return std::fs::read_to_string(&c)
                .map_err(|e| CliError::User(format!("cannot read {}: {e}", c.display())));
        }
    }
    bundled(reference)
        .map(str::to_string)
        .ok_or_else(|| CliError::User(format!("input file `{reference}` not found")))
}

/// SHA-256 over the canonical JSON of the config and every option that
/// affects the output.
pub fn config_hash(config: &RunConfig, options: &impl Serialize) -> String {
    #[derive(Serialize)]
    struct Hashed<'a, O> {
        config: &'a RunConfig,
        options: &'a O,
    }
    let canonical = serde_json::to_vec(&Hashed { config, options }).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}
