//! Declarative scenario files (TOML) and their validation.
//!
//! ```toml
//! [scenario]
//! name = "grid5"
//! duration_s = 300
//! seed = 1
//! road_file = "roads.csv"
//! trace_file = "trace.csv"
//!
//! [[rsu]]
//! x = 400
//! y = 400
//! ```
//!
//! Every other section (`grid`, `radio`, `workload`, `strategy`, `lal`,
//! `road`, `ndn`, `metrics`) is optional and falls back to defaults.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geo::{GeoGrid, Position};
use crate::lal::LalParams;
use crate::ndn::NdnParams;
use crate::road::{RoadGraph, RoadParams};
use crate::sim::{MobilityTrace, RadioConfig};
use crate::strategy::StrategyParams;
use crate::workload::{WorkloadParams, ZipfPopularity};

/// Samples and RSUs farther than this from a street are rejected.
pub const ROAD_TOLERANCE_M: f64 = 5.0;

/// Environment variable overriding `scenario.output_dir`.
pub const OUT_DIR_ENV: &str = "NAVIGO_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    pub duration_s: f64,
    pub seed: u64,
    pub road_file: PathBuf,
    pub trace_file: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            name: "scenario".into(),
            duration_s: 300.0,
            seed: 1,
            road_file: PathBuf::from("roads.csv"),
            trace_file: PathBuf::from("trace.csv"),
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RsuConfig {
    pub x: f64,
    pub y: f64,
    pub backhaul_latency_ms: f64,
    pub backhaul_rate_bps: f64,
}

impl Default for RsuConfig {
    fn default() -> Self {
        RsuConfig {
            x: 0.0,
            y: 0.0,
            backhaul_latency_ms: 10.0,
            backhaul_rate_bps: 100e6,
        }
    }
}

impl RsuConfig {
    pub fn position(&self) -> Position {
        Position::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsParams {
    pub sample_interval_ms: u64,
    /// Also write the raw event log as JSON lines.
    pub write_log: bool,
}

impl Default for MetricsParams {
    fn default() -> Self {
        MetricsParams {
            sample_interval_ms: 100,
            write_log: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub grid: GeoGrid,
    pub radio: RadioConfig,
    pub rsu: Vec<RsuConfig>,
    pub workload: WorkloadParams,
    pub strategy: StrategyParams,
    pub lal: LalParams,
    pub road: RoadParams,
    pub ndn: NdnParams,
    pub metrics: MetricsParams,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every parameter that does not need the road or trace files.
    pub fn validate_params(&self) -> Result<(), ConfigError> {
        let invalid = ConfigError::Invalid;
        let s = &self.scenario;
        if !(s.duration_s.is_finite() && s.duration_s > 0.0) {
            return Err(invalid(format!(
                "scenario.duration_s must be positive, got {}",
                s.duration_s
            )));
        }
        self.grid.validate()?;
        self.road.validate()?;
        self.radio.validate().map_err(invalid)?;
        self.workload.validate().map_err(invalid)?;
        self.strategy.validate().map_err(invalid)?;
        self.lal.validate().map_err(invalid)?;
        if self.ndn.pit_lifetime_ms == 0 || self.ndn.dead_nonce_capacity == 0 {
            return Err(invalid(
                "ndn.pit_lifetime_ms and ndn.dead_nonce_capacity must be positive".into(),
            ));
        }
        if self.metrics.sample_interval_ms == 0 {
            return Err(invalid(
                "metrics.sample_interval_ms must be positive".into(),
            ));
        }
        ZipfPopularity::calibrated(
            self.workload.n_songs,
            self.workload.top_fraction,
            self.workload.top_mass,
        )?;
        for (i, r) in self.rsu.iter().enumerate() {
            if !(r.backhaul_latency_ms.is_finite() && r.backhaul_latency_ms >= 0.0) {
                return Err(invalid(format!(
                    "rsu[{i}].backhaul_latency_ms must be non-negative"
                )));
            }
            if !(r.backhaul_rate_bps.is_finite() && r.backhaul_rate_bps > 0.0) {
                return Err(invalid(format!(
                    "rsu[{i}].backhaul_rate_bps must be positive"
                )));
            }
            if !self.grid.contains(&r.position()) {
                return Err(invalid(format!(
                    "rsu[{i}] at {} lies outside the world",
                    r.position()
                )));
            }
        }
        for s in &self.workload.scripted {
            if let Some(label) = &s.prebind_area {
                self.grid.parse_label(label)?;
            }
        }
        Ok(())
    }
}

/// A validated scenario with its road graph and mobility loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub graph: Arc<RoadGraph>,
    pub trace: MobilityTrace,
    /// Directory relative paths in the config resolve against.
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config = ScenarioConfig::from_toml(&text)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_config(config, base_dir)
    }

    /// Loads the road and trace files named by `config`, relative to `base_dir`.
    pub fn from_config(config: ScenarioConfig, base_dir: PathBuf) -> Result<Self, ConfigError> {
        config.validate_params()?;
        let graph =
            RoadGraph::from_csv_path(&base_dir.join(&config.scenario.road_file), config.road)?;
        let trace = MobilityTrace::from_csv_path(&base_dir.join(&config.scenario.trace_file))?;
        Self::from_parts(config, Arc::new(graph), trace, base_dir)
    }

    pub fn from_parts(
        config: ScenarioConfig,
        graph: Arc<RoadGraph>,
        trace: MobilityTrace,
        base_dir: PathBuf,
    ) -> Result<Self, ConfigError> {
        config.validate_params()?;
        trace.check_on_roads(&graph, ROAD_TOLERANCE_M)?;
        for track in trace.tracks() {
            if let Some((_, p)) = track.samples().find(|(_, p)| !config.grid.contains(p)) {
                return Err(ConfigError::Invalid(format!(
                    "vehicle {} leaves the world at {p}",
                    track.id
                )));
            }
        }
        for (i, r) in config.rsu.iter().enumerate() {
            let d = graph.project(&r.position()).distance;
            if d > ROAD_TOLERANCE_M {
                return Err(ConfigError::Invalid(format!(
                    "rsu[{i}] is {d:.1} m off the road network"
                )));
            }
        }
        for s in &config.workload.scripted {
            if trace.index_of(&s.vehicle).is_none() {
                return Err(ConfigError::Invalid(format!(
                    "scripted consumer {:?} is not in the trace",
                    s.vehicle
                )));
            }
        }
        Ok(Scenario {
            config,
            graph,
            trace,
            base_dir,
        })
    }

    /// Output directory: `NAVIGO_OUT_DIR` if set, else the configured one
    /// relative to the config file.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.base_dir.join(&self.config.scenario.output_dir),
        }
    }
}
