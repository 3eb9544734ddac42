//! Run configuration: a single strict-schema JSON document covering the
//! constellation, link budgets, MODCOD table, traffic, simulator knobs and
//! the learning setup.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{PhaseConfig, RewardConfig};
use crate::geometry::{GeoPosition, OrbitalShell};
use crate::link::{default_modcod_table, LinkBudgetParams, ModcodTable};
use crate::nn::TrainConfig;
use crate::routing::qrouting::QRoutingConfig;
use crate::sim::{PreloadConfig, SimConfig, TrafficConfig};
use crate::topology::{InterplanePolicy, TopologyParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid config: {key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatewayEntry {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default)]
    pub altitude_km: f64,
}

impl GatewayEntry {
    pub fn position(&self) -> GeoPosition {
        GeoPosition {
            latitude_deg: self.latitude_deg,
            longitude_deg: self.longitude_deg,
            altitude_km: self.altitude_km,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulatorConfig {
    pub queue_capacity: usize,
    pub ttl_hops: usize,
    pub topology_refresh_s: f64,
    pub train_every_s: f64,
    pub wrap_seam: bool,
    pub interplane_policy: InterplanePolicy,
    /// When true, hop feedback messages queue on the reverse ISL instead of
    /// being delivered out of band.
    pub feedback_consumes_bandwidth: bool,
    pub preload: Option<PreloadConfig>,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        Self {
            queue_capacity: 100,
            ttl_hops: 64,
            topology_refresh_s: 1.0,
            train_every_s: 0.01,
            wrap_seam: true,
            interplane_policy: InterplanePolicy::NearestMutual,
            feedback_consumes_bandwidth: false,
            preload: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouterKind {
    Dijkstra,
    Qrouting,
    Madrl,
}

/// Top-level run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub constellation: OrbitalShell,
    pub gateways: Vec<GatewayEntry>,
    pub isl_link: LinkBudgetParams,
    pub gsl_link: LinkBudgetParams,
    pub modcod: ModcodTable,
    pub traffic: TrafficConfig,
    #[serde(default)]
    pub simulator: SimulatorConfig,
    pub router: RouterKind,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub qrouting: QRoutingConfig,
    #[serde(default)]
    pub reward: RewardConfig,
    /// Seed for learning-side randomness (weight init, action sampling).
    #[serde(default)]
    pub seed: u64,
    /// Pretrained weights for the online exploitation phase.
    #[serde(default)]
    pub weights: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.constellation
            .validate()
            .map_err(|e| invalid("constellation", e))?;
        if self.gateways.len() < 2 {
            return Err(invalid("gateways", "need at least 2 gateways"));
        }
        for (i, gw) in self.gateways.iter().enumerate() {
            gw.position()
                .validate()
                .map_err(|e| invalid(&format!("gateways[{i}]"), e))?;
        }
        self.isl_link
            .validate()
            .map_err(|e| invalid("isl_link", e))?;
        self.gsl_link
            .validate()
            .map_err(|e| invalid("gsl_link", e))?;
        self.traffic.validate().map_err(|e| invalid("traffic", e))?;
        if self.simulator.queue_capacity == 0 {
            return Err(invalid("simulator.queue_capacity", "must be >= 1"));
        }
        if self.simulator.ttl_hops == 0 {
            return Err(invalid("simulator.ttl_hops", "must be >= 1"));
        }
        if !(self.simulator.topology_refresh_s > 0.0) {
            return Err(invalid("simulator.topology_refresh_s", "must be > 0"));
        }
        if !(self.simulator.train_every_s > 0.0) {
            return Err(invalid("simulator.train_every_s", "must be > 0"));
        }
        if let Some(pre) = &self.simulator.preload {
            if pre.plane >= self.constellation.num_planes {
                return Err(invalid("simulator.preload.plane", "plane out of range"));
            }
            if !(0.0..=1.0).contains(&pre.fraction) {
                return Err(invalid("simulator.preload.fraction", "must be in [0, 1]"));
            }
        }
        self.phase.validate().map_err(|e| {
            // Name the offending key precisely for the common range errors.
            let key = if e.contains("epsilon_start") {
                "phase.epsilon_start"
            } else if e.contains("epsilon_end") {
                "phase.epsilon_end"
            } else if e.contains("decay") {
                "phase.epsilon_decay_per_step"
            } else {
                "phase"
            };
            invalid(key, e)
        })?;
        self.training
            .validate()
            .map_err(|e| invalid("training", e))?;
        self.qrouting
            .validate()
            .map_err(|e| invalid("qrouting", e))?;
        Ok(())
    }

    pub fn gateway_positions(&self) -> Vec<GeoPosition> {
        self.gateways.iter().map(|g| g.position()).collect()
    }

    pub fn topology_params(&self) -> TopologyParams {
        TopologyParams {
            isl: self.isl_link,
            gsl: self.gsl_link,
            modcod: self.modcod.clone(),
            wrap_seam: self.simulator.wrap_seam,
            interplane_policy: self.simulator.interplane_policy,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            shell: self.constellation,
            gateways: self.gateway_positions(),
            topology: self.topology_params(),
            traffic: self.traffic,
            queue_capacity: self.simulator.queue_capacity,
            ttl_hops: self.simulator.ttl_hops,
            topology_refresh_s: self.simulator.topology_refresh_s,
            train_every_s: self.simulator.train_every_s,
            feedback_consumes_bandwidth: self.simulator.feedback_consumes_bandwidth,
            preload: self.simulator.preload,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let budget = LinkBudgetParams {
            tx_power_dbw: 10.0,
            tx_gain_dbi: 38.5,
            rx_gain_dbi: 38.5,
            frequency_ghz: 26.0,
            symbol_rate_baud: 1e7,
            noise_temperature_k: 500.0,
            losses_misc_db: 0.0,
        };
        let cities = [
            ("new-york", 40.7, -74.0),
            ("london", 51.5, -0.1),
            ("tokyo", 35.7, 139.7),
            ("sydney", -33.9, 151.2),
            ("sao-paulo", -23.6, -46.6),
            ("johannesburg", -26.2, 28.0),
            ("mumbai", 19.1, 72.9),
            ("los-angeles", 34.1, -118.2),
        ];
        Self {
            constellation: OrbitalShell {
                num_planes: 10,
                sats_per_plane: 10,
                altitude_km: 600.0,
                inclination_deg: 80.0,
                phasing_offset_deg: 0.0,
                raan_spread_deg: 360.0,
            },
            gateways: cities
                .iter()
                .map(|&(name, lat, lon)| GatewayEntry {
                    name: name.to_string(),
                    latitude_deg: lat,
                    longitude_deg: lon,
                    altitude_km: 0.0,
                })
                .collect(),
            isl_link: budget,
            gsl_link: LinkBudgetParams {
                frequency_ghz: 20.0,
                ..budget
            },
            modcod: default_modcod_table(),
            traffic: TrafficConfig {
                per_gateway_rate: 50.0,
                packet_size_bits: 1500 * 8,
                duration_s: 60.0,
                seed: 1,
            },
            simulator: SimulatorConfig::default(),
            router: RouterKind::Dijkstra,
            phase: PhaseConfig::default(),
            training: TrainConfig::default(),
            qrouting: QRoutingConfig::default(),
            reward: RewardConfig::default(),
            seed: 1,
            weights: None,
            output_dir: default_output_dir(),
        }
    }
}

/// Load and validate a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}
