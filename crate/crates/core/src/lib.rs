//! LEO constellation packet routing simulator: orbital geometry, link
//! budgets, a deterministic discrete-event engine, and three routers — a
//! slant-range Dijkstra benchmark, tabular Q-routing, and a two-phase
//! multi-agent deep Q router.

// Validation deliberately writes `!(x > 0.0)` so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod config;
pub mod experiment;
pub mod geometry;
pub mod link;
pub mod nn;
pub mod report;
pub mod routing;
pub mod sim;
pub mod topology;

pub use agent::{Observation, PhaseConfig, PhaseMode, ReplayBuffer, RewardConfig, OBSERVATION_DIM};
pub use config::{load_config, ConfigError, GatewayEntry, RouterKind, RunConfig, SimulatorConfig};
pub use experiment::{run_experiment, ExperimentError, ExperimentOutcome};
pub use geometry::{GeoPosition, OrbitalShell, SatelliteId};
pub use link::{LinkBudgetParams, ModcodRow, ModcodTable};
pub use nn::{MlpParams, TrainConfig, NUM_ACTIONS};
pub use report::{compare_runs, read_run, Comparison, LatencySeries, ReportError};
pub use routing::{DijkstraRouter, MadrlRouter, QRoutingRouter};
pub use sim::{
    run_simulation, PreloadConfig, Router, SimConfig, SimError, SimReport, TrafficConfig,
};
pub use topology::{InterplanePolicy, NetworkGraph, TopologyParams};
