//! End-to-end run orchestration: configuration in, simulation report and
//! on-disk artifacts (CSV, SVG, weight files) out.

use std::path::PathBuf;

use thiserror::Error;

use crate::agent::PhaseMode;
use crate::config::{ConfigError, RouterKind, RunConfig};
use crate::nn::{MlpParams, NnError};
use crate::report::{write_report_files, ReportError};
use crate::routing::{DijkstraRouter, MadrlRouter, QRoutingRouter};
use crate::sim::{run_simulation, SimError, SimReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("online exploitation requires a pretrained weights file (set \"weights\")")]
    MissingWeights,
}

pub struct ExperimentOutcome {
    pub report: SimReport,
    /// Files written under the configured output directory.
    pub artifacts: Vec<PathBuf>,
}

fn router_label(cfg: &RunConfig) -> &'static str {
    match cfg.router {
        RouterKind::Dijkstra => "dijkstra",
        RouterKind::Qrouting => "q-routing",
        RouterKind::Madrl => match cfg.phase.mode {
            PhaseMode::OfflineExploration => "madrl-offline",
            PhaseMode::OnlineExploitation => "madrl-online",
        },
    }
}

/// Validate, simulate with the configured router, and write all artifacts.
/// The offline MA-DRL phase also saves the trained shared weights; the
/// online phase loads them and saves each agent's final weights.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentOutcome, ExperimentError> {
    cfg.validate()?;
    let sim_cfg = cfg.sim_config();
    let num_sats = cfg.constellation.num_satellites();
    let label = router_label(cfg);

    let (report, trained): (SimReport, Option<MadrlRouter>) = match cfg.router {
        RouterKind::Dijkstra => {
            let mut router = DijkstraRouter::new();
            (run_simulation(&sim_cfg, &mut router)?, None)
        }
        RouterKind::Qrouting => {
            let mut router = QRoutingRouter::new(
                num_sats,
                cfg.gateways.len(),
                cfg.qrouting,
                cfg.reward,
                cfg.seed,
            );
            (run_simulation(&sim_cfg, &mut router)?, None)
        }
        RouterKind::Madrl => {
            let mut router = match cfg.phase.mode {
                PhaseMode::OfflineExploration => {
                    MadrlRouter::offline(cfg.phase, cfg.training, cfg.reward, cfg.seed)
                }
                PhaseMode::OnlineExploitation => {
                    let path = cfg
                        .weights
                        .as_ref()
                        .ok_or(ExperimentError::MissingWeights)?;
                    let pretrained = MlpParams::load(path)?;
                    MadrlRouter::online(
                        pretrained,
                        num_sats,
                        cfg.phase,
                        cfg.training,
                        cfg.reward,
                        cfg.seed,
                    )
                }
            };
            (run_simulation(&sim_cfg, &mut router)?, Some(router))
        }
    };

    let dir = &cfg.output_dir;
    let mut artifacts = write_report_files(dir, &report, label)?;
    if let Some(router) = &trained {
        match router.mode() {
            PhaseMode::OfflineExploration => {
                let path = dir.join("weights.bin");
                router.global_params().save(&path)?;
                artifacts.push(path);
            }
            PhaseMode::OnlineExploitation => {
                for (idx, params) in router.local_params().iter().enumerate() {
                    let id = cfg.constellation.sat_id(idx);
                    let path = dir.join(format!("weights_p{}_s{}.bin", id.plane, id.slot));
                    params.save(&path)?;
                    artifacts.push(path);
                }
            }
        }
    }
    Ok(ExperimentOutcome { report, artifacts })
}
