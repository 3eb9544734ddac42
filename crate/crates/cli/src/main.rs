use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leosim_core::agent::PhaseMode;
use leosim_core::report::{compare_runs, comparison_csv, latency_svg, read_run};
use leosim_core::{load_config, run_experiment, RouterKind, RunConfig};

#[derive(Parser)]
#[command(name = "leosim", about = "LEO constellation packet routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation with the router named in the config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured router.
        #[arg(long, value_parser = parse_router)]
        router: Option<RouterKind>,
        /// Override both the learning seed and the traffic seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Offline exploration: train shared MA-DRL weights, saving weights.bin.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Online exploitation from pretrained weights.
    Exploit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two or more completed run directories over shared traffic.
    Compare {
        /// Run directories containing packets.csv and summary.csv.
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_router(s: &str) -> Result<RouterKind, String> {
    match s {
        "dijkstra" => Ok(RouterKind::Dijkstra),
        "qrouting" => Ok(RouterKind::Qrouting),
        "madrl" => Ok(RouterKind::Madrl),
        other => Err(format!(
            "unknown router {other:?} (expected dijkstra, qrouting or madrl)"
        )),
    }
}

fn apply_overrides(cfg: &mut RunConfig, seed: Option<u64>, out: Option<PathBuf>) {
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.traffic.seed = s;
    }
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
}

fn verbose() -> bool {
    std::env::var("MADRL_LOG").is_ok_and(|v| !v.is_empty() && v != "0")
}

fn run_and_report(cfg: &RunConfig) -> Result<(), String> {
    let outcome = run_experiment(cfg).map_err(|e| e.to_string())?;
    let r = &outcome.report;
    println!(
        "created {} delivered {} dropped {} mean_latency_s {} p95_latency_s {}",
        r.created, r.delivered, r.dropped, r.mean_latency_s, r.p95_latency_s
    );
    if verbose() {
        println!(
            "median_latency_s {} max_queue_occupancy {} train_rows {}",
            r.median_latency_s,
            r.max_queue_occupancy,
            r.train_rows.len()
        );
        for path in &outcome.artifacts {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Simulate {
            config,
            router,
            seed,
            out,
        } => {
            let mut cfg = load_config(&config).map_err(|e| e.to_string())?;
            if let Some(r) = router {
                cfg.router = r;
            }
            apply_overrides(&mut cfg, seed, out);
            run_and_report(&cfg)
        }
        Command::Train { config, seed, out } => {
            let mut cfg = load_config(&config).map_err(|e| e.to_string())?;
            cfg.router = RouterKind::Madrl;
            cfg.phase.mode = PhaseMode::OfflineExploration;
            apply_overrides(&mut cfg, seed, out);
            run_and_report(&cfg)
        }
        Command::Exploit {
            config,
            weights,
            seed,
            out,
        } => {
            let mut cfg = load_config(&config).map_err(|e| e.to_string())?;
            cfg.router = RouterKind::Madrl;
            cfg.phase.mode = PhaseMode::OnlineExploitation;
            cfg.weights = Some(weights);
            apply_overrides(&mut cfg, seed, out);
            run_and_report(&cfg)
        }
        Command::Compare { reports, out } => {
            let runs = reports
                .iter()
                .map(|dir| read_run(dir).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let cmp = compare_runs(&runs).map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            let table = comparison_csv(&cmp);
            std::fs::write(out.join("comparison.csv"), &table).map_err(|e| e.to_string())?;
            let series: Vec<_> = runs.into_iter().map(|r| r.series).collect();
            std::fs::write(out.join("overlay.svg"), latency_svg(&series))
                .map_err(|e| e.to_string())?;
            print!("{table}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
