//! `cec` — train, evaluate and inspect continuous episodic control agents.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cec_core::agent::{evaluate, AgentConfig};
use cec_core::embedding::{Embedder, EmbedderSpec};
use cec_core::env::make_env;
use cec_core::error::CecError;
use cec_core::harness::{
    config::{default_policy_for_env, load_experiment_config, ConfigOverrides},
    export_value_map, run_experiment,
};
use cec_core::memory::EpisodicMemory;

#[derive(Parser)]
#[command(name = "cec", about = "Continuous episodic control experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-seed training experiment and write curves, snapshots and
    /// the cross-seed aggregate.
    Train {
        /// Experiment config file (flat key = value lines).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Environment name; overrides the config file.
        #[arg(long)]
        env: Option<String>,
        /// Comma-separated seed list; overrides the config file.
        #[arg(long)]
        seeds: Option<String>,
        /// Output directory; overrides the config file.
        #[arg(long)]
        out: Option<String>,
    },
    /// Greedily evaluate a memory snapshot and print one CSV line.
    Eval {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        /// Seed for episode resets (and the empty-memory fallback).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export the discretized value map of a maze snapshot.
    ValueMap {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        env: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print summary statistics of a memory snapshot.
    Inspect {
        #[arg(long)]
        snapshot: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CecError> {
    match cli.command {
        Command::Train {
            config,
            env,
            seeds,
            out,
        } => {
            let overrides = ConfigOverrides { env, seeds, out };
            let experiment = load_experiment_config(config.as_deref(), &overrides)?;
            run_experiment(&experiment)
        }
        Command::Eval {
            snapshot,
            env,
            episodes,
            seed,
        } => {
            let mem = EpisodicMemory::load(&snapshot)?;
            let spec = make_env(&env)?.spec().clone();
            if mem.state_dim() != spec.state_dim || mem.action_dim() != spec.action_dim {
                return Err(CecError::InvalidConfig(format!(
                    "snapshot dimensions {}x{} do not match env `{env}` ({}x{}); \
                     snapshots taken under a random projection cannot be evaluated here",
                    mem.state_dim(),
                    mem.action_dim(),
                    spec.state_dim,
                    spec.action_dim
                )));
            }
            let config = AgentConfig {
                policy: default_policy_for_env(&env)?,
                gamma: 0.99,
                capacity: mem.capacity(),
                distance_threshold: mem.distance_threshold(),
                embedder: EmbedderSpec::Identity,
                train_budget_steps: 0,
                eval_every_steps: 1,
                eval_episodes: episodes,
                rng_seed: seed,
            };
            let embedder = Embedder::identity(spec.state_dim);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let env_name = env.clone();
            let report = evaluate(
                move || make_env(&env_name).expect("env checked above"),
                &mem,
                &embedder,
                &config,
                &mut rng,
            )?;
            println!("mean_return,success_rate,mean_episode_length");
            println!(
                "{},{},{}",
                report.mean_return, report.success_rate, report.mean_episode_length
            );
            Ok(())
        }
        Command::ValueMap { snapshot, env, out } => export_value_map(&snapshot, &env, &out),
        Command::Inspect { snapshot } => {
            let mem = EpisodicMemory::load(&snapshot)?;
            println!("count={}", mem.len());
            println!("state_dim={}", mem.state_dim());
            println!("action_dim={}", mem.action_dim());
            println!("capacity={}", mem.capacity());
            println!("d={}", mem.distance_threshold());
            println!("global_tick={}", mem.global_tick());
            if !mem.is_empty() {
                let values: Vec<f64> = mem.iter_entries().map(|e| e.value).collect();
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                println!("value_min={min}");
                println!("value_mean={mean}");
                println!("value_max={max}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                CecError::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
