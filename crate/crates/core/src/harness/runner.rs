//! Multi-seed experiment execution: per-seed learning curves and memory
//! snapshots, plus a mean/standard-error aggregate across seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::agent::{self, EvalReport};
use crate::env::make_env;
use crate::error::{CecError, Result};
use crate::harness::config::ExperimentConfig;
use crate::memory::EpisodicMemory;

/// One row of a per-seed learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub seed: u64,
    pub step: u64,
    pub mean_return: f64,
    pub success_rate: f64,
    pub episode_length: f64,
}

pub const CURVE_HEADER: &str = "seed,step,mean_return,success_rate,episode_length";
pub const AGGREGATE_HEADER: &str =
    "step,mean_return_mean,mean_return_se,success_rate_mean,success_rate_se,n_seeds";

pub fn curve_path(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("curve_seed_{seed}.csv"))
}

pub fn snapshot_path(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("memory_seed_{seed}.mem"))
}

pub fn aggregate_path(out_dir: &Path) -> PathBuf {
    out_dir.join("aggregate.csv")
}

/// Result of one seed's training run.
pub struct SeedRun {
    pub seed: u64,
    pub reports: Vec<EvalReport>,
    pub memory: EpisodicMemory,
}

/// Train one seed of the experiment.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let mut agent_config = config.agent.clone();
    agent_config.rng_seed = seed;
    let env_name = config.env.clone();
    let (memory, reports) = agent::train(
        move || make_env(&env_name).expect("env name validated at config load"),
        &agent_config,
    )?;
    Ok(SeedRun {
        seed,
        reports,
        memory,
    })
}

pub fn curve_points(seed: u64, reports: &[EvalReport]) -> Vec<CurvePoint> {
    reports
        .iter()
        .map(|r| CurvePoint {
            seed,
            step: r.step,
            mean_return: r.mean_return,
            success_rate: r.success_rate,
            episode_length: r.mean_episode_length,
        })
        .collect()
}

pub fn curve_csv(seed: u64, reports: &[EvalReport]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in curve_points(seed, reports) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.seed, p.step, p.mean_return, p.success_rate, p.episode_length
        );
    }
    out
}

/// Mean and standard error per checkpoint across seeds. Every seed reports
/// on the same step grid, so grouping by step is exact.
pub fn aggregate_csv(runs: &[SeedRun]) -> String {
    let mut by_step: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for run in runs {
        for r in &run.reports {
            by_step
                .entry(r.step)
                .or_default()
                .push((r.mean_return, r.success_rate));
        }
    }
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for (step, rows) in by_step {
        let n = rows.len();
        let (ret_mean, ret_se) = mean_se(rows.iter().map(|r| r.0));
        let (suc_mean, suc_se) = mean_se(rows.iter().map(|r| r.1));
        let _ = writeln!(out, "{step},{ret_mean},{ret_se},{suc_mean},{suc_se},{n}");
    }
    out
}

/// Sample mean and standard error of the mean (n-1 denominator; 0 for a
/// single sample).
pub fn mean_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run every seed, write per-seed curves and snapshots, then the aggregate.
/// Seeds execute concurrently; each owns its run state.
pub fn run_experiment(config: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&config.out_dir)?;

    let mut runs: Vec<SeedRun> = Vec::with_capacity(config.seeds.len());
    let results: Vec<Result<SeedRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds
            .iter()
            .map(|&seed| scope.spawn(move || run_seed(config, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CecError::InvalidConfig("seed run panicked".into()))))
            .collect()
    });
    for result in results {
        runs.push(result?);
    }

    for run in &runs {
        fs::write(curve_path(&config.out_dir, run.seed), curve_csv(run.seed, &run.reports))?;
        run.memory.save(&snapshot_path(&config.out_dir, run.seed))?;
    }
    fs::write(aggregate_path(&config.out_dir), aggregate_csv(&runs))?;
    Ok(())
}
