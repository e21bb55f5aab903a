//! Deterministic, seedable continuous-control environments behind one
//! interface. Randomness enters only through the reset rng; stepping is a
//! pure function of state and action.

mod growing_tree;
mod maze;
mod mountain_car;

pub use growing_tree::GrowingTree;
pub use maze::KinematicMaze;
pub use mountain_car::SparseMountainCar;

use rand_chacha::ChaCha8Rng;

use crate::agent::EvalReport;
use crate::error::{CecError, Result};

/// Static description of an environment's spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub state_dim: usize,
    pub action_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub max_steps: u64,
}

/// Outcome of a single environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub success: bool,
}

pub trait Environment {
    fn spec(&self) -> &EnvSpec;
    /// Start a new episode and return the initial observation.
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// Advance one step. Out-of-range action components are clamped.
    fn step(&mut self, action: &[f64]) -> StepResult;
}

pub const ENV_NAMES: [&str; 4] = ["growing_tree", "sparse_mountain_car", "umaze", "four_rooms"];

/// Instantiate a registered environment by name.
pub fn make_env(name: &str) -> Result<Box<dyn Environment>> {
    match name {
        "growing_tree" => Ok(Box::new(GrowingTree::new())),
        "sparse_mountain_car" => Ok(Box::new(SparseMountainCar::new())),
        "umaze" => Ok(Box::new(KinematicMaze::umaze())),
        "four_rooms" => Ok(Box::new(KinematicMaze::four_rooms())),
        other => Err(CecError::UnknownEnv(other.to_string())),
    }
}

/// Roll out uniformly random actions; the control condition for learning
/// comparisons.
pub fn random_baseline(
    env_factory: impl Fn() -> Box<dyn Environment>,
    episodes: usize,
    rng: &mut ChaCha8Rng,
) -> EvalReport {
    use rand::Rng;

    assert!(episodes >= 1, "need at least one episode");
    let mut total_return = 0.0;
    let mut successes = 0usize;
    let mut total_len = 0u64;
    for _ in 0..episodes {
        let mut env = env_factory();
        env.reset(rng);
        loop {
            let spec = env.spec();
            let action: Vec<f64> = spec
                .action_low
                .iter()
                .zip(&spec.action_high)
                .map(|(&lo, &hi)| rng.random_range(lo..=hi))
                .collect();
            let step = env.step(&action);
            total_return += step.reward;
            total_len += 1;
            if step.done {
                if step.success {
                    successes += 1;
                }
                break;
            }
        }
    }
    EvalReport {
        step: 0,
        mean_return: total_return / episodes as f64,
        success_rate: successes as f64 / episodes as f64,
        mean_episode_length: total_len as f64 / episodes as f64,
    }
}
