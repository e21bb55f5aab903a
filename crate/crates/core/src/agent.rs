//! Training and evaluation loops: roll out episodes with the sampling
//! policy, fold rewards into discounted returns from the episode tail, and
//! write the resulting tuples into memory.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::{Embedder, EmbedderSpec};
use crate::env::Environment;
use crate::error::Result;
use crate::memory::EpisodicMemory;
use crate::policy::{select_action_greedy, select_action_train, PolicyParams};

/// One step of raw experience.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
}

pub type EpisodeTranscript = Vec<Transition>;

/// Everything a single training run needs.
#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub policy: PolicyParams,
    pub gamma: f64,
    pub capacity: usize,
    pub distance_threshold: f64,
    pub embedder: EmbedderSpec,
    pub train_budget_steps: u64,
    pub eval_every_steps: u64,
    pub eval_episodes: usize,
    pub rng_seed: u64,
}

/// Aggregated result of one evaluation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Training env steps consumed when the evaluation ran (checkpoint).
    pub step: u64,
    pub mean_return: f64,
    pub success_rate: f64,
    pub mean_episode_length: f64,
}

/// Discounted Monte-Carlo returns, popped from the episode tail:
/// `v_T = r_T`, `v_t = r_t + gamma * v_{t+1}`. Output is in reverse
/// chronological order (last step first), each state paired with its own
/// action and return.
pub fn compute_returns(transcript: &[Transition], gamma: f64) -> Vec<(Vec<f64>, Vec<f64>, f64)> {
    assert!(!transcript.is_empty(), "empty transcript");
    assert!((0.0..=1.0).contains(&gamma), "gamma must be in [0, 1]");
    let mut out = Vec::with_capacity(transcript.len());
    let mut value = 0.0;
    for t in transcript.iter().rev() {
        value = t.reward + gamma * value;
        out.push((t.state.clone(), t.action.clone(), value));
    }
    out
}

/// Roll out one episode with the training policy. Does not mutate memory.
/// Returns the raw transcript and the number of env steps consumed.
pub fn run_training_episode(
    env: &mut dyn Environment,
    mem: &EpisodicMemory,
    embedder: &Embedder,
    params: &PolicyParams,
    rng: &mut ChaCha8Rng,
) -> Result<(EpisodeTranscript, u64)> {
    let mut transcript = Vec::new();
    let mut obs = env.reset(rng);
    loop {
        let emb = embedder.embed(&obs)?;
        let action = select_action_train(mem, &emb, params, rng)?;
        let step = env.step(&action);
        transcript.push(Transition {
            state: obs,
            action,
            reward: step.reward,
        });
        obs = step.observation;
        if step.done {
            break;
        }
    }
    let steps = transcript.len() as u64;
    Ok((transcript, steps))
}

/// Fold an episode into memory in tail-first order, so that near-duplicate
/// states within the episode resolve toward the higher-value later write.
/// Returns the number of writes that changed memory.
pub fn update_memory_from_episode(
    mem: &mut EpisodicMemory,
    embedder: &Embedder,
    transcript: &[Transition],
    gamma: f64,
) -> Result<usize> {
    let mut writes = 0;
    for (state, action, value) in compute_returns(transcript, gamma) {
        let emb = embedder.embed(&state)?;
        if mem.insert_or_update(&emb, &action, value)?.wrote() {
            writes += 1;
        }
    }
    Ok(writes)
}

/// Greedy evaluation over `config.eval_episodes` episodes. Never mutates
/// memory; rng drives env resets and the empty-memory fallback only.
pub fn evaluate(
    env_factory: impl Fn() -> Box<dyn Environment>,
    mem: &EpisodicMemory,
    embedder: &Embedder,
    config: &AgentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<EvalReport> {
    assert!(config.eval_episodes >= 1, "need at least one eval episode");
    let mut total_return = 0.0;
    let mut successes = 0usize;
    let mut total_len = 0u64;
    for _ in 0..config.eval_episodes {
        let mut env = env_factory();
        let mut obs = env.reset(rng);
        loop {
            let emb = embedder.embed(&obs)?;
            let action = select_action_greedy(mem, &emb, &config.policy, rng)?;
            let step = env.step(&action);
            total_return += step.reward;
            total_len += 1;
            obs = step.observation;
            if step.done {
                if step.success {
                    successes += 1;
                }
                break;
            }
        }
    }
    Ok(EvalReport {
        step: 0,
        mean_return: total_return / config.eval_episodes as f64,
        success_rate: successes as f64 / config.eval_episodes as f64,
        mean_episode_length: total_len as f64 / config.eval_episodes as f64,
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Per-checkpoint evaluation stream, decorrelated from the rollout stream.
fn eval_seed(run_seed: u64, checkpoint: u64) -> u64 {
    splitmix64(run_seed ^ splitmix64(checkpoint))
}

/// Train until the step budget is consumed, evaluating at every
/// `eval_every_steps` multiple (at the first episode boundary past it).
/// Fully deterministic given `config.rng_seed`.
pub fn train(
    env_factory: impl Fn() -> Box<dyn Environment>,
    config: &AgentConfig,
) -> Result<(EpisodicMemory, Vec<EvalReport>)> {
    assert!(config.eval_every_steps >= 1, "eval_every_steps must be >= 1");
    let mut env = env_factory();
    let spec = env.spec().clone();
    let embedder = config.embedder.build(spec.state_dim)?;
    let mut mem = EpisodicMemory::new(
        embedder.output_dim(),
        spec.action_dim,
        config.capacity,
        config.distance_threshold,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut reports = Vec::new();
    let mut steps_total: u64 = 0;
    let mut next_checkpoint: u64 = config.eval_every_steps;

    while steps_total < config.train_budget_steps {
        let (transcript, used) =
            run_training_episode(env.as_mut(), &mem, &embedder, &config.policy, &mut rng)?;
        steps_total += used;
        update_memory_from_episode(&mut mem, &embedder, &transcript, config.gamma)?;

        while next_checkpoint <= steps_total {
            let mut eval_rng = ChaCha8Rng::seed_from_u64(eval_seed(config.rng_seed, next_checkpoint));
            let mut report = evaluate(&env_factory, &mem, &embedder, config, &mut eval_rng)?;
            report.step = next_checkpoint;
            reports.push(report);
            next_checkpoint += config.eval_every_steps;
        }
    }
    Ok((mem, reports))
}
