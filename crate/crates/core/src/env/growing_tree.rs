//! 1-D toy task: grow a value toward a target height by adding bounded
//! actions.

use rand_chacha::ChaCha8Rng;

use super::{EnvSpec, Environment, StepResult};

const GOAL: f64 = 1.0;
const TOLERANCE: f64 = 0.1;
// Absorbs accumulated f64 summation error at the tolerance boundary so that
// repeated decimal steps (e.g. nine additions of 0.1) land inside the goal
// band exactly as in exact arithmetic.
const BOUNDARY_SLACK: f64 = 1e-9;

pub struct GrowingTree {
    spec: EnvSpec,
    height: f64,
    steps: u64,
}

impl GrowingTree {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "growing_tree",
                state_dim: 1,
                action_dim: 1,
                action_low: vec![-0.1],
                action_high: vec![0.1],
                max_steps: 200,
            },
            height: 0.0,
            steps: 0,
        }
    }

    #[cfg(test)]
    pub(crate) fn set_height(&mut self, height: f64) {
        self.height = height;
    }
}

impl Default for GrowingTree {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for GrowingTree {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.height = 0.0;
        self.steps = 0;
        vec![self.height]
    }

    fn step(&mut self, action: &[f64]) -> StepResult {
        let a = action[0].clamp(-0.1, 0.1);
        self.height = (self.height + a).clamp(-2.0, 2.0);
        self.steps += 1;
        let success = (self.height - GOAL).abs() <= TOLERANCE + BOUNDARY_SLACK;
        StepResult {
            observation: vec![self.height],
            reward: if success { 1.0 } else { 0.0 },
            done: success || self.steps >= self.spec.max_steps,
            success,
        }
    }
}
