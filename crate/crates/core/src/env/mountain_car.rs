//! Sparse-reward continuous mountain car: classic-control dynamics with the
//! dense action cost removed, +100 only at the flag.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{EnvSpec, Environment, StepResult};

const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;
const MAX_SPEED: f64 = 0.07;
const GOAL_POSITION: f64 = 0.45;
const FORCE: f64 = 0.0015;
const GRAVITY: f64 = 0.0025;

pub struct SparseMountainCar {
    spec: EnvSpec,
    position: f64,
    velocity: f64,
    steps: u64,
}

impl SparseMountainCar {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "sparse_mountain_car",
                state_dim: 2,
                action_dim: 1,
                action_low: vec![-1.0],
                action_high: vec![1.0],
                max_steps: 999,
            },
            position: -0.5,
            velocity: 0.0,
            steps: 0,
        }
    }

    #[cfg(test)]
    pub(crate) fn set_state(&mut self, position: f64, velocity: f64) {
        self.position = position;
        self.velocity = velocity;
    }

    #[cfg(test)]
    pub(crate) fn velocity(&self) -> f64 {
        self.velocity
    }
}

impl Default for SparseMountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for SparseMountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.position = rng.random_range(-0.6..-0.4);
        self.velocity = 0.0;
        self.steps = 0;
        vec![self.position, self.velocity]
    }

    fn step(&mut self, action: &[f64]) -> StepResult {
        let force = action[0].clamp(-1.0, 1.0);
        self.velocity += FORCE * force - GRAVITY * (3.0 * self.position).cos();
        self.velocity = self.velocity.clamp(-MAX_SPEED, MAX_SPEED);
        self.position += self.velocity;
        self.position = self.position.clamp(MIN_POSITION, MAX_POSITION);
        if self.position <= MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
        self.steps += 1;
        let success = self.position >= GOAL_POSITION;
        StepResult {
            observation: vec![self.position, self.velocity],
            reward: if success { 100.0 } else { 0.0 },
            done: success || self.steps >= self.spec.max_steps,
            success,
        }
    }
}
