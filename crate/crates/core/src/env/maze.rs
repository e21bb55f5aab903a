//! Kinematic point-mass mazes on a 12x12 arena. The agent turns and moves
//! in its heading direction; axis-aligned walls block movement.
//!
//! The wall layouts are compact relative to the arena: with per-step motion
//! this small, goal discovery by undirected exploration is only feasible
//! when the detour around the walls stays within a few units of path, while
//! the walls still force a genuine detour (a bottleneck).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{EnvSpec, Environment, StepResult};

const ARENA: f64 = 12.0;
const TURN_RATE: f64 = 0.15;
const MOVE_STEP: f64 = 0.25;
const GOAL_TOLERANCE: f64 = 0.6;
const POSITION_JITTER: f64 = 0.1;
const HEADING_JITTER: f64 = 0.5;
const MAX_STEPS: u64 = 300;

/// Axis-aligned solid rectangle.
#[derive(Debug, Clone, Copy)]
struct Wall {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl Wall {
    const fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        (self.min_x..=self.max_x).contains(&x) && (self.min_y..=self.max_y).contains(&y)
    }
}

// A slab attached to the left arena wall; the agent starts under it and the
// goal sits above it, so every solution rounds the slab's right end.
const UMAZE_WALLS: [Wall; 1] = [Wall::new(0.0, 2.6, 1.5, 3.4)];
const UMAZE_START: (f64, f64) = (1.0, 1.0);
const UMAZE_GOAL: (f64, f64) = (1.3, 4.3);

// Four rooms behind door gaps inside a closed 4.8x4.8 court in the arena's
// lower-left corner; the goal is in the room diagonal from the start.
const FOUR_ROOMS_WALLS: [Wall; 7] = [
    Wall::new(2.1, 0.0, 2.7, 0.6),
    Wall::new(2.1, 2.1, 2.7, 2.7),
    Wall::new(2.1, 4.2, 2.7, 4.8),
    Wall::new(0.0, 2.1, 0.6, 2.7),
    Wall::new(4.2, 2.1, 4.8, 2.7),
    Wall::new(0.0, 4.8, 5.4, 5.4),
    Wall::new(4.8, 0.0, 5.4, 5.4),
];
const FOUR_ROOMS_START: (f64, f64) = (1.05, 1.05);
const FOUR_ROOMS_GOAL: (f64, f64) = (3.75, 3.75);

pub struct KinematicMaze {
    spec: EnvSpec,
    walls: &'static [Wall],
    start_center: (f64, f64),
    goal_center: (f64, f64),
    x: f64,
    y: f64,
    theta: f64,
    goal: (f64, f64),
    steps: u64,
}

impl KinematicMaze {
    fn new(
        name: &'static str,
        walls: &'static [Wall],
        start_center: (f64, f64),
        goal_center: (f64, f64),
    ) -> Self {
        Self {
            spec: EnvSpec {
                name,
                state_dim: 4,
                action_dim: 2,
                action_low: vec![-1.0, -1.0],
                action_high: vec![1.0, 1.0],
                max_steps: MAX_STEPS,
            },
            walls,
            start_center,
            goal_center,
            x: start_center.0,
            y: start_center.1,
            theta: 0.0,
            goal: goal_center,
            steps: 0,
        }
    }

    pub fn umaze() -> Self {
        Self::new("umaze", &UMAZE_WALLS, UMAZE_START, UMAZE_GOAL)
    }

    pub fn four_rooms() -> Self {
        Self::new("four_rooms", &FOUR_ROOMS_WALLS, FOUR_ROOMS_START, FOUR_ROOMS_GOAL)
    }

    fn passable(&self, x: f64, y: f64) -> bool {
        (0.0..=ARENA).contains(&x)
            && (0.0..=ARENA).contains(&y)
            && !self.walls.iter().any(|w| w.contains(x, y))
    }

    fn observation(&self) -> Vec<f64> {
        vec![self.x, self.y, self.theta.cos(), self.theta.sin()]
    }

    #[cfg(test)]
    pub(crate) fn in_wall(&self, x: f64, y: f64) -> bool {
        self.walls.iter().any(|w| w.contains(x, y))
    }

    #[cfg(test)]
    pub(crate) fn set_heading(&mut self, theta: f64) {
        self.theta = theta;
    }
}

impl Environment for KinematicMaze {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.x = self.start_center.0 + rng.random_range(-POSITION_JITTER..POSITION_JITTER);
        self.y = self.start_center.1 + rng.random_range(-POSITION_JITTER..POSITION_JITTER);
        self.theta = rng.random_range(-HEADING_JITTER..HEADING_JITTER);
        self.goal = (
            self.goal_center.0 + rng.random_range(-POSITION_JITTER..POSITION_JITTER),
            self.goal_center.1 + rng.random_range(-POSITION_JITTER..POSITION_JITTER),
        );
        self.steps = 0;
        self.observation()
    }

    fn step(&mut self, action: &[f64]) -> StepResult {
        let omega = action[0].clamp(-1.0, 1.0);
        let forward = action[1].clamp(-1.0, 1.0);
        self.theta += TURN_RATE * omega;
        let nx = self.x + MOVE_STEP * forward * self.theta.cos();
        let ny = self.y + MOVE_STEP * forward * self.theta.sin();
        // Blocked moves leave the position unchanged; the heading update
        // above still applies.
        if self.passable(nx, ny) {
            self.x = nx;
            self.y = ny;
        }
        self.steps += 1;
        let dist = ((self.x - self.goal.0).powi(2) + (self.y - self.goal.1).powi(2)).sqrt();
        let success = dist <= GOAL_TOLERANCE;
        StepResult {
            observation: self.observation(),
            reward: if success { 1.0 } else { 0.0 },
            done: success || self.steps >= MAX_STEPS,
            success,
        }
    }
}
