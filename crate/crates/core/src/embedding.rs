//! Observation embedding: identity pass-through or Gaussian random
//! projection to a lower-dimensional space.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{CecError, Result};

/// Config-level description of an embedder. The projection matrix is always
/// regenerated from the seed, never stored.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbedderSpec {
    Identity,
    RandomProjection {
        output_dim: usize,
        seed: u64,
        /// Draw entries from N(0, 1) instead of the default N(0, 1/output_dim).
        unit_variance: bool,
    },
}

impl EmbedderSpec {
    pub fn build(&self, input_dim: usize) -> Result<Embedder> {
        match *self {
            EmbedderSpec::Identity => Ok(Embedder::identity(input_dim)),
            EmbedderSpec::RandomProjection {
                output_dim,
                seed,
                unit_variance,
            } => {
                if unit_variance {
                    Embedder::random_projection_unit_variance(input_dim, output_dim, seed)
                } else {
                    Embedder::random_projection(input_dim, output_dim, seed)
                }
            }
        }
    }
}

/// Linear map from raw observations to the state space stored in memory.
#[derive(Debug, Clone)]
pub struct Embedder {
    input_dim: usize,
    output_dim: usize,
    /// Row-major `output_dim x input_dim` matrix; `None` is the identity.
    matrix: Option<Vec<f64>>,
}

impl Embedder {
    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be >= 1");
        Self {
            input_dim: dim,
            output_dim: dim,
            matrix: None,
        }
    }

    /// Gaussian projection with entries drawn i.i.d. from N(0, 1/output_dim),
    /// which keeps expected pairwise distances comparable to the input space.
    pub fn random_projection(input_dim: usize, output_dim: usize, seed: u64) -> Result<Self> {
        let std_dev = (1.0 / output_dim.max(1) as f64).sqrt();
        Self::gaussian(input_dim, output_dim, seed, std_dev)
    }

    /// Gaussian projection with unit-variance entries.
    pub fn random_projection_unit_variance(
        input_dim: usize,
        output_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::gaussian(input_dim, output_dim, seed, 1.0)
    }

    fn gaussian(input_dim: usize, output_dim: usize, seed: u64, std_dev: f64) -> Result<Self> {
        assert!(output_dim >= 1, "output dimension must be >= 1");
        if output_dim > input_dim {
            return Err(CecError::ProjectionMustReduce {
                input_dim,
                output_dim,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, std_dev).expect("valid std dev");
        let matrix = (0..input_dim * output_dim)
            .map(|_| normal.sample(&mut rng))
            .collect();
        Ok(Self {
            input_dim,
            output_dim,
            matrix: Some(matrix),
        })
    }

    /// Build from explicit rows (used to pin down behavior in tests).
    pub fn from_matrix(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty(), "matrix must be non-empty");
        let input_dim = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == input_dim), "ragged matrix");
        Self {
            input_dim,
            output_dim: rows.len(),
            matrix: Some(rows.concat()),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_none()
    }

    #[cfg(test)]
    fn matrix(&self) -> &[f64] {
        self.matrix.as_deref().unwrap()
    }

    /// Map a raw observation into the embedded state space.
    pub fn embed(&self, observation: &[f64]) -> Result<Vec<f64>> {
        if observation.len() != self.input_dim {
            return Err(CecError::DimensionMismatch {
                context: "embed observation",
                expected: self.input_dim,
                got: observation.len(),
            });
        }
        match &self.matrix {
            None => Ok(observation.to_vec()),
            Some(m) => Ok(m
                .chunks_exact(self.input_dim)
                .map(|row| row.iter().zip(observation).map(|(a, b)| a * b).sum())
                .collect()),
        }
    }
}
