//! Action selection from neighbor sets: value-softmax sampling with
//! Gaussian exploration noise during training, closest-neighbor replay
//! during evaluation.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::Result;
use crate::memory::EpisodicMemory;

/// Hyperparameters of the memory-based policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    /// Neighbors retrieved per query.
    pub k: usize,
    /// Softmax temperature over neighbor values.
    pub tau: f64,
    /// Std deviation of the exploration noise, in action units.
    pub sigma: f64,
    /// Neighbors farther than `n * d` are not considered similar.
    pub n: f64,
    /// Probability of perturbing the selected action.
    pub epsilon: f64,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
}

impl PolicyParams {
    fn action_dim(&self) -> usize {
        self.action_low.len()
    }

    fn uniform_action(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.action_low
            .iter()
            .zip(&self.action_high)
            .map(|(&lo, &hi)| rng.random_range(lo..=hi))
            .collect()
    }
}

/// Softmax over `values` at temperature `tau`, computed max-shifted.
///
/// Panics on an empty slice or a non-positive temperature.
pub fn softmax_probs(values: &[f64], tau: f64) -> Vec<f64> {
    assert!(!values.is_empty(), "softmax over an empty value set");
    assert!(tau > 0.0, "temperature must be > 0");
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| ((v - max) / tau).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Training-time action selection.
///
/// Samples one of the k nearest neighbors within radius `n * d`
/// proportionally to the softmax of their values, then perturbs the chosen
/// action with probability `epsilon` and clamps to the action bounds. Falls
/// back to a uniform action when no neighbor survives the radius filter.
pub fn select_action_train(
    mem: &EpisodicMemory,
    emb_state: &[f64],
    params: &PolicyParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    debug_assert_eq!(params.action_dim(), mem.action_dim());
    let neighbors = mem.knn(params.k, emb_state, params.n, mem.distance_threshold())?;
    if neighbors.is_empty() {
        return Ok(params.uniform_action(rng));
    }

    let values: Vec<f64> = neighbors.iter().map(|n| n.entry.value).collect();
    let probs = softmax_probs(&values, params.tau);
    let choice = WeightedIndex::new(&probs)
        .expect("softmax probabilities are positive")
        .sample(rng);
    let mut action = neighbors[choice].entry.action.to_vec();

    let explore = rng.random::<f64>() < params.epsilon;
    if explore && params.sigma > 0.0 {
        let noise = Normal::new(0.0, params.sigma).expect("valid sigma");
        for a in &mut action {
            *a += noise.sample(rng);
        }
    }
    for (a, (&lo, &hi)) in action
        .iter_mut()
        .zip(params.action_low.iter().zip(&params.action_high))
    {
        *a = a.clamp(lo, hi);
    }
    Ok(action)
}

/// Evaluation-time action selection: the closest neighbor's action with no
/// distance filter and no noise. Uniform random only when the memory is
/// empty.
pub fn select_action_greedy(
    mem: &EpisodicMemory,
    emb_state: &[f64],
    params: &PolicyParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    match mem.nearest(emb_state)? {
        Some(neighbor) => Ok(neighbor.entry.action.to_vec()),
        None => Ok(params.uniform_action(rng)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn params_1d(k: usize, tau: f64, sigma: f64, n: f64, epsilon: f64) -> PolicyParams {
        PolicyParams {
            k,
            tau,
            sigma,
            n,
            epsilon,
            action_low: vec![-1.0],
            action_high: vec![1.0],
        }
    }

    fn seeded_memory(entries: &[(f64, f64, f64)]) -> EpisodicMemory {
        // (state, action, value) triples, 1-D, separated inserts.
        let mut mem = EpisodicMemory::new(1, 1, 64, 1e-9);
        for &(s, a, v) in entries {
            mem.insert_or_update(&[s], &[a], v).unwrap();
        }
        mem
    }

    #[test]
    fn softmax_single_value_is_one() {
        assert_eq!(softmax_probs(&[5.0], 0.3), vec![1.0]);
    }

    #[test]
    fn softmax_equal_values_are_uniform() {
        let p = softmax_probs(&[1.0, 1.0], 1.0);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn softmax_matches_direct_evaluation() {
        // e / (e + 1) and 1 / (e + 1)
        let e = std::f64::consts::E;
        let p = softmax_probs(&[1.0, 0.0], 1.0);
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-4);
        assert!((p[1] - 1.0 / (e + 1.0)).abs() < 1e-4);
    }

    #[test]
    fn softmax_normalizes_and_is_shift_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let len = rng.random_range(1..12);
            let values: Vec<f64> = (0..len).map(|_| rng.random_range(-50.0..50.0)).collect();
            let tau = rng.random_range(0.05..20.0);
            let p = softmax_probs(&values, tau);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let c = rng.random_range(-100.0..100.0);
            let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
            for (a, b) in p.iter().zip(softmax_probs(&shifted, tau)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    #[should_panic(expected = "empty")]
    fn softmax_rejects_empty_input() {
        softmax_probs(&[], 1.0);
    }

    #[test]
    fn empty_memory_falls_back_to_uniform() {
        // KS test against the uniform CDF on [-1, 1]; critical value at
        // alpha = 0.01 is 1.628 / sqrt(n).
        let mem = EpisodicMemory::new(1, 1, 4, 0.1);
        let params = params_1d(5, 1.0, 0.5, 1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 10_000;
        let mut draws: Vec<f64> = (0..n)
            .map(|_| select_action_train(&mem, &[0.0], &params, &mut rng).unwrap()[0])
            .collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0f64;
        for (i, x) in draws.iter().enumerate() {
            let cdf = (x + 1.0) / 2.0;
            ks = ks.max((cdf - i as f64 / n as f64).abs());
            ks = ks.max(((i + 1) as f64 / n as f64 - cdf).abs());
        }
        let critical = 1.628 / (n as f64).sqrt();
        assert!(ks < critical, "KS statistic {ks} >= {critical}");
    }

    #[test]
    fn single_neighbor_without_noise_is_exact() {
        let mem = seeded_memory(&[(0.0, 0.1, 1.0)]);
        let params = params_1d(5, 1.0, 0.5, 1e12, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = select_action_train(&mem, &[0.2], &params, &mut rng).unwrap();
        assert_eq!(a, vec![0.1]);
    }

    #[test]
    fn sigma_zero_is_noise_free() {
        let mem = seeded_memory(&[(0.0, 0.1, 1.0)]);
        let params = params_1d(5, 1.0, 0.0, 1e12, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(
                select_action_train(&mem, &[0.0], &params, &mut rng).unwrap(),
                vec![0.1]
            );
        }
    }

    #[test]
    fn sampling_frequency_follows_softmax() {
        let mem = seeded_memory(&[(0.0, 1.0, 1.0), (0.01, -1.0, 0.0)]);
        let params = params_1d(5, 1.0, 0.0, 1e12, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 10_000;
        let mut first = 0usize;
        for _ in 0..n {
            if select_action_train(&mem, &[0.0], &params, &mut rng).unwrap()[0] > 0.0 {
                first += 1;
            }
        }
        let freq = first as f64 / n as f64;
        let expected = softmax_probs(&[1.0, 0.0], 1.0)[0];
        assert!((freq - expected).abs() < 0.02, "freq {freq} vs {expected}");
    }

    #[test]
    fn low_temperature_approaches_argmax() {
        let mem = seeded_memory(&[(0.0, 1.0, 3.0), (0.01, -1.0, 2.0), (0.02, 0.0, 1.0)]);
        let params = params_1d(5, 1e-6, 0.0, 1e12, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 10_000;
        let argmax = (0..n)
            .filter(|_| select_action_train(&mem, &[0.0], &params, &mut rng).unwrap()[0] == 1.0)
            .count();
        assert!(argmax as f64 / n as f64 >= 0.999);
    }

    #[test]
    fn high_temperature_approaches_uniform() {
        let mem = seeded_memory(&[(0.0, 1.0, 3.0), (0.01, -1.0, 2.0), (0.02, 0.0, 1.0)]);
        let params = params_1d(5, 1e6, 0.0, 1e12, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 10_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let a = select_action_train(&mem, &[0.0], &params, &mut rng).unwrap()[0];
            let idx = if a == 1.0 {
                0
            } else if a == -1.0 {
                1
            } else {
                2
            };
            counts[idx] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.02, "freq {freq}");
        }
    }

    #[test]
    fn actions_stay_within_bounds_under_noise() {
        let mem = seeded_memory(&[(0.0, 0.9, 1.0)]);
        let params = params_1d(5, 1.0, 5.0, 1e12, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..500 {
            let a = select_action_train(&mem, &[0.0], &params, &mut rng).unwrap();
            assert!((-1.0..=1.0).contains(&a[0]));
        }
    }

    #[test]
    fn greedy_takes_closest_not_highest_value() {
        let mem = seeded_memory(&[(0.0, 0.1, 1.0), (1.0, -0.1, 5.0)]);
        let params = params_1d(5, 1.0, 0.0, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = select_action_greedy(&mem, &[0.1], &params, &mut rng).unwrap();
        assert_eq!(a, vec![0.1]);
    }

    #[test]
    fn greedy_at_stored_state_replays_its_action() {
        let mem = seeded_memory(&[(0.3, 0.7, 1.0), (0.9, -0.4, 2.0)]);
        let params = params_1d(5, 1.0, 0.0, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = select_action_greedy(&mem, &[0.9], &params, &mut rng).unwrap();
        assert_eq!(a, vec![-0.4]);
    }

    #[test]
    fn greedy_matches_brute_force_nearest() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let params = params_1d(5, 1.0, 0.0, 1.0, 0.0);
        for _ in 0..200 {
            let mut mem = EpisodicMemory::new(2, 1, 64, 1e-9);
            let count = rng.random_range(1..30);
            let mut entries = Vec::new();
            for i in 0..count {
                let s = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                mem.insert_or_update(&s, &[i as f64], 0.0).unwrap();
                entries.push(s);
            }
            let q = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let mut best = (f64::INFINITY, 0usize);
            for (i, s) in entries.iter().enumerate() {
                let dist = s
                    .iter()
                    .zip(&q)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dist < best.0 {
                    best = (dist, i);
                }
            }
            let a = select_action_greedy(&mem, &q, &params, &mut rng).unwrap();
            assert_eq!(a, vec![best.1 as f64]);
        }
    }

    #[test]
    fn greedy_is_deterministic_on_fixed_memory() {
        let mem = seeded_memory(&[(0.0, 0.25, 1.0), (0.5, -0.5, 2.0)]);
        let params = params_1d(5, 1.0, 0.3, 1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let first = select_action_greedy(&mem, &[0.4], &params, &mut rng).unwrap();
        for _ in 0..10 {
            assert_eq!(
                select_action_greedy(&mem, &[0.4], &params, &mut rng).unwrap(),
                first
            );
        }
    }
}
