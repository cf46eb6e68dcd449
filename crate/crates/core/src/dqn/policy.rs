//! Action selection: epsilon-greedy over the Q-values.

use rand::Rng;

use super::network::NUM_ACTIONS;
use crate::sim::Action;

/// Index of the largest Q-value; ties go to the lowest index.
pub fn argmax(q: &[f64; NUM_ACTIONS]) -> usize {
    let mut best = 0;
    for i in 1..NUM_ACTIONS {
        if q[i] > q[best] {
            best = i;
        }
    }
    best
}

/// Greedy action for the given Q-values.
pub fn greedy_action(q: &[f64; NUM_ACTIONS]) -> Action {
    Action::from_index(argmax(q))
}

/// With probability `eps` a uniformly random action, otherwise greedy.
/// `eps = 0` consumes no randomness and is a pure function of `q`.
pub fn select_action<R: Rng>(q: &[f64; NUM_ACTIONS], eps: f64, rng: &mut R) -> Action {
    if eps > 0.0 && rng.random::<f64>() < eps {
        Action::from_index(rng.random_range(0..NUM_ACTIONS))
    } else {
        greedy_action(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_breaks_ties_toward_lower_index() {
        assert_eq!(argmax(&[1.0, 1.0, 1.0]), 0);
        assert_eq!(argmax(&[0.0, 2.0, 2.0]), 1);
        assert_eq!(argmax(&[0.0, 1.0, 2.0]), 2);
        assert_eq!(greedy_action(&[5.0, -1.0, 4.9]), Action::KeepLane);
    }

    #[test]
    fn zero_eps_is_always_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = [-0.5, 1.25, 0.3];
        for _ in 0..100 {
            assert_eq!(select_action(&q, 0.0, &mut rng), Action::ChangeRight);
        }
    }

    #[test]
    fn full_eps_explores_all_actions_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = [100.0, 0.0, 0.0];
        let mut counts = [0u32; NUM_ACTIONS];
        for _ in 0..30_000 {
            counts[select_action(&q, 1.0, &mut rng).index()] += 1;
        }
        for &c in &counts {
            assert!((9_000..=11_000).contains(&c), "counts {counts:?}");
        }
    }

    #[test]
    fn intermediate_eps_mixes_greedy_and_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = [0.0, 3.0, 0.0];
        let mut greedy = 0u32;
        let n = 30_000;
        for _ in 0..n {
            if select_action(&q, 0.3, &mut rng) == Action::ChangeRight {
                greedy += 1;
            }
        }
        // P(pick index 1) = 0.7 + 0.3/3 = 0.8.
        let frac = greedy as f64 / n as f64;
        assert!((0.78..=0.82).contains(&frac), "fraction {frac}");
    }
}
