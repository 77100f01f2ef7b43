//! Reference heuristics the main solvers are measured against.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{objective, Assignment, Instance};
use crate::success_prob::SuccessProbMatrix;

/// Settings for the randomized search baseline.
#[derive(Debug, Clone)]
pub struct BaselineConfig {
    /// Random placements to try; the best one wins.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            iterations: 10_000,
            seed: 0,
        }
    }
}

/// Monte Carlo search: repeatedly place tasks one by one on a uniformly
/// drawn helper (dropping the task if that helper lacks room — no second
/// draw), and keep the placement with the best mean success probability.
/// Fully determined by the seed; ties keep the earliest placement found.
pub fn mcsa(instance: &Instance, probs: &SuccessProbMatrix, config: &BaselineConfig) -> Assignment {
    let r = instance.r();
    let h = instance.h();
    if r == 0 || h == 0 || config.iterations == 0 {
        return Assignment::empty(r);
    }
    let sizes = instance.sizes();
    let caps = instance.capacities();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best = Assignment::empty(r);
    let mut best_value = f64::NEG_INFINITY;
    for _ in 0..config.iterations {
        let mut spare = caps.clone();
        let mut assigned = vec![None; r];
        for i in 0..r {
            let j = rng.gen_range(0..h);
            if spare[j] >= sizes[i] {
                spare[j] -= sizes[i];
                assigned[i] = Some(j);
            }
        }
        let candidate = Assignment { assigned };
        let value = objective(&candidate, probs).expect("matrix matches instance");
        if value > best_value {
            best_value = value;
            best = candidate;
        }
    }
    best
}

/// Greedy placement: each task ranks the helpers by `1/mu + 1/gamma + 1/xi`
/// in descending order (ties towards the lower helper id) and takes the
/// first one with room. Deterministic and probability-free — it only looks
/// at the raw mobility and processing parameters.
pub fn ga(instance: &Instance) -> Assignment {
    let r = instance.r();
    let h = instance.h();
    let sizes = instance.sizes();
    let mut spare = instance.capacities();
    let mut assigned = vec![None; r];
    for i in 0..r {
        let key = |j: usize| {
            let m = &instance.helpers[j].mobility;
            1.0 / m.mu + 1.0 / m.gamma + 1.0 / instance.xi[i][j]
        };
        let mut order: Vec<usize> = (0..h).collect();
        order.sort_by(|&a, &b| key(b).partial_cmp(&key(a)).unwrap().then(a.cmp(&b)));
        for j in order {
            if spare[j] >= sizes[i] {
                spare[j] -= sizes[i];
                assigned[i] = Some(j);
                break;
            }
        }
    }
    Assignment { assigned }
}
