//! Task offloading to intermittently connected device-to-device helpers.
//!
//! A requester hands tasks to nearby helpers whose connectivity alternates
//! between exponentially distributed contact and inter-contact periods, and
//! whose processing times are Erlang. An offload succeeds when the task
//! finishes while the helper is still in contact, so the per-pair success
//! probability depends on the mobility rates (mu, gamma), the processing
//! rate (xi) and the Erlang shape.
//!
//! The crate computes those probabilities (closed forms, an absorbing-chain
//! generalization, and Monte Carlo), and solves the resulting assignment
//! problem: exact knapsack DP plus a pooled-capacity upper bound for the
//! uniform-helper case, a repeated-matching local search for the general
//! case, and two baselines (random search, greedy ranking). A seeded
//! generator and a sweep harness reproduce the benchmark experiments.

pub mod baselines;
pub mod experiment;
pub mod generator;
pub mod knapsack;
pub mod matching;
pub mod model;
pub mod rma;
pub mod success_prob;

pub use model::{Assignment, HelperSpec, Instance, MobilityParams, ModelError, TaskSpec};
pub use rma::{Packing, RmaConfig, RmaResult};
pub use success_prob::{PairParams, SuccessProbMatrix};

#[cfg(test)]
pub(crate) type TestRng = rand_chacha::ChaCha8Rng;

#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> TestRng {
    use rand_chacha::rand_core::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
