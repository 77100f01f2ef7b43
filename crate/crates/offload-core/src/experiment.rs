//! Benchmark sweeps: run a set of solvers over seeded random instances and
//! collect one CSV row per (sweep point, repetition, algorithm).
//!
//! Reproducibility is the whole point here. Instance seeds are derived from
//! the master seed with a splitmix64 mix of the grid position, the random
//! search baseline gets its own derived seed, and timings can be forced to
//! zero so that two runs of the same configuration emit byte-identical CSV.

use std::fmt;
use std::io::{self, Write};
use std::time::Instant;

use thiserror::Error;

use crate::baselines::{ga, mcsa, BaselineConfig};
use crate::generator::{generate_instance, GeneratorConfig, NTarget};
use crate::knapsack::{tsdp, upper_bound, UniformInstance};
use crate::model::{objective, Assignment, Instance, ModelError};
use crate::rma::{rma_solve, RmaConfig};
use crate::success_prob::{build_prob_matrix, SuccessProbMatrix};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{algorithm} requires uniform instances; set the generator's uniform flag")]
    NonUniform { algorithm: Algorithm },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Solvers a sweep can run. The uniform-only entries reject general
/// instances instead of silently computing nonsense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Per-helper dynamic programming; uniform instances only.
    Tsdp,
    /// Pooled-capacity relaxation bound; uniform instances only.
    UpperBound,
    /// Merge-and-reallocate solver starting from an empty assignment.
    Rma,
    /// Same solver warm-started from the DP result; uniform instances only.
    RmaTsdp,
    /// Random placement search baseline.
    Mcsa,
    /// Parameter-ranking greedy baseline.
    Ga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Tsdp,
        Algorithm::UpperBound,
        Algorithm::Rma,
        Algorithm::RmaTsdp,
        Algorithm::Mcsa,
        Algorithm::Ga,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Tsdp => "tsdp",
            Algorithm::UpperBound => "upper_bound",
            Algorithm::Rma => "rma",
            Algorithm::RmaTsdp => "rma_tsdp",
            Algorithm::Mcsa => "mcsa",
            Algorithm::Ga => "ga",
        }
    }

    pub fn parse(name: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.name() == name)
    }

    fn requires_uniform(&self) -> bool {
        matches!(
            self,
            Algorithm::Tsdp | Algorithm::UpperBound | Algorithm::RmaTsdp
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which generator knob the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Task count.
    R,
    /// Helper count.
    H,
    /// Shape divisor aimed at `mu`.
    NMu,
    /// Shape divisor aimed at `gamma`.
    NGamma,
    /// Shape divisor aimed at `xi`.
    NXi,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::R => "r",
            SweepVar::H => "h",
            SweepVar::NMu => "n_mu",
            SweepVar::NGamma => "n_gamma",
            SweepVar::NXi => "n_xi",
        }
    }

    pub fn parse(name: &str) -> Option<SweepVar> {
        [
            SweepVar::R,
            SweepVar::H,
            SweepVar::NMu,
            SweepVar::NGamma,
            SweepVar::NXi,
        ]
        .into_iter()
        .find(|s| s.name() == name)
    }

    fn apply(&self, base: &GeneratorConfig, value: f64) -> GeneratorConfig {
        let mut cfg = base.clone();
        match self {
            SweepVar::R => cfg.r = value.round() as usize,
            SweepVar::H => cfg.h = value.round() as usize,
            SweepVar::NMu => {
                cfg.n_divisor = value;
                cfg.n_target = NTarget::Mu;
            }
            SweepVar::NGamma => {
                cfg.n_divisor = value;
                cfg.n_target = NTarget::Gamma;
            }
            SweepVar::NXi => {
                cfg.n_divisor = value;
                cfg.n_target = NTarget::Xi;
            }
        }
        cfg
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub base: GeneratorConfig,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub repetitions: usize,
    pub algorithms: Vec<Algorithm>,
    pub delta: f64,
    pub max_iterations: usize,
    pub mcsa_iterations: usize,
    /// Report every wall time as zero so repeated runs compare bytewise.
    pub zero_timings: bool,
    /// Master seed; per-instance seeds are derived from it.
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(base: GeneratorConfig, sweep: SweepVar, values: Vec<f64>) -> Self {
        ExperimentConfig {
            base,
            sweep,
            values,
            repetitions: 30,
            algorithms: vec![Algorithm::Rma, Algorithm::Mcsa, Algorithm::Ga],
            delta: -0.1,
            max_iterations: 100,
            mcsa_iterations: 10_000,
            zero_timings: false,
            seed: 0,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub objective: f64,
    pub wall_ms: f64,
    pub instance_digest: String,
}

/// splitmix64 finalizer; decorrelates structured seed inputs.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn run_algorithm(
    algorithm: Algorithm,
    instance: &Instance,
    probs: &SuccessProbMatrix,
    config: &ExperimentConfig,
    instance_seed: u64,
) -> Result<f64, ExperimentError> {
    if algorithm.requires_uniform() && !instance.is_uniform() {
        return Err(ExperimentError::NonUniform { algorithm });
    }
    let rma_config = RmaConfig {
        delta: config.delta,
        max_iterations: config.max_iterations,
    };
    let value = match algorithm {
        Algorithm::Tsdp => {
            let uniform = UniformInstance::from_instance(instance, probs)?;
            objective(&tsdp(&uniform), probs)?
        }
        Algorithm::UpperBound => {
            let uniform = UniformInstance::from_instance(instance, probs)?;
            upper_bound(&uniform)
        }
        Algorithm::Rma => {
            let result = rma_solve(
                instance,
                probs,
                &rma_config,
                &Assignment::empty(instance.r()),
            )?;
            objective(&result.assignment, probs)?
        }
        Algorithm::RmaTsdp => {
            let uniform = UniformInstance::from_instance(instance, probs)?;
            let start = tsdp(&uniform);
            let result = rma_solve(instance, probs, &rma_config, &start)?;
            objective(&result.assignment, probs)?
        }
        Algorithm::Mcsa => {
            let baseline = BaselineConfig {
                iterations: config.mcsa_iterations,
                seed: splitmix64(instance_seed ^ 0x6d63_7361),
            };
            objective(&mcsa(instance, probs, &baseline), probs)?
        }
        Algorithm::Ga => objective(&ga(instance), probs)?,
    };
    Ok(value)
}

/// Run the full sweep grid. Record order is sweep value, then repetition,
/// then algorithm, so the CSV holds
/// `values.len() * repetitions * algorithms.len()` rows in a fixed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut records = Vec::new();
    for &value in &config.values {
        let gen_config = config.sweep.apply(&config.base, value);
        for rep in 0..config.repetitions {
            // repetition k draws the same base seed at every sweep point
            // (common random numbers), so point-to-point differences come
            // from the swept knob rather than instance noise
            let instance_seed = splitmix64(config.seed ^ splitmix64(rep as u64));
            let instance = generate_instance(&GeneratorConfig {
                seed: instance_seed,
                ..gen_config.clone()
            })?;
            let probs = build_prob_matrix(&instance);
            let digest = instance.digest();
            for &algorithm in &config.algorithms {
                let started = Instant::now();
                let objective = run_algorithm(algorithm, &instance, &probs, config, instance_seed)?;
                let wall_ms = if config.zero_timings {
                    0.0
                } else {
                    started.elapsed().as_secs_f64() * 1e3
                };
                records.push(ExperimentRecord {
                    sweep_var: config.sweep,
                    sweep_value: value,
                    seed: instance_seed,
                    algorithm,
                    objective,
                    wall_ms,
                    instance_digest: digest.clone(),
                });
            }
        }
    }
    Ok(records)
}

/// Write records as CSV: fixed header, LF line endings, `Display`-formatted
/// numbers (so `50.0` prints as `50`).
pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: &mut W) -> io::Result<()> {
    out.write_all(b"sweep_var,sweep_value,seed,algorithm,objective,wall_ms,instance_digest\n")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.sweep_var,
            r.sweep_value,
            r.seed,
            r.algorithm,
            r.objective,
            r.wall_ms,
            r.instance_digest
        )?;
    }
    Ok(())
}
