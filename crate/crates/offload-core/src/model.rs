//! Problem data and the two things every solver agrees on: feasibility and
//! the objective.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::success_prob::SuccessProbMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("task {task} assigned to helper {helper}, but there are only {helpers} helpers")]
    HelperOutOfRange {
        task: usize,
        helper: usize,
        helpers: usize,
    },
    #[error("task {0} appears in more than one packing entry")]
    DuplicateTask(usize),
}

/// A task to offload; `size` is in the same abstract units as helper capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: usize,
    pub size: usize,
}

/// Exponential rates of the helper's contact (mu) and inter-contact (gamma)
/// periods. Larger mu means shorter contacts; larger gamma means shorter gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    pub mu: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelperSpec {
    pub id: usize,
    pub capacity: usize,
    #[serde(flatten)]
    pub mobility: MobilityParams,
}

/// One offloading scenario: R tasks, H helpers, the R x H matrix of Erlang
/// processing *rates* xi, and the instance-wide Erlang shape `n_h`.
///
/// Serialized as JSON with fields `tasks`, `helpers` (mu/gamma inlined),
/// `xi` (row-major array of arrays) and `n_h`; this is the interchange
/// format used by the CLI and the test fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub tasks: Vec<TaskSpec>,
    pub helpers: Vec<HelperSpec>,
    pub xi: Vec<Vec<f64>>,
    pub n_h: u32,
}

impl Instance {
    pub fn new(
        tasks: Vec<TaskSpec>,
        helpers: Vec<HelperSpec>,
        xi: Vec<Vec<f64>>,
        n_h: u32,
    ) -> Result<Self, ModelError> {
        let inst = Instance {
            tasks,
            helpers,
            xi,
            n_h,
        };
        inst.check()?;
        Ok(inst)
    }

    /// Parse and validate the JSON interchange form.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let inst: Instance = serde_json::from_str(text)
            .map_err(|e| ModelError::Parameter(format!("instance JSON: {e}")))?;
        inst.check()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Short hex digest of the canonical JSON form; identifies an instance in
    /// benchmark output.
    pub fn digest(&self) -> String {
        let compact = serde_json::to_string(self).expect("instance serializes");
        let hash = Sha256::digest(compact.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in &hash[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn r(&self) -> usize {
        self.tasks.len()
    }

    pub fn h(&self) -> usize {
        self.helpers.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.tasks.iter().map(|t| t.size).collect()
    }

    pub fn capacities(&self) -> Vec<usize> {
        self.helpers.iter().map(|h| h.capacity).collect()
    }

    /// True when all helpers share (mu, gamma, capacity) and each task's xi is
    /// constant across helpers, i.e. helpers are interchangeable and the
    /// uniform-scenario solvers apply. Exact float equality on purpose: the
    /// generator emits shared values by construction.
    pub fn is_uniform(&self) -> bool {
        let Some(first) = self.helpers.first() else {
            return true;
        };
        let same_helpers = self.helpers.iter().all(|h| {
            h.capacity == first.capacity
                && h.mobility.mu == first.mobility.mu
                && h.mobility.gamma == first.mobility.gamma
        });
        same_helpers && self.xi.iter().all(|row| row.iter().all(|&x| x == row[0]))
    }

    fn check(&self) -> Result<(), ModelError> {
        for (i, t) in self.tasks.iter().enumerate() {
            if t.id != i {
                return Err(ModelError::Parameter(format!(
                    "task ids must equal their position: found id {} at index {i}",
                    t.id
                )));
            }
            if t.size == 0 {
                return Err(ModelError::Parameter(format!(
                    "task {i}: size must be >= 1"
                )));
            }
        }
        for (j, h) in self.helpers.iter().enumerate() {
            if h.id != j {
                return Err(ModelError::Parameter(format!(
                    "helper ids must equal their position: found id {} at index {j}",
                    h.id
                )));
            }
            if !(h.mobility.mu > 0.0 && h.mobility.mu.is_finite()) {
                return Err(ModelError::Parameter(format!(
                    "helper {j}: mu must be positive and finite"
                )));
            }
            if !(h.mobility.gamma > 0.0 && h.mobility.gamma.is_finite()) {
                return Err(ModelError::Parameter(format!(
                    "helper {j}: gamma must be positive and finite"
                )));
            }
        }
        if self.xi.len() != self.tasks.len() {
            return Err(ModelError::Dimension(format!(
                "xi has {} rows, expected one per task ({})",
                self.xi.len(),
                self.tasks.len()
            )));
        }
        for (i, row) in self.xi.iter().enumerate() {
            if row.len() != self.helpers.len() {
                return Err(ModelError::Dimension(format!(
                    "xi row {i} has {} entries, expected one per helper ({})",
                    row.len(),
                    self.helpers.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(ModelError::Parameter(format!(
                        "xi[{i}][{j}] must be positive and finite, got {x}"
                    )));
                }
            }
        }
        if self.n_h == 0 {
            return Err(ModelError::Parameter("n_h must be >= 1".into()));
        }
        Ok(())
    }
}

/// Task-to-helper assignment: `assigned[i]` is the helper index of task `i`,
/// `None` when the task stays local. One-helper-per-task is structural here;
/// capacity feasibility is what [`validate`] checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub assigned: Vec<Option<usize>>,
}

impl Assignment {
    pub fn empty(r: usize) -> Self {
        Assignment {
            assigned: vec![None; r],
        }
    }

    pub fn assigned_count(&self) -> usize {
        self.assigned.iter().filter(|a| a.is_some()).count()
    }
}

/// Check an assignment against an instance: every task's helper index in
/// range and every helper's load within capacity. Dimension problems are
/// errors (the caller mixed up instances); capacity violations are `Ok(false)`.
pub fn validate(instance: &Instance, assignment: &Assignment) -> Result<bool, ModelError> {
    if assignment.assigned.len() != instance.r() {
        return Err(ModelError::Dimension(format!(
            "assignment covers {} tasks, instance has {}",
            assignment.assigned.len(),
            instance.r()
        )));
    }
    let mut load = vec![0usize; instance.h()];
    for (i, &slot) in assignment.assigned.iter().enumerate() {
        if let Some(j) = slot {
            if j >= instance.h() {
                return Err(ModelError::HelperOutOfRange {
                    task: i,
                    helper: j,
                    helpers: instance.h(),
                });
            }
            load[j] += instance.tasks[i].size;
        }
    }
    Ok(load
        .iter()
        .zip(&instance.helpers)
        .all(|(&l, h)| l <= h.capacity))
}

/// Average offloading success probability of an assignment: the mean of
/// p_ij over all R tasks, counting unassigned tasks as zero.
pub fn objective(assignment: &Assignment, probs: &SuccessProbMatrix) -> Result<f64, ModelError> {
    let r = probs.r();
    if assignment.assigned.len() != r {
        return Err(ModelError::Dimension(format!(
            "assignment covers {} tasks, probability matrix has {r}",
            assignment.assigned.len()
        )));
    }
    if r == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (i, &slot) in assignment.assigned.iter().enumerate() {
        if let Some(j) = slot {
            if j >= probs.h() {
                return Err(ModelError::HelperOutOfRange {
                    task: i,
                    helper: j,
                    helpers: probs.h(),
                });
            }
            total += probs.get(i, j);
        }
    }
    Ok(total / r as f64)
}
