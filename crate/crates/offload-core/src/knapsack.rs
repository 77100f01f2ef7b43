//! Uniform-scenario solvers. When all helpers share (mu, gamma, capacity)
//! and each task's processing rate does not depend on the helper, helpers
//! are interchangeable and the problem reduces to knapsacks: an exact 0/1
//! DP over one capacity budget, a pooled-capacity relaxation that upper
//! bounds every feasible assignment, and the sequential per-helper heuristic
//! that repeatedly commits the DP's picks helper by helper.

use crate::model::{Assignment, Instance, ModelError, TaskSpec};
use crate::success_prob::SuccessProbMatrix;

/// An instance seen through uniform glasses: one capacity, one p-value per
/// task (the same for every helper).
#[derive(Debug, Clone, PartialEq)]
pub struct UniformInstance {
    pub tasks: Vec<TaskSpec>,
    pub helper_count: usize,
    pub capacity: usize,
    pub task_probs: Vec<f64>,
}

impl UniformInstance {
    /// Project a general instance down, refusing when helpers are not
    /// actually interchangeable.
    pub fn from_instance(
        instance: &Instance,
        probs: &SuccessProbMatrix,
    ) -> Result<Self, ModelError> {
        if !instance.is_uniform() {
            return Err(ModelError::Parameter(
                "helpers are not uniform (capacity, mu, gamma and per-task xi must not vary across helpers)"
                    .into(),
            ));
        }
        let task_probs = (0..instance.r())
            .map(|i| {
                if instance.h() > 0 {
                    probs.get(i, 0)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(UniformInstance {
            tasks: instance.tasks.clone(),
            helper_count: instance.h(),
            capacity: instance.helpers.first().map_or(0, |h| h.capacity),
            task_probs,
        })
    }
}

/// Filled DP table: `values[r][q]` is the best probability sum using the
/// first `r` tasks within capacity `q`; `choices[r][q]` records whether task
/// `r-1` is taken at that state. Ties prefer leaving the task out, detected
/// by exact comparison (a tie means both branches summed the same numbers).
#[derive(Debug, Clone)]
pub struct DpTable {
    pub values: Vec<Vec<f64>>,
    pub choices: Vec<Vec<bool>>,
}

pub fn dp_table(tasks: &[TaskSpec], task_probs: &[f64], budget: usize) -> DpTable {
    assert_eq!(tasks.len(), task_probs.len());
    let r = tasks.len();
    let mut values = vec![vec![0.0f64; budget + 1]; r + 1];
    let mut choices = vec![vec![false; budget + 1]; r + 1];
    for i in 1..=r {
        let (l, p) = (tasks[i - 1].size, task_probs[i - 1]);
        for q in 0..=budget {
            let skip = values[i - 1][q];
            let mut best = skip;
            let mut take = false;
            if l <= q {
                let with = values[i - 1][q - l] + p;
                if with > skip {
                    best = with;
                    take = true;
                }
            }
            values[i][q] = best;
            choices[i][q] = take;
        }
    }
    DpTable { values, choices }
}

/// Best probability sum within `budget`, without materializing the choice
/// table: two rolling rows, O(budget) memory.
pub fn dp_value(tasks: &[TaskSpec], task_probs: &[f64], budget: usize) -> f64 {
    assert_eq!(tasks.len(), task_probs.len());
    // spending more than the total size is pointless and would only blow up
    // the table when budgets are pooled
    let total: usize = tasks.iter().map(|t| t.size).sum();
    let budget = budget.min(total);
    let mut prev = vec![0.0f64; budget + 1];
    let mut cur = vec![0.0f64; budget + 1];
    for (t, &p) in tasks.iter().zip(task_probs) {
        for q in 0..=budget {
            let mut best = prev[q];
            if t.size <= q {
                let with = prev[q - t.size] + p;
                if with > best {
                    best = with;
                }
            }
            cur[q] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[budget]
}

/// Exact 0/1 selection maximizing the probability sum within the capacity
/// budget. The value is the raw sum; callers divide by R when they want the
/// average-over-tasks objective.
pub fn dp_solve(tasks: &[TaskSpec], task_probs: &[f64], budget: usize) -> (Vec<bool>, f64) {
    let total: usize = tasks.iter().map(|t| t.size).sum();
    let clamped = budget.min(total);
    let table = dp_table(tasks, task_probs, clamped);
    let r = tasks.len();
    let mut selection = vec![false; r];
    let mut q = clamped;
    for i in (1..=r).rev() {
        if table.choices[i][q] {
            selection[i - 1] = true;
            q -= tasks[i - 1].size;
        }
    }
    (selection, table.values[r][clamped])
}

/// Pooled-capacity relaxation: one knapsack over the combined budget
/// capacity * helper_count, divided by R. No feasible assignment of the
/// uniform instance can beat it, because merging all helpers' loads into the
/// pool preserves feasibility and the objective.
pub fn upper_bound(uniform: &UniformInstance) -> f64 {
    let r = uniform.tasks.len();
    if r == 0 {
        return 0.0;
    }
    let pooled = uniform.capacity.saturating_mul(uniform.helper_count);
    dp_value(&uniform.tasks, &uniform.task_probs, pooled) / r as f64
}

/// Sequential per-helper heuristic: helper by helper, solve the single
/// knapsack over the still-unassigned tasks and commit the winners. Always
/// feasible; the first helper's haul is the single-knapsack optimum.
pub fn tsdp(uniform: &UniformInstance) -> Assignment {
    let r = uniform.tasks.len();
    let mut assignment = Assignment::empty(r);
    let mut remaining: Vec<usize> = (0..r).collect();
    for j in 0..uniform.helper_count {
        if remaining.is_empty() {
            break;
        }
        let tasks: Vec<TaskSpec> = remaining.iter().map(|&i| uniform.tasks[i]).collect();
        let probs: Vec<f64> = remaining.iter().map(|&i| uniform.task_probs[i]).collect();
        let (picked, _) = dp_solve(&tasks, &probs, uniform.capacity);
        let mut still = Vec::with_capacity(remaining.len());
        for (slot, &i) in picked.iter().zip(&remaining) {
            if *slot {
                assignment.assigned[i] = Some(j);
            } else {
                still.push(i);
            }
        }
        remaining = still;
    }
    assignment
}
