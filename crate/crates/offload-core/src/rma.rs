//! Reallocation-and-matching heuristic for the general (non-uniform) case.
//!
//! The solver keeps the current solution as a *packing*: each used helper
//! carries the set of tasks assigned to it, and every unassigned task sits in
//! a pool where it contributes a fixed penalty `delta < 0` instead of a
//! success probability. One round builds a symmetric value matrix over the
//! elements (unused helpers, pooled tasks, and helper entries), where each
//! off-diagonal entry is the exact change in packing value if those two
//! elements merged; a maximum-value pairing of the elements is solved, the
//! winning merges are applied, and the round repeats while the packing value
//! strictly improves.
//!
//! Merging two task-carrying elements considers three candidate moves — shift
//! everything onto the first helper, shift everything onto the second, or run
//! a greedy one-pass reallocation that migrates individual tasks towards
//! whichever side serves them better — and keeps the best. The greedy pass is
//! also exposed on its own as [`reallocate_greedy`].

use std::collections::{BTreeMap, BTreeSet};

use crate::matching::{solve_matching, ValueMatrix, NEG_INF};
use crate::model::{Assignment, Instance, ModelError};
use crate::success_prob::SuccessProbMatrix;

/// Tuning knobs for [`rma_solve`].
#[derive(Debug, Clone)]
pub struct RmaConfig {
    /// Value carried by each unassigned task. Must be negative so that
    /// parking a task in the pool is never preferred over serving it.
    pub delta: f64,
    /// Hard cap on improvement rounds; the loop usually stops much earlier
    /// when a round yields no strict gain.
    pub max_iterations: usize,
}

impl Default for RmaConfig {
    fn default() -> Self {
        RmaConfig {
            delta: -0.1,
            max_iterations: 100,
        }
    }
}

/// Output of [`rma_solve`].
#[derive(Debug, Clone)]
pub struct RmaResult {
    pub assignment: Assignment,
    /// Packing value after each accepted round, in order. Strictly
    /// increasing by construction.
    pub accepted_values: Vec<f64>,
    /// Rounds evaluated, including the final non-improving one.
    pub iterations: usize,
}

/// Current solution state: which helper carries which tasks. Tasks absent
/// from every entry are unassigned (pooled). Helpers with no tasks do not
/// appear as entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packing {
    r: usize,
    h: usize,
    entries: BTreeMap<usize, BTreeSet<usize>>,
}

impl Packing {
    pub fn empty(r: usize, h: usize) -> Self {
        Packing {
            r,
            h,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_assignment(
        r: usize,
        h: usize,
        assignment: &Assignment,
    ) -> Result<Self, ModelError> {
        if assignment.assigned.len() != r {
            return Err(ModelError::Dimension(format!(
                "assignment covers {} tasks, instance has {r}",
                assignment.assigned.len()
            )));
        }
        let mut entries: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (task, slot) in assignment.assigned.iter().enumerate() {
            if let Some(j) = *slot {
                if j >= h {
                    return Err(ModelError::HelperOutOfRange {
                        task,
                        helper: j,
                        helpers: h,
                    });
                }
                entries.entry(j).or_default().insert(task);
            }
        }
        Ok(Packing { r, h, entries })
    }

    pub fn to_assignment(&self) -> Assignment {
        let mut assigned = vec![None; self.r];
        for (&j, tasks) in &self.entries {
            for &i in tasks {
                assigned[i] = Some(j);
            }
        }
        Assignment { assigned }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &BTreeSet<usize>)> {
        self.entries.iter().map(|(&j, tasks)| (j, tasks))
    }

    pub fn unused_helpers(&self) -> Vec<usize> {
        (0..self.h)
            .filter(|j| !self.entries.contains_key(j))
            .collect()
    }

    pub fn unassigned_tasks(&self) -> Vec<usize> {
        let mut assigned = vec![false; self.r];
        for tasks in self.entries.values() {
            for &i in tasks {
                assigned[i] = true;
            }
        }
        (0..self.r).filter(|&i| !assigned[i]).collect()
    }

    /// Helper currently carrying `task`, if any.
    pub fn slot_of(&self, task: usize) -> Option<usize> {
        self.entries
            .iter()
            .find(|(_, tasks)| tasks.contains(&task))
            .map(|(&j, _)| j)
    }

    /// Packing value: summed success probabilities of the served tasks plus
    /// `delta` for every pooled task.
    pub fn value(&self, probs: &SuccessProbMatrix, delta: f64) -> f64 {
        let mut total = delta * self.unassigned_tasks().len() as f64;
        for (j, tasks) in &self.entries {
            for &i in tasks {
                total += probs.get(i, *j);
            }
        }
        total
    }

    /// Total size of the tasks currently on helper `j`.
    pub fn load(&self, sizes: &[usize], j: usize) -> usize {
        self.entries
            .get(&j)
            .map(|tasks| tasks.iter().map(|&i| sizes[i]).sum())
            .unwrap_or(0)
    }

    fn relocate(&mut self, task: usize, dest: Option<usize>) {
        for tasks in self.entries.values_mut() {
            tasks.remove(&task);
        }
        if let Some(j) = dest {
            self.entries.entry(j).or_default().insert(task);
        }
        self.entries.retain(|_, tasks| !tasks.is_empty());
    }
}

/// A row/column of the merge value matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    /// Helper with no tasks.
    Helper(usize),
    /// Unassigned task.
    Task(usize),
    /// Used helper, identified by its id; the task set lives in the packing.
    Entry(usize),
}

/// Net effect of merging two elements: the change in packing value and the
/// task moves realising it (`None` destination = back to the pool).
#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub value: f64,
    pub moves: Vec<(usize, Option<usize>)>,
}

/// One side of a greedy reallocation: the tasks currently held, the spare
/// capacity left (zero for the unassigned pool), and the success value each
/// task earns *on this side*, indexed by task id.
#[derive(Debug, Clone)]
pub struct ReallocSide {
    pub tasks: BTreeSet<usize>,
    pub spare: usize,
    pub probs: Vec<f64>,
}

/// Result of [`reallocate_greedy`]: total gain and the tasks that switched
/// sides, in execution order.
#[derive(Debug, Clone)]
pub struct ReallocResult {
    pub gain: f64,
    pub moved: Vec<usize>,
}

/// One-pass greedy exchange between two sides. Every task is scored by how
/// much it would gain on the opposite side; candidates are visited in
/// descending gain order (ties by task id) and moved whenever the gain is
/// positive and the destination still has room. Capacities are tracked as
/// the moves execute, so every executed prefix is feasible; the total gain
/// therefore never exceeds the best feasible exchange but is usually equal
/// to it.
pub fn reallocate_greedy(
    sizes: &[usize],
    first: &ReallocSide,
    second: &ReallocSide,
) -> ReallocResult {
    let mut candidates: Vec<(f64, usize, bool)> = Vec::new();
    for &i in &first.tasks {
        candidates.push((second.probs[i] - first.probs[i], i, true));
    }
    for &i in &second.tasks {
        candidates.push((first.probs[i] - second.probs[i], i, false));
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let mut spare_first = first.spare;
    let mut spare_second = second.spare;
    let mut gain = 0.0;
    let mut moved = Vec::new();
    for (delta, i, to_second) in candidates {
        if delta <= 0.0 {
            break;
        }
        let dest = if to_second {
            &mut spare_second
        } else {
            &mut spare_first
        };
        if *dest < sizes[i] {
            continue;
        }
        *dest -= sizes[i];
        if to_second {
            spare_first += sizes[i];
        } else {
            spare_second += sizes[i];
        }
        gain += delta;
        moved.push(i);
    }
    ReallocResult { gain, moved }
}

struct Ctx<'a> {
    sizes: Vec<usize>,
    caps: Vec<usize>,
    probs: &'a SuccessProbMatrix,
    delta: f64,
}

impl<'a> Ctx<'a> {
    fn new(instance: &Instance, probs: &'a SuccessProbMatrix, delta: f64) -> Self {
        Ctx {
            sizes: instance.sizes(),
            caps: instance.capacities(),
            probs,
            delta,
        }
    }

    /// Success value of `task` when held by `slot` (`None` = pool).
    fn p(&self, task: usize, slot: Option<usize>) -> f64 {
        match slot {
            Some(j) => self.probs.get(task, j),
            None => self.delta,
        }
    }
}

/// A task-carrying side of a merge: a helper (or the pool) plus its tasks.
struct Slot {
    helper: Option<usize>,
    tasks: BTreeSet<usize>,
}

impl Slot {
    fn load(&self, sizes: &[usize]) -> usize {
        self.tasks.iter().map(|&i| sizes[i]).sum()
    }

    fn capacity(&self, caps: &[usize]) -> usize {
        self.helper.map(|j| caps[j]).unwrap_or(0)
    }
}

fn slot_for(packing: &Packing, e: &Element) -> Slot {
    match *e {
        Element::Helper(j) => Slot {
            helper: Some(j),
            tasks: BTreeSet::new(),
        },
        Element::Task(i) => Slot {
            helper: None,
            tasks: BTreeSet::from([i]),
        },
        Element::Entry(j) => Slot {
            helper: Some(j),
            tasks: packing.entries.get(&j).cloned().unwrap_or_default(),
        },
    }
}

/// Best of three merge moves between two task-carrying slots: greedily trade
/// individual tasks, or shift one side's whole set onto the other helper.
/// Ties keep the greedy plan, which never moves a task without strict gain.
fn merge_slots(ctx: &Ctx, a: &Slot, b: &Slot) -> MergeOutcome {
    let side = |s: &Slot| ReallocSide {
        tasks: s.tasks.clone(),
        spare: s.capacity(&ctx.caps).saturating_sub(s.load(&ctx.sizes)),
        probs: (0..ctx.sizes.len()).map(|i| ctx.p(i, s.helper)).collect(),
    };
    let greedy = reallocate_greedy(&ctx.sizes, &side(a), &side(b));
    let mut best = MergeOutcome {
        value: greedy.gain,
        moves: greedy
            .moved
            .iter()
            .map(|&i| {
                let dest = if a.tasks.contains(&i) {
                    b.helper
                } else {
                    a.helper
                };
                (i, dest)
            })
            .collect(),
    };
    // everything onto a's helper
    if a.load(&ctx.sizes) + b.load(&ctx.sizes) <= a.capacity(&ctx.caps) {
        let value: f64 = b
            .tasks
            .iter()
            .map(|&i| ctx.p(i, a.helper) - ctx.p(i, b.helper))
            .sum();
        if value > best.value {
            best = MergeOutcome {
                value,
                moves: b.tasks.iter().map(|&i| (i, a.helper)).collect(),
            };
        }
    }
    // everything onto b's helper
    if a.load(&ctx.sizes) + b.load(&ctx.sizes) <= b.capacity(&ctx.caps) {
        let value: f64 = a
            .tasks
            .iter()
            .map(|&i| ctx.p(i, b.helper) - ctx.p(i, a.helper))
            .sum();
        if value > best.value {
            best = MergeOutcome {
                value,
                moves: a.tasks.iter().map(|&i| (i, b.helper)).collect(),
            };
        }
    }
    best
}

/// Exact change in packing value if elements `a` and `b` merged, plus the
/// moves realising it. `None` marks forbidden combinations: two bare
/// helpers, two pooled tasks, or a pooled task that cannot fit on a bare
/// helper at all.
pub fn merge_value(
    instance: &Instance,
    probs: &SuccessProbMatrix,
    delta: f64,
    packing: &Packing,
    a: &Element,
    b: &Element,
) -> Option<MergeOutcome> {
    let ctx = Ctx::new(instance, probs, delta);
    match (*a, *b) {
        (Element::Helper(_), Element::Helper(_)) | (Element::Task(_), Element::Task(_)) => None,
        (Element::Helper(j), Element::Task(i)) | (Element::Task(i), Element::Helper(j)) => {
            if ctx.sizes[i] <= ctx.caps[j] {
                Some(MergeOutcome {
                    value: ctx.probs.get(i, j) - delta,
                    moves: vec![(i, Some(j))],
                })
            } else {
                None
            }
        }
        _ => Some(merge_slots(
            &ctx,
            &slot_for(packing, a),
            &slot_for(packing, b),
        )),
    }
}

/// Elements of the current packing (bare helpers, pooled tasks, entries, in
/// that order) and the symmetric matrix of merge values between them.
pub fn build_value_matrix(
    instance: &Instance,
    probs: &SuccessProbMatrix,
    delta: f64,
    packing: &Packing,
) -> (Vec<Element>, ValueMatrix) {
    let mut elements: Vec<Element> = Vec::new();
    elements.extend(packing.unused_helpers().into_iter().map(Element::Helper));
    elements.extend(packing.unassigned_tasks().into_iter().map(Element::Task));
    elements.extend(packing.entries.keys().map(|&j| Element::Entry(j)));

    let d = elements.len();
    let mut v = vec![vec![0.0f64; d]; d];
    for a in 0..d {
        for b in (a + 1)..d {
            let x = match merge_value(instance, probs, delta, packing, &elements[a], &elements[b]) {
                Some(outcome) => outcome.value,
                None => NEG_INF,
            };
            v[a][b] = x;
            v[b][a] = x;
        }
    }
    let matrix = ValueMatrix::new(v).expect("merge values form a symmetric matrix");
    (elements, matrix)
}

/// Iterative improvement: pair up elements by merge value, apply the winning
/// merges, and repeat while the packing value strictly increases.
pub fn rma_solve(
    instance: &Instance,
    probs: &SuccessProbMatrix,
    config: &RmaConfig,
    initial: &Assignment,
) -> Result<RmaResult, ModelError> {
    if !config.delta.is_finite() || config.delta >= 0.0 {
        return Err(ModelError::Parameter(format!(
            "delta must be negative and finite, got {}",
            config.delta
        )));
    }
    if config.max_iterations == 0 {
        return Err(ModelError::Parameter(
            "max_iterations must be at least 1".into(),
        ));
    }
    if !crate::model::validate(instance, initial)? {
        return Err(ModelError::Parameter(
            "initial assignment violates helper capacities".into(),
        ));
    }

    let mut packing = Packing::from_assignment(instance.r(), instance.h(), initial)?;
    let mut best = f64::NEG_INFINITY;
    let mut accepted_values = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let (elements, matrix) = build_value_matrix(instance, probs, config.delta, &packing);
        let pairing = solve_matching(&matrix);
        let mut candidate = packing.clone();
        for &(a, b) in &pairing.pairs {
            let outcome = merge_value(
                instance,
                probs,
                config.delta,
                &packing,
                &elements[a],
                &elements[b],
            )
            .expect("matched pairs are never forbidden");
            for (task, dest) in outcome.moves {
                candidate.relocate(task, dest);
            }
        }
        let value = candidate.value(probs, config.delta);
        if value > best {
            best = value;
            packing = candidate;
            accepted_values.push(value);
        } else {
            break;
        }
    }

    Ok(RmaResult {
        assignment: packing.to_assignment(),
        accepted_values,
        iterations,
    })
}
