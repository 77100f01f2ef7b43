//! Maximum-value pairing of elements under a symmetric value matrix.
//!
//! Elements may pair up (earning the symmetric value, counted once) or stay
//! single at value zero, and some pairs are forbidden outright. The solver
//! runs the O(d^3) Hungarian assignment on the matrix with the diagonal
//! admitted at 0, which yields a permutation; fixed points and 2-cycles map
//! straight onto a pairing, and longer cycles are broken by greedily taking
//! their highest-value edges. Half the permutation optimum is a valid upper
//! bound on any pairing value, so when the greedy decomposition leaves a gap
//! (odd cycles whose leftovers should re-pair across cycles), a small
//! branch-and-bound over force/forbid decisions on cycle edges closes it
//! exactly. In practice the assignment relaxation is almost always tight and
//! the search finishes at the root.

use thiserror::Error;

/// Sentinel for forbidden pairs. IEEE negative infinity, so accidental
/// arithmetic saturates instead of wrapping.
pub const NEG_INF: f64 = f64::NEG_INFINITY;

#[derive(Debug, Error, PartialEq)]
pub enum MatchingError {
    #[error("value matrix row {row} has length {len}, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("value matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("value matrix entry ({i}, {j}) is not a number or is +inf")]
    BadEntry { i: usize, j: usize },
}

/// Symmetric d x d value matrix with NEG_INF marking forbidden pairs.
/// Diagonal entries are ignored; self-matching is always available at 0.
#[derive(Debug, Clone)]
pub struct ValueMatrix {
    v: Vec<Vec<f64>>,
}

impl ValueMatrix {
    #[allow(clippy::needless_range_loop)] // symmetric checks read best indexed
    pub fn new(mut v: Vec<Vec<f64>>) -> Result<Self, MatchingError> {
        let d = v.len();
        for (row, r) in v.iter().enumerate() {
            if r.len() != d {
                return Err(MatchingError::NotSquare {
                    row,
                    len: r.len(),
                    expected: d,
                });
            }
        }
        for i in 0..d {
            for j in 0..d {
                let x = v[i][j];
                if x.is_nan() || x == f64::INFINITY {
                    return Err(MatchingError::BadEntry { i, j });
                }
                if i < j {
                    let y = v[j][i];
                    let both_forbidden = x == NEG_INF && y == NEG_INF;
                    if !both_forbidden && x != y {
                        return Err(MatchingError::Asymmetric { i, j });
                    }
                }
            }
        }
        for i in 0..d {
            v[i][i] = 0.0;
        }
        Ok(ValueMatrix { v })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[i][j]
    }
}

/// A pairing: disjoint unordered pairs plus the elements left single.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub selfs: Vec<usize>,
    pub value: f64,
}

/// Maximum-cost assignment on a dense square matrix of finite values.
/// Standard Hungarian method with row/column potentials on cost = -value;
/// returns the column of each row and the total value.
fn assignment_max(values: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = values.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let inf = f64::INFINITY;
    // 1-based arrays; column 0 is the virtual start of each augmenting search
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row matched to column j (0 = free)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = -values[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    let total = perm.iter().enumerate().map(|(i, &j)| values[i][j]).sum();
    (perm, total)
}

fn cycles_of(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut u = start;
        while !seen[u] {
            seen[u] = true;
            cyc.push(u);
            u = perm[u];
        }
        cycles.push(cyc);
    }
    cycles
}

/// Break a permutation into a pairing: 2-cycles with positive value become
/// pairs, longer cycles give up their edges greedily by value, everything
/// else self-matches.
fn extract_pairing(values: &[Vec<f64>], perm: &[usize]) -> (Vec<(usize, usize)>, f64) {
    let mut pairs = Vec::new();
    let mut total = 0.0;
    for cyc in cycles_of(perm) {
        match cyc.len() {
            0 | 1 => {}
            2 => {
                let (a, b) = (cyc[0], cyc[1]);
                if values[a][b] > 0.0 {
                    pairs.push((a.min(b), a.max(b)));
                    total += values[a][b];
                }
            }
            len => {
                let mut edges: Vec<(f64, usize, usize)> = (0..len)
                    .map(|t| {
                        let (a, b) = (cyc[t], cyc[(t + 1) % len]);
                        (values[a][b], a, b)
                    })
                    .collect();
                edges.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
                let mut taken = vec![false; values.len()];
                for (w, a, b) in edges {
                    if w <= 0.0 {
                        break;
                    }
                    if taken[a] || taken[b] {
                        continue;
                    }
                    taken[a] = true;
                    taken[b] = true;
                    pairs.push((a.min(b), a.max(b)));
                    total += w;
                }
            }
        }
    }
    (pairs, total)
}

/// Safety valve for degenerate large inputs; unreachable at the matrix sizes
/// the solvers produce (observed node counts stay in single digits).
const MAX_NODES: usize = 10_000;

#[derive(Clone)]
struct Node {
    forced_value: f64,
    forced_pairs: Vec<(usize, usize)>,
    active: Vec<usize>,
    forbidden: Vec<(usize, usize)>,
}

/// Best pairing under the matrix: maximizes the summed pair values with
/// self-matches free, never using a forbidden pair. The returned value is
/// always >= 0 (all-single is feasible) and equals the sum over the returned
/// pairs.
pub fn solve_matching(values: &ValueMatrix) -> Pairing {
    let d = values.dim();
    let mut big = 1.0f64;
    for i in 0..d {
        for j in 0..d {
            let x = values.get(i, j);
            if x.is_finite() {
                big += x.abs();
            }
        }
    }

    let mut best_pairs: Vec<(usize, usize)> = Vec::new();
    let mut best_value = 0.0f64;
    let mut stack = vec![Node {
        forced_value: 0.0,
        forced_pairs: Vec::new(),
        active: (0..d).collect(),
        forbidden: Vec::new(),
    }];
    let mut nodes = 0usize;
    while let Some(node) = stack.pop() {
        if nodes >= MAX_NODES {
            break;
        }
        nodes += 1;
        let m = node.active.len();
        if m == 0 {
            if node.forced_value > best_value {
                best_value = node.forced_value;
                best_pairs = node.forced_pairs.clone();
            }
            continue;
        }
        // assignment relaxation on the active submatrix: forbidden pairs get
        // a finite, dominated stand-in so potentials stay finite
        let mut sub = vec![vec![0.0f64; m]; m];
        for (a, &i) in node.active.iter().enumerate() {
            for (b, &j) in node.active.iter().enumerate() {
                if a == b {
                    continue;
                }
                let x = values.get(i, j);
                let key = (i.min(j), i.max(j));
                sub[a][b] = if x == NEG_INF || node.forbidden.contains(&key) {
                    -big
                } else {
                    x
                };
            }
        }
        let (perm, perm_value) = assignment_max(&sub);
        let upper = node.forced_value + perm_value / 2.0;
        if upper <= best_value + 1e-12 {
            continue;
        }
        let (ext_pairs, ext_value) = extract_pairing(&sub, &perm);
        if node.forced_value + ext_value > best_value {
            best_value = node.forced_value + ext_value;
            best_pairs = node.forced_pairs.clone();
            best_pairs.extend(ext_pairs.iter().map(|&(a, b)| {
                (
                    node.active[a].min(node.active[b]),
                    node.active[a].max(node.active[b]),
                )
            }));
        }
        // pick the strongest edge of any cycle longer than two; if there is
        // none the permutation is an involution and this node is solved
        let mut branch: Option<(usize, usize)> = None;
        let mut branch_value = f64::NEG_INFINITY;
        for cyc in cycles_of(&perm) {
            if cyc.len() < 3 {
                continue;
            }
            for t in 0..cyc.len() {
                let (a, b) = (cyc[t], cyc[(t + 1) % cyc.len()]);
                if sub[a][b] > branch_value {
                    branch_value = sub[a][b];
                    branch = Some((a, b));
                }
            }
        }
        let Some((a, b)) = branch else { continue };
        let (i, j) = (
            node.active[a].min(node.active[b]),
            node.active[a].max(node.active[b]),
        );
        // child 1: forbid the edge
        let mut forbid = node.clone();
        forbid.forbidden.push((i, j));
        stack.push(forbid);
        // child 2: force the pair (only meaningful when it is allowed at all)
        if values.get(i, j) != NEG_INF {
            let mut force = node.clone();
            force.forced_value += values.get(i, j);
            force.forced_pairs.push((i, j));
            force.active.retain(|&x| x != i && x != j);
            stack.push(force);
        }
    }

    best_pairs.sort_unstable();
    let mut matched = vec![false; d];
    for &(a, b) in &best_pairs {
        matched[a] = true;
        matched[b] = true;
    }
    let selfs: Vec<usize> = (0..d).filter(|&i| !matched[i]).collect();
    // report the value as the clean sum over the chosen pairs
    let value = best_pairs.iter().map(|&(a, b)| values.get(a, b)).sum();
    Pairing {
        pairs: best_pairs,
        selfs,
        value,
    }
}
