//! Exact solver for the largest family with no `s` pairwise disjoint members.
//!
//! The search works on the complement. A maximum family can be taken closed
//! upward, so its complement `D` is a down-set, and `D` must contain at least
//! one block of every unordered partition of the ground set into `s` distinct
//! (at most one empty) blocks: if some `s` distinct pairwise disjoint members
//! existed, padding one of them with the uncovered elements would produce such
//! a partition entirely inside the family. Conversely the complement of any
//! down-set hitting all these partitions has no `s` pairwise disjoint members.
//! So the problem is an exact minimum hitting-set over down-sets, solved by
//! branch and bound with unit propagation and a disjoint-constraint packing
//! bound. Everything is deterministic and single-threaded.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::family::{ElementSet, SetFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Result of an exact run; `optimal` is false only when the budget expired.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub n: u32,
    pub s: u32,
    /// Size of the best family found.
    pub value: usize,
    /// Best family found (a witness of `value`).
    pub witness: SetFamily,
    /// True when `value` is proved maximum.
    pub optimal: bool,
    /// Valid lower bound on the maximum (= `value`).
    pub lower_bound: usize,
    /// Valid upper bound on the maximum (= `value` when optimal).
    pub upper_bound: usize,
    pub nodes: u64,
    pub elapsed: Duration,
    pub constraints: usize,
}

const UNDEC: u8 = 0;
const IN_F: u8 = 1;
const IN_D: u8 = 2;

/// Unordered partitions of the ground set into `s` pairwise distinct blocks
/// (at most one of them empty), each as an ascending tuple of block masks.
fn generate_constraints(n: u32, s: u32) -> Vec<Vec<u32>> {
    let s = s as usize;
    let mut out = Vec::new();
    let total: u64 = (s as u64).checked_pow(n).expect("assignment space fits u64");
    let mut blocks = vec![0u32; s];
    'outer: for code in 0..total {
        for b in blocks.iter_mut() {
            *b = 0;
        }
        let mut c = code;
        for e in 0..n {
            let d = (c % s as u64) as usize;
            c /= s as u64;
            blocks[d] |= 1 << e;
        }
        // Strictly ascending block masks: one canonical order per partition,
        // and equal blocks (two empties) are impossible.
        for w in blocks.windows(2) {
            if w[0] >= w[1] {
                continue 'outer;
            }
        }
        out.push(blocks.clone());
    }
    out.sort();
    out
}

struct Search {
    full_count: usize,
    constraints: Vec<Vec<u32>>,
    status: Vec<u8>,
    trail: Vec<u32>,
    d_count: usize,
    full_mask: u32,
    nodes: u64,
    deadline: Instant,
    aborted: bool,
    /// Size of the best (smallest) hitting down-set found so far.
    best: usize,
    best_d: Vec<u32>,
    /// Smallest lower bound over subtrees left open by an abort.
    min_open_lb: usize,
    mark: Vec<u32>,
    stamp: u32,
}

impl Search {
    fn assign(&mut self, v: u32, st: u8) -> bool {
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            let cur = self.status[u as usize];
            if cur == st {
                continue;
            }
            if cur != UNDEC {
                return false;
            }
            self.status[u as usize] = st;
            self.trail.push(u);
            if st == IN_D {
                self.d_count += 1;
                // A down-set contains every subset of each member.
                let mut bits = u;
                while bits != 0 {
                    let b = bits & bits.wrapping_neg();
                    stack.push(u & !b);
                    bits &= bits - 1;
                }
            } else {
                // The family side is closed upward.
                let mut rest = self.full_mask & !u;
                while rest != 0 {
                    let b = rest & rest.wrapping_neg();
                    stack.push(u | b);
                    rest &= rest - 1;
                }
            }
        }
        true
    }

    fn undo(&mut self, checkpoint: usize) {
        while self.trail.len() > checkpoint {
            let v = self.trail.pop().unwrap();
            if self.status[v as usize] == IN_D {
                self.d_count -= 1;
            }
            self.status[v as usize] = UNDEC;
        }
    }

    /// Unit propagation to fixpoint. False means the node is infeasible.
    fn propagate(&mut self) -> bool {
        loop {
            let mut forced: Option<u32> = None;
            'scan: for c in &self.constraints {
                let mut undec: Option<u32> = None;
                let mut undec_count = 0;
                for &v in c {
                    match self.status[v as usize] {
                        IN_D => continue 'scan,
                        UNDEC => {
                            undec_count += 1;
                            undec = Some(v);
                        }
                        _ => {}
                    }
                }
                if undec_count == 0 {
                    return false;
                }
                if undec_count == 1 {
                    forced = undec;
                    break;
                }
            }
            match forced {
                Some(v) => {
                    if !self.assign(v, IN_D) {
                        return false;
                    }
                }
                None => return true,
            }
        }
    }

    /// `d_count` plus a packing of unsatisfied constraints whose undecided
    /// members are pairwise vertex-disjoint: each needs its own new vertex.
    fn lower_bound(&mut self) -> usize {
        self.stamp += 1;
        let stamp = self.stamp;
        let mut packed = 0;
        'outer: for ci in 0..self.constraints.len() {
            let c = &self.constraints[ci];
            for &v in c {
                if self.status[v as usize] == IN_D {
                    continue 'outer;
                }
            }
            for &v in c {
                if self.status[v as usize] == UNDEC && self.mark[v as usize] == stamp {
                    continue 'outer;
                }
            }
            packed += 1;
            for &v in c {
                if self.status[v as usize] == UNDEC {
                    self.mark[v as usize] = stamp;
                }
            }
        }
        self.d_count + packed
    }

    /// Unsatisfied constraint with fewest undecided members (first on ties).
    fn pick(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        'scan: for (ci, c) in self.constraints.iter().enumerate() {
            let mut undec_count = 0;
            for &v in c {
                match self.status[v as usize] {
                    IN_D => continue 'scan,
                    UNDEC => undec_count += 1,
                    _ => {}
                }
            }
            if best.is_none_or(|(_, k)| undec_count < k) {
                best = Some((ci, undec_count));
                if undec_count <= 2 {
                    break;
                }
            }
        }
        best.map(|(ci, _)| ci)
    }

    fn snapshot_best(&mut self) {
        self.best = self.d_count;
        self.best_d = (0..self.status.len() as u32)
            .filter(|&v| self.status[v as usize] == IN_D)
            .collect();
    }

    fn search(&mut self) {
        self.nodes += 1;
        if self.nodes & 1023 == 0 && Instant::now() >= self.deadline {
            self.aborted = true;
        }
        if !self.propagate() {
            return;
        }
        let lb = self.lower_bound();
        if lb >= self.best {
            return;
        }
        if self.aborted {
            self.min_open_lb = self.min_open_lb.min(lb);
            return;
        }
        let Some(ci) = self.pick() else {
            // Every partition is hit: a new incumbent.
            self.snapshot_best();
            return;
        };
        let members: Vec<u32> = self.constraints[ci]
            .iter()
            .copied()
            .filter(|&v| self.status[v as usize] == UNDEC)
            .collect();
        // Child i: members before i stay on the family side, member i is
        // removed. Exhaustive and non-overlapping.
        for i in 0..members.len() {
            let cp = self.trail.len();
            let mut ok = true;
            for &m in &members[..i] {
                if !self.assign(m, IN_F) {
                    ok = false;
                    break;
                }
            }
            if ok && self.assign(members[i], IN_D) {
                self.search();
            }
            self.undo(cp);
            if self.aborted {
                // `lb` bounds every unexplored sibling subtree as well.
                self.min_open_lb = self.min_open_lb.min(lb);
                return;
            }
        }
    }

    /// Feasible starting point: repeatedly remove the vertex covering the
    /// most unsatisfied partitions (ties to the lowest mask).
    fn greedy_incumbent(&mut self) {
        loop {
            let mut coverage = vec![0u32; self.status.len()];
            let mut any_unsat = false;
            'scan: for c in &self.constraints {
                for &v in c {
                    if self.status[v as usize] == IN_D {
                        continue 'scan;
                    }
                }
                any_unsat = true;
                for &v in c {
                    if self.status[v as usize] == UNDEC {
                        coverage[v as usize] += 1;
                    }
                }
            }
            if !any_unsat {
                break;
            }
            let pick = (0..coverage.len() as u32)
                .max_by_key(|&v| (coverage[v as usize], u32::MAX - v))
                .expect("nonempty vertex set");
            assert!(coverage[pick as usize] > 0, "unsatisfiable partition with no undecided member");
            let ok = self.assign(pick, IN_D);
            debug_assert!(ok);
        }
        self.snapshot_best();
        self.undo(0);
    }
}

/// Exact maximum family size (with witness) for ground set `{1..n}` and
/// forbidden tuple size `s`, within a time budget.
pub fn solve_exact(n: u32, s: u32, budget: Duration) -> Result<SolveResult, SolveError> {
    if n == 0 || n > 16 {
        return Err(SolveError::InvalidParams(format!(
            "ground set size must be 1..=16 for the exact search, got {n}"
        )));
    }
    if s < 2 {
        return Err(SolveError::InvalidParams(format!(
            "forbidden tuple size must be at least 2, got {s}"
        )));
    }
    match (s as u64).checked_pow(n) {
        Some(space) if space <= 1 << 27 => {}
        _ => {
            return Err(SolveError::InvalidParams(format!(
                "partition space {s}^{n} too large to enumerate"
            )));
        }
    }
    let start = Instant::now();
    let constraints = generate_constraints(n, s);
    let num_constraints = constraints.len();
    let vertex_count = 1usize << n;
    let mut search = Search {
        full_count: vertex_count,
        constraints,
        status: vec![UNDEC; vertex_count],
        trail: Vec::with_capacity(vertex_count),
        d_count: 0,
        full_mask: ElementSet::full(n).mask(),
        nodes: 0,
        deadline: start + budget,
        aborted: false,
        best: usize::MAX,
        best_d: Vec::new(),
        min_open_lb: usize::MAX,
        mark: vec![0; vertex_count],
        stamp: 0,
    };
    search.greedy_incumbent();
    search.search();

    let proved = !search.aborted || search.min_open_lb >= search.best;
    let value = search.full_count - search.best;
    let upper_bound = if proved {
        value
    } else {
        search.full_count - search.min_open_lb.min(search.best)
    };
    let mut witness = SetFamily::new(n).expect("validated n");
    let in_d: std::collections::BTreeSet<u32> = search.best_d.iter().copied().collect();
    for v in 0..vertex_count as u32 {
        if !in_d.contains(&v) {
            witness.insert(ElementSet::from_mask(v)).expect("mask within ground set");
        }
    }
    Ok(SolveResult {
        n,
        s,
        value,
        witness,
        optimal: proved,
        lower_bound: value,
        upper_bound,
        nodes: search.nodes,
        elapsed: start.elapsed(),
        constraints: num_constraints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binom::Int;
    use crate::formulas::e_formula;

    fn solve(n: u32, s: u32) -> SolveResult {
        solve_exact(n, s, Duration::from_secs(60)).unwrap()
    }

    /// Independent oracle: try all families on tiny ground sets directly.
    fn brute_force_max(n: u32, s: u32) -> usize {
        let vertices = 1usize << n;
        assert!(vertices <= 16, "oracle needs families to fit in u16");
        // All s-element antichains of pairwise disjoint distinct sets, as
        // bitsets over the 2^n vertices.
        let mut tuples: Vec<u32> = Vec::new();
        let mut stack: Vec<(usize, u32, u32, usize)> = vec![(0, 0, 0, 0)];
        while let Some((idx, used, members, count)) = stack.pop() {
            if count == s as usize {
                tuples.push(members);
                continue;
            }
            for v in idx..vertices {
                if used & v as u32 == 0 {
                    stack.push((v + 1, used | v as u32, members | 1 << v, count + 1));
                }
            }
        }
        let mut best = 0;
        for fam in 0u32..(1u32 << vertices) {
            if tuples.iter().any(|t| fam & t == *t) {
                continue;
            }
            best = best.max(fam.count_ones() as usize);
        }
        best
    }

    #[test]
    fn matches_brute_force_on_tiny_ground_sets() {
        for n in 1..=4u32 {
            for s in 2..=5u32 {
                let brute = brute_force_max(n, s);
                let solved = solve(n, s);
                assert!(solved.optimal, "n={n}, s={s} should close instantly");
                assert_eq!(solved.value, brute, "n={n}, s={s}");
                assert_eq!(
                    solved.witness.len(),
                    solved.value,
                    "witness size at n={n}, s={s}"
                );
                if !solved.witness.contains_empty_set() {
                    assert!(
                        solved.witness.matching_number(s as usize).unwrap() < s as usize,
                        "witness feasibility at n={n}, s={s}"
                    );
                }
            }
        }
    }

    /// Independent oracle for n=5, s=3: enumerate every down-set of the cube
    /// and take the smallest one hitting all 3-block partitions.
    fn min_hitting_downset_5_3() -> (usize, usize) {
        let n = 5u32;
        let vertices: Vec<u32> = {
            let mut v: Vec<u32> = (0..(1u32 << n)).collect();
            v.sort_by_key(|&m| (m.count_ones(), m));
            v
        };
        let constraints = generate_constraints(n, 3);
        let mut chosen = vec![false; 1 << n];
        let mut downsets = 0usize;
        let mut best = usize::MAX;
        fn descend(
            i: usize,
            vertices: &[u32],
            chosen: &mut Vec<bool>,
            constraints: &[Vec<u32>],
            downsets: &mut usize,
            best: &mut usize,
        ) {
            if i == vertices.len() {
                *downsets += 1;
                if constraints
                    .iter()
                    .all(|c| c.iter().any(|&v| chosen[v as usize]))
                {
                    let size = chosen.iter().filter(|&&b| b).count();
                    *best = (*best).min(size);
                }
                return;
            }
            let v = vertices[i];
            // Exclude v.
            descend(i + 1, vertices, chosen, constraints, downsets, best);
            // Include v only if all one-element-smaller subsets are present.
            let mut bits = v;
            let mut ok = true;
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                if !chosen[(v & !b) as usize] {
                    ok = false;
                    break;
                }
                bits &= bits - 1;
            }
            if ok {
                chosen[v as usize] = true;
                descend(i + 1, vertices, chosen, constraints, downsets, best);
                chosen[v as usize] = false;
            }
        }
        descend(0, &vertices, &mut chosen, &constraints, &mut downsets, &mut best);
        (downsets, best)
    }

    #[test]
    fn downset_enumeration_oracle_for_5_3() {
        let (downsets, min_d) = min_hitting_downset_5_3();
        // The number of down-sets of the 5-cube, a classical count.
        assert_eq!(downsets, 7581);
        assert_eq!(min_d, 6);
        let solved = solve(5, 3);
        assert!(solved.optimal);
        assert_eq!(solved.value, 32 - min_d);
        assert_eq!(solved.value, 26);
    }

    #[test]
    fn partition_counts_frozen() {
        assert_eq!(generate_constraints(7, 3).len(), 364);
        assert_eq!(generate_constraints(6, 3).len(), 121);
        assert_eq!(generate_constraints(2, 3).len(), 1);
    }

    #[test]
    fn small_anchor_values() {
        assert_eq!(solve(4, 3).value, 12);
        assert_eq!(solve(2, 3).value, 3);
        assert_eq!(solve(1, 3).value, 2);
        assert_eq!(solve(6, 4).value, 58);
    }

    #[test]
    fn half_power_set_for_pairs() {
        for n in 1..=7u32 {
            let r = solve(n, 2);
            assert!(r.optimal);
            assert_eq!(r.value, 1usize << (n - 1), "n={n}");
        }
    }

    #[test]
    fn agrees_with_formula_where_supported() {
        for (n, s) in [(4u32, 3u32), (5, 3), (6, 3), (6, 4), (7, 4)] {
            let ev = e_formula(n, s).unwrap();
            let r = solve(n, s);
            assert!(r.optimal, "n={n}, s={s}");
            assert_eq!(Int::from(r.value as u64), ev.value, "n={n}, s={s}");
        }
    }

    #[test]
    fn value_monotone_in_s() {
        for n in 1..=5u32 {
            let mut prev = 0;
            for s in 2..=5u32 {
                let v = solve(n, s).value;
                assert!(v >= prev, "n={n}, s={s}");
                prev = v;
            }
        }
    }
}
