//! Ground sets, bitmask sets, and set families.
//!
//! Elements are 1-based (`1..=n`, n <= 30) and a set is a `u32` bitmask with
//! bit `i` representing element `i + 1`. Families are ordered collections of
//! distinct sets; all iteration orders are deterministic (ascending bitmask),
//! so every downstream report and search is reproducible.

use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest supported ground-set size.
pub const MAX_GROUND: u32 = 30;

/// Errors for family construction and matching-number queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("ground set size {0} exceeds the supported maximum {MAX_GROUND}")]
    GroundSetTooLarge(u32),
    #[error("element {element} outside ground set 1..={n}")]
    ElementOutOfRange { element: u32, n: u32 },
    #[error("matching number is undefined for families containing the empty set")]
    EmptySetPresent,
}

/// A subset of the ground set `{1..n}`, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ElementSet(u32);

// Reports carry sets as ascending element lists.
impl Serialize for ElementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let elements = self.elements();
        let mut seq = serializer.serialize_seq(Some(elements.len()))?;
        for e in elements {
            seq.serialize_element(&e)?;
        }
        seq.end()
    }
}

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn from_mask(mask: u32) -> ElementSet {
        ElementSet(mask)
    }

    /// Full ground set of size n.
    pub fn full(n: u32) -> ElementSet {
        debug_assert!(n <= MAX_GROUND);
        ElementSet(if n == 0 { 0 } else { (1u32 << n) - 1 })
    }

    /// Build from 1-based elements; duplicates collapse.
    pub fn from_elements(elements: &[u32]) -> ElementSet {
        let mut mask = 0;
        for &e in elements {
            debug_assert!((1..=MAX_GROUND).contains(&e));
            mask |= 1 << (e - 1);
        }
        ElementSet(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, element: u32) -> bool {
        (1..=MAX_GROUND).contains(&element) && self.0 & (1 << (element - 1)) != 0
    }

    pub fn with(self, element: u32) -> ElementSet {
        debug_assert!((1..=MAX_GROUND).contains(&element));
        ElementSet(self.0 | 1 << (element - 1))
    }

    pub fn without(self, element: u32) -> ElementSet {
        debug_assert!((1..=MAX_GROUND).contains(&element));
        ElementSet(self.0 & !(1 << (element - 1)))
    }

    pub fn union(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 & other.0)
    }

    pub fn is_disjoint(self, other: ElementSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, n: u32) -> ElementSet {
        ElementSet(ElementSet::full(n).0 & !self.0)
    }

    /// 1-based elements in ascending order.
    pub fn elements(self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len() as usize);
        let mut m = self.0;
        while m != 0 {
            let b = m.trailing_zeros();
            out.push(b + 1);
            m &= m - 1;
        }
        out
    }

    /// Smallest element, if any.
    pub fn min_element(self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() + 1)
        }
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// A family of distinct subsets of `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    n: u32,
    members: BTreeSet<ElementSet>,
}

impl SetFamily {
    pub fn new(n: u32) -> Result<SetFamily, FamilyError> {
        if n == 0 || n > MAX_GROUND {
            return Err(FamilyError::GroundSetTooLarge(n));
        }
        Ok(SetFamily { n, members: BTreeSet::new() })
    }

    pub fn from_members<I>(n: u32, members: I) -> Result<SetFamily, FamilyError>
    where
        I: IntoIterator<Item = ElementSet>,
    {
        let mut fam = SetFamily::new(n)?;
        for s in members {
            fam.insert(s)?;
        }
        Ok(fam)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn insert(&mut self, set: ElementSet) -> Result<bool, FamilyError> {
        if !set.is_subset_of(ElementSet::full(self.n)) {
            let element = set
                .elements()
                .into_iter()
                .find(|&e| e > self.n)
                .unwrap_or(self.n + 1);
            return Err(FamilyError::ElementOutOfRange { element, n: self.n });
        }
        Ok(self.members.insert(set))
    }

    pub fn remove(&mut self, set: ElementSet) -> bool {
        self.members.remove(&set)
    }

    pub fn contains(&self, set: ElementSet) -> bool {
        self.members.contains(&set)
    }

    pub fn contains_empty_set(&self) -> bool {
        self.members.contains(&ElementSet::EMPTY)
    }

    /// Members in ascending bitmask order.
    pub fn iter(&self) -> impl Iterator<Item = ElementSet> + '_ {
        self.members.iter().copied()
    }

    /// Members of size k, ascending bitmask order.
    pub fn layer(&self, k: u32) -> Vec<ElementSet> {
        self.iter().filter(|s| s.len() == k).collect()
    }

    /// Members sorted by (size, bitmask): the canonical presentation order.
    pub fn members_by_size(&self) -> Vec<ElementSet> {
        let mut v: Vec<ElementSet> = self.iter().collect();
        v.sort_by_key(|s| (s.len(), s.mask()));
        v
    }

    /// True when every superset (within the ground set) of every member is a
    /// member. Checked via single-element extensions, which suffices.
    pub fn is_upset(&self) -> bool {
        let full = ElementSet::full(self.n);
        for s in self.iter() {
            let mut rest = full.mask() & !s.mask();
            while rest != 0 {
                let b = rest & rest.wrapping_neg();
                if !self.members.contains(&ElementSet::from_mask(s.mask() | b)) {
                    return false;
                }
                rest &= rest - 1;
            }
        }
        true
    }

    /// Smallest up-set containing the family (closure under supersets).
    pub fn upset_closure(&self) -> SetFamily {
        let full_mask = ElementSet::full(self.n).mask();
        let mut frontier: Vec<u32> = self.iter().map(|s| s.mask()).collect();
        let mut closed: BTreeSet<ElementSet> = self.members.clone();
        while let Some(v) = frontier.pop() {
            let mut rest = full_mask & !v;
            while rest != 0 {
                let b = rest & rest.wrapping_neg();
                let sup = ElementSet::from_mask(v | b);
                if closed.insert(sup) {
                    frontier.push(sup.mask());
                }
                rest &= rest - 1;
            }
        }
        SetFamily { n: self.n, members: closed }
    }

    /// Members with no proper subset in the family (an antichain). For an
    /// up-set these generate the family under superset closure.
    pub fn minimal_members(&self) -> Vec<ElementSet> {
        let mut sorted = self.members_by_size();
        let mut minimal: Vec<ElementSet> = Vec::new();
        sorted.retain(|&s| {
            let dominated = minimal
                .iter()
                .any(|&t| t.len() < s.len() && t.is_subset_of(s));
            if !dominated {
                minimal.push(s);
            }
            !dominated
        });
        minimal
    }

    /// Matching number capped at `cap`: the largest number of pairwise
    /// disjoint distinct members, or `cap` if at least `cap` exist.
    ///
    /// Errors if the empty set is a member (it is vacuously disjoint from
    /// everything and the notion degenerates).
    pub fn matching_number(&self, cap: usize) -> Result<usize, FamilyError> {
        if self.contains_empty_set() {
            return Err(FamilyError::EmptySetPresent);
        }
        if cap == 0 {
            return Ok(0);
        }
        // Any packing maps member-wise onto minimal members (subsets of
        // pairwise disjoint nonempty sets stay disjoint and distinct), so the
        // search space shrinks to the minimal antichain.
        let candidates = self.minimal_members();
        let mut best = 0usize;
        pack_descend(&candidates, cap, 0, &mut best);
        Ok(best.min(cap))
    }

    /// Depth-first enumeration of up to `limit` s-tuples of pairwise disjoint
    /// distinct members (the empty set may appear as one member). Tuples are
    /// ordered, and listed, by ascending member bitmasks.
    pub fn disjoint_tuples(&self, s: usize, limit: usize) -> Vec<Vec<ElementSet>> {
        let members: Vec<ElementSet> = self.iter().collect();
        let mut out = Vec::new();
        if s == 0 || limit == 0 {
            return out;
        }
        let mut stack: Vec<ElementSet> = Vec::with_capacity(s);
        tuple_search(&members, 0, s, limit, &mut stack, &mut out);
        out
    }

    /// True when the family contains s pairwise disjoint distinct members.
    pub fn has_disjoint_tuple(&self, s: usize) -> bool {
        if self.contains_empty_set() {
            // The empty set can serve as one tuple member; the rest must be
            // a packing of the nonempty members.
            let mut rest = self.clone();
            rest.remove(ElementSet::EMPTY);
            if s <= 1 {
                return s == 1 && !self.is_empty();
            }
            return rest.matching_number(s - 1).expect("no empty set") >= s - 1;
        }
        match self.matching_number(s) {
            Ok(v) => v >= s,
            Err(_) => unreachable!("empty set handled above"),
        }
    }
}

/// Exact maximum-packing search over an antichain of nonempty candidates.
/// Updates `best` with `depth + <largest packing among candidates>`, pruning
/// once `best` reaches `cap`. Branches on the lowest element still covered:
/// either some chosen set contains it, or none does and the element drops out.
fn pack_descend(candidates: &[ElementSet], cap: usize, depth: usize, best: &mut usize) {
    if depth > *best {
        *best = depth;
    }
    if *best >= cap || candidates.is_empty() {
        return;
    }
    let union: u32 = candidates.iter().fold(0, |a, c| a | c.mask());
    // Even one candidate per remaining element cannot beat this bound.
    if depth + union.count_ones() as usize <= *best {
        return;
    }
    let pivot = union & union.wrapping_neg();
    for c in candidates.iter().copied().filter(|c| c.mask() & pivot != 0) {
        let next: Vec<ElementSet> = candidates
            .iter()
            .copied()
            .filter(|d| d.is_disjoint(c))
            .collect();
        pack_descend(&next, cap, depth + 1, best);
        if *best >= cap {
            return;
        }
    }
    let without: Vec<ElementSet> = candidates
        .iter()
        .copied()
        .filter(|c| c.mask() & pivot == 0)
        .collect();
    if !without.is_empty() {
        pack_descend(&without, cap, depth, best);
    }
}

fn tuple_search(
    members: &[ElementSet],
    start: usize,
    s: usize,
    limit: usize,
    stack: &mut Vec<ElementSet>,
    out: &mut Vec<Vec<ElementSet>>,
) {
    if out.len() >= limit {
        return;
    }
    if stack.len() == s {
        out.push(stack.clone());
        return;
    }
    let used: u32 = stack.iter().fold(0, |a, c| a | c.mask());
    for i in start..members.len() {
        if members.len() - i < s - stack.len() {
            break;
        }
        let c = members[i];
        if c.mask() & used == 0 {
            stack.push(c);
            tuple_search(members, i + 1, s, limit, stack, out);
            stack.pop();
            if out.len() >= limit {
                return;
            }
        }
    }
}
