//! Charge-redistribution engine: certifies the weighted-count bound for one
//! family under one cyclic order.
//!
//! Every set in the weighted configuration starts with charge equal to its
//! weight if it belongs to the family and zero otherwise. The engine then
//! moves the charge of the small sets — chain sets tracked per anchor and
//! group, the arc layer as one aggregate pool — onto larger sets that are
//! provably missing from the family, through a fixed sequence of stages.
//! Afterwards it checks that every chain portion reached zero, that no
//! receiver holds more than its weight, that the arc layer retains at most
//! s·m·C(n,m), and that charge was conserved exactly. Together these give
//! the weighted bound that the extremal count rests on; a report carries the
//! per-stage traffic and every violated precondition.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use num::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::binom::{binomial_rat, rat, rational_string, Rational};
use crate::config::{build_config, ConfigError, CyclicOrder, Variant, WeightedConfig, XFamily};
use crate::family::{ElementSet, SetFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DischargeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("family incompatible with the charge scheme: {0}")]
    InvalidFamily(String),
}

/// A stage precondition that failed on this input: the receiver the stage
/// counts on being absent was present, or a cap the scheme relies on broke.
#[derive(Debug, Clone, Serialize)]
pub struct DischargeViolation {
    pub stage: &'static str,
    /// Anchor whose family the firing happened in; 0 for global checks.
    pub x: u32,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageLog {
    pub stage: &'static str,
    pub firings: usize,
    pub moved: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DischargeReport {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub variant: Variant,
    pub family_size: usize,
    /// Number of arcs of the configuration that belong to the family.
    pub q: u32,
    /// z_counts[j] = anchors whose family holds exactly j of its s arcs.
    pub z_counts: Vec<usize>,
    pub stages: Vec<StageLog>,
    /// Set when the surplus stage hits the tight q = m+1 geometry with only
    /// two doubly-covered anchors: both firings aim at one doubly-weighted
    /// set ("same-target") or at two singly-weighted ones ("distinct-targets").
    pub special_case: Option<String>,
    /// True when the tight geometry overcharged its receiver and the excess
    /// was rerouted to other missing sets on the same layer.
    pub fallback_used: bool,
    pub violations: Vec<DischargeViolation>,
    pub portions_cleared: bool,
    pub receipts_within_weights: bool,
    pub pool_final: String,
    pub pool_within_bound: bool,
    pub conservation_exact: bool,
    /// Total weight the family holds, Σ w(F) over members in the configuration.
    pub charged_total: String,
    /// s·m·C(n,m) plus s·n times the binomials of the layers above the arcs.
    pub bound_total: String,
    pub bound_holds: bool,
    pub verdict: bool,
}

fn tiny_range(m: u32) -> RangeInclusive<u32> {
    1..=m.saturating_sub(3)
}

fn late_range(m: u32) -> RangeInclusive<u32> {
    m.saturating_sub(2).max(1)..=m.saturating_sub(1)
}

fn all_small_range(m: u32) -> RangeInclusive<u32> {
    1..=m.saturating_sub(1)
}

struct Engine<'a> {
    cfg: &'a WeightedConfig,
    family: &'a SetFamily,
    fams: Vec<XFamily>,
    /// Remaining charge of chain set (x, group, k), from its slot weight.
    portions: BTreeMap<(u32, u8, u32), Rational>,
    /// Aggregate charge remaining on the arc layer.
    pool: Rational,
    q: u32,
    receipts: BTreeMap<ElementSet, Rational>,
    receipts_by_x: BTreeMap<(ElementSet, u32), Rational>,
    /// Receivers audited against their total weight instead of per-anchor
    /// shares: the tight-geometry targets and fallback receivers.
    total_checked: BTreeSet<ElementSet>,
    surplus_targets: BTreeSet<ElementSet>,
    violations: Vec<DischargeViolation>,
    logs: Vec<(&'static str, usize, Rational)>,
    special_case: Option<String>,
    fallback_used: bool,
    z_counts: Vec<usize>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a WeightedConfig, family: &'a SetFamily) -> Engine<'a> {
        let n = cfg.n;
        let fams: Vec<XFamily> = (1..=n).map(|x| cfg.xfamily(x)).collect();
        let mut portions = BTreeMap::new();
        for (fam, x) in fams.iter().zip(1..) {
            for i in 0..cfg.s as u8 {
                for k in all_small_range(cfg.m) {
                    if family.contains(fam.chain_set(i, k)) {
                        portions.insert((x, i, k), binomial_rat(n as i64, k as i64));
                    }
                }
            }
        }
        let q = cfg
            .arcs()
            .iter()
            .filter(|arc| family.contains(**arc))
            .count() as u32;
        let pool =
            rat(cfg.s as i64, 1) * rat(q as i64, 1) * binomial_rat(n as i64, cfg.m as i64);
        Engine {
            cfg,
            family,
            fams,
            portions,
            pool,
            q,
            receipts: BTreeMap::new(),
            receipts_by_x: BTreeMap::new(),
            total_checked: BTreeSet::new(),
            surplus_targets: BTreeSet::new(),
            violations: Vec::new(),
            logs: Vec::new(),
            special_case: None,
            fallback_used: false,
            z_counts: vec![0; cfg.s as usize + 1],
        }
    }

    fn in_family(&self, set: ElementSet) -> bool {
        self.family.contains(set)
    }

    fn fam(&self, x: u32) -> &XFamily {
        &self.fams[x as usize - 1]
    }

    fn violate(&mut self, stage: &'static str, x: u32, detail: String) {
        self.violations.push(DischargeViolation { stage, x, detail });
    }

    fn begin(&mut self, stage: &'static str) -> usize {
        self.logs.push((stage, 0, Rational::zero()));
        self.logs.len() - 1
    }

    fn fired(&mut self, log: usize, moved: &Rational) {
        self.logs[log].1 += 1;
        self.logs[log].2 += moved;
    }

    fn deposit(&mut self, set: ElementSet, x: u32, amount: &Rational) {
        *self.receipts.entry(set).or_insert_with(Rational::zero) += amount;
        *self
            .receipts_by_x
            .entry((set, x))
            .or_insert_with(Rational::zero) += amount;
    }

    fn receipt_from(&self, set: ElementSet, x: u32) -> Rational {
        self.receipts_by_x
            .get(&(set, x))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn portion_sum(&self, x: u32, group: u8, ks: RangeInclusive<u32>) -> Rational {
        let mut total = Rational::zero();
        for k in ks {
            if let Some(p) = self.portions.get(&(x, group, k)) {
                total += p;
            }
        }
        total
    }

    fn clear_portions(&mut self, x: u32, group: u8, ks: RangeInclusive<u32>) {
        for k in ks {
            self.portions.remove(&(x, group, k));
        }
    }

    /// The lowest-mask candidate missing from the family, if any.
    fn pick_missing(&self, candidates: &[ElementSet]) -> Option<ElementSet> {
        candidates
            .iter()
            .copied()
            .filter(|c| !self.in_family(*c))
            .min()
    }

    /// Groups other than i, ascending.
    fn others(&self, i: u8) -> Vec<u8> {
        (0..self.cfg.s as u8).filter(|&j| j != i).collect()
    }

    /// How many of the x-family's arcs belong to the family.
    fn arc_count(&self, x: u32) -> u32 {
        let fam = self.fam(x);
        (0..self.cfg.s as u8)
            .filter(|&i| self.in_family(fam.m_set(i)))
            .count() as u32
    }

    fn count_covered_anchors(&mut self, stage: &'static str) {
        let s = self.cfg.s;
        for x in 1..=self.cfg.n {
            let c = self.arc_count(x) as usize;
            self.z_counts[c] += 1;
            if c as u32 >= s {
                self.violate(
                    stage,
                    x,
                    format!("all {s} arcs of this anchor's family are members — {s} pairwise disjoint sets"),
                );
            }
        }
    }

    // ---- three-group stages ----

    /// Charge of chains shorter than m-2 splits onto two missing sets two
    /// layers above the arcs.
    fn stage3_tiny(&mut self) {
        let log = self.begin("tiny-chains-to-size-m2");
        let m = self.cfg.m;
        for x in 1..=self.cfg.n {
            for i in 0..3u8 {
                let total = self.portion_sum(x, i, tiny_range(m));
                if total.is_zero() {
                    continue;
                }
                let o = self.others(i);
                let (j1, j2) = (o[0], o[1]);
                let fam = self.fam(x);
                let pairs = [(j1, j2), (j2, j1)].map(|(lat_g, cen_g)| {
                    (fam.lateral_m2_s3(lat_g, i), fam.central_m2_s3(cen_g, i))
                });
                let mut targets = Vec::new();
                let mut ok = true;
                for (lateral, central) in pairs {
                    match self.pick_missing(&[lateral, central]) {
                        Some(t) => targets.push(t),
                        None => {
                            ok = false;
                            self.violate(
                                "tiny-chains-to-size-m2",
                                x,
                                format!("both receivers {lateral} and {central} are members"),
                            );
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let half = &total / rat(2, 1);
                for t in targets {
                    self.deposit(t, x, &half);
                }
                self.fired(log, &total);
                self.clear_portions(x, i, tiny_range(m));
            }
        }
    }

    /// Two groups with their (m-1)-chains in the family push the remaining
    /// chain charge onto the third group's top set.
    fn stage3_chain_pairs(&mut self) {
        let log = self.begin("chain-pairs-to-top");
        let m = self.cfg.m;
        if m < 2 {
            return;
        }
        for x in 1..=self.cfg.n {
            for i in 0..3u8 {
                let o = self.others(i);
                let (j1, j2) = (o[0], o[1]);
                let fam = self.fam(x);
                let c1 = fam.chain_set(j1, m - 1);
                let c2 = fam.chain_set(j2, m - 1);
                let top = fam.top(i);
                if !self.in_family(c1) || !self.in_family(c2) {
                    continue;
                }
                let total =
                    self.portion_sum(x, j1, late_range(m)) + self.portion_sum(x, j2, late_range(m));
                if total.is_zero() {
                    continue;
                }
                if self.in_family(top) {
                    self.violate(
                        "chain-pairs-to-top",
                        x,
                        format!("receiver {top} is a member"),
                    );
                    continue;
                }
                self.deposit(top, x, &total);
                self.fired(log, &total);
                self.clear_portions(x, j1, late_range(m));
                self.clear_portions(x, j2, late_range(m));
            }
        }
    }

    /// An (m-1)-chain alongside a member arc pushes its charge onto the
    /// central set two layers up in the remaining group.
    fn stage3_chain_arc(&mut self) {
        let log = self.begin("chain-plus-arc-to-central-m2");
        let m = self.cfg.m;
        if m < 2 {
            return;
        }
        for x in 1..=self.cfg.n {
            for j1 in 0..3u8 {
                let total = self.portion_sum(x, j1, late_range(m));
                if total.is_zero() {
                    continue;
                }
                for j2 in self.others(j1) {
                    let fam = self.fam(x);
                    if !self.in_family(fam.m_set(j2)) {
                        continue;
                    }
                    let i = (0..3u8).find(|&g| g != j1 && g != j2).unwrap();
                    let target = self.fam(x).central_m2_s3(i, j1);
                    if self.in_family(target) {
                        self.violate(
                            "chain-plus-arc-to-central-m2",
                            x,
                            format!("receiver {target} is a member"),
                        );
                        continue;
                    }
                    self.deposit(target, x, &total);
                    self.fired(log, &total);
                    self.clear_portions(x, j1, late_range(m));
                    break;
                }
            }
        }
    }

    /// A lone charged (m-1)-chain splits its charge onto one missing set from
    /// each of the two central/lateral pairs one layer above the arcs.
    fn stage3_single_chains(&mut self) {
        let log = self.begin("single-chains-to-size-m1");
        let m = self.cfg.m;
        for x in 1..=self.cfg.n {
            for i in 0..3u8 {
                let total = self.portion_sum(x, i, late_range(m));
                if total.is_zero() {
                    continue;
                }
                let o = self.others(i);
                let (j1, j2) = (o[0], o[1]);
                let fam = self.fam(x);
                let pairs = [(j1, j2), (j2, j1)].map(|(cen_g, lat_g)| {
                    (fam.central_m1(cen_g, false), fam.lateral_m1(lat_g, i))
                });
                let mut targets = Vec::new();
                let mut ok = true;
                for (central, lateral) in pairs {
                    match self.pick_missing(&[central, lateral]) {
                        Some(t) => targets.push(t),
                        None => {
                            ok = false;
                            self.violate(
                                "single-chains-to-size-m1",
                                x,
                                format!("both receivers {central} and {lateral} are members"),
                            );
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let half = &total / rat(2, 1);
                for t in targets {
                    self.deposit(t, x, &half);
                }
                self.fired(log, &total);
                self.clear_portions(x, i, late_range(m));
            }
        }
    }

    /// Arc charge beyond s·m·C(n,m) drains onto the central sets of the
    /// groups left uncovered in doubly-covered anchor families.
    fn stage3_surplus(&mut self) {
        let log = self.begin("arc-surplus-to-central-m1");
        self.count_covered_anchors("arc-surplus-to-central-m1");
        let (m, n) = (self.cfg.m, self.cfg.n);
        let q = self.q;
        if q <= m {
            return;
        }
        let z2 = self.z_counts[2];
        if z2 == 0 {
            self.violate(
                "arc-surplus-to-central-m1",
                0,
                format!("no anchor family holds two arcs, yet q = {q} exceeds m = {m}"),
            );
            return;
        }
        let amount = rat(3 * (q - m) as i64, z2 as i64) * binomial_rat(n as i64, m as i64);
        let mut deposited: Vec<(u32, ElementSet)> = Vec::new();
        for x in 1..=n {
            if self.arc_count(x) != 2 {
                continue;
            }
            let fam = self.fam(x);
            let i = (0..3u8).find(|&g| !self.in_family(fam.m_set(g))).unwrap();
            let target = self.fam(x).central_m1(i, false);
            if self.in_family(target) {
                self.violate(
                    "arc-surplus-to-central-m1",
                    x,
                    format!("receiver {target} is a member"),
                );
                continue;
            }
            let prior = self.receipt_from(target, x);
            if !prior.is_zero() {
                self.violate(
                    "arc-surplus-to-central-m1",
                    x,
                    format!(
                        "receiver {target} already drew {} from this anchor's family",
                        rational_string(&prior)
                    ),
                );
            }
            self.pool -= &amount;
            self.deposit(target, x, &amount);
            self.fired(log, &amount);
            self.surplus_targets.insert(target);
            deposited.push((x, target));
        }
        if q == m + 1 && z2 == 2 {
            let same = deposited.len() == 2 && deposited[0].1 == deposited[1].1;
            self.special_case = Some(if same { "same-target" } else { "distinct-targets" }.into());
            if self.cfg.variant == Variant::Full {
                self.settle_tight_geometry(&deposited, same);
            }
        }
    }

    /// In the tight q = m+1, two-anchor geometry the receivers are audited
    /// against their whole weight; any excess is rerouted to other missing
    /// sets on the same layer with spare capacity.
    fn settle_tight_geometry(&mut self, deposited: &[(u32, ElementSet)], same: bool) {
        let stage = "arc-surplus-to-central-m1";
        let (n, m) = (self.cfg.n, self.cfg.m);
        let scheme = &self.cfg.scheme;
        let shared = binomial_rat(n as i64, m as i64 + 1)
            * (scheme.alpha.clone().unwrap() + scheme.alpha_prime.clone().unwrap());
        let doubled = rat(2, 1) * &shared;
        let mut targets: Vec<ElementSet> = deposited.iter().map(|&(_, t)| t).collect();
        targets.dedup();
        let expected = if same { &doubled } else { &shared };
        for &t in &targets {
            self.total_checked.insert(t);
            let w = self.cfg.weight(t);
            if w != *expected {
                self.violate(
                    stage,
                    0,
                    format!(
                        "tight-geometry receiver {t} weighs {}, expected {}",
                        rational_string(&w),
                        rational_string(expected)
                    ),
                );
            }
        }
        // Reroute any excess: candidates are missing sets one layer above the
        // arcs that took no surplus, the other weight shape first, then by mask.
        let opposite = if same { shared.clone() } else { doubled.clone() };
        for &t in &targets {
            let held = self.receipts.get(&t).cloned().unwrap_or_else(Rational::zero);
            let w = self.cfg.weight(t);
            if held <= w {
                continue;
            }
            self.fallback_used = true;
            let mut overflow = &held - &w;
            self.receipts.insert(t, w);
            let mut candidates: Vec<(bool, ElementSet)> = self
                .cfg
                .entries
                .iter()
                .filter(|(set, _)| {
                    set.len() == m + 1
                        && !self.family.contains(**set)
                        && !self.surplus_targets.contains(*set)
                })
                .map(|(set, entry)| (entry.weight != opposite, *set))
                .collect();
            candidates.sort();
            for (_, cand) in candidates {
                if overflow.is_zero() {
                    break;
                }
                let held_c = self
                    .receipts
                    .get(&cand)
                    .cloned()
                    .unwrap_or_else(Rational::zero);
                let spare = self.cfg.weight(cand) - held_c;
                if spare <= Rational::zero() {
                    continue;
                }
                let moved = overflow.clone().min(spare);
                *self.receipts.entry(cand).or_insert_with(Rational::zero) += &moved;
                self.total_checked.insert(cand);
                overflow -= &moved;
            }
            if !overflow.is_zero() {
                self.violate(
                    stage,
                    0,
                    format!(
                        "excess {} on receiver {t} found no spare capacity",
                        rational_string(&overflow)
                    ),
                );
            }
        }
    }

    fn run_three_groups(&mut self) {
        self.stage3_tiny();
        self.stage3_chain_pairs();
        self.stage3_chain_arc();
        self.stage3_single_chains();
        self.stage3_surplus();
    }

    // ---- four-group stages ----

    /// Three groups with (m-1)-chains in the family push all their chain
    /// charge onto the fourth group's top set.
    fn stage4_chain_triples(&mut self) {
        let log = self.begin("chain-triples-to-top");
        let m = self.cfg.m;
        if m < 2 {
            return;
        }
        for x in 1..=self.cfg.n {
            for combo in [[0u8, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
                let fam = self.fam(x);
                if !combo.iter().all(|&g| self.in_family(fam.chain_set(g, m - 1))) {
                    continue;
                }
                let total: Rational = combo
                    .iter()
                    .map(|&g| self.portion_sum(x, g, all_small_range(m)))
                    .sum();
                if total.is_zero() {
                    continue;
                }
                let j = (0..4u8).find(|g| !combo.contains(g)).unwrap();
                let top = self.fam(x).top(j);
                if self.in_family(top) {
                    self.violate("chain-triples-to-top", x, format!("receiver {top} is a member"));
                    continue;
                }
                self.deposit(top, x, &total);
                self.fired(log, &total);
                for &g in &combo {
                    self.clear_portions(x, g, all_small_range(m));
                }
            }
        }
    }

    /// Two groups with (m-1)-chains in the family split their chain charge
    /// across four complementary pairs of lateral sets two layers up.
    fn stage4_chain_pairs(&mut self) {
        let log = self.begin("chain-pairs-to-lateral-m2");
        let m = self.cfg.m;
        if m < 2 {
            return;
        }
        for x in 1..=self.cfg.n {
            for (j1, j2) in [(0u8, 1u8), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                let fam = self.fam(x);
                if !self.in_family(fam.chain_set(j1, m - 1))
                    || !self.in_family(fam.chain_set(j2, m - 1))
                {
                    continue;
                }
                let total = self.portion_sum(x, j1, all_small_range(m))
                    + self.portion_sum(x, j2, all_small_range(m));
                if total.is_zero() {
                    continue;
                }
                let others: Vec<u8> = (0..4u8).filter(|&g| g != j1 && g != j2).collect();
                let (i1, i2) = (others[0], others[1]);
                let fam = self.fam(x);
                let mut pairs = Vec::with_capacity(4);
                for jp in [j1, j2] {
                    let jpp = if jp == j1 { j2 } else { j1 };
                    for below in [false, true] {
                        pairs.push((
                            fam.lateral_m2_s4(i1, jp, below),
                            fam.lateral_m2_s4(i2, jpp, !below),
                        ));
                    }
                }
                let mut targets = Vec::new();
                let mut ok = true;
                for (a, b) in pairs {
                    match self.pick_missing(&[a, b]) {
                        Some(t) => targets.push(t),
                        None => {
                            ok = false;
                            self.violate(
                                "chain-pairs-to-lateral-m2",
                                x,
                                format!("both receivers {a} and {b} are members"),
                            );
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let quarter = &total / rat(4, 1);
                for t in targets {
                    self.deposit(t, x, &quarter);
                }
                self.fired(log, &total);
                self.clear_portions(x, j1, all_small_range(m));
                self.clear_portions(x, j2, all_small_range(m));
            }
        }
    }

    /// A lone charged (m-1)-chain spreads its charge over three missing
    /// cells of the 3×3 grid of sets one layer above the arcs.
    fn stage4_single_chains(&mut self) {
        let log = self.begin("single-chains-to-size-m1");
        let m = self.cfg.m;
        for x in 1..=self.cfg.n {
            for i in 0..4u8 {
                let total = self.portion_sum(x, i, all_small_range(m));
                if total.is_zero() {
                    continue;
                }
                let others = self.others(i);
                let fam = self.fam(x);
                // Rows are the other three groups; columns point at the donor
                // group, add the element below the anchor, or add the anchor.
                let grid: Vec<[ElementSet; 3]> = others
                    .iter()
                    .map(|&g| {
                        [
                            fam.lateral_m1(g, i),
                            fam.central_m1(g, true),
                            fam.central_m1(g, false),
                        ]
                    })
                    .collect();
                let mut transversal_hit = false;
                for perm in [[0u8, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    if (0..3).all(|t| self.in_family(grid[t][perm[t] as usize])) {
                        let sets: Vec<String> = (0..3)
                            .map(|t| grid[t][perm[t] as usize].to_string())
                            .collect();
                        self.violate(
                            "single-chains-to-size-m1",
                            x,
                            format!("receivers {} are all members", sets.join(", ")),
                        );
                        transversal_hit = true;
                        break;
                    }
                }
                if transversal_hit {
                    continue;
                }
                let mut missing: Vec<ElementSet> = Vec::new();
                for row in &grid {
                    for &set in row {
                        if !self.in_family(set) {
                            missing.push(set);
                        }
                    }
                }
                missing.sort();
                // Two present cells meet at most four of the six transversals,
                // so at least three cells are missing here.
                assert!(missing.len() >= 3);
                let third = &total / rat(3, 1);
                for &t in &missing[..3] {
                    self.deposit(t, x, &third);
                }
                self.fired(log, &total);
                self.clear_portions(x, i, all_small_range(m));
            }
        }
    }

    /// Arc charge beyond s·m·C(n,m) drains onto central sets of the groups
    /// left uncovered in anchor families holding three or two arcs.
    fn stage4_surplus(&mut self) {
        let triple_log = self.begin("arc-triples-to-central-m2");
        let pair_log = self.begin("arc-pairs-to-central-m1");
        self.count_covered_anchors("arc-triples-to-central-m2");
        let (m, n) = (self.cfg.m, self.cfg.n);
        let q = self.q;
        if q <= m {
            return;
        }
        let denom = 4 * q as i64 - n as i64;
        let triple_amount = rat(8 * (q - m) as i64, denom) * binomial_rat(n as i64, m as i64);
        let pair_amount = rat(2 * (q - m) as i64, denom) * binomial_rat(n as i64, m as i64);
        for x in 1..=n {
            match self.arc_count(x) {
                3 => {
                    let fam = self.fam(x);
                    let i = (0..4u8).find(|&g| !self.in_family(fam.m_set(g))).unwrap();
                    let target = self.fam(x).central_m2_s4(i);
                    if self.in_family(target) {
                        self.violate(
                            "arc-triples-to-central-m2",
                            x,
                            format!("receiver {target} is a member"),
                        );
                        continue;
                    }
                    let prior = self.receipt_from(target, x);
                    if !prior.is_zero() {
                        self.violate(
                            "arc-triples-to-central-m2",
                            x,
                            format!(
                                "receiver {target} already drew {} from this anchor's family",
                                rational_string(&prior)
                            ),
                        );
                    }
                    self.pool -= &triple_amount;
                    self.deposit(target, x, &triple_amount);
                    self.fired(triple_log, &triple_amount);
                }
                2 => {
                    let fam = self.fam(x);
                    let uncovered: Vec<u8> =
                        (0..4u8).filter(|&g| !self.in_family(fam.m_set(g))).collect();
                    let (i1, i2) = (uncovered[0], uncovered[1]);
                    for (b1, b2) in [(false, true), (true, false)] {
                        let fam = self.fam(x);
                        let a = fam.central_m1(i1, b1);
                        let b = fam.central_m1(i2, b2);
                        let Some(target) = self.pick_missing(&[a, b]) else {
                            self.violate(
                                "arc-pairs-to-central-m1",
                                x,
                                format!("both receivers {a} and {b} are members"),
                            );
                            continue;
                        };
                        let prior = self.receipt_from(target, x);
                        if prior > self.cfg.scheme.w_lateral_m1 {
                            self.violate(
                                "arc-pairs-to-central-m1",
                                x,
                                format!(
                                    "receiver {target} already drew {} from this anchor's family",
                                    rational_string(&prior)
                                ),
                            );
                        }
                        self.pool -= &pair_amount;
                        self.deposit(target, x, &pair_amount);
                        self.fired(pair_log, &pair_amount);
                    }
                }
                _ => {}
            }
        }
    }

    fn run_four_groups(&mut self) {
        self.stage4_chain_triples();
        self.stage4_chain_pairs();
        self.stage4_single_chains();
        self.stage4_surplus();
    }

    fn finalize(mut self) -> DischargeReport {
        let cfg = self.cfg;
        let (n, s, m) = (cfg.n, cfg.s, cfg.m);

        // Total weight held by the family, and the charge the engine started
        // from, computed independently of the bookkeeping.
        let mut charged_total = Rational::zero();
        let mut big_charge = Rational::zero();
        for (set, entry) in &cfg.entries {
            if self.family.contains(*set) {
                charged_total += &entry.weight;
                if set.len() > m {
                    big_charge += &entry.weight;
                }
            }
        }

        let portions_remaining: Rational = self.portions.values().sum();
        let portions_cleared = portions_remaining.is_zero();
        if !portions_cleared {
            let stuck: Vec<String> = self
                .portions
                .iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|((x, g, k), v)| format!("x={x} group={g} k={k}: {}", rational_string(v)))
                .collect();
            self.violations.push(DischargeViolation {
                stage: "final",
                x: 0,
                detail: format!("chain charge left in place: {}", stuck.join("; ")),
            });
        }

        let mut receipts_within = true;
        let mut receipts_total = Rational::zero();
        for (set, held) in &self.receipts {
            receipts_total += held;
            let w = cfg.weight(*set);
            if *held > w {
                receipts_within = false;
                self.violations.push(DischargeViolation {
                    stage: "final",
                    x: 0,
                    detail: format!(
                        "{set} holds {} against weight {}",
                        rational_string(held),
                        rational_string(&w)
                    ),
                });
            }
            if self.family.contains(*set) {
                receipts_within = false;
                self.violations.push(DischargeViolation {
                    stage: "final",
                    x: 0,
                    detail: format!("member {set} received charge"),
                });
            }
        }
        for ((set, x), held) in &self.receipts_by_x {
            if self.total_checked.contains(set) {
                continue;
            }
            let share = cfg
                .entries
                .get(set)
                .and_then(|e| e.per_x.get(x))
                .cloned()
                .unwrap_or_else(Rational::zero);
            if *held > share {
                receipts_within = false;
                self.violations.push(DischargeViolation {
                    stage: "final",
                    x: *x,
                    detail: format!(
                        "{set} drew {} from this anchor's family against its share {}",
                        rational_string(held),
                        rational_string(&share)
                    ),
                });
            }
        }

        let pool_bound = rat((s * m) as i64, 1) * binomial_rat(n as i64, m as i64);
        let pool_within = self.pool <= pool_bound;
        if !pool_within {
            self.violations.push(DischargeViolation {
                stage: "final",
                x: 0,
                detail: format!(
                    "arc layer retains {}, above the allowance {}",
                    rational_string(&self.pool),
                    rational_string(&pool_bound)
                ),
            });
        }

        let state_total = &self.pool + &big_charge + &receipts_total + &portions_remaining;
        let conservation_exact = state_total == charged_total;
        if !conservation_exact {
            self.violations.push(DischargeViolation {
                stage: "final",
                x: 0,
                detail: format!(
                    "charge not conserved: started with {}, ended with {}",
                    rational_string(&charged_total),
                    rational_string(&state_total)
                ),
            });
        }

        let mut top_sum = Rational::zero();
        for k in [m + 1, m + 2, cfg.scheme.top_size()] {
            top_sum += binomial_rat(n as i64, k as i64);
        }
        let bound_total = &pool_bound + rat((s * n) as i64, 1) * top_sum;
        let bound_holds = charged_total <= bound_total;

        let verdict = self.violations.is_empty()
            && portions_cleared
            && receipts_within
            && pool_within
            && conservation_exact
            && bound_holds;

        DischargeReport {
            n,
            s,
            m,
            variant: cfg.variant,
            family_size: self.family.len(),
            q: self.q,
            z_counts: self.z_counts,
            stages: self
                .logs
                .iter()
                .map(|(stage, firings, moved)| StageLog {
                    stage,
                    firings: *firings,
                    moved: rational_string(moved),
                })
                .collect(),
            special_case: self.special_case,
            fallback_used: self.fallback_used,
            violations: self.violations,
            portions_cleared,
            receipts_within_weights: receipts_within,
            pool_final: rational_string(&self.pool),
            pool_within_bound: pool_within,
            conservation_exact,
            charged_total: rational_string(&charged_total),
            bound_total: rational_string(&bound_total),
            bound_holds,
            verdict,
        }
    }
}

/// Runs the charge redistribution for `family` against a prebuilt weighted
/// configuration. The family must live on the same ground set, contain no
/// empty set, and be upward-closed; the central-only scheme additionally
/// requires that no member is smaller than the arcs.
pub fn run_discharge_on(
    cfg: &WeightedConfig,
    family: &SetFamily,
) -> Result<DischargeReport, DischargeError> {
    if family.n() != cfg.n {
        return Err(DischargeError::InvalidFamily(format!(
            "family lives on [{}], configuration on [{}]",
            family.n(),
            cfg.n
        )));
    }
    if family.contains_empty_set() {
        return Err(DischargeError::InvalidFamily(
            "the empty set cannot be a member".into(),
        ));
    }
    if !family.is_upset() {
        return Err(DischargeError::InvalidFamily(
            "the charge scheme requires an upward-closed family".into(),
        ));
    }
    if cfg.variant == Variant::CentralOnly && family.iter().any(|set| set.len() < cfg.m) {
        return Err(DischargeError::InvalidFamily(format!(
            "the central-only scheme requires no members smaller than {}",
            cfg.m
        )));
    }
    let mut engine = Engine::new(cfg, family);
    if cfg.s == 3 {
        engine.run_three_groups();
    } else {
        engine.run_four_groups();
    }
    Ok(engine.finalize())
}

/// Builds the weighted configuration for (sigma, s, m, variant) and runs the
/// charge redistribution for `family` against it.
pub fn run_discharge(
    family: &SetFamily,
    sigma: &CyclicOrder,
    s: u32,
    m: u32,
    variant: Variant,
) -> Result<DischargeReport, DischargeError> {
    let cfg = build_config(sigma, s, m, variant)?;
    run_discharge_on(&cfg, family)
}
