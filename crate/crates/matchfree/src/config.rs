//! Weighted cyclic configurations used by the discharging argument.
//!
//! For a cyclic order σ on the ground set and every anchor element x, an
//! "x-family" is built: s groups of sets arranged around the circle, each
//! group consisting of a chain of small sets inside an m-element arc, the arc
//! itself, and a few decorated supersets of the arc ("central" ones use the
//! elements left out by the arcs, "lateral" ones reach into neighbouring
//! groups). Every slot carries an exact rational weight; a set appearing in
//! several slots accumulates all their weights. The union over all n anchors
//! is the weighted configuration the discharging engine works on.
//!
//! Supported shapes: s = 3 with n = 3m+1, and s = 4 with n = 4m+2.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::binom::{binomial_rat, rat, rational_string, Rational};
use crate::family::ElementSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("configurations are defined for s in {{3, 4}}, got s={0}")]
    UnsupportedS(u32),
    #[error("arc length m must be at least 1, got m={0}")]
    InvalidM(u32),
    #[error("cyclic order must be a permutation of 1..={n}: {reason}")]
    InvalidPermutation { n: u32, reason: String },
    #[error("anchor {x} outside ground set of size {n}")]
    InvalidAnchor { x: u32, n: u32 },
    #[error("cyclic order is on {order_n} elements but s={s}, m={m} needs n={expected}")]
    SizeMismatch { order_n: u32, s: u32, m: u32, expected: u32 },
}

/// Weight profile: `Full` weights every slot; `CentralOnly` zeroes the
/// lateral (m+1)-slots for s=3, and the lateral (m+1)- and (m+2)-slots for
/// s=4, raising the central weights so each group still sums to the layer
/// binomial on the affected layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    Full,
    CentralOnly,
}

/// A cyclic arrangement of the ground set: `order[p]` is the element at
/// position p (positions are 0-based and wrap modulo n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicOrder {
    n: u32,
    order: Vec<u32>,
    inv: Vec<u32>,
}

impl CyclicOrder {
    pub fn identity(n: u32) -> Self {
        let order: Vec<u32> = (1..=n).collect();
        let inv: Vec<u32> = (0..n).collect();
        CyclicOrder { n, order, inv }
    }

    pub fn from_order(order: Vec<u32>) -> Result<Self, ConfigError> {
        let n = order.len() as u32;
        if n == 0 {
            return Err(ConfigError::InvalidPermutation {
                n,
                reason: "empty order".into(),
            });
        }
        let mut inv = vec![u32::MAX; n as usize];
        for (p, &e) in order.iter().enumerate() {
            if e < 1 || e > n {
                return Err(ConfigError::InvalidPermutation {
                    n,
                    reason: format!("element {e} out of range"),
                });
            }
            if inv[(e - 1) as usize] != u32::MAX {
                return Err(ConfigError::InvalidPermutation {
                    n,
                    reason: format!("element {e} repeated"),
                });
            }
            inv[(e - 1) as usize] = p as u32;
        }
        Ok(CyclicOrder { n, order, inv })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// Element at a (possibly negative or overflowing) position.
    pub fn element_at(&self, pos: i64) -> u32 {
        let n = self.n as i64;
        let p = pos.rem_euclid(n) as usize;
        self.order[p]
    }

    /// 0-based position of element x.
    pub fn position_of(&self, x: u32) -> Result<u32, ConfigError> {
        if x < 1 || x > self.n {
            return Err(ConfigError::InvalidAnchor { x, n: self.n });
        }
        Ok(self.inv[(x - 1) as usize])
    }

    /// Image of a set under the relabeling e ↦ order[e−1] (the map sending
    /// the identity circle onto this one position by position).
    pub fn relabel_set(&self, set: ElementSet) -> ElementSet {
        let mut out = ElementSet::EMPTY;
        for e in set.elements() {
            out = out.with(self.order[(e - 1) as usize]);
        }
        out
    }
}

/// Which kind of slot a set occupies inside one group of one x-family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RoleKind {
    Chain,
    MSet,
    CentralM1,
    LateralM1,
    CentralM2,
    LateralM2,
    Top,
}

/// One weighted slot: the set, its anchor, group, role, the layer its weight
/// belongs to, and the role parameters (chain size, pointed group, added
/// element offsets) for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledSet {
    pub set: ElementSet,
    pub x: u32,
    pub group: u8,
    pub kind: RoleKind,
    /// Nominal layer of the slot's weight. Equals the actual set size except
    /// for s=3 with m ≤ 2, where some lateral (m+2)-slots collapse onto the
    /// group arc and produce a smaller set.
    pub size_class: u32,
    pub tag: Vec<u32>,
}

/// The s groups of sets anchored at one element, with positional accessors.
#[derive(Debug, Clone)]
pub struct XFamily {
    pub x: u32,
    pub s: u32,
    pub m: u32,
    pub n: u32,
    px: i64,
    sigma: CyclicOrder,
}

impl XFamily {
    fn pos_set(&self, offsets: impl IntoIterator<Item = i64>) -> ElementSet {
        let mut out = ElementSet::EMPTY;
        for off in offsets {
            out = out.with(self.sigma.element_at(self.px + off));
        }
        out
    }

    fn check_group(&self, i: u8) {
        assert!((i as u32) < self.s, "group {i} out of range for s={}", self.s);
    }

    /// The m-element arc of group i: offsets im+1 .. im+m from the anchor.
    pub fn m_set(&self, i: u8) -> ElementSet {
        self.check_group(i);
        let base = i as i64 * self.m as i64;
        self.pos_set((1..=self.m as i64).map(|t| base + t))
    }

    /// The chain subset of size k (1 ≤ k ≤ m): the last k elements of the arc.
    pub fn chain_set(&self, i: u8, k: u32) -> ElementSet {
        self.check_group(i);
        assert!(k >= 1 && k <= self.m, "chain size {k} outside 1..={}", self.m);
        let base = i as i64 * self.m as i64;
        self.pos_set((self.m as i64 - k as i64 + 1..=self.m as i64).map(|t| base + t))
    }

    /// Central (m+1)-set. For s=3 the added element is the anchor itself
    /// (`below` must be false); s=4 also has the variant adding the element
    /// just below the anchor.
    pub fn central_m1(&self, i: u8, below: bool) -> ElementSet {
        self.check_group(i);
        assert!(!below || self.s == 4, "only s=4 has a below-anchor central");
        let add = if below { -1 } else { 0 };
        self.m_set(i).union(self.pos_set([add]))
    }

    /// Lateral (m+1)-set pointing at group j: adds the first element of
    /// group j's arc.
    pub fn lateral_m1(&self, i: u8, j: u8) -> ElementSet {
        self.check_group(i);
        self.check_group(j);
        assert_ne!(i, j, "lateral must point at a different group");
        self.m_set(i).union(self.pos_set([j as i64 * self.m as i64 + 1]))
    }

    /// s=3 central (m+2)-set: adds group j's first arc element and the anchor.
    pub fn central_m2_s3(&self, i: u8, j: u8) -> ElementSet {
        assert_eq!(self.s, 3);
        self.check_group(i);
        self.check_group(j);
        assert_ne!(i, j);
        self.m_set(i)
            .union(self.pos_set([j as i64 * self.m as i64 + 1, 0]))
    }

    /// s=3 lateral (m+2)-set: adds the second and third elements counted
    /// from group j's arc start. For m ≤ 2 the added pair can meet the arc,
    /// so the result may be smaller than m+2; it is built verbatim.
    pub fn lateral_m2_s3(&self, i: u8, j: u8) -> ElementSet {
        assert_eq!(self.s, 3);
        self.check_group(i);
        self.check_group(j);
        assert_ne!(i, j);
        let base = j as i64 * self.m as i64;
        self.m_set(i).union(self.pos_set([base + 2, base + 3]))
    }

    /// s=4 central (m+2)-set: adds both elements left out by the arcs.
    pub fn central_m2_s4(&self, i: u8) -> ElementSet {
        assert_eq!(self.s, 4);
        self.check_group(i);
        self.m_set(i).union(self.pos_set([-1, 0]))
    }

    /// s=4 lateral (m+2)-set: the lateral (m+1)-set plus the anchor (below =
    /// false) or the element just below it (below = true).
    pub fn lateral_m2_s4(&self, i: u8, j: u8, below: bool) -> ElementSet {
        assert_eq!(self.s, 4);
        let add = if below { -1 } else { 0 };
        self.lateral_m1(i, j).union(self.pos_set([add]))
    }

    /// The top set of the group: size m+3 for s=3, m+5 for s=4 (one of the
    /// added elements always lies inside the arc).
    pub fn top(&self, i: u8) -> ElementSet {
        self.check_group(i);
        let m = self.m as i64;
        let adds: Vec<i64> = if self.s == 3 {
            vec![0, 1, m + 1, 2 * m + 1]
        } else {
            vec![-1, 0, 1, m + 1, 2 * m + 1, 3 * m + 1]
        };
        self.m_set(i).union(self.pos_set(adds))
    }

    /// All weighted slots of this x-family, in a fixed deterministic order.
    pub fn labeled_sets(&self) -> Vec<LabeledSet> {
        let mut out = Vec::new();
        let m = self.m;
        for i in 0..self.s as u8 {
            for k in 1..m {
                out.push(LabeledSet {
                    set: self.chain_set(i, k),
                    x: self.x,
                    group: i,
                    kind: RoleKind::Chain,
                    size_class: k,
                    tag: vec![k],
                });
            }
            out.push(LabeledSet {
                set: self.m_set(i),
                x: self.x,
                group: i,
                kind: RoleKind::MSet,
                size_class: m,
                tag: vec![],
            });
            if self.s == 3 {
                out.push(LabeledSet {
                    set: self.central_m1(i, false),
                    x: self.x,
                    group: i,
                    kind: RoleKind::CentralM1,
                    size_class: m + 1,
                    tag: vec![],
                });
                for j in (0..3u8).filter(|&j| j != i) {
                    out.push(LabeledSet {
                        set: self.lateral_m1(i, j),
                        x: self.x,
                        group: i,
                        kind: RoleKind::LateralM1,
                        size_class: m + 1,
                        tag: vec![j as u32],
                    });
                    out.push(LabeledSet {
                        set: self.central_m2_s3(i, j),
                        x: self.x,
                        group: i,
                        kind: RoleKind::CentralM2,
                        size_class: m + 2,
                        tag: vec![j as u32],
                    });
                    out.push(LabeledSet {
                        set: self.lateral_m2_s3(i, j),
                        x: self.x,
                        group: i,
                        kind: RoleKind::LateralM2,
                        size_class: m + 2,
                        tag: vec![j as u32],
                    });
                }
                out.push(LabeledSet {
                    set: self.top(i),
                    x: self.x,
                    group: i,
                    kind: RoleKind::Top,
                    size_class: m + 3,
                    tag: vec![],
                });
            } else {
                for below in [false, true] {
                    out.push(LabeledSet {
                        set: self.central_m1(i, below),
                        x: self.x,
                        group: i,
                        kind: RoleKind::CentralM1,
                        size_class: m + 1,
                        tag: vec![below as u32],
                    });
                }
                for j in (0..4u8).filter(|&j| j != i) {
                    out.push(LabeledSet {
                        set: self.lateral_m1(i, j),
                        x: self.x,
                        group: i,
                        kind: RoleKind::LateralM1,
                        size_class: m + 1,
                        tag: vec![j as u32],
                    });
                    for below in [false, true] {
                        out.push(LabeledSet {
                            set: self.lateral_m2_s4(i, j, below),
                            x: self.x,
                            group: i,
                            kind: RoleKind::LateralM2,
                            size_class: m + 2,
                            tag: vec![j as u32, below as u32],
                        });
                    }
                }
                out.push(LabeledSet {
                    set: self.central_m2_s4(i),
                    x: self.x,
                    group: i,
                    kind: RoleKind::CentralM2,
                    size_class: m + 2,
                    tag: vec![],
                });
                out.push(LabeledSet {
                    set: self.top(i),
                    x: self.x,
                    group: i,
                    kind: RoleKind::Top,
                    size_class: m + 5,
                    tag: vec![],
                });
            }
        }
        out
    }
}

/// Exact per-role weights for one (s, m, variant) shape.
#[derive(Debug, Clone)]
pub struct WeightScheme {
    pub s: u32,
    pub m: u32,
    pub n: u32,
    pub variant: Variant,
    /// s=3 only: the lateral share of the (m+1)-layer.
    pub alpha: Option<Rational>,
    pub alpha_prime: Option<Rational>,
    pub w_central_m1: Rational,
    pub w_lateral_m1: Rational,
    pub w_central_m2: Rational,
    pub w_lateral_m2: Rational,
    pub w_top: Rational,
}

impl WeightScheme {
    pub fn new(s: u32, m: u32, variant: Variant) -> Result<Self, ConfigError> {
        if s != 3 && s != 4 {
            return Err(ConfigError::UnsupportedS(s));
        }
        if m < 1 {
            return Err(ConfigError::InvalidM(m));
        }
        let n = s * m + s - 2;
        let mi = m as i64;
        let ni = n as i64;
        if s == 3 {
            let alpha = rat((3 * mi + 2) * mi, 4 * (2 * mi + 3) * (2 * mi + 1));
            let alpha_prime = Rational::one() - rat(2, 1) * &alpha;
            let c_m1 = binomial_rat(ni, mi + 1);
            let c_m2 = binomial_rat(ni, mi + 2);
            let (w_central_m1, w_lateral_m1) = match variant {
                Variant::Full => (&alpha_prime * &c_m1, &alpha * &c_m1),
                Variant::CentralOnly => (c_m1.clone(), Rational::zero()),
            };
            Ok(WeightScheme {
                s,
                m,
                n,
                variant,
                alpha: Some(alpha),
                alpha_prime: Some(alpha_prime),
                w_central_m1,
                w_lateral_m1,
                w_central_m2: rat(3, 8) * &c_m2,
                w_lateral_m2: rat(1, 8) * &c_m2,
                w_top: binomial_rat(ni, mi + 3),
            })
        } else {
            let c_m1 = binomial_rat(ni, mi + 1);
            let c_m2 = binomial_rat(ni, mi + 2);
            let (w_central_m1, w_lateral_m1, w_central_m2, w_lateral_m2) = match variant {
                Variant::Full => {
                    let w_lat1 = rat(mi, 5 * (3 * mi + 2)) * &c_m1;
                    let w_cen1 = rat(1, 2) * &c_m1 - rat(3, 2) * &w_lat1;
                    (w_cen1, w_lat1, rat(8, 11) * &c_m2, rat(1, 22) * &c_m2)
                }
                Variant::CentralOnly => (
                    rat(1, 2) * &c_m1,
                    Rational::zero(),
                    c_m2.clone(),
                    Rational::zero(),
                ),
            };
            Ok(WeightScheme {
                s,
                m,
                n,
                variant,
                alpha: None,
                alpha_prime: None,
                w_central_m1,
                w_lateral_m1,
                w_central_m2,
                w_lateral_m2,
                w_top: binomial_rat(ni, mi + 5),
            })
        }
    }

    /// Weight of sets on the small layers (k ≤ m): the full layer binomial.
    pub fn small_weight(&self, k: u32) -> Rational {
        assert!(k >= 1 && k <= self.m);
        binomial_rat(self.n as i64, k as i64)
    }

    pub fn weight_of(&self, kind: RoleKind, size_class: u32) -> Rational {
        match kind {
            RoleKind::Chain => self.small_weight(size_class),
            RoleKind::MSet => self.small_weight(self.m),
            RoleKind::CentralM1 => self.w_central_m1.clone(),
            RoleKind::LateralM1 => self.w_lateral_m1.clone(),
            RoleKind::CentralM2 => self.w_central_m2.clone(),
            RoleKind::LateralM2 => self.w_lateral_m2.clone(),
            RoleKind::Top => self.w_top.clone(),
        }
    }

    pub fn top_size(&self) -> u32 {
        if self.s == 3 {
            self.m + 3
        } else {
            self.m + 5
        }
    }

    /// Layers that carry weight: 1..=m+3 for s=3; 1..=m+2 and m+5 for s=4.
    pub fn weighted_layers(&self) -> Vec<u32> {
        if self.s == 3 {
            (1..=self.m + 3).collect()
        } else {
            (1..=self.m + 2).chain([self.m + 5]).collect()
        }
    }

    /// Layers whose weights the central-only variant modifies.
    pub fn variant_exempt_layers(&self) -> Vec<u32> {
        match self.variant {
            Variant::Full => vec![],
            Variant::CentralOnly => {
                if self.s == 3 {
                    vec![self.m + 1]
                } else {
                    vec![self.m + 1, self.m + 2]
                }
            }
        }
    }
}

/// Accumulated weight and provenance of one set across all x-families.
#[derive(Debug, Clone)]
pub struct ConfigEntry {
    pub weight: Rational,
    /// Weight contributed by each anchor's family separately.
    pub per_x: BTreeMap<u32, Rational>,
    pub slots: Vec<LabeledSet>,
}

/// The weighted union of all n x-families for one cyclic order.
#[derive(Debug, Clone)]
pub struct WeightedConfig {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub variant: Variant,
    pub sigma: CyclicOrder,
    pub scheme: WeightScheme,
    pub entries: BTreeMap<ElementSet, ConfigEntry>,
}

pub fn build_xfamily(sigma: &CyclicOrder, s: u32, m: u32, x: u32) -> Result<XFamily, ConfigError> {
    if s != 3 && s != 4 {
        return Err(ConfigError::UnsupportedS(s));
    }
    if m < 1 {
        return Err(ConfigError::InvalidM(m));
    }
    let expected = s * m + s - 2;
    if sigma.n() != expected {
        return Err(ConfigError::SizeMismatch {
            order_n: sigma.n(),
            s,
            m,
            expected,
        });
    }
    let px = sigma.position_of(x)? as i64;
    Ok(XFamily {
        x,
        s,
        m,
        n: sigma.n(),
        px,
        sigma: sigma.clone(),
    })
}

pub fn build_config(
    sigma: &CyclicOrder,
    s: u32,
    m: u32,
    variant: Variant,
) -> Result<WeightedConfig, ConfigError> {
    let scheme = WeightScheme::new(s, m, variant)?;
    let n = scheme.n;
    if sigma.n() != n {
        return Err(ConfigError::SizeMismatch {
            order_n: sigma.n(),
            s,
            m,
            expected: n,
        });
    }
    let mut entries: BTreeMap<ElementSet, ConfigEntry> = BTreeMap::new();
    for x in 1..=n {
        let fam = build_xfamily(sigma, s, m, x)?;
        for slot in fam.labeled_sets() {
            let w = scheme.weight_of(slot.kind, slot.size_class);
            let entry = entries.entry(slot.set).or_insert_with(|| ConfigEntry {
                weight: Rational::zero(),
                per_x: BTreeMap::new(),
                slots: Vec::new(),
            });
            entry.weight += &w;
            *entry.per_x.entry(x).or_insert_with(Rational::zero) += &w;
            entry.slots.push(slot);
        }
    }
    // Slots with zero weight (central-only laterals) stay as provenance, but
    // sets carrying no weight at all are not part of the configuration.
    entries.retain(|_, e| !e.weight.is_zero());
    Ok(WeightedConfig {
        n,
        s,
        m,
        variant,
        sigma: sigma.clone(),
        scheme,
        entries,
    })
}

impl WeightedConfig {
    pub fn xfamily(&self, x: u32) -> XFamily {
        build_xfamily(&self.sigma, self.s, self.m, x).expect("config was validated")
    }

    /// Accumulated weight of a set (zero if it is not in the configuration).
    pub fn weight(&self, set: ElementSet) -> Rational {
        self.entries
            .get(&set)
            .map(|e| e.weight.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// The n arcs of length m around the circle, indexed by start position.
    pub fn arcs(&self) -> Vec<ElementSet> {
        (0..self.n as i64)
            .map(|p| {
                let mut set = ElementSet::EMPTY;
                for t in 0..self.m as i64 {
                    set = set.with(self.sigma.element_at(p + t));
                }
                set
            })
            .collect()
    }
}

/// One layer's verification row: the nominal-layer weight total against the
/// exact target s·n·C(n,j).
#[derive(Debug, Clone, Serialize)]
pub struct LayerSumRow {
    pub layer: u32,
    pub expected: String,
    pub total: String,
    pub matches: bool,
    pub exempt: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerSumReport {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub variant: Variant,
    pub rows: Vec<LayerSumRow>,
    /// Slots whose actual set size differs from the slot's nominal layer
    /// (possible only for s=3 with m ≤ 2).
    pub degenerate_slots: usize,
    pub all_match: bool,
    pub note: Option<String>,
}

/// Checks that for every weighted layer j the slot weights assigned to that
/// layer sum to s·n·C(n,j) exactly. Totals are grouped by the slot's nominal
/// layer; rows for layers the variant modifies are marked exempt.
pub fn verify_layer_sums(config: &WeightedConfig) -> LayerSumReport {
    let scheme = &config.scheme;
    let mut totals: BTreeMap<u32, Rational> = scheme
        .weighted_layers()
        .into_iter()
        .map(|j| (j, Rational::zero()))
        .collect();
    let mut degenerate = 0usize;
    for entry in config.entries.values() {
        for slot in &entry.slots {
            let w = scheme.weight_of(slot.kind, slot.size_class);
            if let Some(t) = totals.get_mut(&slot.size_class) {
                *t += w;
            }
            if slot.set.len() != slot.size_class {
                degenerate += 1;
            }
        }
    }
    let exempt_layers = scheme.variant_exempt_layers();
    let mut rows = Vec::new();
    let mut all_match = true;
    for (layer, total) in totals {
        let expected =
            rat((config.s * config.n) as i64, 1) * binomial_rat(config.n as i64, layer as i64);
        let matches = total == expected;
        let exempt = exempt_layers.contains(&layer);
        if !matches && !exempt {
            all_match = false;
        }
        rows.push(LayerSumRow {
            layer,
            expected: rational_string(&expected),
            total: rational_string(&total),
            matches,
            exempt,
        });
    }
    let note = (degenerate > 0).then(|| {
        format!(
            "{degenerate} slots have actual size below their nominal layer \
             (lateral slots collide with the group arc when s=3 and m <= 2); \
             totals are grouped by nominal layer"
        )
    });
    LayerSumReport {
        n: config.n,
        s: config.s,
        m: config.m,
        variant: config.variant,
        rows,
        degenerate_slots: degenerate,
        all_match,
        note,
    }
}

/// One accumulated-weight class on one layer: how many sets of that actual
/// size share the given accumulated weight.
#[derive(Debug, Clone, Serialize)]
pub struct WeightClassRow {
    pub layer: u32,
    pub weight: String,
    pub count: usize,
}

/// The multiset of accumulated weights per actual layer — the configuration's
/// catalog of set types modulo rotation.
pub fn weight_class_table(config: &WeightedConfig) -> Vec<WeightClassRow> {
    let mut counts: BTreeMap<(u32, String), usize> = BTreeMap::new();
    for (set, entry) in &config.entries {
        let key = (set.len(), rational_string(&entry.weight));
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|((layer, weight), count)| WeightClassRow {
            layer,
            weight,
            count,
        })
        .collect()
}
