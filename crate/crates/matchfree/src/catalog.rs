//! Disjointness catalog: the geometric relations the discharging stages rely
//! on, verified exhaustively for a given cyclic order.
//!
//! Every stage of the discharging argument moves charge to a set that is
//! provably missing from the family, and each such proof rests on a tuple of
//! pairwise disjoint sets from one x-family. This module enumerates all those
//! tuples — over every anchor and every assignment of groups to the tuple's
//! roles — and checks the pairwise disjointness by bitmask intersection.

use serde::Serialize;

use crate::config::{build_xfamily, ConfigError, CyclicOrder, XFamily};
use crate::family::ElementSet;

#[derive(Debug, Clone, Serialize)]
pub struct CatalogViolation {
    pub relation: &'static str,
    pub x: u32,
    pub groups: Vec<u8>,
    pub sets: Vec<ElementSet>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogRow {
    pub relation: &'static str,
    pub tuples_checked: usize,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub rows: Vec<CatalogRow>,
    pub violations: Vec<CatalogViolation>,
    pub all_pass: bool,
}

fn pairwise_disjoint(sets: &[ElementSet]) -> bool {
    for (a, rest) in sets.iter().zip(1..) {
        for b in &sets[rest..] {
            if !a.is_disjoint(*b) {
                return false;
            }
        }
    }
    true
}

/// Chain set of size k, where k = 0 denotes the empty end of the chain.
fn chain_or_empty(fam: &XFamily, i: u8, k: u32) -> ElementSet {
    if k == 0 {
        ElementSet::EMPTY
    } else {
        fam.chain_set(i, k)
    }
}

struct Checker {
    rows: Vec<CatalogRow>,
    violations: Vec<CatalogViolation>,
    current: usize,
}

impl Checker {
    fn begin(&mut self, relation: &'static str) {
        self.rows.push(CatalogRow {
            relation,
            tuples_checked: 0,
            skipped: None,
        });
        self.current = self.rows.len() - 1;
    }

    fn skip(&mut self, relation: &'static str, reason: String) {
        self.rows.push(CatalogRow {
            relation,
            tuples_checked: 0,
            skipped: Some(reason),
        });
    }

    fn check(&mut self, x: u32, groups: &[u8], sets: &[ElementSet]) {
        let row = &mut self.rows[self.current];
        row.tuples_checked += 1;
        if !pairwise_disjoint(sets) {
            self.violations.push(CatalogViolation {
                relation: row.relation,
                x,
                groups: groups.to_vec(),
                sets: sets.to_vec(),
            });
        }
    }
}

/// All orderings (j1, j2, j3) of {0, 1, 2}.
const PERMS3: [[u8; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn verify_three_groups(sigma: &CyclicOrder, m: u32, checker: &mut Checker) -> Result<(), ConfigError> {
    let n = sigma.n();
    let families: Vec<XFamily> = (1..=n)
        .map(|x| build_xfamily(sigma, 3, m, x))
        .collect::<Result<_, _>>()?;

    // Small chain donor against the lateral/central (m+2)-pair of the other
    // two groups: the tuple behind the first transfer stage.
    if m < 3 {
        checker.skip(
            "chain-donor-vs-m2-pair",
            format!("needs chain sets of size m-3, m={m}"),
        );
        checker.skip(
            "lateral-m2-vs-short-chain",
            format!("needs chain sets of size m-3, m={m}"),
        );
    } else {
        checker.begin("chain-donor-vs-m2-pair");
        for fam in &families {
            for [j1, j2, j3] in PERMS3 {
                let donor = chain_or_empty(fam, j1, m - 3);
                let lateral = fam.lateral_m2_s3(j2, j1);
                let central = fam.central_m2_s3(j3, j1);
                checker.check(fam.x, &[j1, j2, j3], &[donor, lateral, central]);
            }
        }
        // A relation the same stage leans on: the lateral (m+2)-set avoids
        // the short chain of the group it points at.
        checker.begin("lateral-m2-vs-short-chain");
        for fam in &families {
            for [i, j, _] in PERMS3 {
                let lateral = fam.lateral_m2_s3(i, j);
                let chain = chain_or_empty(fam, j, m - 3);
                checker.check(fam.x, &[i, j], &[lateral, chain]);
            }
        }
    }

    // Two long chains against the top set of the remaining group.
    checker.begin("two-chains-vs-top");
    for fam in &families {
        for [j1, j2, j3] in PERMS3 {
            let sets = [
                chain_or_empty(fam, j1, m - 1),
                chain_or_empty(fam, j2, m - 1),
                fam.top(j3),
            ];
            checker.check(fam.x, &[j1, j2, j3], &sets);
        }
    }

    // Long chain plus a full arc against the central (m+2)-set pointing at
    // the chain's group.
    checker.begin("chain-and-arc-vs-central-m2");
    for fam in &families {
        for [j1, j2, j3] in PERMS3 {
            let sets = [
                chain_or_empty(fam, j1, m - 1),
                fam.m_set(j2),
                fam.central_m2_s3(j3, j1),
            ];
            checker.check(fam.x, &[j1, j2, j3], &sets);
        }
    }

    // Long chain against a central/lateral (m+1)-pair of the other groups.
    checker.begin("chain-vs-central-lateral-m1");
    for fam in &families {
        for [j1, j2, j3] in PERMS3 {
            let sets = [
                chain_or_empty(fam, j1, m - 1),
                fam.central_m1(j2, false),
                fam.lateral_m1(j3, j1),
            ];
            checker.check(fam.x, &[j1, j2, j3], &sets);
        }
    }

    // Two arcs against the central (m+1)-set of the remaining group.
    checker.begin("two-arcs-vs-central-m1");
    for fam in &families {
        for [j1, j2, j3] in PERMS3 {
            let sets = [fam.m_set(j1), fam.m_set(j2), fam.central_m1(j3, false)];
            checker.check(fam.x, &[j1, j2, j3], &sets);
        }
    }

    // Relations that follow directly from the role definitions.
    checker.begin("central-m1-vs-other-arcs");
    for fam in &families {
        for i in 0..3u8 {
            for j in (0..3u8).filter(|&j| j != i) {
                checker.check(fam.x, &[i, j], &[fam.central_m1(i, false), fam.m_set(j)]);
            }
        }
    }

    checker.begin("lateral-m1-vs-pointed-chain-and-third-arc");
    for fam in &families {
        for [i, j, j1] in PERMS3 {
            let lateral = fam.lateral_m1(i, j);
            let sets = [lateral, chain_or_empty(fam, j, m - 1), fam.m_set(j1)];
            checker.check(fam.x, &[i, j, j1], &sets);
        }
    }

    checker.begin("central-m2-vs-pointed-chain-and-third-arc");
    for fam in &families {
        for [i, j, j1] in PERMS3 {
            let central = fam.central_m2_s3(i, j);
            let sets = [central, chain_or_empty(fam, j, m - 1), fam.m_set(j1)];
            checker.check(fam.x, &[i, j, j1], &sets);
        }
    }

    // The lateral's two added elements sit inside the pointed arc only for
    // m >= 3; below that the second one spills into the next arc.
    if m < 3 {
        checker.skip(
            "central-m2-vs-lateral-m2",
            format!("lateral sets spill out of the pointed arc, m={m}"),
        );
    } else {
        checker.begin("central-m2-vs-lateral-m2");
        for fam in &families {
            for [i, j, j1] in PERMS3 {
                let central = fam.central_m2_s3(j, i);
                let lateral = fam.lateral_m2_s3(j1, i);
                checker.check(fam.x, &[i, j, j1], &[central, lateral]);
            }
        }
    }

    checker.begin("top-vs-other-chains");
    for fam in &families {
        for i in 0..3u8 {
            for j in (0..3u8).filter(|&j| j != i) {
                let sets = [fam.top(i), chain_or_empty(fam, j, m - 1)];
                checker.check(fam.x, &[i, j], &sets);
            }
        }
    }
    Ok(())
}

/// All orderings of {0, 1, 2, 3}.
fn perms4() -> Vec<[u8; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4u8 {
        for b in (0..4u8).filter(|&b| b != a) {
            for c in (0..4u8).filter(|&c| c != a && c != b) {
                let d = (0..4u8).find(|&d| d != a && d != b && d != c).unwrap();
                out.push([a, b, c, d]);
            }
        }
    }
    out
}

fn verify_four_groups(sigma: &CyclicOrder, m: u32, checker: &mut Checker) -> Result<(), ConfigError> {
    let n = sigma.n();
    let families: Vec<XFamily> = (1..=n)
        .map(|x| build_xfamily(sigma, 4, m, x))
        .collect::<Result<_, _>>()?;
    let all_perms = perms4();

    // Three long chains against the remaining group's top set.
    checker.begin("three-chains-vs-top");
    for fam in &families {
        for &[j1, j2, j3, i] in &all_perms {
            let sets = [
                chain_or_empty(fam, j1, m - 1),
                chain_or_empty(fam, j2, m - 1),
                chain_or_empty(fam, j3, m - 1),
                fam.top(i),
            ];
            checker.check(fam.x, &[j1, j2, j3, i], &sets);
        }
    }

    // Two long chains against each complementary lateral (m+2)-pair: the
    // pair splits both the anchor-side elements and the pointed groups.
    checker.begin("two-chains-vs-lateral-m2-pair");
    for fam in &families {
        for &[j1, j2, i1, i2] in &all_perms {
            for below_first in [false, true] {
                let sets = [
                    chain_or_empty(fam, j1, m - 1),
                    chain_or_empty(fam, j2, m - 1),
                    fam.lateral_m2_s4(i1, j1, below_first),
                    fam.lateral_m2_s4(i2, j2, !below_first),
                ];
                checker.check(fam.x, &[j1, j2, i1, i2], &sets);
            }
        }
    }

    // One long chain against every transversal of the 3×3 grid of
    // (m+1)-sets: rows are the other three groups, columns are "points at
    // the donor group", "adds the below-anchor element", "adds the anchor".
    checker.begin("chain-vs-m1-grid-transversals");
    for fam in &families {
        for &[i, j1, j2, j3] in &all_perms {
            if [j1, j2, j3] != {
                let mut sorted = [j1, j2, j3];
                sorted.sort_unstable();
                sorted
            } {
                continue; // use each {j1,j2,j3} once; transversals permute below
            }
            let donor = chain_or_empty(fam, i, m - 1);
            let cell = |g: u8, symbol: u8| -> ElementSet {
                match symbol {
                    0 => fam.lateral_m1(g, i),
                    1 => fam.central_m1(g, true),
                    _ => fam.central_m1(g, false),
                }
            };
            for [s1, s2, s3] in PERMS3 {
                let sets = [donor, cell(j1, s1), cell(j2, s2), cell(j3, s3)];
                checker.check(fam.x, &[i, j1, j2, j3], &sets);
            }
        }
    }

    // Three arcs against the central (m+2)-set of the remaining group.
    checker.begin("three-arcs-vs-central-m2");
    for fam in &families {
        for &[j1, j2, j3, i] in &all_perms {
            let sets = [
                fam.m_set(j1),
                fam.m_set(j2),
                fam.m_set(j3),
                fam.central_m2_s4(i),
            ];
            checker.check(fam.x, &[j1, j2, j3, i], &sets);
        }
    }

    // Two arcs against each complementary central (m+1)-pair.
    checker.begin("two-arcs-vs-central-m1-pair");
    for fam in &families {
        for &[j1, j2, i1, i2] in &all_perms {
            for below_first in [false, true] {
                let sets = [
                    fam.m_set(j1),
                    fam.m_set(j2),
                    fam.central_m1(i1, below_first),
                    fam.central_m1(i2, !below_first),
                ];
                checker.check(fam.x, &[j1, j2, i1, i2], &sets);
            }
        }
    }

    // Relations that follow directly from the role definitions.
    checker.begin("central-m1-vs-other-arcs");
    for fam in &families {
        for i in 0..4u8 {
            for j in (0..4u8).filter(|&j| j != i) {
                for below in [false, true] {
                    checker.check(fam.x, &[i, j], &[fam.central_m1(i, below), fam.m_set(j)]);
                }
            }
        }
    }

    checker.begin("lateral-m1-vs-pointed-chain-and-other-arcs");
    for fam in &families {
        for i in 0..4u8 {
            for j in (0..4u8).filter(|&j| j != i) {
                let lateral = fam.lateral_m1(i, j);
                checker.check(fam.x, &[i, j], &[lateral, chain_or_empty(fam, j, m - 1)]);
                for j1 in (0..4u8).filter(|&j1| j1 != i && j1 != j) {
                    checker.check(fam.x, &[i, j, j1], &[lateral, fam.m_set(j1)]);
                }
            }
        }
    }

    checker.begin("top-vs-other-chains");
    for fam in &families {
        for i in 0..4u8 {
            for j in (0..4u8).filter(|&j| j != i) {
                let sets = [fam.top(i), chain_or_empty(fam, j, m - 1)];
                checker.check(fam.x, &[i, j], &sets);
            }
        }
    }
    Ok(())
}

/// Verifies every disjointness relation the discharging stages use, for all
/// anchors and group assignments under the given cyclic order.
pub fn verify_disjointness_catalog(
    sigma: &CyclicOrder,
    s: u32,
    m: u32,
) -> Result<CatalogReport, ConfigError> {
    if s != 3 && s != 4 {
        return Err(ConfigError::UnsupportedS(s));
    }
    if m < 1 {
        return Err(ConfigError::InvalidM(m));
    }
    let mut checker = Checker {
        rows: Vec::new(),
        violations: Vec::new(),
        current: 0,
    };
    if s == 3 {
        verify_three_groups(sigma, m, &mut checker)?;
    } else {
        verify_four_groups(sigma, m, &mut checker)?;
    }
    let all_pass = checker.violations.is_empty();
    Ok(CatalogReport {
        n: sigma.n(),
        s,
        m,
        rows: checker.rows,
        violations: checker.violations,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: u32) -> CyclicOrder {
        CyclicOrder::identity(n)
    }

    #[test]
    fn three_group_catalog_passes_for_supported_sizes() {
        for m in [3u32, 4, 5, 6] {
            let n = 3 * m + 1;
            let report = verify_disjointness_catalog(&id(n), 3, m).unwrap();
            assert!(report.all_pass, "m={m}: {:?}", report.violations.first());
            assert!(report.rows.iter().all(|r| r.skipped.is_none()));
        }
    }

    #[test]
    fn four_group_catalog_passes_for_supported_sizes() {
        for m in [1u32, 2, 3, 4, 5] {
            let n = 4 * m + 2;
            let report = verify_disjointness_catalog(&id(n), 4, m).unwrap();
            assert!(report.all_pass, "m={m}: {:?}", report.violations.first());
        }
    }

    #[test]
    fn three_group_catalog_small_m_skips_short_chain_rows() {
        for m in [1u32, 2] {
            let n = 3 * m + 1;
            let report = verify_disjointness_catalog(&id(n), 3, m).unwrap();
            let skipped: Vec<&str> = report
                .rows
                .iter()
                .filter(|r| r.skipped.is_some())
                .map(|r| r.relation)
                .collect();
            assert_eq!(
                skipped,
                vec![
                    "chain-donor-vs-m2-pair",
                    "lateral-m2-vs-short-chain",
                    "central-m2-vs-lateral-m2",
                ],
                "m={m}"
            );
            assert!(report.all_pass, "m={m}: {:?}", report.violations.first());
        }
    }

    #[test]
    fn catalog_holds_under_random_orders() {
        let sigma = CyclicOrder::from_order(vec![7, 3, 10, 1, 5, 8, 2, 9, 4, 6]).unwrap();
        let report = verify_disjointness_catalog(&sigma, 3, 3).unwrap();
        assert!(report.all_pass);
        let sigma4 = CyclicOrder::from_order(vec![14, 2, 9, 4, 11, 6, 13, 8, 1, 10, 3, 12, 5, 7])
            .unwrap();
        let report4 = verify_disjointness_catalog(&sigma4, 4, 3).unwrap();
        assert!(report4.all_pass);
    }

    #[test]
    fn tuple_counts_are_stable() {
        let report = verify_disjointness_catalog(&id(10), 3, 3).unwrap();
        let row = |name: &str| {
            report
                .rows
                .iter()
                .find(|r| r.relation == name)
                .unwrap()
                .tuples_checked
        };
        // 10 anchors × 6 orderings for the permutation-driven rows.
        assert_eq!(row("chain-donor-vs-m2-pair"), 60);
        assert_eq!(row("two-chains-vs-top"), 60);
        assert_eq!(row("two-arcs-vs-central-m1"), 60);
        // 10 anchors × 3 groups × 2 other groups for the pair rows.
        assert_eq!(row("central-m1-vs-other-arcs"), 60);

        let report4 = verify_disjointness_catalog(&id(14), 4, 3).unwrap();
        let row4 = |name: &str| {
            report4
                .rows
                .iter()
                .find(|r| r.relation == name)
                .unwrap()
                .tuples_checked
        };
        // 14 anchors × 24 orderings.
        assert_eq!(row4("three-chains-vs-top"), 336);
        // 14 anchors × 24 orderings × 2 anchor-side splits.
        assert_eq!(row4("two-chains-vs-lateral-m2-pair"), 672);
        // 14 anchors × 4 donors × 4 choose-3 stays ordered-unique × 6 transversals.
        assert_eq!(row4("chain-vs-m1-grid-transversals"), 336);
    }

    #[test]
    fn pairwise_disjoint_helper() {
        let a = ElementSet::from_elements(&[1, 2]);
        let b = ElementSet::from_elements(&[3]);
        let c = ElementSet::from_elements(&[2, 4]);
        assert!(pairwise_disjoint(&[a, b]));
        assert!(!pairwise_disjoint(&[a, b, c]));
        assert!(pairwise_disjoint(&[ElementSet::EMPTY, a, b]));
    }
}
