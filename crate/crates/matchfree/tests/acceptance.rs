//! Acceptance gate for the whole crate: one test per criterion, each with a
//! hard wall-clock budget. The harness prints one pass/fail line per
//! criterion; run with `--nocapture` for the timing summaries.

use std::time::{Duration, Instant};

use matchfree::config::{build_config, CyclicOrder, Variant};
use matchfree::{
    anchored_family, average_identity, e_formula, kleitman_family, random_upset, run_discharge,
    solve_exact, verify_disjointness_catalog, verify_family, verify_layer_sums, ElementSet, Int,
    Rational, SetFamily,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Anchor values the closed forms must reproduce exactly.
const ANCHORS: [(u32, u32, u64); 8] = [
    (4, 3, 12),
    (5, 3, 26),
    (6, 3, 52),
    (7, 3, 105),
    (6, 4, 58),
    (7, 4, 120),
    (8, 4, 240),
    (10, 4, 977),
];

fn finish(name: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    println!("{name}: PASS ({elapsed:.2?} of {budget:.2?} budget)");
    assert!(
        elapsed <= budget,
        "{name} exceeded its {budget:?} budget: took {elapsed:?}"
    );
}

/// Builds the extremal witness for (n, s); the constructor is dictated by the
/// residue class of n mod s.
fn witness_family(n: u32, s: u32) -> SetFamily {
    if n % s == s - 2 {
        anchored_family(n, s).unwrap()
    } else {
        kleitman_family(n, s).unwrap()
    }
}

fn seeded_orders(n: u32, count: usize, rng: &mut ChaCha8Rng) -> Vec<CyclicOrder> {
    let mut orders = vec![CyclicOrder::identity(n)];
    for _ in 0..count {
        let mut perm: Vec<u32> = (1..=n).collect();
        perm.shuffle(rng);
        orders.push(CyclicOrder::from_order(perm).unwrap());
    }
    orders
}

fn upset_from_arcs_and_min_size(
    n: u32,
    arcs: &[&[u32]],
    min_size: u32,
    excluded: &[&[u32]],
) -> SetFamily {
    let mut fam = SetFamily::new(n).unwrap();
    let excluded: Vec<ElementSet> = excluded
        .iter()
        .map(|e| ElementSet::from_elements(e))
        .collect();
    for mask in 0u32..(1 << n) {
        let set = ElementSet::from_mask(mask);
        if set.len() >= min_size && !excluded.contains(&set) {
            fam.insert(set).unwrap();
        }
    }
    for arc in arcs {
        fam.insert(ElementSet::from_elements(arc)).unwrap();
    }
    fam
}

#[test]
fn criterion_1_closed_form_values() {
    let start = Instant::now();
    let budget = Duration::from_secs(1);
    for (n, s, want) in ANCHORS {
        let got = e_formula(n, s).unwrap();
        assert_eq!(got.value, Int::from(want), "e({n},{s})");
    }
    // Cross-anchor: the same four values expressed as powerset deficits.
    for (n, s, missing) in [(4u32, 3u32, 4u64), (7, 3, 23), (6, 4, 6), (10, 4, 47)] {
        let got = e_formula(n, s).unwrap().value;
        assert_eq!(Int::from(1u64 << n) - got, Int::from(missing), "2^{n} - e({n},{s})");
    }
    finish("criterion 1 (closed-form values)", start, budget);
}

#[test]
fn criterion_2_witness_constructions() {
    let start = Instant::now();
    let budget = Duration::from_secs(10);
    let tuples: [(u32, u32); 10] = [
        (4, 3),
        (5, 3),
        (6, 3),
        (7, 3),
        (6, 4),
        (7, 4),
        (8, 4),
        (10, 4),
        (13, 3),
        (14, 4),
    ];
    for (n, s) in tuples {
        let want = e_formula(n, s).unwrap().value;
        let family = witness_family(n, s);
        let report = verify_family(&family, s).unwrap();
        assert_eq!(report.size, usize::try_from(&want).unwrap(), "size of ({n},{s}) witness");
        assert_eq!(report.nu_capped, (s - 1) as usize, "matching number of ({n},{s}) witness");
        assert_eq!(report.matches_formula, Some(true), "({n},{s}) witness vs closed form");
        assert!(report.is_upset && !report.contains_empty, "({n},{s}) witness shape");
    }
    finish("criterion 2 (witness constructions)", start, budget);
}

#[test]
fn criterion_3_exact_solver_agreement() {
    let start = Instant::now();
    // Per-instance budgets; the largest ground, (10,4), is out of reach of
    // exact search on a desktop and is covered by criteria 1-2 instead.
    let runs: [(u32, u32, usize, u64); 4] =
        [(4, 3, 12, 60), (5, 3, 26, 60), (6, 4, 58, 60), (6, 3, 52, 300)];
    let mut total_budget = Duration::ZERO;
    for (n, s, want, secs) in runs {
        let budget = Duration::from_secs(secs);
        total_budget += budget;
        let result = solve_exact(n, s, budget).unwrap();
        assert!(result.optimal, "({n},{s}) should be solved to optimality");
        assert_eq!(result.value, want, "exact maximum for ({n},{s})");
        assert_eq!(result.lower_bound, result.upper_bound, "({n},{s}) bounds at optimality");
        assert_eq!(result.witness.len(), want, "({n},{s}) witness size");
        assert!(!result.witness.has_disjoint_tuple(s as usize), "({n},{s}) witness validity");
    }
    let budget = Duration::from_secs(7200);
    total_budget += budget;
    let result = solve_exact(7, 3, budget).unwrap();
    if result.optimal {
        assert_eq!(result.value, 105, "exact maximum for (7,3)");
        assert!(!result.witness.has_disjoint_tuple(3usize), "(7,3) witness validity");
    } else {
        // Budget expiry is tolerated only here; the best family found must
        // still witness the known value, and the unfinished proof bound is
        // reported on its own.
        assert!(result.lower_bound >= 105, "(7,3) best-found below the known value");
        println!(
            "criterion 3: (7,3) budget expired; best-found {} with open upper bound {}",
            result.lower_bound, result.upper_bound
        );
    }
    finish("criterion 3 (exact solver agreement)", start, total_budget);
}

#[test]
fn criterion_4_layer_sum_identity() {
    let start = Instant::now();
    let budget = Duration::from_secs(120);
    let mut rng = ChaCha8Rng::seed_from_u64(0x001a_7e55);
    let mut shapes: Vec<(u32, u32)> = (1..=6).map(|m| (3, m)).collect();
    shapes.extend((1..=5).map(|m| (4, m)));
    for (s, m) in shapes {
        let n = s * m + s - 2;
        for order in seeded_orders(n, 20, &mut rng) {
            for variant in [Variant::Full, Variant::CentralOnly] {
                let cfg = build_config(&order, s, m, variant).unwrap();
                let report = verify_layer_sums(&cfg);
                assert!(
                    report.all_match,
                    "layer sums s={s} m={m} {variant:?}: {:?}",
                    report.rows
                );
                if variant == Variant::Full {
                    // The full scheme has no exempt layers: every weighted
                    // layer must hit s*n*C(n,j) on the nose.
                    assert!(report.rows.iter().all(|r| r.matches && !r.exempt));
                }
            }
        }
    }
    finish("criterion 4 (layer-sum identity)", start, budget);
}

#[test]
fn criterion_5_disjointness_catalog() {
    let start = Instant::now();
    let budget = Duration::from_secs(120);
    let mut rng = ChaCha8Rng::seed_from_u64(0x00ca_7a10);
    let mut shapes: Vec<(u32, u32)> = (3..=6).map(|m| (3, m)).collect();
    shapes.extend((3..=5).map(|m| (4, m)));
    for (s, m) in shapes {
        let n = s * m + s - 2;
        for order in seeded_orders(n, 3, &mut rng) {
            let report = verify_disjointness_catalog(&order, s, m).unwrap();
            assert!(
                report.all_pass && report.violations.is_empty(),
                "catalog s={s} m={m}: {:?}",
                report.violations.first()
            );
            assert!(!report.rows.is_empty(), "catalog s={s} m={m} produced no rows");
        }
    }
    finish("criterion 5 (disjointness catalog)", start, budget);
}

#[test]
fn criterion_6_discharge_soundness() {
    let start = Instant::now();
    let budget = Duration::from_secs(1800);

    // (a) Extremal witnesses: the pool cap is met with exact equality and
    // nothing moves. The reduced weight scheme is the one used when m = 2.
    let witness_runs = [
        (7u32, 3u32, Variant::CentralOnly),
        (10, 3, Variant::Full),
        (13, 3, Variant::Full),
        (10, 4, Variant::CentralOnly),
        (14, 4, Variant::Full),
    ];
    for (n, s, variant) in witness_runs {
        let m = (n + 2 - s) / s;
        let family = witness_family(n, s);
        let report = run_discharge(&family, &CyclicOrder::identity(n), s, m, variant).unwrap();
        assert!(
            report.verdict && report.violations.is_empty(),
            "witness discharge ({n},{s}): {:?}",
            report.violations.first()
        );
        assert_eq!(report.q, m, "witness ({n},{s}) arc count");
        assert_eq!(report.charged_total, report.bound_total, "witness ({n},{s}) slack");
        let pool_cap = Int::from(s * m) * matchfree::binomial(n as i64, m as i64);
        assert_eq!(report.pool_final, pool_cap.to_string(), "witness ({n},{s}) pool");
        assert!(report.stages.iter().all(|st| st.firings == 0), "witness ({n},{s}) moved charge");
    }

    // (b) Seeded random up-sets with matching number below s: the verdict
    // must hold on every one, with not a single stage violation.
    for (n, s) in [(10u32, 3u32), (14, 4)] {
        let m = (n + 2 - s) / s;
        for seed in 0..1000u64 {
            let generated = random_upset(n, s, seed).unwrap();
            let report =
                run_discharge(&generated.family, &CyclicOrder::identity(n), s, m, Variant::Full)
                    .unwrap();
            assert!(
                report.verdict && report.violations.is_empty(),
                "random up-set ({n},{s}) seed {seed}: {:?}",
                report.violations.first()
            );
        }
    }

    // (c) The tight surplus geometry (q = m+1 with exactly two doubly-covered
    // anchors) in both of its shapes: one shared receiver, and two separate
    // receivers.
    let shared = upset_from_arcs_and_min_size(
        10,
        &[&[1, 2, 3], &[4, 5, 6], &[2, 3, 4], &[3, 4, 5]],
        4,
        &[&[7, 8, 9, 10]],
    );
    let report = run_discharge(&shared, &CyclicOrder::identity(10), 3, 3, Variant::Full).unwrap();
    assert!(report.verdict && report.violations.is_empty(), "shared-receiver geometry");
    assert_eq!(report.q, 4);
    assert_eq!(report.special_case.as_deref(), Some("same-target"));

    let separate = upset_from_arcs_and_min_size(
        10,
        &[&[1, 2, 3], &[2, 3, 4], &[6, 7, 8], &[7, 8, 9]],
        4,
        &[&[4, 5, 9, 10], &[4, 5, 6, 10], &[1, 5, 9, 10], &[1, 5, 6, 10]],
    );
    let report = run_discharge(&separate, &CyclicOrder::identity(10), 3, 3, Variant::Full).unwrap();
    assert!(report.verdict && report.violations.is_empty(), "separate-receiver geometry");
    assert_eq!(report.q, 4);
    assert_eq!(report.special_case.as_deref(), Some("distinct-targets"));

    finish("criterion 6 (discharge soundness)", start, budget);
}

#[test]
fn criterion_7_averaging_identity() {
    let start = Instant::now();
    let budget = Duration::from_secs(600);
    for seed in 0..5u64 {
        let generated = random_upset(7, 3, seed).unwrap();
        for variant in [Variant::Full, Variant::CentralOnly] {
            let report = average_identity(&generated.family, 3, 2, variant).unwrap();
            assert_eq!(report.permutations, 5040, "seed {seed} permutation count");
            assert!(
                report.identity_holds,
                "seed {seed} {variant:?}: averaged {} vs census {}",
                report.average_weighted_count, report.layer_census
            );
        }
    }
    finish("criterion 7 (averaging identity)", start, budget);
}

#[test]
fn criterion_8_inequality_audit() {
    let start = Instant::now();
    let budget = Duration::from_secs(300);
    for s in [3u32, 4] {
        let records = matchfree::audit(s, 1000).unwrap();
        let per_m = if s == 3 { 14 } else { 13 };
        assert_eq!(records.len(), per_m * 1000, "record count for s={s}");
        for r in &records {
            // Bounds that kick in only past a small-m threshold are the only
            // ones allowed to fail, and only below their threshold.
            let expected = match r.id {
                "shared-target-capacity" | "stage2-s3-step" | "triple-target-cap" => r.m >= 3,
                "stage2-s3-cap" | "stage1-s4-step" | "variant-triple-s4" => r.m >= 2,
                _ => true,
            };
            assert_eq!(r.holds, expected, "{} at s={s} m={}", r.id, r.m);
            match r.id {
                // Two of the relations are exact identities: margin 0 always.
                "half-pair-equals-lateral-weight" | "pair-transfer-equality" => {
                    assert_eq!(r.margin, Rational::from(Int::from(0)), "{} at m={}", r.id, r.m);
                }
                // The triple-capacity bound misses by exactly 10/77 at m=2.
                "triple-target-cap" if r.m == 2 => {
                    assert!(!r.holds && !r.vacuous);
                    assert_eq!(r.margin, Rational::new(Int::from(-10), Int::from(77)));
                }
                // The first stage's cap has nothing to say until m reaches 4,
                // and holds from there on out (vacuously at the boundary).
                "stage1-s3-cap" => {
                    assert_eq!(r.vacuous, r.m <= 3, "stage1-s3-cap vacuity at m={}", r.m);
                    if r.m >= 3 {
                        assert!(r.holds, "stage1-s3-cap at m={}", r.m);
                    }
                }
                _ => {}
            }
        }
    }
    finish("criterion 8 (inequality audit)", start, budget);
}
