//! Brute-force check of the averaging identity behind the weighted bound:
//! over all n! cyclic orders, the mean total weight a family picks up equals
//! a per-layer census of the family.
//!
//! For one order σ the configuration assigns weights to certain sets; a
//! family's weighted count is the sum over its members that carry weight.
//! Averaging over every σ, each j-set is hit equally often by symmetry, so
//! the mean equals Σ_j S_j·|F_j|/C(n,j), where S_j is the total weight the
//! configuration puts on actual size j (order-independent) and |F_j| counts
//! the family's j-sets. On layers where S_j = s·n·C(n,j) this is the plain
//! s·n·|F_j| form; layers that house collapsed slots (short arcs absorbing
//! nominally larger roles) deviate by the collapsed weight, and the report
//! names the layers where the plain form holds. The left side is summed
//! permutation by permutation with no shortcut, which is what makes the
//! check meaningful.

use num::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::binom::{binomial_rat, rat, rational_string, Rational};
use crate::config::{build_config, ConfigError, CyclicOrder, Variant};
use crate::family::SetFamily;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AverageError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("full-permutation averaging is limited to ground sets of size ≤ {max}, got {n}")]
    GroundTooLarge { n: u32, max: u32 },
    #[error("family lives on [{family_n}], but s and m put the configuration on [{expected}]")]
    FamilyMismatch { family_n: u32, expected: u32 },
}

/// Largest ground set the n!-fold enumeration accepts.
pub const MAX_AVERAGE_GROUND: u32 = 8;

#[derive(Debug, Clone, Serialize)]
pub struct AverageReport {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub variant: Variant,
    pub family_size: usize,
    pub permutations: usize,
    /// layer_counts[j] = number of family members of size j.
    pub layer_counts: Vec<usize>,
    /// layer_sums[j] = total configuration weight on size-j sets, S_j.
    pub layer_sums: Vec<String>,
    /// Layers j with S_j = s·n·C(n,j) exactly.
    pub uniform_layers: Vec<u32>,
    /// (1/n!)·Σ_σ Σ_{F member, weighted under σ} w_σ(F).
    pub average_weighted_count: String,
    /// Σ_j S_j·|F_j|/C(n,j).
    pub layer_census: String,
    pub identity_holds: bool,
}

/// Visits every permutation of `items` exactly once (Heap's algorithm).
fn for_each_permutation(n: u32, mut visit: impl FnMut(&[u32])) {
    let mut items: Vec<u32> = (1..=n).collect();
    let mut c = vec![0usize; items.len()];
    visit(&items);
    let mut i = 0;
    while i < items.len() {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(&items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Sums the configuration weights over every permutation for `family` and
/// compares the average with the per-layer census, both exact.
pub fn average_identity(
    family: &SetFamily,
    s: u32,
    m: u32,
    variant: Variant,
) -> Result<AverageReport, AverageError> {
    let n = s * m + s - 2;
    if n > MAX_AVERAGE_GROUND {
        return Err(AverageError::GroundTooLarge {
            n,
            max: MAX_AVERAGE_GROUND,
        });
    }
    if family.n() != n {
        return Err(AverageError::FamilyMismatch {
            family_n: family.n(),
            expected: n,
        });
    }

    let mut grand_total = Rational::zero();
    let mut permutations = 0usize;
    let mut first_error: Option<ConfigError> = None;
    for_each_permutation(n, |order| {
        if first_error.is_some() {
            return;
        }
        let sigma = match CyclicOrder::from_order(order.to_vec()) {
            Ok(sigma) => sigma,
            Err(e) => {
                first_error = Some(e);
                return;
            }
        };
        let cfg = match build_config(&sigma, s, m, variant) {
            Ok(cfg) => cfg,
            Err(e) => {
                first_error = Some(e);
                return;
            }
        };
        for (set, entry) in &cfg.entries {
            if family.contains(*set) {
                grand_total += &entry.weight;
            }
        }
        permutations += 1;
    });
    if let Some(e) = first_error {
        return Err(e.into());
    }
    let average = grand_total / rat(permutations as i64, 1);

    // Layer sums from one configuration: S_j does not depend on σ because
    // relabeling permutes the slots within each actual size.
    let identity_cfg = build_config(&CyclicOrder::identity(n), s, m, variant)?;
    let mut layer_sums = vec![Rational::zero(); n as usize + 1];
    for (set, entry) in &identity_cfg.entries {
        layer_sums[set.len() as usize] += &entry.weight;
    }
    let mut layer_counts = vec![0usize; n as usize + 1];
    for set in family.iter() {
        layer_counts[set.len() as usize] += 1;
    }

    let mut census = Rational::zero();
    for j in 0..=n as usize {
        if layer_counts[j] == 0 || layer_sums[j].is_zero() {
            continue;
        }
        census +=
            &layer_sums[j] * rat(layer_counts[j] as i64, 1) / binomial_rat(n as i64, j as i64);
    }

    let uniform_layers = (0..=n)
        .filter(|&j| {
            !layer_sums[j as usize].is_zero()
                && layer_sums[j as usize]
                    == rat((s * n) as i64, 1) * binomial_rat(n as i64, j as i64)
        })
        .collect();

    Ok(AverageReport {
        n,
        s,
        m,
        variant,
        family_size: family.len(),
        permutations,
        layer_counts,
        layer_sums: layer_sums.iter().map(rational_string).collect(),
        uniform_layers,
        average_weighted_count: rational_string(&average),
        layer_census: rational_string(&census),
        identity_holds: average == census,
    })
}
