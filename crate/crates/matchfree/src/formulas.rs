//! Closed-form extremal values and the matching witness families.
//!
//! For ground sets of size `n = s*m - 1`, `s*m`, and `s*m + s - 2` there are
//! exact formulas for the largest family of subsets of `{1..n}` with no `s`
//! pairwise disjoint distinct members, each certified by an explicit witness
//! construction of the same size. Everything here is parameterized by the
//! residue of `n` modulo `s`.

use thiserror::Error;

use crate::binom::{binomial, binomial_sum, Int};
use crate::family::{ElementSet, FamilyError, SetFamily, MAX_GROUND};

/// Largest ground set for which constructions materialize full families.
pub const MAX_ENUMERATION: u32 = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("no closed form for n={n}, s={s} (residue n mod s = {residue})")]
    UnsupportedResidue { n: u32, s: u32, residue: u32 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("ground set size {0} too large to materialize a family (max {MAX_ENUMERATION})")]
    EnumerationTooLarge(u32),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Which closed form applies, named by the witness construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ResidueClass {
    /// n = s*m - 1: every set of size >= m.
    AllAboveThreshold,
    /// n = s*m: every set of size >= m+1, plus the m-sets avoiding one point.
    ThresholdPlusPartialLayer,
    /// n = s*m + s - 2: every set of size >= m+1, plus the m-sets through one
    /// point.
    ThresholdPlusStarLayer,
}

/// An extremal value together with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalValue {
    pub n: u32,
    pub s: u32,
    pub m: u32,
    pub class: ResidueClass,
    pub value: Int,
    /// Present when the closed form is applied outside the range that the
    /// rest of this crate can independently cross-check.
    pub note: Option<&'static str>,
}

fn check_params(n: u32, s: u32) -> Result<(), FormulaError> {
    if n == 0 || n > MAX_GROUND {
        return Err(FormulaError::InvalidParams(format!(
            "ground set size must be 1..={MAX_GROUND}, got {n}"
        )));
    }
    if s < 2 {
        return Err(FormulaError::InvalidParams(format!(
            "forbidden tuple size must be at least 2, got {s}"
        )));
    }
    Ok(())
}

/// Exact maximum size of a family on `{1..n}` with no `s` pairwise disjoint
/// distinct members, for the supported residues of n mod s.
pub fn e_formula(n: u32, s: u32) -> Result<ExtremalValue, FormulaError> {
    check_params(n, s)?;
    let residue = n % s;
    let ni = n as i64;
    // Order matters for s = 2, where s - 2 == 0 and the threshold-plus-layer
    // class takes the even case.
    if residue == s - 1 {
        let m = (n + 1) / s;
        let value = binomial_sum(ni, m as i64, ni);
        return Ok(ExtremalValue { n, s, m, class: ResidueClass::AllAboveThreshold, value, note: None });
    }
    if residue == 0 {
        let m = n / s;
        // C(s*m - 1, m) counts the m-sets avoiding a fixed point, an integer
        // form of the fraction (s-1)/s of the full m-layer.
        let value = binomial(ni - 1, m as i64) + binomial_sum(ni, m as i64 + 1, ni);
        return Ok(ExtremalValue { n, s, m, class: ResidueClass::ThresholdPlusPartialLayer, value, note: None });
    }
    if s >= 3 && residue == s - 2 {
        let m = (n + 2 - s) / s;
        if m == 0 {
            return Err(FormulaError::UnsupportedResidue { n, s, residue });
        }
        let value = binomial(ni - 1, m as i64 - 1) + binomial_sum(ni, m as i64 + 1, ni);
        let note = if s >= 5 {
            Some("closed form applied for s >= 5; independent cross-checks in this crate cover s in {3,4}")
        } else {
            None
        };
        return Ok(ExtremalValue { n, s, m, class: ResidueClass::ThresholdPlusStarLayer, value, note });
    }
    Err(FormulaError::UnsupportedResidue { n, s, residue })
}

fn all_of_min_size(n: u32, k: u32) -> Result<SetFamily, FormulaError> {
    if n > MAX_ENUMERATION {
        return Err(FormulaError::EnumerationTooLarge(n));
    }
    let mut fam = SetFamily::new(n)?;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() >= k {
            fam.insert(ElementSet::from_mask(mask))?;
        }
    }
    Ok(fam)
}

/// Witness for the `n = s*m - 1` and `n = s*m` classes.
pub fn kleitman_family(n: u32, s: u32) -> Result<SetFamily, FormulaError> {
    check_params(n, s)?;
    let residue = n % s;
    if residue == s - 1 {
        let m = (n + 1) / s;
        return all_of_min_size(n, m);
    }
    if residue == 0 {
        let m = n / s;
        let mut fam = all_of_min_size(n, m + 1)?;
        // The m-sets avoiding the last point.
        for mask in 0u32..(1u32 << (n - 1)) {
            if mask.count_ones() == m {
                fam.insert(ElementSet::from_mask(mask))?;
            }
        }
        return Ok(fam);
    }
    Err(FormulaError::UnsupportedResidue { n, s, residue })
}

/// Witness for the `n = s*m + s - 2` class: all sets of size >= m+1 plus the
/// m-sets through element 1.
pub fn anchored_family(n: u32, s: u32) -> Result<SetFamily, FormulaError> {
    check_params(n, s)?;
    let residue = n % s;
    if s < 3 || residue != s - 2 {
        return Err(FormulaError::UnsupportedResidue { n, s, residue });
    }
    let m = (n + 2 - s) / s;
    if m == 0 {
        return Err(FormulaError::UnsupportedResidue { n, s, residue });
    }
    let mut fam = all_of_min_size(n, m + 1)?;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() == m && mask & 1 != 0 {
            fam.insert(ElementSet::from_mask(mask))?;
        }
    }
    Ok(fam)
}

/// What `check` reports about a family file.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FamilyReport {
    pub n: u32,
    pub s: u32,
    pub size: usize,
    /// Matching number capped at s, computed over the nonempty members.
    pub nu_capped: usize,
    pub is_upset: bool,
    pub contains_empty: bool,
    /// None when no closed form covers (n, s).
    pub matches_formula: Option<bool>,
}

/// Inspect a family: size, capped matching number, up-set status, and
/// agreement with the closed-form value when one applies.
pub fn verify_family(fam: &SetFamily, s: u32) -> Result<FamilyReport, FormulaError> {
    if s < 2 {
        return Err(FormulaError::InvalidParams(format!(
            "forbidden tuple size must be at least 2, got {s}"
        )));
    }
    let contains_empty = fam.contains_empty_set();
    let nu_capped = if contains_empty {
        let mut rest = fam.clone();
        rest.remove(ElementSet::EMPTY);
        rest.matching_number(s as usize)?
    } else {
        fam.matching_number(s as usize)?
    };
    let matches_formula = match e_formula(fam.n(), s) {
        Ok(ev) => Some(ev.value == Int::from(fam.len() as u64)),
        Err(FormulaError::UnsupportedResidue { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(FamilyReport {
        n: fam.n(),
        s,
        size: fam.len(),
        nu_capped,
        is_upset: fam.is_upset(),
        contains_empty,
        matches_formula,
    })
}
