//! Verification laboratory for an extremal set-family problem: the largest
//! family of subsets of `{1..n}` containing no `s` pairwise disjoint distinct
//! members.
//!
//! The crate provides, with exact arithmetic throughout:
//! - closed-form maximum sizes for the supported residues of n mod s, with
//!   witness constructions ([`formulas`]);
//! - an exact branch-and-bound solver for small ground sets ([`solver`]);
//! - a weighted cyclic-configuration builder whose layer sums certify an
//!   averaging identity ([`config`], [`catalog`]);
//! - a charge-redistribution verifier over those configurations
//!   ([`discharge`]);
//! - an audit of every inequality the redistribution relies on, over a wide
//!   parameter range ([`inequalities`]);
//! - randomized cross-checks ([`average`], [`gen`]).

pub mod average;
pub mod binom;
pub mod family;
pub mod formulas;
pub mod gen;
pub mod catalog;
pub mod config;
pub mod discharge;
pub mod inequalities;
pub mod io;
pub mod solver;

pub use average::{average_identity, AverageError, AverageReport, MAX_AVERAGE_GROUND};
pub use binom::{binomial, binomial_sum, rational_string, Int, Rational};
pub use family::{ElementSet, FamilyError, SetFamily, MAX_GROUND};
pub use formulas::{
    anchored_family, e_formula, kleitman_family, verify_family, ExtremalValue, FamilyReport,
    FormulaError, ResidueClass, MAX_ENUMERATION,
};
pub use catalog::{verify_disjointness_catalog, CatalogReport, CatalogRow, CatalogViolation};
pub use gen::{random_upset, GenError, GeneratedFamily};
pub use config::{
    build_config, build_xfamily, verify_layer_sums, weight_class_table, ConfigError, CyclicOrder,
    LabeledSet, LayerSumReport, RoleKind, Variant, WeightScheme, WeightedConfig, XFamily,
};
pub use discharge::{
    run_discharge, run_discharge_on, DischargeError, DischargeReport, DischargeViolation, StageLog,
};
pub use inequalities::{audit, records_to_csv, AuditError, InequalityRecord};
pub use io::{parse_family, write_family, ParseError};
pub use solver::{solve_exact, SolveError, SolveResult};
