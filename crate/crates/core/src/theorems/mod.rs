//! Executable checks of the structural results: each checker evaluates
//! both sides of a statement on a concrete instance and records the
//! discrepancies as margins of a [`CheckReport`].
//!
//! Statements of the form "A if and only if B" are checked one direction at
//! a time. When a hypothesis cannot be established by search the report is
//! marked [`Status::Skip`] instead of failing.

mod checks;
mod domain;
mod report;

pub use checks::{
    check_im_concavity, check_lpm_power_concavity, check_power_core, check_quasinorm_profile, check_representation,
    check_sum_lemma, representing_measure,
};
pub use domain::{
    check_extension, check_maximality, default_catalog, maurey_rosenthal_factor, optimal_domain, MaximalityOptions,
};
pub use report::{random_samples, CheckContext, CheckReport, Evidence, Margin, Status, Tolerances};

/// Stable identifiers of the checkers.
pub const CHECK_IDS: [&str; 9] = [
    "extension",
    "im-concavity",
    "lpm-power-concavity",
    "maurey-rosenthal",
    "maximality",
    "power-core",
    "quasinorm-profile",
    "representation",
    "sum-lemma",
];
