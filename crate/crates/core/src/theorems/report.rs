use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::budget::Budget;
use crate::measure::FnVec;
use crate::optimize::stream_rng;
use crate::space::SpaceExpr;

/// Tolerances by source of error: exact arithmetic identities, closed-form
/// norm equalities, search-mediated equalities and constant comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub linear: f64,
    pub closed_form: f64,
    pub optimizer: f64,
    pub constant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            linear: 1e-9,
            closed_form: 1e-6,
            optimizer: 1e-3,
            constant: 0.05,
        }
    }
}

/// Shared settings of a checker run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckContext {
    pub budget: Budget,
    pub tolerances: Tolerances,
}

impl CheckContext {
    pub fn new(budget: Budget) -> Self {
        Self {
            budget,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// A hypothesis of the result could not be established.
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        })
    }
}

/// A named quantity with its acceptance bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Margin {
    pub name: String,
    pub value: f64,
    /// Upper bound for `value`; `∞` means only finiteness is required.
    pub tolerance: f64,
    pub ok: bool,
}

impl Margin {
    /// `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            ok: value <= tolerance,
        }
    }

    /// `value < ∞`.
    pub fn finite(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance: f64::INFINITY,
            ok: value.is_finite(),
        }
    }

    /// Reported for information; never fails.
    pub fn info(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance: f64::NAN,
            ok: true,
        }
    }
}

/// A family of functions supporting a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub label: String,
    pub family: Vec<FnVec>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub theorem_id: String,
    pub status: Status,
    pub margins: Vec<Margin>,
    pub witnesses: Vec<Evidence>,
    pub notes: Vec<String>,
    /// SHA-256 of the instance description and seed.
    pub fingerprint: String,
}

impl CheckReport {
    pub(crate) fn new(id: &str, instance: &str, seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(id.as_bytes());
        h.update(b"\0");
        h.update(instance.as_bytes());
        h.update(seed.to_le_bytes());
        Self {
            theorem_id: id.to_string(),
            status: Status::Pass,
            margins: Vec::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
            fingerprint: hex::encode(h.finalize()),
        }
    }

    pub(crate) fn margin(&mut self, m: Margin) {
        self.margins.push(m);
    }

    pub(crate) fn evidence(&mut self, label: &str, family: Vec<FnVec>, value: Option<f64>) {
        self.witnesses.push(Evidence {
            label: label.to_string(),
            family,
            value,
        });
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Mark the report as skipped for an unmet hypothesis.
    pub(crate) fn skip(mut self, reason: impl Into<String>) -> Self {
        self.notes.push(reason.into());
        self.status = Status::Skip;
        self
    }

    /// Status from the margins, unless already skipped.
    pub(crate) fn finish(mut self) -> Self {
        if self.status != Status::Skip {
            self.status = if self.margins.iter().all(|m| m.ok) {
                Status::Pass
            } else {
                Status::Fail
            };
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn margin_value(&self, name: &str) -> Option<f64> {
        self.margins.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

/// Random functions supported on the active atoms of `x`, with Gaussian
/// entries and a random sparsity pattern.
pub fn random_samples(x: &SpaceExpr, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut rng = stream_rng(seed, &[0x5341_4d50]);
    let active = x.active_atoms();
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..x.atoms())
                .map(|i| {
                    if active.contains(i) && rng.random_bool(0.85) {
                        rng.sample::<f64, _>(rand_distr::StandardNormal)
                    } else {
                        0.0
                    }
                })
                .collect();
            if active.is_empty() || v.iter().any(|t| *t != 0.0) {
                break v;
            }
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish; `∞` when exactly one is
/// infinite.
pub(crate) fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if !a.is_finite() || !b.is_finite() {
        return f64::INFINITY;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Budget for searches nested inside a checker sweep.
pub(crate) fn reduced_budget(budget: &Budget) -> Budget {
    let mut b = budget.clone();
    b.restarts = b.restarts.min(6);
    b.k_max = Some(b.k_max.unwrap_or(3).min(3));
    b.max_iters = b.max_iters.min(80);
    b
}
