//! Witness-certified lower bounds for concavity, convexity and
//! power-concavity constants.
//!
//! Every estimator maximizes a degree-zero homogeneous ratio over families
//! `(f_j)_{j≤k}` of functions on the active atoms, parametrized as a point
//! of the unit sphere in `ℝ^{k×s}`. The family size escalates from 1 until
//! the relative gain stalls. The reported bound is the ratio recomputed
//! from the returned family, so it is always attained by the witness.

mod oracle;

use rayon::prelude::*;

pub use oracle::{oracle_constant, oracle_core_norm, OracleOptions, OracleResult};

use crate::budget::Budget;
use crate::error::{check_len, check_positive, Error, Result};
use crate::measure::{sigma_obstructions, FnVec};
use crate::operator::Operator;
use crate::optimize::{argmax, gaussian_vec, normalize, sphere_ascent, stream_rng, AscentOptions};
use crate::space::{EscalationStep, Node, SpaceExpr};

const STREAM_RATIO: u64 = 0x5241_5449;
/// Ratios above this are reported as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

const INNER_SUM_ITERS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantKind {
    Concavity,
    Convexity,
    PowerConcavity,
}

/// A ratio maximization problem.
#[derive(Debug, Clone)]
pub enum Problem {
    /// `(Σ‖Tf_j‖^q)^{1/q} / ‖(Σ|f_j|^q)^{1/q}‖_X`.
    Concavity { op: Operator, q: f64 },
    /// q-concavity of the space itself: `(Σ‖f_j‖_X^q)^{1/q} / ‖(Σ|f_j|^q)^{1/q}‖_X`.
    SpaceConcavity { space: SpaceExpr, q: f64 },
    /// `‖(Σ|f_j|^p)^{1/p}‖_X / (Σ‖f_j‖_X^p)^{1/p}`.
    Convexity { space: SpaceExpr, p: f64 },
    /// `(Σ‖Tf_j‖^{q/p})^{p/q} / ‖(Σ|f_j|^{q/p})^{p/q}‖_{X^{1/p}+X}`; for
    /// `p = 1` the denominator is the norm of `X`.
    PowerConcavity { op: Operator, p: f64, q: f64 },
}

/// A family together with the ratio it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub family: Vec<FnVec>,
    pub reported_ratio: f64,
    pub kind: ConstantKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEstimate {
    /// Certified lower bound: the witness attains it.
    pub lower_bound: f64,
    pub witness: Witness,
    /// A classical closed form applies and the search matched it within 2%.
    pub exact: bool,
    pub closed_form: Option<f64>,
    pub trace: Vec<EscalationStep>,
}

/// `(Σ_j v_j^a)^{1/a}`.
pub(crate) fn power_sum(values: impl Iterator<Item = f64>, a: f64) -> f64 {
    values.map(|v| v.powf(a)).sum::<f64>().powf(1.0 / a)
}

/// Atomwise `(Σ_j |f_j|^a)^{1/a}`.
pub(crate) fn envelope(family: &[Vec<f64>], a: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| power_sum(family.iter().map(|f| f[i].abs()), a))
        .collect()
}

fn quotient(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn check_exponent(name: &'static str, v: f64) -> Result<()> {
    check_positive(name, v)?;
    if v.is_infinite() {
        return Err(Error::InvalidExponent {
            name,
            value: v,
            reason: "must be finite",
        });
    }
    Ok(())
}

impl Problem {
    pub fn kind(&self) -> ConstantKind {
        match self {
            Self::Concavity { .. } | Self::SpaceConcavity { .. } => ConstantKind::Concavity,
            Self::Convexity { .. } => ConstantKind::Convexity,
            Self::PowerConcavity { .. } => ConstantKind::PowerConcavity,
        }
    }

    pub fn domain(&self) -> &SpaceExpr {
        match self {
            Self::Concavity { op, .. } | Self::PowerConcavity { op, .. } => op.domain(),
            Self::SpaceConcavity { space, .. } | Self::Convexity { space, .. } => space,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Concavity { q, .. } | Self::SpaceConcavity { q, .. } => check_exponent("q", *q)?,
            Self::Convexity { p, .. } => check_exponent("p", *p)?,
            Self::PowerConcavity { op, p, q } => {
                check_exponent("p", *p)?;
                check_exponent("q", *q)?;
                let atoms = sigma_obstructions(op.domain());
                if !atoms.is_empty() {
                    return Err(Error::SigmaPropertyFails { atoms });
                }
            }
        }
        let x = self.domain();
        x.preflight(x.active_atoms())
    }

    /// Ratio of a family of canonical full-length vectors.
    pub(crate) fn ratio_raw(&self, family: &[Vec<f64>], budget: &Budget) -> f64 {
        let x = self.domain();
        let n = x.atoms();
        match self {
            Self::Concavity { op, q } => {
                let num = power_sum(family.iter().map(|f| op.codomain().norm_raw(&op.apply_raw(f))), *q);
                quotient(num, x.norm_raw(&envelope(family, *q, n), budget))
            }
            Self::SpaceConcavity { q, .. } => {
                let num = power_sum(family.iter().map(|f| x.norm_raw(f, budget)), *q);
                quotient(num, x.norm_raw(&envelope(family, *q, n), budget))
            }
            Self::Convexity { p, .. } => {
                let num = x.norm_raw(&envelope(family, *p, n), budget);
                quotient(num, power_sum(family.iter().map(|f| x.norm_raw(f, budget)), *p))
            }
            Self::PowerConcavity { op, p, q } => {
                let a = q / p;
                let num = power_sum(family.iter().map(|f| op.codomain().norm_raw(&op.apply_raw(f))), a);
                let g = envelope(family, a, n);
                let den = if *p == 1.0 {
                    x.norm_raw(&g, budget)
                } else {
                    // A loose inner search overestimates the infimum, which
                    // keeps the ratio a lower bound.
                    let root = crate::space::simplify(&SpaceExpr::power(x, 1.0 / p).expect("finite positive exponent"));
                    let mut inner = budget.clone();
                    inner.max_iters = inner.max_iters.min(INNER_SUM_ITERS);
                    crate::space::sum_search(&root, x, &g, &inner).value
                };
                quotient(num, den)
            }
        }
    }

    /// Recompute the ratio of an arbitrary family.
    pub fn ratio(&self, family: &[FnVec], budget: &Budget) -> Result<f64> {
        self.validate()?;
        let x = self.domain();
        let mut canon = Vec::with_capacity(family.len());
        for f in family {
            check_len(x.atoms(), f.len())?;
            canon.push(x.measure().canonical(f)?.into_inner());
        }
        Ok(self.ratio_raw(&canon, budget))
    }

    /// Classical value of the constant, where one is known.
    pub fn closed_form(&self) -> Option<f64> {
        match self {
            Self::Concavity { op, q } | Self::PowerConcavity { op, p: 1.0, q } => identity_concavity(op, *q),
            Self::SpaceConcavity { space, q } => match space.node() {
                Node::Lp { p, .. } => Some(leaf_gap(space, *q, *p)),
                _ => None,
            },
            Self::Convexity { space, p } => match space.node() {
                Node::Lp { p: s, .. } => Some(leaf_gap(space, *s, *p)),
                _ => None,
            },
            Self::PowerConcavity { .. } => None,
        }
    }
}

/// `s^{1/a - 1/b}` for `a < b` and 1 otherwise, with `s` the number of
/// active atoms: the norm of the formal identity `ℓᵇ_s → ℓᵃ_s`.
fn leaf_gap(x: &SpaceExpr, a: f64, b: f64) -> f64 {
    if a >= b {
        return 1.0;
    }
    let s = x.active_atoms().len() as f64;
    if s == 0.0 {
        return 0.0;
    }
    s.powf(1.0 / a - 1.0 / b)
}

/// The identity of `ℓᵖ_n` (unit weights, or `p = ∞`) into `ℓᵖ_n`.
fn identity_concavity(op: &Operator, q: f64) -> Option<f64> {
    let x = op.domain();
    let Node::Lp { p, .. } = x.node() else {
        return None;
    };
    let weights = x.leaf_weights()?;
    let unit = weights.iter().all(|w| *w == 1.0);
    if !op.is_identity() || op.codomain().exponent() != Some(*p) || !(unit || p.is_infinite()) {
        return None;
    }
    if x.active_atoms().len() != x.atoms() {
        return None;
    }
    Some(leaf_gap(x, q, *p))
}

/// Map sphere coordinates (`k` rows over `atoms`) to a family.
fn unpack(coords: &[f64], k: usize, atoms: &[usize], n: usize) -> Vec<Vec<f64>> {
    let s = atoms.len();
    (0..k)
        .map(|j| {
            let mut f = vec![0.0; n];
            for (c, &i) in atoms.iter().enumerate() {
                f[i] = coords[j * s + c];
            }
            f
        })
        .collect()
}

/// Search for a large ratio.
pub fn estimate(problem: &Problem, budget: &Budget) -> Result<ConstantEstimate> {
    problem.validate()?;
    let x = problem.domain();
    let n = x.atoms();
    let atoms: Vec<usize> = x.active_atoms().iter().collect();
    let s = atoms.len();
    let kind = problem.kind();
    if s == 0 {
        return Ok(ConstantEstimate {
            lower_bound: 0.0,
            witness: Witness {
                family: Vec::new(),
                reported_ratio: 0.0,
                kind,
            },
            exact: problem.closed_form() == Some(0.0),
            closed_form: problem.closed_form(),
            trace: Vec::new(),
        });
    }
    let opts = AscentOptions {
        max_iters: budget.max_iters,
        ..AscentOptions::default()
    };
    let cap = budget.parts_cap(s);
    let mut trace = Vec::new();
    let mut best: (f64, Vec<f64>, usize) = (f64::NEG_INFINITY, Vec::new(), 0);
    // Only the operator problems may search with loose inner infima: there
    // the domain norm sits alone in the denominator.
    let mut search_budget = budget.clone();
    if matches!(problem, Problem::Concavity { .. }) {
        search_budget.max_iters = search_budget.max_iters.min(INNER_SUM_ITERS);
    }
    for k in 1..=cap {
        let d = k * s;
        let obj = |c: &[f64]| problem.ratio_raw(&unpack(c, k, &atoms, n), &search_budget);
        let mut starts = structured_starts(k, s);
        if best.2 > 0 {
            let mut warm = vec![0.0; d];
            warm[..best.1.len()].copy_from_slice(&best.1);
            for (c, v) in warm[best.1.len()..].iter_mut().enumerate() {
                *v = 1e-3 * (1.0 + c as f64);
            }
            starts.push(warm);
        }
        let fixed = starts.len();
        let total = budget.restarts.max(fixed);
        let runs: Vec<(f64, Vec<f64>)> = (0..total)
            .into_par_iter()
            .map(|r| {
                let start = if r < fixed {
                    starts[r].clone()
                } else {
                    let mut rng = stream_rng(budget.seed, &[STREAM_RATIO, k as u64, r as u64]);
                    let mut g = gaussian_vec(&mut rng, d);
                    normalize(&mut g);
                    g
                };
                let (c, v) = sphere_ascent(&obj, start, opts);
                (v, c)
            })
            .collect();
        let (v, c) = argmax(runs).expect("at least one start");
        let prev = best.0;
        if v.is_infinite() || v > DIVERGENCE_THRESHOLD {
            let mut tr: Vec<f64> = trace.iter().map(|t: &EscalationStep| t.value).collect();
            tr.push(v);
            return Err(Error::Divergent { trace: tr });
        }
        if v > best.0 || best.2 == 0 {
            best = (v, c, k);
        }
        trace.push(EscalationStep {
            parts: k,
            value: best.0,
        });
        if k > 1 && (best.0 - prev) <= budget.stabilization_tol * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let family: Vec<Vec<f64>> = unpack(&best.1, best.2, &atoms, n);
    let reported = problem.ratio_raw(&family, budget);
    let closed_form = problem.closed_form();
    let exact = closed_form.is_some_and(|c| (reported - c).abs() <= 0.02 * c.max(f64::MIN_POSITIVE));
    Ok(ConstantEstimate {
        lower_bound: reported,
        witness: Witness {
            family: family.into_iter().map(FnVec::from).collect(),
            reported_ratio: reported,
            kind,
        },
        exact,
        closed_form,
        trace,
    })
}

/// Atom-separated, single-atom, flat and staggered families.
fn structured_starts(k: usize, s: usize) -> Vec<Vec<f64>> {
    let d = k * s;
    let mut out = Vec::new();
    for shift in 0..s {
        let mut separated = vec![0.0; d];
        for j in 0..k {
            separated[j * s + (j + shift) % s] = 1.0;
        }
        out.push(separated);
        if k > 1 {
            let mut single = vec![0.0; d];
            for j in 0..k {
                single[j * s + shift] = 1.0;
            }
            out.push(single);
        }
    }
    out.push(vec![1.0; d]);
    let mut staggered = vec![0.0; d];
    for j in 0..k {
        for c in 0..s {
            staggered[j * s + c] = if c == j % s { 1.0 } else { 0.1 } * if (j + c) % 2 == 0 { 1.0 } else { -1.0 };
        }
    }
    out.push(staggered);
    for v in out.iter_mut() {
        normalize(v);
    }
    out
}

/// q-concavity constant of `T: X → E`.
pub fn concavity_constant(t: &Operator, q: f64, budget: &Budget) -> Result<ConstantEstimate> {
    estimate(&Problem::Concavity { op: t.clone(), q }, budget)
}

/// q-concavity constant of the space `X` (of its identity map).
pub fn space_concavity_constant(x: &SpaceExpr, q: f64, budget: &Budget) -> Result<ConstantEstimate> {
    estimate(&Problem::SpaceConcavity { space: x.clone(), q }, budget)
}

/// p-convexity constant of `X`.
pub fn convexity_constant(x: &SpaceExpr, p: f64, budget: &Budget) -> Result<ConstantEstimate> {
    estimate(&Problem::Convexity { space: x.clone(), p }, budget)
}

/// (p,q)-power-concavity constant of `T: X → E`.
pub fn power_concavity_constant(t: &Operator, p: f64, q: f64, budget: &Budget) -> Result<ConstantEstimate> {
    estimate(&Problem::PowerConcavity { op: t.clone(), p, q }, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codomain::NormedCodomain;
    use crate::measure::MeasureSpace;
    use std::sync::Arc;

    fn unit(n: usize) -> Arc<MeasureSpace> {
        Arc::new(MeasureSpace::uniform(n).unwrap())
    }

    fn quick() -> Budget {
        Budget::default().with_restarts(8)
    }

    #[test]
    fn identity_examples() {
        let l2 = SpaceExpr::lp(unit(2), 2.0).unwrap();
        let t = Operator::identity(&l2, 2.0).unwrap();
        let e = concavity_constant(&t, 2.0, &quick()).unwrap();
        assert!((e.lower_bound - 1.0).abs() < 1e-6);
        assert!(e.exact);

        let linf = SpaceExpr::lp(unit(2), f64::INFINITY).unwrap();
        let t = Operator::identity(&linf, f64::INFINITY).unwrap();
        let e = concavity_constant(&t, 1.0, &quick()).unwrap();
        assert!((e.lower_bound - 2.0).abs() < 1e-6, "{}", e.lower_bound);
        assert_eq!(e.closed_form, Some(2.0));
    }

    #[test]
    fn zero_operator() {
        let l2 = SpaceExpr::lp(unit(2), 2.0).unwrap();
        let t = Operator::zero(&l2, NormedCodomain::ell(2.0, 3).unwrap()).unwrap();
        assert_eq!(concavity_constant(&t, 1.5, &quick()).unwrap().lower_bound, 0.0);
        assert_eq!(power_concavity_constant(&t, 2.0, 1.0, &quick()).unwrap().lower_bound, 0.0);
    }

    #[test]
    fn convexity_examples() {
        let l1 = SpaceExpr::lp(unit(2), 1.0).unwrap();
        let e = convexity_constant(&l1, 2.0, &quick()).unwrap();
        assert!((e.lower_bound - 2f64.sqrt()).abs() < 1e-6);
        assert!(e.exact);
        let l3 = SpaceExpr::lp(unit(3), 3.0).unwrap();
        let e = convexity_constant(&l3, 3.0, &quick()).unwrap();
        assert!((e.lower_bound - 1.0).abs() < 1e-6);
    }

    #[test]
    fn witnesses_replay() {
        let m = Arc::new(MeasureSpace::new(vec![1.0, 2.0, 0.5]).unwrap());
        let x = SpaceExpr::lp(m, 1.5).unwrap();
        let t = Operator::new(
            vec![vec![1.0, -2.0, 0.5], vec![0.3, 0.0, 1.0]],
            &x,
            NormedCodomain::ell(3.0, 2).unwrap(),
        )
        .unwrap();
        let problem = Problem::Concavity { op: t, q: 1.2 };
        let b = quick();
        let e = estimate(&problem, &b).unwrap();
        let r = problem.ratio(&e.witness.family, &b).unwrap();
        assert!((r - e.witness.reported_ratio).abs() <= 1e-9 * r.max(1.0));
    }

    #[test]
    fn power_concavity_at_p_one_is_concavity() {
        let x = SpaceExpr::lp(unit(2), 1.5).unwrap();
        let t = Operator::new(vec![vec![1.0, 2.0]], &x, NormedCodomain::ell(1.0, 1).unwrap()).unwrap();
        let a = concavity_constant(&t, 2.0, &quick()).unwrap();
        let b = power_concavity_constant(&t, 1.0, 2.0, &quick()).unwrap();
        assert!((a.lower_bound - b.lower_bound).abs() <= 1e-9);
    }

    #[test]
    fn power_concavity_needs_sigma() {
        let m = Arc::new(MeasureSpace::new(vec![1.0, f64::INFINITY]).unwrap());
        let x = SpaceExpr::lp(m, 1.0).unwrap();
        let t = Operator::identity(&x, 1.0).unwrap();
        assert!(matches!(
            power_concavity_constant(&t, 2.0, 1.0, &quick()),
            Err(Error::SigmaPropertyFails { .. })
        ));
        assert!(concavity_constant(&t, 0.0, &quick()).is_err());
    }
}
