//! Expression algebra of lattice quasi-norms over a finite measure space.
//!
//! A [`SpaceExpr`] is an immutable tree whose leaves are weighted `ℓᵖ`
//! spaces and vector-measure spaces `L¹(m)`, `Lᵖ(m)`, combined through
//! p-powers, sums, intersections and q-concave cores. Every node caches a
//! bound `K` on its quasi-triangle modulus together with the exponent `r`
//! satisfying `K = 2^{1/r - 1}`.

mod core_norm;
mod eval;
mod profile;
mod simplify;
mod sum;

use std::fmt;
use std::sync::Arc;

use crate::error::{check_positive, Error, Result};
use crate::measure::{MSet, MeasureSpace};
use crate::vector_measure::VectorMeasure;

pub use core_norm::{core_norm, CoreNorm, Decomposition, EscalationStep};
pub use eval::{eval_norm, eval_norm_with};
pub use profile::{quasinorm_profile, quasinorm_profile_with, Counterexample, ProfileOptions, QuasinormProfile};
pub use simplify::simplify;
pub use sum::{sum_norm, SumNorm};
pub(crate) use sum::search as sum_search;

/// Node kinds of a space expression.
#[derive(Debug, Clone)]
pub enum Node {
    /// Weighted `ℓᵖ`, `p ∈ (0, ∞]`. Without an override the atom weights of
    /// the measure space are used.
    Lp { p: f64, weights: Option<Vec<f64>> },
    /// `X^p`, normed by `‖ |f|^p ‖_X^{1/p}`.
    Power { base: SpaceExpr, p: f64 },
    Sum(SpaceExpr, SpaceExpr),
    Intersection(SpaceExpr, SpaceExpr),
    /// The q-concave core `qX`.
    Core { base: SpaceExpr, q: f64 },
    L1m(VectorMeasure),
    Lpm { measure: VectorMeasure, p: f64 },
}

/// Cached structural facts about a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeInfo {
    /// Triangle inequality holds with constant 1.
    pub normed: bool,
    /// Quasi-triangle modulus bound, `K ≥ 1`.
    pub k: f64,
    /// `r ∈ (0, 1]` with `K = 2^{1/r - 1}`.
    pub r: f64,
}

impl NodeInfo {
    fn from_k(k: f64) -> Self {
        let k = k.max(1.0);
        Self {
            normed: k == 1.0,
            k,
            r: 1.0 / (1.0 + k.log2()),
        }
    }

    fn normed() -> Self {
        Self::from_k(1.0)
    }
}

#[derive(Debug)]
struct Inner {
    measure: Arc<MeasureSpace>,
    node: Node,
    info: NodeInfo,
    finite: MSet,
}

/// An immutable, cheaply clonable space expression.
#[derive(Clone)]
pub struct SpaceExpr {
    inner: Arc<Inner>,
}

impl fmt::Debug for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fmt_exp(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Lp { p, weights: None } => write!(f, "l^{}", fmt_exp(*p)),
            Node::Lp { p, weights: Some(w) } => write!(f, "l^{}{:?}", fmt_exp(*p), w),
            Node::Power { base, p } => write!(f, "({base})^{p}"),
            Node::Sum(a, b) => write!(f, "({a} + {b})"),
            Node::Intersection(a, b) => write!(f, "({a} ∩ {b})"),
            Node::Core { base, q } => write!(f, "{q}·core({base})"),
            Node::L1m(_) => write!(f, "L1(m)"),
            Node::Lpm { p, .. } => write!(f, "L^{p}(m)"),
        }
    }
}

/// `max(1, 2^{t-1})`, the constant in `(a+b)^t ≤ α_t (a^t + b^t)`.
pub(crate) fn alpha(t: f64) -> f64 {
    1f64.max(2f64.powf(t - 1.0))
}

/// Modulus factor of the q-concave core, `2^{1 + |1 - 1/q|}`.
pub fn core_modulus_factor(q: f64) -> f64 {
    2f64.powf(1.0 + (1.0 - 1.0 / q).abs())
}

fn lp_info(p: f64) -> NodeInfo {
    if p >= 1.0 {
        NodeInfo::normed()
    } else {
        NodeInfo::from_k(2f64.powf(1.0 / p - 1.0))
    }
}

fn power_info(base: NodeInfo, p: f64) -> NodeInfo {
    if base.normed && p >= 1.0 {
        return NodeInfo::normed();
    }
    let k = (alpha(p) * base.k).powf(1.0 / p) * 1f64.max(2f64.powf(1.0 / p - 1.0));
    NodeInfo::from_k(k)
}

impl SpaceExpr {
    fn build(measure: Arc<MeasureSpace>, node: Node, info: NodeInfo, finite: MSet) -> Self {
        Self {
            inner: Arc::new(Inner {
                measure,
                node,
                info,
                finite,
            }),
        }
    }

    /// Unweighted-override `ℓᵖ(μ)`, `p ∈ (0, ∞]`.
    pub fn lp(measure: impl Into<Arc<MeasureSpace>>, p: f64) -> Result<Self> {
        Self::lp_leaf(measure.into(), p, None)
    }

    /// `ℓᵖ` with explicit atom weights in place of μ's.
    ///
    /// Override weights must be positive on atoms of positive μ-weight, so
    /// the result still vanishes exactly on a.e.-zero functions.
    pub fn lp_weighted(measure: impl Into<Arc<MeasureSpace>>, p: f64, weights: Vec<f64>) -> Result<Self> {
        Self::lp_leaf(measure.into(), p, Some(weights))
    }

    fn lp_leaf(measure: Arc<MeasureSpace>, p: f64, weights: Option<Vec<f64>>) -> Result<Self> {
        check_positive("p", p)?;
        if let Some(w) = &weights {
            crate::error::check_len(measure.len(), w.len())?;
            for (i, &wi) in w.iter().enumerate() {
                if wi.is_nan() || wi < 0.0 || (wi == 0.0 && !measure.is_null_atom(i)) {
                    return Err(Error::InvalidMeasure(format!(
                        "override weight {wi} of atom {i} must be positive on non-null atoms"
                    )));
                }
            }
        }
        let finite = if p.is_infinite() {
            measure.omega()
        } else {
            let w = weights.as_deref().unwrap_or(measure.weights());
            MSet::from_indices(
                (0..measure.len()).filter(|&i| measure.is_null_atom(i) || w[i].is_finite()),
            )
        };
        Ok(Self::build(measure, Node::Lp { p, weights }, lp_info(p), finite))
    }

    /// The p-power `X^p`, `p ∈ (0, ∞)`.
    pub fn power(base: &SpaceExpr, p: f64) -> Result<Self> {
        check_positive("p", p)?;
        if p.is_infinite() {
            return Err(Error::InvalidExponent {
                name: "p",
                value: p,
                reason: "powers are defined for finite exponents only",
            });
        }
        let info = match base.node() {
            Node::Lp { p: s, .. } => lp_info(s * p),
            _ => power_info(base.info(), p),
        };
        Ok(Self::build(
            base.inner.measure.clone(),
            Node::Power { base: base.clone(), p },
            info,
            base.finite_mask(),
        ))
    }

    pub fn sum(left: &SpaceExpr, right: &SpaceExpr) -> Result<Self> {
        Self::same_measure(left, right)?;
        let info = NodeInfo::from_k(left.info().k.max(right.info().k));
        Ok(Self::build(
            left.inner.measure.clone(),
            Node::Sum(left.clone(), right.clone()),
            info,
            left.finite_mask().union(right.finite_mask()),
        ))
    }

    pub fn intersection(left: &SpaceExpr, right: &SpaceExpr) -> Result<Self> {
        Self::same_measure(left, right)?;
        let info = NodeInfo::from_k(left.info().k.max(right.info().k));
        Ok(Self::build(
            left.inner.measure.clone(),
            Node::Intersection(left.clone(), right.clone()),
            info,
            left.finite_mask().intersection(right.finite_mask()),
        ))
    }

    /// The q-concave core `qX`, `q ∈ (0, ∞)`.
    pub fn core(base: &SpaceExpr, q: f64) -> Result<Self> {
        check_positive("q", q)?;
        if q.is_infinite() {
            return Err(Error::InvalidExponent {
                name: "q",
                value: q,
                reason: "the concave core needs a finite exponent",
            });
        }
        let info = NodeInfo::from_k(core_modulus_factor(q) * base.info().k);
        Ok(Self::build(
            base.inner.measure.clone(),
            Node::Core { base: base.clone(), q },
            info,
            base.finite_mask(),
        ))
    }

    /// `L¹(m)` of a vector measure on the atoms of `measure`.
    pub fn l1m(measure: impl Into<Arc<MeasureSpace>>, m: &VectorMeasure) -> Result<Self> {
        let measure = measure.into();
        crate::error::check_len(measure.len(), m.atoms())?;
        let finite = m.defined().union(MSet::full(measure.len()).difference(measure.support()));
        Ok(Self::build(measure, Node::L1m(m.clone()), NodeInfo::normed(), finite))
    }

    /// `Lᵖ(m)`, the p-power of `L¹(m)`.
    pub fn lpm(measure: impl Into<Arc<MeasureSpace>>, m: &VectorMeasure, p: f64) -> Result<Self> {
        check_positive("p", p)?;
        if p.is_infinite() {
            return Err(Error::InvalidExponent {
                name: "p",
                value: p,
                reason: "L^p(m) needs a finite exponent",
            });
        }
        let measure = measure.into();
        crate::error::check_len(measure.len(), m.atoms())?;
        let finite = m.defined().union(MSet::full(measure.len()).difference(measure.support()));
        Ok(Self::build(
            measure,
            Node::Lpm { measure: m.clone(), p },
            power_info(NodeInfo::normed(), p),
            finite,
        ))
    }

    fn same_measure(a: &SpaceExpr, b: &SpaceExpr) -> Result<()> {
        if Arc::ptr_eq(&a.inner.measure, &b.inner.measure) || a.inner.measure == b.inner.measure {
            Ok(())
        } else {
            Err(Error::MeasureMismatch)
        }
    }

    pub fn node(&self) -> &Node {
        &self.inner.node
    }

    pub fn info(&self) -> NodeInfo {
        self.inner.info
    }

    pub fn is_normed(&self) -> bool {
        self.inner.info.normed
    }

    /// Declared quasi-triangle modulus bound `K`.
    pub fn modulus(&self) -> f64 {
        self.inner.info.k
    }

    /// Exponent `r` with `K = 2^{1/r - 1}`.
    pub fn r(&self) -> f64 {
        self.inner.info.r
    }

    pub fn measure(&self) -> &MeasureSpace {
        &self.inner.measure
    }

    pub fn measure_arc(&self) -> &Arc<MeasureSpace> {
        &self.inner.measure
    }

    pub fn atoms(&self) -> usize {
        self.inner.measure.len()
    }

    /// Atoms whose indicator has finite norm.
    pub fn finite_mask(&self) -> MSet {
        self.inner.finite
    }

    /// Non-null atoms with finite indicator norm: the atoms a function of
    /// the space can actually use.
    pub fn active_atoms(&self) -> MSet {
        self.measure().support().intersection(self.finite_mask())
    }

    /// Membership test for a canonical representative.
    pub fn contains(&self, f: &[f64]) -> bool {
        f.iter()
            .enumerate()
            .all(|(i, &v)| v == 0.0 || self.measure().is_null_atom(i) || self.finite_mask().contains(i))
    }

    /// Evaluate `‖f‖` with the default search budget.
    pub fn norm(&self, f: &[f64]) -> Result<f64> {
        eval_norm(self, f)
    }

    pub fn norm_with(&self, f: &[f64], budget: &crate::Budget) -> Result<f64> {
        eval_norm_with(self, f, budget)
    }

    /// True when the tree contains a node whose norm is computed by search.
    pub fn is_searched(&self) -> bool {
        match self.node() {
            Node::Lp { .. } | Node::L1m(_) | Node::Lpm { .. } => false,
            Node::Sum(..) | Node::Core { .. } => true,
            Node::Power { base, .. } => base.is_searched(),
            Node::Intersection(a, b) => a.is_searched() || b.is_searched(),
        }
    }

    /// Vector measures referenced anywhere in the tree.
    /// Effective weights of an `ℓᵖ` leaf.
    pub(crate) fn leaf_weights(&self) -> Option<&[f64]> {
        match self.node() {
            Node::Lp { weights, .. } => Some(weights.as_deref().unwrap_or(self.measure().weights())),
            _ => None,
        }
    }
}
