use super::{core_norm, sum, Node, SpaceExpr};
use crate::budget::Budget;
use crate::error::{check_len, Result};
use crate::measure::MSet;

/// `‖f‖_X` with the default search budget. Returns `∞` for functions outside
/// the space.
pub fn eval_norm(x: &SpaceExpr, f: &[f64]) -> Result<f64> {
    eval_norm_with(x, f, &Budget::default())
}

pub fn eval_norm_with(x: &SpaceExpr, f: &[f64], budget: &Budget) -> Result<f64> {
    check_len(x.atoms(), f.len())?;
    let f = x.measure().canonical(f)?;
    x.preflight(support(&f))?;
    Ok(x.norm_raw(&f, budget))
}

pub(crate) fn support(f: &[f64]) -> MSet {
    MSet::from_indices(f.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i))
}

/// Weighted `ℓᵖ` sum, scaled by the largest entry to avoid overflow.
/// Assumes `f` vanishes where the weight is `∞`, or reports `∞`.
pub(crate) fn lp_value(f: &[f64], p: f64, w: &[f64]) -> f64 {
    let big = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if big == 0.0 {
        return 0.0;
    }
    if p.is_infinite() || big.is_infinite() {
        return big;
    }
    let mut sum = 0.0;
    for (v, wi) in f.iter().zip(w) {
        if *v != 0.0 {
            let r = v.abs() / big;
            sum += if p == 1.0 { r * wi } else { r.powf(p) * wi };
        }
    }
    if p == 1.0 {
        big * sum
    } else {
        big * sum.powf(1.0 / p)
    }
}

impl SpaceExpr {
    /// Rejects inputs whose evaluation would exceed an enumeration cap.
    pub(crate) fn preflight(&self, support: MSet) -> Result<()> {
        match self.node() {
            Node::Lp { .. } => Ok(()),
            Node::Power { base, .. } | Node::Core { base, .. } => base.preflight(support),
            Node::Sum(a, b) | Node::Intersection(a, b) => {
                a.preflight(support)?;
                b.preflight(support)
            }
            Node::L1m(m) | Node::Lpm { measure: m, .. } => m.preflight(support),
        }
    }

    /// Norm of a canonical representative that passed [`Self::preflight`].
    pub(crate) fn norm_raw(&self, f: &[f64], budget: &Budget) -> f64 {
        if f.iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        if !self.contains(f) {
            return f64::INFINITY;
        }
        match self.node() {
            Node::Lp { p, .. } => lp_value(f, *p, self.leaf_weights().unwrap_or_default()),
            Node::Power { base, p } => {
                let g: Vec<f64> = f.iter().map(|v| v.abs().powf(*p)).collect();
                base.norm_raw(&g, budget).powf(1.0 / p)
            }
            Node::Sum(a, b) => sum::search(a, b, f, budget).value,
            Node::Intersection(a, b) => a.norm_raw(f, budget).max(b.norm_raw(f, budget)),
            Node::Core { base, q } => core_norm::search(base, *q, f, budget).value,
            Node::L1m(m) => m.l1_norm_raw(f),
            Node::Lpm { measure, p } => {
                let g: Vec<f64> = f.iter().map(|v| v.abs().powf(*p)).collect();
                measure.l1_norm_raw(&g).powf(1.0 / p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpace;
    use std::sync::Arc;

    fn unit2() -> Arc<MeasureSpace> {
        Arc::new(MeasureSpace::uniform(2).unwrap())
    }

    #[test]
    fn leaf_and_combinator_examples() {
        let m = unit2();
        let l2 = SpaceExpr::lp(m.clone(), 2.0).unwrap();
        let l1 = SpaceExpr::lp(m.clone(), 1.0).unwrap();
        let half = SpaceExpr::lp(m.clone(), 0.5).unwrap();
        assert_eq!(eval_norm(&l2, &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(eval_norm(&half, &[1.0, 1.0]).unwrap(), 4.0);
        let cap = SpaceExpr::intersection(&l1, &l2).unwrap();
        assert_eq!(eval_norm(&cap, &[3.0, 4.0]).unwrap(), 7.0);
        let pow = SpaceExpr::power(&l1, 2.0).unwrap();
        assert_eq!(eval_norm(&pow, &[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn null_atoms_are_ignored() {
        let m = Arc::new(MeasureSpace::new(vec![1.0, 0.0]).unwrap());
        let l1 = SpaceExpr::lp(m.clone(), 1.0).unwrap();
        assert_eq!(eval_norm(&l1, &[2.0, 100.0]).unwrap(), 2.0);
        assert_eq!(eval_norm(&l1, &[0.0, 100.0]).unwrap(), 0.0);
        let linf = SpaceExpr::lp(m, f64::INFINITY).unwrap();
        assert_eq!(eval_norm(&linf, &[2.0, 100.0]).unwrap(), 2.0);
    }

    #[test]
    fn infinite_weights_give_infinite_norms() {
        let m = Arc::new(MeasureSpace::new(vec![1.0, f64::INFINITY]).unwrap());
        let l1 = SpaceExpr::lp(m, 1.0).unwrap();
        assert_eq!(eval_norm(&l1, &[0.0, 1.0]).unwrap(), f64::INFINITY);
        assert_eq!(eval_norm(&l1, &[2.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn input_errors() {
        let l1 = SpaceExpr::lp(unit2(), 1.0).unwrap();
        assert!(eval_norm(&l1, &[1.0]).is_err());
        assert!(eval_norm(&l1, &[1.0, f64::NAN]).is_err());
    }
}
