use super::{Node, SpaceExpr};

/// Apply norm-preserving rewrites bottom-up:
///
/// * `(X^a)^b → X^{ab}`
/// * `(ℓˢ)^a → ℓ^{sa}` with the same weights
/// * `(Lᵖ(m))^a → L^{pa}(m)`
/// * `(qX)^p → (qp)(X^p)`
/// * `X^1 → X`
pub fn simplify(x: &SpaceExpr) -> SpaceExpr {
    match x.node() {
        Node::Lp { .. } | Node::L1m(_) | Node::Lpm { .. } => x.clone(),
        Node::Power { base, p } => rewrite_power(&simplify(base), *p),
        Node::Sum(a, b) => SpaceExpr::sum(&simplify(a), &simplify(b)).expect("shared measure"),
        Node::Intersection(a, b) => SpaceExpr::intersection(&simplify(a), &simplify(b)).expect("shared measure"),
        Node::Core { base, q } => SpaceExpr::core(&simplify(base), *q).expect("valid exponent"),
    }
}

fn rewrite_power(base: &SpaceExpr, p: f64) -> SpaceExpr {
    if p == 1.0 {
        return base.clone();
    }
    match base.node() {
        Node::Lp { p: s, weights } => SpaceExpr::lp_leaf(base.measure_arc().clone(), s * p, weights.clone())
            .expect("positive exponent"),
        Node::Power { base: inner, p: a } => rewrite_power(inner, a * p),
        Node::Lpm { measure, p: s } => SpaceExpr::lpm(base.measure_arc().clone(), measure, s * p).expect("positive exponent"),
        Node::L1m(m) => SpaceExpr::lpm(base.measure_arc().clone(), m, p).expect("positive exponent"),
        Node::Core { base: inner, q } => {
            let powered = SpaceExpr::power(inner, p).expect("positive exponent");
            SpaceExpr::core(&powered, q * p).expect("positive exponent")
        }
        _ => SpaceExpr::power(base, p).expect("positive exponent"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpace;
    use std::sync::Arc;

    #[test]
    fn examples() {
        let m = Arc::new(MeasureSpace::uniform(2).unwrap());
        let l1 = SpaceExpr::lp(m.clone(), 1.0).unwrap();
        let s = simplify(&SpaceExpr::power(&l1, 2.0).unwrap());
        assert!(matches!(s.node(), Node::Lp { p, weights: None } if *p == 2.0));

        let linf = SpaceExpr::lp(m.clone(), f64::INFINITY).unwrap();
        let x = SpaceExpr::power(&SpaceExpr::core(&linf, 2.0).unwrap(), 2.0).unwrap();
        let s = simplify(&x);
        match s.node() {
            Node::Core { base, q } => {
                assert_eq!(*q, 4.0);
                assert!(matches!(base.node(), Node::Power { p, .. } if *p == 2.0));
            }
            other => panic!("unexpected {other:?}"),
        }

        let sum = SpaceExpr::sum(&l1, &linf).unwrap();
        let s = simplify(&SpaceExpr::power(&sum, 1.0).unwrap());
        assert!(matches!(s.node(), Node::Sum(..)));
    }

    #[test]
    fn nested_powers_collapse() {
        let m = Arc::new(MeasureSpace::new(vec![1.0, 2.0]).unwrap());
        let l3 = SpaceExpr::lp(m, 3.0).unwrap();
        let x = SpaceExpr::power(&SpaceExpr::power(&l3, 0.5).unwrap(), 4.0).unwrap();
        let s = simplify(&x);
        assert!(matches!(s.node(), Node::Lp { p, .. } if (*p - 6.0).abs() < 1e-15));
        let f = [0.3, -1.7];
        assert!((s.norm(&f).unwrap() - x.norm(&f).unwrap()).abs() < 1e-12);
    }
}
