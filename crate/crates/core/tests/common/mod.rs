//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use latticelab::{MeasureSpace, NormedCodomain, Operator, SpaceExpr, VectorMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive finite weights in `[0.25, 3]`.
pub fn measure(rng: &mut impl Rng, n: usize) -> Arc<MeasureSpace> {
    let w = (0..n).map(|_| rng.random_range(0.25..3.0)).collect();
    Arc::new(MeasureSpace::new(w).unwrap())
}

/// Like [`measure`], with an occasional null or infinite atom.
pub fn degenerate_measure(rng: &mut impl Rng, n: usize) -> Arc<MeasureSpace> {
    let w = (0..n)
        .map(|_| match rng.random_range(0..8) {
            0 => 0.0,
            1 => f64::INFINITY,
            _ => rng.random_range(0.25..3.0),
        })
        .collect();
    Arc::new(MeasureSpace::new(w).unwrap())
}

pub fn exponent(rng: &mut impl Rng) -> f64 {
    [0.5, 1.0, 1.5, 2.0, 3.0, f64::INFINITY][rng.random_range(0..6)]
}

pub fn leaf(rng: &mut impl Rng, m: &Arc<MeasureSpace>) -> SpaceExpr {
    let p = exponent(rng);
    if rng.random_bool(0.25) {
        let w = (0..m.len()).map(|_| rng.random_range(0.5..2.0)).collect();
        SpaceExpr::lp_weighted(m.clone(), p, w).unwrap()
    } else {
        SpaceExpr::lp(m.clone(), p).unwrap()
    }
}

/// A vector measure with Gaussian values in `ℓ^s`.
pub fn vector_measure(rng: &mut impl Rng, n: usize, dim: usize, s: f64) -> VectorMeasure {
    let values = (0..n)
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect())
        .collect();
    VectorMeasure::new(values, NormedCodomain::ell(s, dim).unwrap()).unwrap()
}

/// A random expression of the given depth over `m`. Searched nodes are
/// confined to the top level so that evaluation stays cheap.
pub fn space(rng: &mut impl Rng, m: &Arc<MeasureSpace>, depth: usize) -> SpaceExpr {
    if depth == 0 {
        return match rng.random_range(0..8) {
            0 => SpaceExpr::l1m(m.clone(), &vector_measure(rng, m.len(), 2, 2.0)).unwrap(),
            _ => leaf(rng, m),
        };
    }
    match rng.random_range(0..5) {
        0 => SpaceExpr::power(&space(rng, m, depth - 1), [0.5, 2.0, 3.0][rng.random_range(0..3)]).unwrap(),
        1 => SpaceExpr::intersection(&space(rng, m, depth - 1), &space(rng, m, depth - 1)).unwrap(),
        2 => SpaceExpr::sum(&leaf(rng, m), &leaf(rng, m)).unwrap(),
        3 => SpaceExpr::core(&leaf(rng, m), [1.0, 2.0, 3.0][rng.random_range(0..3)]).unwrap(),
        _ => leaf(rng, m),
    }
}

pub fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

/// A Gaussian function vanishing off `x.active_atoms()`.
pub fn sample_in(rng: &mut impl Rng, x: &SpaceExpr) -> Vec<f64> {
    let active = x.active_atoms();
    (0..x.atoms())
        .map(|i| {
            if active.contains(i) {
                rng.sample::<f64, _>(rand_distr::StandardNormal)
            } else {
                0.0
            }
        })
        .collect()
}

pub fn matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| gaussian(rng, cols)).collect()
}

pub fn operator(rng: &mut impl Rng, x: &SpaceExpr, rows: usize, s: f64) -> Operator {
    Operator::new(matrix(rng, rows, x.atoms()), x, NormedCodomain::ell(s, rows).unwrap()).unwrap()
}
