//! Finite atomic measure spaces, a.e.-classes of functions and measurable sets.
//!
//! The ground set is `{0, .., n-1}` with the full power set as σ-algebra.
//! Atom weights live in `[0, ∞]`; an atom of weight zero is null and every
//! function is identified with its canonical representative that vanishes
//! on null atoms.

use std::fmt;
use std::ops::{Deref, DerefMut};

use crate::error::{check_finite_input, check_len, Error, Result};
use crate::space::SpaceExpr;

/// Largest atom count representable by [`MSet`].
pub const MAX_ATOMS: usize = 64;

/// Largest atom count for which [`delta_ring`] materializes the ring.
pub const RING_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("at least one atom is required".into()));
        }
        if weights.len() > MAX_ATOMS {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms exceed the supported maximum of {MAX_ATOMS}",
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "weight {} of atom {i} is not in [0, inf]",
                weights[i]
            )));
        }
        Ok(Self { weights })
    }

    /// `n` atoms of unit weight.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn is_null_atom(&self, atom: usize) -> bool {
        self.weights[atom] == 0.0
    }

    /// All atoms, as a set.
    pub fn omega(&self) -> MSet {
        MSet::full(self.len())
    }

    /// Atoms of positive weight.
    pub fn support(&self) -> MSet {
        MSet::from_indices((0..self.len()).filter(|&i| !self.is_null_atom(i)))
    }

    /// μ(A), with `0·∞ = 0` never arising since weights are summed directly.
    pub fn measure(&self, set: MSet) -> f64 {
        set.iter().map(|i| self.weights[i]).sum()
    }

    /// Canonical representative of the a.e.-class of `f`: zero on null atoms.
    pub fn canonical(&self, f: &[f64]) -> Result<FnVec> {
        check_len(self.len(), f.len())?;
        check_finite_input(f)?;
        Ok(FnVec(
            f.iter()
                .zip(&self.weights)
                .map(|(&v, &w)| if w == 0.0 { 0.0 } else { v })
                .collect(),
        ))
    }

    /// Indicator function of `set`.
    pub fn indicator(&self, set: MSet) -> FnVec {
        FnVec((0..self.len()).map(|i| if set.contains(i) { 1.0 } else { 0.0 }).collect())
    }

    /// True when `f` vanishes off null atoms.
    pub fn is_ae_zero(&self, f: &[f64]) -> bool {
        f.iter()
            .zip(&self.weights)
            .all(|(&v, &w)| w == 0.0 || v == 0.0)
    }
}

/// A real function on the atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FnVec(pub Vec<f64>);

impl FnVec {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn abs(&self) -> Self {
        Self(self.0.iter().map(|v| v.abs()).collect())
    }

    /// `|f|^p` atomwise.
    pub fn abs_pow(&self, p: f64) -> Self {
        Self(self.0.iter().map(|v| v.abs().powf(p)).collect())
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self(self.0.iter().map(|v| alpha * v).collect())
    }

    pub fn sup(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.max(*b)).collect())
    }

    pub fn inf(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.min(*b)).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FnVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for FnVec {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for FnVec {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<&[f64]> for FnVec {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}

/// A subset of the atoms, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MSet(pub u64);

impl MSet {
    pub const EMPTY: MSet = MSet(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            MSet(u64::MAX)
        } else {
            MSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        MSet(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        MSet(indices.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: Self) -> Self {
        MSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        MSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        MSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    /// All subsets of `self`, in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = MSet> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(MSet(cur))
        })
    }

    pub fn fits(self, n: usize) -> bool {
        self.is_subset(MSet::full(n))
    }
}

impl fmt::Debug for MSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// True iff every atom of `set` has weight zero.
pub fn is_null(space: &MeasureSpace, set: MSet) -> Result<bool> {
    if !set.fits(space.len()) {
        return Err(Error::InvalidArgument(format!(
            "set {set:?} is outside the atom range 0..{}",
            space.len()
        )));
    }
    Ok(set.iter().all(|i| space.is_null_atom(i)))
}

/// Equality of a.e.-classes: agreement on every atom of positive weight.
pub fn ae_equal(space: &MeasureSpace, f: &[f64], g: &[f64]) -> Result<bool> {
    check_len(space.len(), f.len())?;
    check_len(space.len(), g.len())?;
    Ok((0..space.len()).all(|i| space.is_null_atom(i) || f[i] == g[i]))
}

/// Atoms whose indicator has finite `x`-norm.
pub fn finite_atoms(x: &SpaceExpr) -> MSet {
    x.finite_mask()
}

/// The δ-ring `{A : ‖χ_A‖_X < ∞}`.
///
/// By the ideal property and the quasi-triangle inequality, `χ_A` has finite
/// norm iff every atom of `A` does, so the ring is the power set of
/// [`finite_atoms`]. Materialization is refused above
/// [`RING_ENUMERATION_CAP`] finite atoms.
pub fn delta_ring(x: &SpaceExpr) -> Result<Vec<MSet>> {
    let finite = finite_atoms(x);
    if finite.len() > RING_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            atoms: finite.len(),
            cap: RING_ENUMERATION_CAP,
        });
    }
    Ok(finite.subsets().collect())
}

/// Every atom of positive weight has an indicator of finite norm.
pub fn sigma_property(x: &SpaceExpr) -> bool {
    x.measure().support().is_subset(finite_atoms(x))
}

/// Non-null atoms whose indicator has infinite norm.
pub fn sigma_obstructions(x: &SpaceExpr) -> Vec<usize> {
    x.measure()
        .support()
        .difference(finite_atoms(x))
        .iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(w: &[f64]) -> MeasureSpace {
        MeasureSpace::new(w.to_vec()).unwrap()
    }

    #[test]
    fn null_sets() {
        let s = space(&[1.0, 0.0]);
        assert!(is_null(&s, MSet::from_indices([1])).unwrap());
        assert!(!is_null(&s, MSet::from_indices([0, 1])).unwrap());
        assert!(is_null(&space(&[1.0, 1.0]), MSet::EMPTY).unwrap());
        assert!(is_null(&s, MSet::from_indices([5])).is_err());
    }

    #[test]
    fn ae_equality() {
        assert!(ae_equal(&space(&[1.0, 0.0]), &[2.0, 5.0], &[2.0, 7.0]).unwrap());
        assert!(!ae_equal(&space(&[1.0, 1.0]), &[2.0, 5.0], &[2.0, 7.0]).unwrap());
        assert!(ae_equal(&space(&[3.0, f64::INFINITY]), &[1.5, -2.0], &[1.5, -2.0]).unwrap());
        assert!(matches!(
            ae_equal(&space(&[1.0]), &[1.0, 2.0], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(MeasureSpace::new(vec![]).is_err());
        assert!(MeasureSpace::new(vec![1.0, -1.0]).is_err());
        assert!(MeasureSpace::new(vec![f64::NAN]).is_err());
        assert!(MeasureSpace::new(vec![f64::INFINITY, 0.0]).is_ok());
    }

    #[test]
    fn canonical_zeroes_null_atoms() {
        let s = space(&[1.0, 0.0, 2.0]);
        assert_eq!(s.canonical(&[1.0, 9.0, -3.0]).unwrap().0, vec![1.0, 0.0, -3.0]);
        assert!(s.canonical(&[1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn subset_enumeration() {
        let subsets: Vec<_> = MSet::from_indices([0, 2]).subsets().collect();
        assert_eq!(
            subsets,
            vec![MSet(0), MSet(1), MSet(4), MSet(5)]
        );
        assert_eq!(MSet::EMPTY.subsets().count(), 1);
        assert_eq!(MSet::full(5).subsets().count(), 32);
    }

    #[test]
    fn null_union_iff_both_null() {
        let s = space(&[0.0, 1.0, 0.0, 2.0]);
        for a in MSet::full(4).subsets() {
            for b in MSet::full(4).subsets() {
                let lhs = is_null(&s, a.union(b)).unwrap();
                let rhs = is_null(&s, a).unwrap() && is_null(&s, b).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
}
