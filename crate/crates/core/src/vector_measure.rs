//! Atomic vector measures, their variation and semivariation, and the
//! spaces `L¹(m)`, `Lᵖ(m)` of integrable functions.
//!
//! On a finite atomic space the supremum over simple functions `|φ| ≤ 1`
//! in the `L¹(m)` norm is attained at sign patterns, so
//! `‖f‖_m = max_ε ‖Σ ε_i f_i m({i})‖_E`. The pattern and its negation give
//! the same value, so only `2^{k-1}` patterns are visited.

use std::sync::Arc;

use crate::codomain::NormedCodomain;
use crate::error::{check_finite_input, check_len, Error, Result};
use crate::measure::{sigma_obstructions, MSet, MeasureSpace, RING_ENUMERATION_CAP};
use crate::operator::Operator;
use crate::space::SpaceExpr;

/// Largest number of contributing atoms for sign enumeration.
pub const SIGN_ENUMERATION_CAP: usize = 20;

#[derive(Debug)]
struct Inner {
    values: Vec<Vec<f64>>,
    defined: MSet,
    codomain: NormedCodomain,
}

/// An `E`-valued measure on the atoms `{i}` with `i ∈ defined`; the δ-ring
/// is the power set of the defined atoms.
#[derive(Debug, Clone)]
pub struct VectorMeasure {
    inner: Arc<Inner>,
}

/// A real measure on atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMeasure {
    pub values: Vec<f64>,
}

impl ScalarMeasure {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn value(&self, set: MSet) -> f64 {
        set.iter().map(|i| self.values[i]).sum()
    }

    /// `|λ|(A) = Σ_{i∈A} |λ({i})|`; the partition into atoms is the finest one.
    pub fn variation(&self, set: MSet) -> f64 {
        set.iter().map(|i| self.values[i].abs()).sum()
    }
}

pub fn variation(lambda: &ScalarMeasure, set: MSet) -> f64 {
    lambda.variation(set)
}

impl VectorMeasure {
    /// Measure with every atom in the δ-ring.
    pub fn new(values: Vec<Vec<f64>>, codomain: NormedCodomain) -> Result<Self> {
        let n = values.len();
        Self::with_defined(values, MSet::full(n), codomain)
    }

    /// Measure defined on the atoms of `defined` only. Values stored for
    /// other atoms are ignored and reset to zero.
    pub fn with_defined(mut values: Vec<Vec<f64>>, defined: MSet, codomain: NormedCodomain) -> Result<Self> {
        let n = values.len();
        if n == 0 || n > crate::measure::MAX_ATOMS {
            return Err(Error::InvalidArgument(format!("vector measure needs 1..=64 atoms, got {n}")));
        }
        if !defined.fits(n) {
            return Err(Error::InvalidArgument("defined atoms out of range".into()));
        }
        for (i, v) in values.iter_mut().enumerate() {
            check_len(codomain.dim(), v.len())?;
            check_finite_input(v)?;
            if v.iter().any(|x| x.is_infinite()) {
                return Err(Error::InvalidArgument(format!("atom {i} has an infinite value")));
            }
            if !defined.contains(i) {
                v.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        Ok(Self {
            inner: Arc::new(Inner {
                values,
                defined,
                codomain,
            }),
        })
    }

    /// `m_T(A) = T(χ_A)` on the atoms whose indicator lies in the domain of
    /// `T`, without checking the σ-property.
    pub fn induced_by(t: &Operator) -> Self {
        let domain = t.domain();
        let defined = domain.finite_mask();
        let n = domain.atoms();
        let values = (0..n)
            .map(|i| {
                if defined.contains(i) && !domain.measure().is_null_atom(i) {
                    t.column(i)
                } else {
                    vec![0.0; t.codomain().dim()]
                }
            })
            .collect();
        Self {
            inner: Arc::new(Inner {
                values,
                defined,
                codomain: t.codomain().clone(),
            }),
        }
    }

    pub fn atoms(&self) -> usize {
        self.inner.values.len()
    }

    /// Atoms `{i}` belonging to the δ-ring.
    pub fn defined(&self) -> MSet {
        self.inner.defined
    }

    pub fn codomain(&self) -> &NormedCodomain {
        &self.inner.codomain
    }

    pub fn atom_value(&self, i: usize) -> &[f64] {
        &self.inner.values[i]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.inner.values
    }

    /// All sets of the δ-ring.
    pub fn domain_ring(&self) -> Result<Vec<MSet>> {
        let d = self.defined();
        if d.len() > RING_ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                atoms: d.len(),
                cap: RING_ENUMERATION_CAP,
            });
        }
        Ok(d.subsets().collect())
    }

    /// `m(A)`; `A` must lie in the δ-ring.
    pub fn value(&self, set: MSet) -> Result<Vec<f64>> {
        if !set.is_subset(self.defined()) {
            return Err(Error::InvalidArgument(format!("{set:?} is not in the domain ring")));
        }
        let mut out = vec![0.0; self.codomain().dim()];
        for i in set.iter() {
            out.iter_mut().zip(&self.inner.values[i]).for_each(|(o, v)| *o += v);
        }
        Ok(out)
    }

    /// Control measure `η_i = ‖m‖({i}) = ‖m({i})‖_E`; atoms outside the
    /// δ-ring get `∞`.
    pub fn control_weights(&self) -> Vec<f64> {
        (0..self.atoms())
            .map(|i| {
                if self.defined().contains(i) {
                    self.codomain().norm_raw(&self.inner.values[i])
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }

    /// The scalar measure `x* ∘ m` for a coordinate functional vector `x*`.
    pub fn scalarize(&self, functional: &[f64]) -> Result<ScalarMeasure> {
        check_len(self.codomain().dim(), functional.len())?;
        Ok(ScalarMeasure::new(
            self.inner
                .values
                .iter()
                .map(|v| v.iter().zip(functional).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    fn is_zero_atom(&self, i: usize) -> bool {
        self.inner.values[i].iter().all(|&x| x == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        (0..self.atoms()).all(|i| self.is_zero_atom(i))
    }

    /// Atoms that are not `m`-null.
    pub fn nonnull_atoms(&self) -> MSet {
        MSet::from_indices((0..self.atoms()).filter(|&i| !self.is_zero_atom(i)))
    }

    /// `‖m‖(A) = max_ε ‖Σ_{i∈A} ε_i m({i})‖_E`.
    pub fn semivariation(&self, set: MSet) -> Result<f64> {
        if !set.fits(self.atoms()) {
            return Err(Error::InvalidArgument(format!("{set:?} out of range")));
        }
        if !set.is_subset(self.defined()) {
            return Err(Error::InvalidArgument(format!(
                "{set:?} leaves the local ring: atoms {:?} have no value",
                set.difference(self.defined())
            )));
        }
        let ones = vec![1.0; self.atoms()];
        let active = set.intersection(self.nonnull_atoms());
        self.check_cap(active)?;
        Ok(self.sign_max(&ones, active))
    }

    fn check_cap(&self, active: MSet) -> Result<()> {
        if active.len() > SIGN_ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                atoms: active.len(),
                cap: SIGN_ENUMERATION_CAP,
            });
        }
        Ok(())
    }

    /// Atoms where `f` and `m` both contribute.
    pub(crate) fn contributing(&self, f: &[f64]) -> MSet {
        MSet::from_indices((0..self.atoms()).filter(|&i| f[i] != 0.0 && !self.is_zero_atom(i)))
    }

    /// True when `f` vanishes off the δ-ring up to `m`-null atoms.
    pub fn supports(&self, f: &[f64]) -> bool {
        f.iter()
            .enumerate()
            .all(|(i, &v)| v == 0.0 || self.defined().contains(i))
    }

    /// Sign enumeration over `atoms`, Gray-code order.
    fn sign_max(&self, f: &[f64], atoms: MSet) -> f64 {
        let idx: Vec<usize> = atoms.iter().collect();
        let dim = self.codomain().dim();
        let mut acc = vec![0.0; dim];
        let Some((_, rest)) = idx.split_first() else {
            return 0.0;
        };
        for i in idx.iter() {
            acc.iter_mut().zip(&self.inner.values[*i]).for_each(|(a, v)| *a += f[*i] * v);
        }
        let mut best = self.codomain().norm_raw(&acc);
        // The first sign stays +1; a Gray code walks the remaining patterns.
        let mut signs = vec![1.0; rest.len()];
        let total: u64 = 1u64 << rest.len();
        for step in 1..total {
            let bit = step.trailing_zeros() as usize;
            let i = rest[bit];
            let delta = -2.0 * signs[bit] * f[i];
            signs[bit] = -signs[bit];
            acc.iter_mut().zip(&self.inner.values[i]).for_each(|(a, v)| *a += delta * v);
            let val = self.codomain().norm_raw(&acc);
            if val > best {
                best = val;
            }
        }
        best
    }

    /// `‖f‖_{L¹(m)}`; `∞` when `f` charges an atom outside the δ-ring.
    pub fn l1m_norm(&self, f: &[f64]) -> Result<f64> {
        check_len(self.atoms(), f.len())?;
        check_finite_input(f)?;
        if f.iter().any(|v| v.is_infinite()) {
            return Ok(f64::INFINITY);
        }
        if !self.supports(f) {
            return Ok(f64::INFINITY);
        }
        self.check_cap(self.contributing(f))?;
        Ok(self.l1_norm_raw(f))
    }

    /// Norm of a function supported on the δ-ring with at most
    /// [`SIGN_ENUMERATION_CAP`] contributing atoms.
    pub(crate) fn l1_norm_raw(&self, f: &[f64]) -> f64 {
        if !self.supports(f) {
            return f64::INFINITY;
        }
        self.sign_max(f, self.contributing(f))
    }

    /// Enumeration preflight for functions supported on `support`.
    pub(crate) fn preflight(&self, support: MSet) -> Result<()> {
        self.check_cap(support.intersection(self.nonnull_atoms()).intersection(self.defined()))?;
        if let NormedCodomain::Lattice(z) = self.codomain() {
            z.preflight(z.measure().omega())?;
        }
        Ok(())
    }

    /// `‖f‖_{L¹(m)}` for an `ℓ²` codomain through the dual ball: with
    /// `w_i = f_i m({i})`, `‖f‖_m² = max_ε εᵀGε` for the Gram matrix
    /// `G_{ij} = ⟨w_i, w_j⟩`. The quadratic form is updated incrementally
    /// along a Gray code.
    pub fn l1m_norm_dual_l2(&self, f: &[f64]) -> Result<f64> {
        check_len(self.atoms(), f.len())?;
        check_finite_input(f)?;
        if self.codomain().exponent() != Some(2.0) {
            return Err(Error::InvalidArgument("dual-ball formula needs an l^2 codomain".into()));
        }
        if !self.supports(f) {
            return Ok(f64::INFINITY);
        }
        let idx: Vec<usize> = self.contributing(f).iter().collect();
        self.check_cap(self.contributing(f))?;
        let k = idx.len();
        if k == 0 {
            return Ok(0.0);
        }
        let w: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| self.inner.values[i].iter().map(|v| f[i] * v).collect())
            .collect();
        let gram: Vec<Vec<f64>> = (0..k)
            .map(|a| (0..k).map(|b| w[a].iter().zip(&w[b]).map(|(x, y)| x * y).sum()).collect())
            .collect();
        let mut eps = vec![1.0; k];
        // (Gε)_a for the current pattern.
        let mut g_eps: Vec<f64> = (0..k).map(|a| gram[a].iter().sum()).collect();
        let mut q: f64 = g_eps.iter().sum();
        let mut best = q;
        for step in 1u64..(1u64 << (k - 1)) {
            let b = step.trailing_zeros() as usize + 1;
            // flipping ε_b: q' = q - 4 ε_b (Gε)_b + 4 G_bb
            q += -4.0 * eps[b] * g_eps[b] + 4.0 * gram[b][b];
            let old = eps[b];
            eps[b] = -old;
            for (a, ga) in g_eps.iter_mut().enumerate() {
                *ga -= 2.0 * old * gram[a][b];
            }
            best = best.max(q);
        }
        Ok(best.max(0.0).sqrt())
    }

    /// `‖f‖_{Lᵖ(m)} = ‖ |f|^p ‖_{L¹(m)}^{1/p}`.
    pub fn lpm_norm(&self, p: f64, f: &[f64]) -> Result<f64> {
        crate::error::check_positive("p", p)?;
        check_len(self.atoms(), f.len())?;
        check_finite_input(f)?;
        let g: Vec<f64> = f.iter().map(|v| v.abs().powf(p)).collect();
        Ok(self.l1m_norm(&g)?.powf(1.0 / p))
    }

    /// `∫_A f dm = Σ_{i∈A} f_i m({i})`.
    pub fn integrate(&self, f: &[f64], set: MSet) -> Result<Vec<f64>> {
        check_len(self.atoms(), f.len())?;
        check_finite_input(f)?;
        if !set.fits(self.atoms()) {
            return Err(Error::InvalidArgument(format!("{set:?} out of range")));
        }
        if !self.supports(f) || f.iter().any(|v| v.is_infinite()) {
            return Err(Error::NotInSpace);
        }
        Ok(self.integrate_raw(f, set))
    }

    pub(crate) fn integrate_raw(&self, f: &[f64], set: MSet) -> Vec<f64> {
        let mut out = vec![0.0; self.codomain().dim()];
        for i in set.iter() {
            if f[i] != 0.0 {
                out.iter_mut().zip(&self.inner.values[i]).for_each(|(o, v)| *o += f[i] * v);
            }
        }
        out
    }

    /// `m_g(A) = I_m(g χ_A)`, defined on every atom.
    pub fn derived_measure(&self, g: &[f64]) -> Result<VectorMeasure> {
        check_len(self.atoms(), g.len())?;
        check_finite_input(g)?;
        if !self.supports(g) || g.iter().any(|v| v.is_infinite()) {
            return Err(Error::NotInSpace);
        }
        let values = self
            .inner
            .values
            .iter()
            .zip(g)
            .map(|(v, gi)| v.iter().map(|x| gi * x).collect())
            .collect();
        VectorMeasure::new(values, self.codomain().clone())
    }

    /// First negative coordinate, if any, over the defined atoms.
    fn negative_entry(&self) -> Option<(usize, usize, f64)> {
        for i in self.defined().iter() {
            for (c, &x) in self.inner.values[i].iter().enumerate() {
                if x < 0.0 {
                    return Some((i, c, x));
                }
            }
        }
        None
    }

    pub fn is_positive(&self) -> bool {
        self.negative_entry().is_none()
    }

    /// Checks `‖f‖_m = ‖I_m(|f|)‖_E` for a positive measure, to `1e-9`
    /// relative.
    pub fn positive_norm_identity(&self, f: &[f64]) -> Result<bool> {
        if let Some((atom, component, value)) = self.negative_entry() {
            return Err(Error::NotPositive { atom, component, value });
        }
        let lhs = self.l1m_norm(f)?;
        let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        if lhs.is_infinite() {
            return Ok(!self.supports(&abs));
        }
        let rhs = self.codomain().norm_raw(&self.integrate(&abs, MSet::full(self.atoms()))?);
        Ok((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0))
    }
}

impl VectorMeasure {
    /// The integration operator `I_m` on `domain` (a space over the same atoms).
    pub fn integration_operator(&self, domain: &SpaceExpr) -> Result<Operator> {
        let dim = self.codomain().dim();
        let matrix = (0..dim)
            .map(|r| (0..self.atoms()).map(|i| self.inner.values[i][r]).collect())
            .collect();
        Operator::new(matrix, domain, self.codomain().clone())
    }

    /// Measure space carrying the control weights `η`.
    pub fn control_space(&self) -> Result<MeasureSpace> {
        MeasureSpace::new(self.control_weights())
    }

    /// `L¹(m)` over its control space.
    pub fn l1_space(&self) -> Result<SpaceExpr> {
        SpaceExpr::l1m(self.control_space()?, self)
    }

    /// `Lᵖ(m)` over its control space.
    pub fn lp_space(&self, p: f64) -> Result<SpaceExpr> {
        SpaceExpr::lpm(self.control_space()?, self, p)
    }
}

/// `m_T` for an operator whose domain has the σ-property.
pub fn measure_from_operator(t: &Operator) -> Result<VectorMeasure> {
    let atoms = sigma_obstructions(t.domain());
    if !atoms.is_empty() {
        return Err(Error::SigmaPropertyFails { atoms });
    }
    Ok(VectorMeasure::induced_by(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn l2(dim: usize) -> NormedCodomain {
        NormedCodomain::ell(2.0, dim).unwrap()
    }

    fn identity_measure() -> VectorMeasure {
        VectorMeasure::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], l2(2)).unwrap()
    }

    fn ones_measure() -> VectorMeasure {
        VectorMeasure::new(vec![vec![1.0], vec![1.0]], l2(1)).unwrap()
    }

    #[test]
    fn variation_examples() {
        let l = ScalarMeasure::new(vec![1.0, -1.0]);
        assert_eq!(variation(&l, MSet::full(2)), 2.0);
        assert_eq!(variation(&l, MSet::singleton(0)), 1.0);
        assert_eq!(variation(&l, MSet::EMPTY), 0.0);
    }

    #[test]
    fn semivariation_examples() {
        let m = identity_measure();
        assert!((m.semivariation(MSet::full(2)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ones_measure().semivariation(MSet::full(2)).unwrap(), 2.0);
        assert_eq!(m.semivariation(MSet::EMPTY).unwrap(), 0.0);
    }

    #[test]
    fn l1m_examples() {
        assert_eq!(identity_measure().l1m_norm(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(ones_measure().l1m_norm(&[3.0, 4.0]).unwrap(), 7.0);
        assert_eq!(ones_measure().l1m_norm(&[0.0, 0.0]).unwrap(), 0.0);
        let p = identity_measure().lpm_norm(2.0, &[3f64.sqrt(), 2.0]).unwrap();
        assert!((p - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(ones_measure().lpm_norm(1.0, &[3.0, -4.0]).unwrap(), 7.0);
    }

    #[test]
    fn dual_ball_agrees() {
        let m = VectorMeasure::new(vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.3, -2.0]], l2(2)).unwrap();
        let f = [0.7, -1.3, 2.0];
        let a = m.l1m_norm(&f).unwrap();
        let b = m.l1m_norm_dual_l2(&f).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn integration_and_derived_measures() {
        let m = identity_measure();
        assert_eq!(m.integrate(&[1.0, 1.0], MSet::full(2)).unwrap(), vec![1.0, 1.0]);
        assert_eq!(m.integrate(&[0.0, 0.0], MSet::full(2)).unwrap(), vec![0.0, 0.0]);
        let mg = m.derived_measure(&[2.0, 3.0]).unwrap();
        assert!((mg.l1m_norm(&[1.0, 1.0]).unwrap() - 13f64.sqrt()).abs() < 1e-15);
        assert!(m.derived_measure(&[0.0, 0.0]).unwrap().is_zero());
        let same = m.derived_measure(&[1.0, 1.0]).unwrap();
        assert_eq!(same.values(), m.values());
    }

    #[test]
    fn positive_identity() {
        let m = VectorMeasure::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], NormedCodomain::ell(1.0, 2).unwrap()).unwrap();
        assert!(m.positive_norm_identity(&[3.0, -4.0]).unwrap());
        assert!(m.positive_norm_identity(&[0.0, 0.0]).unwrap());
        let neg = VectorMeasure::new(vec![vec![1.0], vec![-1.0]], l2(1)).unwrap();
        assert!(matches!(neg.positive_norm_identity(&[1.0, 1.0]), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn induced_measures() {
        let mu = Arc::new(MeasureSpace::uniform(2).unwrap());
        let x = SpaceExpr::lp(mu, 2.0).unwrap();
        let t = Operator::identity(&x, 2.0).unwrap();
        let m = measure_from_operator(&t).unwrap();
        assert_eq!(m.values(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);

        let mu = Arc::new(MeasureSpace::new(vec![1.0, f64::INFINITY]).unwrap());
        let x = SpaceExpr::lp(mu, 1.0).unwrap();
        let t = Operator::new(vec![vec![1.0, 1.0]], &x, l2(1)).unwrap();
        assert_eq!(
            measure_from_operator(&t).unwrap_err(),
            Error::SigmaPropertyFails { atoms: vec![1] }
        );
        let partial = VectorMeasure::induced_by(&t);
        assert_eq!(partial.defined(), MSet::singleton(0));
        assert_eq!(partial.domain_ring().unwrap(), vec![MSet::EMPTY, MSet::singleton(0)]);
        assert_eq!(partial.l1m_norm(&[1.0, 1.0]).unwrap(), f64::INFINITY);
        assert_eq!(partial.control_weights(), vec![1.0, f64::INFINITY]);
    }
}
