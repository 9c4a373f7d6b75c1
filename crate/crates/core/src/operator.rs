use crate::codomain::NormedCodomain;
use crate::error::{check_finite_input, check_len, Error, Result};
use crate::space::SpaceExpr;

/// A linear map `T: X → E` given by an `m × n` matrix acting on the atom
/// values of (the canonical representative of) `f`.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: Vec<Vec<f64>>,
    domain: SpaceExpr,
    codomain: NormedCodomain,
}

impl Operator {
    pub fn new(matrix: Vec<Vec<f64>>, domain: &SpaceExpr, codomain: NormedCodomain) -> Result<Self> {
        check_len(codomain.dim(), matrix.len())?;
        for row in &matrix {
            check_len(domain.atoms(), row.len())?;
            check_finite_input(row)?;
            if row.iter().any(|v| v.is_infinite()) {
                return Err(Error::InvalidArgument("operator entries must be finite".into()));
            }
        }
        Ok(Self {
            matrix,
            domain: domain.clone(),
            codomain,
        })
    }

    /// Identity of `X` into `ℓˢ_n`.
    pub fn identity(domain: &SpaceExpr, s: f64) -> Result<Self> {
        let n = domain.atoms();
        let matrix = (0..n)
            .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(matrix, domain, NormedCodomain::ell(s, n)?)
    }

    /// Diagonal operator into `ℓˢ_n`.
    pub fn diagonal(domain: &SpaceExpr, diag: &[f64], s: f64) -> Result<Self> {
        let n = domain.atoms();
        check_len(n, diag.len())?;
        let matrix = (0..n)
            .map(|r| (0..n).map(|c| if r == c { diag[r] } else { 0.0 }).collect())
            .collect();
        Self::new(matrix, domain, NormedCodomain::ell(s, n)?)
    }

    pub fn zero(domain: &SpaceExpr, codomain: NormedCodomain) -> Result<Self> {
        let matrix = vec![vec![0.0; domain.atoms()]; codomain.dim()];
        Self::new(matrix, domain, codomain)
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn domain(&self) -> &SpaceExpr {
        &self.domain
    }

    pub fn codomain(&self) -> &NormedCodomain {
        &self.codomain
    }

    /// The same matrix on another domain over the same atoms.
    pub fn with_domain(&self, domain: &SpaceExpr) -> Result<Self> {
        Self::new(self.matrix.clone(), domain, self.codomain.clone())
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        let matrix = self
            .matrix
            .iter()
            .map(|row| row.iter().map(|v| alpha * v).collect())
            .collect();
        Self::new(matrix, &self.domain, self.codomain.clone())
    }

    /// `T(χ_{i})` as a raw column; null atoms are not zeroed here.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.matrix.iter().map(|row| row[i]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(|&v| v == 0.0)
    }

    /// `T f` on the a.e.-class of `f`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let f = self.domain.measure().canonical(f)?;
        Ok(self.apply_raw(&f))
    }

    /// Matrix product on an already canonical vector.
    pub(crate) fn apply_raw(&self, f: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(f).filter(|(_, x)| **x != 0.0).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// `‖T f‖_E`.
    pub fn image_norm(&self, f: &[f64]) -> Result<f64> {
        Ok(self.codomain.norm_raw(&self.apply(f)?))
    }

    /// True for the identity of `ℓᵖ` (unit weights, or `p = ∞`) into `ℓᵖ`
    /// of the same dimension.
    pub fn is_identity(&self) -> bool {
        let n = self.domain.atoms();
        self.matrix.len() == n
            && self
                .matrix
                .iter()
                .enumerate()
                .all(|(r, row)| row.iter().enumerate().all(|(c, &v)| v == if r == c { 1.0 } else { 0.0 }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpace;
    use std::sync::Arc;

    #[test]
    fn apply_respects_null_atoms() {
        let mu = Arc::new(MeasureSpace::new(vec![1.0, 0.0]).unwrap());
        let x = SpaceExpr::lp(mu, 2.0).unwrap();
        let t = Operator::new(vec![vec![1.0, 1.0]], &x, NormedCodomain::ell(2.0, 1).unwrap()).unwrap();
        assert_eq!(t.apply(&[3.0, 5.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn dimension_checks() {
        let mu = Arc::new(MeasureSpace::uniform(2).unwrap());
        let x = SpaceExpr::lp(mu, 2.0).unwrap();
        assert!(Operator::new(vec![vec![1.0]], &x, NormedCodomain::ell(2.0, 1).unwrap()).is_err());
        assert!(Operator::new(vec![vec![1.0, 0.0]], &x, NormedCodomain::ell(2.0, 2).unwrap()).is_err());
        let t = Operator::new(vec![vec![1.0, 1.0]], &x, NormedCodomain::ell(2.0, 1).unwrap()).unwrap();
        assert_eq!(t.apply(&[3.0, -4.0]).unwrap(), vec![-1.0]);
    }
}
