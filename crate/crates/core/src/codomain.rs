use std::fmt;

use crate::budget::Budget;
use crate::error::{check_len, Error, Result};
use crate::space::SpaceExpr;

/// Finite-dimensional normed target space of operators and vector measures.
#[derive(Clone)]
pub enum NormedCodomain {
    /// `ℓˢ_m`, `s ∈ [1, ∞]`.
    Ell { s: f64, dim: usize },
    /// A normed lattice built from a space expression; vectors are functions
    /// on that expression's atoms.
    Lattice(SpaceExpr),
}

impl fmt::Debug for NormedCodomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ell { s, dim } => write!(f, "l^{s}_{dim}"),
            Self::Lattice(x) => write!(f, "lattice {x}"),
        }
    }
}

impl NormedCodomain {
    pub fn ell(s: f64, dim: usize) -> Result<Self> {
        if s.is_nan() || s < 1.0 {
            return Err(Error::InvalidExponent {
                name: "s",
                value: s,
                reason: "codomain exponent must be at least 1",
            });
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("codomain dimension must be positive".into()));
        }
        Ok(Self::Ell { s, dim })
    }

    /// A normed space expression used as codomain. Its norm must be
    /// computable without search errors for every vector.
    pub fn lattice(space: SpaceExpr) -> Result<Self> {
        if !space.is_normed() {
            return Err(Error::InvalidArgument(format!("codomain {space} is not normed")));
        }
        space.preflight(space.measure().omega())?;
        Ok(Self::Lattice(space))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ell { dim, .. } => *dim,
            Self::Lattice(x) => x.atoms(),
        }
    }

    /// Exponent `s` of an `ℓˢ` codomain.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Self::Ell { s, .. } => Some(*s),
            Self::Lattice(_) => None,
        }
    }

    /// Conjugate exponent `s'` with `1/s + 1/s' = 1`.
    pub fn dual_exponent(&self) -> Option<f64> {
        self.exponent().map(|s| {
            if s == 1.0 {
                f64::INFINITY
            } else if s.is_infinite() {
                1.0
            } else {
                s / (s - 1.0)
            }
        })
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        check_len(self.dim(), x.len())?;
        crate::error::check_finite_input(x)?;
        Ok(self.norm_raw(x))
    }

    pub(crate) fn norm_raw(&self, x: &[f64]) -> f64 {
        match self {
            Self::Ell { s, .. } => ell_norm(x, *s),
            Self::Lattice(space) => {
                let m = space.measure();
                let canon: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if m.is_null_atom(i) { 0.0 } else { v })
                    .collect();
                space.norm_raw(&canon, &Budget::default())
            }
        }
    }
}

/// `(Σ|x_i|^s)^{1/s}` without weights; `s = ∞` is the max norm.
pub(crate) fn ell_norm(x: &[f64], s: f64) -> f64 {
    let big = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if big == 0.0 || s.is_infinite() || big.is_infinite() {
        return big;
    }
    if s == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    let sum: f64 = x.iter().map(|v| (v.abs() / big).powf(s)).sum();
    big * sum.powf(1.0 / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ell_norms() {
        assert_eq!(ell_norm(&[3.0, 4.0], 2.0), 5.0);
        assert_eq!(ell_norm(&[3.0, -4.0], 1.0), 7.0);
        assert_eq!(ell_norm(&[3.0, -4.0], f64::INFINITY), 4.0);
        assert!((ell_norm(&[1e200, 1e200], 2.0) - 2f64.sqrt() * 1e200).abs() < 1e186);
    }

    #[test]
    fn dual_exponents() {
        assert_eq!(NormedCodomain::ell(2.0, 1).unwrap().dual_exponent(), Some(2.0));
        assert_eq!(NormedCodomain::ell(1.0, 1).unwrap().dual_exponent(), Some(f64::INFINITY));
        assert_eq!(NormedCodomain::ell(f64::INFINITY, 1).unwrap().dual_exponent(), Some(1.0));
        assert!(NormedCodomain::ell(0.5, 1).is_err());
    }
}
