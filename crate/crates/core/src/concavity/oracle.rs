//! Exhaustive grid oracles for tiny instances.
//!
//! These recompute every ratio directly from its definition through the
//! public norm evaluators and share no search code with the estimators.

use rayon::prelude::*;

use super::Problem;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::measure::FnVec;
use crate::space::{eval_norm_with, SpaceExpr};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Subdivisions of `[0, 1]` per coordinate.
    pub grid: usize,
    /// Largest family (or number of parts).
    pub max_family: usize,
    /// Refuse instances with more grid points than this.
    pub cap: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            grid: 40,
            max_family: 3,
            cap: 5e7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Family (or decomposition parts) attaining `value`.
    pub family: Vec<FnVec>,
    /// Grid points examined.
    pub points: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_size(atoms: usize, family: usize, codim: usize) -> Result<()> {
    if atoms > 3 || family > 3 || codim > 3 {
        return Err(Error::InvalidArgument(format!(
            "oracle needs at most 3 atoms, family size 3 and codomain dimension 3 (got {atoms}, {family}, {codim})"
        )));
    }
    Ok(())
}

/// Grid points of one function: `[0,1]^s` for lattice problems, or the half
/// of `[-1,1]^s` whose first nonzero entry is positive when signs matter.
fn function_grid(s: usize, g: usize, signed: bool) -> Vec<Vec<f64>> {
    let side = if signed { 2 * g + 1 } else { g + 1 };
    let mut out = Vec::new();
    for idx in 0..side.pow(s as u32) {
        let mut rem = idx;
        let v: Vec<f64> = (0..s)
            .map(|_| {
                let c = rem % side;
                rem /= side;
                if signed {
                    (c as f64 - g as f64) / g as f64
                } else {
                    c as f64 / g as f64
                }
            })
            .collect();
        match v.iter().find(|x| **x != 0.0) {
            None => continue,
            Some(first) if signed && *first < 0.0 => continue,
            _ => out.push(v),
        }
    }
    out
}

fn norm(x: &SpaceExpr, f: &[f64]) -> f64 {
    eval_norm_with(x, f, &Budget::default()).expect("preflighted")
}

fn lq(values: &[f64], q: f64) -> f64 {
    values.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
}

fn lattice_envelope(family: &[Vec<f64>], q: f64) -> Vec<f64> {
    let n = family[0].len();
    (0..n)
        .map(|i| family.iter().map(|f| f[i].abs().powf(q)).sum::<f64>().powf(1.0 / q))
        .collect()
}

fn definition_ratio(problem: &Problem, family: &[Vec<f64>]) -> f64 {
    let (num, den) = match problem {
        Problem::Concavity { op, q } => {
            let images: Vec<f64> = family.iter().map(|f| op.image_norm(f).expect("valid")).collect();
            (lq(&images, *q), norm(op.domain(), &lattice_envelope(family, *q)))
        }
        Problem::SpaceConcavity { space, q } => {
            let norms: Vec<f64> = family.iter().map(|f| norm(space, f)).collect();
            (lq(&norms, *q), norm(space, &lattice_envelope(family, *q)))
        }
        Problem::Convexity { space, p } => {
            let norms: Vec<f64> = family.iter().map(|f| norm(space, f)).collect();
            (norm(space, &lattice_envelope(family, *p)), lq(&norms, *p))
        }
        Problem::PowerConcavity { op, p, q } => {
            let a = q / p;
            let images: Vec<f64> = family.iter().map(|f| op.image_norm(f).expect("valid")).collect();
            let g = lattice_envelope(family, a);
            let x = op.domain();
            let den = if *p == 1.0 {
                norm(x, &g)
            } else {
                let root = SpaceExpr::power(x, 1.0 / p).expect("valid exponent");
                crate::space::sum_norm(&root, x, &g, &Budget::default()).expect("valid").value
            };
            (lq(&images, a), den)
        }
    };
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Largest ratio over all multisets of grid functions of size at most
/// `opts.max_family`.
pub fn oracle_constant(problem: &Problem, opts: &OracleOptions) -> Result<OracleResult> {
    let x = problem.domain();
    let codim = match problem {
        Problem::Concavity { op, .. } | Problem::PowerConcavity { op, .. } => op.codomain().dim(),
        _ => 0,
    };
    check_size(x.atoms(), opts.max_family, codim)?;
    problem.ratio(&[], &Budget::default())?;
    let atoms: Vec<usize> = x.active_atoms().iter().collect();
    let s = atoms.len();
    let signed = matches!(problem, Problem::Concavity { .. } | Problem::PowerConcavity { .. });
    let pts = function_grid(s, opts.grid.max(1), signed);
    let p = pts.len();
    let points: f64 = (1..=opts.max_family).map(|k| binomial(p + k - 1, k)).sum();
    if points > opts.cap {
        return Err(Error::OracleTooLarge { points, cap: opts.cap });
    }
    let n = x.atoms();
    let lift = |v: &[f64]| -> Vec<f64> {
        let mut f = vec![0.0; n];
        for (c, &i) in atoms.iter().enumerate() {
            f[i] = v[c];
        }
        f
    };
    let lifted: Vec<Vec<f64>> = pts.iter().map(|v| lift(v)).collect();
    let k_max = opts.max_family;
    // Parallel over the first index of each non-decreasing index tuple.
    let results: Vec<(f64, Vec<usize>)> = (0..p)
        .into_par_iter()
        .map(|i0| {
            let mut best = (0.0, vec![i0]);
            let mut idx = vec![i0];
            loop {
                let family: Vec<Vec<f64>> = idx.iter().map(|&i| lifted[i].clone()).collect();
                let r = definition_ratio(problem, &family);
                if r > best.0 {
                    best = (r, idx.clone());
                }
                // next non-decreasing tuple with idx[0] fixed
                if idx.len() < k_max {
                    let last = *idx.last().unwrap();
                    idx.push(last);
                    continue;
                }
                loop {
                    if idx.len() == 1 {
                        return best;
                    }
                    let l = idx.len() - 1;
                    if idx[l] + 1 < p {
                        idx[l] += 1;
                        break;
                    }
                    idx.pop();
                }
            }
        })
        .collect();
    let (value, idx) = results
        .into_iter()
        .fold((0.0, Vec::new()), |acc, r| if r.0 > acc.0 { r } else { acc });
    Ok(OracleResult {
        value,
        family: idx.iter().map(|&i| FnVec::from(lifted[i].clone())).collect(),
        points,
    })
}

/// Largest `(Σ_j ‖f_j‖_X^q)^{1/q}` over decompositions whose mass fractions
/// `|f_j(i)|^q / |f(i)|^q` lie on the grid `{0, 1/g, …, 1}`.
pub fn oracle_core_norm(x: &SpaceExpr, q: f64, f: &[f64], opts: &OracleOptions) -> Result<OracleResult> {
    check_size(x.atoms(), opts.max_family, 0)?;
    let f = x.measure().canonical(f)?.into_inner();
    if !eval_norm_with(x, &f, &Budget::default())?.is_finite() {
        return Err(Error::NotInSpace);
    }
    let active: Vec<usize> = (0..f.len()).filter(|&i| f[i] != 0.0).collect();
    let g = opts.grid.max(1);
    let mut best = OracleResult {
        value: 0.0,
        family: Vec::new(),
        points: 0.0,
    };
    for k in 1..=opts.max_family {
        // compositions of g into k nonnegative parts
        let mut comps: Vec<Vec<usize>> = Vec::new();
        compositions(g, k, &mut Vec::new(), &mut comps);
        let per_atom = comps.len();
        let total = (per_atom as f64).powi(active.len() as i32);
        best.points += total;
        if best.points > opts.cap {
            return Err(Error::OracleTooLarge {
                points: best.points,
                cap: opts.cap,
            });
        }
        let total = total as usize;
        let found: Vec<(f64, Vec<Vec<f64>>)> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut rem = idx;
                let mut parts = vec![vec![0.0; f.len()]; k];
                for &i in &active {
                    let comp = &comps[rem % per_atom];
                    rem /= per_atom;
                    for j in 0..k {
                        let frac = comp[j] as f64 / g as f64;
                        parts[j][i] = f[i].signum() * (frac * f[i].abs().powf(q)).powf(1.0 / q);
                    }
                }
                let v = parts.iter().map(|p| norm(x, p).powf(q)).sum::<f64>().powf(1.0 / q);
                (v, parts)
            })
            .collect();
        for (v, parts) in found {
            if v > best.value {
                best.value = v;
                best.family = parts.into_iter().map(FnVec::from).collect();
            }
        }
    }
    Ok(best)
}

fn compositions(total: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, k - 1, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpace;
    use crate::operator::Operator;
    use std::sync::Arc;

    fn unit(n: usize) -> Arc<MeasureSpace> {
        Arc::new(MeasureSpace::uniform(n).unwrap())
    }

    #[test]
    fn oracle_examples() {
        let opts = OracleOptions {
            grid: 4,
            max_family: 2,
            ..OracleOptions::default()
        };
        let linf = SpaceExpr::lp(unit(2), f64::INFINITY).unwrap();
        let t = Operator::identity(&linf, f64::INFINITY).unwrap();
        let r = oracle_constant(&Problem::Concavity { op: t, q: 1.0 }, &opts).unwrap();
        assert!(r.value >= 1.98);

        let l2 = SpaceExpr::lp(unit(2), 2.0).unwrap();
        let t = Operator::identity(&l2, 2.0).unwrap();
        let r = oracle_constant(&Problem::Concavity { op: t, q: 2.0 }, &opts).unwrap();
        assert!(r.value >= 0.98 && r.value <= 1.0 + 1e-12);

        let z = Operator::zero(&l2, crate::NormedCodomain::ell(2.0, 1).unwrap()).unwrap();
        assert_eq!(oracle_constant(&Problem::Concavity { op: z, q: 2.0 }, &opts).unwrap().value, 0.0);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let l2 = SpaceExpr::lp(unit(3), 2.0).unwrap();
        let t = Operator::identity(&l2, 2.0).unwrap();
        let err = oracle_constant(&Problem::Concavity { op: t, q: 1.0 }, &OracleOptions::default()).unwrap_err();
        assert!(matches!(err, Error::OracleTooLarge { .. }));
        let l2 = SpaceExpr::lp(unit(4), 2.0).unwrap();
        assert!(oracle_core_norm(&l2, 1.0, &[1.0; 4], &OracleOptions::default()).is_err());
    }

    #[test]
    fn core_oracle() {
        let linf = SpaceExpr::lp(unit(2), f64::INFINITY).unwrap();
        let r = oracle_core_norm(&linf, 2.0, &[3.0, 4.0], &OracleOptions::default()).unwrap();
        assert!((r.value - 5.0).abs() < 1e-9);
        let mut c = Vec::new();
        compositions(2, 3, &mut Vec::new(), &mut c);
        assert_eq!(c.len(), 6);
    }
}
