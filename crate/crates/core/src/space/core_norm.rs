//! The q-concave core norm
//! `‖f‖_{qX} = sup (Σ_j ‖f_j‖_X^q)^{1/q}` over finite families with
//! `(Σ_j |f_j|^q)^{1/q} = |f|`.
//!
//! A family is encoded by mass fractions `W_{ji} ≥ 0`, `Σ_j W_{ji} = 1`, so
//! `f_j = sign(f) W_j^{1/q} |f|`. In these coordinates the objective is
//! `Σ_j ‖W_j |f|^q‖_{X^{1/q}}`; when `X^{1/q}` is normed it is convex and
//! the maximum sits at a vertex of the product of simplices, i.e. at a
//! partition of the support of `f`.

use rayon::prelude::*;

use super::eval::support;
use super::{Node, SpaceExpr};
use crate::budget::Budget;
use crate::error::{check_len, check_positive, Error, Result};
use crate::measure::FnVec;
use crate::optimize::{argmax, simplex_columns_ascent, stream_rng, AscentOptions};

const STREAM_CORE: u64 = 0x434f_5245;
/// Largest support for the exact subset dynamic programme (3^d work).
const PARTITION_CAP: usize = 12;

/// A q-decomposition `|f| = (Σ_j |f_j|^q)^{1/q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub parts: Vec<FnVec>,
    pub q: f64,
}

impl Decomposition {
    /// Largest atomwise deviation of `(Σ_j |f_j|^q)^{1/q}` from `|f|`.
    pub fn reconstruction_error(&self, f: &[f64]) -> f64 {
        (0..f.len())
            .map(|i| {
                let s: f64 = self.parts.iter().map(|p| p[i].abs().powf(self.q)).sum();
                (s.powf(1.0 / self.q) - f[i].abs()).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Best value found with a given number of parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscalationStep {
    pub parts: usize,
    pub value: f64,
}

/// A certified lower bound on `‖f‖_{qX}` with its witness.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreNorm {
    /// `(Σ_j ‖f_j‖_X^q)^{1/q}` recomputed from the witness.
    pub value: f64,
    pub decomposition: Decomposition,
    pub trace: Vec<EscalationStep>,
    /// The value is the exact supremum (vertex optimality applies and all
    /// partitions were examined).
    pub exact: bool,
}

/// Evaluate `‖f‖_{qX}`. The part cap is `budget.k_max`, defaulting to
/// `max(4, 2n)` for `n` atoms in the support.
pub fn core_norm(x: &SpaceExpr, q: f64, f: &[f64], budget: &Budget) -> Result<CoreNorm> {
    check_positive("q", q)?;
    if q.is_infinite() {
        return Err(Error::InvalidExponent {
            name: "q",
            value: q,
            reason: "the concave core needs a finite exponent",
        });
    }
    check_len(x.atoms(), f.len())?;
    let f = x.measure().canonical(f)?;
    x.preflight(support(&f))?;
    if !x.norm_raw(&f, budget).is_finite() {
        return Err(Error::NotInSpace);
    }
    Ok(search(x, q, &f, budget))
}

/// True when `X^{1/q}` is known to be normed.
fn vertex_optimal(x: &SpaceExpr, q: f64) -> bool {
    match x.node() {
        Node::Lp { p, .. } => *p >= q,
        Node::Power { base, p } => vertex_optimal(base, q / p),
        _ => x.is_normed() && q <= 1.0,
    }
}

pub(crate) fn search(x: &SpaceExpr, q: f64, f: &[f64], budget: &Budget) -> CoreNorm {
    let n = f.len();
    let active: Vec<usize> = (0..n).filter(|&i| f[i] != 0.0).collect();
    let d = active.len();
    let abs_q: Vec<f64> = f.iter().map(|v| v.abs().powf(q)).collect();

    // Rows of W over the active atoms -> parts on all atoms.
    let parts_of = |w: &[f64], k: usize| -> Vec<Vec<f64>> {
        (0..k)
            .map(|j| {
                let mut part = vec![0.0; n];
                for (c, &i) in active.iter().enumerate() {
                    let wj = w[j * d + c];
                    if wj > 0.0 {
                        part[i] = f[i].signum() * (wj * abs_q[i]).powf(1.0 / q);
                    }
                }
                part
            })
            .collect()
    };
    let objective = |w: &[f64], k: usize| -> f64 { parts_of(w, k).iter().map(|p| x.norm_raw(p, budget).powf(q)).sum() };
    let finish = |w: &[f64], k: usize, trace: Vec<EscalationStep>, exact: bool| -> CoreNorm {
        let parts: Vec<Vec<f64>> = parts_of(w, k).into_iter().filter(|p| p.iter().any(|v| *v != 0.0)).collect();
        let value = parts.iter().map(|p| x.norm_raw(p, budget).powf(q)).sum::<f64>().powf(1.0 / q);
        CoreNorm {
            value,
            decomposition: Decomposition {
                parts: parts.into_iter().map(FnVec::from).collect(),
                q,
            },
            trace,
            exact,
        }
    };

    if d == 0 {
        return CoreNorm {
            value: 0.0,
            decomposition: Decomposition { parts: Vec::new(), q },
            trace: Vec::new(),
            exact: true,
        };
    }

    let trivial = vec![1.0; d];
    let base_value = objective(&trivial, 1);
    let mut trace = vec![EscalationStep {
        parts: 1,
        value: base_value.powf(1.0 / q),
    }];
    let mut best: (f64, Vec<f64>, usize) = (base_value, trivial, 1);

    let mut exact = false;
    if d <= PARTITION_CAP {
        let (val, blocks) = best_partition(&active, f, |part: &[f64]| x.norm_raw(part, budget).powf(q));
        if val > best.0 {
            let k = blocks.len();
            let mut w = vec![0.0; k * d];
            for (j, block) in blocks.iter().enumerate() {
                for c in 0..d {
                    if block & (1 << c) != 0 {
                        w[j * d + c] = 1.0;
                    }
                }
            }
            best = (val, w, k);
        }
        exact = vertex_optimal(x, q);
    }
    if exact {
        trace.push(EscalationStep {
            parts: best.2,
            value: best.0.powf(1.0 / q),
        });
        return finish(&best.1, best.2, trace, true);
    }

    let cap = budget.parts_cap(d);
    let opts = AscentOptions {
        max_iters: budget.max_iters,
        ..AscentOptions::default()
    };
    let first = best.2.max(2);
    for k in first..=cap.max(first) {
        let warm = widen(&best.1, best.2, k, d);
        let runs: Vec<(f64, Vec<f64>)> = (0..budget.restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(budget.seed, &[STREAM_CORE, k as u64, r as u64]);
                let w0 = if r == 0 {
                    warm.clone()
                } else {
                    random_columns(&mut rng, k, d)
                };
                let (w, v) = simplex_columns_ascent(&|w: &[f64]| objective(w, k), w0, k, d, opts);
                (v, w)
            })
            .collect();
        let (v, w) = argmax(runs).expect("at least one restart");
        let prev = best.0.powf(1.0 / q);
        if v > best.0 {
            best = (v, w, k);
        }
        let now = best.0.powf(1.0 / q);
        trace.push(EscalationStep { parts: k, value: now });
        if k > first && (now - prev) / prev.max(f64::MIN_POSITIVE) < budget.stabilization_tol {
            break;
        }
    }
    finish(&best.1, best.2, trace, false)
}

/// Embed a `k0`-part matrix into `k` parts, splitting the heaviest entry
/// into the new rows.
fn widen(w: &[f64], k0: usize, k: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; k * d];
    out[..k0 * d].copy_from_slice(&w[..k0 * d]);
    for extra in k0..k {
        let (idx, _) = out[..extra * d]
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let c = idx % d;
        let moved = out[idx] * 0.5;
        out[idx] -= moved;
        out[extra * d + c] = moved;
    }
    out
}

fn random_columns<R: rand::Rng>(rng: &mut R, k: usize, d: usize) -> Vec<f64> {
    let mut w = vec![0.0; k * d];
    for c in 0..d {
        let mut total = 0.0;
        for j in 0..k {
            let e = -(1.0 - rng.random::<f64>()).ln();
            w[j * d + c] = e;
            total += e;
        }
        for j in 0..k {
            w[j * d + c] /= total;
        }
    }
    w
}

/// Maximize `Σ_B value(f·χ_B)` over set partitions of the active atoms by
/// dynamic programming over subsets. Blocks are returned as bitmasks over
/// positions in `active`.
fn best_partition<F>(active: &[usize], f: &[f64], value: F) -> (f64, Vec<u32>)
where
    F: Fn(&[f64]) -> f64,
{
    let d = active.len();
    let full = (1u32 << d) - 1;
    let mut block = vec![0.0; 1 << d];
    let mut part = vec![0.0; f.len()];
    for s in 1..=full {
        part.iter_mut().for_each(|v| *v = 0.0);
        for (c, &i) in active.iter().enumerate() {
            if s & (1 << c) != 0 {
                part[i] = f[i];
            }
        }
        block[s as usize] = value(&part);
    }
    let mut best = vec![0.0; 1 << d];
    let mut choice = vec![0u32; 1 << d];
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        // blocks containing the lowest element of s
        let mut sub = rest;
        let mut b = f64::NEG_INFINITY;
        let mut c = s;
        loop {
            let blk = sub | low;
            let v = block[blk as usize] + best[(s ^ blk) as usize];
            if v > b {
                b = v;
                c = blk;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[s as usize] = b;
        choice[s as usize] = c;
    }
    let mut blocks = Vec::new();
    let mut s = full;
    while s != 0 {
        blocks.push(choice[s as usize]);
        s ^= choice[s as usize];
    }
    (best[full as usize], blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpace;
    use std::sync::Arc;

    fn unit(n: usize) -> Arc<MeasureSpace> {
        Arc::new(MeasureSpace::uniform(n).unwrap())
    }

    #[test]
    fn known_values() {
        let b = Budget::default();
        let l2 = SpaceExpr::lp(unit(2), 2.0).unwrap();
        let c = core_norm(&l2, 1.0, &[1.0, 1.0], &b).unwrap();
        assert!((c.value - 2.0).abs() < 1e-9);
        assert!(c.decomposition.reconstruction_error(&[1.0, 1.0]) < 1e-9);
        let c = core_norm(&l2, 2.0, &[3.0, 4.0], &b).unwrap();
        assert!((c.value - 5.0).abs() < 1e-9);
        assert_eq!(core_norm(&l2, 2.0, &[0.0, 0.0], &b).unwrap().value, 0.0);
        let linf = SpaceExpr::lp(unit(2), f64::INFINITY).unwrap();
        let c = core_norm(&linf, 2.0, &[3.0, 4.0], &b).unwrap();
        assert!((c.value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let l1 = SpaceExpr::lp(Arc::new(MeasureSpace::new(vec![1.0, f64::INFINITY]).unwrap()), 1.0).unwrap();
        assert_eq!(core_norm(&l1, 1.0, &[0.0, 1.0], &Budget::default()).unwrap_err(), Error::NotInSpace);
        assert!(core_norm(&l1, 0.0, &[1.0, 0.0], &Budget::default()).is_err());
    }

    #[test]
    fn quasi_base_escalates() {
        // ℓ^{1/2} is q-concave with constant 1 for q ≥ 1/2; the core is the space itself.
        let half = SpaceExpr::lp(unit(3), 0.5).unwrap();
        let f = [1.0, 2.0, 3.0];
        let c = core_norm(&half, 1.0, &f, &Budget::default().with_restarts(4)).unwrap();
        let direct = half.norm(&f).unwrap();
        assert!((c.value - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn partitions_dp() {
        let active = [0, 1, 2];
        let f = [1.0, 1.0, 1.0];
        // value of a block = (size)^2: best is one block.
        let (v, blocks) = best_partition(&active, &f, |p| {
            let s = p.iter().filter(|x| **x != 0.0).count() as f64;
            s * s
        });
        assert_eq!(v, 9.0);
        assert_eq!(blocks, vec![0b111]);
        let (v, blocks) = best_partition(&active, &f, |p| p.iter().filter(|x| **x != 0.0).count() as f64 * 0.0 + 1.0);
        assert_eq!(v, 3.0);
        assert_eq!(blocks.len(), 3);
    }
}
