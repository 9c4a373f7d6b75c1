//! The sum norm `‖f‖_{X+Y} = inf { ‖f₁‖_X + ‖f₂‖_Y : f = f₁ + f₂ }`.
//!
//! For lattice quasi-norms any split can be replaced by one with
//! `|g₁| ≤ |f₁|`, `|g₂| ≤ |f₂|` and `g₁ = t·f` for some `t ∈ [0,1]ⁿ`, so the
//! search runs over the box of split fractions on the support of `f`.

use super::eval::support;
use super::{Node, SpaceExpr};
use crate::budget::Budget;
use crate::error::{check_len, Result};
use crate::measure::FnVec;
use crate::optimize::{argmin, golden_section, line_polish_box, pattern_search_box, projected_subgradient_box, stream_rng, PatternOptions};

const STREAM_SUM: u64 = 0x5355_4d;

/// Budgets with at least this many iterations get a final exact-line-search
/// polish; nested evaluations inside constant searches run with less.
pub(crate) const PRECISE_ITERS: usize = 100;

/// A split `f = left + right` witnessing an upper bound on the sum norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SumNorm {
    /// `‖left‖_X + ‖right‖_Y`, recomputed from the stored split.
    pub value: f64,
    pub left: FnVec,
    pub right: FnVec,
}

/// Evaluate `‖f‖_{X+Y}` with its witnessing split.
pub fn sum_norm(x: &SpaceExpr, y: &SpaceExpr, f: &[f64], budget: &Budget) -> Result<SumNorm> {
    let joint = SpaceExpr::sum(x, y)?;
    check_len(joint.atoms(), f.len())?;
    let f = joint.measure().canonical(f)?;
    joint.preflight(support(&f))?;
    Ok(search(x, y, &f, budget))
}

pub(crate) fn search(x: &SpaceExpr, y: &SpaceExpr, f: &[f64], budget: &Budget) -> SumNorm {
    let n = f.len();
    let split = |t_full: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let left: Vec<f64> = f.iter().zip(t_full).map(|(v, t)| v * t).collect();
        let right: Vec<f64> = f.iter().zip(&left).map(|(v, l)| v - l).collect();
        (left, right)
    };
    let score = |t_full: &[f64]| -> f64 {
        let (l, r) = split(t_full);
        x.norm_raw(&l, budget) + y.norm_raw(&r, budget)
    };

    // Atoms fixed by membership: t = 0 where X is infinite, t = 1 where Y is.
    let mut t_base = vec![0.0; n];
    let mut free = Vec::new();
    for i in 0..n {
        if f[i] == 0.0 {
            continue;
        }
        let in_x = x.finite_mask().contains(i);
        let in_y = y.finite_mask().contains(i);
        match (in_x, in_y) {
            (true, true) => free.push(i),
            (true, false) => t_base[i] = 1.0,
            _ => {}
        }
    }
    let d = free.len();
    let embed = |t: &[f64]| -> Vec<f64> {
        let mut full = t_base.clone();
        for (k, &i) in free.iter().enumerate() {
            full[i] = t[k];
        }
        full
    };
    let obj = |t: &[f64]| score(&embed(t));

    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    // With an ℓ^∞ summand some optimal split truncates |f| at a level λ, and
    // the cost is convex in λ when the other side is normed.
    let is_sup = |z: &SpaceExpr| matches!(z.node(), Node::Lp { p, .. } if p.is_infinite());
    let truncation = match (is_sup(x), is_sup(y)) {
        (_, true) => Some(false),
        (true, false) => Some(true),
        _ => None,
    };
    if let (Some(sup_left), true) = (truncation, d > 0) {
        let at = |lam: f64| -> Vec<f64> {
            free.iter()
                .map(|&i| {
                    let a = f[i].abs();
                    if sup_left {
                        (lam / a).min(1.0)
                    } else {
                        (1.0 - lam / a).max(0.0)
                    }
                })
                .collect()
        };
        let top = free.iter().map(|&i| f[i].abs()).fold(0.0, f64::max);
        let (lam, v) = golden_section(&|lam: f64| obj(&at(lam)), 0.0, top);
        if x.is_normed() && y.is_normed() {
            let t = at(lam);
            let (left, right) = split(&embed(&t));
            return SumNorm {
                value: x.norm_raw(&left, budget) + y.norm_raw(&right, budget),
                left: left.into(),
                right: right.into(),
            };
        }
        candidates.push((v, at(lam)));
    }
    if d == 0 {
        candidates.push((obj(&[]), Vec::new()));
    } else {
        // Corners of the box first; they include the trivial splits f + 0.
        if d <= 10 {
            for mask in 0u32..(1 << d) {
                let t: Vec<f64> = (0..d).map(|k| f64::from((mask >> k) & 1)).collect();
                candidates.push((obj(&t), t));
            }
        } else {
            for v in [0.0, 1.0] {
                let t = vec![v; d];
                candidates.push((obj(&t), t));
            }
        }
        let mut rng = stream_rng(budget.seed, &[STREAM_SUM, d as u64]);
        if x.is_normed() && y.is_normed() {
            let (_, c) = argmin(candidates.clone()).expect("nonempty");
            let starts = [c, vec![0.5; d]];
            for s in starts {
                let (t, _) = projected_subgradient_box(&obj, s, budget.max_iters.max(20), 0.5);
                let (t, v) = pattern_search_box(&obj, t, polish_options(d, budget), &mut rng);
                candidates.push((v, t));
            }
        } else {
            if d <= 3 {
                let g = budget.grid.clamp(2, [0, 40, 20, 10][d]);
                let mut grid_pts = Vec::new();
                let total = (g + 1).pow(d as u32);
                for idx in 0..total {
                    let mut rem = idx;
                    let t: Vec<f64> = (0..d)
                        .map(|_| {
                            let c = rem % (g + 1);
                            rem /= g + 1;
                            c as f64 / g as f64
                        })
                        .collect();
                    grid_pts.push((obj(&t), t));
                }
                grid_pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                candidates.extend(grid_pts.into_iter().take(3));
            }
            let mut starts: Vec<Vec<f64>> = {
                let mut sorted = candidates.clone();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                sorted.into_iter().take(3).map(|(_, t)| t).collect()
            };
            let extra = (budget.restarts / 8).max(2);
            for _ in 0..extra {
                starts.push((0..d).map(|_| rand::Rng::random::<f64>(&mut rng)).collect());
            }
            for s in starts {
                let (t, v) = pattern_search_box(&obj, s, polish_options(d, budget), &mut rng);
                candidates.push((v, t));
            }
        }
    }
    let (_, mut t) = argmin(candidates).expect("nonempty");
    if d > 0 && budget.max_iters >= PRECISE_ITERS {
        let mut rng = stream_rng(budget.seed, &[STREAM_SUM, d as u64, 1]);
        t = line_polish_box(&obj, t, 40, 2 * d + 2, &mut rng).0;
    }
    let (left, right) = split(&embed(&t));
    let value = x.norm_raw(&left, budget) + y.norm_raw(&right, budget);
    SumNorm {
        value,
        left: left.into(),
        right: right.into(),
    }
}

fn polish_options(d: usize, budget: &Budget) -> PatternOptions {
    PatternOptions {
        initial_step: 0.25,
        min_step: 1e-15,
        max_evals: 2 * budget.max_iters.max(20) * d.max(1) + 60 * (d + 2),
        random_directions: 2,
    }
}
