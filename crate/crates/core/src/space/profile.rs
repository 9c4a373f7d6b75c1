//! Empirical quasi-triangle constant of a space.

use rand::Rng;

use super::SpaceExpr;
use crate::budget::Budget;
use crate::error::Result;
use crate::measure::FnVec;
use crate::optimize::stream_rng;

const STREAM_PROFILE: u64 = 0x5052_4f46;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Random pairs for the triangle defect.
    pub pairs: usize,
    /// Random families for the r-sum inequality.
    pub families: usize,
    pub max_family: usize,
}

impl ProfileOptions {
    pub fn new(pairs: usize, families: usize) -> Self {
        Self {
            pairs,
            families,
            max_family: 5,
        }
    }
}

/// A family violating `‖Σx_j‖ ≤ 4^{1/r} (Σ‖x_j‖^r)^{1/r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub family: Vec<FnVec>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasinormProfile {
    /// Largest observed `‖x+y‖ / (‖x‖+‖y‖)`.
    pub k_observed: f64,
    /// `r` with `K̂ = 2^{1/r-1}` (1 when `K̂ ≤ 1`).
    pub r_implied: f64,
    pub declared_k: f64,
    pub declared_r: f64,
    /// Pair attaining `k_observed`.
    pub worst_pair: Option<(FnVec, FnVec)>,
    pub pairs_checked: usize,
    pub families_checked: usize,
    /// Largest `lhs / rhs` over the families.
    pub worst_rsum_ratio: f64,
    pub counterexamples: Vec<Counterexample>,
}

impl QuasinormProfile {
    /// No pair exceeded the declared modulus and no family broke the r-sum bound.
    pub fn consistent(&self) -> bool {
        self.k_observed <= self.declared_k * (1.0 + 1e-12) && self.counterexamples.is_empty()
    }
}

/// Profile with `trials` pairs and `trials` families.
pub fn quasinorm_profile(x: &SpaceExpr, trials: usize, seed: u64) -> Result<QuasinormProfile> {
    quasinorm_profile_with(x, ProfileOptions::new(trials, trials), &Budget::default().with_seed(seed))
}

/// Sparse random vector on the active atoms with log-uniform magnitudes, so
/// disjoint supports and lopsided scales both occur.
fn sample<R: Rng>(rng: &mut R, x: &SpaceExpr) -> Vec<f64> {
    let active = x.active_atoms();
    loop {
        let v: Vec<f64> = (0..x.atoms())
            .map(|i| {
                if !active.contains(i) || rng.random_bool(0.35) {
                    0.0
                } else {
                    let mag = 10f64.powf(rng.random_range(-2.0..2.0));
                    if rng.random_bool(0.5) {
                        mag
                    } else {
                        -mag
                    }
                }
            })
            .collect();
        if active.is_empty() || v.iter().any(|t| *t != 0.0) {
            return v;
        }
    }
}

pub fn quasinorm_profile_with(x: &SpaceExpr, opts: ProfileOptions, budget: &Budget) -> Result<QuasinormProfile> {
    x.preflight(x.active_atoms())?;
    let mut rng = stream_rng(budget.seed, &[STREAM_PROFILE]);
    let norm = |v: &[f64]| x.norm_raw(v, budget);
    let mut k_observed: f64 = 0.0;
    let mut worst_pair = None;
    for _ in 0..opts.pairs {
        let a = sample(&mut rng, x);
        let b = sample(&mut rng, x);
        let s: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u + v).collect();
        let den = norm(&a) + norm(&b);
        if den == 0.0 || !den.is_finite() {
            continue;
        }
        let k = norm(&s) / den;
        if k > k_observed {
            k_observed = k;
            worst_pair = Some((FnVec::from(a), FnVec::from(b)));
        }
    }
    let r = x.r();
    let mut counterexamples = Vec::new();
    let mut worst_rsum_ratio: f64 = 0.0;
    for _ in 0..opts.families {
        let size = rng.random_range(1..=opts.max_family.max(1));
        let family: Vec<Vec<f64>> = (0..size).map(|_| sample(&mut rng, x)).collect();
        let mut total = vec![0.0; x.atoms()];
        for g in &family {
            total.iter_mut().zip(g).for_each(|(t, v)| *t += v);
        }
        let lhs = norm(&total);
        let rhs = 4f64.powf(1.0 / r) * family.iter().map(|g| norm(g).powf(r)).sum::<f64>().powf(1.0 / r);
        if rhs > 0.0 {
            worst_rsum_ratio = worst_rsum_ratio.max(lhs / rhs);
        }
        if lhs > rhs * (1.0 + 1e-12) {
            counterexamples.push(Counterexample {
                family: family.into_iter().map(FnVec::from).collect(),
                lhs,
                rhs,
            });
        }
    }
    let r_implied = if k_observed <= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + k_observed.log2())
    };
    Ok(QuasinormProfile {
        k_observed,
        r_implied,
        declared_k: x.modulus(),
        declared_r: r,
        worst_pair,
        pairs_checked: opts.pairs,
        families_checked: opts.families,
        worst_rsum_ratio,
        counterexamples,
    })
}
