//! Optimal domains of operators and the checks built on them.

use std::sync::Arc;

use super::report::{random_samples, reduced_budget, CheckContext, CheckReport, Margin};
use crate::concavity::{concavity_constant, convexity_constant, power_concavity_constant};
use crate::error::{check_positive, Error, Result};
use crate::measure::{delta_ring, sigma_property, FnVec, MSet, MeasureSpace};
use crate::operator::Operator;
use crate::optimize::{pattern_search_box, stream_rng, PatternOptions};
use crate::space::{eval_norm_with, SpaceExpr};
use crate::vector_measure::measure_from_operator;

/// The largest space to which `T` extends as a (p,q)-power-concave
/// operator: `(q/p)L¹(m_T) ∩ qLᵖ(m_T)`, or `qL¹(m_T)` when `p = 1`.
///
/// Only the σ-property of the domain is checked here; whether `T` is
/// (p,q)-power-concave is a search question left to the caller.
pub fn optimal_domain(t: &Operator, p: f64, q: f64) -> Result<SpaceExpr> {
    check_positive("p", p)?;
    check_positive("q", q)?;
    let m = measure_from_operator(t)?;
    let mu = t.domain().measure_arc().clone();
    let l1 = SpaceExpr::l1m(mu.clone(), &m)?;
    if p == 1.0 {
        return SpaceExpr::core(&l1, q);
    }
    let lp = SpaceExpr::lpm(mu, &m, p)?;
    SpaceExpr::intersection(&SpaceExpr::core(&l1, q / p)?, &SpaceExpr::core(&lp, q)?)
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `T = I_{m_T}` on the domain, and the domain embeds in the optimal domain.
pub fn check_extension(t: &Operator, p: f64, q: f64, samples: &[Vec<f64>], ctx: &CheckContext) -> Result<CheckReport> {
    let budget = &ctx.budget;
    let x = t.domain();
    let mut report = CheckReport::new(
        "extension",
        &format!("{x} {:?} {:?} p={p} q={q} samples={samples:?}", t.matrix(), t.codomain()),
        budget.seed,
    );
    let m = measure_from_operator(t)?;
    let optdom = optimal_domain(t, p, q)?;
    let mut disc: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    for f in samples {
        let canon = x.measure().canonical(f)?;
        let tf = t.apply(&canon)?;
        let im = m.integrate(&canon, MSet::full(x.atoms()))?;
        let d: f64 = tf.iter().zip(&im).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        disc = disc.max(d / sup_abs(&tf).max(1.0));
        let nx = eval_norm_with(x, &canon, budget)?;
        if nx > 0.0 && nx.is_finite() {
            ratio = ratio.max(eval_norm_with(&optdom, &canon, budget)? / nx);
        }
    }
    // m_T(A) = T(χ_A) on the δ-ring.
    if let Ok(ring) = delta_ring(x) {
        for a in ring {
            let chi = x.measure().indicator(a);
            let tf = t.apply(&chi)?;
            let ma = m.value(a.intersection(m.defined()))?;
            let d: f64 = tf.iter().zip(&ma).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            disc = disc.max(d / sup_abs(&tf).max(1.0));
        }
    }
    report.margin(Margin::at_most("extension_discrepancy", disc, ctx.tolerances.linear));
    report.margin(Margin::finite("inclusion_ratio", ratio));
    Ok(report.finish())
}

/// Settings for [`check_maximality`].
#[derive(Debug, Clone)]
pub struct MaximalityOptions {
    /// Catalog spaces; `None` selects [`default_catalog`].
    pub catalog: Option<Vec<SpaceExpr>>,
    /// Searched constants above this count as divergent.
    pub bound: f64,
    pub samples: usize,
}

impl Default for MaximalityOptions {
    fn default() -> Self {
        Self {
            catalog: None,
            bound: 1e6,
            samples: 10,
        }
    }
}

/// `ℓᵖ` for `p ∈ {1/2, 1, 2, ∞}` and their pairwise sums and intersections.
pub fn default_catalog(measure: &Arc<MeasureSpace>) -> Result<Vec<SpaceExpr>> {
    let leaves = [0.5, 1.0, 2.0, f64::INFINITY]
        .into_iter()
        .map(|p| SpaceExpr::lp(measure.clone(), p))
        .collect::<Result<Vec<_>>>()?;
    let mut out = leaves.clone();
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            out.push(SpaceExpr::sum(&leaves[i], &leaves[j])?);
            out.push(SpaceExpr::intersection(&leaves[i], &leaves[j])?);
        }
    }
    Ok(out)
}

/// Every catalog space `Z ⊇ X` on which `T` is (p,q)-power-concave embeds
/// in the optimal domain.
pub fn check_maximality(t: &Operator, p: f64, q: f64, opts: &MaximalityOptions, ctx: &CheckContext) -> Result<CheckReport> {
    let budget = &ctx.budget;
    let x = t.domain();
    let catalog = match &opts.catalog {
        Some(c) => c.clone(),
        None => default_catalog(x.measure_arc())?,
    };
    let names: Vec<String> = catalog.iter().map(|z| z.to_string()).collect();
    let mut report = CheckReport::new(
        "maximality",
        &format!("{x} {:?} {:?} p={p} q={q} catalog={names:?} B={}", t.matrix(), t.codomain(), opts.bound),
        budget.seed,
    );
    let optdom = optimal_domain(t, p, q)?;
    let inner = reduced_budget(budget);
    let mut tested = 0;
    for (idx, z) in catalog.iter().enumerate() {
        if !x.active_atoms().is_subset(z.finite_mask()) {
            report.note(format!("{z}: does not contain the domain; not an extension"));
            continue;
        }
        if !sigma_property(z) {
            report.note(format!("{z}: sigma-property fails; hypothesis unmet"));
            continue;
        }
        let s = t.with_domain(z)?;
        let c = match power_concavity_constant(&s, p, q, &inner) {
            Ok(c) if c.lower_bound <= opts.bound => c.lower_bound,
            Ok(c) => {
                report.note(format!("{z}: searched constant {} exceeds {}; hypothesis unmet", c.lower_bound, opts.bound));
                continue;
            }
            Err(Error::Divergent { .. }) => {
                report.note(format!("{z}: constant diverges; hypothesis unmet"));
                continue;
            }
            Err(e) => return Err(e),
        };
        tested += 1;
        let mut ratio: f64 = 0.0;
        for f in random_samples(z, opts.samples, budget.seed ^ idx as u64) {
            let nz = eval_norm_with(z, &f, &inner)?;
            if nz > 0.0 {
                ratio = ratio.max(eval_norm_with(&optdom, &f, &inner)? / nz);
            }
        }
        report.margin(Margin::info(&format!("constant[{z}]"), c));
        report.margin(Margin::finite(&format!("inclusion[{z}]"), ratio));
    }
    if tested == 0 {
        return Ok(report.skip("no catalog space satisfies the hypotheses"));
    }
    Ok(report.finish())
}

/// Search a positive weight `g` factoring `T = I_{m_T} ∘ M_{g⁻¹} ∘ M_g`
/// through `L^q(μ)`, minimizing the product of the two factor norms
/// estimated on samples.
pub fn maurey_rosenthal_factor(t: &Operator, q: f64, samples: usize, ctx: &CheckContext) -> Result<(FnVec, CheckReport)> {
    let budget = &ctx.budget;
    let x = t.domain();
    let mut report = CheckReport::new(
        "maurey-rosenthal",
        &format!("{x} {:?} {:?} q={q} samples={samples}", t.matrix(), t.codomain()),
        budget.seed,
    );
    let ones = FnVec::from(vec![1.0; x.atoms()]);
    if q < 1.0 {
        return Ok((ones, report.skip("needs q ≥ 1")));
    }
    let inner = reduced_budget(budget);
    match convexity_constant(x, q, &inner) {
        Ok(c) => report.margin(Margin::info("c_convexity", c.lower_bound)),
        Err(Error::Divergent { .. }) => return Ok((ones, report.skip("q-convexity of X not established"))),
        Err(e) => return Err(e),
    }
    match concavity_constant(t, q, &inner) {
        Ok(c) => report.margin(Margin::info("c_concavity", c.lower_bound)),
        Err(Error::Divergent { .. }) => return Ok((ones, report.skip("q-concavity of T not established"))),
        Err(e) => return Err(e),
    }
    let optdom = optimal_domain(t, 1.0, q)?;
    let mu = x.measure_arc().clone();
    let lq = SpaceExpr::lp(mu, q)?;
    let active: Vec<usize> = x.active_atoms().iter().collect();
    let n = x.atoms();

    // Test functions: indicators of single atoms and of the active set, plus
    // random samples.
    let mut tests: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    tests.push(x.measure().indicator(x.active_atoms()).into_inner());
    tests.extend(random_samples(x, samples, budget.seed));

    const LOG_RANGE: f64 = 4.0;
    let weight = |u: &[f64]| -> Vec<f64> {
        let mut g = vec![1.0; n];
        for (c, &i) in active.iter().enumerate() {
            g[i] = (LOG_RANGE * (2.0 * u[c] - 1.0)).exp();
        }
        g
    };
    let factors = |g: &[f64]| -> (f64, f64) {
        let mut c1: f64 = 0.0;
        let mut c2: f64 = 0.0;
        for f in &tests {
            let nx = x.norm_raw(f, &inner);
            let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
            if nx > 0.0 {
                c1 = c1.max(lq.norm_raw(&fg, &inner) / nx);
            }
            let nq = lq.norm_raw(f, &inner);
            let f_over_g: Vec<f64> = f.iter().zip(g).map(|(a, b)| a / b).collect();
            if nq > 0.0 {
                c2 = c2.max(optdom.norm_raw(&f_over_g, &inner) / nq);
            }
        }
        (c1, c2)
    };
    let objective = |u: &[f64]| {
        let (c1, c2) = factors(&weight(u));
        let v = c1 * c2;
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    };
    let mut rng = stream_rng(budget.seed, &[0x4d52]);
    let opts = PatternOptions {
        initial_step: 0.125,
        min_step: 1e-4,
        max_evals: 60 * active.len().max(1),
        random_directions: 1,
    };
    let mut best = (objective(&vec![0.5; active.len()]), vec![0.5; active.len()]);
    let starts = 1 + budget.restarts.min(3);
    for s in 0..starts {
        let u0: Vec<f64> = if s == 0 {
            vec![0.5; active.len()]
        } else {
            (0..active.len()).map(|_| rand::Rng::random_range(&mut rng, 0.2..0.8)).collect()
        };
        let (u, v) = pattern_search_box(&objective, u0, opts, &mut rng);
        if v < best.0 {
            best = (v, u);
        }
    }
    let g = weight(&best.1);
    let (c1, c2) = factors(&g);

    // T f = I_{m_T}(g⁻¹ · (g f)) on every test function.
    let m = measure_from_operator(t)?;
    let mut disc: f64 = 0.0;
    for f in &tests {
        let tf = t.apply(f)?;
        let gf: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a * b).collect();
        let back: Vec<f64> = gf.iter().zip(&g).map(|(a, b)| a / b).collect();
        let canon = x.measure().canonical(&back)?;
        let im = m.integrate(&canon, MSet::full(n))?;
        let d = tf.iter().zip(&im).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        disc = disc.max(d / sup_abs(&tf).max(1.0));
    }
    report.margin(Margin::info("c1", c1));
    report.margin(Margin::info("c2", c2));
    report.margin(Margin::at_most("commutation_discrepancy", disc, ctx.tolerances.linear));
    report.evidence("weight", vec![FnVec::from(g.clone())], Some(c1 * c2));
    if !(c1 * c2).is_finite() {
        return Ok((FnVec::from(g), report.skip("no weight with finite factor norms found; inconclusive")));
    }
    report.margin(Margin::finite("c1_c2", c1 * c2));
    Ok((FnVec::from(g), report.finish()))
}
