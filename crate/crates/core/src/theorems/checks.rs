use super::report::{reduced_budget, relative_gap, CheckContext, CheckReport, Margin};
use crate::codomain::NormedCodomain;
use crate::concavity::{
    concavity_constant, convexity_constant, power_concavity_constant, space_concavity_constant, ConstantEstimate,
    Problem,
};
use crate::error::{Error, Result};
use crate::measure::{FnVec, MSet};
use crate::operator::Operator;
use crate::space::{core_modulus_factor, eval_norm_with, quasinorm_profile_with, ProfileOptions, SpaceExpr};
use crate::vector_measure::VectorMeasure;

/// `‖f‖_{(qX)^p}` against `‖f‖_{(qp)(X^p)}` on every sample.
pub fn check_power_core(x: &SpaceExpr, p: f64, q: f64, samples: &[Vec<f64>], ctx: &CheckContext) -> Result<CheckReport> {
    let budget = &ctx.budget;
    let first = SpaceExpr::power(&SpaceExpr::core(x, q)?, p)?;
    let second = SpaceExpr::core(&SpaceExpr::power(x, p)?, q * p)?;
    let mut report = CheckReport::new("power-core", &format!("{x} p={p} q={q} samples={samples:?}"), budget.seed);
    let mut worst = (0.0, 0usize, 0.0, 0.0);
    for (i, f) in samples.iter().enumerate() {
        let a = eval_norm_with(&first, f, budget)?;
        let b = eval_norm_with(&second, f, budget)?;
        let gap = relative_gap(a, b);
        if i == 0 || gap > worst.0 || (gap == worst.0 && a > worst.2) {
            worst = (gap, i, a, b);
        }
    }
    report.margin(Margin::at_most("max_relative_discrepancy", worst.0, ctx.tolerances.optimizer));
    if let Some(f) = samples.get(worst.1) {
        report.evidence("worst_sample", vec![FnVec::from(f.clone())], None);
        report.margin(Margin::info("worst_power_of_core", worst.2));
        report.margin(Margin::info("worst_core_of_power", worst.3));
    }
    Ok(report.finish())
}

fn divergent_skip(report: CheckReport, what: &str, err: Error) -> Result<CheckReport> {
    match err {
        Error::Divergent { .. } => Ok(report.skip(format!("{what}: {err}"))),
        other => Err(other),
    }
}

/// `max(C_X, C_Y) ≤ C_{X+Y} ≤ 2^{1+|1-1/q|} K max(C_X, C_Y)` for the
/// q-concavity constants of the same matrix on `X`, `Y` and `X+Y`. `K = 1`
/// because codomains are normed.
pub fn check_sum_lemma(x: &SpaceExpr, y: &SpaceExpr, t: &Operator, q: f64, ctx: &CheckContext) -> Result<CheckReport> {
    let budget = &ctx.budget;
    let sum = SpaceExpr::sum(x, y)?;
    let mut report = CheckReport::new(
        "sum-lemma",
        &format!("{x} | {y} | {:?} | {:?} q={q}", t.matrix(), t.codomain()),
        budget.seed,
    );
    let (tx, ty, ts) = (t.with_domain(x)?, t.with_domain(y)?, t.with_domain(&sum)?);
    let cx = match concavity_constant(&tx, q, budget) {
        Ok(c) => c,
        Err(e) => return divergent_skip(report, "constant on X", e),
    };
    let cy = match concavity_constant(&ty, q, budget) {
        Ok(c) => c,
        Err(e) => return divergent_skip(report, "constant on Y", e),
    };
    let cs = match concavity_constant(&ts, q, budget) {
        Ok(c) => c,
        Err(e) => return divergent_skip(report, "constant on X+Y", e),
    };
    // The witnesses for X and Y are admissible on X+Y, whose norm is smaller.
    let on_sum = Problem::Concavity { op: ts, q };
    let rx = on_sum.ratio(&cx.witness.family, budget)?;
    let ry = on_sum.ratio(&cy.witness.family, budget)?;
    let c_sum = cs.lower_bound.max(rx).max(ry);
    let c_max = cx.lower_bound.max(cy.lower_bound);
    let factor = core_modulus_factor(q);
    let scale = c_max.max(c_sum).max(f64::MIN_POSITIVE);
    report.margin(Margin::info("c_x", cx.lower_bound));
    report.margin(Margin::info("c_y", cy.lower_bound));
    report.margin(Margin::info("c_sum", c_sum));
    report.margin(Margin::info("upper_factor", factor));
    report.margin(Margin::at_most("lower_violation", ((c_max - c_sum) / scale).max(0.0), ctx.tolerances.optimizer));
    report.margin(Margin::at_most(
        "upper_violation",
        ((c_sum - factor * c_max) / scale).max(0.0),
        ctx.tolerances.optimizer,
    ));
    report.evidence("witness_x", cx.witness.family, Some(cx.lower_bound));
    report.evidence("witness_y", cy.witness.family, Some(cy.lower_bound));
    report.evidence("witness_sum", cs.witness.family, Some(cs.lower_bound));
    Ok(report.finish())
}

fn estimate_or_skip(result: Result<ConstantEstimate>, report: &mut CheckReport, what: &str) -> Result<Option<ConstantEstimate>> {
    match result {
        Ok(e) => Ok(Some(e)),
        Err(err @ Error::Divergent { .. }) => {
            report.note(format!("{what}: {err}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// The q-concavity constants of `I_m: L¹(m) → E` and of the space `L¹(m)`
/// coincide; both are searched and compared within the constant tolerance.
pub fn check_im_concavity(m: &VectorMeasure, q: f64, ctx: &CheckContext) -> Result<CheckReport> {
    let budget = &ctx.budget;
    let mut report = CheckReport::new("im-concavity", &format!("{:?} {:?} q={q}", m.values(), m.codomain()), budget.seed);
    if m.is_zero() {
        return Ok(report.skip("zero measure: both constants vanish identically"));
    }
    let l1 = m.l1_space()?;
    let im = m.integration_operator(&l1)?;
    let Some(ci) = estimate_or_skip(concavity_constant(&im, q, budget), &mut report, "I_m")? else {
        return Ok(report.skip("constant of I_m diverges"));
    };
    let Some(cl) = estimate_or_skip(space_concavity_constant(&l1, q, budget), &mut report, "L1(m)")? else {
        return Ok(report.skip("constant of L1(m) diverges"));
    };
    report.margin(Margin::info("c_integration", ci.lower_bound));
    report.margin(Margin::info("c_space", cl.lower_bound));
    report.margin(Margin::at_most(
        "relative_gap",
        relative_gap(ci.lower_bound, cl.lower_bound),
        ctx.tolerances.constant,
    ));
    report.evidence("witness_integration", ci.witness.family, Some(ci.lower_bound));
    report.evidence("witness_space", cl.witness.family, Some(cl.lower_bound));
    report.note("agreement band of the constant tolerance operationalizes equality of the two constants");
    Ok(report.finish())
}

/// `I_m: Lᵖ(m) → E` is (p,q)-power-concave iff `Lᵖ(m)` is q-concave; the
/// searched constants must both be finite and within a factor of 10.
pub fn check_lpm_power_concavity(m: &VectorMeasure, p: f64, q: f64, ctx: &CheckContext) -> Result<CheckReport> {
    let budget = &ctx.budget;
    if p < 1.0 {
        return Err(Error::InvalidExponent {
            name: "p",
            value: p,
            reason: "the statement needs p ≥ 1",
        });
    }
    if m.defined() != MSet::full(m.atoms()) {
        return Err(Error::InvalidArgument("χ_Ω is not m-integrable: some atoms lie outside the δ-ring".into()));
    }
    if p == 1.0 {
        let mut r = check_im_concavity(m, q, ctx)?;
        r.theorem_id = "lpm-power-concavity".into();
        return Ok(r);
    }
    let mut report = CheckReport::new(
        "lpm-power-concavity",
        &format!("{:?} {:?} p={p} q={q}", m.values(), m.codomain()),
        budget.seed,
    );
    if m.is_zero() {
        return Ok(report.skip("zero measure"));
    }
    let lp = m.lp_space(p)?;
    let im = m.integration_operator(&lp)?;
    let inner = reduced_budget(budget);
    let a = estimate_or_skip(power_concavity_constant(&im, p, q, &inner), &mut report, "I_m")?;
    let b = estimate_or_skip(space_concavity_constant(&lp, q, &inner), &mut report, "Lp(m)")?;
    match (a, b) {
        (Some(a), Some(b)) => {
            report.margin(Margin::finite("c_power_concavity", a.lower_bound));
            report.margin(Margin::finite("c_space_concavity", b.lower_bound));
            let lo = a.lower_bound.min(b.lower_bound);
            let hi = a.lower_bound.max(b.lower_bound);
            let band = if lo > 0.0 { hi / lo } else if hi == 0.0 { 1.0 } else { f64::INFINITY };
            report.margin(Margin::at_most("consistency_band", band, 10.0));
            report.evidence("witness_power_concavity", a.witness.family, Some(a.lower_bound));
            report.evidence("witness_space_concavity", b.witness.family, Some(b.lower_bound));
            Ok(report.finish())
        }
        (None, None) => Ok(report.skip("both constants diverge; consistent but inconclusive")),
        _ => {
            report.margin(Margin::at_most("finiteness_disagreement", 1.0, 0.0));
            Ok(report.finish())
        }
    }
}

/// The measure `A ↦ χ_A` with values in the normed lattice `Z^{1/p}`.
pub fn representing_measure(z: &SpaceExpr, p: f64) -> Result<VectorMeasure> {
    let root = SpaceExpr::power(z, 1.0 / p)?;
    let codomain = NormedCodomain::lattice(root)?;
    let n = z.atoms();
    let values = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            if !z.measure().is_null_atom(i) {
                e[i] = 1.0;
            }
            e
        })
        .collect();
    VectorMeasure::with_defined(values, z.finite_mask(), codomain)
}

/// `Z` coincides with `Lᵖ(m)` for `m(A) = χ_A ∈ Z^{1/p}`, with equal norms.
pub fn check_representation(z: &SpaceExpr, p: f64, q: f64, samples: &[Vec<f64>], ctx: &CheckContext) -> Result<CheckReport> {
    let budget = &ctx.budget;
    let mut report = CheckReport::new("representation", &format!("{z} p={p} q={q} samples={samples:?}"), budget.seed);
    if p < 1.0 {
        return Ok(report.skip("representation needs p ≥ 1"));
    }
    let root = SpaceExpr::power(z, 1.0 / p)?;
    if !root.is_normed() {
        return Ok(report.skip(format!("{root} is not known to be normed (p-convexity constant 1 not established)")));
    }
    let Some(cz) = estimate_or_skip(space_concavity_constant(z, q, budget), &mut report, "q-concavity of Z")? else {
        return Ok(report.skip("q-concavity of Z not established"));
    };
    if p > 1.0 {
        let Some(cv) = estimate_or_skip(convexity_constant(z, p, budget), &mut report, "p-convexity of Z")? else {
            return Ok(report.skip("p-convexity of Z not established"));
        };
        report.margin(Margin::info("c_convexity", cv.lower_bound));
    }
    let m = representing_measure(z, p)?;
    let lp = SpaceExpr::lpm(z.measure_arc().clone(), &m, p)?;
    let mut worst: f64 = 0.0;
    for f in samples {
        let a = eval_norm_with(&lp, f, budget)?;
        let b = eval_norm_with(z, f, budget)?;
        worst = worst.max(relative_gap(a, b));
    }
    report.margin(Margin::at_most("max_relative_norm_gap", worst, ctx.tolerances.closed_form));
    let l1 = SpaceExpr::l1m(z.measure_arc().clone(), &m)?;
    let im = m.integration_operator(&l1)?;
    match concavity_constant(&im, q / p, budget) {
        Ok(ci) => {
            report.margin(Margin::finite("c_integration_q_over_p", ci.lower_bound));
            report.evidence("witness_integration", ci.witness.family, Some(ci.lower_bound));
        }
        Err(Error::Divergent { trace }) => {
            report.margin(Margin::finite("c_integration_q_over_p", f64::INFINITY));
            report.note(format!("divergent trace {trace:?}"));
        }
        Err(e) => return Err(e),
    }
    report.margin(Margin::info("c_space", cz.lower_bound));
    Ok(report.finish())
}

/// Observed quasi-triangle constant against the declared modulus, and the
/// r-sum inequality on random families.
pub fn check_quasinorm_profile(x: &SpaceExpr, pairs: usize, families: usize, ctx: &CheckContext) -> Result<CheckReport> {
    let budget = &ctx.budget;
    let mut report = CheckReport::new(
        "quasinorm-profile",
        &format!("{x} pairs={pairs} families={families}"),
        budget.seed,
    );
    let prof = quasinorm_profile_with(x, ProfileOptions::new(pairs, families), budget)?;
    let slack = if x.is_searched() { ctx.tolerances.optimizer } else { 1e-12 };
    report.margin(Margin::at_most("k_observed", prof.k_observed, prof.declared_k * (1.0 + slack)));
    report.margin(Margin::at_most("rsum_worst_ratio", prof.worst_rsum_ratio, 1.0 + slack));
    report.margin(Margin::info("declared_k", prof.declared_k));
    report.margin(Margin::info("r_implied", prof.r_implied));
    if let Some((a, b)) = prof.worst_pair {
        report.evidence("worst_pair", vec![a, b], Some(prof.k_observed));
    }
    for c in prof.counterexamples.into_iter().take(3) {
        report.evidence("rsum_counterexample", c.family, Some(c.lhs / c.rhs));
    }
    Ok(report.finish())
}
