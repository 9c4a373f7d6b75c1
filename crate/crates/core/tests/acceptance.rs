//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use latticelab::concavity::{
    concavity_constant, convexity_constant, estimate, oracle_constant, oracle_core_norm, OracleOptions, Problem,
};
use latticelab::theorems::*;
use latticelab::{core_norm, eval_norm, Budget, Error, MeasureSpace, NormedCodomain, Operator, SpaceExpr};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn ctx() -> CheckContext {
    CheckContext::new(Budget::default())
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn lp(n: usize, p: f64) -> SpaceExpr {
    SpaceExpr::lp(MeasureSpace::uniform(n).unwrap(), p).unwrap()
}

fn norm_evaluators() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1);
    let mut worst_hom: f64 = 0.0;
    let mut worst_ideal: f64 = 0.0;
    let mut cases = 0;
    while cases < 500 {
        let n = rng.random_range(1..=4);
        let m = common::measure(&mut rng, n);
        let depth = rng.random_range(0..=2);
        let x = common::space(&mut rng, &m, depth);
        let f = common::sample_in(&mut rng, &x);
        let Ok(nf) = eval_norm(&x, &f) else { continue };
        cases += 1;
        let alpha = rng.random_range(-4.0..4.0);
        let scaled: Vec<f64> = f.iter().map(|v| alpha * v).collect();
        let ns = eval_norm(&x, &scaled).unwrap();
        worst_hom = worst_hom.max(rel(ns, alpha.abs() * nf));
        let g: Vec<f64> = f
            .iter()
            .map(|v| {
                let s = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
                s * rng.random_range(0.0..=1.0) * v
            })
            .collect();
        let ng = eval_norm(&x, &g).unwrap();
        if ng > nf {
            worst_ideal = worst_ideal.max((ng - nf) / nf);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_hom <= 1e-12 && worst_ideal <= 1e-12 && secs < 10.0,
        format!("500 cases, homogeneity {worst_hom:.2e}, ideal excess {worst_ideal:.2e}, {secs:.1}s"),
    )
}

/// Run the oracle at the finest grid it accepts.
fn fitted<T>(mut run: impl FnMut(&OracleOptions) -> latticelab::Result<T>, start_grid: usize) -> T {
    let mut opts = OracleOptions {
        grid: start_grid,
        cap: 2e6,
        ..OracleOptions::default()
    };
    loop {
        match run(&opts) {
            Err(Error::OracleTooLarge { .. }) if opts.grid > 2 => opts.grid -= 1,
            other => return other.unwrap(),
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let budget = Budget::default();
    let mut rng = common::rng(2);
    let mut worst: f64 = 0.0;
    let mut label = String::new();
    let mut count = 0;
    let mut record = |what: String, est: f64, oracle: f64| {
        count += 1;
        let shortfall = if oracle > 0.0 { (oracle - est) / oracle } else { 0.0 };
        if shortfall > worst {
            worst = shortfall;
            label = what;
        }
    };
    for n in 2..=3 {
        for p in [0.5, 1.0, 2.0, 3.0, f64::INFINITY] {
            let m = common::measure(&mut rng, n);
            let x = SpaceExpr::lp(m.clone(), p).unwrap();
            for q in [1.0, 2.0, 3.0] {
                let f: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
                let est = core_norm(&x, q, &f, &budget).unwrap().value;
                let o = fitted(|o| oracle_core_norm(&x, q, &f, o), 60).value;
                record(format!("core {x} q={q}"), est, o);
                let (rows, s) = (rng.random_range(1..=3), [1.0, 2.0][rng.random_range(0..2)]);
                let t = common::operator(&mut rng, &x, rows, s);
                let prob = Problem::Concavity { op: t.clone(), q };
                let est = concavity_constant(&t, q, &budget).unwrap().lower_bound;
                let o = fitted(|o| oracle_constant(&prob, o), 10).value;
                record(format!("concavity {x} q={q}"), est, o);
            }
            for s in [1.0, 2.0, 3.0] {
                let prob = Problem::Convexity { space: x.clone(), p: s };
                match estimate(&prob, &budget) {
                    Ok(e) => {
                        let o = fitted(|o| oracle_constant(&prob, o), 10).value;
                        record(format!("convexity {x} p={s}"), e.lower_bound, o);
                    }
                    Err(Error::Divergent { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 0.02 && secs < 300.0,
        format!("{count} instances, worst shortfall {:.3}% ({label}), {secs:.1}s", 100.0 * worst),
    )
}

fn closed_forms() -> Outcome {
    let budget = Budget::default();
    let linf = lp(2, f64::INFINITY);
    let t = Operator::identity(&linf, f64::INFINITY).unwrap();
    let c = concavity_constant(&t, 1.0, &budget).unwrap().lower_bound;
    let l1 = lp(2, 1.0);
    let v = convexity_constant(&l1, 2.0, &budget).unwrap().lower_bound;
    let ok = rel(c, 2.0) <= 0.02 && rel(v, 2f64.sqrt()) <= 0.02;
    outcome(ok, format!("1-concavity of id on l^inf_2 = {c:.6}, 2-convexity of l^1_2 = {v:.6}"))
}

fn l1m_dual() -> Outcome {
    let mut rng = common::rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let dim = rng.random_range(1..=4);
        let m = common::vector_measure(&mut rng, n, dim, 2.0);
        let f = common::gaussian(&mut rng, n);
        let a = m.l1m_norm(&f).unwrap();
        let b = m.l1m_norm_dual_l2(&f).unwrap();
        worst = worst.max(rel(a, b));
    }
    outcome(worst <= 1e-9, format!("200 instances, worst relative gap {worst:.2e}"))
}

fn power_core() -> Outcome {
    let linf = lp(2, f64::INFINITY);
    let r = check_power_core(&linf, 2.0, 2.0, &[vec![3.0, 4.0]], &ctx()).unwrap();
    let value = r.margin_value("worst_power_of_core").unwrap();
    let mut ok = r.passed() && rel(value, 337f64.powf(0.25)) <= 1e-3;
    let mut worst = r.margin_value("max_relative_discrepancy").unwrap();
    let mut rng = common::rng(5);
    for i in 0..20 {
        let n = rng.random_range(1..=3);
        let m = common::measure(&mut rng, n);
        let x = common::leaf(&mut rng, &m);
        let p = [0.5, 1.0, 2.0, 3.0][rng.random_range(0..4)];
        let q = [0.5, 1.0, 2.0, 3.0][rng.random_range(0..4)];
        let samples = random_samples(&x, 4, i);
        let r = check_power_core(&x, p, q, &samples, &ctx()).unwrap();
        worst = worst.max(r.margin_value("max_relative_discrepancy").unwrap());
        ok &= r.passed();
    }
    outcome(ok, format!("l^inf_2 instance {value:.6}, 20 random, worst discrepancy {worst:.2e}"))
}

fn extension() -> Outcome {
    let mut rng = common::rng(6);
    let mut worst: f64 = 0.0;
    let mut all = true;
    for i in 0..100 {
        let n = rng.random_range(1..=5);
        let rows = rng.random_range(1..=5);
        let m = common::measure(&mut rng, n);
        let x = common::leaf(&mut rng, &m);
        let s = [1.0, 2.0, f64::INFINITY][rng.random_range(0..3)];
        let t = common::operator(&mut rng, &x, rows, s);
        let samples = random_samples(&x, 2, i);
        let r = check_extension(&t, 1.0, 1.0, &samples, &ctx()).unwrap();
        worst = worst.max(r.margin_value("extension_discrepancy").unwrap());
        all &= r.passed();
    }
    outcome(all && worst <= 1e-9, format!("100 instances, worst discrepancy {worst:.2e}"))
}

fn optimal_domain_instance() -> Outcome {
    let x = lp(2, 2.0);
    let t = Operator::new(vec![vec![1.0, 1.0]], &x, NormedCodomain::ell(2.0, 1).unwrap()).unwrap();
    let d = optimal_domain(&t, 1.0, 1.0).unwrap();
    let mut rng = common::rng(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = common::gaussian(&mut rng, 2);
        let l1 = f[0].abs() + f[1].abs();
        worst = worst.max(rel(d.norm(&f).unwrap(), l1));
    }
    let ones = [1.0, 1.0];
    let ratio = d.norm(&ones).unwrap() / x.norm(&ones).unwrap();
    outcome(
        worst <= 1e-3,
        format!("50 samples, worst gap to l^1 {worst:.2e}; optimal-domain/l^2 norm ratio at (1,1) {ratio:.6}"),
    )
}

fn representation() -> Outcome {
    let budget = Budget::default();
    let weighted = SpaceExpr::lp_weighted(MeasureSpace::uniform(3).unwrap(), 3.0, vec![0.5, 1.0, 2.0]).unwrap();
    let cases = [(lp(3, 1.0), 1.0), (lp(3, 2.0), 2.0), (weighted, 3.0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (z, p)) in cases.iter().enumerate() {
        let samples = random_samples(z, 50, i as u64);
        let r = check_representation(z, *p, *p, &samples, &ctx()).unwrap();
        let gap = r.margin_value("max_relative_norm_gap").unwrap();
        let ci = r.margin_value("c_integration_q_over_p").unwrap();
        let cz = latticelab::concavity::space_concavity_constant(z, *p, &budget).unwrap().lower_bound;
        ok &= r.passed() && gap <= 1e-6 && ci <= 1.05 * cz;
        parts.push(format!("{z}: gap {gap:.1e}, C_I {ci:.4} vs C_Z {cz:.4}"));
    }
    outcome(ok, parts.join("; "))
}

fn sum_lemma() -> Outcome {
    let mut rng = common::rng(9);
    let mut fails = 0;
    let mut skips = 0;
    for i in 0..20 {
        let n = rng.random_range(1..=3);
        let m = common::measure(&mut rng, n);
        let x = common::leaf(&mut rng, &m);
        let y = common::leaf(&mut rng, &m);
        let xy = SpaceExpr::sum(&x, &y).unwrap();
        let (rows, s) = (rng.random_range(1..=3), [1.0, 2.0][rng.random_range(0..2)]);
        let t = common::operator(&mut rng, &xy, rows, s);
        let q = [1.0, 2.0, 3.0][rng.random_range(0..3)];
        let c = CheckContext::new(Budget::default().with_seed(i));
        let r = check_sum_lemma(&x, &y, &t, q, &c).unwrap();
        match r.status {
            Status::Fail => fails += 1,
            Status::Skip => skips += 1,
            Status::Pass => {}
        }
    }
    outcome(fails == 0, format!("20 instances, {fails} violations, {skips} skipped"))
}

fn maurey_rosenthal() -> Outcome {
    let x = lp(2, 2.0);
    let t = Operator::diagonal(&x, &[2.0, 1.0], 2.0).unwrap();
    let (g, r) = maurey_rosenthal_factor(&t, 2.0, 8, &ctx()).unwrap();
    let c = r.margin_value("c1_c2").unwrap_or(f64::INFINITY);
    let d = r.margin_value("commutation_discrepancy").unwrap_or(f64::INFINITY);
    outcome(
        r.passed() && c.is_finite() && d <= 1e-9,
        format!("g = {:?}, c1*c2 = {c:.6}, commutation {d:.2e}", &g[..]),
    )
}

fn quasinorm() -> Outcome {
    let r = check_quasinorm_profile(&lp(2, 0.5), 10_000, 1_000, &ctx()).unwrap();
    let k = r.margin_value("k_observed").unwrap();
    let rs = r.margin_value("rsum_worst_ratio").unwrap();
    outcome(
        r.passed() && k <= 2.0,
        format!("observed K {k:.6} (declared 2), worst r-sum ratio {rs:.6}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("norm evaluators", norm_evaluators),
        ("oracle equivalence", oracle_equivalence),
        ("closed-form constants", closed_forms),
        ("L1(m) sign enumeration vs dual ball", l1m_dual),
        ("power/core commutation", power_core),
        ("extension identity", extension),
        ("optimal domain of [[1,1]]", optimal_domain_instance),
        ("representation", representation),
        ("sum lemma", sum_lemma),
        ("Maurey-Rosenthal factor", maurey_rosenthal),
        ("quasi-norm profile", quasinorm),
    ];
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    let mut total = Duration::ZERO;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let o = run();
        total += start.elapsed();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failed += 1;
        }
        println!("[{tag}] {:>2}. {name}: {}", i + 1, o.detail);
    }
    println!("{} of {ran} criteria passed in {:.1}s", ran - failed, total.as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
