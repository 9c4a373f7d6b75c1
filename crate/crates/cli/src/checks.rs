//! Checker instances: read from the `checks` section of the config, or the
//! built-in default instance of each checker.

use latticelab::theorems::{self, random_samples, CheckContext, CheckReport, MaximalityOptions};
use latticelab::{measure_from_operator, NormedCodomain, Operator, SpaceExpr};
use serde_json::{json, Value};

use crate::config::{matrix, real, Resolver};
use crate::CliError;

pub type Job = Box<dyn FnOnce() -> latticelab::Result<CheckReport> + Send>;

/// Parameters shared by every job.
#[derive(Clone)]
pub struct JobSettings {
    pub ctx: CheckContext,
    pub samples: usize,
}

fn default_instance(id: &str) -> Value {
    match id {
        "power-core" => json!({"measure": [1, 1], "space": {"lp": "inf"}, "p": 2, "q": 2, "samples": [[3, 4]]}),
        "sum-lemma" => json!({
            "measure": [1, 1], "x": {"lp": 1}, "y": {"lp": "inf"},
            "operator": {"matrix": [[1, 0], [0, 1]], "codomain": {"l": 2}}, "q": 2
        }),
        "extension" => json!({
            "measure": [1, 1],
            "operator": {"matrix": [[1, 1]], "domain": {"lp": 2}, "codomain": {"l": 2}},
            "p": 1, "q": 1, "samples": [[3, -4]]
        }),
        "maximality" => json!({
            "measure": [1, 1],
            "operator": {"matrix": [[1, 1]], "domain": {"lp": 2}, "codomain": {"l": 2}},
            "p": 1, "q": 1, "catalog": [{"lp": 1}]
        }),
        "im-concavity" => json!({"measure": [1, 1], "vector_measure": {"atoms": [[1, 0], [0, 1]], "codomain": {"l": 2}}, "q": 2}),
        "lpm-power-concavity" => json!({
            "measure": [1, 1], "vector_measure": {"atoms": [[1, 0], [0, 1]], "codomain": {"l": 2}}, "p": 2, "q": 2
        }),
        "representation" => json!({"measure": [1, 1], "space": {"lp": 2}, "p": 2, "q": 2}),
        "maurey-rosenthal" => json!({
            "measure": [1, 1],
            "operator": {"diagonal": [2, 1], "domain": {"lp": 2}, "codomain": {"l": 2}}, "q": 2
        }),
        "quasinorm-profile" => json!({"measure": [1, 1], "space": {"lp": 0.5}, "pairs": 10000, "families": 1000}),
        _ => Value::Null,
    }
}

fn num(obj: &Value, key: &str, default: f64) -> Result<f64, CliError> {
    obj.get(key).map_or(Ok(default), |v| real(v, key))
}

fn count(obj: &Value, key: &str, default: usize) -> Result<usize, CliError> {
    match obj.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| CliError::Config(format!("{key}: expected a nonnegative integer"))),
    }
}

fn get<'v>(obj: &'v Value, key: &str, id: &str) -> Result<&'v Value, CliError> {
    obj.get(key)
        .ok_or_else(|| CliError::Config(format!("check {id}: missing field {key:?}")))
}

/// Explicit samples followed by random ones up to `n`.
fn samples(obj: &Value, x: &SpaceExpr, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    let mut out = match obj.get("samples") {
        Some(v) => matrix(v, "samples")?,
        None => Vec::new(),
    };
    let extra = n.saturating_sub(out.len());
    out.extend(random_samples(x, extra, seed));
    Ok(out)
}

/// Operators in default instances carry no domain when it is implied.
fn operator_on(res: &mut Resolver, v: &Value, domain: &SpaceExpr) -> Result<Operator, CliError> {
    if v.get("domain").is_some() || v.is_string() {
        return res.operator(v);
    }
    let rows = matrix(get(v, "matrix", "operator")?, "matrix")?;
    let codomain = match v.get("codomain") {
        Some(c) => res.codomain(c, rows.len())?,
        None => NormedCodomain::ell(2.0, rows.len())?,
    };
    Ok(Operator::new(rows, domain, codomain)?)
}

/// Build the job for checker `id` from the config entry or the default
/// instance.
pub fn job(id: &str, config: &crate::config::RunConfig, settings: &JobSettings) -> Result<Job, CliError> {
    if !theorems::CHECK_IDS.contains(&id) {
        return Err(CliError::Config(format!(
            "unknown checker {id:?}; expected one of {}",
            theorems::CHECK_IDS.join(", ")
        )));
    }
    let configured = config.checks.get(id);
    let obj = configured.cloned().unwrap_or_else(|| default_instance(id));
    // Default instances bring their own measure space.
    let mut local;
    let mut res = match (configured, obj.get("measure")) {
        (None, Some(w)) => {
            local = crate::config::RunConfig::default();
            local.measure = Some(w.as_array().cloned().unwrap_or_default());
            Resolver::new(&local)?
        }
        _ => Resolver::new(config)?,
    };
    let ctx = settings.ctx.clone();
    let seed = ctx.budget.seed;
    let n = settings.samples;
    let job: Job = match id {
        "power-core" => {
            let x = res.space(get(&obj, "space", id)?)?;
            let (p, q) = (num(&obj, "p", 2.0)?, num(&obj, "q", 2.0)?);
            let s = samples(&obj, &x, n, seed)?;
            Box::new(move || theorems::check_power_core(&x, p, q, &s, &ctx))
        }
        "sum-lemma" => {
            let x = res.space(get(&obj, "x", id)?)?;
            let y = res.space(get(&obj, "y", id)?)?;
            let sum = SpaceExpr::sum(&x, &y)?;
            let t = operator_on(&mut res, get(&obj, "operator", id)?, &sum)?;
            let t = t.with_domain(&sum)?;
            let q = num(&obj, "q", 2.0)?;
            Box::new(move || theorems::check_sum_lemma(&x, &y, &t, q, &ctx))
        }
        "extension" => {
            let t = res.operator(get(&obj, "operator", id)?)?;
            let (p, q) = (num(&obj, "p", 1.0)?, num(&obj, "q", 1.0)?);
            let s = samples(&obj, t.domain(), n, seed)?;
            Box::new(move || theorems::check_extension(&t, p, q, &s, &ctx))
        }
        "maximality" => {
            let t = res.operator(get(&obj, "operator", id)?)?;
            let (p, q) = (num(&obj, "p", 1.0)?, num(&obj, "q", 1.0)?);
            let catalog = match obj.get("catalog") {
                Some(Value::Array(items)) => Some(items.iter().map(|v| res.space(v)).collect::<Result<Vec<_>, _>>()?),
                Some(_) => return Err(CliError::Config("catalog: expected an array of spaces".into())),
                None => None,
            };
            let opts = MaximalityOptions {
                catalog,
                bound: num(&obj, "bound", 1e6)?,
                samples: n,
            };
            Box::new(move || theorems::check_maximality(&t, p, q, &opts, &ctx))
        }
        "im-concavity" | "lpm-power-concavity" => {
            let m = match (obj.get("vector_measure"), obj.get("operator")) {
                (Some(v), _) => res.vector_measure(v)?,
                (None, Some(t)) => measure_from_operator(&res.operator(t)?)?,
                _ => return Err(CliError::Config(format!("check {id}: missing field \"vector_measure\""))),
            };
            let q = num(&obj, "q", 2.0)?;
            if id == "im-concavity" {
                Box::new(move || theorems::check_im_concavity(&m, q, &ctx))
            } else {
                let p = num(&obj, "p", 2.0)?;
                Box::new(move || theorems::check_lpm_power_concavity(&m, p, q, &ctx))
            }
        }
        "representation" => {
            let z = res.space(get(&obj, "space", id)?)?;
            let (p, q) = (num(&obj, "p", 1.0)?, num(&obj, "q", 1.0)?);
            let s = samples(&obj, &z, n, seed)?;
            Box::new(move || theorems::check_representation(&z, p, q, &s, &ctx))
        }
        "maurey-rosenthal" => {
            let t = res.operator(get(&obj, "operator", id)?)?;
            let q = num(&obj, "q", 2.0)?;
            Box::new(move || theorems::maurey_rosenthal_factor(&t, q, n, &ctx).map(|(_, r)| r))
        }
        "quasinorm-profile" => {
            let x = res.space(get(&obj, "space", id)?)?;
            let pairs = count(&obj, "pairs", 10_000)?;
            let families = count(&obj, "families", 1_000)?;
            Box::new(move || theorems::check_quasinorm_profile(&x, pairs, families, &ctx))
        }
        _ => unreachable!("checked against CHECK_IDS"),
    };
    Ok(job)
}
