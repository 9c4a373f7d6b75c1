//! Run configuration: a JSON document declaring the measure space, named
//! spaces, operators and vector measures, plus search settings.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use latticelab::theorems::{representing_measure, Tolerances};
use latticelab::{measure_from_operator, Budget, MSet, MeasureSpace, NormedCodomain, Operator, SpaceExpr, VectorMeasure};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Atom weights; `"inf"` for infinite atoms. Defaults to two unit atoms.
    #[serde(default)]
    pub measure: Option<Vec<Value>>,
    #[serde(default)]
    pub spaces: BTreeMap<String, Value>,
    #[serde(default)]
    pub operators: BTreeMap<String, Value>,
    #[serde(default)]
    pub measures: BTreeMap<String, Value>,
    #[serde(default)]
    pub budget: Option<Budget>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub precision: Option<usize>,
    /// Per-checker instance parameters keyed by checker id.
    #[serde(default)]
    pub checks: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }
}

pub fn real(v: &Value, what: &str) -> Result<f64, CliError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| CliError::Config(format!("{what}: not a real number"))),
        Value::String(s) => match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(f64::INFINITY),
            other => other
                .parse()
                .map_err(|_| CliError::Config(format!("{what}: expected a number or \"inf\", got {s:?}"))),
        },
        _ => Err(CliError::Config(format!("{what}: expected a number or \"inf\""))),
    }
}

pub fn reals(v: &Value, what: &str) -> Result<Vec<f64>, CliError> {
    match v {
        Value::Array(items) => items.iter().map(|x| real(x, what)).collect(),
        _ => Err(CliError::Config(format!("{what}: expected an array"))),
    }
}

pub fn matrix(v: &Value, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    match v {
        Value::Array(rows) => rows.iter().map(|r| reals(r, what)).collect(),
        _ => Err(CliError::Config(format!("{what}: expected an array of rows"))),
    }
}

/// 1-based atom indices to a set.
pub fn atom_set(indices: &[usize], n: usize) -> Result<MSet, CliError> {
    let mut set = MSet::EMPTY;
    for &i in indices {
        if i == 0 || i > n {
            return Err(CliError::Config(format!("atom index {i} outside 1..={n}")));
        }
        set = set.union(MSet::singleton(i - 1));
    }
    Ok(set)
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, what: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| CliError::Config(format!("{what}: missing field {key:?}")))
}

/// Resolves names against a configuration, memoizing and detecting cycles.
pub struct Resolver<'a> {
    config: &'a RunConfig,
    pub measure: Arc<MeasureSpace>,
    spaces: BTreeMap<String, SpaceExpr>,
    operators: BTreeMap<String, Operator>,
    measures: BTreeMap<String, VectorMeasure>,
    visiting: BTreeSet<String>,
}

impl<'a> Resolver<'a> {
    pub fn new(config: &'a RunConfig) -> Result<Self, CliError> {
        let weights = match &config.measure {
            Some(w) => w.iter().map(|x| real(x, "measure")).collect::<Result<Vec<_>, _>>()?,
            None => vec![1.0, 1.0],
        };
        Ok(Self {
            config,
            measure: Arc::new(MeasureSpace::new(weights)?),
            spaces: BTreeMap::new(),
            operators: BTreeMap::new(),
            measures: BTreeMap::new(),
            visiting: BTreeSet::new(),
        })
    }

    fn enter(&mut self, key: String) -> Result<(), CliError> {
        if !self.visiting.insert(key.clone()) {
            return Err(CliError::Config(format!("cyclic definition through {key}")));
        }
        Ok(())
    }

    pub fn space_named(&mut self, name: &str) -> Result<SpaceExpr, CliError> {
        if let Some(x) = self.spaces.get(name) {
            return Ok(x.clone());
        }
        let raw = self
            .config
            .spaces
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown space {name:?}")))?;
        self.enter(format!("space {name}"))?;
        let x = self.space(raw)?;
        self.visiting.remove(&format!("space {name}"));
        self.spaces.insert(name.to_string(), x.clone());
        Ok(x)
    }

    /// A space given by name or inline object.
    pub fn space(&mut self, v: &Value) -> Result<SpaceExpr, CliError> {
        let obj = match v {
            Value::String(name) => return self.space_named(name),
            Value::Object(obj) => obj,
            _ => return Err(CliError::Config("space: expected a name or an object".into())),
        };
        let m = self.measure.clone();
        if let Some(p) = obj.get("lp") {
            let p = real(p, "lp")?;
            return Ok(match obj.get("weights") {
                Some(w) => SpaceExpr::lp_weighted(m, p, reals(w, "weights")?)?,
                None => SpaceExpr::lp(m, p)?,
            });
        }
        if let Some(base) = obj.get("power") {
            let base = self.space(base)?;
            return Ok(SpaceExpr::power(&base, real(field(obj, "p", "power")?, "p")?)?);
        }
        if let Some(core) = obj.get("core") {
            let base = self.space(core)?;
            return Ok(SpaceExpr::core(&base, real(field(obj, "q", "core")?, "q")?)?);
        }
        for key in ["sum", "intersection"] {
            if let Some(pair) = obj.get(key) {
                let Some([a, b]) = pair.as_array().map(Vec::as_slice) else {
                    return Err(CliError::Config(format!("{key}: expected two spaces")));
                };
                let (a, b) = (self.space(a)?, self.space(b)?);
                return Ok(if key == "sum" {
                    SpaceExpr::sum(&a, &b)?
                } else {
                    SpaceExpr::intersection(&a, &b)?
                });
            }
        }
        if let Some(mv) = obj.get("l1m") {
            let vm = self.vector_measure(mv)?;
            return Ok(SpaceExpr::l1m(m, &vm)?);
        }
        if let Some(mv) = obj.get("lpm") {
            let vm = self.vector_measure(mv)?;
            return Ok(SpaceExpr::lpm(m, &vm, real(field(obj, "p", "lpm")?, "p")?)?);
        }
        Err(CliError::Config(format!("space: unrecognized expression {v}")))
    }

    pub fn codomain(&mut self, v: &Value, rows: usize) -> Result<NormedCodomain, CliError> {
        let obj = v
            .as_object()
            .ok_or_else(|| CliError::Config("codomain: expected an object".into()))?;
        if let Some(s) = obj.get("l") {
            return Ok(NormedCodomain::ell(real(s, "codomain exponent")?, rows)?);
        }
        if let Some(space) = obj.get("lattice") {
            return Ok(NormedCodomain::lattice(self.space(space)?)?);
        }
        Err(CliError::Config("codomain: expected {\"l\": s} or {\"lattice\": space}".into()))
    }

    pub fn operator_named(&mut self, name: &str) -> Result<Operator, CliError> {
        if let Some(t) = self.operators.get(name) {
            return Ok(t.clone());
        }
        let raw = self
            .config
            .operators
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown operator {name:?}")))?;
        self.enter(format!("operator {name}"))?;
        let t = self.operator(raw)?;
        self.visiting.remove(&format!("operator {name}"));
        self.operators.insert(name.to_string(), t.clone());
        Ok(t)
    }

    /// `{"matrix": [[..]], "domain": space, "codomain": {"l": s}}`; the
    /// matrix has one row per codomain coordinate.
    pub fn operator(&mut self, v: &Value) -> Result<Operator, CliError> {
        let obj = match v {
            Value::String(name) => return self.operator_named(name),
            Value::Object(obj) => obj,
            _ => return Err(CliError::Config("operator: expected a name or an object".into())),
        };
        let domain = self.space(field(obj, "domain", "operator")?)?;
        let rows = if let Some(d) = obj.get("diagonal") {
            let d = reals(d, "diagonal")?;
            (0..d.len())
                .map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect())
                .collect()
        } else {
            matrix(field(obj, "matrix", "operator")?, "matrix")?
        };
        let codomain = match obj.get("codomain") {
            Some(c) => self.codomain(c, rows.len())?,
            None => NormedCodomain::ell(2.0, rows.len())?,
        };
        Ok(Operator::new(rows, &domain, codomain)?)
    }

    pub fn measure_named(&mut self, name: &str) -> Result<VectorMeasure, CliError> {
        if let Some(m) = self.measures.get(name) {
            return Ok(m.clone());
        }
        let raw = self
            .config
            .measures
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown vector measure {name:?}")))?;
        self.enter(format!("measure {name}"))?;
        let m = self.vector_measure(raw)?;
        self.visiting.remove(&format!("measure {name}"));
        self.measures.insert(name.to_string(), m.clone());
        Ok(m)
    }

    /// `{"atoms": [[..] per atom], "codomain": .., "defined": [1-based]}`,
    /// `{"operator": T}` for `m_T`, or `{"representing": Z, "p": p}`.
    pub fn vector_measure(&mut self, v: &Value) -> Result<VectorMeasure, CliError> {
        let obj = match v {
            Value::String(name) => return self.measure_named(name),
            Value::Object(obj) => obj,
            _ => return Err(CliError::Config("measure: expected a name or an object".into())),
        };
        if let Some(t) = obj.get("operator") {
            let t = self.operator(t)?;
            return Ok(measure_from_operator(&t)?);
        }
        if let Some(z) = obj.get("representing") {
            let z = self.space(z)?;
            let p = obj.get("p").map(|p| real(p, "p")).transpose()?.unwrap_or(1.0);
            return Ok(representing_measure(&z, p)?);
        }
        let values = matrix(field(obj, "atoms", "measure")?, "atoms")?;
        let dim = values.first().map_or(0, Vec::len);
        let codomain = match obj.get("codomain") {
            Some(c) => self.codomain(c, dim)?,
            None => NormedCodomain::ell(2.0, dim)?,
        };
        match obj.get("defined") {
            Some(d) => {
                let idx: Vec<usize> = serde_json::from_value(d.clone())
                    .map_err(|e| CliError::Config(format!("defined: {e}")))?;
                let set = atom_set(&idx, values.len())?;
                Ok(VectorMeasure::with_defined(values, set, codomain)?)
            }
            None => Ok(VectorMeasure::new(values, codomain)?),
        }
    }
}
