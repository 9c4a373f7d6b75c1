//! `latticelab`: evaluate lattice quasi-norms, estimate concavity constants
//! and run the theorem checkers from a JSON run configuration.
//!
//! Exit codes: 0 success, 1 a check failed, 2 configuration or input error,
//! 3 every check was skipped for an unmet hypothesis.

mod checks;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use latticelab::concavity::{self, ConstantEstimate};
use latticelab::theorems::{CheckContext, Status, CHECK_IDS};
use latticelab::{core_norm, eval_norm_with, simplify, sum_norm, Budget, MSet, VectorMeasure};
use serde_json::{json, Value};

use config::{atom_set, Format, Resolver, RunConfig};
use output::{number, vector, Record};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] latticelab::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Parser)]
#[command(name = "latticelab", version, about = "Quasi-Banach function space laboratory")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "LATTICELAB_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Largest family size / number of decomposition parts searched.
    #[arg(long, global = true)]
    kmax: Option<usize>,
    /// Random samples per checker.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Relative tolerance for search-mediated equalities.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Decimal places in table output.
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norms of a single function.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Concavity, convexity and power-concavity constants.
    #[command(subcommand)]
    Const(ConstCmd),
    /// Vector measures and their integrals.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Run a theorem checker by id, or `all`.
    Check { id: String },
}

#[derive(Subcommand)]
enum SpaceCmd {
    Eval {
        #[arg(long)]
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
    },
    Core {
        #[arg(long)]
        space: String,
        #[arg(long)]
        q: String,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
    },
    Sum {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
    },
    Simplify {
        #[arg(long)]
        space: String,
    },
}

#[derive(Subcommand)]
enum ConstCmd {
    /// q-concavity of an operator (`--op`) or of a space (`--space`).
    Concavity {
        #[arg(long)]
        op: Option<String>,
        #[arg(long, conflicts_with = "op")]
        space: Option<String>,
        #[arg(long)]
        q: String,
    },
    Convexity {
        #[arg(long)]
        space: String,
        #[arg(long)]
        p: String,
    },
    PowerConcavity {
        #[arg(long)]
        op: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
}

/// A vector measure by name, or the measure induced by an operator.
#[derive(Args)]
struct MeasureRef {
    #[arg(long)]
    measure: Option<String>,
    #[arg(long, conflicts_with = "measure")]
    op: Option<String>,
}

#[derive(Subcommand)]
enum MeasureCmd {
    FromOp {
        #[arg(long)]
        op: String,
    },
    Semivar {
        #[command(flatten)]
        m: MeasureRef,
        /// 1-based atom indices; all atoms when omitted.
        #[arg(long)]
        set: Option<String>,
    },
    L1norm {
        #[command(flatten)]
        m: MeasureRef,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
    },
    Lpnorm {
        #[command(flatten)]
        m: MeasureRef,
        #[arg(long)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
    },
    Integrate {
        #[command(flatten)]
        m: MeasureRef,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        set: Option<String>,
    },
}

fn parse_real(s: &str, what: &str) -> Result<f64, CliError> {
    config::real(&Value::String(s.to_string()), what)
}

fn parse_vector(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|t| parse_real(t, "function entry")).collect()
}

fn parse_set(s: Option<&str>, n: usize) -> Result<MSet, CliError> {
    let Some(s) = s else { return Ok(MSet::full(n)) };
    if s.trim().is_empty() {
        return Ok(MSet::EMPTY);
    }
    let idx = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Config(format!("bad atom index {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    atom_set(&idx, n)
}

/// A name from the config, or an inline JSON object.
fn reference(s: &str) -> Result<Value, CliError> {
    if s.trim_start().starts_with('{') {
        serde_json::from_str(s).map_err(|e| CliError::Config(format!("inline expression: {e}")))
    } else {
        Ok(Value::String(s.to_string()))
    }
}

struct Settings {
    budget: Budget,
    ctx: CheckContext,
    samples: usize,
    format: Format,
    precision: usize,
}

fn settings(cli: &Cli, config: &RunConfig) -> Settings {
    let mut budget = config.budget.clone().unwrap_or_default();
    budget.seed = cli.seed.or(config.seed).unwrap_or(budget.seed);
    if let Some(r) = cli.restarts {
        budget.restarts = r;
    }
    if let Some(k) = cli.kmax {
        budget.k_max = Some(k);
    }
    let mut tolerances = config.tolerances.unwrap_or_default();
    if let Some(t) = cli.tol {
        tolerances.optimizer = t;
    }
    Settings {
        ctx: CheckContext {
            budget: budget.clone(),
            tolerances,
        },
        budget,
        samples: cli.samples.or(config.samples).unwrap_or(10),
        format: cli.format.or(config.format).unwrap_or(Format::Table),
        precision: cli.precision.or(config.precision).unwrap_or(12),
    }
}

fn constant_record(id: &str, result: latticelab::Result<ConstantEstimate>, seed: u64) -> Result<Record, CliError> {
    match result {
        Ok(e) => {
            let family: Vec<Value> = e.witness.family.iter().map(|f| vector(f)).collect();
            let mut r = Record::value(id, number(e.lower_bound), seed)
                .with_witness(Value::Array(family))
                .with_margin("witness_ratio", e.witness.reported_ratio);
            if let Some(c) = e.closed_form {
                r = r.with_margin("closed_form", c);
            }
            if e.exact {
                r = r.with_note("matches the closed form");
            }
            Ok(r)
        }
        Err(latticelab::Error::Divergent { trace }) => {
            let steps: Vec<String> = trace.iter().enumerate().map(|(k, v)| format!("k={}: {v}", k + 1)).collect();
            Ok(Record::value(id, number(f64::INFINITY), seed).with_note(format!("divergent: {}", steps.join(", "))))
        }
        Err(e) => Err(e.into()),
    }
}

fn measure_of(res: &mut Resolver, m: &MeasureRef) -> Result<VectorMeasure, CliError> {
    match (&m.measure, &m.op) {
        (Some(name), _) => res.vector_measure(&reference(name)?),
        (None, Some(op)) => Ok(latticelab::measure_from_operator(&res.operator(&reference(op)?)?)?),
        (None, None) => Err(CliError::Config("give --measure or --op".into())),
    }
}

fn run(cli: &Cli, config: &RunConfig, s: &Settings) -> Result<Vec<Record>, CliError> {
    let seed = s.budget.seed;
    let budget = &s.budget;
    let mut res = Resolver::new(config)?;
    let records = match &cli.command {
        Command::Space(cmd) => match cmd {
            SpaceCmd::Eval { space, f } => {
                let x = res.space(&reference(space)?)?;
                let v = eval_norm_with(&x, &parse_vector(f)?, budget)?;
                vec![Record::value("space.eval", number(v), seed)]
            }
            SpaceCmd::Core { space, q, f } => {
                let x = res.space(&reference(space)?)?;
                let c = core_norm(&x, parse_real(q, "q")?, &parse_vector(f)?, budget)?;
                let parts: Vec<Value> = c.decomposition.parts.iter().map(|p| vector(p)).collect();
                let mut r = Record::value("space.core", number(c.value), seed).with_witness(Value::Array(parts));
                for step in &c.trace {
                    r = r.with_margin(&format!("parts_{}", step.parts), step.value);
                }
                if c.exact {
                    r = r.with_note("exact: the partition search attains the supremum");
                }
                vec![r]
            }
            SpaceCmd::Sum { x, y, f } => {
                let x = res.space(&reference(x)?)?;
                let y = res.space(&reference(y)?)?;
                let s = sum_norm(&x, &y, &parse_vector(f)?, budget)?;
                vec![Record::value("space.sum", number(s.value), seed)
                    .with_witness(json!({"left": vector(&s.left), "right": vector(&s.right)}))]
            }
            SpaceCmd::Simplify { space } => {
                let x = res.space(&reference(space)?)?;
                vec![Record::value("space.simplify", json!(simplify(&x).to_string()), seed)]
            }
        },
        Command::Const(cmd) => match cmd {
            ConstCmd::Concavity { op, space, q } => {
                let q = parse_real(q, "q")?;
                match (op, space) {
                    (Some(op), _) => {
                        let t = res.operator(&reference(op)?)?;
                        vec![constant_record("const.concavity", concavity::concavity_constant(&t, q, budget), seed)?]
                    }
                    (None, Some(space)) => {
                        let x = res.space(&reference(space)?)?;
                        let e = concavity::space_concavity_constant(&x, q, budget);
                        vec![constant_record("const.concavity", e, seed)?]
                    }
                    (None, None) => return Err(CliError::Config("give --op or --space".into())),
                }
            }
            ConstCmd::Convexity { space, p } => {
                let x = res.space(&reference(space)?)?;
                let e = concavity::convexity_constant(&x, parse_real(p, "p")?, budget);
                vec![constant_record("const.convexity", e, seed)?]
            }
            ConstCmd::PowerConcavity { op, p, q } => {
                let t = res.operator(&reference(op)?)?;
                let e = concavity::power_concavity_constant(&t, parse_real(p, "p")?, parse_real(q, "q")?, budget);
                vec![constant_record("const.power-concavity", e, seed)?]
            }
        },
        Command::Measure(cmd) => match cmd {
            MeasureCmd::FromOp { op } => {
                let t = res.operator(&reference(op)?)?;
                let m = latticelab::measure_from_operator(&t)?;
                let values: Vec<Value> = m.values().iter().map(|v| vector(v)).collect();
                let defined: Vec<usize> = m.defined().iter().map(|i| i + 1).collect();
                vec![Record::value("measure.from-op", Value::Array(values), seed)
                    .with_note(format!("defined on atoms {defined:?}"))]
            }
            MeasureCmd::Semivar { m, set } => {
                let m = measure_of(&mut res, m)?;
                let a = parse_set(set.as_deref(), m.atoms())?;
                vec![Record::value("measure.semivar", number(m.semivariation(a)?), seed)]
            }
            MeasureCmd::L1norm { m, f } => {
                let m = measure_of(&mut res, m)?;
                vec![Record::value("measure.l1norm", number(m.l1m_norm(&parse_vector(f)?)?), seed)]
            }
            MeasureCmd::Lpnorm { m, p, f } => {
                let m = measure_of(&mut res, m)?;
                let v = m.lpm_norm(parse_real(p, "p")?, &parse_vector(f)?)?;
                vec![Record::value("measure.lpnorm", number(v), seed)]
            }
            MeasureCmd::Integrate { m, f, set } => {
                let m = measure_of(&mut res, m)?;
                let a = parse_set(set.as_deref(), m.atoms())?;
                let v = m.integrate(&parse_vector(f)?, a)?;
                vec![Record::value("measure.integrate", vector(&v), seed)]
            }
        },
        Command::Check { id } => {
            let ids: Vec<&str> = if id == "all" { CHECK_IDS.to_vec() } else { vec![id.as_str()] };
            let js = checks::JobSettings {
                ctx: s.ctx.clone(),
                samples: s.samples,
            };
            let jobs = ids
                .iter()
                .map(|id| checks::job(id, config, &js))
                .collect::<Result<Vec<_>, _>>()?;
            let reports = std::thread::scope(|scope| {
                let handles: Vec<_> = jobs.into_iter().map(|job| scope.spawn(job)).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("checker panicked"))
                    .collect::<Vec<_>>()
            });
            let mut records = Vec::new();
            for r in reports {
                records.push(Record::from_report(&r?, seed));
            }
            records.sort_by(|a, b| a.id.cmp(&b.id));
            records
        }
    };
    Ok(records)
}

fn exit_code(records: &[Record]) -> u8 {
    let statuses: Vec<Status> = records.iter().filter_map(|r| r.status).collect();
    if statuses.contains(&Status::Fail) {
        1
    } else if !statuses.is_empty() && statuses.iter().all(|s| *s == Status::Skip) {
        3
    } else {
        0
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => RunConfig::parse(&text),
            Err(source) => Err(CliError::Io {
                path: path.clone(),
                source,
            }),
        },
        None => Ok(RunConfig::default()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let s = settings(&cli, &config);
    match run(&cli, &config, &s) {
        Ok(records) => {
            print!("{}", output::render(&records, s.format, s.precision));
            ExitCode::from(exit_code(&records))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
