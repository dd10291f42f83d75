//! Command-line driver: reads a TOML config, runs one of the four commands and
//! emits deterministic JSON and CSV reports.

pub mod config;

use std::fmt::Write as _;
use std::path::PathBuf;

use cartan_core::certify::{certify_grid, GridReport};
use cartan_core::connections::{
    criterion_grid, epsilon_sweep, ratio_test, scaled_determinants, CriterionGridReport, GroupModel, RatioTest, SweepReport,
    DEFAULT_EPSILONS,
};
use cartan_core::extension::{cext_decision_table, cone_membership, ConeStatus, ConeVerdict, DecisionRow, ExtensionVerdict};
use cartan_core::fields::DEFAULT_RANK_TOL;
use cartan_core::report::{self, fmt_f64};
use cartan_core::topology::{decide_decomposition, rokhlin_check, smale_remark, DecompositionVerdict, RokhlinReport, SmaleReport};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use config::{check_tol, from_toml, parse_model, CertifyConfig, ConnectionConfig, ExtendConfig, OutputConfig, TopologyConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    fn parse(s: &str) -> Result<Self, CliError> {
        Format::from_str(s, true).map_err(|_| CliError::Config(format!("output.format: unknown format `{s}`")))
    }
}

#[derive(Clone, Debug, Parser)]
#[command(name = "cartan", version, about = "Construct and certify (2,3,5) distributions")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for report files; reports go to standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Overrides the tolerance of the config.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Certify a distribution on a grid box.
    Certify,
    /// Criterion, epsilon sweep and scaling checks for a connection form.
    Connection,
    /// Extension decision table or a single cone problem.
    Extend,
    /// Topological predicates.
    Topology,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Connection => "connection",
            Command::Extend => "extend",
            Command::Topology => "topology",
        }
    }
}

/// Result of a command: reports plus whether the computed answer is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub json: String,
    /// `(file stem, contents)`.
    pub csv: Vec<(String, String)>,
    pub positive: bool,
    /// Evaluation failures that did not prevent writing the reports.
    pub runtime_error: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match (&self.runtime_error, self.positive) {
            (Some(_), _) => 3,
            (None, true) => 0,
            (None, false) => 1,
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(runtime)?;
    s.push('\n');
    Ok(s)
}

fn resolve_tol(flag: Option<f64>, config: Option<f64>) -> Result<f64, CliError> {
    check_tol(flag.or(config).unwrap_or(DEFAULT_RANK_TOL))
}

#[derive(Serialize)]
struct CertifyReport<'a> {
    command: &'static str,
    all_cartan: bool,
    report: &'a GridReport,
}

pub fn cmd_certify(cfg: &CertifyConfig, tol: Option<f64>) -> Result<Outcome, CliError> {
    let tol = resolve_tol(tol, cfg.tol)?;
    let d = cfg.distribution.build()?;
    let grid = cfg.grid.build("grid", d.x().dim())?;
    let r = certify_grid(&d, &grid, tol).map_err(runtime)?;
    let runtime_error = r
        .has_errors()
        .then(|| format!("{} grid point(s) failed to evaluate", r.counts.error));
    Ok(Outcome {
        json: to_json(&CertifyReport {
            command: "certify",
            all_cartan: r.all_cartan(),
            report: &r,
        })?,
        csv: vec![("certify".into(), r.to_csv())],
        positive: r.all_cartan(),
        runtime_error,
    })
}

#[derive(Serialize)]
struct ScalingReport {
    #[serde(serialize_with = "report::fixed_vec")]
    point: Vec<f64>,
    #[serde(serialize_with = "report::fixed_vec")]
    epsilons: Vec<f64>,
    exponent: i32,
    #[serde(serialize_with = "report::fixed_vec")]
    scaled_determinants: Vec<f64>,
    ratio_test: RatioTest,
}

#[derive(Serialize)]
struct ConnectionReport {
    command: &'static str,
    algebra: &'static str,
    chart: String,
    a: Vec<String>,
    b: Vec<String>,
    holds: bool,
    criterion: Option<CriterionGridReport>,
    suspension: Option<SweepReport>,
    scaling: Option<ScalingReport>,
}

fn criterion_csv(r: &CriterionGridReport) -> String {
    let mut s = String::from("index,x1,x2,holds,margin,relative_margin\n");
    for (i, p) in r.points.iter().enumerate() {
        let (m, rm) = match &p.result {
            Some(res) => (fmt_f64(res.margin), fmt_f64(res.relative_margin)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(s, "{i},{},{},{},{m},{rm}", fmt_f64(p.coords[0]), fmt_f64(p.coords[1]), p.holds());
    }
    s
}

fn sweep_csv(r: &SweepReport) -> String {
    let mut s = String::from("epsilon,all_cartan,cartan,not_cartan,indeterminate,error,min_abs_det,min_relative_margin\n");
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for e in &r.entries {
        let c = &e.counts;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(e.epsilon),
            e.all_cartan,
            c.cartan,
            c.not_cartan,
            c.indeterminate,
            c.error,
            opt(e.min_abs_det),
            opt(e.min_relative_margin)
        );
    }
    s
}

pub fn cmd_connection(cfg: &ConnectionConfig, tol: Option<f64>) -> Result<Outcome, CliError> {
    let tol = resolve_tol(tol, cfg.tol)?;
    let (form, default_model) = cfg.connection.build()?;
    if cfg.criterion.is_none() && cfg.suspension.is_none() && cfg.scaling.is_none() {
        return Err(CliError::Config("connection: nothing to do; add [criterion], [suspension] or [scaling]".into()));
    }
    let grid = |g: &config::GridConfig, path: &str, dim: usize| g.build(path, dim);
    let model_for = |name: Option<&String>, path: &str| -> Result<GroupModel, CliError> {
        match name {
            Some(n) => parse_model(path, n),
            None => default_model.ok_or_else(|| CliError::Config(format!("{path}: the algebra has no built-in group model"))),
        }
    };
    let mut csv = Vec::new();
    let mut holds = true;
    let mut runtime_error = None;

    let criterion = match &cfg.criterion {
        Some(g) => {
            let r = criterion_grid(&form, &grid(g, "criterion", 2)?, tol).map_err(runtime)?;
            holds &= r.holds_everywhere;
            if r.points.iter().any(|p| p.error.is_some()) {
                runtime_error = Some("criterion failed to evaluate at some grid points".to_string());
            }
            csv.push(("criterion".to_string(), criterion_csv(&r)));
            Some(r)
        }
        None => None,
    };
    let suspension = match &cfg.suspension {
        Some(s) => {
            let model = model_for(s.model.as_ref(), "suspension.model")?;
            let eps = s.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
            let r = epsilon_sweep(&form, model, &eps, &grid(&s.grid, "suspension.grid", 5)?, tol).map_err(|e| match e {
                cartan_core::connections::ConnectionError::InvalidEpsilon(_) | cartan_core::connections::ConnectionError::ModelMismatch { .. } => {
                    CliError::Config(format!("suspension: {e}"))
                }
                e => runtime(e),
            })?;
            // The verdict is the one at the smallest tested epsilon.
            let smallest = r.entries.iter().min_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
            holds &= r.monotone && smallest.is_some_and(|e| e.all_cartan);
            if r.entries.iter().any(|e| e.counts.error > 0) {
                runtime_error = Some("suspension failed to evaluate at some grid points".to_string());
            }
            csv.push(("suspension".to_string(), sweep_csv(&r)));
            Some(r)
        }
        None => None,
    };
    let scaling = match &cfg.scaling {
        Some(s) => {
            if s.point.len() != 5 {
                return Err(CliError::Config(format!("scaling.point: expected 5 coordinates, got {}", s.point.len())));
            }
            let model = model_for(None, "scaling")?;
            let eps = s.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
            let values = scaled_determinants(&form, model, &s.point, &eps, s.exponent).map_err(runtime)?;
            let test = ratio_test(&values, s.rel_tol);
            holds &= test.passes;
            Some(ScalingReport {
                point: s.point.clone(),
                epsilons: eps,
                exponent: s.exponent,
                scaled_determinants: values,
                ratio_test: test,
            })
        }
        None => None,
    };
    let report = ConnectionReport {
        command: "connection",
        algebra: match default_model {
            Some(m) => m.name(),
            None => "custom",
        },
        chart: form.chart.name.clone(),
        a: form.a.iter().map(ToString::to_string).collect(),
        b: form.b.iter().map(ToString::to_string).collect(),
        holds,
        criterion,
        suspension,
        scaling,
    };
    Ok(Outcome {
        json: to_json(&report)?,
        csv,
        positive: holds,
        runtime_error,
    })
}

#[derive(Serialize)]
struct TableReport<'a> {
    command: &'static str,
    #[serde(serialize_with = "report::fixed")]
    alpha: f64,
    n_quad: usize,
    #[serde(serialize_with = "report::fixed")]
    tol: f64,
    verdicts: Vec<ExtensionVerdict>,
    all_certificates_verified: bool,
    rows: &'a [DecisionRow],
}

#[derive(Serialize)]
struct ConeReport<'a> {
    command: &'static str,
    #[serde(serialize_with = "report::fixed")]
    tol: f64,
    certificate_verified: bool,
    verdict: &'a ConeVerdict,
}

fn table_csv(rows: &[DecisionRow]) -> String {
    let mut s = String::from("alpha,h,verdict,loop1,loop2,loop3,expected3,certificate_verified\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:?},{},{},{},{},{}",
            fmt_f64(r.alpha),
            fmt_f64(r.h),
            r.verdict,
            fmt_f64(r.loop_integral[0]),
            fmt_f64(r.loop_integral[1]),
            fmt_f64(r.loop_integral[2]),
            fmt_f64(r.expected_integral[2]),
            r.certificate_verified
        );
    }
    s
}

fn cone_csv(v: &ConeVerdict) -> String {
    let join = |xs: &[f64]| xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
    format!(
        "status,margin,residual,coefficients,normal\n{:?},{},{},{},{}\n",
        v.status,
        fmt_f64(v.margin),
        fmt_f64(v.residual),
        v.coefficients.as_deref().map(join).unwrap_or_default(),
        v.normal.as_ref().map(|n| join(n)).unwrap_or_default()
    )
}

pub fn cmd_extend(cfg: &ExtendConfig, tol: Option<f64>) -> Result<Outcome, CliError> {
    let tol = resolve_tol(tol, cfg.tol)?;
    match (&cfg.table, &cfg.cone) {
        (Some(t), None) => {
            if t.heights.is_empty() {
                return Err(CliError::Config("table.heights: at least one height is required".into()));
            }
            let sampling = t.sampling.as_ref().map(|s| s.build()).unwrap_or_default();
            let rows = cext_decision_table(t.alpha, &t.heights, t.n_quad, sampling, tol).map_err(|e| match e {
                cartan_core::extension::ExtensionError::TooFewQuadraturePoints(_) | cartan_core::extension::ExtensionError::NonFinite(_) => {
                    CliError::Config(format!("table: {e}"))
                }
                e => runtime(e),
            })?;
            let verified = rows.iter().all(|r| r.certificate_verified);
            let decided = rows.iter().all(|r| r.verdict != ExtensionVerdict::Indeterminate);
            let report = TableReport {
                command: "extend",
                alpha: t.alpha,
                n_quad: t.n_quad,
                tol,
                verdicts: rows.iter().map(|r| r.verdict).collect(),
                all_certificates_verified: verified,
                rows: &rows,
            };
            Ok(Outcome {
                json: to_json(&report)?,
                csv: vec![("extend".into(), table_csv(&rows))],
                positive: verified && decided,
                runtime_error: None,
            })
        }
        (None, Some(c)) => {
            let problem = c.build(tol)?;
            let verdict = cone_membership(&problem).map_err(runtime)?;
            let verified = verdict.verify(&problem);
            let report = ConeReport {
                command: "extend",
                tol,
                certificate_verified: verified,
                verdict: &verdict,
            };
            Ok(Outcome {
                json: to_json(&report)?,
                csv: vec![("extend".into(), cone_csv(&verdict))],
                positive: verdict.status == ConeStatus::Inside && verified,
                runtime_error: None,
            })
        }
        _ => Err(CliError::Config("extend: give exactly one of [table] or [cone]".into())),
    }
}

#[derive(Serialize)]
struct TopologyReport {
    command: &'static str,
    holds: bool,
    decomposition: Option<DecompositionVerdict>,
    smale: Option<SmaleReport>,
    rokhlin: Option<RokhlinReport>,
}

pub fn cmd_topology(cfg: &TopologyConfig) -> Result<Outcome, CliError> {
    if cfg.manifold.is_none() && cfg.simply_connected.is_none() && cfg.rokhlin.is_none() {
        return Err(CliError::Config("topology: nothing to do; add [manifold], [simply_connected] or [rokhlin]".into()));
    }
    let input = |e: cartan_core::topology::TopologyError| CliError::Config(format!("topology: {e}"));
    let decomposition = cfg.manifold.as_ref().map(decide_decomposition).transpose().map_err(input)?;
    let smale = cfg.simply_connected.as_ref().map(smale_remark).transpose().map_err(input)?;
    let rokhlin = cfg.rokhlin.as_ref().map(|r| rokhlin_check(&r.p1));
    let holds = decomposition.as_ref().is_none_or(|d| d.holds)
        && smale.as_ref().is_none_or(|s| s.holds)
        && rokhlin.as_ref().is_none_or(|r| r.all_pass);
    let mut csv = String::from("predicate,holds\n");
    for (name, v) in [
        ("decomposition", decomposition.as_ref().map(|d| d.holds)),
        ("smale", smale.as_ref().map(|s| s.holds)),
        ("rokhlin", rokhlin.as_ref().map(|r| r.all_pass)),
    ] {
        if let Some(v) = v {
            let _ = writeln!(csv, "{name},{v}");
        }
    }
    let report = TopologyReport {
        command: "topology",
        holds,
        decomposition,
        smale,
        rokhlin,
    };
    Ok(Outcome {
        json: to_json(&report)?,
        csv: vec![("topology".into(), csv)],
        positive: holds,
        runtime_error: None,
    })
}

/// Runs a command on config text; the output settings of the config are
/// returned for the caller to merge with the flags.
pub fn run_config(command: Command, text: &str, tol: Option<f64>) -> Result<(Outcome, OutputConfig), CliError> {
    match command {
        Command::Certify => {
            let cfg: CertifyConfig = from_toml(text)?;
            Ok((cmd_certify(&cfg, tol)?, cfg.output))
        }
        Command::Connection => {
            let cfg: ConnectionConfig = from_toml(text)?;
            Ok((cmd_connection(&cfg, tol)?, cfg.output))
        }
        Command::Extend => {
            let cfg: ExtendConfig = from_toml(text)?;
            Ok((cmd_extend(&cfg, tol)?, cfg.output))
        }
        Command::Topology => {
            let cfg: TopologyConfig = from_toml(text)?;
            if tol.is_some() {
                return Err(CliError::Config("topology takes no tolerance".into()));
            }
            Ok((cmd_topology(&cfg)?, cfg.output))
        }
    }
}

/// Writes the reports selected by `format` into `dir`, or to `stdout` when
/// no directory is given (JSON unless only CSV is requested).
pub fn emit(command: Command, outcome: &Outcome, dir: Option<&PathBuf>, format: Format, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let want_json = format != Format::Csv;
    let want_csv = format != Format::Json;
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
            let write = |name: String, body: &str| {
                let path = dir.join(name);
                std::fs::write(&path, body).map_err(|e| runtime(format!("{}: {e}", path.display())))
            };
            if want_json {
                write(format!("{}.json", command.name()), &outcome.json)?;
            }
            if want_csv {
                for (stem, body) in &outcome.csv {
                    write(format!("{stem}.csv"), body)?;
                }
            }
        }
        None => {
            let body = if want_json {
                outcome.json.clone()
            } else {
                outcome.csv.iter().map(|(_, b)| b.as_str()).collect::<Vec<_>>().join("\n")
            };
            stdout.write_all(body.as_bytes()).map_err(runtime)?;
        }
    }
    Ok(())
}

/// Full run with flag handling; returns the process exit status.
pub fn run(args: &Args, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> u8 {
    let result = (|| -> Result<Outcome, CliError> {
        let path = args
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = args.threads {
            if n == 0 {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(runtime)?;
        let (outcome, output) = pool
            .install(|| run_config(args.command, &text, args.tol))
            .map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                e => e,
            })?;
        let format = match (args.format, &output.format) {
            (Some(f), _) => f,
            (None, Some(s)) => Format::parse(s)?,
            (None, None) => Format::Both,
        };
        let dir = args.out.clone().or(output.dir.map(PathBuf::from));
        emit(args.command, &outcome, dir.as_ref(), format, stdout)?;
        Ok(outcome)
    })();
    match result {
        Ok(outcome) => {
            if let Some(msg) = &outcome.runtime_error {
                let _ = writeln!(stderr, "cartan {}: runtime error: {msg}", args.command.name());
            }
            outcome.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "cartan {}: {e}", args.command.name());
            e.exit_code()
        }
    }
}
