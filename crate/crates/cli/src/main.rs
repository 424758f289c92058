mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use hopflab::report::{csv_rows, format_float, FunctionalResult, Status, VerificationReport, CSV_HEADER, SCHEMA_VERSION};
use hopflab::theorems::{self, CheckConfig, CheckJob, FieldSurvey, CLIFFORD_DELTA, DEFAULT_T_VALUES};
use hopflab::{lambda_field, FieldDefinition, QuadratureSpec, Region, VolumeForm};

use config::{RealList, RunConfig};

const IDENTITY_SAMPLES: usize = 1000;

#[derive(Parser)]
#[command(name = "hopflab", version, about = "Volume, energy and Milnor-map checks for unit vector fields on odd spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Volume of the field over the domain
    Volume(Args),
    /// Energy of the field over the domain
    Energy(Args),
    /// Volume of the image of the domain under x + t v(x)
    Pushforward(Args),
    /// Proportional volume ratio at each t
    Pvp(Args),
    /// Flux of the field through the domain boundary
    Flux(Args),
    /// Run theorem checks (--suite)
    Verify(Args),
    /// PVP ratios over a grid of lambda and t
    Sweep(Args),
    /// Run the command named by `command` in the config file
    Run(Args),
}

#[derive(clap::Args, Debug, Default)]
struct Args {
    /// TOML run configuration; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// hopf | hopf:<k> | lambda:<λ> | custom:<path> (sweep also takes bare `lambda`)
    #[arg(long)]
    field: Option<String>,
    /// solid_torus:<δ> | complement:<δ> | sphere | sphere:mc | custom:<path>
    #[arg(long)]
    domain: Option<String>,
    /// Milnor parameters: `a,b,c` or `a:b:step`
    #[arg(long)]
    t: Option<String>,
    /// λ values for sweep: `a,b,c` or `a:b:step`
    #[arg(long)]
    lambda: Option<String>,
    /// Nodes per chart axis, comma separated
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// 1.3, 1.4, 1.6, dichotomy, identities or all (comma separated)
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// full_gram (default) or h_block
    #[arg(long)]
    volume_form: Option<String>,
    /// Evaluate nodes on one thread
    #[arg(long)]
    sequential: bool,
}

impl Args {
    fn to_config(&self, command: Option<&str>) -> Result<RunConfig, String> {
        let volume_form = match self.volume_form.as_deref() {
            None => None,
            Some("full_gram") => Some(VolumeForm::FullGram),
            Some("h_block") => Some(VolumeForm::HBlock),
            Some(other) => return Err(format!("volume form must be full_gram or h_block, got '{other}'")),
        };
        let flags = RunConfig {
            command: command.map(str::to_string),
            field: self.field.clone(),
            domain: self.domain.clone(),
            t: self.t.clone().map(RealList::Text),
            lambda: self.lambda.clone().map(RealList::Text),
            nodes: self.nodes.clone().map(config::NodeList::Text),
            mc_samples: self.mc_samples,
            seed: self.seed,
            suite: self.suite.clone(),
            tolerance: self.tolerance,
            volume_form,
            exec: self.sequential.then(|| "sequential".to_string()),
            out_json: self.out_json.clone(),
            out_csv: self.out_csv.clone(),
        };
        let file = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        Ok(file.overridden_by(flags))
    }
}

/// Everything a command produces before it is written out.
struct Outcome {
    lines: Vec<String>,
    payload: Value,
    csv_header: Vec<String>,
    csv_rows: Vec<Vec<String>>,
    conclusion_failed: bool,
}

impl Outcome {
    fn new(payload: Value, csv_header: &[&str]) -> Self {
        Outcome {
            lines: Vec::new(),
            payload,
            csv_header: csv_header.iter().map(|s| s.to_string()).collect(),
            csv_rows: Vec::new(),
            conclusion_failed: false,
        }
    }
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<hopflab::LabError> for Failure {
    fn from(e: hopflab::LabError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn config_err(e: String) -> Failure {
    Failure::Config(e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, name) = match &cli.command {
        Command::Volume(a) => (a, Some("volume")),
        Command::Energy(a) => (a, Some("energy")),
        Command::Pushforward(a) => (a, Some("pushforward")),
        Command::Pvp(a) => (a, Some("pvp")),
        Command::Flux(a) => (a, Some("flux")),
        Command::Verify(a) => (a, Some("verify")),
        Command::Sweep(a) => (a, Some("sweep")),
        Command::Run(a) => (a, None),
    };
    match args.to_config(name).map_err(config_err).and_then(|cfg| execute(&cfg)) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn execute(cfg: &RunConfig) -> Result<ExitCode, Failure> {
    let command = cfg
        .command
        .clone()
        .ok_or_else(|| Failure::Config("no command given (set `command` in the config file)".into()))?;
    let outcome = match command.as_str() {
        "volume" | "energy" | "flux" => functional(cfg, &command)?,
        "pushforward" | "pvp" => milnor(cfg, &command)?,
        "verify" => verify(cfg)?,
        "sweep" => sweep(cfg)?,
        other => return Err(Failure::Config(format!("unknown command '{other}'"))),
    };
    for line in &outcome.lines {
        println!("{line}");
    }
    let document = json!({
        "schema_version": SCHEMA_VERSION,
        "config": cfg,
        "command": command,
        "output": outcome.payload,
    });
    if let Some(path) = &cfg.out_json {
        let text = serde_json::to_string_pretty(&document).map_err(|e| Failure::Numerical(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &cfg.out_csv {
        write_csv(path, &outcome.csv_header, &outcome.csv_rows)?;
    }
    Ok(if outcome.conclusion_failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Config(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Config(e.to_string()))
}

fn field_and_region(cfg: &RunConfig) -> Result<(FieldDefinition, Region), Failure> {
    let field = FieldDefinition::from_spec(cfg.field.as_deref().unwrap_or("hopf"))?;
    let region = Region::from_spec(cfg.domain.as_deref().unwrap_or("sphere"), field.dim())?;
    Ok((field, region))
}

fn quadrature(cfg: &RunConfig, region: &Region) -> Result<QuadratureSpec, Failure> {
    cfg.quadrature(region.is_monte_carlo()).map_err(config_err)
}

fn check_config(cfg: &RunConfig) -> Result<CheckConfig, Failure> {
    let mut c = CheckConfig::default();
    if let Some(tol) = cfg.tolerance {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Failure::Config(format!("tolerance must be >= 0, got {tol}")));
        }
        c.tolerance = tol;
    }
    c.volume_form = cfg.volume_form.unwrap_or_default();
    Ok(c)
}

const FUNCTIONAL_HEADER: [&str; 6] = ["name", "field", "domain", "t", "value", "std_error"];

fn functional_row(r: &FunctionalResult) -> Vec<String> {
    vec![
        serde_json::to_value(r.name).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        r.field_label.clone(),
        r.domain_label.clone(),
        r.t.map(format_float).unwrap_or_default(),
        format_float(r.value),
        r.std_error.map(format_float).unwrap_or_default(),
    ]
}

fn describe(name: &str, r: &FunctionalResult) -> String {
    let t = r.t.map(|t| format!(", t = {t}")).unwrap_or_default();
    let se = r.std_error.map(|s| format!(" ± {s:e}")).unwrap_or_default();
    format!("{name}({}, {}{t}) = {}{se}", r.field_label, r.domain_label, r.value)
}

fn functional(cfg: &RunConfig, command: &str) -> Result<Outcome, Failure> {
    let (field, region) = field_and_region(cfg)?;
    let q = quadrature(cfg, &region)?;
    let result = match command {
        "volume" => theorems::volume_of_field(&field, &region, &q, cfg.volume_form.unwrap_or_default())?,
        "energy" => theorems::energy_of_field(&field, &region, &q)?,
        _ => theorems::flux(&field, &region, &q)?,
    };
    let mut out = Outcome::new(json!({ "results": [result] }), &FUNCTIONAL_HEADER);
    out.lines.push(describe(command, &result));
    out.csv_rows.push(functional_row(&result));
    Ok(out)
}

fn milnor(cfg: &RunConfig, command: &str) -> Result<Outcome, Failure> {
    let (field, region) = field_and_region(cfg)?;
    let q = quadrature(cfg, &region)?;
    let ts = cfg.t_values(&DEFAULT_T_VALUES).map_err(config_err)?;
    if let Some(bad) = ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Failure::Config(format!("t must be >= 0, got {bad}")));
    }
    let survey = FieldSurvey::new(&field, &region, &q)?;
    let mut results = Vec::new();
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for &t in &ts {
        let pvp = survey.pvp(t);
        let pf = &pvp.pushforward;
        if command == "pvp" {
            lines.push(format!("pvp_ratio({}, {}, t = {t}) = {}", field.label(), region.label(), pvp.ratio));
            rows.push(vec![
                field.label().to_string(),
                region.label(),
                format_float(t),
                format_float(pvp.ratio),
                format_float(pf.result.value),
                format_float(pvp.domain_volume),
                pf.diffeomorphic.to_string(),
            ]);
        } else {
            lines.push(describe("pushforward_volume", &pf.result));
            let mut row = functional_row(&pf.result);
            row.push(pf.diffeomorphic.to_string());
            rows.push(row);
        }
        if !pf.diffeomorphic {
            lines.push(format!(
                "  not a diffeomorphism at t = {t}: min det(d phi_t) = {}",
                pf.min_jacobian
            ));
        }
        results.push(pvp);
    }
    let header: Vec<&str> = if command == "pvp" {
        vec!["field", "domain", "t", "pvp_ratio", "pushforward_volume", "domain_volume", "diffeomorphic"]
    } else {
        FUNCTIONAL_HEADER.iter().copied().chain(["diffeomorphic"]).collect()
    };
    let payload = if command == "pvp" {
        json!({ "pvp": results })
    } else {
        json!({ "pushforward": results.iter().map(|r| &r.pushforward).collect::<Vec<_>>() })
    };
    let mut out = Outcome::new(payload, &header);
    out.lines = lines;
    out.csv_rows = rows;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Suite {
    T13,
    T14,
    T16,
    Dichotomy,
    Identities,
}

impl Suite {
    fn label(self) -> &'static str {
        match self {
            Suite::T13 => "1.3",
            Suite::T14 => "1.4",
            Suite::T16 => "1.6",
            Suite::Dichotomy => "dichotomy",
            Suite::Identities => "identities",
        }
    }
}

fn parse_suite(s: &str) -> Result<Vec<Suite>, Failure> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let add: &[Suite] = match part {
            "1.3" => &[Suite::T13],
            "1.4" => &[Suite::T14],
            "1.6" => &[Suite::T16],
            "dichotomy" => &[Suite::Dichotomy],
            "identities" => &[Suite::Identities],
            "all" => &[Suite::T13, Suite::T14, Suite::T16, Suite::Dichotomy, Suite::Identities],
            other => return Err(Failure::Config(format!("unknown suite '{other}'"))),
        };
        for s in add {
            if !out.contains(s) {
                out.push(*s);
            }
        }
    }
    Ok(out)
}

/// δ of the torus split used by the dichotomy check.
fn dichotomy_delta(domain: Option<&str>) -> Result<f64, Failure> {
    match domain.and_then(|d| d.split_once(':')) {
        Some(("solid_torus" | "complement", d)) => config::parse_real(d).map_err(config_err),
        _ => Ok(CLIFFORD_DELTA),
    }
}

fn verify(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let suites = parse_suite(cfg.suite.as_deref().unwrap_or("all"))?;
    let explicit_all = cfg.suite.as_deref().is_none_or(|s| s.split(',').any(|p| p.trim() == "all"));
    let (field, region) = field_and_region(cfg)?;
    let q = quadrature(cfg, &region)?;
    let check = check_config(cfg)?;
    let ts = cfg.t_values(&DEFAULT_T_VALUES).map_err(config_err)?;
    let s3 = field.dim().k() == 1;
    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    for s in suites {
        match s {
            Suite::T13 => jobs.push(CheckJob::Theorem13 { field: field.clone(), region: region.clone() }),
            Suite::T16 => jobs.push(CheckJob::Theorem16 { field: field.clone(), region: region.clone() }),
            Suite::T14 | Suite::Dichotomy if !s3 => {
                if !explicit_all {
                    return Err(Failure::Config(format!("suite {} applies to S^3 fields only", s.label())));
                }
                skipped.push(format!("suite {} skipped: field is on S^{}", s.label(), field.dim().intrinsic()));
            }
            Suite::T14 => jobs.push(CheckJob::Theorem14 { field: field.clone(), region: region.clone(), t: ts.clone() }),
            Suite::Dichotomy => {
                let delta_max = dichotomy_delta(cfg.domain.as_deref())?;
                for &t in &ts {
                    jobs.push(CheckJob::Dichotomy { field: field.clone(), delta_max, t });
                }
            }
            Suite::Identities => jobs.push(CheckJob::Identities {
                samples: IDENTITY_SAMPLES,
                seed: cfg.seed.unwrap_or(0),
            }),
        }
    }
    let mut reports: Vec<VerificationReport> = Vec::new();
    for r in theorems::run_checks(&jobs, &q, &check) {
        reports.push(r?);
    }
    let mut out = Outcome::new(json!({ "reports": reports, "skipped": skipped }), &CSV_HEADER);
    for r in &reports {
        let status = match r.status {
            Status::Passed => "passed",
            Status::Failed => "FAILED (hypotheses hold but a conclusion does not)",
            Status::HypothesesNotMet => "hypotheses not met",
        };
        out.lines.push(format!("{} [{} on {}]: {status}", r.check_id, r.field, r.domain));
        for c in &r.conclusions {
            let mark = match c.pass {
                Some(true) => "ok",
                Some(false) => "FAIL",
                None => "-",
            };
            out.lines.push(format!("  {mark:4} {}: lhs = {}, rhs = {}", c.description, c.lhs, c.rhs));
        }
        for n in &r.notes {
            out.lines.push(format!("  note: {n}"));
        }
    }
    out.lines.extend(skipped);
    out.csv_rows = csv_rows(&reports).into_iter().map(Vec::from).collect();
    out.conclusion_failed = reports.iter().any(|r| r.status == Status::Failed);
    Ok(out)
}

const SWEEP_HEADER: [&str; 8] = [
    "field",
    "domain",
    "t",
    "pvp_ratio",
    "pushforward_volume",
    "domain_volume",
    "min_jacobian",
    "diffeomorphic",
];

fn sweep(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec = cfg.field.as_deref().unwrap_or("lambda");
    let fields = if spec == "lambda" {
        let lambdas = cfg
            .lambda
            .as_ref()
            .ok_or_else(|| Failure::Config("sweep over `lambda` needs --lambda".into()))?
            .resolve()
            .map_err(config_err)?;
        lambdas.into_iter().map(lambda_field).collect::<hopflab::Result<Vec<_>>>()?
    } else {
        if cfg.lambda.is_some() {
            return Err(Failure::Config("--lambda is only used with --field lambda".into()));
        }
        vec![FieldDefinition::from_spec(spec)?]
    };
    let region = Region::from_spec(cfg.domain.as_deref().unwrap_or("sphere"), fields[0].dim())?;
    let q = quadrature(cfg, &region)?;
    let ts = cfg.t_values(&DEFAULT_T_VALUES).map_err(config_err)?;
    let rows = theorems::pvp_sweep(&fields, &region, &q, &ts)?;
    let mut out = Outcome::new(json!({ "quadrature": region.echo(&q)?, "rows": rows }), &SWEEP_HEADER);
    for r in &rows {
        out.lines.push(format!("{} t = {}: pvp_ratio = {}", r.field, r.t, r.pvp_ratio));
        out.csv_rows.push(vec![
            r.field.clone(),
            r.domain.clone(),
            format_float(r.t),
            format_float(r.pvp_ratio),
            format_float(r.pushforward_volume),
            format_float(r.domain_volume),
            format_float(r.min_jacobian),
            r.diffeomorphic.to_string(),
        ]);
    }
    Ok(out)
}
