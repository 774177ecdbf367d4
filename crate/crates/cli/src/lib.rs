//! Command-line front end: argument definitions and command implementations.

pub mod sweep;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gonosomal::audit::{audit_trajectory, AuditOptions};
use gonosomal::dynamics::{
    iterate, iterate_hybrid, predicted_limit, verify_limit, DynamicsError, IterConfig, Trajectory,
};
use gonosomal::fixed_points::model_fixed_points;
use gonosomal::format::{parse_cross_table, parse_spec};
use gonosomal::models::{build_model, Model, CATALOGUE};
use gonosomal::operators::NormalizationMode;
use gonosomal::oracle::{numeric_fixed_points, OracleConfig};
use gonosomal::output::{fixed_points_json, prediction_json, trajectory_csv};
use gonosomal::realizability::{check_duplicate_realizability, verify_witness};
use gonosomal::sampling::{rng_from_seed, sample_simplex};
use gonosomal::scalar::{format_rational, parse_rational, rational_from_f64, Rational};
use gonosomal::StatePoint;
use serde_json::json;

use crate::sweep::{run_sweep, summary_json, Region, SweepConfig};

/// Exit status for success, a passed verification or a feasible table.
pub const EXIT_OK: i32 = 0;
/// Exit status for a failed verification, a failing sweep or an infeasible table.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for unreadable input, unknown models and other usage errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gonosomal",
    version,
    about = "Sex-linked inheritance operators: fixed points, limits and realizability"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in models.
    ListModels,
    /// Closed-form fixed points with a numeric cross-check, as JSON.
    FixedPoints(FixedPointsArgs),
    /// Iterate the normalised operator from one start.
    Simulate(SimulateArgs),
    /// Iterate from one start and check the predicted limit and the audits.
    Verify(VerifyArgs),
    /// Verify many random starts over a parameter grid.
    Sweep(SweepArgs),
    /// Decide whether a cross table comes from the commutative duplicate.
    Realizability(RealizabilityArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in model name (see `list-models`).
    #[arg(long)]
    pub model: Option<String>,
    /// Model parameter as `name=value`; values are rationals such as `3/4`.
    /// `gamma` takes a comma list or may be repeated.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Spec file for a custom model, instead of `--model`.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Simplified,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct IterArgs {
    /// Maximum number of steps.
    #[arg(long, default_value_t = 1_000_000)]
    pub iters: u64,
    /// Convergence tolerance on successive sup-norm differences.
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
    /// Record every k-th state (the first and last are always kept). Defaults
    /// to 1000 for sweeps and to every step, up to a million states, otherwise.
    #[arg(long)]
    pub record_every: Option<u64>,
    /// Normalisation: `simplified` divides by the female mass Σx, `full` by u·Σx.
    #[arg(long, value_enum, default_value_t = ModeArg::Simplified)]
    pub mode: ModeArg,
}

impl IterArgs {
    /// Every step for runs of up to a million steps, then about a million
    /// recorded states in total.
    fn dense_record_every(&self) -> u64 {
        (self.iters / 1_000_000).max(1)
    }

    fn config(&self, default_record_every: u64) -> IterConfig {
        IterConfig {
            max_iters: self.iters,
            conv_tol: self.tol,
            record_every: self.record_every.unwrap_or(default_record_every).max(1),
            mode: match self.mode {
                ModeArg::Simplified => NormalizationMode::Simplified,
                ModeArg::Full => NormalizationMode::Full,
            },
            ..IterConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct FixedPointsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Skip the numeric search.
    #[arg(long)]
    pub no_oracle: bool,
    /// Write the document here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StartArgs {
    /// Start `x1,...,xn,u` summing to 1; entries may be rationals or decimals.
    #[arg(long, value_name = "LIST")]
    pub start: Option<String>,
    /// Seed for a random start when `--start` is absent.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Iterate the first K steps in exact rational arithmetic (50 if given
    /// without a value).
    #[arg(long, value_name = "K", num_args = 0..=1, default_missing_value = "50")]
    pub exact_steps: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Use genotype labels as CSV column names.
    #[arg(long)]
    pub labels: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    /// Largest accepted distance between the final state and the prediction.
    #[arg(long, default_value_t = 1e-8)]
    pub limit_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    Invariant,
    Simplex,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Grid values `name=v1,v2,...` (or `name=a,b;c,d` for list-valued
    /// parameters); several flags form a product grid.
    #[arg(long = "grid", value_name = "NAME=LIST")]
    pub grid: Vec<String>,
    /// Starts per grid point.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    /// Seed of the start generator; equal seeds give identical sweeps.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draw starts from the model's invariant set or from the whole simplex.
    #[arg(long, value_enum, default_value_t = RegionArg::Invariant)]
    pub region: RegionArg,
    #[command(flatten)]
    pub iter: IterArgs,
    /// Largest accepted distance between a final state and its prediction.
    #[arg(long, default_value_t = 1e-8)]
    pub limit_tol: f64,
    /// Directory for `summary.json` and, with `--write-trajectories`, one
    /// CSV per run.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write every trajectory as CSV under `OUT/trajectories/`.
    #[arg(long)]
    pub write_trajectories: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct RealizabilityArgs {
    /// Cross-table file.
    pub table: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

/// Splits `name=v1,v2` into the name and its rational values.
pub fn parse_param(text: &str) -> Result<(String, Vec<Rational>)> {
    let (name, values) = text
        .split_once('=')
        .ok_or_else(|| anyhow!("parameter `{text}` is not of the form name=value"))?;
    let values = values
        .split(',')
        .map(|v| parse_rational(v.trim()).map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    Ok((name.trim().to_string(), values))
}

fn flatten_params(raw: &[String]) -> Result<Vec<(String, Rational)>> {
    let mut out = Vec::new();
    for p in raw {
        let (name, values) = parse_param(p)?;
        out.extend(values.into_iter().map(|v| (name.clone(), v)));
    }
    Ok(out)
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Resolves `--model`/`--param`/`--spec` into a model. `extra` parameters
/// are appended (used by sweep grids).
pub fn load_model(args: &ModelArgs, extra: &[(String, Rational)]) -> Result<Model> {
    let mut params = flatten_params(&args.params)?;
    params.extend(extra.iter().cloned());
    match (&args.model, &args.spec) {
        (Some(_), Some(_)) => bail!("give either --model or --spec, not both"),
        (None, None) => bail!("a model is required: --model NAME or --spec FILE"),
        (Some(name), None) => {
            let borrowed: Vec<(&str, Rational)> = params.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            Ok(build_model(name, &borrowed)?)
        }
        (None, Some(path)) => {
            if !params.is_empty() {
                bail!("--param does not apply to --spec models");
            }
            let doc = parse_spec(&read_file(path)?).with_context(|| format!("parsing {}", path.display()))?;
            let name = doc.name.unwrap_or_else(|| "custom".to_string());
            // A file that spells out a built-in model keeps its limit theorems.
            let borrowed: Vec<(&str, Rational)> = doc.params.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            if let Ok(builtin) = build_model(&name, &borrowed) {
                if builtin.spec() == &doc.spec {
                    return Ok(builtin);
                }
            }
            Ok(Model::custom(name, doc.spec)?)
        }
    }
}

/// Parses `x1,...,xn,u` as exact rationals summing to 1.
pub fn parse_start(text: &str, n: usize) -> Result<StatePoint<Rational>> {
    let coords = text
        .split(',')
        .map(|v| parse_rational(v.trim()).map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    if coords.len() != n + 1 {
        bail!("start has {} entries, the model needs {}", coords.len(), n + 1);
    }
    let point = StatePoint::from_coords(&coords);
    let total = point.total();
    if total != Rational::from_integer(1.into()) {
        bail!("start entries sum to {}, not 1", format_rational(&total));
    }
    if coords.iter().any(|c| c < &Rational::from_integer(0.into())) {
        bail!("start entries must be non-negative");
    }
    Ok(point)
}

fn resolve_start(args: &StartArgs, model: &Model) -> Result<StatePoint<Rational>> {
    match &args.start {
        Some(text) => parse_start(text, model.n()),
        None => {
            let p = sample_simplex(&mut rng_from_seed(args.seed), model.n());
            let coords = p
                .coords()
                .into_iter()
                .map(|v| rational_from_f64(v).ok_or_else(|| anyhow!("non-finite start")))
                .collect::<Result<Vec<_>>>()?;
            Ok(StatePoint::from_coords(&coords))
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_trajectory(
    model: &Model,
    start: &StatePoint<Rational>,
    args: &StartArgs,
    cfg: &IterConfig,
) -> Result<Trajectory<f64>> {
    match args.exact_steps {
        Some(k) if k > 0 => Ok(iterate_hybrid(model.spec(), start, k, cfg)?.1),
        _ => Ok(iterate(model.spec(), &start.to_f64(), cfg)?),
    }
}

fn trajectory_summary(traj: &Trajectory<f64>) -> serde_json::Value {
    json!({
        "steps": traj.steps,
        "converged_at": traj.converged_at,
        "escape_step": traj.escape_step,
        "final": traj.final_state().coords(),
    })
}

fn list_models() -> Result<i32> {
    let mut rows: Vec<(String, String, String, String)> = CATALOGUE
        .iter()
        .map(|info| {
            (
                info.name.into(),
                info.n.into(),
                info.params.into(),
                info.labels.join(", "),
            )
        })
        .collect();
    rows.push((
        "custom".into(),
        "any".into(),
        "none (--spec FILE)".into(),
        "f1, ..., fn, h".into(),
    ));
    let mut text = String::new();
    for (name, n, params, labels) in rows {
        text.push_str(&format!("{name}\tn: {n}\tparams: {params}\tlabels: {labels}\n"));
    }
    emit(&None, &text)?;
    Ok(EXIT_OK)
}

fn fixed_points(args: &FixedPointsArgs) -> Result<i32> {
    let model = load_model(&args.model, &[])?;
    let oracle = (!args.no_oracle).then(|| numeric_fixed_points(model.spec(), &OracleConfig::default()));
    let doc = match model_fixed_points(&model) {
        Ok(set) => fixed_points_json(&model, &set, oracle.as_ref()),
        Err(e) => json!({
            "model": model.name(),
            "labels": model.labels(),
            "params": [],
            "raw": [],
            "families": [],
            "normalized": [],
            "normalized_families": [],
            "closed_form": e.to_string(),
            "oracle": oracle.as_ref().map(|o| o.points.clone()),
            "oracle_max_residual": oracle.as_ref().map(|o| o.max_residual()),
        }),
    };
    emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    Ok(EXIT_OK)
}

fn simulate(args: &SimulateArgs) -> Result<i32> {
    let model = load_model(&args.model, &[])?;
    let start = resolve_start(&args.start, &model)?;
    let cfg = args.iter.config(args.iter.dense_record_every());
    let traj = run_trajectory(&model, &start, &args.start, &cfg)?;
    let text = match args.format {
        FormatArg::Csv => trajectory_csv(&traj, args.labels.then(|| model.labels())),
        FormatArg::Json => {
            let prediction = predicted_limit(&model, &start);
            let doc = json!({
                "model": model.name(),
                "labels": model.labels(),
                "start": start.coords().iter().map(format_rational).collect::<Vec<_>>(),
                "trajectory": trajectory_summary(&traj),
                "prediction": prediction.as_ref().ok().map(prediction_json),
                "prediction_error": prediction.as_ref().err().map(ToString::to_string),
            });
            format!("{}\n", serde_json::to_string_pretty(&doc)?)
        }
    };
    emit(&args.out, &text)?;
    Ok(EXIT_OK)
}

fn verify(args: &VerifyArgs) -> Result<i32> {
    let model = load_model(&args.model, &[])?;
    let start = resolve_start(&args.start, &model)?;
    let cfg = args.iter.config(args.iter.dense_record_every());
    let traj = run_trajectory(&model, &start, &args.start, &cfg)?;
    let prediction = predicted_limit(&model, &start);
    let audit = audit_trajectory(&model, &traj, prediction.as_ref().ok(), &AuditOptions::default());
    let report = prediction
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|p| verify_limit(&traj, p, args.limit_tol));
    let pass = matches!(&report, Ok(r) if r.pass) && audit.all_hold();
    let doc = json!({
        "model": model.name(),
        "start": start.coords().iter().map(format_rational).collect::<Vec<_>>(),
        "trajectory": trajectory_summary(&traj),
        "prediction": prediction.as_ref().ok().map(prediction_json),
        "report": report.as_ref().ok(),
        "error": report.as_ref().err().map(ToString::to_string),
        "audit": audit,
        "pass": pass,
    });
    emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    Ok(match report {
        Err(DynamicsError::NoTheoremApplies(_)) => EXIT_USAGE,
        _ if pass => EXIT_OK,
        _ => EXIT_FAIL,
    })
}

/// Cartesian product of the `--grid` flags, in flag order with the last
/// flag varying fastest. No flags give one empty assignment.
///
/// Grid values are separated by commas, or by semicolons when each value is
/// itself a comma list (`gamma=1/2,1/4,0;1/2,1/3,1/6`).
pub fn expand_grid(flags: &[String]) -> Result<Vec<Vec<(String, Rational)>>> {
    let mut grid: Vec<Vec<(String, Rational)>> = vec![Vec::new()];
    for flag in flags {
        let (name, list) = flag
            .split_once('=')
            .ok_or_else(|| anyhow!("grid `{flag}` is not of the form name=values"))?;
        let alternatives: Vec<Vec<Rational>> = if list.contains(';') {
            list.split(';')
                .map(|group| parse_param(&format!("{name}={group}")).map(|(_, v)| v))
                .collect::<Result<_>>()?
        } else {
            parse_param(flag)?.1.into_iter().map(|v| vec![v]).collect()
        };
        let name = name.trim();
        let mut next = Vec::with_capacity(grid.len() * alternatives.len());
        for point in &grid {
            for values in &alternatives {
                let mut p = point.clone();
                p.extend(values.iter().map(|v| (name.to_string(), v.clone())));
                next.push(p);
            }
        }
        grid = next;
    }
    Ok(grid)
}

fn sweep(args: &SweepArgs) -> Result<i32> {
    let grid = expand_grid(&args.grid)?;
    // Fail early on a bad model or an out-of-range grid value.
    for point in &grid {
        load_model(&args.model, point)?;
    }
    let model_args = args.model.clone();
    let cfg = SweepConfig {
        make_model: Box::new(move |params| load_model(&model_args, params)),
        grid,
        count: args.count as usize,
        seed: args.seed,
        region: match args.region {
            RegionArg::Invariant => Region::Invariant,
            RegionArg::Simplex => Region::Simplex,
        },
        iter: args.iter.config(1000),
        limit_tol: args.limit_tol,
        audit: AuditOptions::default(),
        out_dir: args.out.clone(),
        write_trajectories: args.write_trajectories,
    };
    let summary = run_sweep(&cfg)?;
    if args.out.is_none() {
        emit(&None, &summary_json(&summary))?;
    } else {
        eprintln!(
            "{} runs, {} passed, worst distance {}",
            summary.runs,
            summary.passes,
            summary.worst_distance.map_or("n/a".to_string(), |d| format!("{d:.3e}"))
        );
    }
    Ok(if summary.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}

fn realizability(args: &RealizabilityArgs) -> Result<i32> {
    let text = read_file(&args.table)?;
    let table = match parse_cross_table(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", args.table.display());
            return Ok(EXIT_USAGE);
        }
    };
    let result = match check_duplicate_realizability(&table) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", args.table.display());
            return Ok(EXIT_USAGE);
        }
    };
    let witness_ok = result.witness.as_ref().map(|w| verify_witness(&table, w));
    let out = match args.format {
        ReportFormat::Json => {
            let doc = json!({
                "feasible": result.feasible,
                "method": result.method,
                "witness": result.witness.as_ref().map(|w| json!({
                    "beta": w.beta.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "alphas": w.alphas.iter().map(|(pair, a)| json!({
                        "pair": pair.to_string(),
                        "alpha": a.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })),
                "witness_verified": witness_ok,
                "certificate": result.certificate,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc)?)
        }
        ReportFormat::Text => {
            let mut s = String::new();
            if result.feasible {
                s.push_str("feasible\n");
                if let Some(w) = &result.witness {
                    let show = |v: &[gonosomal::Surd]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
                    s.push_str(&format!("beta = ({})\n", show(&w.beta)));
                    for (pair, a) in &w.alphas {
                        s.push_str(&format!("alpha for {pair} = ({})\n", show(a)));
                    }
                    s.push_str(&format!("witness verified: {}\n", witness_ok.unwrap_or(false)));
                }
            } else {
                s.push_str("infeasible\n");
            }
            for line in &result.certificate {
                s.push_str(line);
                s.push('\n');
            }
            s
        }
    };
    emit(&None, &out)?;
    Ok(if result.feasible { EXIT_OK } else { EXIT_FAIL })
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::ListModels => list_models(),
        Command::FixedPoints(a) => fixed_points(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
        Command::Realizability(a) => realizability(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
