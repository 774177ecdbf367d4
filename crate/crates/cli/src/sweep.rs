//! Verification sweeps over parameter grids and random starts.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use gonosomal::audit::{audit_trajectory, AuditOptions};
use gonosomal::dynamics::{iterate, predicted_limit_f64, verify_limit, IterConfig};
use gonosomal::models::Model;
use gonosomal::operators::classify_membership;
use gonosomal::output::trajectory_csv;
use gonosomal::sampling::{rng_from_seed, sample_simplex, SampleRng};
use gonosomal::scalar::{format_rational, Rational};
use gonosomal::StatePoint;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// Starts in the model's invariant set.
    Invariant,
    /// Starts anywhere in `S^{n,1}`.
    Simplex,
}

/// Builds the model for one grid point.
pub type ModelFactory = Box<dyn Fn(&[(String, Rational)]) -> Result<Model>>;

pub struct SweepConfig {
    pub make_model: ModelFactory,
    /// Parameter assignments, one per grid point.
    pub grid: Vec<Vec<(String, Rational)>>,
    pub count: usize,
    pub seed: u64,
    pub region: Region,
    pub iter: IterConfig,
    pub limit_tol: f64,
    pub audit: AuditOptions,
    pub out_dir: Option<PathBuf>,
    pub write_trajectories: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub id: String,
    pub params: Vec<(String, String)>,
    pub start: Vec<f64>,
    pub rule: Option<String>,
    pub distance: Option<f64>,
    pub pass: bool,
    pub steps: u64,
    pub converged_at: Option<u64>,
    pub escape_step: Option<u64>,
    pub failed_checks: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstAudit {
    pub run: String,
    pub check: String,
    pub first_violation_step: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub passes: usize,
    /// Ids of runs that failed verification, failed an audit or errored.
    pub failures: Vec<String>,
    pub worst_distance: Option<f64>,
    /// First failing audit check in run order, if any.
    pub worst_audit: Option<WorstAudit>,
    pub results: Vec<RunRecord>,
}

const MAX_REJECTIONS: usize = 100_000;

fn draw_start(model: &Model, rng: &mut SampleRng, region: Region) -> Option<StatePoint<f64>> {
    for _ in 0..MAX_REJECTIONS {
        let p = sample_simplex(rng, model.n());
        if region == Region::Simplex || classify_membership(model, &p).in_model_invariant {
            return Some(p);
        }
    }
    None
}

fn run_one(
    model: &Model,
    start: StatePoint<f64>,
    cfg: &SweepConfig,
    record: &mut RunRecord,
    worst_audit: &mut Option<WorstAudit>,
) -> Result<()> {
    let prediction = predicted_limit_f64(model, &start);
    let traj = iterate(model.spec(), &start, &cfg.iter)?;
    record.steps = traj.steps;
    record.converged_at = traj.converged_at;
    record.escape_step = traj.escape_step;
    let audit = audit_trajectory(model, &traj, prediction.as_ref().ok(), &cfg.audit);
    record.failed_checks = audit.failures().map(|c| c.name.clone()).collect();
    if let (None, Some(check)) = (&worst_audit, audit.failures().next()) {
        *worst_audit = Some(WorstAudit {
            run: record.id.clone(),
            check: check.name.clone(),
            first_violation_step: check.first_violation_step,
            detail: check.detail.clone(),
        });
    }
    if let Some(dir) = &cfg.out_dir {
        if cfg.write_trajectories {
            let path = dir.join("trajectories").join(format!("{}.csv", record.id));
            fs::write(&path, trajectory_csv(&traj, None)).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let pred = prediction?;
    record.rule = Some(pred.rule.to_string());
    let report = verify_limit(&traj, &pred, cfg.limit_tol)?;
    record.distance = Some(report.distance);
    record.pass = report.pass && audit.all_hold();
    Ok(())
}

/// Runs every grid point with `count` seeded starts. Per-run errors are
/// recorded in the summary; only configuration and I/O errors abort.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    if let Some(dir) = &cfg.out_dir {
        let sub = if cfg.write_trajectories {
            dir.join("trajectories")
        } else {
            dir.clone()
        };
        fs::create_dir_all(&sub).with_context(|| format!("creating {}", sub.display()))?;
    }
    let mut results = Vec::new();
    let mut worst_audit = None;
    for (gi, params) in cfg.grid.iter().enumerate() {
        let model = (cfg.make_model)(params)?;
        let mut rng = rng_from_seed(cfg.seed.wrapping_add(gi as u64));
        for si in 0..cfg.count {
            let mut record = RunRecord {
                id: format!("g{gi:03}_s{si:04}"),
                params: params.iter().map(|(k, v)| (k.clone(), format_rational(v))).collect(),
                start: Vec::new(),
                rule: None,
                distance: None,
                pass: false,
                steps: 0,
                converged_at: None,
                escape_step: None,
                failed_checks: Vec::new(),
                error: None,
            };
            match draw_start(&model, &mut rng, cfg.region) {
                None => record.error = Some("no start found in the requested region".to_string()),
                Some(start) => {
                    record.start = start.coords();
                    if let Err(e) = run_one(&model, start, cfg, &mut record, &mut worst_audit) {
                        record.error = Some(format!("{e:#}"));
                        record.pass = false;
                    }
                }
            }
            results.push(record);
        }
    }
    let passes = results.iter().filter(|r| r.pass).count();
    let summary = SweepSummary {
        runs: results.len(),
        passes,
        failures: results.iter().filter(|r| !r.pass).map(|r| r.id.clone()).collect(),
        worst_distance: results.iter().filter_map(|r| r.distance).reduce(f64::max),
        worst_audit,
        results,
    };
    if let Some(dir) = &cfg.out_dir {
        let path = dir.join("summary.json");
        fs::write(&path, summary_json(&summary)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(summary)
}

pub fn summary_json(summary: &SweepSummary) -> String {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serialises");
    text.push('\n');
    text
}
