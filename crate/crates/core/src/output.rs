//! Trajectory CSV and JSON documents for fixed points and limit predictions.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::dynamics::{LimitPrediction, Trajectory};
use crate::fixed_points::{Family, FixedPointSet};
use crate::models::Model;
use crate::oracle::OracleReport;
use crate::scalar::{format_rational, Rational, Scalar, Surd};
use crate::state::StatePoint;

/// CSV header. With `labels` (one per female genotype plus the male one)
/// the genotype labels replace `x1, …, xn, u`.
pub fn csv_header(n: usize, labels: Option<&[String]>) -> String {
    let mut cols = vec!["k".to_string()];
    match labels {
        Some(l) if l.len() == n + 1 => cols.extend(l.iter().cloned()),
        _ => {
            cols.extend((1..=n).map(|i| format!("x{i}")));
            cols.push("u".to_string());
        }
    }
    cols.push("alpha".to_string());
    cols.join(",")
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per recorded state: step, coordinates, `u` and `α`.
pub fn trajectory_csv<T: Scalar>(traj: &Trajectory<T>, labels: Option<&[String]>) -> String {
    let n = traj.start().n();
    let mut out = csv_header(n, labels);
    out.push('\n');
    for ((k, p), alpha) in traj.states.iter().zip(&traj.alphas) {
        write!(out, "{k}").expect("writing to a string");
        for v in p.coords() {
            write!(out, ",{}", format_f64(v.as_f64())).expect("writing to a string");
        }
        writeln!(out, ",{}", format_f64(alpha.as_f64())).expect("writing to a string");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub step: u64,
    pub coords: Vec<f64>,
    pub alpha: f64,
}

/// Reads back a trajectory CSV written by [`trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let width = header.split(',').count();
    if width < 4 {
        return Err(format!("header has {width} columns"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != width {
                return Err(format!("line {}: {} fields, expected {width}", i + 2, fields.len()));
            }
            let step = fields[0].parse().map_err(|e| format!("line {}: {e}", i + 2))?;
            let values = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 2)))
                .collect::<Result<Vec<f64>, String>>()?;
            let (alpha, coords) = values.split_last().expect("width checked");
            Ok(CsvRow {
                step,
                coords: coords.to_vec(),
                alpha: *alpha,
            })
        })
        .collect()
}

fn point_json<T: Scalar + std::fmt::Display>(p: &StatePoint<T>) -> Value {
    json!({
        "exact": p.coords().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "approx": p.coords().iter().map(Scalar::as_f64).collect::<Vec<_>>(),
    })
}

fn family_json(f: &Family<Surd>) -> Value {
    json!({
        "base": point_json(&f.base),
        "direction": point_json(&f.direction),
        "parameter": f.parameter,
        "nonneg_range": f.nonneg_range.as_ref().map(|(a, b)| vec![format_rational(a), format_rational(b)]),
    })
}

fn params_json(model: &Model) -> Value {
    Value::Array(
        model
            .params()
            .iter()
            .map(|(k, v)| json!({"name": k, "value": format_rational(v)}))
            .collect(),
    )
}

/// Document for the `fixed-points` command.
pub fn fixed_points_json(model: &Model, set: &FixedPointSet<Surd>, oracle: Option<&OracleReport>) -> Value {
    let mut normalized: Vec<Value> = set.normalized.iter().map(point_json).collect();
    normalized.extend(set.boundary.iter().map(|p| {
        let mut v = point_json(p);
        v["boundary"] = Value::Bool(true);
        v
    }));
    json!({
        "model": model.name(),
        "labels": model.labels(),
        "params": params_json(model),
        "raw": set.raw.iter().map(|r| {
            let mut v = point_json(&r.point);
            v["normalisable"] = Value::Bool(r.normalisable);
            v
        }).collect::<Vec<_>>(),
        "families": set.families.iter().map(family_json).collect::<Vec<_>>(),
        "normalized": normalized,
        "normalized_families": set.normalized_families.iter().map(family_json).collect::<Vec<_>>(),
        "oracle": oracle.map(|o| o.points.clone()),
        "oracle_max_residual": oracle.map(OracleReport::max_residual),
    })
}

pub fn prediction_json(pred: &LimitPrediction) -> Value {
    json!({
        "point": point_json::<Rational>(&pred.point),
        "rule": pred.rule,
        "branch_condition": pred.branch_condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{iterate, IterConfig};
    use crate::fixed_points::model_fixed_points;
    use crate::models::build_model;
    use crate::oracle::{numeric_fixed_points, OracleConfig};
    use crate::scalar::ratio;

    #[test]
    fn csv_round_trip() {
        let model = build_model("arctic-lemming", &[]).unwrap();
        let start = StatePoint::new(vec![0.1, 0.2, 0.3], 0.4);
        let traj = iterate(model.spec(), &start, &IterConfig::default()).unwrap();
        let text = trajectory_csv(&traj, None);
        assert!(text.starts_with("k,x1,x2,x3,u,alpha\n"));
        let rows = parse_trajectory_csv(&text).unwrap();
        assert_eq!(rows.len(), traj.states.len());
        for (row, ((k, p), a)) in rows.iter().zip(traj.states.iter().zip(&traj.alphas)) {
            assert_eq!(row.step, *k);
            assert_eq!(row.coords, p.coords());
            assert_eq!(row.alpha, *a);
        }
        let labelled = trajectory_csv(&traj, Some(model.labels()));
        assert!(labelled.starts_with("k,XX,XX*,X*Y,XY,alpha\n"));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn fixed_points_document() {
        let model = build_model("wolbachia", &[("eta", ratio(3, 4))]).unwrap();
        let set = model_fixed_points(&model).unwrap();
        let oracle = numeric_fixed_points(model.spec(), &OracleConfig::default());
        let doc = fixed_points_json(&model, &set, Some(&oracle));
        assert_eq!(doc["model"], "wolbachia");
        assert_eq!(doc["params"][0]["value"], "3/4");
        assert_eq!(doc["raw"].as_array().unwrap().len(), 3);
        assert_eq!(doc["raw"][0]["normalisable"], false);
        assert_eq!(doc["normalized"][1]["exact"], json!(["3/4", "0", "0", "1/4"]));
        assert_eq!(doc["oracle"].as_array().unwrap().len(), 2);
        assert!(doc["oracle_max_residual"].as_f64().unwrap() < 1e-12);
    }
}
