//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes plain strings and returns a JSON document, so the page
//! needs no generated TypeScript glue beyond `wasm-bindgen`'s loader. The
//! `*_json` functions hold the logic and are tested natively.

use gonosomal::dynamics::{iterate, predicted_limit, verify_limit, IterConfig};
use gonosomal::fixed_points::model_fixed_points;
use gonosomal::models::{build_model, Model, CATALOGUE};
use gonosomal::output::{fixed_points_json, prediction_json};
use gonosomal::scalar::{format_rational, parse_rational};
use gonosomal::{Rational, StatePoint};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Longest trajectory the page may request; the plot has no use for more.
const MAX_ITERS: u64 = 100_000;

fn parse_list(text: &str) -> Result<Vec<Rational>, String> {
    text.split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| parse_rational(v.trim()).map_err(|e| e.to_string()))
        .collect()
}

/// Parses `name=v1,v2; other=v` into repeated `(name, value)` pairs.
fn parse_params(text: &str) -> Result<Vec<(String, Rational)>, String> {
    let mut out = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, values) = part
            .split_once('=')
            .ok_or_else(|| format!("parameter `{part}` is not of the form name=value"))?;
        for v in parse_list(values)? {
            out.push((name.trim().to_string(), v));
        }
    }
    Ok(out)
}

fn load(model: &str, params: &str) -> Result<Model, String> {
    let params = parse_params(params)?;
    let borrowed: Vec<(&str, Rational)> = params.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    build_model(model, &borrowed).map_err(|e| e.to_string())
}

fn parse_start(text: &str, n: usize) -> Result<StatePoint<Rational>, String> {
    let coords = parse_list(text)?;
    if coords.len() != n + 1 {
        return Err(format!("start has {} entries, the model needs {}", coords.len(), n + 1));
    }
    let point = StatePoint::from_coords(&coords);
    if point.total() != Rational::from_integer(1.into()) {
        return Err(format!(
            "start entries sum to {}, not 1",
            format_rational(&point.total())
        ));
    }
    Ok(point)
}

pub fn models_json() -> String {
    let models: Vec<Value> = CATALOGUE
        .iter()
        .map(|m| json!({"name": m.name, "params": m.params, "labels": m.labels}))
        .collect();
    Value::Array(models).to_string()
}

/// Trajectory of the normalised operator as `{labels, steps, states}`.
pub fn simulate_json(model: &str, params: &str, start: &str, iters: u64) -> Result<String, String> {
    let model = load(model, params)?;
    let start = parse_start(start, model.n())?;
    let cfg = IterConfig {
        max_iters: iters.clamp(1, MAX_ITERS),
        conv_tol: 0.0,
        ..IterConfig::default()
    };
    let traj = iterate(model.spec(), &start.to_f64(), &cfg).map_err(|e| e.to_string())?;
    let states: Vec<Vec<f64>> = traj.points().map(StatePoint::coords).collect();
    Ok(json!({
        "labels": model.labels(),
        "steps": traj.steps,
        "escape_step": traj.escape_step,
        "states": states,
    })
    .to_string())
}

pub fn fixed_points_doc(model: &str, params: &str) -> Result<String, String> {
    let model = load(model, params)?;
    let set = model_fixed_points(&model).map_err(|e| e.to_string())?;
    Ok(fixed_points_json(&model, &set, None).to_string())
}

/// Closed-form limit for the start, checked against a float trajectory.
pub fn predict_limit_json(model: &str, params: &str, start: &str) -> Result<String, String> {
    let model = load(model, params)?;
    let start = parse_start(start, model.n())?;
    let pred = predicted_limit(&model, &start).map_err(|e| e.to_string())?;
    let traj = iterate(model.spec(), &start.to_f64(), &IterConfig::default()).map_err(|e| e.to_string())?;
    let check = match verify_limit(&traj, &pred, 1e-8) {
        Ok(report) => json!({"distance": report.distance, "pass": report.pass, "steps": report.steps}),
        Err(e) => json!({"error": e.to_string(), "steps": traj.steps}),
    };
    Ok(json!({"prediction": prediction_json(&pred), "check": check}).to_string())
}

#[wasm_bindgen]
pub fn models() -> String {
    models_json()
}

#[wasm_bindgen]
pub fn simulate(model: &str, params: &str, start: &str, iters: u32) -> Result<String, JsError> {
    simulate_json(model, params, start, u64::from(iters)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixed_points(model: &str, params: &str) -> Result<String, JsError> {
    fixed_points_doc(model, params).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn predict_limit(model: &str, params: &str, start: &str) -> Result<String, JsError> {
    predict_limit_json(model, params, start).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Value {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn params_accept_lists_and_several_names() {
        let p = parse_params("gamma=1/2,1/4; gamma = 1/8").unwrap();
        assert_eq!(p.len(), 3);
        assert!(parse_params("eta").is_err());
        assert!(parse_params("").unwrap().is_empty());
    }

    #[test]
    fn simulate_reports_every_step() {
        let doc = parse(&simulate_json("arctic-lemming", "", "1/4,1/4,1/4,1/4", 5).unwrap());
        assert_eq!(doc["steps"], 5);
        assert_eq!(doc["states"].as_array().unwrap().len(), 6);
        assert!(simulate_json("arctic-lemming", "", "1/2,1/2,1/2,1/2", 5).is_err());
    }

    #[test]
    fn prediction_and_fixed_points() {
        let doc = parse(&predict_limit_json("wolbachia", "eta=3/4", "1/4,1/4,1/4,1/4").unwrap());
        assert_eq!(doc["prediction"]["point"]["exact"], json!(["3/4", "0", "0", "1/4"]));
        assert_eq!(doc["check"]["pass"], true);
        let fp = parse(&fixed_points_doc("wood-lemming", "").unwrap());
        assert_eq!(fp["model"], "wood-lemming");
        assert!(fixed_points_doc("wolbachia", "eta=1/4").is_err());
    }

    #[test]
    fn catalogue_lists_models() {
        let doc = parse(&models_json());
        assert!(doc.as_array().unwrap().iter().any(|m| m["name"] == "cichlid"));
    }
}
