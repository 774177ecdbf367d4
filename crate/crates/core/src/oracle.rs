//! Numeric fixed-point search, independent of the closed forms.
//!
//! Fixed points of the simplified normalised operator are the points with
//! `Γᵀx = (Σ x) x` and `u = 1 − Σ x`. Newton's method is run on
//! `G(x) = Γᵀx − (Σ x) x` from every node of a simplex grid. Linear systems
//! are solved through an SVD pseudo-inverse so that lines of fixed points and
//! double roots do not stall the iteration.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::GonosomalSpec;
use crate::operators::{NormalizationMode, Operator};
use crate::scalar::rational_to_f64;
use crate::state::{sup_distance, StatePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Grid points per unit along each simplex edge.
    pub grid_resolution: usize,
    /// Largest accepted residual `‖Ṽ(s) − s‖∞`.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Points closer than this are merged.
    pub dedup_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid_resolution: 12,
            newton_tol: 1e-12,
            max_newton_iters: 200,
            dedup_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub points: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub seeds: usize,
}

impl OracleReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Below this magnitude a negative coordinate is treated as rounding noise.
const NEGATIVE_SLACK: f64 = 1e-9;

/// Calls `f` with every composition of `total` into `parts` non-negative parts.
fn compositions(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn go(remaining: usize, slot: usize, current: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == current.len() {
            current[slot] = remaining;
            f(current);
            return;
        }
        for v in 0..=remaining {
            current[slot] = v;
            go(remaining - v, slot + 1, current, f);
        }
    }
    let mut current = vec![0; parts];
    go(total, 0, &mut current, f);
}

fn newton(gt: &DMatrix<f64>, seed: DVector<f64>, max_iters: usize) -> DVector<f64> {
    let n = seed.len();
    let mut x = seed;
    for _ in 0..max_iters {
        let alpha = x.sum();
        let g = gt * &x - &x * alpha;
        let mut jacobian = gt.clone();
        for i in 0..n {
            jacobian[(i, i)] -= alpha;
            for j in 0..n {
                jacobian[(i, j)] -= x[i];
            }
        }
        let svd = jacobian.svd(true, true);
        let Ok(step) = svd.solve(&(-g), 1e-14) else {
            break;
        };
        x += &step;
        if !x.iter().all(|v| v.is_finite()) || step.amax() < 1e-15 {
            break;
        }
    }
    x
}

/// Fixed points of the simplified normalised operator in the closed simplex.
/// The pure-male point `(0, …, 0, 1)` is included when some genotype has an
/// all-zero female row, since the operator then extends continuously to it.
pub fn numeric_fixed_points(spec: &GonosomalSpec, config: &OracleConfig) -> OracleReport {
    let n = spec.n();
    let gt = DMatrix::from_fn(n, n, |k, i| rational_to_f64(&spec.gamma()[i][k]));
    let op = Operator::<f64>::new(spec);

    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut seeds = 0;
    let r = config.grid_resolution.max(1);
    compositions(r, n + 1, &mut |parts| {
        if parts[..n].iter().all(|&p| p == 0) {
            return;
        }
        seeds += 1;
        let seed = DVector::from_iterator(n, parts[..n].iter().map(|&p| p as f64 / r as f64));
        let x = newton(&gt, seed, config.max_newton_iters);
        if x.iter().any(|v| !v.is_finite() || *v < -NEGATIVE_SLACK) {
            return;
        }
        let x: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        let alpha: f64 = x.iter().sum();
        if alpha < NEGATIVE_SLACK || alpha > 1.0 + NEGATIVE_SLACK {
            return;
        }
        let point = StatePoint::new(x, (1.0 - alpha).max(0.0));
        let Ok(step) = op.apply_normalized(&point, NormalizationMode::Simplified) else {
            return;
        };
        let residual = point.distance(&step.point);
        if residual < config.newton_tol {
            candidates.push((point.coords(), residual));
        }
    });

    if spec.gamma().iter().any(|row| row.iter().all(num_traits::Zero::is_zero)) {
        let mut male = vec![0.0; n + 1];
        male[n] = 1.0;
        candidates.push((male, 0.0));
    }

    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite coordinates"));
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    for (p, res) in candidates {
        match points.iter().position(|q| sup_distance(q, &p) < config.dedup_tol) {
            Some(i) => residuals[i] = residuals[i].min(res),
            None => {
                points.push(p);
                residuals.push(res);
            }
        }
    }
    OracleReport {
        points,
        residuals,
        seeds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;
    use crate::scalar::{int, ratio};

    fn close_to(points: &[Vec<f64>], target: &[f64], tol: f64) -> bool {
        points.iter().any(|p| sup_distance(p, target) < tol)
    }

    #[test]
    fn wolbachia_three_fifths() {
        let model = build_model("wolbachia", &[("eta", ratio(3, 5))]).unwrap();
        let report = numeric_fixed_points(model.spec(), &OracleConfig::default());
        assert_eq!(report.points.len(), 2, "{:?}", report.points);
        assert!(close_to(&report.points, &[0.0, 0.5, 0.0, 0.5], 1e-10));
        assert!(close_to(&report.points, &[0.6, 0.0, 0.0, 0.4], 1e-10));
    }

    #[test]
    fn arctic_points() {
        let model = build_model("arctic-lemming", &[]).unwrap();
        let report = numeric_fixed_points(model.spec(), &OracleConfig::default());
        assert_eq!(report.points.len(), 2);
        assert!(close_to(&report.points, &[0.5, 0.0, 0.0, 0.5], 1e-10));
        assert!(close_to(
            &report.points,
            &[7.0 / 20.0, 7.0 / 60.0, 7.0 / 60.0, 5.0 / 12.0],
            1e-10
        ));
    }

    #[test]
    fn all_male_inheritance() {
        let spec = GonosomalSpec::new(vec![(vec![int(0), int(0)], int(1)), (vec![int(0), int(0)], int(1))]).unwrap();
        let report = numeric_fixed_points(&spec, &OracleConfig::default());
        assert_eq!(report.points, vec![vec![0.0, 0.0, 1.0]]);
    }

    #[test]
    fn compositions_count() {
        let mut count = 0;
        compositions(4, 3, &mut |_| count += 1);
        assert_eq!(count, 15);
    }
}
