//! Checks of the inequalities and monotonicity properties that the models'
//! trajectories are known to satisfy.
//!
//! Every check runs on the recorded states of a trajectory. Properties about
//! consecutive steps are checked on consecutive recorded states, which is
//! still valid for monotone sequences when not every step was recorded.
//! Float trajectories are compared with a slack; exact ones with none.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::dynamics::{LimitPrediction, Trajectory};
use crate::models::{InvariantRule, Model, ModelKind};
use crate::operators::classify_membership;
use crate::scalar::{int, ratio, rational_from_f64, Rational, Scalar};
use crate::state::StatePoint;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub holds: bool,
    /// First recorded step at which the property fails.
    pub first_violation_step: Option<u64>,
    /// For properties that hold from some step on: the first recorded step
    /// from which they hold through the end of the trajectory.
    pub threshold_step: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantAudit {
    pub model: String,
    pub checks: Vec<AuditCheck>,
    /// Set when the audit did not apply to this trajectory.
    pub skipped: Option<String>,
}

impl InvariantAudit {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditOptions {
    /// Tolerance on each inequality for float trajectories. Ignored for
    /// exact ones.
    pub slack: f64,
    /// Tolerance on the limit floor for `u`.
    pub limit_tol: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            slack: 1e-12,
            limit_tol: 1e-6,
        }
    }
}

/// Sign of `v`, with values within `slack` of zero reported as 0.
fn sign<T: Scalar>(v: &T, slack: &T) -> i8 {
    if *v > slack.clone() {
        1
    } else if *v < -slack.clone() {
        -1
    } else {
        0
    }
}

struct Ctx<'a, T> {
    states: Vec<(u64, &'a StatePoint<T>)>,
    slack: T,
}

impl<T: Scalar> Ctx<'_, T> {
    fn c(&self, q: &Rational) -> T {
        T::from_rational(q)
    }

    /// `a ≤ b` up to slack.
    fn le(&self, a: &T, b: &T) -> bool {
        *a <= b.clone() + self.slack.clone()
    }

    /// Checks `pred` on every recorded state with step ≥ `from`.
    fn always(&self, name: &str, from: u64, detail: &str, pred: impl Fn(&StatePoint<T>) -> bool) -> AuditCheck {
        let first = self
            .states
            .iter()
            .filter(|(k, _)| *k >= from)
            .find(|(_, p)| !pred(p))
            .map(|(k, _)| *k);
        AuditCheck {
            name: name.to_string(),
            holds: first.is_none(),
            first_violation_step: first,
            threshold_step: None,
            detail: detail.to_string(),
        }
    }

    /// Checks `pred` on consecutive recorded states, both with step ≥ `from`.
    fn always_pairs(
        &self,
        name: &str,
        from: u64,
        detail: &str,
        pred: impl Fn(&StatePoint<T>, &StatePoint<T>) -> bool,
    ) -> AuditCheck {
        let first = self
            .states
            .windows(2)
            .filter(|w| w[0].0 >= from)
            .find(|w| !pred(w[0].1, w[1].1))
            .map(|w| w[1].0);
        AuditCheck {
            name: name.to_string(),
            holds: first.is_none(),
            first_violation_step: first,
            threshold_step: None,
            detail: detail.to_string(),
        }
    }

    /// Finds the step from which `pred` holds on every later recorded state.
    /// The property holds when that step exists, i.e. when the final state
    /// satisfies it.
    fn eventually(&self, name: &str, detail: &str, pred: impl Fn(&StatePoint<T>) -> bool) -> AuditCheck {
        let flags: Vec<bool> = self.states.iter().map(|(_, p)| pred(p)).collect();
        self.threshold(name, detail, &flags, |i| self.states[i].0)
    }

    fn eventually_pairs(
        &self,
        name: &str,
        detail: &str,
        pred: impl Fn(&StatePoint<T>, &StatePoint<T>) -> bool,
    ) -> AuditCheck {
        let flags: Vec<bool> = self.states.windows(2).map(|w| pred(w[0].1, w[1].1)).collect();
        self.threshold(name, detail, &flags, |i| self.states[i].0)
    }

    fn threshold(&self, name: &str, detail: &str, flags: &[bool], step_of: impl Fn(usize) -> u64) -> AuditCheck {
        let last_bad = flags.iter().rposition(|f| !f);
        let (holds, threshold, violation) = match last_bad {
            None => (true, Some(step_of(0)), None),
            Some(i) if i + 1 < flags.len() => (true, Some(step_of(i + 1)), None),
            Some(i) => (false, None, Some(step_of(i))),
        };
        AuditCheck {
            name: name.to_string(),
            holds,
            first_violation_step: violation,
            threshold_step: threshold,
            detail: detail.to_string(),
        }
    }

    /// Checks that `value` has sign `expected` on every recorded state with
    /// step ≥ `from`. Within the slack either sign is accepted for float
    /// trajectories, since these quantities may tend to zero.
    fn sign_is(
        &self,
        name: &str,
        from: u64,
        expected: i8,
        detail: &str,
        value: impl Fn(&StatePoint<T>) -> T,
    ) -> AuditCheck {
        self.always(name, from, detail, |p| {
            let s = sign(&value(p), &self.slack);
            s == expected || (s == 0 && !T::EXACT)
        })
    }
}

fn skipped(model: &Model, reason: String) -> InvariantAudit {
    InvariantAudit {
        model: model.name().to_string(),
        checks: Vec::new(),
        skipped: Some(reason),
    }
}

/// Audits a trajectory against the properties known for its model.
///
/// `prediction` is the closed-form limit for the trajectory's start; when it
/// is given and the trajectory converged, the final `u` is checked against
/// the limit's `u`.
pub fn audit_trajectory<T: Scalar>(
    model: &Model,
    traj: &Trajectory<T>,
    prediction: Option<&LimitPrediction>,
    opts: &AuditOptions,
) -> InvariantAudit {
    let start = traj.start();
    if !classify_membership(model, start).in_model_invariant {
        return skipped(model, "start lies outside the model's invariant set".to_string());
    }
    let slack = if T::EXACT {
        T::zero()
    } else {
        T::from_rational(&rational_from_f64(opts.slack).unwrap_or_else(Rational::zero))
    };
    let ctx = Ctx {
        states: traj.states.iter().map(|(k, p)| (*k, p)).collect(),
        slack,
    };
    let mut checks = Vec::new();

    match model.kind() {
        ModelKind::Wolbachia { eta } => wolbachia_checks(&ctx, eta, &mut checks),
        ModelKind::Arctic => arctic_checks(&ctx, start, &mut checks),
        ModelKind::Lemming { .. } => lemming_checks(&ctx, model, &mut checks),
        ModelKind::Custom => {}
    }

    if let (Some(pred), Some(_)) = (prediction, traj.converged_at) {
        let floor = pred.point.u.clone();
        if floor > Rational::zero() {
            let u = traj.final_state().u.as_f64();
            let floor_f = floor.as_f64();
            checks.push(AuditCheck {
                name: "limit-u-floor".to_string(),
                holds: u >= floor_f - opts.limit_tol,
                first_violation_step: (u < floor_f - opts.limit_tol).then_some(traj.steps),
                threshold_step: None,
                detail: format!("final u = {u:.6e} against limit u = {floor_f:.6e}"),
            });
        }
    }

    if checks.is_empty() {
        return skipped(model, "no known properties for this model".to_string());
    }
    InvariantAudit {
        model: model.name().to_string(),
        checks,
        skipped: None,
    }
}

fn wolbachia_checks<T: Scalar>(ctx: &Ctx<'_, T>, eta: &Rational, checks: &mut Vec<AuditCheck>) {
    let half = ctx.c(&ratio(1, 2));
    let e = ctx.c(eta);
    if eta == &ratio(1, 2) {
        checks.push(ctx.always("half-sum", 1, "x1 + x2 = 1/2 for k >= 1", |p| {
            let s = p.x[0].clone() + p.x[1].clone();
            ctx.le(&s, &half) && ctx.le(&half, &s)
        }));
        return;
    }
    if eta.is_one() {
        checks.push(ctx.always("second-equals-male", 1, "x2 = u for k >= 1", |p| {
            ctx.le(&p.x[1], &p.u) && ctx.le(&p.u, &p.x[1])
        }));
        return;
    }
    checks.push(ctx.always("sum-band", 1, "1/2 <= x1 + x2 <= eta for k >= 1", |p| {
        let s = p.x[0].clone() + p.x[1].clone();
        ctx.le(&half, &s) && ctx.le(&s, &e)
    }));
    checks.push(ctx.always("third-bound", 1, "x3 <= eta for k >= 1", |p| ctx.le(&p.x[2], &e)));
    checks.push(
        ctx.always_pairs("third-decreasing", 1, "x3(k+1) <= x3(k) for k >= 1", |a, b| {
            ctx.le(&b.x[2], &a.x[2])
        }),
    );
    let one_plus = T::one() + e.clone();
    let two_eta = e.clone() + e.clone();
    checks.push(ctx.eventually(
        "weighted-third",
        "x2 + (1 + eta) x3 <= 2 eta (x2 + x3) from some step on",
        |p| {
            let lhs = p.x[1].clone() + one_plus.clone() * p.x[2].clone();
            let rhs = two_eta.clone() * (p.x[1].clone() + p.x[2].clone());
            ctx.le(&lhs, &rhs)
        },
    ));
    checks.push(
        ctx.eventually_pairs("first-increasing", "x1(k+1) >= x1(k) from some step on", |a, b| {
            ctx.le(&a.x[0], &b.x[0])
        }),
    );
}

fn arctic_checks<T: Scalar>(ctx: &Ctx<'_, T>, start: &StatePoint<T>, checks: &mut Vec<AuditCheck>) {
    let c = |p: i64| T::from_rational(&int(p));
    let initial = c(6) * start.x[1].clone() + c(12) * start.x[2].clone() - c(6) * start.x[0].clone();
    let expected = sign(&initial, &ctx.slack);
    if expected == 0 && !initial.is_zero() {
        checks.push(AuditCheck {
            name: "equivalent-conditions".to_string(),
            holds: true,
            first_violation_step: None,
            threshold_step: None,
            detail: "start within slack of 6 x1 = 6 x2 + 12 x3; sign checks skipped".to_string(),
        });
        return;
    }
    let seven_60 = T::from_rational(&ratio(7, 60));
    let seven_24 = T::from_rational(&ratio(7, 24));
    let half = T::from_rational(&ratio(1, 2));
    let relation = match expected {
        1 => "<",
        0 => "=",
        _ => ">",
    };
    checks.push(ctx.sign_is(
        "ratio-first-second",
        1,
        expected,
        &format!("x1 {relation} 3 x2 for k >= 1, as 6 x1 {relation} 6 x2 + 12 x3 at k = 0"),
        |p| c(3) * p.x[1].clone() - p.x[0].clone(),
    ));
    checks.push(ctx.sign_is(
        "second-level",
        2,
        expected,
        &format!("x2 {} 7/60 for k >= 2", flip(relation)),
        |p| p.x[1].clone() - seven_60.clone(),
    ));
    checks.push(ctx.sign_is(
        "second-line",
        2,
        expected,
        &format!("x2 {} 7/24 - x1/2 for k >= 2", flip(relation)),
        |p| p.x[1].clone() - (seven_24.clone() - half.clone() * p.x[0].clone()),
    ));
}

fn flip(relation: &str) -> &'static str {
    match relation {
        "<" => ">",
        ">" => "<",
        _ => "=",
    }
}

fn lemming_checks<T: Scalar>(ctx: &Ctx<'_, T>, model: &Model, checks: &mut Vec<AuditCheck>) {
    let Some((n, gamma, lambda)) = model.lemming_reduction() else {
        return;
    };
    if gamma != ratio(1, 2) {
        return;
    }
    let m = int(n as i64 - 1);
    let y_star_q = (&m - int(4) * &lambda) / (&m * &m);
    let y_star = ctx.c(&y_star_q);
    let Some((_, first)) = ctx.states.iter().find(|(k, _)| *k >= 1) else {
        return;
    };
    let expected = sign(&(first.x[1].clone() - y_star.clone()), &ctx.slack);
    let detail = format!("y - y* keeps its sign from k = 1, with y* = {y_star_q}");
    checks.push(ctx.sign_is("reduced-side", 1, expected, &detail, |p| {
        p.x[1].clone() - y_star.clone()
    }));
    let (name, detail) = match expected {
        -1 => ("reduced-increasing", "y(k+1) >= y(k) for k >= 1, as y(1) < y*"),
        1 => ("reduced-decreasing", "y(k+1) <= y(k) for k >= 1, as y(1) > y*"),
        _ => ("reduced-constant", "y(k) = y* for k >= 1"),
    };
    checks.push(ctx.always_pairs(name, 1, detail, |a, b| match expected {
        -1 => ctx.le(&a.x[1], &b.x[1]),
        1 => ctx.le(&b.x[1], &a.x[1]),
        _ => ctx.le(&a.x[1], &b.x[1]) && ctx.le(&b.x[1], &a.x[1]),
    }));
}

/// Whether the model has an audit beyond the limit floor.
pub fn has_model_audit(model: &Model) -> bool {
    match model.kind() {
        ModelKind::Wolbachia { .. } | ModelKind::Arctic => true,
        ModelKind::Lemming { .. } => model
            .lemming_reduction()
            .is_some_and(|(_, g, _)| g == ratio(1, 2) && model.invariant_rule() != InvariantRule::Unknown),
        ModelKind::Custom => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{iterate, iterate_exact, predicted_limit, IterConfig};
    use crate::models::build_model;
    use crate::operators::NormalizationMode;

    fn q(coords: &[(i64, i64)]) -> StatePoint<Rational> {
        StatePoint::from_ratios(coords)
    }

    fn names(a: &InvariantAudit) -> Vec<&str> {
        a.checks.iter().map(|c| c.name.as_str()).collect()
    }

    #[test]
    fn wolbachia_exact_and_float() {
        let model = build_model("wolbachia", &[("eta", ratio(3, 4))]).unwrap();
        let start = q(&[(1, 10), (2, 10), (3, 10), (4, 10)]);
        let exact = iterate_exact(model.spec(), &start, 40, NormalizationMode::Simplified).unwrap();
        let audit = audit_trajectory(&model, &exact, None, &AuditOptions::default());
        assert!(audit.all_hold(), "{audit:?}");
        assert_eq!(
            names(&audit),
            [
                "sum-band",
                "third-bound",
                "third-decreasing",
                "weighted-third",
                "first-increasing"
            ]
        );

        let pred = predicted_limit(&model, &start).unwrap();
        let traj = iterate(model.spec(), &start.to_f64(), &IterConfig::default()).unwrap();
        let audit = audit_trajectory(&model, &traj, Some(&pred), &AuditOptions::default());
        assert!(audit.all_hold(), "{audit:?}");
        assert!(names(&audit).contains(&"limit-u-floor"));
    }

    #[test]
    fn detects_a_broken_trajectory() {
        let model = build_model("wolbachia", &[("eta", ratio(3, 4))]).unwrap();
        let start = q(&[(1, 10), (2, 10), (3, 10), (4, 10)]);
        let mut traj = iterate_exact(model.spec(), &start, 5, NormalizationMode::Simplified).unwrap();
        traj.states[3].1.x[2] = ratio(9, 10);
        let audit = audit_trajectory(&model, &traj, None, &AuditOptions::default());
        let bound = audit.checks.iter().find(|c| c.name == "third-bound").unwrap();
        assert!(!bound.holds);
        assert_eq!(bound.first_violation_step, Some(3));
    }

    #[test]
    fn arctic_both_directions() {
        let model = build_model("arctic-lemming", &[]).unwrap();
        for start in [
            q(&[(1, 10), (2, 10), (3, 10), (4, 10)]),
            q(&[(6, 10), (1, 20), (0, 1), (7, 20)]),
        ] {
            let exact = iterate_exact(model.spec(), &start, 30, NormalizationMode::Simplified).unwrap();
            let audit = audit_trajectory(&model, &exact, None, &AuditOptions::default());
            assert!(audit.all_hold(), "{audit:?}");
            let traj = iterate(model.spec(), &start.to_f64(), &IterConfig::default()).unwrap();
            let audit = audit_trajectory(&model, &traj, None, &AuditOptions::default());
            assert!(audit.all_hold(), "{audit:?}");
        }
    }

    #[test]
    fn wood_lemming_reduced_monotone() {
        let model = build_model("wood-lemming", &[]).unwrap();
        let start = q(&[(1, 10), (2, 10), (3, 10), (4, 10)]);
        let exact = iterate_exact(model.spec(), &start, 30, NormalizationMode::Simplified).unwrap();
        let audit = audit_trajectory(&model, &exact, None, &AuditOptions::default());
        assert!(audit.all_hold(), "{audit:?}");
        assert_eq!(audit.checks.len(), 2);
    }

    #[test]
    fn outside_invariant_set_is_skipped() {
        let model = build_model("wood-lemming", &[]).unwrap();
        let start = q(&[(0, 1), (0, 1), (1, 2), (1, 2)]);
        let exact = iterate_exact(model.spec(), &start, 3, NormalizationMode::Simplified).unwrap();
        let audit = audit_trajectory(&model, &exact, None, &AuditOptions::default());
        assert!(audit.skipped.is_some());
    }

    #[test]
    fn eventual_threshold() {
        let model = build_model("wolbachia", &[("eta", ratio(3, 4))]).unwrap();
        let traj = Trajectory {
            states: vec![(0, q(&[(1, 4), (1, 4), (1, 4), (1, 4)]))],
            alphas: vec![ratio(3, 4)],
            escape_step: None,
            converged_at: None,
            steps: 0,
            tail: Vec::new(),
        };
        let ctx = Ctx {
            states: traj.states.iter().map(|(k, p)| (*k, p)).collect(),
            slack: Rational::zero(),
        };
        let check = ctx.threshold("t", "", &[false, true, false, true, true], |i| i as u64 * 10);
        assert!(check.holds);
        assert_eq!(check.threshold_step, Some(30));
        let check = ctx.threshold("t", "", &[true, false], |i| i as u64);
        assert!(!check.holds);
        assert!(has_model_audit(&model));
    }
}
