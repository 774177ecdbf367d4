//! Trajectories of the normalised operator, closed-form limit predictions
//! and convergence checks.

use std::collections::VecDeque;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::GonosomalSpec;
use crate::models::{InvariantRule, LimitRule, Model, ModelKind};
use crate::operators::{classify_membership, in_simplex, NormalizationMode, Operator, OperatorError};
use crate::scalar::{format_rational, int, ratio, rational_from_f64, Rational, Scalar};
use crate::state::{sup_distance, StatePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("no limit theorem applies: {0}")]
    NoTheoremApplies(String),
    #[error("trajectory did not converge")]
    NotConverged,
    #[error("start coordinate {0} is not a finite number")]
    NonFinite(f64),
    #[error("start is not a point of the simplex: coordinates must be non-negative and sum to 1")]
    OutsideSimplex,
}

/// Iteration settings. Convergence is declared at the first step `k` such
/// that the sup-norm differences `‖s_j − s_{j−1}‖` for `j = k, …, k + window − 1`
/// are all below `conv_tol`; iteration stops once that is confirmed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterConfig {
    pub max_iters: u64,
    pub conv_tol: f64,
    pub record_every: u64,
    pub window: usize,
    pub mode: NormalizationMode,
}

impl Default for IterConfig {
    fn default() -> Self {
        IterConfig {
            max_iters: 1_000_000,
            conv_tol: 1e-13,
            record_every: 1,
            window: 10,
            mode: NormalizationMode::Simplified,
        }
    }
}

/// Number of trailing states kept for the slope diagnostic.
pub const TAIL_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    /// Recorded `(step, state)` pairs: step 0, every `record_every`-th step
    /// and the last step.
    pub states: Vec<(u64, StatePoint<T>)>,
    /// `α(k) = Σ x_i(k)` for each recorded state.
    pub alphas: Vec<T>,
    /// Step whose state has `u = 0` or `α = 0`.
    pub escape_step: Option<u64>,
    pub converged_at: Option<u64>,
    /// Number of operator applications performed.
    pub steps: u64,
    /// Last few states (up to [`TAIL_LEN`]), oldest first.
    pub tail: Vec<(u64, StatePoint<T>)>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_state(&self) -> &StatePoint<T> {
        &self.states.last().expect("a trajectory holds its start").1
    }

    pub fn start(&self) -> &StatePoint<T> {
        &self.states[0].1
    }

    /// Recorded states without step indices.
    pub fn points(&self) -> impl Iterator<Item = &StatePoint<T>> {
        self.states.iter().map(|(_, p)| p)
    }
}

struct Recorder<T> {
    traj: Trajectory<T>,
    tail: VecDeque<(u64, StatePoint<T>)>,
    record_every: u64,
    run: usize,
}

impl<T: Scalar> Recorder<T> {
    fn new(start: StatePoint<T>, step: u64, record_every: u64) -> Self {
        let alpha = start.alpha();
        let mut tail = VecDeque::with_capacity(TAIL_LEN);
        tail.push_back((step, start.clone()));
        Recorder {
            traj: Trajectory {
                states: vec![(step, start)],
                alphas: vec![alpha],
                escape_step: None,
                converged_at: None,
                steps: step,
                tail: Vec::new(),
            },
            tail,
            record_every: record_every.max(1),
            run: 0,
        }
    }

    fn push(&mut self, step: u64, state: &StatePoint<T>, force: bool) {
        self.traj.steps = step;
        if self.tail.len() == TAIL_LEN {
            self.tail.pop_front();
        }
        self.tail.push_back((step, state.clone()));
        if force || step % self.record_every == 0 {
            self.traj.alphas.push(state.alpha());
            self.traj.states.push((step, state.clone()));
        }
    }

    /// Updates the convergence run with `d_step`; true once confirmed.
    fn observe(&mut self, step: u64, diff: f64, cfg: &IterConfig) -> bool {
        if diff < cfg.conv_tol {
            self.run += 1;
        } else {
            self.run = 0;
        }
        if self.run >= cfg.window.max(1) {
            self.traj.converged_at = Some(step + 1 - self.run as u64);
            true
        } else {
            false
        }
    }

    fn finish(mut self) -> Trajectory<T> {
        let last = self.tail.back().cloned().expect("tail holds the last state");
        if self.traj.states.last().map(|(k, _)| *k) != Some(last.0) {
            self.traj.alphas.push(last.1.alpha());
            self.traj.states.push(last);
        }
        self.traj.tail = self.tail.into_iter().collect();
        self.traj
    }
}

fn check_finite(p: &StatePoint<f64>) -> Result<(), DynamicsError> {
    match p.coords().into_iter().find(|v| !v.is_finite()) {
        Some(v) => Err(DynamicsError::NonFinite(v)),
        None => Ok(()),
    }
}

fn escaped<T: Scalar>(p: &StatePoint<T>) -> bool {
    p.u.is_zero() || p.alpha().is_zero()
}

/// Bookkeeping shared by every float lane: step counter, convergence run,
/// recording schedule and termination.
struct Progress {
    rec: Recorder<f64>,
    step: u64,
    until_record: u64,
    filled: usize,
    escaped: bool,
    done: bool,
}

impl Progress {
    fn new(first_step: u64, rec: Recorder<f64>) -> Self {
        let until_record = rec.record_every - first_step % rec.record_every;
        Progress {
            rec,
            step: first_step,
            until_record,
            filled: 0,
            escaped: false,
            done: false,
        }
    }

    #[inline]
    fn exhausted(&mut self, cfg: &IterConfig) -> bool {
        if self.step >= cfg.max_iters {
            self.done = true;
        }
        self.done
    }

    /// Accounts for a step that produced a state at distance `diff` from the
    /// previous one. `state` is only called when the state is recorded.
    #[inline]
    fn after_step(
        &mut self,
        diff: f64,
        escaped: bool,
        cfg: &IterConfig,
        state: impl FnOnce() -> StatePoint<f64>,
    ) -> bool {
        self.filled += 1;
        let rec = &mut self.rec;
        if diff < cfg.conv_tol {
            rec.run += 1;
        } else {
            rec.run = 0;
        }
        self.until_record -= 1;
        if self.until_record == 0 {
            self.until_record = rec.record_every;
            let p = state();
            rec.traj.alphas.push(p.alpha());
            rec.traj.states.push((self.step, p));
        }
        if escaped {
            self.escaped = true;
            self.done = true;
        } else if rec.run >= cfg.window.max(1) {
            rec.traj.converged_at = Some(self.step + 1 - rec.run as u64);
            self.done = true;
        } else if self.step >= cfg.max_iters {
            self.done = true;
        }
        self.done
    }

    /// `ring_state(s)` returns the state of step `s`, for the last
    /// `min(filled, TAIL_LEN)` steps.
    fn finish(mut self, ring_state: impl Fn(u64) -> StatePoint<f64>) -> Trajectory<f64> {
        let kept = self.filled.min(TAIL_LEN);
        let tail = &mut self.rec.tail;
        if kept > 0 {
            while tail.len() > TAIL_LEN - kept {
                tail.pop_front();
            }
            for j in (0..kept).rev() {
                let s = self.step - j as u64;
                tail.push_back((s, ring_state(s)));
            }
        }
        if self.escaped {
            self.rec.traj.escape_step = Some(self.step);
        }
        self.rec.traj.steps = self.step;
        self.rec.finish()
    }
}

fn ring_slot(step: u64) -> usize {
    (step % TAIL_LEN as u64) as usize
}

/// A float stepping strategy and the per-trajectory state it works on.
trait Stepper {
    type Lane;
    fn lane(&self, start: &StatePoint<f64>, first_step: u64, rec: Recorder<f64>) -> Self::Lane;
    /// Performs one step; true once the trajectory has finished.
    fn advance(&self, lane: &mut Self::Lane, cfg: &IterConfig) -> Result<bool, DynamicsError>;
    fn finish(&self, lane: Self::Lane) -> Trajectory<f64>;
}

/// Simplified operator with the dimension known at compile time. The
/// arithmetic is the same as [`Operator::step_into`]; fixed-size state lets
/// the loops unroll and keeps a trajectory in registers.
struct FixedStepper<const N: usize> {
    gamma: [[f64; N]; N],
    gamma_tilde: [f64; N],
}

struct FixedLane<const N: usize> {
    x: [f64; N],
    u: f64,
    ring: [([f64; N], f64); TAIL_LEN],
    progress: Progress,
}

impl<const N: usize> FixedStepper<N> {
    fn new(spec: &GonosomalSpec) -> Self {
        let mut gamma = [[0.0; N]; N];
        let mut gamma_tilde = [0.0; N];
        for i in 0..N {
            for k in 0..N {
                gamma[i][k] = spec.gamma()[i][k].as_f64();
            }
            gamma_tilde[i] = spec.gamma_tilde()[i].as_f64();
        }
        FixedStepper { gamma, gamma_tilde }
    }
}

fn fixed_state<const N: usize>(x: &[f64; N], u: f64) -> StatePoint<f64> {
    StatePoint::new(x.to_vec(), u)
}

impl<const N: usize> Stepper for FixedStepper<N> {
    type Lane = FixedLane<N>;

    fn lane(&self, start: &StatePoint<f64>, first_step: u64, rec: Recorder<f64>) -> FixedLane<N> {
        FixedLane {
            x: start.x[..].try_into().expect("state dimension matches the spec"),
            u: start.u,
            ring: [([0.0; N], 0.0); TAIL_LEN],
            progress: Progress::new(first_step, rec),
        }
    }

    #[inline]
    fn advance(&self, lane: &mut FixedLane<N>, cfg: &IterConfig) -> Result<bool, DynamicsError> {
        if lane.progress.exhausted(cfg) {
            return Ok(true);
        }
        let x = lane.x;
        let alpha: f64 = x.iter().sum();
        if alpha == 0.0 {
            return Err(OperatorError::DegenerateDenominator.into());
        }
        let mut nx = [0.0; N];
        let mut nu = 0.0;
        for i in 0..N {
            for k in 0..N {
                nx[k] += self.gamma[i][k] * x[i];
            }
            nu += self.gamma_tilde[i] * x[i];
        }
        let inv = 1.0 / alpha;
        let mut female = 0.0;
        let mut diff: f64 = 0.0;
        for k in 0..N {
            nx[k] *= inv;
            female += nx[k];
            diff = diff.max((nx[k] - x[k]).abs());
        }
        nu *= inv;
        diff = diff.max((nu - lane.u).abs());
        lane.x = nx;
        lane.u = nu;
        let p = &mut lane.progress;
        p.step += 1;
        lane.ring[ring_slot(p.step)] = (nx, nu);
        Ok(p.after_step(diff, nu == 0.0 || female == 0.0, cfg, || fixed_state(&nx, nu)))
    }

    fn finish(&self, lane: FixedLane<N>) -> Trajectory<f64> {
        let ring = lane.ring;
        lane.progress.finish(|s| {
            let (x, u) = &ring[ring_slot(s)];
            fixed_state(x, *u)
        })
    }
}

/// Any dimension, either normalisation mode; states live on the heap.
struct SliceStepper {
    op: Operator<f64>,
    mode: NormalizationMode,
}

struct SliceLane {
    cur: Vec<f64>,
    next: Vec<f64>,
    ring: Vec<Vec<f64>>,
    progress: Progress,
}

impl Stepper for SliceStepper {
    type Lane = SliceLane;

    fn lane(&self, start: &StatePoint<f64>, first_step: u64, rec: Recorder<f64>) -> SliceLane {
        let width = start.n() + 1;
        SliceLane {
            cur: start.coords(),
            next: vec![0.0; width],
            ring: vec![vec![0.0; width]; TAIL_LEN],
            progress: Progress::new(first_step, rec),
        }
    }

    fn advance(&self, lane: &mut SliceLane, cfg: &IterConfig) -> Result<bool, DynamicsError> {
        if lane.progress.exhausted(cfg) {
            return Ok(true);
        }
        let escaped = match self.mode {
            NormalizationMode::Simplified => self.op.step_into(&lane.cur, &mut lane.next)?,
            NormalizationMode::Full => {
                let s = self
                    .op
                    .apply_normalized(&StatePoint::from_coords(&lane.cur), self.mode)?;
                lane.next.copy_from_slice(&s.point.coords());
                s.escaped
            }
        };
        let diff = sup_distance(&lane.cur, &lane.next);
        std::mem::swap(&mut lane.cur, &mut lane.next);
        let p = &mut lane.progress;
        p.step += 1;
        lane.ring[ring_slot(p.step)].copy_from_slice(&lane.cur);
        let cur = &lane.cur;
        Ok(p.after_step(diff, escaped, cfg, || StatePoint::from_coords(cur)))
    }

    fn finish(&self, lane: SliceLane) -> Trajectory<f64> {
        let ring = lane.ring;
        lane.progress.finish(|s| StatePoint::from_coords(&ring[ring_slot(s)]))
    }
}

/// A computation that is generic over the stepper type.
trait StepperFn<R> {
    fn call<S: Stepper>(self, stepper: &S) -> R;
}

fn with_stepper<R>(spec: &GonosomalSpec, mode: NormalizationMode, f: impl StepperFn<R>) -> R {
    if mode == NormalizationMode::Simplified {
        match spec.n() {
            2 => return f.call(&FixedStepper::<2>::new(spec)),
            3 => return f.call(&FixedStepper::<3>::new(spec)),
            4 => return f.call(&FixedStepper::<4>::new(spec)),
            5 => return f.call(&FixedStepper::<5>::new(spec)),
            _ => {}
        }
    }
    f.call(&SliceStepper {
        op: Operator::new(spec),
        mode,
    })
}

fn run_float(
    spec: &GonosomalSpec,
    start: StatePoint<f64>,
    first_step: u64,
    rec: Recorder<f64>,
    cfg: &IterConfig,
) -> Result<Trajectory<f64>, DynamicsError> {
    check_finite(&start)?;
    struct Single<'a> {
        start: StatePoint<f64>,
        first_step: u64,
        rec: Recorder<f64>,
        cfg: &'a IterConfig,
    }
    impl StepperFn<Result<Trajectory<f64>, DynamicsError>> for Single<'_> {
        fn call<S: Stepper>(self, stepper: &S) -> Result<Trajectory<f64>, DynamicsError> {
            let mut lane = stepper.lane(&self.start, self.first_step, self.rec);
            while !stepper.advance(&mut lane, self.cfg)? {}
            Ok(stepper.finish(lane))
        }
    }
    with_stepper(
        spec,
        cfg.mode,
        Single {
            start,
            first_step,
            rec,
            cfg,
        },
    )
}

fn prepare_start(spec: &GonosomalSpec, start: &StatePoint<f64>, cfg: &IterConfig) -> Result<(), DynamicsError> {
    check_finite(start)?;
    if start.n() != spec.n() {
        return Err(OperatorError::DimensionMismatch {
            expected: spec.n(),
            found: start.n(),
        }
        .into());
    }
    if !in_simplex(start) {
        return Err(DynamicsError::OutsideSimplex);
    }
    if start.alpha() == 0.0 || (escaped(start) && cfg.mode == NormalizationMode::Full) {
        return Err(OperatorError::DegenerateDenominator.into());
    }
    Ok(())
}

/// Iterates the normalised operator in floating point.
pub fn iterate(
    spec: &GonosomalSpec,
    start: &StatePoint<f64>,
    cfg: &IterConfig,
) -> Result<Trajectory<f64>, DynamicsError> {
    prepare_start(spec, start, cfg)?;
    let rec = Recorder::new(start.clone(), 0, cfg.record_every);
    run_float(spec, start.clone(), 0, rec, cfg)
}

/// Exact iteration for `steps` steps (or until escape), recording every state.
pub fn iterate_exact<T: Scalar>(
    spec: &GonosomalSpec,
    start: &StatePoint<T>,
    steps: u64,
    mode: NormalizationMode,
) -> Result<Trajectory<T>, DynamicsError> {
    let op = Operator::<T>::new(spec);
    let mut rec = Recorder::new(start.clone(), 0, 1);
    let mut cur = start.clone();
    for k in 1..=steps {
        let s = op.apply_normalized(&cur, mode)?;
        rec.push(k, &s.point, true);
        cur = s.point;
        if s.escaped {
            rec.traj.escape_step = Some(k);
            break;
        }
    }
    Ok(rec.finish())
}

/// Runs `exact_steps` exact rational steps, then continues in floating point
/// from the last exact state. The float trajectory carries on the step
/// numbering and the convergence window across the hand-off.
pub fn iterate_hybrid(
    spec: &GonosomalSpec,
    start: &StatePoint<Rational>,
    exact_steps: u64,
    cfg: &IterConfig,
) -> Result<(Trajectory<Rational>, Trajectory<f64>), DynamicsError> {
    let exact = iterate_exact(spec, start, exact_steps.min(cfg.max_iters), cfg.mode)?;
    let mut rec = Recorder::new(start.to_f64(), 0, cfg.record_every);
    let mut prev = start.to_f64();
    for (k, p) in exact.states.iter().skip(1) {
        let cur = p.to_f64();
        let converged = rec.observe(*k, prev.distance(&cur), cfg);
        rec.push(*k, &cur, false);
        prev = cur;
        if converged {
            break;
        }
    }
    let last_step = rec.traj.steps;
    if exact.escape_step.is_some() || rec.traj.converged_at.is_some() {
        let mut traj = rec.finish();
        traj.escape_step = exact.escape_step.filter(|&e| e <= last_step);
        return Ok((exact, traj));
    }
    let traj = run_float(spec, prev, last_step, rec, cfg)?;
    Ok((exact, traj))
}

/// Closed-form limit of a trajectory, with the theorem branch that gave it.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPrediction {
    pub point: StatePoint<Rational>,
    pub rule: &'static str,
    pub branch_condition: String,
}

/// Exact value of a float start, rescaled to sum to exactly 1. Rounding in
/// the float coordinates would otherwise put it just off the simplex; the
/// rescaling keeps every zero and every sign.
fn exact_start(start: &StatePoint<f64>) -> Result<StatePoint<Rational>, DynamicsError> {
    let conv = |v: f64| rational_from_f64(v).ok_or(DynamicsError::NonFinite(v));
    let point = StatePoint::new(
        start.x.iter().map(|&v| conv(v)).collect::<Result<_, _>>()?,
        conv(start.u)?,
    );
    let total = point.total();
    if total.sign_positive() {
        Ok(StatePoint::new(
            point.x.iter().map(|v| v / &total).collect(),
            &point.u / &total,
        ))
    } else {
        Ok(point)
    }
}

/// Prediction for a floating start, taken exactly: zero tests are literal.
pub fn predicted_limit_f64(model: &Model, start: &StatePoint<f64>) -> Result<LimitPrediction, DynamicsError> {
    predicted_limit(model, &exact_start(start)?)
}

fn simplex_point(coords: &[Rational]) -> StatePoint<Rational> {
    StatePoint::from_coords(coords)
}

pub fn predicted_limit(model: &Model, start: &StatePoint<Rational>) -> Result<LimitPrediction, DynamicsError> {
    let membership = classify_membership(model, start);
    if !membership.in_model_invariant {
        let reason = if model.invariant_rule() == InvariantRule::Unknown {
            format!("model `{}` has no known invariant set", model.name())
        } else {
            format!("start lies outside the invariant set {}", model.invariant_rule())
        };
        return Err(DynamicsError::NoTheoremApplies(reason));
    }
    let zero = Rational::zero();
    let half = ratio(1, 2);
    let x = &start.x;
    match (model.limit_rule(), model.kind()) {
        (LimitRule::Wolbachia, ModelKind::Wolbachia { eta }) => {
            let one = Rational::one();
            if eta == &half {
                let s1 = one_step(model, start)?;
                if x[2].is_zero() {
                    return Ok(LimitPrediction {
                        point: s1,
                        rule: "wolbachia-half-fixed",
                        branch_condition: "x3(0) = 0, so the first iterate is already fixed".to_string(),
                    });
                }
                let (x1, x3) = (&s1.x[0], &s1.x[2]);
                let denom = &one + int(4) * x3;
                let limit_x1 = (x1 + x3) / &denom;
                let limit_x2 = (&one + int(2) * (x3 - x1)) / (int(2) * &denom);
                return Ok(LimitPrediction {
                    point: simplex_point(&[limit_x1, limit_x2, zero.clone(), half.clone()]),
                    rule: "wolbachia-half-closed-form",
                    branch_condition: format!(
                        "x3(0) > 0; evaluated at x1(1) = {}, x3(1) = {}",
                        format_rational(x1),
                        format_rational(x3)
                    ),
                });
            }
            if x[0].is_zero() && x[2].is_zero() {
                return Ok(LimitPrediction {
                    point: simplex_point(&[zero.clone(), half.clone(), zero.clone(), half]),
                    rule: "wolbachia-no-infection",
                    branch_condition: "x1(0) = x3(0) = 0".to_string(),
                });
            }
            let point = if eta == &one {
                simplex_point(&[one, zero.clone(), zero.clone(), zero])
            } else {
                simplex_point(&[eta.clone(), zero.clone(), zero, &one - eta])
            };
            Ok(LimitPrediction {
                point,
                rule: if eta.is_one() {
                    "wolbachia-full-transmission"
                } else {
                    "wolbachia-partial-transmission"
                },
                branch_condition: "x1(0) > 0 or x3(0) > 0".to_string(),
            })
        }
        (LimitRule::Arctic, _) => {
            if x[1].is_zero() && x[2].is_zero() {
                Ok(LimitPrediction {
                    point: simplex_point(&[half.clone(), zero.clone(), zero, half]),
                    rule: "arctic-boundary",
                    branch_condition: "x2(0) = x3(0) = 0".to_string(),
                })
            } else {
                Ok(LimitPrediction {
                    point: simplex_point(&[ratio(7, 20), ratio(7, 60), ratio(7, 60), ratio(5, 12)]),
                    rule: "arctic-interior",
                    branch_condition: "x2(0) > 0 or x3(0) > 0".to_string(),
                })
            }
        }
        (LimitRule::Lemming, _) => {
            let (n, gamma, lambda) = model.lemming_reduction().expect("lemming model");
            let m = int(n as i64 - 1);
            let diagonal = &m * &gamma;
            if gamma != half && lambda != diagonal {
                return Err(DynamicsError::NoTheoremApplies(format!(
                    "gamma1 = {} is not 1/2 and lambda = {} differs from (n-1)*gamma1 = {}",
                    format_rational(&gamma),
                    format_rational(&lambda),
                    format_rational(&diagonal)
                )));
            }
            let s1 = one_step(model, start)?;
            let reduced = (s1.x[0].clone(), s1.x[1].clone());
            let (limit, rule, condition) = if gamma != half {
                (
                    (gamma.clone(), (Rational::one() - int(2) * &gamma) / &m),
                    "lemming-diagonal",
                    format!("lambda = (n-1)*gamma1 = {}, gamma1 != 1/2", format_rational(&lambda)),
                )
            } else if lambda >= &m / int(4) {
                (
                    (half.clone(), zero.clone()),
                    "lemming-half-large-lambda",
                    format!("gamma1 = 1/2, lambda = {} >= (n-1)/4", format_rational(&lambda)),
                )
            } else if reduced == (half.clone(), zero.clone()) {
                (
                    (half.clone(), zero.clone()),
                    "lemming-half-boundary",
                    "gamma1 = 1/2, lambda < (n-1)/4, reduced state (1/2, 0) after one step".to_string(),
                )
            } else {
                let y_star = (&m - int(4) * &lambda) / (&m * &m);
                (
                    (int(2) * &lambda / &m, y_star),
                    "lemming-half-interior",
                    format!(
                        "gamma1 = 1/2, lambda = {} < (n-1)/4, reduced state after one step differs from (1/2, 0)",
                        format_rational(&lambda)
                    ),
                )
            };
            let mut coords = vec![limit.0.clone()];
            coords.extend(std::iter::repeat(limit.1).take(n - 1));
            coords.push(limit.0);
            Ok(LimitPrediction {
                point: simplex_point(&coords),
                rule,
                branch_condition: condition,
            })
        }
        _ => Err(DynamicsError::NoTheoremApplies(format!(
            "model `{}` is not covered by a limit theorem",
            model.name()
        ))),
    }
}

fn one_step(model: &Model, start: &StatePoint<Rational>) -> Result<StatePoint<Rational>, DynamicsError> {
    let op = Operator::<Rational>::new(model.spec());
    Ok(op.apply_normalized(start, NormalizationMode::Simplified)?.point)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub distance: f64,
    pub tol: f64,
    pub pass: bool,
    /// Least-squares slope of the distance to the prediction over the last
    /// recorded steps, per step. Non-positive when the tail approaches it.
    pub tail_slope: f64,
    pub converged_at: u64,
    pub steps: u64,
}

pub fn verify_limit<T: Scalar>(
    traj: &Trajectory<T>,
    pred: &LimitPrediction,
    tol: f64,
) -> Result<ConvergenceReport, DynamicsError> {
    let converged_at = traj.converged_at.ok_or(DynamicsError::NotConverged)?;
    let target = pred.point.to_f64();
    let distance = traj.final_state().to_f64().distance(&target);
    let samples: Vec<(f64, f64)> = traj
        .tail
        .iter()
        .map(|(k, p)| (*k as f64, p.to_f64().distance(&target)))
        .collect();
    Ok(ConvergenceReport {
        distance,
        tol,
        pass: distance < tol,
        tail_slope: least_squares_slope(&samples),
        converged_at,
        steps: traj.steps,
    })
}

fn least_squares_slope(samples: &[(f64, f64)]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let n = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = samples.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// State `(x, y)` of the reduced lemming system, where `y` stands for each
/// of `x_2, …, x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> ReducedState<T> {
    /// `2x + (n − 1)y`, which is 1 on the reduced simplex.
    pub fn mass(&self, n: usize) -> T {
        let m = T::from_rational(&int(n as i64 - 1));
        self.x.clone() + self.x.clone() + m * self.y.clone()
    }
}

/// One step of the normalised reduced lemming map.
pub fn sv_reduced_step<T: Scalar>(
    n: usize,
    gamma: &Rational,
    lambda: &Rational,
    rs: &ReducedState<T>,
) -> Result<ReducedState<T>, DynamicsError> {
    let m = T::from_rational(&int(n as i64 - 1));
    let g = T::from_rational(gamma);
    let l = T::from_rational(lambda);
    let two = T::from_rational(&int(2));
    let denom = rs.x.clone() + m.clone() * rs.y.clone();
    if denom.is_zero() {
        return Err(OperatorError::DegenerateDenominator.into());
    }
    let x = (g.clone() * rs.x.clone() + l.clone() * rs.y.clone()) / denom.clone();
    let y = ((T::one() - two.clone() * g) * rs.x.clone() + (m.clone() - two * l) * rs.y.clone()) / (m * denom);
    Ok(ReducedState { x, y })
}

/// Checks that `(x_1, x_2)` of the full exact trajectory from step 1 on
/// agrees with the reduced map seeded at step 1, for `steps` reduced steps.
/// Returns the first mismatching reduced index, or `None` when all agree.
pub fn reduced_consistency(
    model: &Model,
    start: &StatePoint<Rational>,
    steps: u64,
) -> Result<Option<u64>, DynamicsError> {
    let (n, gamma, lambda) = model
        .lemming_reduction()
        .ok_or_else(|| DynamicsError::NoTheoremApplies(format!("model `{}` is not a lemming model", model.name())))?;
    let full = iterate_exact(model.spec(), start, steps + 1, NormalizationMode::Simplified)?;
    let mut rs = match full.states.get(1) {
        Some((_, p)) => ReducedState {
            x: p.x[0].clone(),
            y: p.x[1].clone(),
        },
        None => return Ok(Some(0)),
    };
    for k in 0..steps {
        let Some((_, p)) = full.states.get(k as usize + 1) else {
            return Ok(Some(k));
        };
        if p.x[0] != rs.x || p.x[1..].iter().any(|v| v != &rs.y) {
            return Ok(Some(k));
        }
        rs = sv_reduced_step(n, &gamma, &lambda, &rs)?;
    }
    Ok(None)
}
