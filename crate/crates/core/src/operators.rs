//! Raw and normalised evolution operators and region predicates.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::GonosomalSpec;
use crate::models::{InvariantRule, Model};
use crate::scalar::Scalar;
use crate::state::StatePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("normalising denominator vanishes")]
    DegenerateDenominator,
    #[error("cannot normalise the zero point")]
    ZeroPoint,
    #[error("state has {found} female coordinates but the spec has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// How the normalised operator divides out the total mass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    /// Divide by `Σ x_i` only; `u` cancels and need not be positive.
    #[default]
    Simplified,
    /// Divide by `u · Σ x_i`, the total mass of the raw image.
    Full,
}

/// Result of one normalised step. `escaped` is set when the image has
/// `u' = 0` or `Σ x'_i = 0`, so the next step would leave `S^{n,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<T> {
    pub point: StatePoint<T>,
    pub escaped: bool,
}

/// Structure constants lifted into a scalar type, stored column-friendly for
/// repeated application.
#[derive(Debug, Clone)]
pub struct Operator<T> {
    n: usize,
    /// `gamma[i * n + k]` is `γ_ik`.
    gamma: Vec<T>,
    gamma_tilde: Vec<T>,
}

impl<T: Scalar> Operator<T> {
    pub fn new(spec: &GonosomalSpec) -> Self {
        let n = spec.n();
        let gamma = spec
            .gamma()
            .iter()
            .flat_map(|row| row.iter().map(T::from_rational))
            .collect();
        let gamma_tilde = spec.gamma_tilde().iter().map(T::from_rational).collect();
        Operator { n, gamma, gamma_tilde }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, p: &StatePoint<T>) -> Result<(), OperatorError> {
        if p.n() == self.n {
            Ok(())
        } else {
            Err(OperatorError::DimensionMismatch {
                expected: self.n,
                found: p.n(),
            })
        }
    }

    /// `(Σ_i γ_ik x_i)_k` and `Σ_i γ̃_i x_i`, without the factor `u`.
    fn products(&self, x: &[T]) -> (Vec<T>, T) {
        let n = self.n;
        let mut out = vec![T::zero(); n];
        let mut male = T::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let row = &self.gamma[i * n..(i + 1) * n];
            for (o, g) in out.iter_mut().zip(row) {
                *o = o.clone() + g.clone() * xi.clone();
            }
            male = male + self.gamma_tilde[i].clone() * xi.clone();
        }
        (out, male)
    }

    pub fn apply_raw(&self, p: &StatePoint<T>) -> Result<StatePoint<T>, OperatorError> {
        self.check(p)?;
        let (x, male) = self.products(&p.x);
        Ok(StatePoint {
            x: x.into_iter().map(|v| p.u.clone() * v).collect(),
            u: p.u.clone() * male,
        })
    }

    pub fn apply_normalized(&self, p: &StatePoint<T>, mode: NormalizationMode) -> Result<Step<T>, OperatorError> {
        self.check(p)?;
        let alpha = p.alpha();
        let denominator = match mode {
            NormalizationMode::Simplified => alpha,
            NormalizationMode::Full => p.u.clone() * alpha,
        };
        if denominator.is_zero() {
            return Err(OperatorError::DegenerateDenominator);
        }
        let (x, male) = self.products(&p.x);
        let point = match mode {
            NormalizationMode::Simplified => StatePoint {
                x: x.into_iter().map(|v| v / denominator.clone()).collect(),
                u: male / denominator,
            },
            NormalizationMode::Full => StatePoint {
                x: x.into_iter().map(|v| p.u.clone() * v / denominator.clone()).collect(),
                u: p.u.clone() * male / denominator,
            },
        };
        let escaped = point.u.is_zero() || point.alpha().is_zero();
        Ok(Step { point, escaped })
    }
}

impl Operator<f64> {
    /// Simplified step on `[x_1, …, x_n, u]` slices without allocating.
    /// Returns whether the image escaped. `src` and `dst` must have length
    /// `n + 1`.
    #[inline]
    pub fn step_into(&self, src: &[f64], dst: &mut [f64]) -> Result<bool, OperatorError> {
        let n = self.n;
        let alpha: f64 = src[..n].iter().sum();
        if alpha == 0.0 {
            return Err(OperatorError::DegenerateDenominator);
        }
        dst.fill(0.0);
        for i in 0..n {
            let xi = src[i];
            if xi == 0.0 {
                continue;
            }
            let row = &self.gamma[i * n..(i + 1) * n];
            for k in 0..n {
                dst[k] += row[k] * xi;
            }
            dst[n] += self.gamma_tilde[i] * xi;
        }
        let inv = 1.0 / alpha;
        let mut female = 0.0;
        for v in dst[..n].iter_mut() {
            *v *= inv;
            female += *v;
        }
        dst[n] *= inv;
        Ok(dst[n] == 0.0 || female == 0.0)
    }
}

pub fn apply_raw<T: Scalar>(spec: &GonosomalSpec, p: &StatePoint<T>) -> Result<StatePoint<T>, OperatorError> {
    Operator::new(spec).apply_raw(p)
}

pub fn apply_normalized<T: Scalar>(
    spec: &GonosomalSpec,
    p: &StatePoint<T>,
    mode: NormalizationMode,
) -> Result<Step<T>, OperatorError> {
    Operator::new(spec).apply_normalized(p, mode)
}

/// Scales a non-negative non-zero point onto the simplex.
pub fn normalize_point<T: Scalar>(p: &StatePoint<T>) -> Result<StatePoint<T>, OperatorError> {
    let total = p.total();
    if total.is_zero() {
        return Err(OperatorError::ZeroPoint);
    }
    Ok(p.scale(&(T::one() / total)))
}

/// Sup-norm of `V(p) − p`, evaluated in the scalar type and reported in `f64`.
pub fn raw_residual<T: Scalar>(spec: &GonosomalSpec, p: &StatePoint<T>) -> Result<T, OperatorError> {
    let image = apply_raw(spec, p)?;
    Ok(max_abs_difference(&image, p))
}

/// Largest coordinate difference, exact for exact scalars.
pub fn max_abs_difference<T: Scalar>(a: &StatePoint<T>, b: &StatePoint<T>) -> T {
    a.coords()
        .into_iter()
        .zip(b.coords())
        .map(|(x, y)| {
            let d = x - y;
            if d.sign_negative() {
                -d
            } else {
                d
            }
        })
        .fold(T::zero(), |m, d| if d > m { d } else { m })
}

/// Region predicates for a point. Strict inequalities are literal sign tests
/// in every scalar type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionMembership {
    pub in_sn: bool,
    pub in_sn1: bool,
    pub in_r: bool,
    pub in_t: bool,
    pub in_model_invariant: bool,
}

/// Closed simplex in floating point allows a `1e-14` slack on the sum.
pub const SIMPLEX_SUM_SLACK: f64 = 1e-14;

pub fn in_simplex<T: Scalar>(p: &StatePoint<T>) -> bool {
    let coords = p.coords();
    if coords.iter().any(Scalar::sign_negative) {
        return false;
    }
    let total = p.total();
    if T::EXACT {
        total.is_one()
    } else {
        (total.as_f64() - 1.0).abs() <= SIMPLEX_SUM_SLACK
    }
}

/// `∃ i: γ̃_i x_i > 0`; for the lemming family `γ̃_i = γ_i`.
pub fn in_region_r<T: Scalar>(spec: &GonosomalSpec, p: &StatePoint<T>) -> bool {
    spec.gamma_tilde()
        .iter()
        .zip(&p.x)
        .any(|(g, x)| (T::from_rational(g) * x.clone()).sign_positive())
}

/// `∃ i: (Σ_{k≥2} γ_ik) x_i > 0`; for the lemming family the weight is `1 − 2γ_i`.
pub fn in_region_t<T: Scalar>(spec: &GonosomalSpec, p: &StatePoint<T>) -> bool {
    spec.gamma().iter().zip(&p.x).any(|(row, x)| {
        let weight: crate::scalar::Rational = row.iter().skip(1).sum();
        (T::from_rational(&weight) * x.clone()).sign_positive()
    })
}

pub fn classify_membership<T: Scalar>(model: &Model, p: &StatePoint<T>) -> RegionMembership {
    let spec = model.spec();
    let in_sn = p.n() == spec.n() && in_simplex(p);
    let in_sn1 = in_sn && p.alpha().sign_positive() && p.u.sign_positive();
    let in_r = in_sn1 && in_region_r(spec, p);
    let in_t = in_sn1 && in_region_t(spec, p);
    let in_model_invariant = in_sn1
        && match model.invariant_rule() {
            InvariantRule::Simplex => true,
            InvariantRule::R => in_r,
            InvariantRule::RAndT => in_r && in_t,
            InvariantRule::SecondPositive => p.x[1].sign_positive(),
            InvariantRule::Unknown => false,
        };
    RegionMembership {
        in_sn,
        in_sn1,
        in_r,
        in_t,
        in_model_invariant,
    }
}

/// Whether every row `(γ_i1, …, γ_in, γ̃_i)` lies in `S^{n,1}`, which is
/// exactly when the normalised operator maps `S^{n,1}` into itself.
pub fn preserves_sn1(spec: &GonosomalSpec) -> bool {
    spec.gamma().iter().zip(spec.gamma_tilde()).all(|(row, male)| {
        let female: crate::scalar::Rational = row.iter().sum();
        female > num_traits::Zero::zero() && *male > num_traits::Zero::zero()
    })
}
