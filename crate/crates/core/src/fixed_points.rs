//! Closed-form fixed points of the raw operator and their normalisations.
//!
//! A non-zero non-negative fixed point `p` of the raw operator `V` gives the
//! fixed point `p / (Σ x_i + u)` of the normalised operator, and every fixed
//! point of the normalised operator in `S^{n,1}` arises this way.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::GonosomalSpec;
use crate::models::{lemming_spec, Model, ModelKind};
use crate::operators::{normalize_point, raw_residual};
use crate::scalar::{format_rational, int, ratio, Rational, Scalar, Surd};
use crate::state::StatePoint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixedPointError {
    #[error("parameter {name} = {value} is out of range: {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("no closed form is known for model `{0}`; use the numeric search")]
    NoClosedForm(String),
}

/// Points `base + t · direction`, with `t` restricted to `nonneg_range` when
/// the coordinates must stay non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Family<T> {
    pub base: StatePoint<T>,
    pub direction: StatePoint<T>,
    pub parameter: String,
    /// Closed interval of parameters giving non-negative points; `None` when
    /// the whole line is needed (never for built-in models).
    pub nonneg_range: Option<(Rational, Rational)>,
}

impl<T: Scalar> Family<T> {
    pub fn at(&self, t: &Rational) -> StatePoint<T> {
        self.base.add(&self.direction.scale(&T::from_rational(t)))
    }

    /// Five parameters spread over the non-negative range (or around 0).
    pub fn samples(&self) -> Vec<Rational> {
        let (lo, hi) = self.nonneg_range.clone().unwrap_or_else(|| (int(-2), int(2)));
        let span = &hi - &lo;
        let mut out: Vec<Rational> = (0..5).map(|i| &lo + &span * ratio(i, 4)).collect();
        if span.is_zero() {
            // A degenerate range still exercises the line off the simplex.
            out = vec![int(-2), int(-1), lo, int(1), int(3)];
        }
        out
    }

    fn to_f64(&self) -> (Vec<f64>, Vec<f64>, Option<(f64, f64)>) {
        (
            self.base.to_f64().coords(),
            self.direction.to_f64().coords(),
            self.nonneg_range
                .as_ref()
                .map(|(a, b)| (crate::scalar::rational_to_f64(a), crate::scalar::rational_to_f64(b))),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawFixedPoint<T> {
    pub point: StatePoint<T>,
    /// Non-negative and non-zero, so it normalises to a simplex point.
    pub normalisable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSet<T> {
    /// Isolated non-zero fixed points of the raw operator.
    pub raw: Vec<RawFixedPoint<T>>,
    /// One-parameter families of raw fixed points.
    pub families: Vec<Family<T>>,
    /// Isolated fixed points of the normalised operator in `S^{n,1}`.
    pub normalized: Vec<StatePoint<T>>,
    /// Families of normalised fixed points (ranges keep coordinates ≥ 0).
    pub normalized_families: Vec<Family<T>>,
    /// Fixed points of the simplified normalised operator on the boundary
    /// `u = 0` of the simplex, with no raw counterpart.
    pub boundary: Vec<StatePoint<T>>,
}

impl<T: Scalar> FixedPointSet<T> {
    fn from_raw(raw: Vec<StatePoint<T>>, families: Vec<Family<T>>) -> Self {
        let raw: Vec<RawFixedPoint<T>> = raw
            .into_iter()
            .map(|point| {
                let coords = point.coords();
                let normalisable =
                    coords.iter().all(|c| !c.sign_negative()) && coords.iter().any(Scalar::sign_positive);
                RawFixedPoint { point, normalisable }
            })
            .collect();
        let normalized = raw
            .iter()
            .filter(|p| p.normalisable)
            .map(|p| normalize_point(&p.point).expect("normalisable points are non-zero"))
            .collect();
        FixedPointSet {
            raw,
            families,
            normalized,
            normalized_families: Vec::new(),
            boundary: Vec::new(),
        }
    }

    /// Exact residuals `V(p) − p` of every isolated point and of five
    /// samples per family. All vanish for a correct set.
    pub fn raw_residuals(&self, spec: &GonosomalSpec) -> Vec<T> {
        let mut out: Vec<T> = self
            .raw
            .iter()
            .map(|p| raw_residual(spec, &p.point).expect("dimensions agree"))
            .collect();
        for family in &self.families {
            for t in family.samples() {
                out.push(raw_residual(spec, &family.at(&t)).expect("dimensions agree"));
            }
        }
        out
    }

    /// Every normalised fixed point as `f64` coordinates, families excluded.
    pub fn normalized_f64(&self) -> Vec<Vec<f64>> {
        self.normalized
            .iter()
            .chain(&self.boundary)
            .map(|p| p.to_f64().coords())
            .collect()
    }

    /// Sup-norm distance from `q` to the nearest known normalised fixed
    /// point (isolated, boundary or family member).
    pub fn distance_to_known(&self, q: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for p in self.normalized_f64() {
            best = best.min(crate::state::sup_distance(&p, q));
        }
        for family in &self.normalized_families {
            best = best.min(segment_distance(family, q));
        }
        best
    }
}

/// Sup-norm distance from `q` to a family segment. The distance is convex
/// in the parameter, so a ternary search finds the minimum.
fn segment_distance<T: Scalar>(family: &Family<T>, q: &[f64]) -> f64 {
    let (base, dir, range) = family.to_f64();
    let (mut lo, mut hi) = range.unwrap_or((-1e3, 1e3));
    let dist = |t: f64| {
        base.iter()
            .zip(&dir)
            .zip(q)
            .map(|((b, d), x)| (b + t * d - x).abs())
            .fold(0.0, f64::max)
    };
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if dist(m1) <= dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    dist(0.5 * (lo + hi))
}

impl FixedPointSet<Rational> {
    pub fn to_surd(&self) -> FixedPointSet<Surd> {
        let lift = |p: &StatePoint<Rational>| p.lift::<Surd>();
        let lift_family = |f: &Family<Rational>| Family {
            base: lift(&f.base),
            direction: lift(&f.direction),
            parameter: f.parameter.clone(),
            nonneg_range: f.nonneg_range.clone(),
        };
        FixedPointSet {
            raw: self
                .raw
                .iter()
                .map(|p| RawFixedPoint {
                    point: lift(&p.point),
                    normalisable: p.normalisable,
                })
                .collect(),
            families: self.families.iter().map(lift_family).collect(),
            normalized: self.normalized.iter().map(lift).collect(),
            normalized_families: self.normalized_families.iter().map(lift_family).collect(),
            boundary: self.boundary.iter().map(lift).collect(),
        }
    }
}

fn pt(x: [Rational; 3], u: Rational) -> StatePoint<Rational> {
    StatePoint::new(x.to_vec(), u)
}

/// Fixed points of the Wolbachia operator for `1/2 ≤ η ≤ 1`.
pub fn wolbachia_fixed_points(eta: &Rational) -> Result<FixedPointSet<Rational>, FixedPointError> {
    let half = ratio(1, 2);
    let one = Rational::one();
    if eta < &half || eta > &one {
        return Err(FixedPointError::ParamOutOfRange {
            name: "eta",
            value: format_rational(eta),
            range: "eta must lie in [1/2, 1]",
        });
    }
    let zero = Rational::zero;
    let two = int(2);
    let on_line = pt([zero(), two.clone(), zero()], two.clone());
    let on_line_normalized = pt([zero(), half.clone(), zero()], half.clone());

    if eta == &one {
        let family = Family {
            base: on_line.clone(),
            direction: pt([one.clone(), zero(), -one.clone()], zero()),
            parameter: "beta".to_string(),
            nonneg_range: Some((zero(), zero())),
        };
        let mut set = FixedPointSet::from_raw(Vec::new(), vec![family]);
        set.normalized = vec![on_line_normalized];
        set.boundary = vec![pt([one.clone(), zero(), zero()], zero())];
        return Ok(set);
    }
    if eta == &half {
        let q = ratio(4, 3);
        let family = Family {
            base: on_line,
            direction: pt([one.clone(), -one.clone(), zero()], zero()),
            parameter: "rho".to_string(),
            nonneg_range: Some((zero(), two.clone())),
        };
        let mut set = FixedPointSet::from_raw(vec![pt([q.clone(), q.clone(), -q], int(4))], vec![family]);
        let quarter = ratio(1, 4);
        set.normalized = vec![
            on_line_normalized.clone(),
            pt([half.clone(), zero(), zero()], half.clone()),
        ];
        set.normalized_families = vec![Family {
            base: on_line_normalized,
            direction: pt([quarter.clone(), -quarter, zero()], zero()),
            parameter: "rho".to_string(),
            nonneg_range: Some((zero(), two)),
        }];
        return Ok(set);
    }
    let a = &two / (&two - eta);
    let raw = vec![
        pt([a.clone(), a.clone(), -a], &two / eta),
        on_line,
        pt([&one / (&one - eta), zero(), zero()], &one / eta),
    ];
    Ok(FixedPointSet::from_raw(raw, Vec::new()))
}

pub fn arctic_fixed_points() -> FixedPointSet<Rational> {
    let raw = vec![
        pt([int(2), int(0), int(0)], int(2)),
        pt([ratio(36, 25), ratio(12, 25), ratio(12, 25)], ratio(12, 7)),
    ];
    FixedPointSet::from_raw(raw, Vec::new())
}

/// Which branch of the non-negativity analysis a parameter triple falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonNegBranch {
    /// `λ = 0`: the single point is non-negative iff `γ = 1/2`.
    LambdaZero,
    /// `λ = (n − 1)γ ≠ 0`: the single point is always non-negative.
    OnDiagonal,
    /// `λ > (n − 1)γ`: exactly one of the two points is non-negative.
    AboveDiagonal,
    /// `0 < λ < (n − 1)γ`: both points are non-negative iff `γ = 1/2`,
    /// otherwise exactly one is.
    BelowDiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonNegClassification {
    pub branch: NonNegBranch,
    /// The count the branch predicts.
    pub predicted_nonneg: usize,
    /// The count found by exact sign tests on the computed points.
    pub nonneg_count: usize,
    pub all_nonneg: bool,
    /// `γ = 1/2` or `λ = (n − 1)γ`: every non-zero fixed point is non-negative.
    pub corollary_condition: bool,
}

/// The quadratic `a x² + b x + c = 0` whose roots are the `x`-coordinates of
/// the fixed points when `λ ∉ {0, (n − 1)γ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticAnalysis {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub delta: Rational,
    /// `x`-coordinates of the fixed points (one root in the degenerate cases).
    pub roots: Vec<Surd>,
    pub nonneg_flags: Vec<bool>,
}

impl QuadraticAnalysis {
    pub fn new(n: usize, gamma: &Rational, lambda: &Rational) -> Self {
        let m = int(n as i64 - 1);
        let a = lambda - &m * gamma;
        let b = &m * (gamma + Rational::one()) - lambda * int(2);
        let c = -m.clone();
        let shifted = &m * gamma - lambda * int(2);
        let delta = &shifted * &shifted + &m * &m * (Rational::one() - gamma * int(2));
        QuadraticAnalysis {
            a,
            b,
            c,
            delta,
            roots: Vec::new(),
            nonneg_flags: Vec::new(),
        }
    }

    /// `b² − 4ac`, which must equal `delta`.
    pub fn discriminant(&self) -> Rational {
        &self.b * &self.b - int(4) * &self.a * &self.c
    }
}

#[derive(Debug, Clone)]
pub struct SvAnalysis {
    pub n: usize,
    pub gamma: Rational,
    pub lambda: Rational,
    /// Fixed points `(x, y)` of the reduced raw system.
    pub reduced: Vec<(Surd, Surd)>,
    /// The same points lifted to `(x, y, …, y, x)`.
    pub fixed_points: FixedPointSet<Surd>,
    pub quadratic: QuadraticAnalysis,
    pub classification: NonNegClassification,
}

impl SvAnalysis {
    /// A lemming spec realising `(n, γ, λ)`: `γ_1 = γ` and `γ_i = λ/(n − 1)`.
    pub fn spec(&self) -> GonosomalSpec {
        let m = int(self.n as i64 - 1);
        let mut gammas = vec![self.gamma.clone()];
        gammas.extend(std::iter::repeat(&self.lambda / &m).take(self.n - 1));
        lemming_spec(&gammas)
    }
}

/// Non-zero fixed points of the reduced lemming system with `n` female
/// genotypes, `γ = γ_1` and `λ = Σ_{i≥2} γ_i`.
pub fn sv_fixed_points(n: usize, gamma: &Rational, lambda: &Rational) -> Result<SvAnalysis, FixedPointError> {
    if n < 2 {
        return Err(FixedPointError::ParamOutOfRange {
            name: "n",
            value: n.to_string(),
            range: "n must be at least 2",
        });
    }
    let m = int(n as i64 - 1);
    let half = ratio(1, 2);
    if gamma.is_negative() || gamma > &half {
        return Err(FixedPointError::ParamOutOfRange {
            name: "gamma",
            value: format_rational(gamma),
            range: "gamma must lie in [0, 1/2]",
        });
    }
    if lambda.is_negative() || lambda > &(&m * &half) {
        return Err(FixedPointError::ParamOutOfRange {
            name: "lambda",
            value: format_rational(lambda),
            range: "lambda must lie in [0, (n-1)/2]",
        });
    }
    if gamma.is_zero() && lambda.is_zero() {
        return Err(FixedPointError::ParamOutOfRange {
            name: "gamma",
            value: "0 (with lambda = 0)".to_string(),
            range: "gamma and lambda cannot both vanish",
        });
    }

    let one = Rational::one();
    let two = int(2);
    let mut quadratic = QuadraticAnalysis::new(n, gamma, lambda);
    let diagonal = &m * gamma;
    let (branch, reduced): (NonNegBranch, Vec<(Surd, Surd)>) = if lambda.is_zero() {
        let x = &one / gamma;
        let y = (&one - gamma * &two) / (gamma * (gamma - &one) * &m);
        (NonNegBranch::LambdaZero, vec![(Surd::rational(x), Surd::rational(y))])
    } else if lambda == &diagonal {
        let x = &one / (&one - gamma);
        let y = (&one - gamma * &two) / (gamma * (&one - gamma) * &m);
        (NonNegBranch::OnDiagonal, vec![(Surd::rational(x), Surd::rational(y))])
    } else {
        let root = Surd::sqrt(&quadratic.delta);
        let minus_b = Surd::rational(-quadratic.b.clone());
        let two_a = Surd::rational(&quadratic.a * &two);
        let points = [minus_b.clone() - root.clone(), minus_b + root]
            .into_iter()
            .map(|num| {
                let x = num / two_a.clone();
                let y = (Surd::one() - Surd::rational(gamma.clone()) * x.clone()) / Surd::rational(lambda.clone());
                (x, y)
            })
            .fold(Vec::new(), |mut acc: Vec<(Surd, Surd)>, p| {
                if !acc.iter().any(|q| q.0.exact_eq(&p.0)) {
                    acc.push(p);
                }
                acc
            });
        let branch = if lambda > &diagonal {
            NonNegBranch::AboveDiagonal
        } else {
            NonNegBranch::BelowDiagonal
        };
        (branch, points)
    };

    quadratic.roots = reduced.iter().map(|(x, _)| x.clone()).collect();
    quadratic.nonneg_flags = reduced
        .iter()
        .map(|(x, y)| !x.sign_negative() && !y.sign_negative())
        .collect();

    let gamma_half = gamma == &half;
    let predicted_nonneg = match branch {
        NonNegBranch::LambdaZero => usize::from(gamma_half),
        NonNegBranch::OnDiagonal => 1,
        NonNegBranch::AboveDiagonal => 1,
        NonNegBranch::BelowDiagonal => {
            if gamma_half {
                reduced.len()
            } else {
                1
            }
        }
    };
    let nonneg_count = quadratic.nonneg_flags.iter().filter(|&&f| f).count();
    let classification = NonNegClassification {
        branch,
        predicted_nonneg,
        nonneg_count,
        all_nonneg: nonneg_count == reduced.len(),
        corollary_condition: gamma_half || lambda == &diagonal,
    };

    let raw: Vec<StatePoint<Surd>> = reduced
        .iter()
        .map(|(x, y)| {
            let mut coords = vec![x.clone()];
            coords.extend(std::iter::repeat(y.clone()).take(n - 1));
            StatePoint::new(coords, x.clone())
        })
        .collect();
    let fixed_points = FixedPointSet::from_raw(raw, Vec::new());

    Ok(SvAnalysis {
        n,
        gamma: gamma.clone(),
        lambda: lambda.clone(),
        reduced,
        fixed_points,
        quadratic,
        classification,
    })
}

/// Closed-form fixed points of a catalogued model.
pub fn model_fixed_points(model: &Model) -> Result<FixedPointSet<Surd>, FixedPointError> {
    match model.kind() {
        ModelKind::Wolbachia { eta } => Ok(wolbachia_fixed_points(eta)?.to_surd()),
        ModelKind::Arctic => Ok(arctic_fixed_points().to_surd()),
        ModelKind::Lemming { .. } => {
            let (n, gamma, lambda) = model.lemming_reduction().expect("lemming model");
            Ok(sv_fixed_points(n, &gamma, &lambda)?.fixed_points)
        }
        ModelKind::Custom => Err(FixedPointError::NoClosedForm(model.name().to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, wolbachia_spec};

    fn point(coords: &[(i64, i64)]) -> StatePoint<Rational> {
        StatePoint::from_ratios(coords)
    }

    #[test]
    fn wolbachia_three_quarters() {
        let set = wolbachia_fixed_points(&ratio(3, 4)).unwrap();
        let raw: Vec<_> = set.raw.iter().map(|p| p.point.clone()).collect();
        assert_eq!(
            raw,
            vec![
                point(&[(8, 5), (8, 5), (-8, 5), (8, 3)]),
                point(&[(0, 1), (2, 1), (0, 1), (2, 1)]),
                point(&[(4, 1), (0, 1), (0, 1), (4, 3)]),
            ]
        );
        assert!(!set.raw[0].normalisable);
        assert_eq!(
            set.normalized,
            vec![
                point(&[(0, 1), (1, 2), (0, 1), (1, 2)]),
                point(&[(3, 4), (0, 1), (0, 1), (1, 4)])
            ]
        );
        let spec = wolbachia_spec(&ratio(3, 4));
        assert!(set.raw_residuals(&spec).iter().all(Zero::is_zero));
    }

    #[test]
    fn wolbachia_extremes() {
        let half = wolbachia_fixed_points(&ratio(1, 2)).unwrap();
        assert_eq!(half.raw[0].point, point(&[(4, 3), (4, 3), (-4, 3), (4, 1)]));
        assert_eq!(half.families[0].at(&int(1)), point(&[(1, 1), (1, 1), (0, 1), (2, 1)]));
        assert!(half
            .raw_residuals(&wolbachia_spec(&ratio(1, 2)))
            .iter()
            .all(Zero::is_zero));

        let one = wolbachia_fixed_points(&int(1)).unwrap();
        assert!(one.raw.is_empty());
        assert_eq!(one.families[0].at(&int(3)), point(&[(3, 1), (2, 1), (-3, 1), (2, 1)]));
        assert!(one.raw_residuals(&wolbachia_spec(&int(1))).iter().all(Zero::is_zero));
        assert_eq!(one.boundary, vec![point(&[(1, 1), (0, 1), (0, 1), (0, 1)])]);

        assert!(wolbachia_fixed_points(&ratio(2, 5)).is_err());
    }

    #[test]
    fn arctic_points() {
        let set = arctic_fixed_points();
        assert_eq!(
            set.normalized,
            vec![
                point(&[(1, 2), (0, 1), (0, 1), (1, 2)]),
                point(&[(7, 20), (7, 60), (7, 60), (5, 12)])
            ]
        );
        let model = build_model("arctic-lemming", &[]).unwrap();
        assert!(set.raw_residuals(model.spec()).iter().all(Zero::is_zero));
    }

    #[test]
    fn sv_examples() {
        let a = sv_fixed_points(3, &ratio(1, 2), &ratio(1, 4)).unwrap();
        assert_eq!(
            (a.quadratic.a.clone(), a.quadratic.b.clone(), a.quadratic.c.clone()),
            (ratio(-3, 4), ratio(5, 2), int(-2))
        );
        let xs: Vec<Surd> = a.reduced.iter().map(|p| p.0.clone()).collect();
        assert!(xs.contains(&Surd::rational(int(2))) && xs.contains(&Surd::rational(ratio(4, 3))));
        assert!(a.classification.all_nonneg);
        assert!(a.fixed_points.raw_residuals(&a.spec()).iter().all(Zero::is_zero));

        let b = sv_fixed_points(3, &ratio(1, 2), &int(0)).unwrap();
        assert_eq!(b.reduced, vec![(Surd::rational(int(2)), Surd::rational(int(0)))]);
        assert!(b.classification.all_nonneg);

        let c = sv_fixed_points(3, &ratio(1, 4), &ratio(1, 2)).unwrap();
        assert_eq!(c.classification.branch, NonNegBranch::OnDiagonal);
        assert_eq!(
            c.reduced,
            vec![(Surd::rational(ratio(4, 3)), Surd::rational(ratio(4, 3)))]
        );
    }

    #[test]
    fn irrational_roots_are_exact() {
        // Δ = 2 here.
        let a = sv_fixed_points(3, &ratio(1, 4), &ratio(1, 4)).unwrap();
        assert!(a.reduced.iter().any(|(x, _)| !x.is_rational()));
        assert!(a.fixed_points.raw_residuals(&a.spec()).iter().all(Zero::is_zero));
        assert_eq!(a.quadratic.discriminant(), a.quadratic.delta);
        assert_eq!(a.classification.nonneg_count, a.classification.predicted_nonneg);
    }

    #[test]
    fn cichlid_double_root() {
        let model = build_model("cichlid", &[]).unwrap();
        let set = model_fixed_points(&model).unwrap();
        assert_eq!(set.raw.len(), 1);
        assert_eq!(
            set.normalized[0],
            point(&[(1, 2), (0, 1), (0, 1), (1, 2)]).lift::<Surd>()
        );
    }

    #[test]
    fn family_distance() {
        let set = wolbachia_fixed_points(&ratio(1, 2)).unwrap();
        assert!(set.distance_to_known(&[0.3, 0.2, 0.0, 0.5]) < 1e-12);
        assert!((set.distance_to_known(&[0.25, 0.25, 0.1, 0.4]) - 0.1).abs() < 1e-9);
    }
}
