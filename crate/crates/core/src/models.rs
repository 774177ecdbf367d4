//! Built-in genetic systems.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, GonosomalSpec};
use crate::scalar::{format_rational, int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown model `{0}` (try list-models)")]
    UnknownModel(String),
    #[error("parameter {name} = {value} is out of range: {range}")]
    ParamOutOfRange {
        name: String,
        value: String,
        range: &'static str,
    },
    #[error("model `{model}` needs parameter `{name}`")]
    MissingParam { model: String, name: &'static str },
    #[error("model `{model}` takes no parameter `{name}`")]
    UnexpectedParam { model: String, name: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Largest subset of `S^{n,1}` left invariant by the normalised operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantRule {
    /// All of `S^{n,1}`.
    Simplex,
    /// `R = {∃ i: γ_i x_i > 0}`.
    R,
    /// `R ∩ T` with `T = {∃ i: (1 − 2γ_i) x_i > 0}`, used when `γ_1 = 0`.
    RAndT,
    /// `{x_2 > 0}`, used for Wolbachia with full transmission.
    SecondPositive,
    /// No invariant set is known (user specs).
    Unknown,
}

impl fmt::Display for InvariantRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InvariantRule::Simplex => "S^{n,1}",
            InvariantRule::R => "R",
            InvariantRule::RAndT => "R ∩ T",
            InvariantRule::SecondPositive => "{x2 > 0} ∩ S^{n,1}",
            InvariantRule::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitRule {
    Wolbachia,
    Lemming,
    Arctic,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    Wolbachia {
        eta: Rational,
    },
    /// Rows `(γ_i, (1 − 2γ_i)/(n − 1), …, (1 − 2γ_i)/(n − 1) | γ_i)`.
    Lemming {
        gammas: Vec<Rational>,
    },
    Arctic,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    name: String,
    kind: ModelKind,
    spec: GonosomalSpec,
    params: Vec<(String, Rational)>,
    invariant: InvariantRule,
    limit: LimitRule,
    labels: Vec<String>,
}

impl Model {
    /// Wraps a user spec. No invariant set or limit theorem is attached.
    pub fn custom(name: impl Into<String>, spec: GonosomalSpec) -> Result<Self, ModelError> {
        let spec = GonosomalSpec::new(
            spec.gamma()
                .iter()
                .cloned()
                .zip(spec.gamma_tilde().iter().cloned())
                .collect(),
        )?;
        let labels = generic_labels(spec.n());
        Ok(Model {
            name: name.into(),
            kind: ModelKind::Custom,
            spec,
            params: Vec::new(),
            invariant: InvariantRule::Unknown,
            limit: LimitRule::None,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn spec(&self) -> &GonosomalSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn params(&self) -> &[(String, Rational)] {
        &self.params
    }

    pub fn invariant_rule(&self) -> InvariantRule {
        self.invariant
    }

    pub fn limit_rule(&self) -> LimitRule {
        self.limit
    }

    /// `n` female labels followed by the male label.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `(n, γ, λ)` of the reduced two-variable system, for lemming models.
    pub fn lemming_reduction(&self) -> Option<(usize, Rational, Rational)> {
        match &self.kind {
            ModelKind::Lemming { gammas } => {
                let lambda: Rational = gammas[1..].iter().sum();
                Some((gammas.len(), gammas[0].clone(), lambda))
            }
            _ => None,
        }
    }
}

fn generic_labels(n: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("f{i}"))
        .chain(std::iter::once("h".to_string()))
        .collect()
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(ToString::to_string).collect()
}

pub fn wolbachia_spec(eta: &Rational) -> GonosomalSpec {
    let one = Rational::one();
    let half = ratio(1, 2);
    let two = int(2);
    GonosomalSpec::from_rows(vec![
        (vec![eta.clone(), Rational::zero(), Rational::zero()], &one - eta),
        (vec![Rational::zero(), half.clone(), Rational::zero()], half),
        (vec![eta / &two, (&one - eta) / &two, eta / &two], (&one - eta) / &two),
    ])
    .expect("three rows of length three")
}

pub fn lemming_spec(gammas: &[Rational]) -> GonosomalSpec {
    let n = gammas.len();
    let m = int(n as i64 - 1);
    let rows = gammas
        .iter()
        .map(|g| {
            let rest = (Rational::one() - g * int(2)) / &m;
            let mut row = vec![g.clone()];
            row.extend(std::iter::repeat(rest).take(n - 1));
            (row, g.clone())
        })
        .collect();
    GonosomalSpec::from_rows(rows).expect("square lemming rows")
}

pub fn arctic_spec() -> GonosomalSpec {
    GonosomalSpec::from_rows(vec![
        (vec![ratio(1, 2), int(0), int(0)], ratio(1, 2)),
        (vec![ratio(1, 4), ratio(1, 4), ratio(1, 4)], ratio(1, 4)),
        (vec![int(0), ratio(1, 3), ratio(1, 3)], ratio(1, 3)),
    ])
    .expect("three rows of length three")
}

/// Catalogue entry for `list-models`.
#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub name: &'static str,
    pub n: &'static str,
    pub params: &'static str,
    pub labels: &'static [&'static str],
}

pub const CATALOGUE: &[ModelInfo] = &[
    ModelInfo {
        name: "wolbachia",
        n: "3",
        params: "eta in [1/2, 1]",
        labels: &["ZZ+w", "ZW", "ZW+w", "ZZ"],
    },
    ModelInfo {
        name: "general-lemming",
        n: "number of gamma values (>= 2)",
        params: "gamma (repeated or comma list), each in [0, 1/2], not all 0",
        labels: &["f1", "...", "fn", "h"],
    },
    ModelInfo {
        name: "wood-lemming",
        n: "3",
        params: "none (gamma = 1/2, 1/4, 0)",
        labels: &["XX", "XX*", "X*Y", "XY"],
    },
    ModelInfo {
        name: "arctic-lemming",
        n: "3",
        params: "none",
        labels: &["XX", "XX*", "X*Y", "XY"],
    },
    ModelInfo {
        name: "cichlid",
        n: "3",
        params: "none (gamma = 1/2, 1/4, 1/4)",
        labels: &["ZZXX", "ZWXX", "ZWXY", "ZZXY"],
    },
];

fn expect_no_params(model: &str, params: &[(&str, Rational)]) -> Result<(), ModelError> {
    match params.first() {
        Some((name, _)) => Err(ModelError::UnexpectedParam {
            model: model.to_string(),
            name: name.to_string(),
        }),
        None => Ok(()),
    }
}

fn lemming_model(name: &str, gammas: Vec<Rational>, labels: Vec<String>) -> Result<Model, ModelError> {
    let half = ratio(1, 2);
    for g in &gammas {
        if g < &Rational::zero() || g > &half {
            return Err(ModelError::ParamOutOfRange {
                name: "gamma".to_string(),
                value: format_rational(g),
                range: "each gamma must lie in [0, 1/2]",
            });
        }
    }
    if gammas.len() < 2 {
        return Err(ModelError::ParamOutOfRange {
            name: "gamma".to_string(),
            value: format!("{} value(s)", gammas.len()),
            range: "at least two gamma values are needed",
        });
    }
    if gammas.iter().all(Zero::is_zero) {
        return Err(ModelError::ParamOutOfRange {
            name: "gamma".to_string(),
            value: "all zero".to_string(),
            range: "some gamma must be non-zero",
        });
    }
    let spec = lemming_spec(&gammas);
    let invariant = if gammas[0].is_zero() {
        InvariantRule::RAndT
    } else {
        InvariantRule::R
    };
    let params = gammas.iter().map(|g| ("gamma".to_string(), g.clone())).collect();
    Ok(Model {
        name: name.to_string(),
        kind: ModelKind::Lemming { gammas },
        spec,
        params,
        invariant,
        limit: LimitRule::Lemming,
        labels,
    })
}

/// Builds a catalogued model. Parameters are `(name, value)` pairs; the
/// general lemming model takes one `gamma` entry per female genotype.
pub fn build_model(name: &str, params: &[(&str, Rational)]) -> Result<Model, ModelError> {
    match name {
        "wolbachia" => {
            let mut eta = None;
            for (key, value) in params {
                if *key == "eta" {
                    eta = Some(value.clone());
                } else {
                    return Err(ModelError::UnexpectedParam {
                        model: name.to_string(),
                        name: key.to_string(),
                    });
                }
            }
            let eta = eta.ok_or(ModelError::MissingParam {
                model: name.to_string(),
                name: "eta",
            })?;
            if eta < ratio(1, 2) || eta > int(1) {
                return Err(ModelError::ParamOutOfRange {
                    name: "eta".to_string(),
                    value: format_rational(&eta),
                    range: "eta must lie in [1/2, 1]",
                });
            }
            let invariant = if eta.is_one() {
                InvariantRule::SecondPositive
            } else {
                InvariantRule::Simplex
            };
            Ok(Model {
                name: name.to_string(),
                spec: wolbachia_spec(&eta),
                params: vec![("eta".to_string(), eta.clone())],
                kind: ModelKind::Wolbachia { eta },
                invariant,
                limit: LimitRule::Wolbachia,
                labels: labels(&["ZZ+w", "ZW", "ZW+w", "ZZ"]),
            })
        }
        "general-lemming" => {
            let mut gammas = Vec::new();
            for (key, value) in params {
                if *key == "gamma" {
                    gammas.push(value.clone());
                } else {
                    return Err(ModelError::UnexpectedParam {
                        model: name.to_string(),
                        name: key.to_string(),
                    });
                }
            }
            if gammas.is_empty() {
                return Err(ModelError::MissingParam {
                    model: name.to_string(),
                    name: "gamma",
                });
            }
            let n = gammas.len();
            lemming_model(name, gammas, generic_labels(n))
        }
        "wood-lemming" => {
            expect_no_params(name, params)?;
            lemming_model(
                name,
                vec![ratio(1, 2), ratio(1, 4), int(0)],
                labels(&["XX", "XX*", "X*Y", "XY"]),
            )
        }
        "cichlid" => {
            expect_no_params(name, params)?;
            lemming_model(
                name,
                vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)],
                labels(&["ZZXX", "ZWXX", "ZWXY", "ZZXY"]),
            )
        }
        "arctic-lemming" => {
            expect_no_params(name, params)?;
            Ok(Model {
                name: name.to_string(),
                kind: ModelKind::Arctic,
                spec: arctic_spec(),
                params: Vec::new(),
                invariant: InvariantRule::Simplex,
                limit: LimitRule::Arctic,
                labels: labels(&["XX", "XX*", "X*Y", "XY"]),
            })
        }
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}
