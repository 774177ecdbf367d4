use std::fmt;

use serde::Serialize;

use crate::scalar::{format_rational, Rational, Scalar};

/// Whether a state carries exact coordinates or floating ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    ExactRational,
    Floating,
}

/// Population state `(x_1, …, x_n, u)`: female genotype frequencies followed
/// by the male genotype frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePoint<T> {
    pub x: Vec<T>,
    pub u: T,
}

impl<T: Scalar> StatePoint<T> {
    pub fn new(x: Vec<T>, u: T) -> Self {
        StatePoint { x, u }
    }

    /// Builds a state from `[x_1, …, x_n, u]`. Panics on an empty slice.
    pub fn from_coords(coords: &[T]) -> Self {
        let (u, x) = coords.split_last().expect("a state has at least the male coordinate");
        StatePoint {
            x: x.to_vec(),
            u: u.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Total female mass `α = Σ x_i`.
    pub fn alpha(&self) -> T {
        self.x.iter().cloned().fold(T::zero(), |acc, v| acc + v)
    }

    pub fn total(&self) -> T {
        self.alpha() + self.u.clone()
    }

    pub fn coords(&self) -> Vec<T> {
        let mut out = self.x.clone();
        out.push(self.u.clone());
        out
    }

    pub fn exactness(&self) -> Exactness {
        if T::EXACT {
            Exactness::ExactRational
        } else {
            Exactness::Floating
        }
    }

    pub fn to_f64(&self) -> StatePoint<f64> {
        StatePoint {
            x: self.x.iter().map(Scalar::as_f64).collect(),
            u: self.u.as_f64(),
        }
    }

    /// Sup-norm distance, evaluated in floating point.
    pub fn distance(&self, other: &StatePoint<T>) -> f64 {
        sup_distance(&self.to_f64().coords(), &other.to_f64().coords())
    }

    pub fn scale(&self, factor: &T) -> StatePoint<T> {
        StatePoint {
            x: self.x.iter().map(|v| v.clone() * factor.clone()).collect(),
            u: self.u.clone() * factor.clone(),
        }
    }

    pub fn add(&self, other: &StatePoint<T>) -> StatePoint<T> {
        StatePoint {
            x: self
                .x
                .iter()
                .zip(&other.x)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
            u: self.u.clone() + other.u.clone(),
        }
    }
}

impl StatePoint<Rational> {
    pub fn from_ratios(coords: &[(i64, i64)]) -> Self {
        let coords: Vec<Rational> = coords.iter().map(|&(p, q)| crate::scalar::ratio(p, q)).collect();
        StatePoint::from_coords(&coords)
    }

    pub fn lift<S: Scalar>(&self) -> StatePoint<S> {
        StatePoint {
            x: self.x.iter().map(S::from_rational).collect(),
            u: S::from_rational(&self.u),
        }
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl fmt::Display for StatePoint<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Display for StatePoint<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|v| format!("{v}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}
