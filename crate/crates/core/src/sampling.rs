//! Seeded random starting points.
//!
//! Float points are uniform on the simplex (normalised exponentials).
//! Rational points have a common denominator and a random support, so that
//! faces of the simplex are hit with positive probability.

use num_traits::Zero;
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::models::{InvariantRule, Model};
use crate::operators::classify_membership;
use crate::scalar::{ratio, Rational};
use crate::state::StatePoint;

pub use rand::SeedableRng;

pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the simplex with `n` female coordinates plus `u`.
pub fn sample_simplex(rng: &mut impl Rng, n: usize) -> StatePoint<f64> {
    loop {
        let e: Vec<f64> = (0..=n).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = e.iter().sum();
        let coords: Vec<f64> = e.iter().map(|v| v / total).collect();
        let p = StatePoint::from_coords(&coords);
        if p.u > 0.0 && p.alpha() > 0.0 {
            return p;
        }
    }
}

/// Rational point with denominator `denom` that is positive exactly on
/// `support` (indices into `x_1, …, x_n, u`). Needs `denom ≥ support.len()`.
pub fn rational_on_support(rng: &mut impl Rng, n: usize, denom: i64, support: &[usize]) -> StatePoint<Rational> {
    assert!(!support.is_empty() && denom as usize >= support.len());
    let mut cuts: Vec<i64> = index::sample(rng, denom as usize - 1, support.len() - 1)
        .into_iter()
        .map(|c| c as i64 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(denom);
    let mut coords = vec![ratio(0, 1); n + 1];
    let mut prev = 0;
    for (&slot, &cut) in support.iter().zip(&cuts) {
        coords[slot] = ratio(cut - prev, denom);
        prev = cut;
    }
    StatePoint::from_coords(&coords)
}

/// Rational point with all `n + 1` coordinates positive.
pub fn sample_rational_interior(rng: &mut impl Rng, n: usize, denom: i64) -> StatePoint<Rational> {
    let support: Vec<usize> = (0..=n).collect();
    rational_on_support(rng, n, denom, &support)
}

/// Random support: each female coordinate is kept with probability 1/2,
/// `u` with probability `u_keep`. At least one coordinate survives.
fn random_support(rng: &mut impl Rng, n: usize, u_keep: f64) -> Vec<usize> {
    loop {
        let mut support: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if rng.gen_bool(u_keep) {
            support.push(n);
        }
        if !support.is_empty() {
            return support;
        }
    }
}

const MAX_ATTEMPTS: usize = 10_000;

/// Rational start in the model's invariant set. Half of the draws are
/// interior points, the rest lie on random faces.
pub fn sample_in_invariant(model: &Model, rng: &mut impl Rng, denom: i64) -> Option<StatePoint<Rational>> {
    let n = model.n();
    for _ in 0..MAX_ATTEMPTS {
        let p = if rng.gen_bool(0.5) {
            sample_rational_interior(rng, n, denom)
        } else {
            let support = random_support(rng, n, 1.0);
            rational_on_support(rng, n, denom, &support)
        };
        if classify_membership(model, &p).in_model_invariant {
            return Some(p);
        }
    }
    None
}

/// Rational simplex start outside the model's invariant set. Points with
/// `u > 0` are preferred; when none exist (for instance when the invariant
/// set is all of `S^{n,1}`) a point with `u = 0` is returned.
pub fn sample_outside_invariant(model: &Model, rng: &mut impl Rng, denom: i64) -> Option<StatePoint<Rational>> {
    let n = model.n();
    let phases: &[f64] = if model.invariant_rule() == InvariantRule::Simplex {
        &[0.0]
    } else {
        &[1.0, 0.0]
    };
    for &u_keep in phases {
        // Faces outside the set are hit with probability at least 2^-n when
        // they exist, so the first phase needs few attempts.
        let attempts = if u_keep > 0.0 { 64 << n } else { MAX_ATTEMPTS };
        for _ in 0..attempts {
            let support = random_support(rng, n, u_keep);
            let p = rational_on_support(rng, n, denom, &support);
            if !p.alpha().is_zero() && !classify_membership(model, &p).in_model_invariant {
                return Some(p);
            }
        }
    }
    None
}
