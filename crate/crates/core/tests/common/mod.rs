//! Independent reference implementations for the integration tests.
//!
//! Model rows are typed in from their defining formulas and the operator is
//! written out directly, so none of this goes through the library's own
//! constructors or kernels.

#![allow(dead_code)]

use std::collections::BTreeMap;

use gonosomal::realizability::CrossTable;
use gonosomal::scalar::{int, ratio, Rational};
use gonosomal::{Pair, Scalar, StatePoint};
use num_traits::Zero;

pub type Rows = Vec<(Vec<Rational>, Rational)>;

pub fn q(p: i64, d: i64) -> Rational {
    ratio(p, d)
}

/// Rows `(η, 0, 0 | 1−η)`, `(0, 1/2, 0 | 1/2)`, `(η/2, (1−η)/2, η/2 | (1−η)/2)`.
pub fn wolbachia_rows(eta: &Rational) -> Rows {
    let one = int(1);
    let half = q(1, 2);
    vec![
        (vec![eta.clone(), int(0), int(0)], &one - eta),
        (vec![int(0), half.clone(), int(0)], half.clone()),
        (
            vec![eta * &half, (&one - eta) * &half, eta * &half],
            (&one - eta) * &half,
        ),
    ]
}

/// Row `i` is `(γ_i, c_i, …, c_i | γ_i)` with `c_i = (1 − 2γ_i)/(n − 1)`.
pub fn lemming_rows(gammas: &[Rational]) -> Rows {
    let n = gammas.len();
    let m = int(n as i64 - 1);
    gammas
        .iter()
        .map(|g| {
            let c = (int(1) - g * int(2)) / &m;
            let mut row = vec![g.clone()];
            row.extend(std::iter::repeat(c).take(n - 1));
            (row, g.clone())
        })
        .collect()
}

pub fn arctic_rows() -> Rows {
    vec![
        (vec![q(1, 2), int(0), int(0)], q(1, 2)),
        (vec![q(1, 4), q(1, 4), q(1, 4)], q(1, 4)),
        (vec![int(0), q(1, 3), q(1, 3)], q(1, 3)),
    ]
}

/// `V(x, u) = (u Σ_i x_i γ_i1, …, u Σ_i x_i γ_in, u Σ_i x_i γ̃_i)`.
pub fn raw_step(rows: &Rows, x: &[Rational], u: &Rational) -> (Vec<Rational>, Rational) {
    let n = rows.len();
    let mut out = vec![Rational::zero(); n];
    let mut male = Rational::zero();
    for (xi, (row, tilde)) in x.iter().zip(rows) {
        for j in 0..n {
            out[j] += u * xi * &row[j];
        }
        male += u * xi * tilde;
    }
    (out, male)
}

/// Normalised step on a probability vector `(x_1, …, x_n, u)`: the raw image
/// divided by its total.
pub fn normalized_step_exact(rows: &Rows, s: &[Rational]) -> Vec<Rational> {
    let n = rows.len();
    let (x, u) = raw_step(rows, &s[..n], &s[n]);
    let total: Rational = x.iter().sum::<Rational>() + &u;
    let mut out: Vec<Rational> = x.iter().map(|v| v / &total).collect();
    out.push(u / total);
    out
}

pub fn rows_f64(rows: &Rows) -> Vec<(Vec<f64>, f64)> {
    let f = |v: &Rational| {
        use num_traits::ToPrimitive;
        v.to_f64().unwrap()
    };
    rows.iter().map(|(r, t)| (r.iter().map(f).collect(), f(t))).collect()
}

/// Float version of [`normalized_step_exact`].
pub fn normalized_step(rows: &[(Vec<f64>, f64)], s: &[f64]) -> Vec<f64> {
    let n = rows.len();
    let u = s[n];
    let mut out = vec![0.0; n + 1];
    for (xi, (row, tilde)) in s[..n].iter().zip(rows) {
        for j in 0..n {
            out[j] += u * xi * row[j];
        }
        out[n] += u * xi * tilde;
    }
    let total: f64 = out.iter().sum();
    out.iter().map(|v| v / total).collect()
}

/// Iterates [`normalized_step`] `steps` times.
pub fn orbit(rows: &[(Vec<f64>, f64)], start: &[f64], steps: usize) -> Vec<f64> {
    let mut s = start.to_vec();
    for _ in 0..steps {
        s = normalized_step(rows, &s);
    }
    s
}

pub fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn to_f64(v: &[Rational]) -> Vec<f64> {
    use num_traits::ToPrimitive;
    v.iter().map(|x| x.to_f64().unwrap()).collect()
}

/// Coefficients of the symmetrised product `α ⊗ β` on the unordered pair
/// `(i, j)`: `α_i β_j + α_j β_i` off the diagonal and `α_i β_i` on it.
pub fn tensor_coeff(alpha: &[Rational], beta: &[Rational], i: usize, j: usize) -> Rational {
    if i == j {
        &alpha[i] * &beta[i]
    } else {
        &alpha[i] * &beta[j] + &alpha[j] * &beta[i]
    }
}

/// All unordered index pairs `(i, j)` with `i ≤ j < dim`, row by row.
pub fn all_pairs(dim: usize) -> Vec<(usize, usize)> {
    (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect()
}

/// Probability vector with denominators drawn from small integer weights.
/// Roughly a third of the entries are zero, so faces get exercised too.
pub fn random_probability(rng: &mut impl rand::Rng, dim: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..dim)
            .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=9) })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&v| q(v, total)).collect();
        }
    }
}

/// `V(p) − p` in any exact scalar, computed from the rows directly.
pub fn raw_defect<T: Scalar>(rows: &Rows, p: &StatePoint<T>) -> Vec<T> {
    let n = rows.len();
    let mut image = vec![T::zero(); n + 1];
    for (xi, (row, tilde)) in p.x.iter().zip(rows) {
        let w = p.u.clone() * xi.clone();
        for j in 0..n {
            image[j] = image[j].clone() + w.clone() * T::from_rational(&row[j]);
        }
        image[n] = image[n].clone() + w * T::from_rational(tilde);
    }
    image.into_iter().zip(p.coords()).map(|(a, b)| a - b).collect()
}

/// `Ṽ(p) − p` for a point of the simplex.
pub fn normalized_defect<T: Scalar>(rows: &Rows, p: &StatePoint<T>) -> Vec<T> {
    let raw: Vec<T> = raw_defect(rows, p)
        .into_iter()
        .zip(p.coords())
        .map(|(d, c)| d + c)
        .collect();
    let total = raw.iter().cloned().fold(T::zero(), |a, b| a + b);
    raw.into_iter()
        .zip(p.coords())
        .map(|(v, c)| v / total.clone() - c)
        .collect()
}

pub fn all_zero<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Single-product table `f_female · h = α ⊗ β`, built from the tensor
/// formula with every non-male pair listed as female.
pub fn forward_table(dim: usize, female: Pair, male: Pair, alpha: &[Rational], beta: &[Rational]) -> CrossTable {
    let pairs: Vec<Pair> = all_pairs(dim).into_iter().map(|(i, j)| Pair::new(i, j)).collect();
    let females: Vec<Pair> = pairs.iter().copied().filter(|&p| p != male).collect();
    let mut coeffs: Vec<Rational> = females
        .iter()
        .map(|p| tensor_coeff(alpha, beta, p.first(), p.second()))
        .collect();
    coeffs.push(tensor_coeff(alpha, beta, male.first(), male.second()));
    CrossTable::new(dim, females, male, BTreeMap::from([(female, coeffs)])).unwrap()
}
