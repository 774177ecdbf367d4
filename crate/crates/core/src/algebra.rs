//! Gonosomal algebras with a single male genotype, baric algebras, and the
//! duplicate/reduction constructions that produce the former from the latter.
//!
//! Indices are zero-based in code. Text formats (see [`crate::format`]) and
//! rendered messages use one-based indices to match genotype numbering.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scalar::{format_rational, int, ratio, Rational};

/// Structure constants of a gonosomal algebra with female basis
/// `f_1, …, f_n` and male basis element `h`:
/// `f_i h = Σ_k gamma[i][k] f_k + gamma_tilde[i] h`.
///
/// A spec may hold invalid constants; [`GonosomalSpec::validate`] reports
/// them. Everything built by this crate's constructors is valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GonosomalSpec {
    gamma: Vec<Vec<Rational>>,
    gamma_tilde: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("a gonosomal algebra needs at least one female genotype")]
    Empty,
    #[error("row {row} has {found} female coefficients, expected {expected}")]
    RowLength { row: usize, found: usize, expected: usize },
    #[error("structure constants are invalid: {0}")]
    Invalid(ValidationReport),
    #[error("pair {0} is outside the index range of the baric algebra")]
    PairOutOfRange(Pair),
    #[error("male pair {0} also appears among the female pairs")]
    MaleInOmega(Pair),
    #[error("female pair {0} listed twice")]
    DuplicatePair(Pair),
    #[error("closure condition fails: product f_{female}·h has a component on {offending}, which is neither female nor male")]
    ClosureViolation { female: Pair, offending: Pair },
    #[error("sigma_{} = 0: row {} carries all its female mass on removed genotypes", .0 + 1, .0 + 1)]
    SigmaZero(usize),
    #[error("removal set must be a proper subset of the female genotypes")]
    RemovesEverything,
    #[error("female index {} is out of range", .0 + 1)]
    IndexOutOfRange(usize),
    #[error("baric algebra is invalid: {0}")]
    InvalidBaric(String),
}

/// One violated invariant of a [`GonosomalSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    /// `column == None` refers to the male coefficient of the row.
    NegativeEntry {
        row: usize,
        column: Option<usize>,
        value: Rational,
    },
    RowSum {
        row: usize,
        sum: Rational,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NegativeEntry {
                row,
                column: Some(col),
                value,
            } => write!(
                f,
                "gamma[{}][{}] = {} is negative",
                row + 1,
                col + 1,
                format_rational(value)
            ),
            ValidationIssue::NegativeEntry {
                row,
                column: None,
                value,
            } => write!(f, "gamma_tilde[{}] = {} is negative", row + 1, format_rational(value)),
            ValidationIssue::RowSum { row, sum } => {
                write!(f, "row {} sums to {}, not 1", row + 1, format_rational(sum))
            }
        }
    }
}

/// Every violated invariant; empty means the spec is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

impl GonosomalSpec {
    /// Builds a spec from rows `(gamma_i1, …, gamma_in | gamma_tilde_i)`.
    /// Only the shape is checked.
    pub fn from_rows(rows: Vec<(Vec<Rational>, Rational)>) -> Result<Self, AlgebraError> {
        let n = rows.len();
        if n == 0 {
            return Err(AlgebraError::Empty);
        }
        let mut gamma = Vec::with_capacity(n);
        let mut gamma_tilde = Vec::with_capacity(n);
        for (row, (females, male)) in rows.into_iter().enumerate() {
            if females.len() != n {
                return Err(AlgebraError::RowLength {
                    row,
                    found: females.len(),
                    expected: n,
                });
            }
            gamma.push(females);
            gamma_tilde.push(male);
        }
        Ok(GonosomalSpec { gamma, gamma_tilde })
    }

    /// Like [`GonosomalSpec::from_rows`] but rejects invalid constants.
    pub fn new(rows: Vec<(Vec<Rational>, Rational)>) -> Result<Self, AlgebraError> {
        let spec = Self::from_rows(rows)?;
        let report = spec.validate();
        if report.is_valid() {
            Ok(spec)
        } else {
            Err(AlgebraError::Invalid(report))
        }
    }

    pub fn n(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[Vec<Rational>] {
        &self.gamma
    }

    pub fn gamma_tilde(&self) -> &[Rational] {
        &self.gamma_tilde
    }

    /// `(gamma_i1, …, gamma_in, gamma_tilde_i)`.
    pub fn row(&self, i: usize) -> Vec<Rational> {
        let mut row = self.gamma[i].clone();
        row.push(self.gamma_tilde[i].clone());
        row
    }

    pub fn validate(&self) -> ValidationReport {
        validate_spec(self)
    }
}

/// Lists every negative coefficient and every row whose sum is not exactly 1.
pub fn validate_spec(spec: &GonosomalSpec) -> ValidationReport {
    let mut issues = Vec::new();
    for (i, row) in spec.gamma.iter().enumerate() {
        for (k, value) in row.iter().enumerate() {
            if value.is_negative() {
                issues.push(ValidationIssue::NegativeEntry {
                    row: i,
                    column: Some(k),
                    value: value.clone(),
                });
            }
        }
        let male = &spec.gamma_tilde[i];
        if male.is_negative() {
            issues.push(ValidationIssue::NegativeEntry {
                row: i,
                column: None,
                value: male.clone(),
            });
        }
        let sum: Rational = row.iter().sum::<Rational>() + male;
        if !sum.is_one() {
            issues.push(ValidationIssue::RowSum { row: i, sum });
        }
    }
    ValidationReport { issues }
}

/// Unordered index pair, stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair(usize, usize);

impl Pair {
    pub fn new(i: usize, j: usize) -> Self {
        if i <= j {
            Pair(i, j)
        } else {
            Pair(j, i)
        }
    }

    /// From one-based indices, as written in files and in the literature.
    pub fn one_based(i: usize, j: usize) -> Self {
        assert!(i >= 1 && j >= 1, "one-based indices start at 1");
        Pair::new(i - 1, j - 1)
    }

    pub fn first(self) -> usize {
        self.0
    }

    pub fn second(self) -> usize {
        self.1
    }

    pub fn is_diagonal(self) -> bool {
        self.0 == self.1
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0 + 1, self.1 + 1)
    }
}

/// Commutative baric algebra `e_i e_j = Σ_k c_ijk e_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaricAlgebra {
    dim: usize,
    sc: Vec<Rational>,
    weight_hint: Option<Vec<Rational>>,
}

impl BaricAlgebra {
    /// Builds the algebra from the product of each basis pair and checks
    /// commutativity and unit row sums.
    pub fn from_products(
        dim: usize,
        mut product: impl FnMut(usize, usize) -> Vec<Rational>,
    ) -> Result<Self, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::Empty);
        }
        let mut sc = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let coeffs = product(i, j);
                if coeffs.len() != dim {
                    return Err(AlgebraError::InvalidBaric(format!(
                        "product e_{}e_{} has {} coefficients, expected {dim}",
                        i + 1,
                        j + 1,
                        coeffs.len()
                    )));
                }
                sc.extend(coeffs);
            }
        }
        let algebra = BaricAlgebra {
            dim,
            sc,
            weight_hint: None,
        };
        algebra.check()?;
        Ok(algebra)
    }

    /// Builds a commutative algebra from the products of unordered pairs;
    /// pairs that are not listed are an error.
    pub fn from_pair_products(dim: usize, products: &BTreeMap<Pair, Vec<Rational>>) -> Result<Self, AlgebraError> {
        let mut missing = None;
        let algebra = Self::from_products(dim, |i, j| match products.get(&Pair::new(i, j)) {
            Some(v) => v.clone(),
            None => {
                missing.get_or_insert(Pair::new(i, j));
                vec![Rational::zero(); dim]
            }
        });
        match missing {
            Some(pair) => Err(AlgebraError::InvalidBaric(format!("no product given for {pair}"))),
            None => algebra,
        }
    }

    pub fn with_weight_hint(mut self, weights: Vec<Rational>) -> Self {
        self.weight_hint = Some(weights);
        self
    }

    fn check(&self) -> Result<(), AlgebraError> {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                let row = self.product(i, j);
                if row != self.product(j, i) {
                    return Err(AlgebraError::InvalidBaric(format!(
                        "e_{}e_{} != e_{}e_{}",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
                let sum: Rational = row.iter().sum();
                if !sum.is_one() {
                    return Err(AlgebraError::InvalidBaric(format!(
                        "coefficients of e_{}e_{} sum to {}",
                        i + 1,
                        j + 1,
                        format_rational(&sum)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight_hint(&self) -> Option<&[Rational]> {
        self.weight_hint.as_deref()
    }

    /// Coefficients of `e_i e_j`.
    pub fn product(&self, i: usize, j: usize) -> &[Rational] {
        let start = (i * self.dim + j) * self.dim;
        &self.sc[start..start + self.dim]
    }
}

/// Coefficients of `(Σ_p a_p e_p) ⊗ (Σ_q b_q e_q)` in the commutative
/// duplicate, merged over unordered pairs.
pub(crate) fn symmetric_tensor(a: &[Rational], b: &[Rational]) -> BTreeMap<Pair, Rational> {
    let mut out = BTreeMap::new();
    for (p, ap) in a.iter().enumerate() {
        if ap.is_zero() {
            continue;
        }
        for (q, bq) in b.iter().enumerate() {
            if bq.is_zero() {
                continue;
            }
            *out.entry(Pair::new(p, q)).or_insert_with(Rational::zero) += ap * bq;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Duplicate construction: female genotypes are the pairs of `omega` (in the
/// given order), the male genotype is `male`, and
/// `f_rs h = (e_r e_s) ⊗ (e_k e_l)` expanded in the duplicate.
///
/// The coefficient on `h` is the merged coefficient of the unordered pair
/// `(k,l)`, i.e. `c_rsk c_kll + c_rsl c_klk` when `k ≠ l`.
pub fn duplicate_construct(baric: &BaricAlgebra, omega: &[Pair], male: Pair) -> Result<GonosomalSpec, AlgebraError> {
    let dim = baric.dim();
    for &pair in omega.iter().chain(std::iter::once(&male)) {
        if pair.second() >= dim {
            return Err(AlgebraError::PairOutOfRange(pair));
        }
    }
    if omega.contains(&male) {
        return Err(AlgebraError::MaleInOmega(male));
    }
    let mut index = BTreeMap::new();
    for (i, &pair) in omega.iter().enumerate() {
        if index.insert(pair, i).is_some() {
            return Err(AlgebraError::DuplicatePair(pair));
        }
    }
    if omega.is_empty() {
        return Err(AlgebraError::Empty);
    }

    let male_product = baric.product(male.first(), male.second());
    let mut rows = Vec::with_capacity(omega.len());
    for &female in omega {
        let female_product = baric.product(female.first(), female.second());
        let mut gamma_row = vec![Rational::zero(); omega.len()];
        let mut gamma_male = Rational::zero();
        for (pair, coeff) in symmetric_tensor(female_product, male_product) {
            if pair == male {
                gamma_male = coeff;
            } else if let Some(&k) = index.get(&pair) {
                gamma_row[k] = coeff;
            } else {
                return Err(AlgebraError::ClosureViolation {
                    female,
                    offending: pair,
                });
            }
        }
        rows.push((gamma_row, gamma_male));
    }
    GonosomalSpec::new(rows)
}

/// Reduction construction: drops the female genotypes in `removal` and
/// renormalises every remaining row by `σ_i = 1 − Σ_{k ∈ removal} γ_ik`.
pub fn reduce_basis(spec: &GonosomalSpec, removal: &[usize]) -> Result<GonosomalSpec, AlgebraError> {
    let n = spec.n();
    if let Some(&bad) = removal.iter().find(|&&i| i >= n) {
        return Err(AlgebraError::IndexOutOfRange(bad));
    }
    let removed: Vec<bool> = (0..n).map(|i| removal.contains(&i)).collect();
    if removed.iter().all(|&r| r) {
        return Err(AlgebraError::RemovesEverything);
    }
    let kept: Vec<usize> = (0..n).filter(|&i| !removed[i]).collect();
    let mut rows = Vec::with_capacity(kept.len());
    for &i in &kept {
        let lost: Rational = (0..n).filter(|&k| removed[k]).map(|k| &spec.gamma[i][k]).sum();
        let sigma = Rational::one() - lost;
        if sigma.is_zero() {
            return Err(AlgebraError::SigmaZero(i));
        }
        let row: Vec<Rational> = kept.iter().map(|&k| &spec.gamma[i][k] / &sigma).collect();
        rows.push((row, &spec.gamma_tilde[i] / &sigma));
    }
    GonosomalSpec::from_rows(rows)
}

/// Baric algebra on `{X, X*, Y}` used for the Arctic lemming:
/// `e_i² = e_i`, `e_1 e_i = ½(e_1 + e_i)`, `e_2 e_3 = ½(e_2 + e_3)`.
pub fn arctic_baric() -> BaricAlgebra {
    let half = ratio(1, 2);
    BaricAlgebra::from_products(3, |i, j| {
        let mut v = vec![Rational::zero(); 3];
        if i == j {
            v[i] = int(1);
        } else {
            v[i] += &half;
            v[j] += &half;
        }
        v
    })
    .expect("arctic baric algebra is valid")
    .with_weight_hint(vec![int(1), int(1), int(1)])
}

/// Female pairs `XX, XX*, X*Y, YY` (the last one is a phantom genotype) and
/// male pair `XY` for the Arctic lemming intermediate algebra.
pub fn arctic_pairs() -> (Vec<Pair>, Pair) {
    (
        vec![
            Pair::one_based(1, 1),
            Pair::one_based(1, 2),
            Pair::one_based(2, 3),
            Pair::one_based(3, 3),
        ],
        Pair::one_based(1, 3),
    )
}

/// Four-female intermediate spec for the Arctic lemming, before the phantom
/// genotype is removed.
pub fn arctic_intermediate() -> GonosomalSpec {
    let (omega, male) = arctic_pairs();
    duplicate_construct(&arctic_baric(), &omega, male).expect("arctic intermediate satisfies closure")
}

/// Arctic lemming spec: the intermediate with the phantom genotype removed.
pub fn arctic_via_reduction() -> GonosomalSpec {
    reduce_basis(&arctic_intermediate(), &[3]).expect("sigma is non-zero for every kept row")
}

/// Baric algebra on `{X, X*, Y}` realising the wood lemming crosses:
/// `e_i² = e_i`, `e_1 e_2 = ½(e_1 + e_2)`, `e_1 e_3 = ½(e_1 + e_3)` and
/// `e_2 e_3 = e_2` (X*Y females only pass on X*).
pub fn wood_lemming_baric() -> BaricAlgebra {
    let half = ratio(1, 2);
    BaricAlgebra::from_products(3, |i, j| {
        let mut v = vec![Rational::zero(); 3];
        match (i.min(j), i.max(j)) {
            (a, b) if a == b => v[a] = int(1),
            (1, 2) => v[1] = int(1),
            (a, b) => {
                v[a] += &half;
                v[b] += &half;
            }
        }
        v
    })
    .expect("wood lemming baric algebra is valid")
}

/// Female pairs `XX, XX*, X*Y` and male pair `XY`.
pub fn wood_lemming_pairs() -> (Vec<Pair>, Pair) {
    (
        vec![Pair::one_based(1, 1), Pair::one_based(1, 2), Pair::one_based(2, 3)],
        Pair::one_based(1, 3),
    )
}
