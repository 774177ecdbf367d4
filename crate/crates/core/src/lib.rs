//! Gonosomal algebras with a single male genotype and their evolution
//! operators.

pub mod algebra;
pub mod audit;
pub mod dynamics;
pub mod fixed_points;
pub mod format;
pub mod models;
pub mod operators;
pub mod oracle;
pub mod output;
pub mod realizability;
pub mod sampling;
pub mod scalar;
pub mod state;

pub use algebra::{AlgebraError, BaricAlgebra, GonosomalSpec, Pair, ValidationIssue, ValidationReport};
pub use scalar::{Rational, Scalar, Surd};
pub use state::StatePoint;
