//! Exact engine for extending distributions across the origin so that they
//! keep satisfying a given set of linear equations.
//!
//! Everything reduces to linear algebra on the finite-dimensional spaces
//! `D'({0})_{≤r} = span{δ^(α) : |α| ≤ r}`, carried out over exact fields.

pub mod chi;
pub mod degree;
pub mod deltaspace;
pub mod error;
pub mod extension;
pub mod linalg;
pub mod opalg;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Gaussian, Rational, Scalar};

pub type DeltaVector = deltaspace::DeltaVector<Gaussian>;
pub type Polynomial = deltaspace::Polynomial<Gaussian>;
pub type OperatorExpr = opalg::OperatorExpr<Gaussian>;
pub type ExtensionRecord = extension::ExtensionRecord<Gaussian>;
pub type RestrictionMatrix = spectral::RestrictionMatrix<Gaussian>;
pub type ConstCoeffOperator = chi::ConstCoeffOperator<Gaussian>;
