//! Operators on distributions: polynomial-coefficient differential operators
//! combined with pullbacks along invertible rational linear maps.

mod builders;
mod expr;
mod order;
mod ratmatrix;

pub use builders::{
    casimir, dalembert, euler, lorentz_generator, monomial_derivative, parity, reflection,
    Signature,
};
pub use expr::{normal_form, Factor, OperatorExpr, TermKey};
pub use order::{essential_order, EssentialOrder};
pub use ratmatrix::RatMatrix;
