//! Exact symbolic algebra: sparse multivariate polynomials, exponential
//! polynomials in the loop counter, and expected-monomial variables.

pub mod evar;
pub mod exppoly;
pub mod monomial;
pub mod parse;
pub mod poly;
pub mod render;
pub mod scalar;

pub use evar::EVar;
pub use exppoly::{ExpPoly, ExpTerm};
pub use monomial::{Monomial, Symbol};
pub use poly::{Poly, UnboundSymbol};
pub use scalar::Scalar;
