//! Closed-form moment invariants for probabilistic loops with polynomial
//! updates.
//!
//! A program is parsed and checked by [`frontend`], its loop body is
//! rewritten into linear equations over expected monomials by [`moments`],
//! and those equations are solved in dependency order by [`recurrences`].
//! The algebra in [`symbolic`] is generic over the coefficient field; the
//! aliases below fix it to exact rationals, which is what the pipeline uses.

pub mod analysis;
pub mod emit;
pub mod error;
pub mod frontend;
pub mod moments;
pub mod recurrences;
pub mod symbolic;
pub mod verifier;

pub use error::Error;
pub use symbolic::{EVar, ExpPoly, Monomial, Poly, Scalar, Symbol};

/// Arbitrary-precision rational numbers.
pub type Rational = num_rational::BigRational;

/// Polynomial over parameters (including symbolic initial values).
pub type ParamExpr = Poly<Rational>;

/// Polynomial over program variables and parameters.
pub type VarPoly = Poly<Rational>;

/// Exact closed form in the loop counter.
pub type ClosedForm = ExpPoly<Rational>;

/// Floating-point counterparts of the exact types.
pub type ParamExprF64 = Poly<f64>;
pub type ClosedFormF64 = ExpPoly<f64>;
