use std::fmt;

use super::monomial::{Monomial, Symbol};

/// The expected value `E[m(n)]` of a monomial `m` over program variables,
/// viewed as a sequence in the loop counter.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EVar(Monomial);

impl EVar {
    /// Returns `None` for the empty monomial.
    pub fn new(m: Monomial) -> Option<Self> {
        if m.is_one() {
            None
        } else {
            Some(EVar(m))
        }
    }

    pub fn power(var: Symbol, k: u32) -> Option<Self> {
        Self::new(Monomial::power(var, k))
    }

    pub fn monomial(&self) -> &Monomial {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.degree()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Symbol> {
        self.0.symbols()
    }

    /// Renders with every exponent written out, e.g. `x^1*y^1`.
    pub fn explicit(&self) -> String {
        self.0.render(true)
    }

    /// `E[x^1*y^1]`.
    pub fn label(&self) -> String {
        format!("E[{}]", self.explicit())
    }
}

impl fmt::Display for EVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for EVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E[{}]", self.0)
    }
}
