//! Exponential polynomials in the loop counter `n`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use super::monomial::Symbol;
use super::poly::{Poly, UnboundSymbol};
use super::scalar::Scalar;

/// A finite sum `Σ coeff · baseⁿ · n^degree`.
///
/// Bases and coefficients are polynomials over parameters. The convention
/// `0⁰ = 1` makes a zero base a Kronecker delta at `n = 0`; terms with a
/// zero base and positive degree vanish identically and are never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ExpPoly<C: Scalar> {
    terms: BTreeMap<(Poly<C>, u32), Poly<C>>,
}

/// One `coeff · baseⁿ · n^degree` summand.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExpTerm<C: Scalar> {
    pub base: Poly<C>,
    pub degree: u32,
    pub coeff: Poly<C>,
}

impl<C: Scalar> ExpPoly<C> {
    pub fn zero() -> Self {
        ExpPoly {
            terms: BTreeMap::new(),
        }
    }

    /// A value constant in `n`.
    pub fn constant(c: Poly<C>) -> Self {
        Self::term(Poly::one(), 0, c)
    }

    /// `coeff · baseⁿ · n^degree`.
    pub fn term(base: Poly<C>, degree: u32, coeff: Poly<C>) -> Self {
        let mut out = Self::zero();
        out.add_term(base, degree, coeff);
        out
    }

    /// `n^d`.
    pub fn n_power(d: u32) -> Self {
        Self::term(Poly::one(), d, Poly::one())
    }

    /// `baseⁿ`.
    pub fn geometric(base: Poly<C>) -> Self {
        Self::term(base, 0, Poly::one())
    }

    pub fn from_terms<I: IntoIterator<Item = ExpTerm<C>>>(iter: I) -> Self {
        let mut out = Self::zero();
        for t in iter {
            out.add_term(t.base, t.degree, t.coeff);
        }
        out
    }

    pub fn add_term(&mut self, base: Poly<C>, degree: u32, coeff: Poly<C>) {
        if coeff.is_zero() || (base.is_zero() && degree > 0) {
            return;
        }
        let key = (base, degree);
        match self.terms.remove(&key) {
            Some(old) => {
                let sum = &old + &coeff;
                if !sum.is_zero() {
                    self.terms.insert(key, sum);
                }
            }
            None => {
                self.terms.insert(key, coeff);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_negligible(&self) -> bool {
        self.terms.values().all(Poly::is_negligible)
    }

    pub fn terms(&self) -> impl Iterator<Item = ExpTerm<C>> + '_ {
        self.terms.iter().map(|((b, d), c)| ExpTerm {
            base: b.clone(),
            degree: *d,
            coeff: c.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Distinct exponential bases in canonical order.
    pub fn bases(&self) -> Vec<Poly<C>> {
        let set: BTreeSet<&Poly<C>> = self.terms.keys().map(|(b, _)| b).collect();
        set.into_iter().cloned().collect()
    }

    /// Polynomial part attached to `base`, as coefficients indexed by degree.
    pub fn poly_for_base(&self, base: &Poly<C>) -> Vec<Poly<C>> {
        let mut out: Vec<Poly<C>> = Vec::new();
        for ((b, d), c) in &self.terms {
            if b == base {
                let d = *d as usize;
                if out.len() <= d {
                    out.resize(d + 1, Poly::zero());
                }
                out[d] = c.clone();
            }
        }
        out
    }

    /// Highest power of `n` attached to `base`, if the base occurs.
    pub fn degree_for_base(&self, base: &Poly<C>) -> Option<u32> {
        self.terms
            .keys()
            .filter(|(b, _)| b == base)
            .map(|(_, d)| *d)
            .max()
    }

    /// The value at `n = 0` as a parameter polynomial.
    pub fn at_zero(&self) -> Poly<C> {
        self.terms
            .iter()
            .filter(|((_, d), _)| *d == 0)
            .fold(Poly::zero(), |acc, (_, c)| &acc + c)
    }

    /// `f(n + 1)` as an exponential polynomial in `n`.
    pub fn shift(&self) -> Self {
        let mut out = Self::zero();
        for ((b, d), c) in &self.terms {
            let scaled = c * b;
            if scaled.is_zero() {
                continue;
            }
            // (n+1)^d = Σ C(d,i) n^i
            let mut binom = C::one();
            for i in 0..=*d {
                out.add_term(b.clone(), i, scaled.scale(&binom));
                binom = binom * C::from_i64(i64::from(d - i)) / C::from_i64(i64::from(i + 1));
            }
        }
        out
    }

    pub fn scale(&self, k: &Poly<C>) -> Self {
        let mut out = Self::zero();
        for ((b, d), c) in &self.terms {
            out.add_term(b.clone(), *d, c * k);
        }
        out
    }

    pub fn eval(&self, n: u64, bindings: &HashMap<Symbol, C>) -> Result<C, UnboundSymbol> {
        let nn = C::from_i64(n as i64);
        let mut acc = C::zero();
        for ((b, d), c) in &self.terms {
            let base = b.eval(bindings)?;
            let coeff = c.eval(bindings)?;
            acc = acc + coeff * base.pow_u64(n) * nn.pow_u64(u64::from(*d));
        }
        Ok(acc)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for ((b, _), c) in &self.terms {
            out.extend(b.symbols());
            out.extend(c.symbols());
        }
        out
    }

    /// Degree in `n` of the whole expression.
    pub fn n_degree(&self) -> u32 {
        self.terms.keys().map(|(_, d)| *d).max().unwrap_or(0)
    }

    pub fn map_coeffs<D: Scalar, F: Fn(&C) -> D>(&self, f: F) -> ExpPoly<D> {
        let mut out = ExpPoly::zero();
        for ((b, d), c) in &self.terms {
            out.add_term(b.map_coeffs(&f), *d, c.map_coeffs(&f));
        }
        out
    }

    pub fn as_constant(&self) -> Option<Poly<C>> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&(Poly::one(), 0)) {
                return Some(c.clone());
            }
        }
        None
    }
}

impl<C: Scalar> Default for ExpPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<'a, C: Scalar> Add<&'a ExpPoly<C>> for &'a ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn add(self, rhs: &'a ExpPoly<C>) -> ExpPoly<C> {
        let mut out = self.clone();
        for ((b, d), c) in &rhs.terms {
            out.add_term(b.clone(), *d, c.clone());
        }
        out
    }
}

impl<'a, C: Scalar> Sub<&'a ExpPoly<C>> for &'a ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn sub(self, rhs: &'a ExpPoly<C>) -> ExpPoly<C> {
        let mut out = self.clone();
        for ((b, d), c) in &rhs.terms {
            out.add_term(b.clone(), *d, -c);
        }
        out
    }
}

impl<'a, C: Scalar> Mul<&'a ExpPoly<C>> for &'a ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn mul(self, rhs: &'a ExpPoly<C>) -> ExpPoly<C> {
        let mut out = ExpPoly::zero();
        for ((ba, da), ca) in &self.terms {
            for ((bb, db), cb) in &rhs.terms {
                out.add_term(ba * bb, da + db, ca * cb);
            }
        }
        out
    }
}

impl<C: Scalar> Neg for &ExpPoly<C> {
    type Output = ExpPoly<C>;
    fn neg(self) -> ExpPoly<C> {
        self.scale(&-Poly::one())
    }
}
