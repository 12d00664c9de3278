use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::monomial::{Monomial, Symbol};
use super::scalar::{is_negative, Scalar};

/// Sparse multivariate polynomial in canonical expanded form.
///
/// Invariant: no stored coefficient is zero. Iteration follows the graded
/// lexicographic monomial order, so two polynomials are equal exactly when
/// their term lists are.
#[derive(Clone)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unbound symbol `{0}`")]
pub struct UnboundSymbol(pub Symbol);

impl<C: Scalar> Poly<C> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn from_i64(v: i64) -> Self {
        Self::constant(C::from_i64(v))
    }

    pub fn var(s: Symbol) -> Self {
        Self::term(C::one(), Monomial::var(s))
    }

    pub fn term(c: C, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    /// Collects terms, combining duplicates and dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(iter: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Zero up to the coefficient field's rounding.
    pub fn is_negligible(&self) -> bool {
        self.terms.values().all(Scalar::is_negligible)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value of a polynomial without symbols.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> C {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms
            .keys()
            .flat_map(|m| m.symbols().cloned())
            .collect()
    }

    pub fn mentions(&self, s: &Symbol) -> bool {
        self.terms.keys().any(|m| m.exponent(s) > 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, s: &Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(
            self.terms
                .iter()
                .map(|(m, k)| (m.clone(), k.clone() * c.clone())),
        )
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.mul(mono), k.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Replaces every occurrence of `v` by `r` and expands.
    pub fn substitute(&self, v: &Symbol, r: &Poly<C>) -> Self {
        let mut powers: Vec<Poly<C>> = vec![Self::one()];
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.take(v);
            if e == 0 {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            while powers.len() <= e as usize {
                let next = powers.last().expect("nonempty") * r;
                powers.push(next);
            }
            for (pm, pc) in &powers[e as usize].terms {
                out.add_term(pm.mul(&rest), pc.clone() * c.clone());
            }
        }
        out
    }

    /// Substitutes several symbols at once; the replacements are not
    /// themselves rewritten.
    pub fn substitute_all(&self, map: &HashMap<Symbol, Poly<C>>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut acc = Self::one();
            let mut rest = Vec::new();
            for (s, e) in m.factors() {
                match map.get(s) {
                    Some(r) => acc = &acc * &r.pow(*e),
                    None => rest.push((s.clone(), *e)),
                }
            }
            let rest = Monomial::from_factors(rest);
            for (pm, pc) in acc.terms {
                out.add_term(pm.mul(&rest), pc * c.clone());
            }
        }
        out
    }

    /// Evaluates with every symbol bound.
    pub fn eval(&self, bindings: &HashMap<Symbol, C>) -> Result<C, UnboundSymbol> {
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (s, e) in m.factors() {
                let b = bindings.get(s).ok_or_else(|| UnboundSymbol(s.clone()))?;
                v = v * b.pow_u64(u64::from(*e));
            }
            acc = acc + v;
        }
        Ok(acc)
    }

    pub fn map_coeffs<D: Scalar, F: Fn(&C) -> D>(&self, f: F) -> Poly<D> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Groups terms by the part of each monomial selected by `pred`.
    ///
    /// Returns `key monomial -> polynomial in the remaining symbols`.
    pub fn collect_by<F: Fn(&Symbol) -> bool>(&self, pred: F) -> BTreeMap<Monomial, Poly<C>> {
        let mut out: BTreeMap<Monomial, Poly<C>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest) = m.partition(&pred);
            out.entry(key)
                .or_insert_with(Self::zero)
                .add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }
}

impl<C: Scalar> PartialEq for Poly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<C: Scalar> Eq for Poly<C> {}

impl<C: Scalar> Ord for Poly<C> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Highest monomials first so that comparison reads like the display.
        let mut a = self.terms.iter().rev();
        let mut b = other.terms.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((ma, ca)), Some((mb, cb))) => {
                    let ord = ma.cmp(mb).then_with(|| ca.total_cmp(cb));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
            }
        }
    }
}

impl<C: Scalar> PartialOrd for Poly<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: Scalar> Default for Poly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<'a, C: Scalar> Add<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &'a Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a, C: Scalar> Sub<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &'a Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a, C: Scalar> Mul<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &'a Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Scalar> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl<C: Scalar> $tr<Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $f(self, rhs: Poly<C>) -> Poly<C> {
                (&self).$f(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl<C: Scalar> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        -&self
    }
}

impl<C: Scalar> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = is_negative(c);
            let mag = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl<C: Scalar> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn v(s: &str) -> Poly<Rational> {
        Poly::var(Symbol::new(s))
    }

    fn k(n: i64) -> Poly<Rational> {
        Poly::from_i64(n)
    }

    #[test]
    fn difference_of_squares() {
        let p = &(&v("x") + &v("u")) * &(&v("x") - &v("u"));
        assert_eq!(p, &v("x").pow(2) - &v("u").pow(2));
    }

    #[test]
    fn square_of_trinomial() {
        let s = &(&v("y") + &v("x")) + &v("g");
        let expected = [
            v("y").pow(2),
            v("x").pow(2),
            v("g").pow(2),
            &k(2) * &(&v("x") * &v("y")),
            &k(2) * &(&v("x") * &v("g")),
            &k(2) * &(&v("y") * &v("g")),
        ]
        .iter()
        .fold(Poly::zero(), |a, b| &a + b);
        assert_eq!(s.pow(2), expected);
    }

    #[test]
    fn zero_absorbs() {
        let p = &v("x") + &k(3);
        assert!((&p * &Poly::zero()).is_zero());
    }

    #[test]
    fn powers() {
        assert_eq!(v("x").pow(0), k(1));
        let cube = (&v("x") + &k(1)).pow(3);
        let expected =
            &(&(&v("x").pow(3) + &(&k(3) * &v("x").pow(2))) + &(&k(3) * &v("x"))) + &k(1);
        assert_eq!(cube, expected);
        let sq = (&v("x") - &v("u")).pow(2);
        assert_eq!(
            sq,
            &(&v("x").pow(2) - &(&k(2) * &(&v("x") * &v("u")))) + &v("u").pow(2)
        );
    }

    #[test]
    fn substitution_examples() {
        let x = Symbol::new("x");
        let y = Symbol::new("y");
        let ypg = &(&v("y") + &v("x")) + &v("g");
        assert_eq!(ypg.substitute(&y, &v("y")), ypg);
        // Oracle: expanded with pow directly.
        let sq = v("x").pow(2).substitute(&x, &(&v("x") - &v("u")));
        assert_eq!(sq, (&v("x") - &v("u")).pow(2));
        let xy = (&v("x") * &v("y")).substitute(&y, &ypg);
        assert_eq!(xy, &v("x") * &ypg);
        assert_eq!(
            xy,
            &(&(&v("x") * &v("y")) + &v("x").pow(2)) + &(&v("x") * &v("g"))
        );
    }

    #[test]
    fn display_is_deterministic() {
        let p = &(&v("x").pow(2) - &(&k(2) * &v("x"))) + &k(1);
        assert_eq!(p.to_string(), "x^2 - 2*x + 1");
    }

    #[test]
    fn generic_over_f64() {
        let x = Poly::<f64>::var(Symbol::new("x"));
        let p = (&x + &Poly::constant(0.5)).pow(2);
        let mut b = HashMap::new();
        b.insert(Symbol::new("x"), 1.5);
        assert_eq!(p.eval(&b).unwrap(), 4.0);
    }
}
