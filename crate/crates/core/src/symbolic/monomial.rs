use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// An interned-by-value symbol name: a program variable, a parameter, or a
/// symbolic initial value such as `y(0)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The symbol standing for the unspecified initial value of `var`.
    pub fn initial_of(var: &Symbol) -> Self {
        Symbol::new(&format!("{}(0)", var.as_str()))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// A power product of symbols with positive exponents, sorted by symbol.
///
/// Ordering is graded lexicographic: total degree first, then the exponent
/// vector compared symbol by symbol in name order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    factors: Vec<(Symbol, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(s: Symbol) -> Self {
        Self::power(s, 1)
    }

    pub fn power(s: Symbol, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial {
                factors: vec![(s, e)],
            }
        }
    }

    /// Builds a monomial from arbitrary (possibly repeated, possibly zero)
    /// factors.
    pub fn from_factors<I: IntoIterator<Item = (Symbol, u32)>>(iter: I) -> Self {
        let mut factors: Vec<(Symbol, u32)> = iter.into_iter().filter(|(_, e)| *e > 0).collect();
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Symbol, u32)> = Vec::with_capacity(factors.len());
        for (s, e) in factors {
            match merged.last_mut() {
                Some((last, le)) if *last == s => *le += e,
                _ => merged.push((s, e)),
            }
        }
        Monomial { factors: merged }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, s: &Symbol) -> u32 {
        self.factors
            .binary_search_by(|(t, _)| t.cmp(s))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.factors
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.factors.iter().map(|(s, _)| s)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ea) = &self.factors[i];
            let (b, eb) = &other.factors[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.clone(), ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial { factors: out }
    }

    /// Removes `s` and returns its former exponent.
    pub fn take(&self, s: &Symbol) -> (Monomial, u32) {
        match self.factors.binary_search_by(|(t, _)| t.cmp(s)) {
            Ok(i) => {
                let mut factors = self.factors.clone();
                let (_, e) = factors.remove(i);
                (Monomial { factors }, e)
            }
            Err(_) => (self.clone(), 0),
        }
    }

    /// Splits into the factors satisfying `pred` and the rest.
    pub fn partition<F: Fn(&Symbol) -> bool>(&self, pred: F) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.factors.iter().cloned().partition(|(s, _)| pred(s));
        (Monomial { factors: a }, Monomial { factors: b })
    }

    /// Renders as `x^2*y`, or `x^2*y^1` when `explicit_ones` is set.
    pub fn render(&self, explicit_ones: bool) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|(s, e)| {
                if *e == 1 && !explicit_ones {
                    s.to_string()
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.factors.iter().zip(other.factors.iter()) {
                match a.0.cmp(&b.0) {
                    // `self` has a positive exponent on an earlier symbol.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match a.1.cmp(&b.1) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    },
                }
            }
            self.factors.len().cmp(&other.factors.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}
