//! Plain-text and LaTeX rendering of exact closed forms.
//!
//! The text form is re-readable by [`super::parse::parse_closed_form`].
//! Terms with base `1` fold `n^d` into the monomial, so `b^2 n / 3` renders
//! as `b^2*n/3`. Other bases render as a trailing `(base)^n` factor; a zero
//! base renders as `0^n` (one at `n = 0`, zero afterwards).

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::exppoly::ExpPoly;
use super::monomial::{Monomial, Symbol};
use super::poly::Poly;
use super::scalar::format_rational;
use crate::Rational;

pub const COUNTER: &str = "n";

/// Splits a closed form into per-base polynomials in parameters and `n`.
fn by_base(f: &ExpPoly<Rational>) -> Vec<(Poly<Rational>, Poly<Rational>)> {
    let n = Symbol::new(COUNTER);
    let mut grouped: BTreeMap<Poly<Rational>, Poly<Rational>> = BTreeMap::new();
    for t in f.terms() {
        let part = t.coeff.mul_monomial(&Monomial::power(n.clone(), t.degree));
        let slot = grouped.entry(t.base).or_insert_with(Poly::zero);
        *slot = &*slot + &part;
    }
    // Base 1 first, then the rest in descending canonical order.
    let one = Poly::one();
    let mut out: Vec<_> = grouped.into_iter().rev().collect();
    out.sort_by_key(|(b, _)| *b != one);
    out
}

fn text_term(mag: &Rational, m: &Monomial) -> String {
    let num = mag.numer();
    let den = mag.denom();
    let mut s = if m.is_one() {
        num.to_string()
    } else if num.is_one() {
        m.render(false)
    } else {
        format!("{num}*{}", m.render(false))
    };
    if !den.is_one() {
        s.push('/');
        s.push_str(&den.to_string());
    }
    s
}

/// Renders a parameter polynomial, e.g. `b^2/3 + 1`.
pub fn poly_text(p: &Poly<Rational>) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&text_term(&c.abs(), m));
    }
    s
}

fn base_text(base: &Poly<Rational>) -> String {
    match base.as_constant() {
        Some(c) if !c.is_negative() && c.denom().is_one() => format!("{c}^{COUNTER}"),
        _ => format!("({})^{COUNTER}", poly_text(base)),
    }
}

/// Renders a closed form as plain text, e.g. `b^2*n/3`.
pub fn closed_form_text(f: &ExpPoly<Rational>) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (base, part)) in by_base(f).into_iter().enumerate() {
        let (neg, body) = if base.is_one() {
            (false, poly_text(&part))
        } else if part.len() == 1 {
            let (m, c) = part.terms().next().expect("one term");
            let body = if m.is_one() && c.abs().is_one() {
                base_text(&base)
            } else {
                format!("{}*{}", text_term(&c.abs(), m), base_text(&base))
            };
            (c.is_negative(), body)
        } else {
            (
                false,
                format!("({})*{}", poly_text(&part), base_text(&base)),
            )
        };
        if i == 0 {
            if neg {
                s.push('-');
            }
            s.push_str(&body);
        } else if neg {
            s.push_str(" - ");
            s.push_str(&body);
        } else if let Some(rest) = body.strip_prefix('-') {
            s.push_str(" - ");
            s.push_str(rest);
        } else {
            s.push_str(" + ");
            s.push_str(&body);
        }
    }
    s
}

fn tex_monomial(m: &Monomial) -> String {
    m.factors()
        .iter()
        .map(|(s, e)| {
            if *e == 1 {
                s.to_string()
            } else {
                format!("{s}^{{{e}}}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn tex_term(mag: &Rational, m: &Monomial) -> String {
    let num = mag.numer();
    let den = mag.denom();
    let top = if m.is_one() {
        num.to_string()
    } else if num.is_one() {
        tex_monomial(m)
    } else {
        format!("{num} {}", tex_monomial(m))
    };
    if den.is_one() {
        top
    } else {
        format!("\\frac{{{top}}}{{{den}}}")
    }
}

/// Renders a parameter polynomial in LaTeX math mode.
pub fn poly_tex(p: &Poly<Rational>) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&tex_term(&c.abs(), m));
    }
    s
}

fn base_tex(base: &Poly<Rational>) -> String {
    match base.as_constant() {
        Some(c) if !c.is_negative() && c.denom().is_one() => format!("{c}^{{{COUNTER}}}"),
        _ => format!("\\left({}\\right)^{{{COUNTER}}}", poly_tex(base)),
    }
}

/// Renders a closed form in LaTeX math mode, e.g. `\frac{b^{2} n}{3}`.
pub fn closed_form_tex(f: &ExpPoly<Rational>) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (base, part) in by_base(f) {
        if base.is_one() {
            parts.push(poly_tex(&part));
        } else if part.len() == 1 {
            let (m, c) = part.terms().next().expect("one term");
            let sign = if c.is_negative() { "-" } else { "" };
            if m.is_one() && c.abs().is_one() {
                parts.push(format!("{sign}{}", base_tex(&base)));
            } else {
                parts.push(format!(
                    "{sign}{} \\cdot {}",
                    tex_term(&c.abs(), m),
                    base_tex(&base)
                ));
            }
        } else {
            parts.push(format!(
                "\\left({}\\right) {}",
                poly_tex(&part),
                base_tex(&base)
            ));
        }
    }
    let mut s = String::new();
    for (i, p) in parts.into_iter().enumerate() {
        if i == 0 {
            s.push_str(&p);
        } else if let Some(rest) = p.strip_prefix('-') {
            s.push_str(" - ");
            s.push_str(rest);
        } else {
            s.push_str(" + ");
            s.push_str(&p);
        }
    }
    s
}

/// LaTeX label for an expected monomial, `E[y^{1} x^{1}]` style.
pub fn evar_tex(m: &Monomial) -> String {
    let inner = m
        .factors()
        .iter()
        .map(|(s, e)| format!("{s}^{{{e}}}"))
        .collect::<Vec<_>>()
        .join(" ");
    format!("E[{inner}]")
}

/// Rational coefficient rendering used by the JSON schema.
pub fn rational_text(r: &Rational) -> String {
    if r.is_zero() {
        "0".into()
    } else {
        format_rational(r)
    }
}
