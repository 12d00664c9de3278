//! Reader for closed forms written in the plain-text rendering.
//!
//! Accepts `+ - * /`, parentheses, integer powers `e^k`, exponentials
//! `(base)^n` where `base` is free of `n`, rational literals, parameter
//! names and symbolic initial values such as `y(0)`.

use thiserror::Error;

use super::exppoly::ExpPoly;
use super::monomial::Symbol;
use super::poly::Poly;
use super::render::COUNTER;
use super::scalar::parse_rational;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("closed form parse error at byte {pos}: {msg}")]
pub struct ClosedFormError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ClosedFormError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let value = parse_rational(&src[start..i]).ok_or_else(|| ClosedFormError {
                pos: start,
                msg: format!("bad number `{}`", &src[start..i]),
            })?;
            out.push((start, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let mut name = src[start..i].to_string();
            if src[i..].starts_with("(0)") {
                name.push_str("(0)");
                i += 3;
            }
            out.push((start, Tok::Ident(name)));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ClosedFormError {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ClosedFormError> {
        Err(ClosedFormError {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ExpPoly<Rational>, ClosedFormError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ExpPoly<Rational>, ClosedFormError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let at = self.here();
                let d = self.unary()?;
                let k = d
                    .as_constant()
                    .and_then(|p| p.as_constant())
                    .filter(|k| *k != Rational::from_integer(0.into()));
                match k {
                    Some(k) => acc = acc.scale(&Poly::constant(k.recip())),
                    None => {
                        return Err(ClosedFormError {
                            pos: at,
                            msg: "division only by nonzero rational constants".into(),
                        })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<ExpPoly<Rational>, ClosedFormError> {
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(-&inner);
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExpPoly<Rational>, ClosedFormError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        match self.peek().cloned() {
            Some(Tok::Ident(name)) if name == COUNTER => {
                self.pos += 1;
                match base.as_constant() {
                    Some(b) => Ok(ExpPoly::geometric(b)),
                    None => self.err("exponential base depends on n"),
                }
            }
            Some(Tok::Num(k)) if k.is_integer() => {
                self.pos += 1;
                let k: u32 = k
                    .to_integer()
                    .try_into()
                    .or_else(|_| self.err("exponent out of range"))?;
                let mut acc = ExpPoly::constant(Poly::one());
                for _ in 0..k {
                    acc = &acc * &base;
                }
                Ok(acc)
            }
            _ => self.err("expected integer exponent or n"),
        }
    }

    fn atom(&mut self) -> Result<ExpPoly<Rational>, ClosedFormError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(ExpPoly::constant(Poly::constant(v)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == COUNTER {
                    Ok(ExpPoly::n_power(1))
                } else {
                    Ok(ExpPoly::constant(Poly::var(Symbol::new(&name))))
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            _ => self.err("expected number, symbol or `(`"),
        }
    }
}

/// Parses a closed form in `n`, e.g. `n*(2*b^2*n^2 + b^2 + 18)/18 + y(0)^2`.
pub fn parse_closed_form(src: &str) -> Result<ExpPoly<Rational>, ClosedFormError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(out)
}

/// Parses an expression that must not depend on `n`.
pub fn parse_param_expr(src: &str) -> Result<Poly<Rational>, ClosedFormError> {
    let f = parse_closed_form(src)?;
    f.as_constant().ok_or(ClosedFormError {
        pos: 0,
        msg: "expression depends on n".into(),
    })
}
