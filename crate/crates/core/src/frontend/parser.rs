//! Line-oriented recursive-descent parser for loop programs.
//!
//! ```text
//! x = 0
//! while true:
//!   u = RV(uniform, 0, b)
//!   g = RV(gauss, 0, 1)
//!   x = x - u @ 1/2; x + u @ 1/2
//!   y = y + x + g
//! ```
//!
//! Expressions are sums and products of names and numeric literals. Numeric
//! literals are integers, decimals or fractions (`3`, `0.25`, `1/3`) and are
//! kept as exact rationals. Parentheses and integer powers (`^k`, `**k`)
//! are accepted in addition to the bare operator forms.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::program::{
    Branch, BranchUpdate, DistKind, Distribution, InitAssignment, InitValue, Program, RvAssignment,
    Section, SourceMap, Span, UpdateAssignment,
};
use crate::error::ParseError;
use crate::symbolic::scalar::parse_rational;
use crate::symbolic::{Poly, Symbol};
use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Sym(&'static str),
}

fn lex_line(text: &str, line: usize) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, msg: String| {
        ParseError::new(
            Span {
                line,
                column: col + 1,
            },
            msg,
        )
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // A fraction literal: `/` followed by a digit other than zero.
            if i + 1 < bytes.len() && bytes[i] == b'/' && (b'1'..=b'9').contains(&bytes[i + 1]) {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit = &text[start..i];
            let value = parse_rational(lit)
                .ok_or_else(|| err(start, format!("malformed number `{lit}`")))?;
            out.push((start, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else {
            let sym = match c {
                b'*' if bytes.get(i + 1) == Some(&b'*') => "**",
                b'+' => "+",
                b'-' => "-",
                b'*' => "*",
                b'^' => "^",
                b'(' => "(",
                b')' => ")",
                b',' => ",",
                b'@' => "@",
                b';' => ";",
                b'=' => "=",
                _ => return Err(err(i, format!("unexpected character `{}`", c as char))),
            };
            out.push((i, Tok::Sym(sym)));
            i += sym.len();
        }
    }
    Ok(out)
}

struct LineParser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    line: usize,
    width: usize,
}

impl LineParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn span(&self) -> Span {
        let col = self
            .toks
            .get(self.pos)
            .map(|(c, _)| *c)
            .unwrap_or(self.width);
        Span {
            line: self.line,
            column: col + 1,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.span(), msg))
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.err(format!("expected `{sym}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(name)
            }
            _ => self.err("expected a name"),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expr(&mut self) -> Result<Poly<Rational>, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                acc = &acc + &self.term()?;
            } else if self.eat("-") {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly<Rational>, ParseError> {
        let mut acc = self.unary()?;
        while self.eat("*") {
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly<Rational>, ParseError> {
        if self.eat("-") {
            return Ok(-self.unary()?);
        }
        let base = self.atom()?;
        if self.eat("^") || self.eat("**") {
            match self.peek().cloned() {
                Some(Tok::Num(k)) if k.is_integer() && k >= Rational::zero() => {
                    self.pos += 1;
                    let k: u32 = match k.to_integer().try_into() {
                        Ok(k) => k,
                        Err(_) => return self.err("exponent too large"),
                    };
                    return Ok(base.pow(k));
                }
                _ => return self.err("expected a nonnegative integer exponent"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly<Rational>, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Poly::constant(v))
            }
            Some(Tok::Ident(name)) => {
                if name == "RV" {
                    return self.err("random draw `RV(...)` is not allowed inside an expression");
                }
                self.pos += 1;
                Ok(Poly::var(Symbol::new(&name)))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => self.err("expected a number, a name or `(`"),
        }
    }

    fn is_rv(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(n)) if n == "RV")
            && matches!(self.toks.get(self.pos + 1), Some((_, Tok::Sym("("))))
    }

    fn distribution(&mut self) -> Result<Distribution<Rational>, ParseError> {
        self.ident()?;
        self.expect("(")?;
        let kind_span = self.span();
        let kind = match self.ident()?.as_str() {
            "uniform" => DistKind::Uniform,
            "gauss" => DistKind::Gauss,
            other => {
                return Err(ParseError::new(
                    kind_span,
                    format!("unknown distribution `{other}` (expected uniform or gauss)"),
                ))
            }
        };
        self.expect(",")?;
        let arg1 = self.expr()?;
        self.expect(",")?;
        let arg2 = self.expr()?;
        self.expect(")")?;
        Ok(Distribution { kind, arg1, arg2 })
    }

    fn branches(&mut self) -> Result<BranchUpdate<Rational>, ParseError> {
        let mut parsed: Vec<(Poly<Rational>, Option<Poly<Rational>>, Span)> = Vec::new();
        loop {
            let span = self.span();
            let expr = self.expr()?;
            let prob = if self.eat("@") {
                Some(self.expr()?)
            } else {
                None
            };
            parsed.push((expr, prob, span));
            if !self.eat(";") {
                break;
            }
        }
        if parsed.len() == 1 {
            let (expr, prob, _) = parsed.pop().expect("one branch");
            return Ok(BranchUpdate {
                branches: vec![Branch {
                    expr,
                    prob: prob.unwrap_or_else(Poly::one),
                }],
            });
        }
        let mut branches = Vec::with_capacity(parsed.len());
        for (expr, prob, span) in parsed {
            match prob {
                Some(prob) => branches.push(Branch { expr, prob }),
                None => {
                    return Err(ParseError::new(
                        span,
                        "branch of a multi-branch update is missing its `@ probability`",
                    ))
                }
            }
        }
        Ok(BranchUpdate { branches })
    }
}

enum Rhs {
    Dist(Distribution<Rational>),
    Branches(BranchUpdate<Rational>),
}

struct Statement {
    var: Symbol,
    rhs: Rhs,
    span: Span,
}

fn parse_statement(text: &str, line: usize) -> Result<Statement, ParseError> {
    let toks = lex_line(text, line)?;
    let mut p = LineParser {
        toks,
        pos: 0,
        line,
        width: text.len(),
    };
    let span = p.span();
    let var = p.ident()?;
    if var == "RV" {
        return Err(ParseError::new(span, "`RV` is reserved"));
    }
    p.expect("=")?;
    let rhs = if p.is_rv() {
        Rhs::Dist(p.distribution()?)
    } else {
        Rhs::Branches(p.branches()?)
    };
    if !p.at_end() {
        return p.err("unexpected trailing input");
    }
    Ok(Statement {
        var: Symbol::new(&var),
        rhs,
        span,
    })
}

fn is_loop_header(line: &str) -> bool {
    let compact: String = line.chars().filter(|c| !c.is_whitespace()).collect();
    compact == "whiletrue:"
}

/// Parses program text into a [`Program`] without checking the
/// structural restrictions; see [`super::validate_prob_solvable`].
pub fn parse_program(source: &str) -> Result<Program<Rational>, ParseError> {
    let mut init_assignments = Vec::new();
    let mut rv_assignments = Vec::new();
    let mut update_assignments = Vec::new();
    let mut source_map = SourceMap::default();
    let mut in_body = false;
    let mut last_line = 0;

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if is_loop_header(trimmed) {
            if in_body {
                return Err(ParseError::new(
                    Span { line, column: 1 },
                    "nested or repeated loop header",
                ));
            }
            in_body = true;
            continue;
        }
        if trimmed.starts_with("while") {
            let column = raw.len() - raw.trim_start().len() + 1;
            return Err(ParseError::new(
                Span { line, column },
                "only the loop header `while true:` is supported",
            ));
        }
        let stmt = parse_statement(raw, line)?;
        match (in_body, stmt.rhs) {
            (false, Rhs::Dist(dist)) => {
                source_map.insert(Section::Init, init_assignments.len(), stmt.span);
                init_assignments.push(InitAssignment {
                    var: stmt.var,
                    value: InitValue::Dist(dist),
                });
            }
            (false, Rhs::Branches(mut upd)) => {
                if upd.branches.len() != 1 || !upd.branches[0].prob.is_one() {
                    return Err(ParseError::new(
                        stmt.span,
                        "initial assignments cannot be probabilistic",
                    ));
                }
                source_map.insert(Section::Init, init_assignments.len(), stmt.span);
                init_assignments.push(InitAssignment {
                    var: stmt.var,
                    value: InitValue::Expr(upd.branches.remove(0).expr),
                });
            }
            (true, Rhs::Dist(dist)) => {
                if !update_assignments.is_empty() {
                    return Err(ParseError::new(
                        stmt.span,
                        "random draws must precede all update assignments in the loop body",
                    ));
                }
                source_map.insert(Section::Rv, rv_assignments.len(), stmt.span);
                rv_assignments.push(RvAssignment {
                    var: stmt.var,
                    dist,
                });
            }
            (true, Rhs::Branches(update)) => {
                source_map.insert(Section::Update, update_assignments.len(), stmt.span);
                update_assignments.push(UpdateAssignment {
                    var: stmt.var,
                    update,
                });
            }
        }
    }

    let end = Span {
        line: last_line.max(1),
        column: 1,
    };
    if !in_body {
        return Err(ParseError::new(end, "missing loop header `while true:`"));
    }
    if update_assignments.is_empty() {
        return Err(ParseError::new(
            end,
            "loop body needs at least one update assignment",
        ));
    }

    let mut program = Program {
        parameters: BTreeSet::new(),
        init_assignments,
        rv_assignments,
        update_assignments,
        source_map,
    };
    program.parameters = classify_parameters(&program);
    Ok(program)
}

/// Symbols that occur but are never assigned.
fn classify_parameters(p: &Program<Rational>) -> BTreeSet<Symbol> {
    let assigned: BTreeSet<Symbol> = p.variables().into_iter().collect();
    let mut seen = BTreeSet::new();
    let mut visit = |e: &Poly<Rational>| seen.extend(e.symbols());
    for a in &p.init_assignments {
        match &a.value {
            InitValue::Expr(e) => visit(e),
            InitValue::Dist(d) => {
                visit(&d.arg1);
                visit(&d.arg2);
            }
        }
    }
    for a in &p.rv_assignments {
        visit(&a.dist.arg1);
        visit(&a.dist.arg2);
    }
    for a in &p.update_assignments {
        for b in &a.update.branches {
            visit(&b.expr);
            visit(&b.prob);
        }
    }
    seen.difference(&assigned).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const RUNNING: &str = "x = 0\nwhile true:\n  u = RV(uniform, 0, b)\n  g = RV(gauss, 0, 1)\n  x = x - u @ 1/2; x + u @ 1/2\n  y = y + x + g\n";

    fn v(s: &str) -> Poly<Rational> {
        Poly::var(Symbol::new(s))
    }

    fn q(n: i64, d: i64) -> Poly<Rational> {
        Poly::constant(Rational::new(n.into(), d.into()))
    }

    #[test]
    fn parses_running_example() {
        let p = parse_program(RUNNING).unwrap();
        assert_eq!(p.parameters, BTreeSet::from([Symbol::new("b")]));
        assert_eq!(p.init_assignments.len(), 1);
        assert_eq!(p.init_assignments[0].value, InitValue::Expr(Poly::zero()));
        assert_eq!(
            p.rv_assignments[0].dist,
            Distribution::uniform(Poly::zero(), v("b"))
        );
        assert_eq!(
            p.rv_assignments[1].dist,
            Distribution::gauss(Poly::zero(), Poly::one())
        );
        let x = &p.update_assignments[0];
        assert_eq!(x.var, Symbol::new("x"));
        assert_eq!(x.update.branches[0].expr, &v("x") - &v("u"));
        assert_eq!(x.update.branches[0].prob, q(1, 2));
        assert_eq!(x.update.branches[1].expr, &v("x") + &v("u"));
        let y = &p.update_assignments[1];
        assert_eq!(
            y.update,
            BranchUpdate::deterministic(&(&v("y") + &v("x")) + &v("g"))
        );
        assert_eq!(
            p.source_map.get(Section::Update, 1),
            Span { line: 6, column: 3 }
        );
    }

    #[test]
    fn identity_update() {
        let p = parse_program("x=0\nwhile true:\nu = RV(uniform, 0, 1)\nx = x").unwrap();
        assert_eq!(p.rv_assignments.len(), 1);
        assert_eq!(
            p.update_assignments[0].update,
            BranchUpdate::deterministic(v("x"))
        );
    }

    #[test]
    fn decimals_become_rationals() {
        let p = parse_program("while true:\nx = 0.5*x + 1.25 @ 0.5; x @ 1/2").unwrap();
        assert_eq!(
            p.update_assignments[0].update.branches[0].expr,
            &(&q(1, 2) * &v("x")) + &q(5, 4)
        );
    }

    #[test]
    fn comments_and_powers() {
        let p = parse_program("# header\nwhile true:\n# body\nx = (x + 1)^2 - x**2 - x*x").unwrap();
        assert_eq!(
            p.update_assignments[0].update.branches[0].expr,
            &(&(&q(2, 1) * &v("x")) + &q(1, 1)) - &v("x").pow(2)
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_program("x = 0\nwhile true:\nx = x + @ 1").unwrap_err();
        assert_eq!(e.span, Span { line: 3, column: 9 });
        let e = parse_program("x = 0\nx = x + 1").unwrap_err();
        assert!(e.message.contains("while true"));
        let e = parse_program("while true:\nx = x + 1 @ 1/2; x").unwrap_err();
        assert!(e.message.contains("missing its `@ probability`"), "{e}");
        let e = parse_program("while true:\nu = RV(uniform, 0, 1)").unwrap_err();
        assert!(e.message.contains("at least one update"));
        let e = parse_program("while x < 3:\nx = x").unwrap_err();
        assert!(e.message.contains("while true"));
        let e = parse_program("while true:\nx = x\nu = RV(gauss, 0, 1)").unwrap_err();
        assert!(e.message.contains("precede"));
        let e = parse_program("while true:\nu = RV(poisson, 1, 1)\nx = x").unwrap_err();
        assert!(e.message.contains("poisson"));
    }
}
