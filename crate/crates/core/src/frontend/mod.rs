//! Input language: parsing, Prob-solvability checks and pretty-printing.

mod parser;
mod program;
mod validate;

use std::fmt;

use num_traits::{One, Signed};

pub use parser::parse_program;
pub use program::{
    Branch, BranchUpdate, DistKind, Distribution, InitAssignment, InitValue, Program, RvAssignment,
    Section, SourceMap, Span, UpdateAssignment,
};
pub use validate::{validate_prob_solvable, InitMoment, ValidatedProgram, LOOP_COUNTER};

use crate::error::Error;
use crate::symbolic::Poly;
use crate::Rational;

/// Parses and validates in one step.
pub fn load_program(source: &str) -> Result<ValidatedProgram, Error> {
    let p = parse_program(source)?;
    Ok(validate_prob_solvable(p)?)
}

/// Writes a polynomial using only the input grammar's operators.
fn source_expr(p: &Poly<Rational>) -> String {
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
        let mag = c.abs();
        let mut factors: Vec<String> = Vec::new();
        if !mag.is_one() || m.is_one() {
            factors.push(crate::symbolic::scalar::format_rational(&mag));
        }
        for (sym, e) in m.factors() {
            for _ in 0..*e {
                factors.push(sym.to_string());
            }
        }
        s.push_str(&factors.join("*"));
    }
    s
}

fn source_dist(d: &Distribution<Rational>) -> String {
    format!(
        "RV({}, {}, {})",
        d.kind.keyword(),
        source_expr(&d.arg1),
        source_expr(&d.arg2)
    )
}

impl fmt::Display for Program<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.init_assignments {
            let rhs = match &a.value {
                InitValue::Expr(e) => source_expr(e),
                InitValue::Dist(d) => source_dist(d),
            };
            writeln!(f, "{} = {rhs}", a.var)?;
        }
        writeln!(f, "while true:")?;
        for a in &self.rv_assignments {
            writeln!(f, "    {} = {}", a.var, source_dist(&a.dist))?;
        }
        for a in &self.update_assignments {
            let rhs = match a.update.branches.as_slice() {
                [only] if only.prob.is_one() => source_expr(&only.expr),
                branches => branches
                    .iter()
                    .map(|b| format!("{} @ {}", source_expr(&b.expr), source_expr(&b.prob)))
                    .collect::<Vec<_>>()
                    .join("; "),
            };
            writeln!(f, "    {} = {rhs}", a.var)?;
        }
        Ok(())
    }
}
