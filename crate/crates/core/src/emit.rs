//! Report rendering as plain text, LaTeX and JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{parse_monomial, InvariantReport};
use crate::symbolic::render::{closed_form_tex, closed_form_text, evar_tex, poly_text};
use crate::symbolic::scalar::{format_rational, parse_rational};
use crate::symbolic::{EVar, ExpPoly, ExpTerm, Monomial, Poly, Symbol};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Txt,
    Tex,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "txt" => Ok(Format::Txt),
            "tex" => Ok(Format::Tex),
            "json" => Ok(Format::Json),
            other => Err(format!(
                "unknown format `{other}` (expected txt, tex or json)"
            )),
        }
    }
}

/// E-variables in output order: by label, so `E[g^1]` precedes `E[x^1]`.
fn sorted_evars<V>(m: &BTreeMap<EVar, V>) -> Vec<(&EVar, &V)> {
    let mut v: Vec<_> = m.iter().collect();
    v.sort_by_key(|(e, _)| e.label());
    v
}

fn list_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".to_string()
    } else {
        items.join(", ")
    }
}

pub fn emit(report: &InvariantReport, format: Format) -> String {
    match format {
        Format::Txt => emit_txt(report),
        Format::Tex => emit_tex(report),
        Format::Json => emit_json(report),
    }
}

pub fn emit_txt(r: &InvariantReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "program: {}", r.program);
    let _ = writeln!(s, "variables: {}", list_or_none(&r.variables));
    let _ = writeln!(s, "parameters: {}", list_or_none(&r.parameters));
    let _ = writeln!(s, "goals: {}", list_or_none(&r.goals));
    s.push_str("initial values:\n");
    for (v, init) in &r.initial_values {
        let _ = writeln!(s, "  {v}(0) = {init}");
    }
    let _ = writeln!(s, "side conditions: {}", list_or_none(&r.side_conditions));
    s.push_str("moment recurrences (E at n+1 in terms of E at n):\n");
    for (e, rhs) in sorted_evars(&r.recurrences) {
        let _ = writeln!(s, "  {e} = {}", poly_text(rhs));
    }
    s.push_str("invariants:\n");
    for (e, f) in sorted_evars(&r.invariants) {
        let _ = writeln!(s, "{} = {}", e.label(), closed_form_text(f));
    }
    let _ = writeln!(s, "time: {:.3} s", r.elapsed_seconds);
    if let Some(v) = &r.verification {
        let _ = writeln!(
            s,
            "verification: n = {}, trials = {}, seed = {}, z = {}",
            v.iterations, v.trials, v.seed, v.z
        );
        for row in &v.rows {
            let _ = writeln!(
                s,
                "  {} {}: exact = {}, mean = {}, se = {:.6}, margin = {:.6}",
                if row.pass { "PASS" } else { "FAIL" },
                row.evar,
                row.exact,
                row.mean,
                row.se,
                row.margin
            );
        }
    }
    s
}

fn tex_escape(s: &str) -> String {
    s.replace('_', "\\_")
}

pub fn emit_tex(r: &InvariantReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "% program: {}", r.program);
    let _ = writeln!(s, "% goals: {}", list_or_none(&r.goals));
    let _ = writeln!(s, "% side conditions: {}", list_or_none(&r.side_conditions));
    let _ = writeln!(s, "% time: {:.3} s", r.elapsed_seconds);
    for (e, f) in sorted_evars(&r.invariants) {
        let _ = writeln!(
            s,
            "\\[ {} = {} \\]",
            evar_tex(e.monomial()),
            closed_form_tex(f)
        );
    }
    if let Some(v) = &r.verification {
        let _ = writeln!(
            s,
            "% verification: n = {}, trials = {}, seed = {}, z = {}",
            v.iterations, v.trials, v.seed, v.z
        );
        for row in &v.rows {
            let _ = writeln!(
                s,
                "% {} {}: exact = {}, mean = {}, se = {:.6}",
                if row.pass { "PASS" } else { "FAIL" },
                tex_escape(&row.evar),
                row.exact,
                row.mean,
                row.se
            );
        }
    }
    s
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    /// Rational coefficient, e.g. `"-1/3"`.
    coeff: String,
    /// `[[symbol, exponent], ...]`; empty for a constant.
    monomial: Vec<(String, u32)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExpTermJson {
    base: Vec<TermJson>,
    degree: u32,
    coeff: Vec<TermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InvariantJson {
    evar: String,
    goal: bool,
    text: String,
    terms: Vec<ExpTermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecurrenceJson {
    evar: String,
    rhs: Vec<TermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InitJson {
    variable: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportJson {
    program: String,
    variables: Vec<String>,
    parameters: Vec<String>,
    goals: Vec<String>,
    initial_values: Vec<InitJson>,
    side_conditions: Vec<String>,
    recurrences: Vec<RecurrenceJson>,
    invariants: Vec<InvariantJson>,
    elapsed_seconds: f64,
    verification: Option<crate::verifier::VerifyReport>,
}

fn poly_json(p: &Poly<Rational>) -> Vec<TermJson> {
    p.terms()
        .rev()
        .map(|(m, c)| TermJson {
            coeff: format_rational(c),
            monomial: m
                .factors()
                .iter()
                .map(|(s, e)| (s.to_string(), *e))
                .collect(),
        })
        .collect()
}

fn poly_from_json(ts: &[TermJson]) -> Result<Poly<Rational>, String> {
    let mut out = Poly::zero();
    for t in ts {
        let c = parse_rational(&t.coeff).ok_or_else(|| format!("bad coefficient `{}`", t.coeff))?;
        let m = Monomial::from_factors(t.monomial.iter().map(|(s, e)| (Symbol::new(s), *e)));
        out = &out + &Poly::term(c, m);
    }
    Ok(out)
}

fn evar_from_text(s: &str) -> Result<EVar, String> {
    parse_monomial(s)
        .and_then(EVar::new)
        .ok_or_else(|| format!("bad E-variable `{s}`"))
}

pub fn emit_json(r: &InvariantReport) -> String {
    let dto = ReportJson {
        program: r.program.clone(),
        variables: r.variables.clone(),
        parameters: r.parameters.clone(),
        goals: r.goals.clone(),
        initial_values: r
            .initial_values
            .iter()
            .map(|(v, x)| InitJson {
                variable: v.clone(),
                value: x.clone(),
            })
            .collect(),
        side_conditions: r.side_conditions.clone(),
        recurrences: sorted_evars(&r.recurrences)
            .into_iter()
            .map(|(e, p)| RecurrenceJson {
                evar: e.explicit(),
                rhs: poly_json(p),
            })
            .collect(),
        invariants: sorted_evars(&r.invariants)
            .into_iter()
            .map(|(e, f)| InvariantJson {
                evar: e.explicit(),
                goal: r.goal_evars.contains(e),
                text: closed_form_text(f),
                terms: f
                    .terms()
                    .map(|t| ExpTermJson {
                        base: poly_json(&t.base),
                        degree: t.degree,
                        coeff: poly_json(&t.coeff),
                    })
                    .collect(),
            })
            .collect(),
        elapsed_seconds: r.elapsed_seconds,
        verification: r.verification.clone(),
    };
    let mut s = serde_json::to_string_pretty(&dto).expect("report serializes");
    s.push('\n');
    s
}

/// Reads a report written by [`emit_json`].
pub fn read_json(text: &str) -> Result<InvariantReport, String> {
    let dto: ReportJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut recurrences = BTreeMap::new();
    for r in &dto.recurrences {
        recurrences.insert(evar_from_text(&r.evar)?, poly_from_json(&r.rhs)?);
    }
    let mut invariants = BTreeMap::new();
    let mut goal_evars = BTreeSet::new();
    for inv in &dto.invariants {
        let e = evar_from_text(&inv.evar)?;
        let mut terms = Vec::new();
        for t in &inv.terms {
            terms.push(ExpTerm {
                base: poly_from_json(&t.base)?,
                degree: t.degree,
                coeff: poly_from_json(&t.coeff)?,
            });
        }
        if inv.goal {
            goal_evars.insert(e.clone());
        }
        invariants.insert(e, ExpPoly::from_terms(terms));
    }
    Ok(InvariantReport {
        program: dto.program,
        variables: dto.variables,
        parameters: dto.parameters,
        goals: dto.goals,
        initial_values: dto
            .initial_values
            .into_iter()
            .map(|i| (i.variable, i.value))
            .collect(),
        recurrences,
        invariants,
        goal_evars,
        side_conditions: dto.side_conditions,
        elapsed_seconds: dto.elapsed_seconds,
        verification: dto.verification,
    })
}
