//! Goals and the end-to-end pipeline from program text to closed forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Instant;

use crate::error::{Error, GoalError};
use crate::frontend::{InitMoment, ValidatedProgram};
use crate::moments::{
    evar_closure, initial_moment, MomentEquation, MomentTable, DEFAULT_CLOSURE_CAP,
};
use crate::recurrences::{solve_system, topo_order, SolvedSystem};
use crate::symbolic::render::poly_text;
use crate::symbolic::{EVar, ExpPoly, Monomial, Poly, Scalar, Symbol};
use crate::Rational;

/// One requested moment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Goal {
    /// The `k`-th raw moment of every loop variable.
    AllVarsMoment(u32),
    /// The expectation of one monomial.
    SpecificMoment(EVar),
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::AllVarsMoment(k) => write!(f, "{k}"),
            Goal::SpecificMoment(e) => write!(f, "{e}"),
        }
    }
}

/// A nonempty list of goals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalSpec(Vec<Goal>);

impl GoalSpec {
    pub fn new(goals: Vec<Goal>) -> Result<Self, GoalError> {
        if goals.is_empty() {
            Err(GoalError::Empty)
        } else {
            Ok(GoalSpec(goals))
        }
    }

    pub fn goals(&self) -> &[Goal] {
        &self.0
    }

    /// The E-variables a goal asks for.
    pub fn evars_of(goal: &Goal, variables: &[Symbol]) -> BTreeSet<EVar> {
        match goal {
            Goal::AllVarsMoment(k) => variables
                .iter()
                .filter_map(|v| EVar::power(v.clone(), *k))
                .collect(),
            Goal::SpecificMoment(e) => BTreeSet::from([e.clone()]),
        }
    }

    pub fn evars(&self, variables: &[Symbol]) -> BTreeSet<EVar> {
        self.0
            .iter()
            .flat_map(|g| Self::evars_of(g, variables))
            .collect()
    }
}

/// Parses `x^2*y` style monomials; an omitted exponent means 1.
pub fn parse_monomial(text: &str) -> Option<Monomial> {
    let mut factors = Vec::new();
    for part in text.split('*') {
        let part = part.trim();
        let (name, exp) = match part.split_once('^') {
            Some((n, e)) => (n.trim(), e.trim().parse::<u32>().ok()?),
            None => (part, 1),
        };
        let mut chars = name.chars();
        let first = chars.next()?;
        if !first.is_ascii_alphabetic() || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return None;
        }
        if exp == 0 {
            return None;
        }
        factors.push((Symbol::new(name), exp));
    }
    Some(Monomial::from_factors(factors))
}

/// Reads goal tokens: integers are moment orders, anything else a monomial.
/// A token may hold several comma-separated goals.
pub fn parse_goals<S: AsRef<str>, C: Scalar>(
    raw: &[S],
    program: &ValidatedProgram<C>,
) -> Result<GoalSpec, GoalError> {
    let mut goals = Vec::new();
    for token in raw {
        for piece in token.as_ref().split(',') {
            let piece = piece
                .trim()
                .trim_matches(|c| c == '[' || c == ']' || c == '"');
            if piece.is_empty() {
                continue;
            }
            if let Ok(k) = piece.parse::<i64>() {
                if k < 1 {
                    return Err(GoalError::NonPositive(k));
                }
                let k = u32::try_from(k).map_err(|_| GoalError::Malformed(piece.to_string()))?;
                goals.push(Goal::AllVarsMoment(k));
                continue;
            }
            let m = parse_monomial(piece).ok_or_else(|| GoalError::Malformed(piece.to_string()))?;
            if let Some(v) = m.symbols().find(|s| !program.is_variable(s)) {
                return Err(GoalError::UnknownVariable {
                    goal: piece.to_string(),
                    var: v.to_string(),
                });
            }
            let e = EVar::new(m).ok_or_else(|| GoalError::Malformed(piece.to_string()))?;
            goals.push(Goal::SpecificMoment(e));
        }
    }
    GoalSpec::new(goals)
}

/// Equations and solutions for a goal set over any coefficient field.
#[derive(Debug, Clone)]
pub struct Analysis<C: Scalar> {
    pub goal_evars: BTreeSet<EVar>,
    pub equations: BTreeMap<EVar, MomentEquation<C>>,
    pub init_moments: BTreeMap<EVar, Poly<C>>,
    pub system: SolvedSystem<C>,
}

impl<C: Scalar> Analysis<C> {
    pub fn closed_forms(&self) -> &BTreeMap<EVar, ExpPoly<C>> {
        &self.system.closed_forms
    }
}

/// Closure, ordering and solving for the requested E-variables.
pub fn analyze_evars<C: Scalar>(
    p: &ValidatedProgram<C>,
    goal_evars: &BTreeSet<EVar>,
    closure_cap: usize,
) -> Result<Analysis<C>, Error> {
    let mut table = MomentTable::new();
    let closure = evar_closure(goal_evars, p, &mut table, closure_cap)?;
    let equations: BTreeMap<EVar, MomentEquation<C>> = closure.into_iter().collect();
    let order = topo_order(equations.values())?;
    let init_moments = equations
        .keys()
        .map(|e| (e.clone(), initial_moment(e, p)))
        .collect();
    let system = solve_system(&order, &equations, &init_moments)?;
    Ok(Analysis {
        goal_evars: goal_evars.clone(),
        equations,
        init_moments,
        system,
    })
}

/// Options for [`analyze`].
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub closure_cap: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            closure_cap: DEFAULT_CLOSURE_CAP,
        }
    }
}

/// Everything the emitters print.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub program: String,
    pub variables: Vec<String>,
    pub parameters: Vec<String>,
    pub goals: Vec<String>,
    /// `variable -> initial description`; symbolic initials read `v(0)`.
    pub initial_values: Vec<(String, String)>,
    /// Right-hand side of each moment equation, E-variables written as monomials.
    pub recurrences: BTreeMap<EVar, Poly<Rational>>,
    pub invariants: BTreeMap<EVar, ExpPoly<Rational>>,
    pub goal_evars: BTreeSet<EVar>,
    pub side_conditions: Vec<String>,
    pub elapsed_seconds: f64,
    pub verification: Option<crate::verifier::VerifyReport>,
}

fn describe_init(init: &InitMoment<Rational>) -> String {
    match init {
        InitMoment::Value(p) => poly_text(p),
        InitMoment::Dist(d) => format!(
            "RV({}, {}, {})",
            d.kind.keyword(),
            poly_text(&d.arg1),
            poly_text(&d.arg2)
        ),
        InitMoment::Unspecified(s) => s.to_string(),
    }
}

/// Runs the exact pipeline on a validated program.
pub fn analyze(
    name: &str,
    p: &ValidatedProgram,
    goals: &GoalSpec,
    opts: &AnalysisOptions,
) -> Result<InvariantReport, Error> {
    let start = Instant::now();
    let goal_evars = goals.evars(p.variables());
    let a = analyze_evars(p, &goal_evars, opts.closure_cap)?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(InvariantReport {
        program: name.to_string(),
        variables: p.variables().iter().map(|s| s.to_string()).collect(),
        parameters: p.parameters().iter().map(|s| s.to_string()).collect(),
        goals: goals.goals().iter().map(|g| g.to_string()).collect(),
        initial_values: p
            .variables()
            .iter()
            .map(|v| (v.to_string(), describe_init(&p.resolve_initial_value(v))))
            .collect(),
        recurrences: a
            .equations
            .iter()
            .map(|(e, eq)| (e.clone(), eq.rhs_poly()))
            .collect(),
        invariants: a.system.closed_forms,
        goal_evars,
        side_conditions: p.side_conditions().to_vec(),
        elapsed_seconds: (elapsed * 1000.0).round() / 1000.0,
        verification: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load_program;

    const RUNNING: &str = "x = 0\nwhile true:\n  u = RV(uniform, 0, b)\n  g = RV(gauss, 0, 1)\n  x = x - u @ 1/2; x + u @ 1/2\n  y = y + x + g\n";

    #[test]
    fn goal_parsing() {
        let p = load_program(RUNNING).unwrap();
        let g = parse_goals(&["1", "2"], &p).unwrap();
        assert_eq!(g.goals(), &[Goal::AllVarsMoment(1), Goal::AllVarsMoment(2)]);
        assert_eq!(g.evars(p.variables()).len(), 8);
        let g = parse_goals(&["x^2"], &p).unwrap();
        assert_eq!(
            g.goals(),
            &[Goal::SpecificMoment(
                EVar::power(Symbol::new("x"), 2).unwrap()
            )]
        );
        let g = parse_goals(&["[1, \"x^2\", x^3]"], &p).unwrap();
        assert_eq!(g.goals().len(), 3);
        assert_eq!(
            parse_goals(&["0"], &p).unwrap_err(),
            GoalError::NonPositive(0)
        );
        assert_eq!(
            parse_goals::<&str, _>(&[], &p).unwrap_err(),
            GoalError::Empty
        );
        assert!(matches!(
            parse_goals(&["z^2"], &p).unwrap_err(),
            GoalError::UnknownVariable { .. }
        ));
        assert!(matches!(
            parse_goals(&["x^0"], &p).unwrap_err(),
            GoalError::Malformed(_)
        ));
    }

    #[test]
    fn every_goal_is_covered() {
        let p = load_program(RUNNING).unwrap();
        let g = parse_goals(&["1", "x*y^2"], &p).unwrap();
        let r = analyze("running", &p, &g, &AnalysisOptions::default()).unwrap();
        for goal in g.goals() {
            for e in GoalSpec::evars_of(goal, p.variables()) {
                assert!(r.invariants.contains_key(&e), "{e:?}");
            }
        }
    }
}
