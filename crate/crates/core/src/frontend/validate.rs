use std::collections::{BTreeMap, BTreeSet};

use super::program::{Distribution, InitValue, Program, Section, Span};
use crate::error::{NotProbSolvable, Restriction};
use crate::symbolic::scalar::is_negative;
use crate::symbolic::{Poly, Scalar, Symbol};
use crate::Rational;

/// Name reserved for the loop counter in closed forms.
pub const LOOP_COUNTER: &str = "n";

/// A program that satisfies the Prob-solvable restrictions, together with
/// the variable classification derived while checking them.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProgram<C: Scalar = Rational> {
    program: Program<C>,
    variables: Vec<Symbol>,
    rv_dists: BTreeMap<Symbol, Distribution<C>>,
    update_index: BTreeMap<Symbol, usize>,
    side_conditions: Vec<String>,
}

/// What is known about a variable before the first iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitMoment<C: Scalar> {
    Value(Poly<C>),
    Dist(Distribution<C>),
    /// No initial assignment: the value is the free parameter `v(0)`.
    Unspecified(Symbol),
}

impl<C: Scalar> InitMoment<C> {
    /// `E[v(0)^k]`.
    pub fn moment(&self, k: u32) -> Poly<C> {
        match self {
            InitMoment::Value(p) => p.pow(k),
            InitMoment::Dist(d) => crate::moments::rv_raw_moment(d, k),
            InitMoment::Unspecified(s) => Poly::var(s.clone()).pow(k),
        }
    }
}

fn fail(restriction: Restriction, span: Span, message: impl Into<String>) -> NotProbSolvable {
    NotProbSolvable {
        restriction,
        span,
        message: message.into(),
    }
}

/// Checks the structural restrictions that make moment recurrences solvable.
/// Span of the first statement that assigns or mentions `s`.
fn first_mention<C: Scalar>(p: &Program<C>, s: &Symbol) -> Span {
    let map = &p.source_map;
    let dist = |d: &Distribution<C>| d.arg1.mentions(s) || d.arg2.mentions(s);
    for (i, a) in p.init_assignments.iter().enumerate() {
        let hit = match &a.value {
            InitValue::Expr(e) => e.mentions(s),
            InitValue::Dist(d) => dist(d),
        };
        if &a.var == s || hit {
            return map.get(Section::Init, i);
        }
    }
    for (i, a) in p.rv_assignments.iter().enumerate() {
        if &a.var == s || dist(&a.dist) {
            return map.get(Section::Rv, i);
        }
    }
    for (i, a) in p.update_assignments.iter().enumerate() {
        let hit = a
            .update
            .branches
            .iter()
            .any(|b| b.expr.mentions(s) || b.prob.mentions(s));
        if &a.var == s || hit {
            return map.get(Section::Update, i);
        }
    }
    Span::default()
}

pub fn validate_prob_solvable<C: Scalar>(
    p: Program<C>,
) -> Result<ValidatedProgram<C>, NotProbSolvable> {
    let map = &p.source_map;
    let variables = p.variables();
    let var_set: BTreeSet<Symbol> = variables.iter().cloned().collect();
    let counter = Symbol::new(LOOP_COUNTER);

    // Distinct names.
    let mut seen_init = BTreeSet::new();
    for (i, a) in p.init_assignments.iter().enumerate() {
        if !seen_init.insert(a.var.clone()) {
            return Err(fail(
                Restriction::DistinctVariables,
                map.get(Section::Init, i),
                format!("variable `{}` is initialized twice", a.var),
            ));
        }
    }
    let mut seen_body: BTreeMap<Symbol, Span> = BTreeMap::new();
    let body = p
        .rv_assignments
        .iter()
        .enumerate()
        .map(|(i, a)| (&a.var, map.get(Section::Rv, i)))
        .chain(
            p.update_assignments
                .iter()
                .enumerate()
                .map(|(i, a)| (&a.var, map.get(Section::Update, i))),
        );
    for (var, span) in body {
        if let Some(first) = seen_body.insert(var.clone(), span) {
            return Err(fail(
                Restriction::DistinctVariables,
                span,
                format!("variable `{var}` is assigned more than once in the loop body (first at {first})"),
            ));
        }
    }
    if var_set.contains(&counter) || p.parameters.contains(&counter) {
        return Err(fail(
            Restriction::DistinctVariables,
            first_mention(&p, &counter),
            format!("`{LOOP_COUNTER}` is reserved for the loop counter"),
        ));
    }
    if let Some(clash) = p.parameters.intersection(&var_set).next() {
        return Err(fail(
            Restriction::DistinctVariables,
            Span::default(),
            format!("`{clash}` is used both as a parameter and as a variable"),
        ));
    }

    let variable_in = |e: &Poly<C>| e.symbols().into_iter().find(|s| var_set.contains(s));

    // Initial values and distribution arguments.
    for (i, a) in p.init_assignments.iter().enumerate() {
        let exprs: Vec<&Poly<C>> = match &a.value {
            InitValue::Expr(e) => vec![e],
            InitValue::Dist(d) => vec![&d.arg1, &d.arg2],
        };
        for e in exprs {
            if let Some(s) = variable_in(e) {
                return Err(fail(
                    Restriction::DistinctVariables,
                    map.get(Section::Init, i),
                    format!(
                        "initial value of `{}` uses loop variable `{s}` as a parameter",
                        a.var
                    ),
                ));
            }
        }
    }
    for (i, a) in p.rv_assignments.iter().enumerate() {
        for e in [&a.dist.arg1, &a.dist.arg2] {
            if let Some(s) = variable_in(e) {
                return Err(fail(
                    Restriction::ConstantArguments,
                    map.get(Section::Rv, i),
                    format!("distribution of `{}` refers to variable `{s}`", a.var),
                ));
            }
        }
    }

    // Updates.
    let updated: BTreeSet<Symbol> = p.update_assignments.iter().map(|a| a.var.clone()).collect();
    let mut available: BTreeSet<Symbol> = var_set.difference(&updated).cloned().collect();
    let mut side_conditions = Vec::new();
    for (i, a) in p.update_assignments.iter().enumerate() {
        let span = map.get(Section::Update, i);
        let v = &a.var;
        for b in &a.update.branches {
            if let Some(s) = variable_in(&b.prob) {
                return Err(fail(
                    Restriction::ProbabilitySum,
                    span,
                    format!(
                        "probability `{}` in the update of `{v}` depends on variable `{s}`",
                        b.prob
                    ),
                ));
            }
            match b.prob.as_constant() {
                Some(c) if is_negative(&c) => {
                    return Err(fail(
                        Restriction::ProbabilitySum,
                        span,
                        format!("negative probability `{c}` in the update of `{v}`"),
                    ))
                }
                Some(_) => {}
                None => {
                    let cond = format!("0 <= {} <= 1", b.prob);
                    if !side_conditions.contains(&cond) {
                        side_conditions.push(cond);
                    }
                }
            }
            let by_vars = b.expr.collect_by(|s| var_set.contains(s));
            for mono in by_vars.keys() {
                let self_exp = mono.exponent(v);
                if self_exp == 1 && mono.degree() > 1 {
                    if let Some(s) = mono.symbols().find(|s| *s != v && !available.contains(*s)) {
                        return Err(fail(
                            Restriction::OrderedDependence,
                            span,
                            format!("update of `{v}` depends on `{s}`, which is assigned later in the loop body"),
                        ));
                    }
                }
                if self_exp > 1 || (self_exp == 1 && mono.degree() > 1) {
                    return Err(fail(
                        Restriction::LinearSelfDependence,
                        span,
                        format!(
                            "update of `{v}` depends non-linearly on `{v}` through the term `{mono}`"
                        ),
                    ));
                }
                if self_exp == 0 {
                    if let Some(s) = mono.symbols().find(|s| !available.contains(*s)) {
                        return Err(fail(
                            Restriction::OrderedDependence,
                            span,
                            format!("update of `{v}` depends on `{s}`, which is assigned later in the loop body"),
                        ));
                    }
                }
            }
        }
        let total = a.update.probability_sum();
        if !total.is_one() {
            return Err(fail(
                Restriction::ProbabilitySum,
                span,
                format!("probabilities in the update of `{v}` sum to {total}, not 1"),
            ));
        }
        available.insert(v.clone());
    }

    let rv_dists = p
        .rv_assignments
        .iter()
        .map(|a| (a.var.clone(), a.dist.clone()))
        .collect();
    let update_index = p
        .update_assignments
        .iter()
        .enumerate()
        .map(|(i, a)| (a.var.clone(), i))
        .collect();
    Ok(ValidatedProgram {
        program: p,
        variables,
        rv_dists,
        update_index,
        side_conditions,
    })
}

impl<C: Scalar> ValidatedProgram<C> {
    pub fn program(&self) -> &Program<C> {
        &self.program
    }

    /// Loop variables in first-assignment order.
    pub fn variables(&self) -> &[Symbol] {
        &self.variables
    }

    pub fn parameters(&self) -> &BTreeSet<Symbol> {
        &self.program.parameters
    }

    pub fn is_variable(&self, s: &Symbol) -> bool {
        self.variables.contains(s)
    }

    /// The distribution a body draw samples from, for random variables.
    pub fn rv_distribution(&self, s: &Symbol) -> Option<&Distribution<C>> {
        self.rv_dists.get(s)
    }

    pub fn is_updated(&self, s: &Symbol) -> bool {
        self.update_index.contains_key(s)
    }

    /// Obligations the checker cannot discharge symbolically.
    pub fn side_conditions(&self) -> &[String] {
        &self.side_conditions
    }

    /// Initial description of `v` at `n = 0`.
    ///
    /// A random variable without an initial assignment is taken to hold a
    /// draw from its own distribution, so its expectation is constant from
    /// `n = 0` on.
    pub fn resolve_initial_value(&self, v: &Symbol) -> InitMoment<C> {
        match self.program.init_of(v) {
            Some(InitValue::Expr(e)) => InitMoment::Value(e.clone()),
            Some(InitValue::Dist(d)) => InitMoment::Dist(d.clone()),
            None => match self.rv_dists.get(v) {
                Some(d) => InitMoment::Dist(d.clone()),
                None => InitMoment::Unspecified(Symbol::initial_of(v)),
            },
        }
    }

    pub fn map_scalar<D: Scalar, F: Fn(&C) -> D>(&self, f: F) -> ValidatedProgram<D> {
        ValidatedProgram {
            program: self.program.map_scalar(&f),
            variables: self.variables.clone(),
            rv_dists: self
                .rv_dists
                .iter()
                .map(|(k, d)| (k.clone(), d.map_scalar(&f)))
                .collect(),
            update_index: self.update_index.clone(),
            side_conditions: self.side_conditions.clone(),
        }
    }
}
