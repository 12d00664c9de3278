use std::fmt;

use thiserror::Error;

use crate::frontend::Span;
use crate::symbolic::EVar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }
}

/// The structural restriction a program violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Restriction {
    /// Loop variables must be distinct from each other and from parameters.
    DistinctVariables,
    /// Branch probabilities must be variable-free and sum to one.
    ProbabilitySum,
    /// An update may depend on its own variable only linearly.
    LinearSelfDependence,
    /// An update may only read variables assigned earlier in the body.
    OrderedDependence,
    /// Distribution arguments and initial values must be variable-free.
    ConstantArguments,
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Restriction::DistinctVariables => "distinct variables",
            Restriction::ProbabilitySum => "probabilities sum to 1",
            Restriction::LinearSelfDependence => "linear self-dependence",
            Restriction::OrderedDependence => "dependence on earlier variables only",
            Restriction::ConstantArguments => "variable-free arguments",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not Prob-solvable at {span} [{restriction}]: {message}")]
pub struct NotProbSolvable {
    pub restriction: Restriction,
    pub span: Span,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MomentError {
    #[error("E-variable closure exceeded {cap} entries")]
    ClosureBlowup { cap: usize },
    #[error("{evar:?} is not over program variables: unknown symbol `{symbol}`")]
    UnknownVariable { evar: EVar, symbol: String },
    #[error("moment equation for {evar:?} is not linear in its own expectation: {detail}")]
    NotProbSolvable { evar: EVar, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("cyclic dependency between E-variables: {}", render_cycle(.0))]
    CyclicDependency(Vec<EVar>),
    #[error("recurrence for {target:?} needs unsolved {missing:?}")]
    MissingDependency { target: EVar, missing: EVar },
    #[error(
        "cannot solve recurrence for {target:?}: exponential base {base} against self-coefficient {coeff} needs division by a non-constant expression"
    )]
    UnresolvedBaseComparison {
        target: EVar,
        base: String,
        coeff: String,
    },
    #[error("solver failure for {target:?}: {detail}")]
    SolverFailure { target: EVar, detail: String },
}

fn render_cycle(c: &[EVar]) -> String {
    c.iter()
        .map(|e| format!("{e:?}"))
        .collect::<Vec<_>>()
        .join(" -> ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoalError {
    #[error("at least one goal is required")]
    Empty,
    #[error("moment order must be at least 1, got {0}")]
    NonPositive(i64),
    #[error("goal `{goal}` mentions unknown variable `{var}`")]
    UnknownVariable { goal: String, var: String },
    #[error("malformed goal `{0}`")]
    Malformed(String),
}

/// Every failure of the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Goal(#[from] GoalError),
    #[error(transparent)]
    NotProbSolvable(#[from] NotProbSolvable),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("verification setup: {0}")]
    Verify(String),
}

impl Error {
    /// Process exit status for the command-line driver.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) | Error::Parse(_) | Error::Goal(_) | Error::Verify(_) => 2,
            Error::NotProbSolvable(_) => 3,
            Error::Moment(_) | Error::Solve(_) => 4,
        }
    }
}
