use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::symbolic::{Poly, Scalar, Symbol};
use crate::Rational;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Init,
    Rv,
    Update,
}

/// Positions of every assignment, keyed by section and index.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    spans: BTreeMap<(Section, usize), Span>,
}

impl SourceMap {
    pub fn insert(&mut self, section: Section, index: usize, span: Span) {
        self.spans.insert((section, index), span);
    }

    pub fn get(&self, section: Section, index: usize) -> Span {
        self.spans
            .get(&(section, index))
            .copied()
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistKind {
    Uniform,
    Gauss,
}

impl DistKind {
    pub fn keyword(self) -> &'static str {
        match self {
            DistKind::Uniform => "uniform",
            DistKind::Gauss => "gauss",
        }
    }
}

/// `Uniform(lower, upper)` or `Gauss(mean, variance)`.
#[derive(Debug, Clone)]
pub struct Distribution<C: Scalar> {
    pub kind: DistKind,
    pub arg1: Poly<C>,
    pub arg2: Poly<C>,
}

impl<C: Scalar> PartialEq for Distribution<C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl<C: Scalar> Eq for Distribution<C> {}

impl<C: Scalar> PartialOrd for Distribution<C> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: Scalar> Ord for Distribution<C> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.kind, &self.arg1, &self.arg2).cmp(&(other.kind, &other.arg1, &other.arg2))
    }
}

impl<C: Scalar> Distribution<C> {
    pub fn uniform(lo: Poly<C>, hi: Poly<C>) -> Self {
        Distribution {
            kind: DistKind::Uniform,
            arg1: lo,
            arg2: hi,
        }
    }

    pub fn gauss(mean: Poly<C>, variance: Poly<C>) -> Self {
        Distribution {
            kind: DistKind::Gauss,
            arg1: mean,
            arg2: variance,
        }
    }

    pub fn map_scalar<D: Scalar, F: Fn(&C) -> D>(&self, f: F) -> Distribution<D> {
        Distribution {
            kind: self.kind,
            arg1: self.arg1.map_coeffs(&f),
            arg2: self.arg2.map_coeffs(&f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitValue<C: Scalar> {
    Expr(Poly<C>),
    Dist(Distribution<C>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitAssignment<C: Scalar> {
    pub var: Symbol,
    pub value: InitValue<C>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RvAssignment<C: Scalar> {
    pub var: Symbol,
    pub dist: Distribution<C>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch<C: Scalar> {
    pub expr: Poly<C>,
    pub prob: Poly<C>,
}

/// A probabilistic assignment choosing one branch per execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchUpdate<C: Scalar> {
    pub branches: Vec<Branch<C>>,
}

impl<C: Scalar> BranchUpdate<C> {
    pub fn deterministic(expr: Poly<C>) -> Self {
        BranchUpdate {
            branches: vec![Branch {
                expr,
                prob: Poly::one(),
            }],
        }
    }

    pub fn probability_sum(&self) -> Poly<C> {
        self.branches
            .iter()
            .fold(Poly::zero(), |acc, b| &acc + &b.prob)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateAssignment<C: Scalar> {
    pub var: Symbol,
    pub update: BranchUpdate<C>,
}

/// A parsed loop: initial assignments, then `while true:` with random draws
/// followed by probabilistic updates.
///
/// Equality ignores source positions.
#[derive(Debug, Clone)]
pub struct Program<C: Scalar = Rational> {
    pub parameters: BTreeSet<Symbol>,
    pub init_assignments: Vec<InitAssignment<C>>,
    pub rv_assignments: Vec<RvAssignment<C>>,
    pub update_assignments: Vec<UpdateAssignment<C>>,
    pub source_map: SourceMap,
}

impl<C: Scalar> PartialEq for Program<C> {
    fn eq(&self, other: &Self) -> bool {
        self.parameters == other.parameters
            && self.init_assignments == other.init_assignments
            && self.rv_assignments == other.rv_assignments
            && self.update_assignments == other.update_assignments
    }
}

impl<C: Scalar> Program<C> {
    /// Every assigned name, in first-assignment order.
    pub fn variables(&self) -> Vec<Symbol> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let names = self
            .init_assignments
            .iter()
            .map(|a| &a.var)
            .chain(self.rv_assignments.iter().map(|a| &a.var))
            .chain(self.update_assignments.iter().map(|a| &a.var));
        for v in names {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        out
    }

    pub fn init_of(&self, v: &Symbol) -> Option<&InitValue<C>> {
        self.init_assignments
            .iter()
            .find(|a| &a.var == v)
            .map(|a| &a.value)
    }

    pub fn rv_of(&self, v: &Symbol) -> Option<&Distribution<C>> {
        self.rv_assignments
            .iter()
            .find(|a| &a.var == v)
            .map(|a| &a.dist)
    }

    /// Converts every coefficient into another scalar field.
    pub fn map_scalar<D: Scalar, F: Fn(&C) -> D>(&self, f: F) -> Program<D> {
        Program {
            parameters: self.parameters.clone(),
            init_assignments: self
                .init_assignments
                .iter()
                .map(|a| InitAssignment {
                    var: a.var.clone(),
                    value: match &a.value {
                        InitValue::Expr(e) => InitValue::Expr(e.map_coeffs(&f)),
                        InitValue::Dist(d) => InitValue::Dist(d.map_scalar(&f)),
                    },
                })
                .collect(),
            rv_assignments: self
                .rv_assignments
                .iter()
                .map(|a| RvAssignment {
                    var: a.var.clone(),
                    dist: a.dist.map_scalar(&f),
                })
                .collect(),
            update_assignments: self
                .update_assignments
                .iter()
                .map(|a| UpdateAssignment {
                    var: a.var.clone(),
                    update: BranchUpdate {
                        branches: a
                            .update
                            .branches
                            .iter()
                            .map(|b| Branch {
                                expr: b.expr.map_coeffs(&f),
                                prob: b.prob.map_coeffs(&f),
                            })
                            .collect(),
                    },
                })
                .collect(),
            source_map: self.source_map.clone(),
        }
    }
}
