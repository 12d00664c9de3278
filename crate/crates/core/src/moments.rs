//! Rewriting probabilistic updates into linear equations over expected
//! monomials.
//!
//! For a target monomial `M`, `E[M](n+1)` is obtained by substituting the
//! loop body backwards into `M`: each update `v = e_i @ p_i` turns the
//! current polynomial `P` into `Σ p_i · P[v := e_i]`, and afterwards every
//! power `r^k` of a freshly drawn random variable is replaced by the raw
//! moment of its distribution. What is left is a polynomial over the
//! variables at iteration `n`, which splits by linearity of expectation into
//! expected monomials.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::MomentError;
use crate::frontend::{DistKind, Distribution, ValidatedProgram};
use crate::symbolic::{EVar, Monomial, Poly, Scalar, Symbol};

/// Default bound on the number of E-variables a closure may generate.
pub const DEFAULT_CLOSURE_CAP: usize = 10_000;

/// `E[X^k]` for `X` drawn from `d`.
///
/// Uniform moments use the expanded quotient
/// `(b^{k+1} - a^{k+1}) / ((k+1)(b-a)) = Σ_{j=0}^{k} a^j b^{k-j} / (k+1)`.
/// Gaussian moments follow `m_k = μ m_{k-1} + (k-1) σ² m_{k-2}`.
pub fn rv_raw_moment<C: Scalar>(d: &Distribution<C>, k: u32) -> Poly<C> {
    match d.kind {
        DistKind::Uniform => {
            let (a, b) = (&d.arg1, &d.arg2);
            if a == b {
                return a.pow(k);
            }
            let mut sum = Poly::zero();
            for j in 0..=k {
                sum = &sum + &(&a.pow(j) * &b.pow(k - j));
            }
            sum.scale(&(C::one() / C::from_i64(i64::from(k) + 1)))
        }
        DistKind::Gauss => {
            let (mu, var) = (&d.arg1, &d.arg2);
            let mut prev = Poly::one();
            if k == 0 {
                return prev;
            }
            let mut cur = mu.clone();
            for j in 2..=k {
                let next = &(mu * &cur) + &(var * &prev).scale(&C::from_i64(i64::from(j) - 1));
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Memo of distribution raw moments.
#[derive(Debug, Clone)]
pub struct MomentTable<C: Scalar> {
    memo: BTreeMap<(Distribution<C>, u32), Poly<C>>,
}

impl<C: Scalar> Default for MomentTable<C> {
    fn default() -> Self {
        MomentTable {
            memo: BTreeMap::new(),
        }
    }
}

impl<C: Scalar> MomentTable<C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw_moment(&mut self, d: &Distribution<C>, k: u32) -> Poly<C> {
        self.memo
            .entry((d.clone(), k))
            .or_insert_with(|| rv_raw_moment(d, k))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}

/// `E[target](n+1) = Σ coeff_e · E[e](n) + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentEquation<C: Scalar> {
    pub target: EVar,
    pub linear_terms: BTreeMap<EVar, Poly<C>>,
    pub constant: Poly<C>,
}

impl<C: Scalar> MomentEquation<C> {
    /// Coefficient of the target's own expectation; zero if absent.
    pub fn self_coeff(&self) -> Poly<C> {
        self.linear_terms
            .get(&self.target)
            .cloned()
            .unwrap_or_else(Poly::zero)
    }

    /// E-variables other than the target on the right-hand side.
    pub fn dependencies(&self) -> impl Iterator<Item = &EVar> {
        self.linear_terms.keys().filter(move |e| **e != self.target)
    }

    /// The right-hand side as one polynomial over variables and parameters,
    /// each E-variable written as its monomial.
    pub fn rhs_poly(&self) -> Poly<C> {
        self.linear_terms
            .iter()
            .fold(self.constant.clone(), |acc, (e, c)| {
                &acc + &c.mul_monomial(e.monomial())
            })
    }
}

/// Ranks variables for the termination measure: updated variables in
/// reverse body order, then everything else.
fn measure_order<C: Scalar>(p: &ValidatedProgram<C>) -> Vec<Symbol> {
    let mut order: Vec<Symbol> = p
        .program()
        .update_assignments
        .iter()
        .rev()
        .map(|a| a.var.clone())
        .collect();
    for v in p.variables() {
        if !order.contains(v) {
            order.push(v.clone());
        }
    }
    order
}

fn measure_cmp(order: &[Symbol], a: &Monomial, b: &Monomial) -> Ordering {
    for s in order {
        match a.exponent(s).cmp(&b.exponent(s)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Builds the moment equation of `target` for program `p`.
pub fn moment_equation<C: Scalar>(
    target: &EVar,
    p: &ValidatedProgram<C>,
    table: &mut MomentTable<C>,
) -> Result<MomentEquation<C>, MomentError> {
    if let Some(s) = target.variables().find(|s| !p.is_variable(s)) {
        return Err(MomentError::UnknownVariable {
            evar: target.clone(),
            symbol: s.to_string(),
        });
    }

    let mut poly: Poly<C> = Poly::term(C::one(), target.monomial().clone());
    for a in p.program().update_assignments.iter().rev() {
        if !poly.mentions(&a.var) {
            continue;
        }
        let mut next = Poly::zero();
        for b in &a.update.branches {
            next = &next + &(&poly.substitute(&a.var, &b.expr) * &b.prob);
        }
        poly = next;
    }

    // Fresh draws are independent of the state and of each other.
    let mut integrated = Poly::zero();
    for (m, c) in poly.terms() {
        let (rv_part, rest) = m.partition(|s| p.rv_distribution(s).is_some());
        let mut factor = Poly::term(c.clone(), rest);
        for (r, k) in rv_part.factors() {
            let d = p.rv_distribution(r).expect("random variable");
            factor = &factor * &table.raw_moment(d, *k);
        }
        integrated = &integrated + &factor;
    }

    let mut linear_terms = BTreeMap::new();
    let mut constant = Poly::zero();
    for (key, coeff) in integrated.collect_by(|s| p.is_variable(s)) {
        match EVar::new(key) {
            Some(e) => {
                linear_terms.insert(e, coeff);
            }
            None => constant = coeff,
        }
    }

    let order = measure_order(p);
    for e in linear_terms.keys() {
        if e != target && measure_cmp(&order, e.monomial(), target.monomial()) != Ordering::Less {
            return Err(MomentError::NotProbSolvable {
                evar: target.clone(),
                detail: format!("right-hand side refers to {e:?}, which does not precede it"),
            });
        }
    }

    Ok(MomentEquation {
        target: target.clone(),
        linear_terms,
        constant,
    })
}

/// Demand-driven closure: every E-variable reachable from `goals` through
/// moment equations, in canonical E-variable order.
pub fn evar_closure<C: Scalar>(
    goals: &BTreeSet<EVar>,
    p: &ValidatedProgram<C>,
    table: &mut MomentTable<C>,
    cap: usize,
) -> Result<Vec<(EVar, MomentEquation<C>)>, MomentError> {
    let mut done: BTreeMap<EVar, MomentEquation<C>> = BTreeMap::new();
    let mut queue: VecDeque<EVar> = goals.iter().cloned().collect();
    let mut queued: BTreeSet<EVar> = goals.clone();
    while let Some(e) = queue.pop_front() {
        let eq = moment_equation(&e, p, table)?;
        for dep in eq.dependencies() {
            if queued.insert(dep.clone()) {
                if queued.len() > cap {
                    return Err(MomentError::ClosureBlowup { cap });
                }
                queue.push_back(dep.clone());
            }
        }
        done.insert(e, eq);
    }
    if done.len() > cap {
        return Err(MomentError::ClosureBlowup { cap });
    }
    Ok(done.into_iter().collect())
}

/// `E[m(0)]` from the initial description of each variable.
///
/// Distinct variables start independent, so the joint initial moment is the
/// product of per-variable moments.
pub fn initial_moment<C: Scalar>(e: &EVar, p: &ValidatedProgram<C>) -> Poly<C> {
    e.monomial()
        .factors()
        .iter()
        .fold(Poly::one(), |acc, (v, k)| {
            &acc * &p.resolve_initial_value(v).moment(*k)
        })
}
