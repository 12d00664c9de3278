//! Dependency-ordered solving of first-order moment recurrences.
//!
//! Every moment equation has the shape
//! `E[t](n+1) = c · E[t](n) + Σ_{e ≠ t} k_e · E[e](n) + k_0`.
//! Once the right-hand side E-variables are solved, their closed forms
//! make the non-self part an exponential polynomial, leaving a first-order
//! linear recurrence with constant coefficient `c`. Those are solved by
//! undetermined coefficients.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::SolveError;
use crate::moments::MomentEquation;
use crate::symbolic::{EVar, ExpPoly, Poly, Scalar};

/// `E[target](n+1) = self_coeff · E[target](n) + inhom(n)`, `E[target](0) = init`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recurrence<C: Scalar> {
    pub target: EVar,
    pub self_coeff: Poly<C>,
    pub inhom: ExpPoly<C>,
    pub init: Poly<C>,
}

/// E-variables ordered so that every equation's other dependencies come
/// before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOrder(pub Vec<EVar>);

impl SolveOrder {
    pub fn iter(&self) -> impl Iterator<Item = &EVar> {
        self.0.iter()
    }

    pub fn position(&self, e: &EVar) -> Option<usize> {
        self.0.iter().position(|x| x == e)
    }
}

/// Kahn's algorithm with a canonical tiebreak: equations without any
/// E-variable on the right-hand side first, then E-variable order.
pub fn topo_order<'a, C: Scalar + 'a, I>(equations: I) -> Result<SolveOrder, SolveError>
where
    I: IntoIterator<Item = &'a MomentEquation<C>>,
{
    let eqs: BTreeMap<&EVar, &MomentEquation<C>> =
        equations.into_iter().map(|e| (&e.target, e)).collect();
    let mut pending: BTreeMap<&EVar, usize> = BTreeMap::new();
    let mut users: BTreeMap<&EVar, Vec<&EVar>> = BTreeMap::new();
    for (t, eq) in &eqs {
        let mut count = 0;
        for d in eq.dependencies() {
            if !eqs.contains_key(d) {
                return Err(SolveError::MissingDependency {
                    target: (*t).clone(),
                    missing: d.clone(),
                });
            }
            users.entry(d).or_default().push(t);
            count += 1;
        }
        pending.insert(t, count);
    }

    let key = |e: &EVar| (!eqs[e].linear_terms.is_empty(), e.clone());
    let mut ready: BTreeSet<(bool, EVar)> = pending
        .iter()
        .filter(|(_, c)| **c == 0)
        .map(|(e, _)| key(e))
        .collect();
    let mut order = Vec::with_capacity(eqs.len());
    while let Some(next) = ready.pop_first() {
        let e = next.1;
        if let Some(us) = users.get(&e) {
            for u in us {
                let c = pending.get_mut(u).expect("known target");
                *c -= 1;
                if *c == 0 {
                    ready.insert(key(u));
                }
            }
        }
        order.push(e);
    }
    if order.len() < eqs.len() {
        let placed: BTreeSet<&EVar> = order.iter().collect();
        let rest: BTreeSet<&EVar> = eqs
            .keys()
            .copied()
            .filter(|e| !placed.contains(e))
            .collect();
        return Err(SolveError::CyclicDependency(find_cycle(&eqs, &rest)));
    }
    Ok(SolveOrder(order))
}

fn find_cycle<C: Scalar>(
    eqs: &BTreeMap<&EVar, &MomentEquation<C>>,
    rest: &BTreeSet<&EVar>,
) -> Vec<EVar> {
    // Every remaining node has an unresolved dependency inside `rest`;
    // walking those edges must revisit a node.
    let mut path: Vec<&EVar> = Vec::new();
    let mut cur = *rest.iter().next().expect("nonempty");
    loop {
        if let Some(i) = path.iter().position(|e| *e == cur) {
            let mut cycle: Vec<EVar> = path[i..].iter().map(|e| (*e).clone()).collect();
            cycle.push(cur.clone());
            return cycle;
        }
        path.push(cur);
        cur = eqs[cur]
            .dependencies()
            .find(|d| rest.contains(d))
            .expect("remaining node has a remaining dependency");
    }
}

/// Substitutes solved closed forms into the non-self part of `e`.
pub fn build_recurrence<C: Scalar>(
    e: &MomentEquation<C>,
    solved: &BTreeMap<EVar, ExpPoly<C>>,
    init_moments: &BTreeMap<EVar, Poly<C>>,
) -> Result<Recurrence<C>, SolveError> {
    let mut inhom = ExpPoly::constant(e.constant.clone());
    for (dep, coeff) in &e.linear_terms {
        if *dep == e.target {
            continue;
        }
        let f = solved
            .get(dep)
            .ok_or_else(|| SolveError::MissingDependency {
                target: e.target.clone(),
                missing: dep.clone(),
            })?;
        inhom = &inhom + &f.scale(coeff);
    }
    let init =
        init_moments
            .get(&e.target)
            .cloned()
            .ok_or_else(|| SolveError::MissingDependency {
                target: e.target.clone(),
                missing: e.target.clone(),
            })?;
    Ok(Recurrence {
        target: e.target.clone(),
        self_coeff: e.self_coeff(),
        inhom,
        init,
    })
}

fn binom<C: Scalar>(n: usize, k: usize) -> C {
    (0..k).fold(C::one(), |acc, i| {
        acc * C::from_i64((n - i) as i64) / C::from_i64((i + 1) as i64)
    })
}

fn unresolved<C: Scalar>(r: &Recurrence<C>, base: &Poly<C>) -> SolveError {
    SolveError::UnresolvedBaseComparison {
        target: r.target.clone(),
        base: base.to_string(),
        coeff: r.self_coeff.to_string(),
    }
}

fn nonzero_constant<C: Scalar>(p: &Poly<C>) -> Option<C> {
    p.as_constant().filter(|c| !c.is_zero())
}

/// `true` iff `f` satisfies the recurrence and its initial condition.
pub fn satisfies<C: Scalar>(r: &Recurrence<C>, f: &ExpPoly<C>) -> bool {
    let residual = &(&f.shift() - &f.scale(&r.self_coeff)) - &r.inhom;
    residual.is_negligible() && (&f.at_zero() - &r.init).is_negligible()
}

/// Closed form of a first-order recurrence with exponential-polynomial
/// inhomogeneity.
///
/// For each inhomogeneous base `ρ` with polynomial part of degree `d`, the
/// ansatz is `P(n) ρⁿ` with `deg P = d`, or `deg P = d + 1` and `P(0) = 0`
/// when `ρ` equals the self-coefficient `c`. Coefficients are matched from
/// the top degree down, and the homogeneous term `α cⁿ` absorbs the initial
/// value. The result is checked against the recurrence before returning.
pub fn solve_first_order<C: Scalar>(r: &Recurrence<C>) -> Result<ExpPoly<C>, SolveError> {
    let c = &r.self_coeff;
    let mut particular = ExpPoly::zero();

    for base in r.inhom.bases() {
        let q = r.inhom.poly_for_base(&base);
        let d = q.len() - 1;

        if base.is_zero() {
            // A·0^(n+1) - c·A·0^n = -c·A at n = 0 only.
            let cc = match c.as_constant() {
                Some(cc) if !cc.is_zero() => cc,
                Some(_) => {
                    return Err(SolveError::SolverFailure {
                        target: r.target.clone(),
                        detail: "an impulse at n = 0 under a zero self-coefficient yields an impulse at n = 1, which has no exponential-polynomial form".into(),
                    })
                }
                None => return Err(unresolved(r, &base)),
            };
            let a = q[0].scale(&(-C::one() / cc));
            particular.add_term(base, 0, a);
            continue;
        }

        let diff = &base - c;
        let mut coeffs: Vec<Poly<C>> = Vec::new();
        if diff.is_zero() {
            // ρ (P(n+1) - P(n)) = Q(n), P(0) = 0, deg P = d + 1.
            let rho = nonzero_constant(&base).ok_or_else(|| unresolved(r, &base))?;
            let inv = C::one() / rho;
            coeffs.resize(d + 2, Poly::zero());
            for i in (0..=d).rev() {
                let mut rhs = q[i].scale(&inv);
                for (j, bj) in coeffs.iter().enumerate().skip(i + 2) {
                    rhs = &rhs - &bj.scale(&binom::<C>(j, i));
                }
                coeffs[i + 1] = rhs.scale(&(C::one() / C::from_i64((i + 1) as i64)));
            }
        } else {
            // ρ P(n+1) - c P(n) = Q(n), deg P = d.
            let delta = nonzero_constant(&diff).ok_or_else(|| unresolved(r, &base))?;
            let inv = C::one() / delta;
            coeffs.resize(d + 1, Poly::zero());
            for i in (0..=d).rev() {
                let mut acc = Poly::zero();
                for (j, bj) in coeffs.iter().enumerate().skip(i + 1) {
                    acc = &acc + &bj.scale(&binom::<C>(j, i));
                }
                coeffs[i] = (&q[i] - &(&base * &acc)).scale(&inv);
            }
        }
        for (j, bj) in coeffs.into_iter().enumerate() {
            particular.add_term(base.clone(), j as u32, bj);
        }
    }

    let alpha = &r.init - &particular.at_zero();
    let mut f = particular;
    f.add_term(c.clone(), 0, alpha);

    if !satisfies(r, &f) {
        return Err(SolveError::SolverFailure {
            target: r.target.clone(),
            detail: "closed form failed the recurrence self-check".into(),
        });
    }
    Ok(f)
}

/// Recurrences and closed forms for a whole closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolvedSystem<C: Scalar> {
    pub order: SolveOrder,
    pub recurrences: BTreeMap<EVar, Recurrence<C>>,
    pub closed_forms: BTreeMap<EVar, ExpPoly<C>>,
}

/// Solves along `order`, feeding each closed form into later equations.
pub fn solve_system<C: Scalar>(
    order: &SolveOrder,
    equations: &BTreeMap<EVar, MomentEquation<C>>,
    init_moments: &BTreeMap<EVar, Poly<C>>,
) -> Result<SolvedSystem<C>, SolveError> {
    let mut closed_forms = BTreeMap::new();
    let mut recurrences = BTreeMap::new();
    for e in order.iter() {
        let eq = equations
            .get(e)
            .ok_or_else(|| SolveError::MissingDependency {
                target: e.clone(),
                missing: e.clone(),
            })?;
        let rec = build_recurrence(eq, &closed_forms, init_moments)?;
        let f = solve_first_order(&rec)?;
        closed_forms.insert(e.clone(), f);
        recurrences.insert(e.clone(), rec);
    }
    Ok(SolvedSystem {
        order: order.clone(),
        recurrences,
        closed_forms,
    })
}

/// Closed forms for every E-variable in `order`.
pub fn solve_all<C: Scalar>(
    order: &SolveOrder,
    equations: &BTreeMap<EVar, MomentEquation<C>>,
    init_moments: &BTreeMap<EVar, Poly<C>>,
) -> Result<BTreeMap<EVar, ExpPoly<C>>, SolveError> {
    solve_system(order, equations, init_moments).map(|s| s.closed_forms)
}
