//! Monte-Carlo cross-check of exact moments.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::frontend::{DistKind, Distribution, InitMoment, ValidatedProgram};
use crate::symbolic::{EVar, ExpPoly, Poly, Scalar, Symbol};
use crate::Rational;

/// Default rejection threshold in standard errors.
pub const DEFAULT_Z: f64 = 5.0;

/// Absolute slack for deterministic (zero-variance) estimates.
pub const ATOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("parameter `{0}` is not bound (use --param {0}=<value>)")]
    Unbound(String),
    #[error("probability {value} of a branch for `{var}` is outside [0, 1]")]
    BadProbability { var: String, value: f64 },
    #[error("branch probabilities for `{var}` sum to {sum}, not 1")]
    BadProbabilitySum { var: String, sum: f64 },
    #[error("gauss variance {0} is negative")]
    NegativeVariance(f64),
    #[error("at least two trials are required, got {0}")]
    TooFewTrials(usize),
    #[error("target {0} mentions an unknown variable")]
    UnknownTarget(String),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Values for parameters and symbolic initials such as `y(0)`.
    pub bindings: BTreeMap<Symbol, Rational>,
    pub iterations: u64,
    pub trials: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(iterations: u64, trials: usize, seed: u64) -> Self {
        SimConfig {
            bindings: BTreeMap::new(),
            iterations,
            trials,
            seed,
        }
    }

    pub fn bind(mut self, name: &str, value: Rational) -> Self {
        self.bindings.insert(Symbol::new(name), value);
        self
    }

    fn exact_env(&self) -> HashMap<Symbol, Rational> {
        self.bindings
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub evar: String,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

/// A polynomial over state slots with the parameters already folded in.
#[derive(Debug, Clone)]
struct Compiled {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl Compiled {
    fn eval(&self, state: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, fs)| {
                fs.iter()
                    .fold(*c, |acc, &(i, e)| acc * state[i].powi(e as i32))
            })
            .sum()
    }

    fn constant(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [(c, fs)] if fs.is_empty() => Some(*c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Sampler {
    Uniform { lo: f64, hi: f64 },
    Gauss(Normal<f64>),
}

impl Sampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Sampler::Gauss(n) => n.sample(rng),
        }
    }
}

#[derive(Debug, Clone)]
enum Init {
    Fixed(f64),
    Draw(Sampler),
}

#[derive(Debug, Clone)]
struct Update {
    slot: usize,
    /// `(cumulative probability, expression)`
    branches: Vec<(f64, Compiled)>,
}

#[derive(Debug, Clone)]
struct Machine {
    init: Vec<Init>,
    draws: Vec<(usize, Sampler)>,
    updates: Vec<Update>,
}

struct Compiler<'a> {
    slots: HashMap<Symbol, usize>,
    env: &'a BTreeMap<Symbol, Rational>,
}

impl Compiler<'_> {
    fn bind(&self, p: &Poly<Rational>) -> Result<Poly<Rational>, SimError> {
        let mut out = p.clone();
        for s in p.symbols() {
            if self.slots.contains_key(&s) {
                continue;
            }
            let v = self
                .env
                .get(&s)
                .ok_or_else(|| SimError::Unbound(s.to_string()))?;
            out = out.substitute(&s, &Poly::constant(v.clone()));
        }
        Ok(out)
    }

    fn compile(&self, p: &Poly<Rational>) -> Result<Compiled, SimError> {
        let bound = self.bind(p)?;
        let terms = bound
            .terms()
            .map(|(m, c)| {
                let fs = m
                    .factors()
                    .iter()
                    .map(|(s, e)| (self.slots[s], *e))
                    .collect();
                (Scalar::to_f64(c), fs)
            })
            .collect();
        Ok(Compiled { terms })
    }

    fn constant(&self, p: &Poly<Rational>) -> Result<f64, SimError> {
        let c = self.compile(p)?;
        c.constant().ok_or_else(|| SimError::Unbound(p.to_string()))
    }

    fn sampler(&self, d: &Distribution<Rational>) -> Result<Sampler, SimError> {
        let a = self.constant(&d.arg1)?;
        let b = self.constant(&d.arg2)?;
        match d.kind {
            DistKind::Uniform => Ok(Sampler::Uniform { lo: a, hi: b }),
            DistKind::Gauss => {
                if b < 0.0 {
                    return Err(SimError::NegativeVariance(b));
                }
                Normal::new(a, b.sqrt())
                    .map(Sampler::Gauss)
                    .map_err(|_| SimError::NegativeVariance(b))
            }
        }
    }
}

fn build_machine(
    p: &ValidatedProgram,
    env: &BTreeMap<Symbol, Rational>,
) -> Result<Machine, SimError> {
    let slots: HashMap<Symbol, usize> = p
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    let cx = Compiler { slots, env };
    let mut init = Vec::new();
    for v in p.variables() {
        init.push(match p.resolve_initial_value(v) {
            InitMoment::Value(e) => Init::Fixed(cx.constant(&e)?),
            InitMoment::Dist(d) => Init::Draw(cx.sampler(&d)?),
            InitMoment::Unspecified(s) => Init::Fixed(cx.constant(&Poly::var(s))?),
        });
    }
    let prog = p.program();
    let mut draws = Vec::new();
    for rv in &prog.rv_assignments {
        draws.push((cx.slots[&rv.var], cx.sampler(&rv.dist)?));
    }
    let mut updates = Vec::new();
    for u in &prog.update_assignments {
        let mut acc = 0.0;
        let mut branches = Vec::new();
        for b in &u.update.branches {
            let pr = cx.constant(&b.prob)?;
            if !(0.0..=1.0).contains(&pr) {
                return Err(SimError::BadProbability {
                    var: u.var.to_string(),
                    value: pr,
                });
            }
            acc += pr;
            branches.push((acc, cx.compile(&b.expr)?));
        }
        if (acc - 1.0).abs() > 1e-12 {
            return Err(SimError::BadProbabilitySum {
                var: u.var.to_string(),
                sum: acc,
            });
        }
        updates.push(Update {
            slot: cx.slots[&u.var],
            branches,
        });
    }
    Ok(Machine {
        init,
        draws,
        updates,
    })
}

impl Machine {
    fn run(&self, rng: &mut ChaCha8Rng, iterations: u64) -> Vec<f64> {
        let mut state: Vec<f64> = self
            .init
            .iter()
            .map(|i| match i {
                Init::Fixed(v) => *v,
                Init::Draw(s) => s.sample(rng),
            })
            .collect();
        for _ in 0..iterations {
            for (slot, s) in &self.draws {
                state[*slot] = s.sample(rng);
            }
            for u in &self.updates {
                let expr = if u.branches.len() == 1 {
                    &u.branches[0].1
                } else {
                    let r: f64 = rng.random();
                    u.branches
                        .iter()
                        .find(|(cum, _)| r < *cum)
                        .map(|(_, e)| e)
                        .unwrap_or(&u.branches[u.branches.len() - 1].1)
                };
                state[u.slot] = expr.eval(&state);
            }
        }
        state
    }
}

/// Estimates `E[target]` after `cfg.iterations` iterations.
///
/// Trial `j` draws from stream `j` of a generator seeded with `cfg.seed`, so
/// the result does not depend on how trials are scheduled.
pub fn simulate(
    p: &ValidatedProgram,
    cfg: &SimConfig,
    targets: &BTreeSet<EVar>,
) -> Result<BTreeMap<EVar, MomentEstimate>, SimError> {
    if cfg.trials < 2 {
        return Err(SimError::TooFewTrials(cfg.trials));
    }
    let machine = build_machine(p, &cfg.bindings)?;
    let index: HashMap<&Symbol, usize> = p
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let mut monomials: Vec<Vec<(usize, u32)>> = Vec::new();
    for t in targets {
        let mut fs = Vec::new();
        for (s, e) in t.monomial().factors() {
            let i = index
                .get(s)
                .ok_or_else(|| SimError::UnknownTarget(t.to_string()))?;
            fs.push((*i, *e));
        }
        monomials.push(fs);
    }
    let samples: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(j as u64);
            let state = machine.run(&mut rng, cfg.iterations);
            monomials
                .iter()
                .map(|fs| {
                    fs.iter()
                        .fold(1.0, |acc, &(i, e)| acc * state[i].powi(e as i32))
                })
                .collect()
        })
        .collect();
    let t = cfg.trials as f64;
    let mut out = BTreeMap::new();
    for (k, target) in targets.iter().enumerate() {
        let mean = samples.iter().map(|s| s[k]).sum::<f64>() / t;
        let var = samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (t - 1.0);
        let sd = var.sqrt();
        out.insert(
            target.clone(),
            MomentEstimate {
                evar: target.label(),
                mean,
                sd,
                se: sd / t.sqrt(),
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub evar: String,
    pub exact: f64,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    /// `z·se + atol − |exact − mean|`; negative means failure.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub iterations: u64,
    pub trials: usize,
    pub seed: u64,
    pub z: f64,
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, evar: &EVar) -> Option<&VerifyRow> {
        let label = evar.label();
        self.rows.iter().find(|r| r.evar == label)
    }
}

/// Compares each estimate with its closed form under the bindings.
/// Closed forms that cannot be evaluated are reported as failures.
pub fn check(
    closed: &BTreeMap<EVar, ExpPoly<Rational>>,
    est: &BTreeMap<EVar, MomentEstimate>,
    cfg: &SimConfig,
    z: f64,
) -> VerifyReport {
    let env = cfg.exact_env();
    let rows = est
        .iter()
        .map(|(e, m)| {
            let exact = closed
                .get(e)
                .and_then(|f| f.eval(cfg.iterations, &env).ok())
                .map(|v| Scalar::to_f64(&v))
                .unwrap_or(f64::NAN);
            let margin = z * m.se + ATOL - (exact - m.mean).abs();
            VerifyRow {
                evar: e.label(),
                exact,
                mean: m.mean,
                sd: m.sd,
                se: m.se,
                margin,
                pass: margin >= 0.0,
            }
        })
        .collect();
    VerifyReport {
        iterations: cfg.iterations,
        trials: cfg.trials,
        seed: cfg.seed,
        z,
        rows,
    }
}
