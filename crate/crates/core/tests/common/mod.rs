#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prob_moments::analysis::{analyze_evars, Analysis, Goal, GoalSpec};
use prob_moments::frontend::{load_program, ValidatedProgram};
use prob_moments::moments::DEFAULT_CLOSURE_CAP;
use prob_moments::symbolic::scalar::parse_rational;
use prob_moments::{EVar, Rational, Symbol};

pub const RUNNING: &str = "x = 0
while true:
  u = RV(uniform, 0, b)
  g = RV(gauss, 0, 1)
  x = x - u @ 1/2; x + u @ 1/2
  y = y + x + g
";

pub fn programs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("programs")
}

/// `(name, source)` for every corpus program, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(programs_dir())
        .expect("programs directory")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "prob"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

pub fn q(s: &str) -> Rational {
    parse_rational(s).unwrap_or_else(|| panic!("bad rational {s}"))
}

pub fn ev(text: &str) -> EVar {
    let m = prob_moments::analysis::parse_monomial(text).expect("monomial");
    EVar::new(m).expect("nonempty")
}

pub fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

/// Solves all moments up to `k` of every variable.
pub fn analyze_up_to(p: &ValidatedProgram, k: u32) -> Analysis<Rational> {
    let goals = GoalSpec::new((1..=k).map(Goal::AllVarsMoment).collect()).unwrap();
    let evars = goals.evars(p.variables());
    analyze_evars(p, &evars, DEFAULT_CLOSURE_CAP).expect("analysis")
}

pub fn load(src: &str) -> ValidatedProgram {
    load_program(src).expect("valid program")
}

/// A random rational `num/den` with `|num| <= 12`, `1 <= den <= 6`.
pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let n: i64 = rng.random_range(-12..=12);
    let d: i64 = rng.random_range(1..=6);
    Rational::new(n.into(), d.into())
}

/// Random values for every free symbol of the closed forms.
/// Symbols in `probabilities` get values in `[0, 1]`.
pub fn random_bindings(
    symbols: &BTreeSet<Symbol>,
    probabilities: &BTreeSet<Symbol>,
    seed: u64,
) -> HashMap<Symbol, Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    symbols
        .iter()
        .map(|s| {
            let v = if probabilities.contains(s) {
                let d: i64 = rng.random_range(1..=9);
                let n: i64 = rng.random_range(0..=d);
                Rational::new(n.into(), d.into())
            } else {
                random_rational(&mut rng)
            };
            (s.clone(), v)
        })
        .collect()
}

/// Symbols that occur as branch probabilities in the program.
pub fn probability_symbols(p: &ValidatedProgram) -> BTreeSet<Symbol> {
    p.program()
        .update_assignments
        .iter()
        .flat_map(|u| u.update.branches.iter())
        .flat_map(|b| b.prob.symbols())
        .collect()
}

/// Iterates the moment equations numerically from the initial moments.
/// Returns `values[n][evar]` for `0 <= n <= steps`.
pub fn iterate_moments(
    a: &Analysis<Rational>,
    env: &HashMap<Symbol, Rational>,
    steps: usize,
) -> Vec<BTreeMap<EVar, Rational>> {
    let mut cur: BTreeMap<EVar, Rational> = a
        .init_moments
        .iter()
        .map(|(e, p)| (e.clone(), p.eval(env).expect("bound init")))
        .collect();
    let coeffs: BTreeMap<EVar, (Vec<(EVar, Rational)>, Rational)> = a
        .equations
        .iter()
        .map(|(e, eq)| {
            let lin = eq
                .linear_terms
                .iter()
                .map(|(d, c)| (d.clone(), c.eval(env).expect("bound coeff")))
                .collect();
            (
                e.clone(),
                (lin, eq.constant.eval(env).expect("bound const")),
            )
        })
        .collect();
    let mut out = vec![cur.clone()];
    for _ in 0..steps {
        let next = coeffs
            .iter()
            .map(|(e, (lin, c))| {
                let mut v = c.clone();
                for (d, k) in lin {
                    v += k * &cur[d];
                }
                (e.clone(), v)
            })
            .collect();
        cur = next;
        out.push(cur.clone());
    }
    out
}

/// What the corpus self-check saw.
#[derive(Debug, Default)]
pub struct CorpusStats {
    pub programs: usize,
    pub solved: usize,
    pub self_coeffs: BTreeSet<Rational>,
    pub resonant: usize,
    pub non_resonant: usize,
}

/// Checks `f(n+1) - c f(n) - inhom(n) = 0` and `f(0) = init` exactly for
/// every solved E-variable up to third moments.
pub fn corpus_self_check() -> Result<CorpusStats, String> {
    let mut stats = CorpusStats::default();
    for (name, src) in corpus() {
        let p = load_program(&src).map_err(|e| format!("{name}: {e}"))?;
        let a = analyze_up_to(&p, 3);
        stats.programs += 1;
        for (e, r) in &a.system.recurrences {
            let f = &a.system.closed_forms[e];
            let residual = &(&f.shift() - &f.scale(&r.self_coeff)) - &r.inhom;
            if !residual.is_zero() {
                return Err(format!("{name}: {e:?} residual {residual:?}"));
            }
            if f.at_zero() != r.init {
                return Err(format!(
                    "{name}: {e:?} f(0) = {} but init = {}",
                    f.at_zero(),
                    r.init
                ));
            }
            stats.solved += 1;
            if let Some(c) = r.self_coeff.as_constant() {
                stats.self_coeffs.insert(c);
            }
            if r.inhom.bases().contains(&r.self_coeff) {
                stats.resonant += 1;
            } else if !r.inhom.is_zero() {
                stats.non_resonant += 1;
            }
        }
    }
    Ok(stats)
}

/// Compares closed forms against exact numeric iteration of the moment
/// equations for `n <= steps`, under random rational bindings.
/// Returns the number of comparisons made.
pub fn corpus_iteration_oracle(steps: usize, bindings_per_program: u64) -> Result<usize, String> {
    let mut checked = 0;
    for (idx, (name, src)) in corpus().into_iter().enumerate() {
        let p = load_program(&src).map_err(|e| format!("{name}: {e}"))?;
        let a = analyze_up_to(&p, 3);
        let mut symbols = BTreeSet::new();
        for f in a.system.closed_forms.values() {
            symbols.extend(f.symbols());
        }
        for eq in a.equations.values() {
            symbols.extend(eq.constant.symbols());
            for c in eq.linear_terms.values() {
                symbols.extend(c.symbols());
            }
        }
        for init in a.init_moments.values() {
            symbols.extend(init.symbols());
        }
        let probs = probability_symbols(&p);
        for k in 0..bindings_per_program {
            let env = random_bindings(&symbols, &probs, 1000 * idx as u64 + k);
            let values = iterate_moments(&a, &env, steps);
            for (n, row) in values.iter().enumerate() {
                for (e, expected) in row {
                    let got = a.system.closed_forms[e]
                        .eval(n as u64, &env)
                        .map_err(|u| format!("{name}: unbound {u:?}"))?;
                    if &got != expected {
                        return Err(format!(
                            "{name}: {e:?} at n = {n}: closed form {got} vs iteration {expected}"
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// The nine moment equations of the running example, written with `**`
/// for powers.
pub const RUNNING_RECURRENCES: [(&str, &str); 9] = [
    ("y", "x + y"),
    ("g**2", "1"),
    ("x", "x"),
    ("u", "b/2"),
    ("x**2", "b**2/3 + x**2"),
    ("u**2", "b**2/3"),
    ("y**2", "b**2/3 + x**2 + 2*x*y + y**2 + 1"),
    ("g", "0"),
    ("x*y", "b**2/3 + x**2 + x*y"),
];

/// The nine closed forms for the running example.
pub const RUNNING_CLOSED_FORMS: [(&str, &str); 9] = [
    ("u^2", "b^2/3"),
    ("x", "0"),
    ("y", "y(0)"),
    ("x^2", "b^2*n/3"),
    ("u", "b/2"),
    ("y*x", "b^2*n/6*(n + 1)"),
    ("y^2", "n/18*(2*b^2*n^2 + 3*b^2*n + b^2 + 18) + y(0)^2"),
    ("g", "0"),
    ("g^2", "1"),
];

pub fn running_goals_1_2() -> Analysis<Rational> {
    analyze_up_to(&load(RUNNING), 2)
}

/// Exact comparison of the generated equations against the reference set.
pub fn check_running_recurrences(a: &Analysis<Rational>) -> Result<(), String> {
    use prob_moments::symbolic::parse::parse_param_expr;
    if a.equations.len() != RUNNING_RECURRENCES.len() {
        return Err(format!("{} equations, expected 9", a.equations.len()));
    }
    for (lhs, rhs) in RUNNING_RECURRENCES {
        let e = ev(&lhs.replace("**", "^"));
        let expected = parse_param_expr(&rhs.replace("**", "^")).map_err(|e| e.to_string())?;
        let eq = a
            .equations
            .get(&e)
            .ok_or_else(|| format!("no equation for {lhs}"))?;
        if eq.rhs_poly() != expected {
            return Err(format!("{lhs}: got {}, expected {rhs}", eq.rhs_poly()));
        }
    }
    Ok(())
}

/// Exact comparison of the closed forms against the reference set.
pub fn check_running_closed_forms(a: &Analysis<Rational>) -> Result<(), String> {
    use prob_moments::symbolic::parse::parse_closed_form;
    for (lhs, rhs) in RUNNING_CLOSED_FORMS {
        let e = ev(lhs);
        let expected = parse_closed_form(rhs).map_err(|e| e.to_string())?;
        let got = a
            .closed_forms()
            .get(&e)
            .ok_or_else(|| format!("no closed form for {lhs}"))?;
        if got != &expected {
            return Err(format!("E[{lhs}]: got {got:?}, expected {rhs}"));
        }
    }
    Ok(())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre polynomial.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre quadrature of `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    panels: usize,
    rule: &[(f64, f64)],
) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * h;
        let mid = a + h / 2.0;
        let part: f64 = rule.iter().map(|(x, w)| w * f(mid + h / 2.0 * x)).sum();
        total += part * h / 2.0;
    }
    total
}

/// Numerically integrated raw moment of `Uniform(a, b)`.
pub fn uniform_moment_quadrature(a: f64, b: f64, k: i32) -> f64 {
    let rule = gauss_legendre(20);
    integrate(|x| x.powi(k), a, b, 1, &rule) / (b - a)
}

/// Numerically integrated raw moment of a normal law with the given variance.
pub fn gauss_moment_quadrature(mu: f64, var: f64, k: i32) -> f64 {
    let rule = gauss_legendre(20);
    let sd = var.sqrt();
    let norm = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let density = |x: f64| norm * (-(x - mu) * (x - mu) / (2.0 * var)).exp();
    integrate(
        |x| x.powi(k) * density(x),
        mu - 16.0 * sd,
        mu + 16.0 * sd,
        256,
        &rule,
    )
}

/// Largest relative error between `rv_raw_moment` and quadrature over
/// `k <= 8` and five random bindings per distribution.
pub fn distribution_moment_error(seed: u64) -> f64 {
    use prob_moments::frontend::Distribution;
    use prob_moments::moments::rv_raw_moment;
    use prob_moments::{Poly, Scalar};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| {
        Rational::new(rng.random_range(lo..=hi).into(), 16.into())
    };
    let (a, b) = (sym("a"), sym("b"));
    let uniform = Distribution::uniform(Poly::var(a.clone()), Poly::var(b.clone()));
    let gauss = Distribution::gauss(Poly::var(a.clone()), Poly::var(b.clone()));
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        // uniform on [lo, hi] with 1/8 <= lo <= 1 and 3/2 <= hi <= 3
        let lo = pick(&mut rng, 2, 16);
        let hi = pick(&mut rng, 24, 48);
        // normal with 1/2 <= |mu| <= 2 and 1/4 <= variance <= 2
        let mut mu = pick(&mut rng, 8, 32);
        if rng.random::<bool>() {
            mu = -mu;
        }
        let var = pick(&mut rng, 4, 32);
        for k in 0..=8u32 {
            let env: HashMap<Symbol, Rational> = [(a.clone(), lo.clone()), (b.clone(), hi.clone())]
                .into_iter()
                .collect();
            let exact = rv_raw_moment(&uniform, k).eval(&env).unwrap().to_f64();
            let num = uniform_moment_quadrature(lo.to_f64(), hi.to_f64(), k as i32);
            worst = worst.max(((exact - num) / exact).abs());

            let env: HashMap<Symbol, Rational> =
                [(a.clone(), mu.clone()), (b.clone(), var.clone())]
                    .into_iter()
                    .collect();
            let exact = rv_raw_moment(&gauss, k).eval(&env).unwrap().to_f64();
            let num = gauss_moment_quadrature(mu.to_f64(), var.to_f64(), k as i32);
            worst = worst.max(((exact - num) / exact).abs());
        }
    }
    worst
}

/// Simulates the running example with `b = 2`, `y(0) = 0` and checks the
/// first and second moments of `x` and `y` and `E[xy]` at `n = 20`.
pub fn running_monte_carlo(trials: usize, seed: u64) -> prob_moments::verifier::VerifyReport {
    use prob_moments::verifier::{check, simulate, SimConfig, DEFAULT_Z};
    let p = load(RUNNING);
    let a = running_goals_1_2();
    let cfg = SimConfig::new(20, trials, seed)
        .bind("b", q("2"))
        .bind("y(0)", q("0"));
    let targets: BTreeSet<EVar> = ["x", "x^2", "y", "x*y", "y^2"]
        .into_iter()
        .map(ev)
        .collect();
    let est = simulate(&p, &cfg, &targets).expect("simulation");
    check(a.closed_forms(), &est, &cfg, DEFAULT_Z)
}
