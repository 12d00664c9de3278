//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;

struct Outcome {
    id: u32,
    title: &'static str,
    result: Result<String, String>,
    elapsed: Duration,
    budget: Duration,
}

fn criterion<F: FnOnce() -> Result<String, String>>(
    id: u32,
    title: &'static str,
    budget_secs: u64,
    f: F,
) -> Outcome {
    let start = Instant::now();
    let result = f();
    Outcome {
        id,
        title,
        result,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_secs),
    }
}

fn recurrences() -> Result<String, String> {
    let a = running_goals_1_2();
    check_running_recurrences(&a)?;
    Ok(format!("{} equations equal", a.equations.len()))
}

fn closed_forms() -> Result<String, String> {
    let a = running_goals_1_2();
    check_running_closed_forms(&a)?;
    Ok(format!("{} closed forms equal", RUNNING_CLOSED_FORMS.len()))
}

fn self_check() -> Result<String, String> {
    let s = corpus_self_check()?;
    if s.programs < 11 {
        return Err(format!("only {} programs in corpus", s.programs));
    }
    for c in ["0", "1", "1/2", "-1/2", "2"] {
        if !s.self_coeffs.contains(&q(c)) {
            return Err(format!("no recurrence with self-coefficient {c}"));
        }
    }
    if s.resonant == 0 || s.non_resonant == 0 {
        return Err(format!(
            "resonant {} / non-resonant {}",
            s.resonant, s.non_resonant
        ));
    }
    Ok(format!(
        "{} programs, {} recurrences ({} resonant, {} non-resonant)",
        s.programs, s.solved, s.resonant, s.non_resonant
    ))
}

fn iteration() -> Result<String, String> {
    let n = corpus_iteration_oracle(25, 3)?;
    Ok(format!("{n} exact comparisons for n <= 25"))
}

fn distributions() -> Result<String, String> {
    let err = distribution_moment_error(7);
    if err <= 1e-9 {
        Ok(format!("max relative error {err:.1e}"))
    } else {
        Err(format!("max relative error {err:.1e} exceeds 1e-9"))
    }
}

fn monte_carlo() -> Result<String, String> {
    let r = running_monte_carlo(100_000, 20_240_601);
    let summary: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("{} {:.4}/{:.4}", row.evar, row.mean, row.exact))
        .collect();
    if r.rows.len() == 5 && r.all_pass() {
        Ok(summary.join(", "))
    } else {
        Err(format!("{r:?}"))
    }
}

fn third_moments() -> Result<String, String> {
    let a = analyze_up_to(&load(RUNNING), 3);
    for e in ["x^3", "y^3", "u^3", "g^3"] {
        if !a.closed_forms().contains_key(&ev(e)) {
            return Err(format!("E[{e}] missing"));
        }
    }
    Ok(format!("{} E-variables solved", a.closed_forms().len()))
}

fn rejections() -> Result<String, String> {
    let cases = [
        (
            "clash",
            "y = b\nwhile true:\n  b = b + 1\n  y = y + b\n",
            "[distinct variables]",
        ),
        (
            "sum",
            "x = 0\nwhile true:\n  x = x + 1 @ 1/3; x @ 1/3\n",
            "[probabilities sum to 1]",
        ),
        (
            "nonlinear",
            "x = 1\nwhile true:\n  x = x*x\n",
            "[linear self-dependence]",
        ),
        (
            "forward",
            "x = 0\ny = 0\nwhile true:\n  x = y*x + 1\n  y = y + 1\n",
            "[dependence on earlier variables only]",
        ),
    ];
    let dir = std::env::temp_dir().join(format!("prob-moments-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    for (name, src, tag) in cases {
        let path = dir.join(format!("{name}.prob"));
        std::fs::write(&path, src).map_err(|e| e.to_string())?;
        let o = Command::new(env!("CARGO_BIN_EXE_prob-moments"))
            .arg(&path)
            .args(["--goal", "1"])
            .output()
            .map_err(|e| e.to_string())?;
        let err = String::from_utf8_lossy(&o.stderr);
        if o.status.code() != Some(3) || !err.contains(tag) {
            return Err(format!(
                "{name}: exit {:?}, stderr `{}`",
                o.status.code(),
                err.trim()
            ));
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok("clash, probability sum, nonlinear and forward dependence rejected with exit 3".into())
}

fn main() {
    let outcomes = [
        criterion(1, "running-example recurrences", 5, recurrences),
        criterion(2, "running-example closed forms", 5, closed_forms),
        criterion(3, "symbolic self-check over corpus", 30, self_check),
        criterion(4, "iteration oracle over corpus", 30, iteration),
        criterion(5, "distribution moments vs quadrature", 60, distributions),
        criterion(6, "Monte-Carlo agreement", 60, monte_carlo),
        criterion(7, "third moments of running example", 10, third_moments),
        criterion(8, "validation rejection suite", 60, rejections),
    ];
    let mut failed = 0;
    for o in &outcomes {
        let in_time = o.elapsed <= o.budget;
        let (status, detail) = match (&o.result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {:?} budget", o.budget)),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {}: {status} {} [{:.3} s] {detail}",
            o.id,
            o.title,
            o.elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
