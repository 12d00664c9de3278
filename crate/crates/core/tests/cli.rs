mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use prob_moments::emit::read_json;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prob-moments"))
}

fn write_temp(name: &str, src: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prob-moments-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, src).unwrap();
    path
}

fn run(path: &Path, args: &[&str]) -> Output {
    bin().arg(path).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn txt_report_for_running_example() {
    let o = run(
        &programs_dir().join("running.prob"),
        &["--goal", "1", "--goal", "2"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("program: running"));
    assert!(out.lines().any(|l| l == "E[x^2] = b^2*n/3"));
    assert!(out.lines().any(|l| l == "E[x^1] = 0"));
    assert!(out
        .lines()
        .any(|l| l.starts_with("time: ") && l.ends_with(" s")));
}

#[test]
fn tex_report_has_math_lines() {
    let o = run(
        &programs_dir().join("running.prob"),
        &["--goal", "1,2", "--format", "tex"],
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("\\[ E[x^{2}] = \\frac{b^{2} n}{3} \\]"),
        "{out}"
    );
    assert_eq!(out.lines().filter(|l| l.starts_with("\\[")).count(), 9);
}

#[test]
fn json_output_file_round_trips() {
    let out = std::env::temp_dir().join(format!("prob-moments-{}.json", std::process::id()));
    let o = run(
        &programs_dir().join("running.prob"),
        &[
            "--goal",
            "x^2",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let report = read_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.goals, vec!["x^2".to_string()]);
    assert!(report.invariants.contains_key(&ev("x^2")));
    std::fs::remove_file(out).ok();
}

#[test]
fn verification_is_appended() {
    let o = run(
        &programs_dir().join("running.prob"),
        &[
            "--goal", "x^2", "--verify", "--param", "b=2", "--param", "y(0)=0", "--iters", "20",
            "--trials", "20000", "--seed", "3",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("verification: n = 20, trials = 20000, seed = 3"),
        "{out}"
    );
    assert!(out.contains("PASS E[x^2]"), "{out}");
}

#[test]
fn unbound_verification_parameter_is_a_usage_error() {
    let o = run(
        &programs_dir().join("running.prob"),
        &["--goal", "1", "--verify"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not bound"), "{}", stderr(&o));
}

#[test]
fn syntax_error_exits_2() {
    let p = write_temp("syntax.prob", "x = 0\nwhile true:\nx = x + * 2\n");
    let o = run(&p, &["--goal", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("3:"), "{}", stderr(&o));
}

#[test]
fn missing_file_exits_2() {
    let o = run(Path::new("/nonexistent/prog.prob"), &["--goal", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_goals_exit_2() {
    let p = programs_dir().join("running.prob");
    assert_eq!(run(&p, &["--goal", "0"]).status.code(), Some(2));
    assert_eq!(run(&p, &["--goal", "z^2"]).status.code(), Some(2));
    assert_eq!(run(&p, &[]).status.code(), Some(2));
}

#[test]
fn probability_sum_violation_exits_3() {
    let p = write_temp("prob.prob", "x=0\nwhile true:\nx = x+1 @ 1/3; x @ 1/3\n");
    let o = run(&p, &["--goal", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(
        stderr(&o).contains("[probabilities sum to 1]"),
        "{}",
        stderr(&o)
    );
    assert!(stderr(&o).contains("sum to 2/3, not 1"));
}

#[test]
fn closure_cap_exits_4() {
    let o = run(
        &programs_dir().join("running.prob"),
        &["--goal", "2", "--max-closure", "3"],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("3"), "{}", stderr(&o));
}

#[test]
fn unresolved_parametric_base_exits_4() {
    // The growth rate `a` of x may or may not equal the rate 1 of the
    // constant forcing; the solver refuses to guess.
    let p = write_temp("param_base.prob", "x = 0\nwhile true:\nx = a*x + 1\n");
    let o = run(&p, &["--goal", "1"]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
}
