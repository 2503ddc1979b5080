//! Solver round trips. These need `z3` on PATH.

use std::fmt::Write;
use std::time::Duration;

use folbridge::parse::parse_problem;
use folbridge::pipeline::{self, Config, Outcome};
use folbridge::smt::{emit_smtlib, extract_fol, run_portfolio, run_solver, SolverAnswer, SolverConfig};
use folbridge::state::ProofState;

fn z3() -> SolverConfig {
    SolverConfig::new("z3", "z3", &["-in", "-smt2"]).with_timeout(Duration::from_secs(10))
}

/// `n + 1` pigeons in `n` holes.
fn pigeonhole(n: usize) -> String {
    let mut s = String::from("(set-logic QF_UF)\n");
    for p in 0..=n {
        for h in 0..n {
            let _ = writeln!(s, "(declare-fun p{p}h{h} () Bool)");
        }
        let holes: Vec<String> = (0..n).map(|h| format!("p{p}h{h}")).collect();
        let _ = writeln!(s, "(assert (or {}))", holes.join(" "));
    }
    for h in 0..n {
        for p in 0..=n {
            for q in p + 1..=n {
                let _ = writeln!(s, "(assert (not (and p{p}h{h} p{q}h{h})))");
            }
        }
    }
    s.push_str("(check-sat)\n");
    s
}

#[test]
fn basic_answers() {
    assert_eq!(run_solver("(assert true)\n(check-sat)\n", &z3()), SolverAnswer::Sat);
    assert_eq!(run_solver("(assert false)\n(check-sat)\n", &z3()), SolverAnswer::Unsat);
    assert!(matches!(run_solver("(assert (= x))\n(check-sat)\n", &z3()), SolverAnswer::SolverError(_)));
}

#[test]
fn zero_timeout_kills_the_solver() {
    let cfg = z3().with_timeout(Duration::ZERO);
    assert_eq!(run_solver(&pigeonhole(12), &cfg), SolverAnswer::Timeout);
}

#[test]
fn portfolio_returns_a_definitive_answer() {
    let slow = z3().with_timeout(Duration::ZERO);
    let (name, answer) = run_portfolio("(assert false)\n(check-sat)\n", &[slow, SolverConfig { name: "z3b".into(), ..z3() }]);
    assert_eq!((name.as_str(), answer), ("z3b", SolverAnswer::Unsat));
}

#[test]
fn trivial_problem_is_unsat() {
    let p = parse_problem("goal true = true.").unwrap();
    let fol = extract_fol(&ProofState::from_problem(&p)).unwrap();
    assert!(fol.axioms.is_empty());
    assert_eq!(run_solver(&emit_smtlib(&fol, false), &z3()), SolverAnswer::Unsat);
}

#[test]
fn arithmetic_goal_without_context() {
    let p = parse_problem("goal forall (x : Int), x + 0 = x.").unwrap();
    let report = pipeline::prove(&p, &Config { solvers: vec![z3()], ..Config::default() }).unwrap();
    assert_eq!(report.outcome, Outcome::Proved);
    assert!(report.fol.axioms.is_empty());
}

#[test]
fn higher_order_hypothesis_is_skipped() {
    let p = parse_problem(
        "def f (x : Int) : Int = x.
         def g (x : Int) : Int = x.
         hyp fg : f = g.
         goal forall (x : Int), f x = f x.",
    )
    .unwrap();
    let fol = extract_fol(&ProofState::from_problem(&p)).unwrap();
    assert_eq!(fol.skipped.len(), 1);
    assert_eq!(&*fol.skipped[0].0, "fg");
}
