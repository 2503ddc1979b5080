use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.fol")).display().to_string()
}

fn cmd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_folbridge"));
    c.env_remove("FOLBRIDGE_CONFIG").env_remove("FOLBRIDGE_SOLVER");
    c
}

fn run(args: &[&str]) -> Output {
    cmd().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes_over_the_corpus() {
    let expect = [
        ("hd_error", 0),
        ("search_lemma", 0),
        ("search_app_nil", 0),
        ("search_app_cons", 0),
        ("length_app", 0),
        ("pair_swap", 0),
        ("arith", 0),
        ("trivial", 0),
        ("false_goal", 1),
        ("exists", 2),
    ];
    for (name, code) in expect {
        let o = run(&["prove", &corpus(name), "--timeout", "10"]);
        assert_eq!(o.status.code(), Some(code), "{name}: {}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&["prove", &corpus("hd_error")]);
    assert_eq!(stdout(&o).trim(), "Proved (unsat)");
}

#[test]
fn errors_exit_with_two() {
    assert_eq!(run(&["prove", "/nonexistent.fol"]).status.code(), Some(2));
    assert_eq!(run(&["prove", &corpus("hd_error"), "--solver", "nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["transform", &corpus("hd_error"), "--only", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn emit_writes_sorts_and_mangled_symbols() {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("hd.smt2");
    let o = run(&["emit", &corpus("hd_error"), "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let script = std::fs::read_to_string(&out).unwrap();
    assert!(script.starts_with("(set-logic UFLIA)\n"));
    assert!(script.contains("(declare-sort A 0)\n"));
    assert!(script.contains("(declare-fun cons$A (A list$A) list$A)\n"));
    assert!(script.trim_end().ends_with("(check-sat)\n(exit)"));

    let native = stdout(&run(&["emit", &corpus("hd_error"), "--native-adt"]));
    assert!(native.starts_with("(set-logic UFDTLIA)\n"));
    assert!(native.contains("(declare-datatypes ("));
    assert!(!native.contains("_inj_"));
}

#[test]
fn transform_orders_stages_unless_asked() {
    let file = corpus("hd_error");
    let canonical = stdout(&run(&["transform", &file, "--only", "match,expand,def", "--trace"]));
    let headers: Vec<&str> = canonical.lines().filter(|l| l.starts_with("== ")).collect();
    assert_eq!(headers, ["== stage:input ==", "== stage:def ==", "== stage:expand ==", "== stage:match =="]);
    assert!(canonical.contains("hd_error_cons : forall (A : Type) (x : A) (l : list A), hd_error A (cons A x l) = some A x"));

    let ordered = stdout(&run(&["transform", &file, "--only", "expand,def", "--ordered", "--trace"]));
    let headers: Vec<&str> = ordered.lines().filter(|l| l.starts_with("== ")).collect();
    assert_eq!(headers, ["== stage:input ==", "== stage:expand ==", "== stage:def =="]);
    // Expansion before any definition is present has nothing to expand.
    assert!(!ordered.contains("hd_error_eqn"));
}

#[test]
fn scope_without_trace_prints_final_state() {
    let out = stdout(&run(&["scope", &corpus("hd_error")]));
    assert!(!out.contains("== stage:"));
    assert!(out.lines().last().unwrap().starts_with("goal : "));
    assert!(out.contains("option_A_disj_none_some : forall (y : A), none A <> some A y"));
}

#[test]
fn audit_lists_every_generated_hypothesis() {
    let o = run(&["audit", &corpus("length_app")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.split('\t').count() == 4 && l.contains("Valid")));
    assert!(text.lines().any(|l| l.starts_with("length_fix\tfix\tcase-conversion\tValid (case split")));
    assert!(text.lines().any(|l| l.starts_with("nat_inj_S\tadt\tdatatype-axiom\t")));
}

#[test]
fn exhaustiveness_only_with_flag() {
    let plain = stdout(&run(&["scope", &corpus("pair_swap")]));
    assert!(!plain.contains("_exh :"));
    let with = stdout(&run(&["scope", &corpus("pair_swap"), "--exhaustiveness"]));
    assert!(with.contains("pair_Int_bool_exh : forall (v : pair Int bool), exists (x : Int) (x0 : bool), v = mk Int bool x x0"));
}

#[test]
fn solver_configuration_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("solvers.toml");
    std::fs::write(
        &cfg,
        "default = \"viafile\"\n[solvers.viafile]\nexecutable = \"z3\"\nargs = [\"-smt2\", \"{file}\"]\ntimeout_s = 10\ninput = \"file\"\n",
    )
    .unwrap();
    let o = run(&["prove", &corpus("trivial"), "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cmd().args(["prove", &corpus("trivial")]).env("FOLBRIDGE_CONFIG", &cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = cmd().args(["prove", &corpus("trivial")]).env("FOLBRIDGE_SOLVER", "nosuch").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn portfolio_of_two_solvers() {
    let o = run(&["prove", &corpus("search_lemma"), "--solver", "z3,cvc5-smt2", "--timeout", "10"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn same_seed_same_script() {
    let a = run(&["emit", &corpus("search_lemma"), "--seed", "5"]);
    let b = run(&["emit", &corpus("search_lemma"), "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
}
