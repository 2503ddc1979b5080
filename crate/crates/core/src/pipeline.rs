//! Staged application of the transformations, and the prove driver.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::certify::{check_justification, CertifyConfig, Verdict};
use crate::env::Problem;
use crate::reduce::DEFAULT_FUEL;
use crate::smt::{emit_smtlib, extract_fol, run_portfolio, FolProblem, SolverAnswer, SolverConfig};
use crate::state::{Hypothesis, Justification, ProofState};
use crate::syntax::{Name, Term};
use crate::transform::{
    eliminate_fix, eliminate_pattern_matching, expand, get_def, interp_alg_types, monomorphize, TransformError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Adt,
    Def,
    Expand,
    Fix,
    Match,
    Mono,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Adt, Stage::Def, Stage::Expand, Stage::Fix, Stage::Match, Stage::Mono];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Adt => "adt",
            Stage::Def => "def",
            Stage::Expand => "expand",
            Stage::Fix => "fix",
            Stage::Match => "match",
            Stage::Mono => "mono",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage `{s}` (expected one of adt, def, expand, fix, match, mono)"))
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub fuel: u64,
    pub split_depth: usize,
    pub seed: u64,
    pub exhaustiveness: bool,
    pub mono_from_context: bool,
    pub native_adt: bool,
    /// Solvers to run; more than one runs them as a portfolio.
    pub solvers: Vec<SolverConfig>,
    pub max_def_depth: usize,
    pub max_match_rounds: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            fuel: DEFAULT_FUEL,
            split_depth: 2,
            seed: 0,
            exhaustiveness: false,
            mono_from_context: false,
            native_adt: false,
            solvers: vec![SolverConfig::new("z3", "z3", &["-in", "-smt2"])],
            max_def_depth: 16,
            max_match_rounds: 8,
        }
    }
}

impl Config {
    pub fn certify(&self) -> CertifyConfig {
        CertifyConfig { fuel: self.fuel, split_depth: self.split_depth, seed: self.seed, ..CertifyConfig::default() }
    }

    pub fn with_timeout(mut self, t: Duration) -> Self {
        for s in &mut self.solvers {
            s.timeout = t;
        }
        self
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("stage {stage}: {source}")]
    Transform { stage: &'static str, source: TransformError },
    #[error("stage {stage}: justification of `{name}` rejected: {reason}")]
    CertificationFailed { stage: &'static str, name: Name, reason: String },
    #[error("stage def: definitions nested deeper than {0} levels")]
    DefinitionDepth(usize),
    #[error(transparent)]
    NotFirstOrder(#[from] crate::smt::ExtractError),
    #[error("solver error: {0}")]
    Solver(String),
}

/// A stage-by-stage record of the state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub blocks: Vec<(String, String)>,
}

impl Trace {
    fn record(&mut self, stage: &str, state: &ProofState) {
        self.blocks.push((stage.to_string(), state.render()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, body) in &self.blocks {
            out.push_str(&format!("== stage:{name} ==\n{body}"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Scoped {
    pub state: ProofState,
    pub trace: Trace,
    /// Verdict of every generated hypothesis, in order of creation.
    pub verdicts: Vec<(Name, &'static str, Verdict)>,
}

struct Run<'c> {
    state: ProofState,
    cfg: &'c Config,
    trace: Trace,
    verdicts: Vec<(Name, &'static str, Verdict)>,
}

impl Run<'_> {
    fn add(&mut self, h: Hypothesis) -> Option<Name> {
        self.state.push(h)
    }

    /// Certifies hypotheses added since `from`.
    fn certify(&mut self, stage: &'static str, from: usize) -> Result<(), PipelineError> {
        let ctx: Vec<(Name, Term)> = self
            .state
            .hypotheses
            .iter()
            .map(|h| (h.name.clone(), h.statement.clone()))
            .chain(self.state.lemmas.iter().cloned())
            .collect();
        let ccfg = self.cfg.certify();
        let state = &self.state;
        let fresh = &state.hypotheses[from..];
        let verdicts = crate::par::map_slice(fresh, |h| {
            (h.name.clone(), check_justification(&state.env, &h.statement, &h.justification, &ctx, &ccfg))
        });
        for (name, v) in verdicts {
            if let Verdict::Invalid(reason) = &v {
                return Err(PipelineError::CertificationFailed { stage, name, reason: reason.clone() });
            }
            self.verdicts.push((name, stage, v));
        }
        Ok(())
    }

    fn stage(&mut self, st: Stage) -> Result<(), PipelineError> {
        let from = self.state.hypotheses.len();
        let tag = st.name();
        let err = |source| PipelineError::Transform { stage: tag, source };
        match st {
            Stage::Adt => {
                for h in interp_alg_types(&self.state, self.cfg.exhaustiveness) {
                    self.add(h);
                }
            }
            Stage::Def => self.definitions()?,
            Stage::Expand => {
                let names = self.names_where(|h| matches!(h.justification, Justification::ByDefinition(_)));
                for n in names {
                    let h = expand(&self.state, &n).map_err(err)?;
                    self.add(h);
                }
            }
            Stage::Fix => {
                for n in self.names_where(is_equation) {
                    match eliminate_fix(&self.state, &n) {
                        Ok(h) => {
                            self.add(h);
                        }
                        Err(TransformError::NoFixpointFound(_)) => {}
                        Err(e) => return Err(err(e)),
                    }
                }
            }
            Stage::Match => {
                let mut todo = self.names_where(is_equation);
                let mut rounds = 0;
                while !todo.is_empty() && rounds < self.cfg.max_match_rounds {
                    rounds += 1;
                    let mut next = Vec::new();
                    for n in todo {
                        match eliminate_pattern_matching(&self.state, &n) {
                            Ok(hs) => {
                                for h in hs {
                                    if let Some(name) = self.add(h) {
                                        next.push(name);
                                    }
                                }
                            }
                            Err(TransformError::NoMatchOnBoundVar(_) | TransformError::NotAlgebraic(_)) => {}
                            Err(e) => return Err(err(e)),
                        }
                    }
                    todo = next;
                }
            }
            Stage::Mono => {
                let lemmas = self.state.lemmas.clone();
                for h in monomorphize(&self.state, &lemmas, self.cfg.mono_from_context) {
                    self.add(h);
                }
            }
        }
        self.certify(tag, from)
    }

    fn names_where(&self, keep: impl Fn(&Hypothesis) -> bool) -> Vec<Name> {
        self.state.hypotheses.iter().filter(|h| keep(h)).map(|h| h.name.clone()).collect()
    }

    /// Definitions of every constant reachable from the goal, hypotheses
    /// and lemmas, breadth first.
    fn definitions(&mut self) -> Result<(), PipelineError> {
        let mut seen: HashSet<Name> = HashSet::new();
        let mut frontier: Vec<Name> = Vec::new();
        let visit = |t: &Term, frontier: &mut Vec<Name>, seen: &mut HashSet<Name>| {
            t.visit(&mut |s| {
                if let Term::Const(c) = s {
                    if seen.insert(c.clone()) {
                        frontier.push(c.clone());
                    }
                }
            });
        };
        visit(&self.state.goal, &mut frontier, &mut seen);
        for h in &self.state.hypotheses {
            visit(&h.statement, &mut frontier, &mut seen);
        }
        for (_, l) in &self.state.lemmas {
            visit(l, &mut frontier, &mut seen);
        }
        let mut depth = 0;
        while !frontier.is_empty() {
            depth += 1;
            if depth > self.cfg.max_def_depth {
                return Err(PipelineError::DefinitionDepth(self.cfg.max_def_depth));
            }
            let mut next = Vec::new();
            for c in frontier {
                match get_def(&self.state, &c) {
                    Ok(h) => {
                        visit(&h.statement, &mut next, &mut seen);
                        self.add(h);
                    }
                    Err(TransformError::AlreadyPresent(_)) => {}
                    Err(e) => return Err(PipelineError::Transform { stage: "def", source: e }),
                }
            }
            frontier = next;
        }
        Ok(())
    }
}

fn is_equation(h: &Hypothesis) -> bool {
    matches!(h.justification, Justification::ByConversion { .. } | Justification::ByCaseConversion { .. })
}

/// Runs `stages` in the given order, certifying after each; the trace has
/// the input state and one block per stage.
pub fn run_stages(state: ProofState, stages: &[Stage], cfg: &Config) -> Result<Scoped, PipelineError> {
    let mut run = Run { state, cfg, trace: Trace::default(), verdicts: Vec::new() };
    run.trace.record("input", &run.state);
    for &st in stages {
        run.stage(st)?;
        run.trace.record(st.name(), &run.state);
    }
    Ok(Scoped { state: run.state, trace: run.trace, verdicts: run.verdicts })
}

/// Orders a stage subset canonically unless `ordered` is set, dropping
/// repeats.
pub fn select_stages(stages: &[Stage], ordered: bool) -> Vec<Stage> {
    let mut out: Vec<Stage> = Vec::new();
    for s in stages {
        if !out.contains(s) {
            out.push(*s);
        }
    }
    if !ordered {
        out.sort();
    }
    out
}

/// The full strategy: datatype axioms, definitions, expansion, fixpoint
/// and match elimination, monomorphization, and datatype axioms again for
/// instances that appeared on the way.
pub fn scope(state: ProofState, cfg: &Config) -> Result<Scoped, PipelineError> {
    let out = run_stages(state, &Stage::ALL, cfg)?;
    let mut run = Run { state: out.state, cfg, trace: out.trace, verdicts: out.verdicts };
    run.stage(Stage::Adt)?;
    run.trace.record("adt", &run.state);
    Ok(Scoped { state: run.state, trace: run.trace, verdicts: run.verdicts })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Proved,
    NotProved(String),
    Unknown(String),
}

#[derive(Debug, Clone)]
pub struct ProveReport {
    pub scoped: Scoped,
    pub fol: FolProblem,
    pub script: String,
    pub solver: String,
    pub answer: SolverAnswer,
    pub outcome: Outcome,
}

/// Scope, extraction, emission and the solver call.
pub fn prepare(problem: &Problem, cfg: &Config) -> Result<(Scoped, FolProblem, String), PipelineError> {
    let scoped = scope(ProofState::from_problem(problem), cfg)?;
    let fol = extract_fol(&scoped.state)?;
    let script = emit_smtlib(&fol, cfg.native_adt);
    Ok((scoped, fol, script))
}

pub fn prove(problem: &Problem, cfg: &Config) -> Result<ProveReport, PipelineError> {
    let (scoped, fol, script) = prepare(problem, cfg)?;
    if cfg.solvers.is_empty() {
        return Err(PipelineError::Solver("no solver configured".into()));
    }
    let (solver, answer) = run_portfolio(&script, &cfg.solvers);
    let outcome = match &answer {
        SolverAnswer::Unsat => Outcome::Proved,
        SolverAnswer::Sat => Outcome::NotProved("sat".into()),
        SolverAnswer::Unknown => Outcome::Unknown("unknown".into()),
        SolverAnswer::Timeout => Outcome::Unknown("timeout".into()),
        SolverAnswer::SolverError(e) => return Err(PipelineError::Solver(e.clone())),
    };
    Ok(ProveReport { scoped, fol, script, solver, answer, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("nope".parse::<Stage>().is_err());
        assert_eq!(select_stages(&[Stage::Mono, Stage::Def, Stage::Mono], false), vec![Stage::Def, Stage::Mono]);
        assert_eq!(select_stages(&[Stage::Mono, Stage::Def], true), vec![Stage::Mono, Stage::Def]);
    }

    #[test]
    fn first_order_goal_untouched() {
        let p = parse_problem("goal forall (x : Int), x + 0 = x.").unwrap();
        let s = ProofState::from_problem(&p);
        let out = scope(s.clone(), &Config::default()).unwrap();
        assert!(out.state.hypotheses.is_empty());
        assert_eq!(out.state.goal, s.goal);
    }

    #[test]
    fn scope_is_idempotent() {
        let p = parse_problem(
            "data list A = nil | cons (A) (list A).
             def len (A : Type) : list A -> Int =
               fix len / 0 (l : list A) : Int := match l with | nil => 0 | cons _ r => 1 + len r end.
             goal forall (l : list Int), len Int l = len Int l.",
        )
        .unwrap();
        let cfg = Config::default();
        let once = scope(ProofState::from_problem(&p), &cfg).unwrap();
        let n = once.state.hypotheses.len();
        let twice = scope(once.state, &cfg).unwrap();
        assert_eq!(twice.state.hypotheses.len(), n);
        assert!(twice.state.hypothesis("len_cons_Int").is_some());
    }
}
