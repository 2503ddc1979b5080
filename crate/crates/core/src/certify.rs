//! Checks the justification attached to each generated hypothesis.
//!
//! Conversion-based evidence is replayed symbolically: universal binders
//! are introduced as fresh opaque symbols and both sides of the resulting
//! equation are compared by normalization, optionally after one rewrite
//! pass with the cited source equation and after case splits. Datatype
//! axioms are regenerated from the declaration and then truth-tested.

use std::fmt;

use crate::env::GlobalEnv;
use crate::eval::{truth_test, truth_test_seq, TruthOptions};
use crate::reduce::{convertible, whnf, Fuel, DEFAULT_FUEL};
use crate::state::{Justification, ProofState};
use crate::syntax::{instantiate, lift, subst, unlift, Name, Telescope, Term};
use crate::transform::axiom_statement;

#[derive(Debug, Clone, Copy)]
pub struct CertifyConfig {
    pub fuel: u64,
    /// Largest accepted case-split depth.
    pub split_depth: usize,
    /// Random instantiations for datatype axioms.
    pub samples: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { fuel: DEFAULT_FUEL, split_depth: 2, samples: 100, seed: 0, parallel: true }
    }
}

/// How a valid justification was discharged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Route {
    Given,
    Definition,
    Conversion,
    /// Conversion after rewriting with the source equation.
    Rewrite,
    CaseSplit { leaves: usize },
    Instantiation,
    Axiom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid(Route),
    Invalid(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid(Route::CaseSplit { leaves }) => write!(f, "Valid (case split, {leaves} leaves)"),
            Verdict::Valid(r) => write!(f, "Valid ({})", format!("{r:?}").to_lowercase()),
            Verdict::Invalid(why) => write!(f, "Invalid: {why}"),
        }
    }
}

/// An oriented rewrite rule `forall xs, lhs = rhs` with `xs` as pattern
/// variables (`Var(i)` for `i < arity` at depth 0).
struct Rule {
    arity: usize,
    lhs: Term,
    rhs: Term,
}

impl Rule {
    fn from_statement(t: &Term) -> Option<Rule> {
        let tele = Telescope::of(t);
        let arity = tele.len();
        match tele.body {
            Term::Eq(_, l, r) => Some(Rule { arity, lhs: *l, rhs: *r }),
            _ => None,
        }
    }

    /// Rewrites every outermost redex once.
    fn rewrite(&self, t: &Term, depth: usize) -> (Term, bool) {
        let mut sigma = vec![None; self.arity];
        if matches(&self.lhs, t, depth, 0, &mut sigma) && sigma.iter().all(Option::is_some) {
            let args: Vec<Term> = sigma.iter().rev().flatten().map(|s| lift(s, depth, 0)).collect();
            return (instantiate(&self.rhs, &args), true);
        }
        let b = Box::new;
        let mut hit = false;
        let mut go = |x: &Term, d: usize| {
            let (r, h) = self.rewrite(x, d);
            hit |= h;
            r
        };
        let out = match t {
            Term::App(f, a) => Term::App(b(go(f, depth)), b(go(a, depth))),
            Term::Eq(ty, x, y) => Term::Eq(ty.clone(), b(go(x, depth)), b(go(y, depth))),
            Term::Lam(h, d, body) => Term::Lam(h.clone(), d.clone(), b(go(body, depth + 1))),
            Term::Match(m) => {
                let mut m = (**m).clone();
                m.scrutinee = go(&m.scrutinee, depth);
                for br in &mut m.branches {
                    let n = br.arity();
                    br.body = go(&br.body, depth + n);
                }
                Term::Match(Box::new(m))
            }
            other => other.clone(),
        };
        (out, hit)
    }
}

/// First-order matching of a rule side against `t` seen under `depth`
/// local binders; `pdepth` counts binders crossed inside the pattern.
fn matches(p: &Term, t: &Term, depth: usize, pdepth: usize, sigma: &mut [Option<Term>]) -> bool {
    let n = sigma.len();
    match (p, t) {
        (Term::Var(i), _) if *i >= pdepth && *i - pdepth < n => {
            // Pattern variable; the instance must not mention local binders.
            let Some(v) = unlift(t, depth + pdepth, 0) else { return false };
            let slot = &mut sigma[*i - pdepth];
            match slot {
                Some(prev) => *prev == v,
                None => {
                    *slot = Some(v);
                    true
                }
            }
        }
        (Term::Var(i), Term::Var(j)) => i == j,
        (Term::App(f, a), Term::App(g, b)) => {
            matches(f, g, depth, pdepth, sigma) && matches(a, b, depth, pdepth, sigma)
        }
        (Term::App(..), _) | (Term::Var(_), _) => false,
        _ => p == t && p.is_closed(),
    }
}

struct Intro {
    /// Opaque symbols standing for the object and type binders, by
    /// telescope position; `None` for premises.
    symbols: Vec<Option<(Term, Term)>>,
    conclusion: Term,
    counter: usize,
}

fn fresh(counter: &mut usize) -> Term {
    *counter += 1;
    Term::Param(format!("%{}", *counter).into())
}

fn is_proposition(t: &Term) -> bool {
    match t {
        Term::Eq(..) | Term::True | Term::False | Term::And(..) | Term::Or(..) | Term::Not(..) | Term::Exists(..) => true,
        Term::Pi(_, _, b) => is_proposition(b),
        _ => false,
    }
}

fn intro(t: &Term) -> Intro {
    let mut symbols = Vec::new();
    let mut counter = 0;
    let mut cur = t.clone();
    while let Term::Pi(_, dom, body) = cur {
        if is_proposition(&dom) {
            // Premises are not needed to close the conclusion.
            symbols.push(None);
            cur = subst(&body, 0, &Term::True);
        } else {
            let s = fresh(&mut counter);
            symbols.push(Some((s.clone(), *dom)));
            cur = subst(&body, 0, &s);
        }
    }
    Intro { symbols, conclusion: cur, counter }
}

struct Closer<'a> {
    env: &'a GlobalEnv,
    rule: Option<Rule>,
    fuel: u64,
}

impl Closer<'_> {
    /// Conversion, then conversion after a rewrite pass.
    fn close(&self, goal: &Term) -> Result<Option<Route>, String> {
        let Term::Eq(_, l, r) = goal else {
            return Err("conclusion is not an equation".into());
        };
        let conv = |a: &Term, b: &Term| -> Result<bool, String> {
            convertible(self.env, a, b, &mut Fuel::new(self.fuel)).map_err(|e| e.to_string())
        };
        if conv(l, r)? {
            return Ok(Some(Route::Conversion));
        }
        if let Some(rule) = &self.rule {
            let (l2, hl) = rule.rewrite(l, 0);
            let (r2, hr) = rule.rewrite(r, 0);
            if (hl || hr) && conv(&l2, &r2)? {
                return Ok(Some(Route::Rewrite));
            }
        }
        Ok(None)
    }

    /// Splits pending variables into constructor cases until every leaf
    /// closes. Pending entries carry their split level.
    fn split(
        &self,
        goal: &Term,
        mut pending: Vec<(Term, Term, usize)>,
        depth: usize,
        counter: &mut usize,
    ) -> Result<usize, String> {
        if self.close(goal)?.is_some() {
            return Ok(1);
        }
        pending.retain(|(_, _, level)| *level < depth);
        if pending.is_empty() {
            return Err(format!("leaf does not close by conversion: {goal}"));
        }
        let (sym, ty, level) = pending.remove(0);
        let ty = whnf(self.env, &ty, &mut Fuel::new(self.fuel)).map_err(|e| e.to_string())?;
        let Some((ind, params)) = ty.as_ind_app() else {
            return Err(format!("cannot split a variable of type {ty}"));
        };
        let decl = self.env.inductive(ind).ok_or_else(|| format!("unknown inductive {ind}"))?;
        let params: Vec<Term> = params.into_iter().cloned().collect();
        let Term::Param(sym_name) = &sym else { unreachable!() };
        let mut leaves = 0;
        for k in 0..decl.ctors.len() {
            let mut next = pending.clone();
            let mut fields = Vec::new();
            for a in decl.ctor_arg_types(k, &params) {
                let f = fresh(counter);
                next.push((f.clone(), a, level + 1));
                fields.push(f);
            }
            let value = Term::apps(Term::Ctor(decl.name.clone(), k), params.iter().cloned().chain(fields));
            let case = goal.replace_param(sym_name, &value);
            let next = next.into_iter().map(|(s, t, l)| (s, t.replace_param(sym_name, &value), l)).collect();
            leaves += self.split(&case, next, depth, counter)?;
        }
        Ok(leaves)
    }
}

/// Checks one justification. `context` resolves cited source statements.
pub fn check_justification(
    env: &GlobalEnv,
    statement: &Term,
    j: &Justification,
    context: &[(Name, Term)],
    cfg: &CertifyConfig,
) -> Verdict {
    match check(env, statement, j, context, cfg) {
        Ok(r) => Verdict::Valid(r),
        Err(why) => Verdict::Invalid(why),
    }
}

fn source<'c>(context: &'c [(Name, Term)], name: &str) -> Result<&'c Term, String> {
    context.iter().find(|(n, _)| &**n == name).map(|(_, t)| t).ok_or_else(|| format!("unknown source `{name}`"))
}

fn check(
    env: &GlobalEnv,
    statement: &Term,
    j: &Justification,
    context: &[(Name, Term)],
    cfg: &CertifyConfig,
) -> Result<Route, String> {
    let rule_of = |src: &Option<Name>| -> Result<Option<Rule>, String> {
        match src {
            Some(n) => Ok(Rule::from_statement(source(context, n)?)),
            None => Ok(None),
        }
    };
    match j {
        Justification::Given => Ok(Route::Given),
        Justification::ByDefinition(c) => {
            let def = env.definition(c).ok_or_else(|| format!("unknown constant `{c}`"))?;
            let expected = Term::eq(def.ty.clone(), Term::Const(def.name.clone()), def.body.clone());
            if *statement == expected {
                Ok(Route::Definition)
            } else {
                Err(format!("statement is not the definition of `{c}`"))
            }
        }
        Justification::ByConversion { source } => {
            let closer = Closer { env, rule: rule_of(source)?, fuel: cfg.fuel };
            let it = intro(statement);
            closer.close(&it.conclusion)?.ok_or_else(|| "sides are not convertible".to_string())
        }
        Justification::ByCaseConversion { source, split_vars, depth } => {
            if *depth > cfg.split_depth {
                return Err(format!("split depth {depth} exceeds the limit {}", cfg.split_depth));
            }
            let closer = Closer { env, rule: rule_of(source)?, fuel: cfg.fuel };
            let mut it = intro(statement);
            let mut pending = Vec::new();
            for &pos in split_vars {
                match it.symbols.get(pos) {
                    Some(Some((s, ty))) => pending.push((s.clone(), ty.clone(), 0)),
                    _ => return Err(format!("no universally bound variable at position {pos}")),
                }
            }
            let leaves = closer.split(&it.conclusion, pending, *depth, &mut it.counter)?;
            Ok(if leaves == 1 && split_vars.is_empty() { Route::Conversion } else { Route::CaseSplit { leaves } })
        }
        Justification::ByInstantiation { source: src, type_args } => {
            let s = source(context, src)?;
            let tele = Telescope::of_while(s, |d| *d == Term::Type);
            if tele.len() < type_args.len() {
                return Err("source has fewer type binders than arguments".into());
            }
            let body = crate::syntax::rebuild_pi(&tele.binders[type_args.len()..], tele.body.clone());
            if instantiate(&body, type_args) == *statement {
                Ok(Route::Instantiation)
            } else {
                Err("statement is not the instance of its source".into())
            }
        }
        Justification::DatatypeAxiom { instance, kind } => {
            let expected = axiom_statement(env, instance, kind).ok_or("no such axiom for this instance")?;
            if expected != *statement {
                return Err("statement does not have the axiom's shape".into());
            }
            let opts = TruthOptions { samples: cfg.samples.max(100), max_size: 6, seed: cfg.seed };
            let test = if cfg.parallel { truth_test } else { truth_test_seq };
            let report = test(env, statement, opts).map_err(|e| e.to_string())?;
            match report.counterexample {
                None => Ok(Route::Axiom),
                Some(c) => Err(format!("axiom refuted: {c}")),
            }
        }
    }
}

fn context_of(state: &ProofState) -> Vec<(Name, Term)> {
    state
        .hypotheses
        .iter()
        .map(|h| (h.name.clone(), h.statement.clone()))
        .chain(state.lemmas.iter().cloned())
        .collect()
}

/// Verdicts for every hypothesis of `state`, in order, checked in parallel.
pub fn check_state(state: &ProofState, cfg: &CertifyConfig) -> Vec<(Name, Verdict)> {
    let ctx = context_of(state);
    crate::par::map_slice(&state.hypotheses, |h| {
        (h.name.clone(), check_justification(&state.env, &h.statement, &h.justification, &ctx, cfg))
    })
}

/// Sequential [`check_state`].
pub fn check_state_seq(state: &ProofState, cfg: &CertifyConfig) -> Vec<(Name, Verdict)> {
    let ctx = context_of(state);
    let cfg = &CertifyConfig { parallel: false, ..*cfg };
    crate::par::map_slice_seq(&state.hypotheses, |h| {
        (h.name.clone(), check_justification(&state.env, &h.statement, &h.justification, &ctx, cfg))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_problem, parse_term_in};
    use crate::state::{AxiomKind, Hypothesis};
    use crate::transform::{eliminate_fix, eliminate_pattern_matching, expand, get_def};

    const SRC: &str = "
        data nat = O | S (nat).
        data list A = nil | cons (A) (list A).
        data option A = none | some (A).
        def hd_error (A : Type) (l : list A) : option A = match l with | nil => none A | cons x _ => some A x end.
        def length (A : Type) : list A -> nat =
          fix length / 0 (l : list A) : nat :=
            match l with | nil => O | cons _ l' => S (length l') end.
        goal True.";

    fn run(state: &mut ProofState, h: Result<Hypothesis, crate::transform::TransformError>) -> Name {
        state.push(h.unwrap()).unwrap()
    }

    #[test]
    fn pipeline_pieces_validate() {
        let mut s = ProofState::from_problem(&parse_problem(SRC).unwrap());
        let cfg = CertifyConfig::default();
        for c in ["hd_error", "length"] {
            let h = get_def(&s, c);
            let d = run(&mut s, h);
            let h = expand(&s, &d);
            let e = run(&mut s, h);
            let m = if c == "length" {
                let h = eliminate_fix(&s, &e);
                run(&mut s, h)
            } else {
                e
            };
            for h in eliminate_pattern_matching(&s, &m).unwrap() {
                s.push(h);
            }
        }
        for (n, v) in check_state(&s, &cfg) {
            assert!(v.is_valid(), "{n}: {v}");
        }
        let verdicts = check_state(&s, &cfg);
        let (_, fix) = verdicts.iter().find(|(n, _)| &**n == "length_fix").unwrap();
        assert!(matches!(fix, Verdict::Valid(Route::CaseSplit { leaves: 2 })), "{fix}");
    }

    #[test]
    fn false_equation_rejected() {
        let env = GlobalEnv::new();
        let st = parse_term_in(&env, &[], "0 = 1").unwrap();
        let v = check_justification(&env, &st, &Justification::ByConversion { source: None }, &[], &CertifyConfig::default());
        assert!(!v.is_valid());
    }

    #[test]
    fn wrong_axiom_rejected() {
        let p = parse_problem(SRC).unwrap();
        let inst = parse_term_in(&p.env, &[], "list Int").unwrap();
        // Disjointness statement certified as injectivity.
        let st = axiom_statement(&p.env, &inst, &AxiomKind::Disjointness(0, 1)).unwrap();
        let j = Justification::DatatypeAxiom { instance: inst, kind: AxiomKind::Injectivity(1) };
        assert!(!check_justification(&p.env, &st, &j, &[], &CertifyConfig::default()).is_valid());
    }

    #[test]
    fn depth_limit() {
        let env = GlobalEnv::new();
        let st = parse_term_in(&env, &[], "true = true").unwrap();
        let j = Justification::ByCaseConversion { source: None, split_vars: vec![], depth: 3 };
        assert!(!check_justification(&env, &st, &j, &[], &CertifyConfig::default()).is_valid());
    }
}
