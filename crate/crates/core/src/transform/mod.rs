//! The context-extending transformations. Each takes a [`ProofState`] and
//! returns new hypotheses with their justifications; none of them touches
//! the goal or existing hypotheses.

use thiserror::Error;

use crate::syntax::{instantiate, Branch, Match, Name, Term};

mod adt;
mod definitions;
mod expand;
mod fixpoint;
mod mono;
mod pattern;

pub use adt::{axiom_statement, interp_alg_types, is_interpreted};
pub use definitions::get_def;
pub use expand::{arrow_split, expand, gen_eq, gen_eq_named};
pub use fixpoint::eliminate_fix;
pub use mono::{collect_type_instances, instance_suffix, monomorphize};
pub use pattern::eliminate_pattern_matching;

#[allow(unused_imports)]
pub(crate) use crate::state::{Hypothesis, Justification, ProofState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(Name),
    #[error("unknown hypothesis `{0}`")]
    UnknownHypothesis(Name),
    #[error("the definition of `{0}` is already in the context")]
    AlreadyPresent(Name),
    #[error("`{0}` is not an equation")]
    NotAnEquation(Name),
    #[error("no fixpoint to eliminate in `{0}`")]
    NoFixpointFound(Name),
    #[error("no match on a universally bound variable in `{0}`")]
    NoMatchOnBoundVar(Name),
    #[error("the matched variable of `{0}` does not have an algebraic type")]
    NotAlgebraic(Name),
}

pub(crate) fn lookup<'s>(state: &'s ProofState, name: &str) -> Result<&'s Term, TransformError> {
    state.statement(name).ok_or_else(|| TransformError::UnknownHypothesis(name.into()))
}

/// Strips a transformation suffix so derived names stay short.
pub(crate) fn stem(name: &str) -> &str {
    for suffix in ["_def", "_eqn", "_fix"] {
        if let Some(s) = name.strip_suffix(suffix) {
            if !s.is_empty() {
                return s;
            }
        }
    }
    name
}

/// Beta-reduces the head of an application spine as far as possible.
pub fn head_beta(t: &Term) -> Term {
    let (mut head, args) = t.clone().into_spine();
    let mut rest = args.into_iter();
    let mut pending = Vec::new();
    for a in rest.by_ref() {
        match head {
            Term::Lam(_, _, body) => head = crate::syntax::subst(&body, 0, &a),
            other => {
                head = other;
                pending.push(a);
                break;
            }
        }
    }
    pending.extend(rest);
    Term::apps(head, pending)
}

/// Reduces every match whose scrutinee is a constructor application, and
/// beta-redexes created by doing so.
pub fn iota_simplify(t: &Term) -> Term {
    match t {
        Term::Match(m) => {
            let scrut = iota_simplify(&m.scrutinee);
            if let Some((_, k, args)) = scrut.as_ctor_app() {
                if let Some(br) = m.branches.get(k) {
                    let n = br.arity();
                    if args.len() >= n {
                        let fields: Vec<Term> = args[args.len() - n..].iter().map(|a| (*a).clone()).collect();
                        return iota_simplify(&instantiate(&br.body, &fields));
                    }
                }
            }
            Term::Match(Box::new(Match {
                scrutinee: scrut,
                scrutinee_type: m.scrutinee_type.clone(),
                return_type: m.return_type.clone(),
                branches: m.branches.iter().map(|b| Branch { names: b.names.clone(), body: iota_simplify(&b.body) }).collect(),
            }))
        }
        Term::App(..) => {
            let (h, args) = t.spine();
            let h = iota_simplify(h);
            let args: Vec<Term> = args.into_iter().map(iota_simplify).collect();
            let rebuilt = Term::apps(h.clone(), args);
            if matches!(h, Term::Lam(..)) {
                iota_simplify(&head_beta(&rebuilt))
            } else {
                rebuilt
            }
        }
        _ => rebuild_children(t),
    }
}

fn rebuild_children(t: &Term) -> Term {
    let b = |x: Term| Box::new(x);
    match t {
        Term::Pi(h, a, c) => Term::Pi(h.clone(), b(iota_simplify(a)), b(iota_simplify(c))),
        Term::Lam(h, a, c) => Term::Lam(h.clone(), b(iota_simplify(a)), b(iota_simplify(c))),
        Term::Exists(h, a, c) => Term::Exists(h.clone(), b(iota_simplify(a)), b(iota_simplify(c))),
        Term::Eq(ty, x, y) => Term::Eq(ty.clone(), b(iota_simplify(x)), b(iota_simplify(y))),
        Term::And(x, y) => Term::And(b(iota_simplify(x)), b(iota_simplify(y))),
        Term::Or(x, y) => Term::Or(b(iota_simplify(x)), b(iota_simplify(y))),
        Term::Not(x) => Term::Not(b(iota_simplify(x))),
        Term::Fix(fx) => {
            let mut fx = (**fx).clone();
            fx.body = iota_simplify(&fx.body);
            Term::Fix(Box::new(fx))
        }
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    #[test]
    fn stems() {
        assert_eq!(stem("hd_error_def"), "hd_error");
        assert_eq!(stem("length_fix"), "length");
        assert_eq!(stem("_def"), "_def");
        assert_eq!(stem("h"), "h");
    }

    #[test]
    fn iota_on_constructor() {
        let p = parse_problem(
            "data list A = nil | cons (A) (list A).
             goal forall (x : Int), (match cons Int x (nil Int) with | nil => 0 | cons y _ => y end) = x.",
        )
        .unwrap();
        let Term::Pi(_, _, body) = &p.goal else { panic!() };
        let Term::Eq(_, lhs, _) = &**body else { panic!() };
        assert_eq!(iota_simplify(lhs), Term::Var(0));
    }
}
