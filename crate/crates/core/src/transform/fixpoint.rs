use super::{head_beta, lookup, stem, Hypothesis, Justification, ProofState, TransformError};
use crate::syntax::{rebuild_pi, subst, Telescope, Term};

/// Rewrites `forall xs, f ps as = (fix g ...) as` into the unfolded body
/// with `g` replaced by `f ps`.
pub fn eliminate_fix(state: &ProofState, hyp: &str) -> Result<Hypothesis, TransformError> {
    let stmt = lookup(state, hyp)?;
    let tele = Telescope::of(stmt);
    let none = || TransformError::NoFixpointFound(hyp.into());
    let Term::Eq(ty, lhs, rhs) = &tele.body else {
        return Err(none());
    };
    let (fix_head, fix_args) = rhs.spine();
    let Term::Fix(fx) = fix_head else {
        return Err(none());
    };
    let (f, lhs_args) = lhs.spine();
    if !matches!(f, Term::Const(_)) || lhs_args.len() < fix_args.len() {
        return Err(none());
    }
    let split = lhs_args.len() - fix_args.len();
    if lhs_args[split..] != fix_args[..] {
        return Err(none());
    }
    let me = Term::apps(f.clone(), lhs_args[..split].iter().map(|a| (*a).clone()));
    let unfolded = subst(&fx.body, 0, &me);
    let body = head_beta(&Term::apps(unfolded, fix_args.iter().map(|a| (*a).clone())));
    let n = tele.len();
    let split_vars = match fix_args.get(fx.decreasing) {
        Some(Term::Var(j)) if *j < n => vec![n - 1 - j],
        _ => vec![],
    };
    let statement = rebuild_pi(&tele.binders, Term::eq((**ty).clone(), (**lhs).clone(), body));
    Ok(Hypothesis {
        name: state.fresh_name(&format!("{}_fix", stem(hyp))),
        statement,
        justification: Justification::ByCaseConversion { source: Some(hyp.into()), split_vars, depth: 1 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;
    use crate::transform::{expand, get_def};

    const LEN: &str = "
        data nat = O | S (nat).
        data list A = nil | cons (A) (list A).
        def length (A : Type) : list A -> nat =
          fix length / 0 (l : list A) : nat :=
            match l with | nil => O | cons _ l' => S (length l') end.
        def hd_error (A : Type) (l : list A) : option A = match l with | nil => none A | cons x _ => some A x end.
        goal True.";

    fn state() -> ProofState {
        let src = format!("data option A = none | some (A).\n{LEN}");
        let mut s = ProofState::from_problem(&parse_problem(&src).unwrap());
        for c in ["length", "hd_error"] {
            let d = get_def(&s, c).unwrap();
            let n = s.push(d).unwrap();
            let e = expand(&s, &n).unwrap();
            s.push(e);
        }
        s
    }

    #[test]
    fn length_unfolds() {
        let s = state();
        let h = eliminate_fix(&s, "length_eqn").unwrap();
        assert_eq!(
            s.print_statement(&h.statement),
            "forall (A : Type) (l : list A), length A l = match l with | nil => O | cons _ l' => S (length A l') end"
        );
        assert_eq!(
            h.justification,
            Justification::ByCaseConversion { source: Some("length_eqn".into()), split_vars: vec![1], depth: 1 }
        );
    }

    #[test]
    fn no_fixpoint() {
        let s = state();
        assert!(matches!(eliminate_fix(&s, "hd_error_eqn"), Err(TransformError::NoFixpointFound(_))));
    }
}
