use super::{iota_simplify, lookup, stem, Hypothesis, Justification, ProofState, TransformError};
use crate::reduce::{whnf, Fuel};
use crate::syntax::{lift, rebuild_pi, subst, Hint, Telescope, Term};

/// Position of the first telescope binder that is the scrutinee of some
/// match, and the branch name hints of that match.
fn matched_binder(tele: &Telescope) -> Option<(usize, Vec<Vec<Hint>>)> {
    let n = tele.len();
    let mut best: Option<(usize, Vec<Vec<Hint>>)> = None;
    let mut look = |t: &Term, base: usize| {
        t.visit_with_depth(0, &mut |s, d| {
            if let Term::Match(m) = s {
                if let Term::Var(i) = m.scrutinee {
                    // Variable bound by telescope binder `pos`, seen from
                    // inside `base` binders plus `d` local ones.
                    if i >= d && i - d < base {
                        let pos = base - 1 - (i - d);
                        if best.as_ref().is_none_or(|(b, _)| pos < *b) {
                            best = Some((pos, m.branches.iter().map(|b| b.names.clone()).collect()));
                        }
                    }
                }
            }
        });
    };
    for (k, (_, dom)) in tele.binders.iter().enumerate() {
        look(dom, k);
    }
    look(&tele.body, n);
    best
}

fn type_hint(ty: &Term) -> Hint {
    match ty.head() {
        Term::Ind(n) => Hint::new(&n[..1]),
        Term::Int => Hint::new("n"),
        _ => Hint::new("x"),
    }
}

/// One statement per constructor of the matched variable's type, with the
/// match reduced.
pub fn eliminate_pattern_matching(state: &ProofState, hyp: &str) -> Result<Vec<Hypothesis>, TransformError> {
    let stmt = lookup(state, hyp)?;
    let tele = Telescope::of(stmt);
    let (i, hints) = matched_binder(&tele).ok_or_else(|| TransformError::NoMatchOnBoundVar(hyp.into()))?;
    let not_alg = || TransformError::NotAlgebraic(hyp.into());
    let ty = whnf(&state.env, &tele.binders[i].1, &mut Fuel::default()).map_err(|_| not_alg())?;
    let (ind, params) = ty.as_ind_app().ok_or_else(not_alg)?;
    let decl = state.env.inductive(ind).ok_or_else(not_alg)?;
    let params: Vec<Term> = params.into_iter().cloned().collect();
    let rest = rebuild_pi(&tele.binders[i + 1..], tele.body.clone());
    let mut out = Vec::with_capacity(decl.ctors.len());
    for (k, ctor) in decl.ctors.iter().enumerate() {
        let args = decl.ctor_arg_types(k, &params);
        let m = args.len();
        let mut binders = tele.binders[..i].to_vec();
        for (j, a) in args.iter().enumerate() {
            let hint = hints
                .get(k)
                .and_then(|h| h.get(j))
                .filter(|h| !h.is_anon() && h.as_str() != "_")
                .cloned()
                .unwrap_or_else(|| type_hint(a));
            binders.push((hint, lift(a, j, 0)));
        }
        let value = Term::apps(
            Term::Ctor(decl.name.clone(), k),
            params.iter().map(|p| lift(p, m, 0)).chain((0..m).rev().map(Term::Var)),
        );
        let body = subst(&lift(&rest, m, 1), 0, &value);
        let statement = rebuild_pi(&binders, iota_simplify(&body));
        out.push(Hypothesis {
            name: state.fresh_name(&format!("{}_{}", stem(hyp), ctor.name)),
            statement,
            justification: Justification::ByConversion { source: Some(hyp.into()) },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;
    use crate::transform::{expand, get_def};

    const SRC: &str = "
        data list A = nil | cons (A) (list A).
        data option A = none | some (A).
        def hd_error (A : Type) (l : list A) : option A = match l with | nil => none A | cons x _ => some A x end.
        def neg (b : bool) : bool = match b with | true => false | false => true end.
        goal True.";

    fn expanded(c: &str) -> (ProofState, String) {
        let mut s = ProofState::from_problem(&parse_problem(SRC).unwrap());
        let d = get_def(&s, c).unwrap();
        let n = s.push(d).unwrap();
        let e = expand(&s, &n).unwrap();
        let n = s.push(e).unwrap();
        (s, n.to_string())
    }

    #[test]
    fn hd_error_cases() {
        let (s, n) = expanded("hd_error");
        let hs = eliminate_pattern_matching(&s, &n).unwrap();
        let printed: Vec<String> = hs.iter().map(|h| s.print_statement(&h.statement)).collect();
        assert_eq!(
            printed,
            vec![
                "forall (A : Type), hd_error A (nil A) = none A",
                "forall (A : Type) (x : A) (l : list A), hd_error A (cons A x l) = some A x",
            ]
        );
        assert_eq!(&*hs[1].name, "hd_error_cons");
    }

    #[test]
    fn bool_gives_two() {
        let (s, n) = expanded("neg");
        assert_eq!(eliminate_pattern_matching(&s, &n).unwrap().len(), 2);
    }

    #[test]
    fn no_match() {
        let (s, _) = expanded("hd_error");
        assert!(matches!(
            eliminate_pattern_matching(&s, "hd_error_def"),
            Err(TransformError::NoMatchOnBoundVar(_))
        ));
    }
}
