use super::{head_beta, lookup, stem, Hypothesis, Justification, ProofState, TransformError};
use crate::syntax::{lift, Hint, Telescope, Term};

/// Domains and codomain of a Pi chain. Each domain is in the context of
/// the binders before it and the codomain is under all of them, which is
/// the shape [`gen_eq`] consumes.
pub fn arrow_split(ty: &Term) -> (Vec<Term>, Term) {
    let t = Telescope::of(ty);
    (t.binders.into_iter().map(|(_, d)| d).collect(), t.body)
}

/// `forall x0 .. xn, t x0 .. xn = u x0 .. xn` at codomain `b`.
pub fn gen_eq(domains: &[Term], codomain: &Term, t: &Term, u: &Term) -> Term {
    let binders: Vec<(Hint, Term)> = domains.iter().map(|d| (Hint::anon(), d.clone())).collect();
    gen_eq_named(&binders, codomain, t, u)
}

/// [`gen_eq`] with binder name hints.
pub fn gen_eq_named(binders: &[(Hint, Term)], codomain: &Term, t: &Term, u: &Term) -> Term {
    match binders.split_first() {
        None => Term::eq(codomain.clone(), t.clone(), u.clone()),
        Some(((h, dom), rest)) => {
            let t = Term::app(lift(t, 1, 0), Term::Var(0));
            let u = Term::app(lift(u, 1, 0), Term::Var(0));
            Term::Pi(h.clone(), Box::new(dom.clone()), Box::new(gen_eq_named(rest, codomain, &t, &u)))
        }
    }
}

/// Binder names from the right-hand side's lambdas and fixpoint binders.
fn rhs_hints(mut u: &Term, n: usize) -> Vec<Hint> {
    let mut out = Vec::new();
    while out.len() < n {
        match u {
            Term::Lam(h, _, b) => {
                out.push(h.clone());
                u = b;
            }
            Term::Fix(fx) => u = &fx.body,
            _ => break,
        }
    }
    out
}

/// Turns `f = u` at a function type into its pointwise form, reducing the
/// head beta-redexes of both sides.
pub fn expand(state: &ProofState, hyp: &str) -> Result<Hypothesis, TransformError> {
    let Term::Eq(ty, t, u) = lookup(state, hyp)? else {
        return Err(TransformError::NotAnEquation(hyp.into()));
    };
    let tele = Telescope::of(ty);
    let from_rhs = rhs_hints(u, tele.len());
    let binders: Vec<(Hint, Term)> = tele
        .binders
        .iter()
        .enumerate()
        .map(|(i, (h, d))| {
            let h = match from_rhs.get(i) {
                Some(r) if h.is_anon() && !r.is_anon() => r.clone(),
                _ => h.clone(),
            };
            (h, d.clone())
        })
        .collect();
    let raw = gen_eq_named(&binders, &tele.body, t, u);
    let statement = beta_sides(raw);
    Ok(Hypothesis {
        name: state.fresh_name(&format!("{}_eqn", stem(hyp))),
        statement,
        justification: Justification::ByConversion { source: Some(hyp.into()) },
    })
}

fn beta_sides(t: Term) -> Term {
    match t {
        Term::Pi(h, d, b) => Term::Pi(h, d, Box::new(beta_sides(*b))),
        Term::Eq(ty, x, y) => Term::Eq(ty, Box::new(head_beta(&x)), Box::new(head_beta(&y))),
        other => other,
    }
}
