use super::{collect_type_instances, instance_suffix, Hypothesis, Justification, ProofState};
use crate::env::GlobalEnv;
use crate::state::AxiomKind;
use crate::syntax::{Hint, Term, BOOL};

/// Types the solver understands natively and that get no axioms.
pub fn is_interpreted(ty: &Term) -> bool {
    match ty.head() {
        Term::Int => true,
        Term::Ind(n) => &**n == BOOL,
        _ => false,
    }
}

fn ctor_app(ind: &crate::syntax::Name, k: usize, params: &[Term], fields: impl IntoIterator<Item = Term>) -> Term {
    Term::apps(Term::Ctor(ind.clone(), k), params.iter().cloned().chain(fields))
}

/// The axiom of `kind` for a ground datatype instance, or `None` if the
/// instance or constructor indices do not fit.
pub fn axiom_statement(env: &GlobalEnv, instance: &Term, kind: &AxiomKind) -> Option<Term> {
    let (ind, params) = instance.as_ind_app()?;
    let decl = env.inductive(ind)?;
    let params: Vec<Term> = params.into_iter().cloned().collect();
    if params.len() != decl.params.len() || !instance.is_closed() {
        return None;
    }
    let fields = |k: usize| decl.ctor_arg_types(k, &params);
    Some(match *kind {
        AxiomKind::Injectivity(k) => {
            let ts = fields(k);
            let n = ts.len();
            if n == 0 {
                return None;
            }
            // Binders x1 y1 x2 y2 ...; the field types are closed.
            let x = |j: usize| Term::Var(2 * n - 1 - 2 * j);
            let y = |j: usize| Term::Var(2 * n - 2 - 2 * j);
            let premise = Term::eq(
                instance.clone(),
                ctor_app(&decl.name, k, &params, (0..n).map(x)),
                ctor_app(&decl.name, k, &params, (0..n).map(y)),
            );
            let mut concl = Term::eq(ts[n - 1].clone(), x(n - 1), y(n - 1));
            for j in (0..n - 1).rev() {
                concl = Term::and(Term::eq(ts[j].clone(), x(j), y(j)), concl);
            }
            let mut t = Term::implies(premise, concl);
            for j in (0..n).rev() {
                t = Term::Pi(Hint::new("y"), Box::new(ts[j].clone()), Box::new(t));
                t = Term::Pi(Hint::new("x"), Box::new(ts[j].clone()), Box::new(t));
            }
            t
        }
        AxiomKind::Disjointness(k1, k2) => {
            if k1 >= k2 || k2 >= decl.ctors.len() {
                return None;
            }
            let (t1, t2) = (fields(k1), fields(k2));
            let (n1, n2) = (t1.len(), t2.len());
            let lhs = ctor_app(&decl.name, k1, &params, (0..n1).map(|j| Term::Var(n1 + n2 - 1 - j)));
            let rhs = ctor_app(&decl.name, k2, &params, (0..n2).map(|j| Term::Var(n2 - 1 - j)));
            let mut t = Term::not(Term::eq(instance.clone(), lhs, rhs));
            for a in t2.into_iter().rev() {
                t = Term::Pi(Hint::new("y"), Box::new(a), Box::new(t));
            }
            for a in t1.into_iter().rev() {
                t = Term::Pi(Hint::new("x"), Box::new(a), Box::new(t));
            }
            t
        }
        AxiomKind::Exhaustiveness => {
            let mut cases = Vec::new();
            for k in 0..decl.ctors.len() {
                let ts = fields(k);
                let n = ts.len();
                // Under `v` and the n existential binders, `v` is Var(n).
                let mut c = Term::eq(
                    instance.clone(),
                    Term::Var(n),
                    ctor_app(&decl.name, k, &params, (0..n).map(|j| Term::Var(n - 1 - j))),
                );
                for a in ts.into_iter().rev() {
                    c = Term::Exists(Hint::new("x"), Box::new(a), Box::new(c));
                }
                cases.push(c);
            }
            let last = cases.pop()?;
            let body = cases.into_iter().rev().fold(last, |acc, c| Term::or(c, acc));
            Term::Pi(Hint::new("v"), Box::new(instance.clone()), Box::new(body))
        }
    })
}

/// Injectivity and disjointness (and optionally exhaustiveness) axioms for
/// every ground datatype instance of the goal and hypotheses.
pub fn interp_alg_types(state: &ProofState, exhaustiveness: bool) -> Vec<Hypothesis> {
    let mut instances = collect_type_instances(&state.goal);
    for h in &state.hypotheses {
        for t in collect_type_instances(&h.statement) {
            if !instances.contains(&t) {
                instances.push(t);
            }
        }
    }
    let mut scratch = state.clone();
    let mut out = Vec::new();
    for inst in instances {
        if is_interpreted(&inst) {
            continue;
        }
        let Some((ind, _)) = inst.as_ind_app() else { continue };
        let Some(decl) = state.env.inductive(ind) else { continue };
        let tag = instance_suffix(std::slice::from_ref(&inst));
        let nc = decl.ctors.len();
        let mut kinds = Vec::new();
        for k in 0..nc {
            if !decl.ctors[k].args.is_empty() {
                kinds.push((AxiomKind::Injectivity(k), format!("{tag}_inj_{}", decl.ctors[k].name)));
            }
        }
        for k1 in 0..nc {
            for k2 in k1 + 1..nc {
                let name = format!("{tag}_disj_{}_{}", decl.ctors[k1].name, decl.ctors[k2].name);
                kinds.push((AxiomKind::Disjointness(k1, k2), name));
            }
        }
        if exhaustiveness {
            kinds.push((AxiomKind::Exhaustiveness, format!("{tag}_exh")));
        }
        for (kind, name) in kinds {
            let Some(statement) = axiom_statement(&state.env, &inst, &kind) else { continue };
            let h = Hypothesis {
                name: scratch.fresh_name(&name),
                statement,
                justification: Justification::DatatypeAxiom { instance: inst.clone(), kind },
            };
            if let Some(n) = scratch.push(h.clone()) {
                out.push(Hypothesis { name: n, ..h });
            }
        }
    }
    out
}
