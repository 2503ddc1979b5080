use super::{Hypothesis, Justification, ProofState};
use crate::syntax::{instantiate, Name, Telescope, Term};

fn is_ground_type(t: &Term) -> bool {
    matches!(t.head(), Term::Int | Term::Param(_) | Term::Ind(_)) && t.is_closed()
}

/// Closed object types occurring in `t`, in first-occurrence order,
/// including nested ones.
pub fn collect_type_instances(t: &Term) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    collect_into(t, &mut out);
    out
}

fn collect_into(t: &Term, out: &mut Vec<Term>) {
    let mut add = |s: &Term| {
        if is_ground_type(s) && !out.contains(s) {
            out.push(s.clone());
        }
    };
    let b = |x: &Term, out: &mut Vec<Term>| collect_into(x, out);
    match t {
        Term::App(..) => {
            let (h, args) = t.spine();
            if matches!(h, Term::Ind(_)) {
                // The bare type constructor is not itself an instance.
                add(t);
            } else {
                b(h, out);
            }
            for a in args {
                b(a, out);
            }
        }
        Term::Int | Term::Param(_) | Term::Ind(_) => add(t),
        Term::Pi(_, x, y) | Term::Lam(_, x, y) | Term::Exists(_, x, y) | Term::And(x, y) | Term::Or(x, y) => {
            b(x, out);
            b(y, out);
        }
        Term::Not(x) => b(x, out),
        Term::Eq(ty, x, y) => {
            b(ty, out);
            b(x, out);
            b(y, out);
        }
        Term::Match(m) => {
            b(&m.scrutinee, out);
            b(&m.scrutinee_type, out);
            b(&m.return_type, out);
            for br in &m.branches {
                b(&br.body, out);
            }
        }
        Term::Fix(fx) => {
            b(&fx.ty, out);
            b(&fx.body, out);
        }
        _ => {}
    }
}

/// Name-safe rendering of type arguments, e.g. `list_Int`.
pub fn instance_suffix(args: &[Term]) -> String {
    fn go(t: &Term, out: &mut Vec<String>) {
        let (h, args) = t.spine();
        out.push(match h {
            Term::Int => "Int".into(),
            Term::Param(n) | Term::Ind(n) => n.to_string(),
            other => other.to_string(),
        });
        for a in args {
            go(a, out);
        }
    }
    let mut parts = Vec::new();
    for a in args {
        go(a, &mut parts);
    }
    parts.join("_")
}

fn leading_type_binders(t: &Term) -> usize {
    Telescope::of_while(t, |d| *d == Term::Type).len()
}

fn has_type_binder(t: &Term) -> bool {
    let mut found = false;
    t.visit(&mut |s| {
        if let Term::Pi(_, d, _) | Term::Exists(_, d, _) = s {
            found |= **d == Term::Type;
        }
    });
    found
}

/// Instances of every prenex-polymorphic hypothesis and lemma at the
/// ground types of the goal (and of the context when `from_context`).
/// Monomorphic lemmas are added as they are.
pub fn monomorphize(state: &ProofState, extra_lemmas: &[(Name, Term)], from_context: bool) -> Vec<Hypothesis> {
    let mut instances = collect_type_instances(&state.goal);
    if from_context {
        for h in &state.hypotheses {
            collect_into(&h.statement, &mut instances);
        }
    }
    let sources = state
        .hypotheses
        .iter()
        .map(|h| (h.name.clone(), &h.statement, false))
        .chain(extra_lemmas.iter().map(|(n, t)| (n.clone(), t, true)));
    let mut scratch = state.clone();
    let mut out = Vec::new();
    for (name, stmt, is_lemma) in sources {
        let k = leading_type_binders(stmt);
        if k == 0 {
            if is_lemma && !has_type_binder(stmt) {
                let h = Hypothesis { name: name.clone(), statement: stmt.clone(), justification: Justification::Given };
                if let Some(n) = scratch.push(h.clone()) {
                    out.push(Hypothesis { name: n, ..h });
                }
            }
            continue;
        }
        let tele = Telescope::of_while(stmt, |d| *d == Term::Type);
        let body = tele.body;
        if has_type_binder(&body) {
            continue;
        }
        for args in product(&instances, k) {
            let statement = instantiate(&body, &args);
            let h = Hypothesis {
                name: scratch.fresh_name(&format!("{name}_{}", instance_suffix(&args))),
                statement,
                justification: Justification::ByInstantiation { source: name.clone(), type_args: args },
            };
            if let Some(n) = scratch.push(h.clone()) {
                out.push(Hypothesis { name: n, ..h });
            }
        }
    }
    out
}

/// All length-`k` sequences over `items`, lexicographic.
fn product(items: &[Term], k: usize) -> Vec<Vec<Term>> {
    let mut acc: Vec<Vec<Term>> = vec![vec![]];
    for _ in 0..k {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |t| {
                    let mut p = prefix.clone();
                    p.push(t.clone());
                    p
                })
            })
            .collect();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    const SRC: &str = "
        data list A = nil | cons (A) (list A).
        def app (A : Type) : list A -> list A -> list A :=
          fix app / 0 (l1 : list A) (l2 : list A) : list A :=
            match l1 with | nil => l2 | cons x l => cons A x (app l l2) end.
        lemma app_nil : forall (A : Type) (l : list A), app A l (nil A) = l.
        lemma two : forall (A B : Type) (x : A) (y : B), x = x /\\ y = y.
        hyp mono : forall (l : list Int), l = l.
        goal forall (l : list Int), app Int l (nil Int) = l.";

    #[test]
    fn instances_of_goal() {
        let p = parse_problem(SRC).unwrap();
        let got: Vec<String> = collect_type_instances(&p.goal).iter().map(|t| instance_suffix(std::slice::from_ref(t))).collect();
        assert_eq!(got, vec!["list_Int", "Int"]);
        let t = parse_problem("goal true = true.").unwrap().goal;
        assert_eq!(collect_type_instances(&t), vec![Term::bool_type()]);
    }

    #[test]
    fn cartesian_and_idempotent() {
        let p = parse_problem(SRC).unwrap();
        let mut s = ProofState::from_problem(&p);
        let lemmas = s.lemmas.clone();
        let hs = monomorphize(&s, &lemmas, false);
        let names: Vec<&str> = hs.iter().map(|h| &*h.name).collect();
        assert_eq!(
            names,
            vec![
                "app_nil_list_Int",
                "app_nil_Int",
                "two_list_Int_list_Int",
                "two_list_Int_Int",
                "two_Int_list_Int",
                "two_Int_Int"
            ]
        );
        for h in hs {
            s.push(h);
        }
        assert!(monomorphize(&s, &lemmas, false).is_empty());
    }

    #[test]
    fn monomorphic_context_is_vacuous() {
        let p = parse_problem("hyp h : forall (x : Int), x = x. goal forall (x : Int), x + 0 = x.").unwrap();
        let s = ProofState::from_problem(&p);
        assert!(monomorphize(&s, &[], false).is_empty());
    }
}
