//! Weak-head and full normalization, and convertibility.
//!
//! Strategy is leftmost-outermost. Constants always unfold; a fixpoint
//! unfolds only when its decreasing argument reduces to a constructor
//! application.

use thiserror::Error;

use crate::env::GlobalEnv;
use crate::syntax::{instantiate, subst, Branch, Fix, Match, Prim, Term};

pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("reduction fuel exhausted after {0} steps")]
pub struct FuelExhausted(pub u64);

/// Reduction step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fuel {
    pub max_reduction_steps: u64,
    used: u64,
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel::new(DEFAULT_FUEL)
    }
}

impl Fuel {
    pub fn new(max: u64) -> Self {
        Fuel { max_reduction_steps: max.max(1), used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    fn tick(&mut self) -> Result<(), FuelExhausted> {
        if self.used >= self.max_reduction_steps {
            return Err(FuelExhausted(self.used));
        }
        self.used += 1;
        Ok(())
    }
}

/// Weak-head normal form.
pub fn whnf(env: &GlobalEnv, t: &Term, fuel: &mut Fuel) -> Result<Term, FuelExhausted> {
    let (head, args) = t.clone().into_spine();
    whnf_spine(env, head, args, fuel)
}

fn rebuild(head: Term, args: Vec<Term>) -> Term {
    Term::apps(head, args)
}

fn whnf_spine(env: &GlobalEnv, mut head: Term, mut args: Vec<Term>, fuel: &mut Fuel) -> Result<Term, FuelExhausted> {
    loop {
        match head {
            Term::App(..) => {
                let (h, mut inner) = head.into_spine();
                inner.append(&mut args);
                head = h;
                args = inner;
            }
            Term::Lam(_, _, body) if !args.is_empty() => {
                fuel.tick()?;
                let a = args.remove(0);
                head = subst(&body, 0, &a);
            }
            Term::Const(ref c) => match env.definition(c) {
                Some(def) => {
                    fuel.tick()?;
                    head = def.body.clone();
                }
                None => return Ok(rebuild(head, args)),
            },
            Term::Fix(ref fx) if args.len() > fx.decreasing => {
                let k = fx.decreasing;
                let rec = whnf(env, &args[k], fuel)?;
                if rec.as_ctor_app().is_none() {
                    args[k] = rec;
                    return Ok(rebuild(head, args));
                }
                fuel.tick()?;
                args[k] = rec;
                head = subst(&fx.body, 0, &head);
            }
            Term::Match(m) => {
                let scrut = whnf(env, &m.scrutinee, fuel)?;
                match scrut.as_ctor_app() {
                    Some((_, k, cargs)) if k < m.branches.len() => {
                        let br = &m.branches[k];
                        let n = br.arity();
                        if cargs.len() < n {
                            return Ok(rebuild(stuck_match(*m, scrut), args));
                        }
                        fuel.tick()?;
                        let fields: Vec<Term> = cargs[cargs.len() - n..].iter().map(|t| (*t).clone()).collect();
                        head = instantiate(&br.body, &fields);
                    }
                    _ => return Ok(rebuild(stuck_match(*m, scrut), args)),
                }
            }
            Term::Prim(p) if args.len() >= p.arity() => match reduce_prim(env, p, &args, fuel)? {
                Some(r) => {
                    fuel.tick()?;
                    args.drain(..p.arity());
                    head = r;
                }
                None => return Ok(rebuild(head, args)),
            },
            _ => return Ok(rebuild(head, args)),
        }
    }
}

fn stuck_match(mut m: Match, scrut: Term) -> Term {
    m.scrutinee = scrut;
    Term::Match(Box::new(m))
}

fn int_of(t: &Term) -> Option<i64> {
    match t {
        Term::IntLit(n) => Some(*n),
        _ => None,
    }
}

fn bool_of(t: &Term) -> Option<bool> {
    match t {
        Term::Ctor(i, k) if &**i == crate::syntax::BOOL => Some(*k == 0),
        _ => None,
    }
}

/// A closed value built only from constructors and literals.
fn is_ground_value(t: &Term) -> bool {
    let (h, args) = t.spine();
    match h {
        Term::IntLit(_) => args.is_empty(),
        Term::Ctor(..) => args.iter().all(|a| is_ground_value(a) || is_ground_type(a)),
        _ => false,
    }
}

fn is_ground_type(t: &Term) -> bool {
    let (h, args) = t.spine();
    match h {
        Term::Int => args.is_empty(),
        Term::Ind(_) => args.iter().all(|a| is_ground_type(a)),
        _ => false,
    }
}

fn reduce_prim(env: &GlobalEnv, p: Prim, args: &[Term], fuel: &mut Fuel) -> Result<Option<Term>, FuelExhausted> {
    let w = |i: usize, fuel: &mut Fuel| whnf(env, &args[i], fuel);
    Ok(match p {
        Prim::Add | Prim::Sub | Prim::Mul | Prim::Le | Prim::Lt | Prim::Leb | Prim::Ltb => {
            let a = w(0, fuel)?;
            let b = w(1, fuel)?;
            match (int_of(&a), int_of(&b)) {
                (Some(x), Some(y)) => match p {
                    Prim::Add => x.checked_add(y).map(Term::IntLit),
                    Prim::Sub => x.checked_sub(y).map(Term::IntLit),
                    Prim::Mul => x.checked_mul(y).map(Term::IntLit),
                    Prim::Le => Some(if x <= y { Term::True } else { Term::False }),
                    Prim::Lt => Some(if x < y { Term::True } else { Term::False }),
                    Prim::Leb => Some(Term::bool_lit(x <= y)),
                    _ => Some(Term::bool_lit(x < y)),
                },
                _ => None,
            }
        }
        Prim::Orb | Prim::Andb => {
            let a = w(0, fuel)?;
            match bool_of(&a) {
                Some(true) if p == Prim::Orb => Some(Term::bool_lit(true)),
                Some(false) if p == Prim::Andb => Some(Term::bool_lit(false)),
                Some(_) => Some(args[1].clone()),
                None => None,
            }
        }
        Prim::Negb => bool_of(&w(0, fuel)?).map(|b| Term::bool_lit(!b)),
        Prim::Eqb => {
            let a = normalize(env, &args[1], fuel)?;
            let b = normalize(env, &args[2], fuel)?;
            if is_ground_value(&a) && is_ground_value(&b) {
                Some(Term::bool_lit(a == b))
            } else {
                None
            }
        }
    })
}

/// Full normal form.
pub fn normalize(env: &GlobalEnv, t: &Term, fuel: &mut Fuel) -> Result<Term, FuelExhausted> {
    let w = whnf(env, t, fuel)?;
    let (head, args) = w.into_spine();
    let b = Box::new;
    let head = match head {
        Term::Pi(h, a, body) => Term::Pi(h, b(normalize(env, &a, fuel)?), b(normalize(env, &body, fuel)?)),
        Term::Lam(h, a, body) => Term::Lam(h, b(normalize(env, &a, fuel)?), b(normalize(env, &body, fuel)?)),
        Term::Exists(h, a, body) => Term::Exists(h, b(normalize(env, &a, fuel)?), b(normalize(env, &body, fuel)?)),
        Term::Eq(ty, x, y) => Term::Eq(
            b(normalize(env, &ty, fuel)?),
            b(normalize(env, &x, fuel)?),
            b(normalize(env, &y, fuel)?),
        ),
        Term::And(x, y) => Term::And(b(normalize(env, &x, fuel)?), b(normalize(env, &y, fuel)?)),
        Term::Or(x, y) => Term::Or(b(normalize(env, &x, fuel)?), b(normalize(env, &y, fuel)?)),
        Term::Not(x) => Term::Not(b(normalize(env, &x, fuel)?)),
        Term::Match(m) => {
            let m = *m;
            let mut branches = Vec::with_capacity(m.branches.len());
            for br in m.branches {
                branches.push(Branch { names: br.names, body: normalize(env, &br.body, fuel)? });
            }
            Term::Match(Box::new(Match {
                scrutinee: normalize(env, &m.scrutinee, fuel)?,
                scrutinee_type: normalize(env, &m.scrutinee_type, fuel)?,
                return_type: normalize(env, &m.return_type, fuel)?,
                branches,
            }))
        }
        Term::Fix(fx) => Term::Fix(Box::new(Fix {
            name: fx.name.clone(),
            decreasing: fx.decreasing,
            ty: normalize(env, &fx.ty, fuel)?,
            body: normalize(env, &fx.body, fuel)?,
        })),
        other => other,
    };
    let mut out = head;
    for a in args {
        out = Term::app(out, normalize(env, &a, fuel)?);
    }
    Ok(out)
}

/// Alpha-equality of normal forms.
pub fn convertible(env: &GlobalEnv, t: &Term, u: &Term, fuel: &mut Fuel) -> Result<bool, FuelExhausted> {
    if t == u {
        return Ok(true);
    }
    Ok(normalize(env, t, fuel)? == normalize(env, u, fuel)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_problem, parse_term_in};

    const LISTS: &str = "
        data nat = O | S (nat).
        data list A = nil | cons (A) (list A).
        data option A = none | some (A).
        def length (A : Type) : list A -> nat =
          fix len / 0 (l : list A) : nat :=
            match l with | nil => O | cons _ l' => S (len l') end.
        def hd_error (A : Type) (l : list A) : option A =
          match l with | nil => none A | cons x _ => some A x end.
        goal True.
    ";

    fn env() -> GlobalEnv {
        parse_problem(LISTS).unwrap().env
    }

    fn t(env: &GlobalEnv, s: &str) -> Term {
        parse_term_in(env, &[], s).unwrap()
    }

    #[test]
    fn length_of_two_element_list() {
        let env = env();
        let term = t(&env, "length Int (cons Int 1 (cons Int 2 (nil Int)))");
        let nf = normalize(&env, &term, &mut Fuel::default()).unwrap();
        assert_eq!(nf, t(&env, "S (S O)"));
    }

    #[test]
    fn neutral_variable() {
        let env = env();
        assert_eq!(normalize(&env, &Term::Var(0), &mut Fuel::default()).unwrap(), Term::Var(0));
    }

    #[test]
    fn fix_does_not_unfold_on_variable() {
        let env = env();
        let term = Term::app(t(&env, "length Int"), Term::Var(0));
        let nf = normalize(&env, &term, &mut Fuel::default()).unwrap();
        assert!(matches!(nf.head(), Term::Fix(_)));
    }

    #[test]
    fn hd_error_on_cons_converts() {
        let env = env();
        // context: x : Int, l : list Int
        let ctx = [Term::Int, Term::app(Term::ind("list"), Term::Int)];
        let ctx_names = ["x", "l"];
        let lhs = crate::parse::parse_term_ctx(&env, &ctx, &ctx_names, "hd_error Int (cons Int x l)").unwrap();
        let rhs = crate::parse::parse_term_ctx(&env, &ctx, &ctx_names, "some Int x").unwrap();
        assert!(convertible(&env, &lhs, &rhs, &mut Fuel::default()).unwrap());
    }

    #[test]
    fn true_false_not_convertible() {
        let env = env();
        let mut f = Fuel::default();
        assert!(!convertible(&env, &Term::bool_lit(true), &Term::bool_lit(false), &mut f).unwrap());
        assert!(convertible(&env, &Term::bool_lit(true), &Term::bool_lit(true), &mut f).unwrap());
    }

    #[test]
    fn prims() {
        let env = env();
        let mut f = Fuel::default();
        let n = |s: &str| normalize(&env, &t(&env, s), &mut Fuel::default()).unwrap();
        assert_eq!(n("1 + 2 * 3"), Term::IntLit(7));
        assert_eq!(n("orb true false"), Term::bool_lit(true));
        assert_eq!(n("eqb Int 3 4"), Term::bool_lit(false));
        assert_eq!(n("eqb (list Int) (cons Int 1 (nil Int)) (cons Int 1 (nil Int))"), Term::bool_lit(true));
        assert_eq!(n("3 <=? 4"), Term::bool_lit(true));
        assert!(convertible(&env, &t(&env, "2 < 1"), &Term::False, &mut f).unwrap());
    }

    #[test]
    fn fuel_runs_out() {
        let env = env();
        let term = t(&env, "length Int (cons Int 1 (cons Int 2 (nil Int)))");
        assert!(normalize(&env, &term, &mut Fuel::new(3)).is_err());
    }
}
