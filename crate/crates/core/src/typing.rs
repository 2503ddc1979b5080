//! Type inference for the core language.
//!
//! Universes are flat (`Type : Type`) and `Prop` is impredicative. The
//! context is a list of types with the innermost binder last.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::env::GlobalEnv;
use crate::reduce::{convertible, whnf, Fuel, FuelExhausted};
use crate::syntax::{instantiate, lift, subst, Prim, Term, Telescope};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{location}: expected {expected}, found {found}")]
    Mismatch { location: String, expected: String, found: String },
    #[error(transparent)]
    Fuel(#[from] FuelExhausted),
}

impl TypeError {
    fn new(location: impl fmt::Display, expected: impl fmt::Display, found: impl fmt::Display) -> Self {
        TypeError::Mismatch {
            location: location.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

pub fn prim_type(p: Prim) -> Term {
    let int2 = |r: Term| Term::arrow(Term::Int, Term::arrow(Term::Int, r));
    let bool2 = Term::arrow(Term::bool_type(), Term::arrow(Term::bool_type(), Term::bool_type()));
    match p {
        Prim::Add | Prim::Sub | Prim::Mul => int2(Term::Int),
        Prim::Le | Prim::Lt => int2(Term::Prop),
        Prim::Leb | Prim::Ltb => int2(Term::bool_type()),
        Prim::Orb | Prim::Andb => bool2,
        Prim::Negb => Term::arrow(Term::bool_type(), Term::bool_type()),
        Prim::Eqb => Term::pi(
            "A",
            Term::Type,
            Term::Pi(
                crate::syntax::Hint::anon(),
                Box::new(Term::Var(0)),
                Box::new(Term::Pi(
                    crate::syntax::Hint::anon(),
                    Box::new(Term::Var(1)),
                    Box::new(Term::bool_type()),
                )),
            ),
        ),
    }
}

pub struct Checker<'a> {
    pub env: &'a GlobalEnv,
    pub fuel: Fuel,
}

/// Type of `t` in `ctx`.
pub fn typecheck(env: &GlobalEnv, ctx: &[Term], t: &Term) -> Result<Term, TypeError> {
    let mut c = Checker { env, fuel: Fuel::default() };
    let mut ctx = ctx.to_vec();
    c.infer(&mut ctx, t)
}

/// Checks that `t` is a proposition in `ctx`.
pub fn check_prop(env: &GlobalEnv, ctx: &[Term], t: &Term) -> Result<(), TypeError> {
    let ty = typecheck(env, ctx, t)?;
    let w = whnf(env, &ty, &mut Fuel::default())?;
    if w == Term::Prop {
        Ok(())
    } else {
        Err(TypeError::new(t, "Prop", ty))
    }
}

impl<'a> Checker<'a> {
    pub fn new(env: &'a GlobalEnv) -> Self {
        Checker { env, fuel: Fuel::default() }
    }

    fn whnf(&mut self, t: &Term) -> Result<Term, TypeError> {
        Ok(whnf(self.env, t, &mut self.fuel)?)
    }

    fn conv(&mut self, a: &Term, b: &Term) -> Result<bool, TypeError> {
        Ok(convertible(self.env, a, b, &mut self.fuel)?)
    }

    /// Infers the sort of a type.
    fn sort_of(&mut self, ctx: &mut Vec<Term>, t: &Term) -> Result<Term, TypeError> {
        let ty = self.infer(ctx, t)?;
        let w = self.whnf(&ty)?;
        if w.is_sort() {
            Ok(w)
        } else {
            Err(TypeError::new(t, "a type", ty))
        }
    }

    pub fn check(&mut self, ctx: &mut Vec<Term>, t: &Term, expected: &Term) -> Result<(), TypeError> {
        let found = self.infer(ctx, t)?;
        if self.conv(&found, expected)? {
            Ok(())
        } else {
            Err(TypeError::new(t, expected, found))
        }
    }

    pub fn infer(&mut self, ctx: &mut Vec<Term>, t: &Term) -> Result<Term, TypeError> {
        match t {
            Term::Var(i) => {
                let n = ctx.len();
                if *i >= n {
                    return Err(TypeError::new(t, "bound variable", "unbound index"));
                }
                Ok(lift(&ctx[n - 1 - i], i + 1, 0))
            }
            Term::Const(c) => self
                .env
                .definition(c)
                .map(|d| d.ty.clone())
                .ok_or_else(|| TypeError::new(t, "defined constant", "unknown name")),
            Term::Ctor(ind, k) => self
                .env
                .inductive(ind)
                .filter(|d| *k < d.ctors.len())
                .map(|d| d.ctor_type(*k))
                .ok_or_else(|| TypeError::new(t, "constructor", "unknown constructor")),
            Term::Ind(ind) => self
                .env
                .inductive(ind)
                .map(|d| d.arity_type())
                .ok_or_else(|| TypeError::new(t, "inductive type", "unknown name")),
            Term::Param(_) | Term::Type | Term::Prop | Term::Int => Ok(Term::Type),
            Term::IntLit(_) => Ok(Term::Int),
            Term::Prim(p) => Ok(prim_type(*p)),
            Term::Pi(_, a, b) => {
                self.sort_of(ctx, a)?;
                ctx.push((**a).clone());
                let s = self.sort_of(ctx, b);
                ctx.pop();
                s
            }
            Term::Lam(h, a, body) => {
                self.sort_of(ctx, a)?;
                ctx.push((**a).clone());
                let bt = self.infer(ctx, body);
                ctx.pop();
                Ok(Term::Pi(h.clone(), a.clone(), Box::new(bt?)))
            }
            Term::Exists(_, a, body) => {
                self.sort_of(ctx, a)?;
                ctx.push((**a).clone());
                let s = self.sort_of(ctx, body);
                ctx.pop();
                match s? {
                    Term::Prop => Ok(Term::Prop),
                    other => Err(TypeError::new(body, "Prop", other)),
                }
            }
            Term::App(f, a) => {
                let ft = self.infer(ctx, f)?;
                match self.whnf(&ft)? {
                    Term::Pi(_, dom, cod) => {
                        self.check(ctx, a, &dom)?;
                        Ok(subst(&cod, 0, a))
                    }
                    other => Err(TypeError::new(f, "a function", other)),
                }
            }
            Term::Match(m) => {
                let st = self.infer(ctx, &m.scrutinee)?;
                if !self.conv(&st, &m.scrutinee_type)? {
                    return Err(TypeError::new(&m.scrutinee, &m.scrutinee_type, st));
                }
                let sw = self.whnf(&m.scrutinee_type)?;
                let (ind, params) = match sw.as_ind_app() {
                    Some((i, ps)) => (i.clone(), ps.into_iter().cloned().collect::<Vec<_>>()),
                    None => return Err(TypeError::new(t, "match on an inductive", sw)),
                };
                let decl = self.env.inductive(&ind).expect("typed inductive");
                if params.len() != decl.params.len() {
                    return Err(TypeError::new(t, "fully applied inductive", sw));
                }
                if m.branches.len() != decl.ctors.len() {
                    return Err(TypeError::new(
                        t,
                        format!("{} branches", decl.ctors.len()),
                        format!("{} branches", m.branches.len()),
                    ));
                }
                self.sort_of(ctx, &m.return_type)?;
                for (k, br) in m.branches.iter().enumerate() {
                    let args = decl.ctor_arg_types(k, &params);
                    if args.len() != br.arity() {
                        return Err(TypeError::new(
                            t,
                            format!("{} binders for {}", args.len(), decl.ctors[k].name),
                            br.arity(),
                        ));
                    }
                    for (i, a) in args.iter().enumerate() {
                        ctx.push(lift(a, i, 0));
                    }
                    let r = self.check(ctx, &br.body, &lift(&m.return_type, args.len(), 0));
                    ctx.truncate(ctx.len() - args.len());
                    r?;
                }
                Ok(m.return_type.clone())
            }
            Term::Fix(fx) => {
                self.sort_of(ctx, &fx.ty)?;
                let tele = Telescope::of(&fx.ty);
                if fx.decreasing >= tele.len() {
                    return Err(TypeError::new(t, "decreasing argument within the binders", fx.decreasing));
                }
                let dom = &tele.binders[fx.decreasing].1;
                let dw = self.whnf(dom)?;
                if dw.as_ind_app().is_none() {
                    return Err(TypeError::new(t, "inductive decreasing argument", dom));
                }
                ctx.push(fx.ty.clone());
                let r = self.check(ctx, &fx.body, &lift(&fx.ty, 1, 0));
                ctx.pop();
                r?;
                check_guard(&fx.body, fx.decreasing, ctx.len()).map_err(|e| TypeError::new(t, "guarded recursion", e))?;
                Ok(fx.ty.clone())
            }
            Term::Eq(ty, a, b) => {
                self.sort_of(ctx, ty)?;
                self.check(ctx, a, ty)?;
                self.check(ctx, b, ty)?;
                Ok(Term::Prop)
            }
            Term::True | Term::False => Ok(Term::Prop),
            Term::And(a, b) | Term::Or(a, b) => {
                self.check(ctx, a, &Term::Prop)?;
                self.check(ctx, b, &Term::Prop)?;
                Ok(Term::Prop)
            }
            Term::Not(a) => {
                self.check(ctx, a, &Term::Prop)?;
                Ok(Term::Prop)
            }
        }
    }
}

/// Structural recursion check. `body` sits under the self binder, which
/// is at level `self_level`; it must start with at least
/// `decreasing + 1` lambdas.
fn check_guard(body: &Term, decreasing: usize, self_level: usize) -> Result<(), String> {
    let mut cur = body;
    let mut level = self_level + 1;
    for _ in 0..decreasing {
        match cur {
            Term::Lam(_, _, b) => {
                cur = b;
                level += 1;
            }
            _ => return Err("fixpoint body must bind its arguments".into()),
        }
    }
    if !matches!(cur, Term::Lam(..)) {
        return Err("fixpoint body must bind its decreasing argument".into());
    }
    let g = Guard { self_level, dec_level: level };
    let mut smaller = HashSet::new();
    g.walk(body, self_level + 1, &mut smaller)
}

struct Guard {
    self_level: usize,
    dec_level: usize,
}

impl Guard {
    fn level(depth: usize, i: usize) -> Option<usize> {
        depth.checked_sub(i + 1)
    }

    fn walk(&self, t: &Term, depth: usize, smaller: &mut HashSet<usize>) -> Result<(), String> {
        let (head, args) = t.spine();
        if let Term::Var(i) = head {
            if Self::level(depth, *i) == Some(self.self_level) {
                let k = self.dec_level - self.self_level - 1;
                let Some(arg) = args.get(k) else {
                    return Err("recursive call without its decreasing argument".into());
                };
                match arg {
                    Term::Var(j) if Self::level(depth, *j).is_some_and(|l| smaller.contains(&l)) => {}
                    _ => return Err("recursive call on a term that is not structurally smaller".into()),
                }
                for a in args {
                    self.walk(a, depth, smaller)?;
                }
                return Ok(());
            }
        }
        if !args.is_empty() {
            self.walk(head, depth, smaller)?;
            for a in args {
                self.walk(a, depth, smaller)?;
            }
            return Ok(());
        }
        match t {
            Term::Pi(_, a, b) | Term::Lam(_, a, b) | Term::Exists(_, a, b) => {
                self.walk(a, depth, smaller)?;
                self.walk(b, depth + 1, smaller)
            }
            Term::And(a, b) | Term::Or(a, b) => {
                self.walk(a, depth, smaller)?;
                self.walk(b, depth, smaller)
            }
            Term::Not(a) => self.walk(a, depth, smaller),
            Term::Eq(ty, a, b) => {
                self.walk(ty, depth, smaller)?;
                self.walk(a, depth, smaller)?;
                self.walk(b, depth, smaller)
            }
            Term::Match(m) => {
                self.walk(&m.scrutinee, depth, smaller)?;
                self.walk(&m.return_type, depth, smaller)?;
                let on_smaller = match &m.scrutinee {
                    Term::Var(j) => Self::level(depth, *j)
                        .is_some_and(|l| l == self.dec_level || smaller.contains(&l)),
                    _ => false,
                };
                for br in &m.branches {
                    let added: Vec<usize> = if on_smaller { (depth..depth + br.arity()).collect() } else { vec![] };
                    for l in &added {
                        smaller.insert(*l);
                    }
                    let r = self.walk(&br.body, depth + br.arity(), smaller);
                    for l in &added {
                        smaller.remove(l);
                    }
                    r?;
                }
                Ok(())
            }
            Term::Fix(fx) => {
                self.walk(&fx.ty, depth, smaller)?;
                self.walk(&fx.body, depth + 1, smaller)
            }
            Term::Var(i) if Self::level(depth, *i) == Some(self.self_level) => {
                Err("recursive function used without arguments".into())
            }
            _ => Ok(()),
        }
    }
}

/// Instantiated constructor field types for a scrutinee type, or `None`
/// when the type is not an applied inductive.
pub fn ctor_fields(env: &GlobalEnv, scrutinee_type: &Term) -> Option<Vec<Vec<Term>>> {
    let (ind, params) = scrutinee_type.as_ind_app()?;
    let decl = env.inductive(ind)?;
    let params: Vec<Term> = params.into_iter().cloned().collect();
    Some((0..decl.ctors.len()).map(|k| decl.ctor_arg_types(k, &params)).collect())
}

/// Applies `instantiate` on a Pi codomain for a list of arguments.
pub fn apply_pi(ty: &Term, args: &[Term]) -> Option<Term> {
    let mut cur = ty.clone();
    for a in args {
        match cur {
            Term::Pi(_, _, b) => cur = instantiate(&b, std::slice::from_ref(a)),
            _ => return None,
        }
    }
    Some(cur)
}
