//! Extraction of a proof state into a many-sorted first-order problem.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::env::GlobalEnv;
use crate::reduce::{whnf, Fuel};
use crate::state::{Justification, ProofState};
use crate::syntax::{instantiate, Hint, Name, Prim, Telescope, Term, BOOL};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
    /// Uninterpreted or datatype sort, by its emitted symbol.
    Named(String),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("Int"),
            Sort::Bool => f.write_str("Bool"),
            Sort::Named(s) => f.write_str(s),
        }
    }
}

/// SMT-LIB terms and formulas share one syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Sym(String),
    Int(i64),
    App(String, Vec<Expr>),
    Forall(Vec<(String, Sort)>, Box<Expr>),
}

impl Expr {
    fn app(f: &str, args: Vec<Expr>) -> Expr {
        Expr::App(f.to_string(), args)
    }

    pub fn not(e: Expr) -> Expr {
        Expr::app("not", vec![e])
    }

    fn conj(mut es: Vec<Expr>) -> Expr {
        match es.len() {
            0 => Expr::Sym("true".into()),
            1 => es.pop().unwrap(),
            _ => Expr::app("and", es),
        }
    }

    pub fn is_quantified(&self) -> bool {
        match self {
            Expr::Forall(..) => true,
            Expr::App(_, args) => args.iter().any(Expr::is_quantified),
            _ => false,
        }
    }

    /// Multiplication where neither factor is a literal.
    pub fn is_nonlinear(&self) -> bool {
        match self {
            Expr::App(f, args) => {
                (f == "*" && args.iter().filter(|a| !matches!(a, Expr::Int(_))).count() > 1)
                    || args.iter().any(Expr::is_nonlinear)
            }
            Expr::Forall(_, b) => b.is_nonlinear(),
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Sym(s) => f.write_str(s),
            Expr::Int(n) if *n < 0 => write!(f, "(- {})", n.unsigned_abs()),
            Expr::Int(n) => write!(f, "{n}"),
            Expr::App(g, args) if args.is_empty() => f.write_str(g),
            Expr::App(g, args) => {
                write!(f, "({g}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Expr::Forall(vars, body) => {
                f.write_str("(forall (")?;
                for (i, (v, s)) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({v} {s})")?;
                }
                write!(f, ") {body})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunKind {
    Constant,
    Constructor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<Sort>,
    pub result: Sort,
    pub kind: FunKind,
}

/// A datatype instance with its constructors, for native encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatatypeDecl {
    pub sort: String,
    pub ctors: Vec<(String, Vec<Sort>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub name: Name,
    pub formula: Expr,
    /// Injectivity, disjointness or exhaustiveness of a datatype.
    pub datatype_axiom: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolProblem {
    /// Uninterpreted sorts, in first-use order.
    pub sorts: Vec<String>,
    pub datatypes: Vec<DatatypeDecl>,
    pub functions: Vec<FunDecl>,
    pub axioms: Vec<Axiom>,
    /// Constants standing for the goal's universally bound variables.
    pub skolems: Vec<(String, Sort)>,
    pub negated_goal: Expr,
    /// The goal itself, universally closed.
    pub goal: Expr,
    /// Hypotheses left out, with the reason.
    pub skipped: Vec<(Name, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("goal is not first-order: {0}")]
    GoalNotFirstOrder(String),
}

const RESERVED: &[&str] = &[
    "and", "or", "not", "xor", "ite", "true", "false", "distinct", "let", "forall", "exists", "match", "par", "as",
    "assert", "Int", "Bool", "Real", "Array", "div", "mod", "abs", "to_real", "to_int", "is_int", "select", "store",
    "push", "pop", "exit", "echo", "reset", "NUMERAL", "DECIMAL", "STRING", "BINARY", "HEXADECIMAL", "lambda",
];

/// Maps an identifier of the core language to an SMT-LIB simple symbol.
/// Identifiers never contain `?`, which keeps the scheme reversible.
pub fn escape(id: &str) -> String {
    let body = id.replace('\'', "?p");
    if RESERVED.contains(&id) || id == "_" {
        format!("?r{body}")
    } else {
        body
    }
}

pub fn unescape(sym: &str) -> String {
    sym.strip_prefix("?r").unwrap_or(sym).replace("?p", "'")
}

/// `base$T1$T2`; composite arguments are bracketed so that the encoding
/// of a type tree is unambiguous.
pub fn mangle(base: &str, args: &[Sort]) -> String {
    let mut out = escape(base);
    for a in args {
        let s = a.to_string();
        out.push('$');
        if s.contains('$') {
            out.push('<');
            out.push_str(&s);
            out.push('>');
        } else {
            out.push_str(&s);
        }
    }
    out
}

type R<T> = Result<T, String>;

struct Extractor<'e> {
    env: &'e GlobalEnv,
    sorts: IndexMap<String, Term>,
    datatypes: IndexMap<String, DatatypeDecl>,
    funs: IndexMap<String, FunDecl>,
    counter: usize,
}

#[derive(Default)]
struct Mark {
    sorts: usize,
    datatypes: usize,
    funs: usize,
}

fn is_prop(t: &Term) -> bool {
    match t {
        Term::Eq(..) | Term::True | Term::False | Term::And(..) | Term::Or(..) | Term::Not(..) | Term::Exists(..) => true,
        Term::Pi(_, _, b) => is_prop(b),
        _ => matches!(t.head(), Term::Prim(Prim::Le | Prim::Lt)),
    }
}

/// Binder scope: `None` for premise binders, which must not be used.
type Scope = Vec<Option<(String, Sort)>>;

impl<'e> Extractor<'e> {
    fn mark(&self) -> Mark {
        Mark { sorts: self.sorts.len(), datatypes: self.datatypes.len(), funs: self.funs.len() }
    }

    fn rollback(&mut self, m: Mark) {
        self.sorts.truncate(m.sorts);
        self.datatypes.truncate(m.datatypes);
        self.funs.truncate(m.funs);
    }

    fn sort(&mut self, ty: &Term) -> R<Sort> {
        match ty {
            Term::Int => return Ok(Sort::Int),
            Term::Param(n) => {
                let s = escape(n);
                self.sorts.entry(s.clone()).or_insert_with(|| ty.clone());
                return Ok(Sort::Named(s));
            }
            _ => {}
        }
        let Some((ind, params)) = ty.as_ind_app() else {
            return Err(format!("`{ty}` is not a first-order sort"));
        };
        if &**ind == BOOL {
            return Ok(Sort::Bool);
        }
        let decl = self.env.inductive(ind).ok_or_else(|| format!("unknown type {ind}"))?;
        if params.len() != decl.params.len() || !ty.is_closed() {
            return Err(format!("`{ty}` is not a ground type"));
        }
        let params: Vec<Term> = params.into_iter().cloned().collect();
        let mut psorts = Vec::new();
        for p in &params {
            psorts.push(self.sort(p)?);
        }
        let name = mangle(ind, &psorts);
        if !self.sorts.contains_key(&name) {
            self.sorts.insert(name.clone(), ty.clone());
            let mut ctors = Vec::new();
            for k in 0..decl.ctors.len() {
                let mut args = Vec::new();
                for a in decl.ctor_arg_types(k, &params) {
                    args.push(self.sort(&a)?);
                }
                ctors.push((mangle(&decl.ctors[k].name, &psorts), args));
            }
            self.datatypes.insert(name.clone(), DatatypeDecl { sort: name.clone(), ctors });
        }
        Ok(Sort::Named(name))
    }

    fn fresh(&mut self, hint: &Hint, tag: &str) -> String {
        self.counter += 1;
        let base = if hint.is_anon() || hint.as_str() == "_" { "x" } else { hint.as_str() };
        format!("{}?{tag}{}", escape(base), self.counter)
    }

    fn declare(&mut self, name: String, args: Vec<Sort>, result: Sort, kind: FunKind) -> R<()> {
        match self.funs.get(&name) {
            Some(d) if d.args != args || d.result != result => Err(format!("inconsistent use of {name}")),
            Some(_) => Ok(()),
            None => {
                self.funs.insert(name.clone(), FunDecl { name, args, result, kind });
                Ok(())
            }
        }
    }

    /// Prenex universal statement: binders and premises, then a body.
    fn statement(&mut self, t: &Term) -> R<Expr> {
        let mut scope: Scope = Vec::new();
        let mut vars = Vec::new();
        let mut premises = Vec::new();
        let mut cur = t;
        while let Term::Pi(h, dom, body) = cur {
            if **dom == Term::Type {
                return Err("quantifies over types".into());
            }
            if is_prop(dom) {
                premises.push(self.prop(dom, &scope)?);
                scope.push(None);
            } else {
                let s = self.sort(dom)?;
                let v = self.fresh(h, "");
                vars.push((v.clone(), s.clone()));
                scope.push(Some((v, s)));
            }
            cur = body;
        }
        let body = self.prop(cur, &scope)?;
        let body = if premises.is_empty() { body } else { Expr::app("=>", vec![Expr::conj(premises), body]) };
        Ok(if vars.is_empty() { body } else { Expr::Forall(vars, Box::new(body)) })
    }

    /// Skolemized negation of a prenex statement.
    fn negated(&mut self, t: &Term, skolems: &mut Vec<(String, Sort)>) -> R<Expr> {
        let mut scope: Scope = Vec::new();
        let mut parts = Vec::new();
        let mut cur = t;
        while let Term::Pi(h, dom, body) = cur {
            if **dom == Term::Type {
                return Err("quantifies over types".into());
            }
            if is_prop(dom) {
                parts.push(self.prop(dom, &scope)?);
                scope.push(None);
            } else {
                let s = self.sort(dom)?;
                let v = self.fresh(h, "g");
                skolems.push((v.clone(), s.clone()));
                scope.push(Some((v, s)));
            }
            cur = body;
        }
        parts.push(Expr::not(self.prop(cur, &scope)?));
        Ok(Expr::conj(parts))
    }

    fn prop(&mut self, t: &Term, scope: &Scope) -> R<Expr> {
        Ok(match t {
            Term::True => Expr::Sym("true".into()),
            Term::False => Expr::Sym("false".into()),
            Term::And(a, b) => Expr::app("and", vec![self.prop(a, scope)?, self.prop(b, scope)?]),
            Term::Or(a, b) => Expr::app("or", vec![self.prop(a, scope)?, self.prop(b, scope)?]),
            Term::Not(a) => Expr::not(self.prop(a, scope)?),
            Term::Pi(_, dom, body) if is_prop(dom) => {
                if body.has_var(0) {
                    return Err("proof-relevant implication".into());
                }
                let p = self.prop(dom, scope)?;
                let mut inner = scope.clone();
                inner.push(None);
                Expr::app("=>", vec![p, self.prop(body, &inner)?])
            }
            Term::Pi(..) => return Err("quantifier below the prefix".into()),
            Term::Exists(..) => return Err("existential quantifier".into()),
            Term::Eq(ty, a, b) => {
                let ty = whnf(self.env, ty, &mut Fuel::default()).map_err(|e| e.to_string())?;
                if matches!(ty, Term::Pi(..)) {
                    return Err("equality at a function type".into());
                }
                if ty.is_sort() {
                    return Err("equality between types or propositions".into());
                }
                let (x, _) = self.term(a, scope)?;
                let (y, _) = self.term(b, scope)?;
                Expr::app("=", vec![x, y])
            }
            _ => {
                let (h, args) = t.spine();
                match (h, args.len()) {
                    (Term::Prim(p @ (Prim::Le | Prim::Lt)), 2) => {
                        let op = if *p == Prim::Le { "<=" } else { "<" };
                        Expr::app(op, vec![self.term(args[0], scope)?.0, self.term(args[1], scope)?.0])
                    }
                    _ => return Err(format!("unsupported proposition `{t}`")),
                }
            }
        })
    }

    fn term(&mut self, t: &Term, scope: &Scope) -> R<(Expr, Sort)> {
        if let Term::Var(i) = t {
            return match scope.len().checked_sub(i + 1).and_then(|k| scope[k].clone()) {
                Some((v, s)) => Ok((Expr::Sym(v), s)),
                None => Err("reference to a proof or unbound variable".into()),
            };
        }
        if let Term::IntLit(n) = t {
            return Ok((Expr::Int(*n), Sort::Int));
        }
        if let Term::Match(m) = t {
            let sty = whnf(self.env, &m.scrutinee_type, &mut Fuel::default()).map_err(|e| e.to_string())?;
            if sty != Term::bool_type() {
                return Err("pattern matching on a non-boolean value".into());
            }
            let (c, _) = self.term(&m.scrutinee, scope)?;
            let (a, s) = self.term(&m.branches[0].body, scope)?;
            let (b, _) = self.term(&m.branches[1].body, scope)?;
            return Ok((Expr::app("ite", vec![c, a, b]), s));
        }
        let (h, args) = t.spine();
        match h {
            Term::Prim(p) => {
                if args.len() != p.arity() {
                    return Err(format!("partial application of {}", p.ident()));
                }
                let mut es = Vec::new();
                // eqb takes its type first.
                let skip = usize::from(*p == Prim::Eqb);
                for a in &args[skip..] {
                    es.push(self.term(a, scope)?.0);
                }
                let (op, sort) = match p {
                    Prim::Add => ("+", Sort::Int),
                    Prim::Sub => ("-", Sort::Int),
                    Prim::Mul => ("*", Sort::Int),
                    Prim::Leb => ("<=", Sort::Bool),
                    Prim::Ltb => ("<", Sort::Bool),
                    Prim::Orb => ("or", Sort::Bool),
                    Prim::Andb => ("and", Sort::Bool),
                    Prim::Negb => ("not", Sort::Bool),
                    Prim::Eqb => ("=", Sort::Bool),
                    Prim::Le | Prim::Lt => return Err("proposition used as a value".into()),
                };
                Ok((Expr::app(op, es), sort))
            }
            Term::Ctor(ind, k) => {
                let decl = self.env.inductive(ind).ok_or_else(|| format!("unknown type {ind}"))?;
                let np = decl.params.len();
                let nf = decl.ctors[*k].args.len();
                if args.len() != np + nf {
                    return Err(format!("partial application of {}", decl.ctors[*k].name));
                }
                if &**ind == BOOL {
                    return Ok((Expr::Sym(if *k == 0 { "true" } else { "false" }.into()), Sort::Bool));
                }
                let inst = Term::apps(Term::Ind(ind.clone()), args[..np].iter().map(|a| (*a).clone()));
                let result = self.sort(&inst)?;
                let mut psorts = Vec::new();
                for p in &args[..np] {
                    psorts.push(self.sort(p)?);
                }
                let params: Vec<Term> = args[..np].iter().map(|a| (*a).clone()).collect();
                let mut arg_sorts = Vec::new();
                for a in decl.ctor_arg_types(*k, &params) {
                    arg_sorts.push(self.sort(&a)?);
                }
                let name = mangle(&decl.ctors[*k].name, &psorts);
                self.declare(name.clone(), arg_sorts, result.clone(), FunKind::Constructor)?;
                let mut es = Vec::new();
                for a in &args[np..] {
                    es.push(self.term(a, scope)?.0);
                }
                Ok((Expr::App(name, es), result))
            }
            Term::Const(c) => {
                let def = self.env.definition(c).ok_or_else(|| format!("unknown constant {c}"))?;
                let tyb = Telescope::of_while(&def.ty, |d| *d == Term::Type);
                let nt = tyb.len();
                if args.len() < nt {
                    return Err(format!("partial application of {c}"));
                }
                let targs: Vec<Term> = args[..nt].iter().map(|a| (*a).clone()).collect();
                let mut psorts = Vec::new();
                for a in &targs {
                    psorts.push(self.sort(a)?);
                }
                let rest = Telescope::of(&instantiate(&tyb.body, &targs));
                if rest.len() != args.len() - nt {
                    return Err(format!("{c} is not fully applied"));
                }
                let mut arg_sorts = Vec::new();
                for (_, d) in &rest.binders {
                    if !d.is_closed() {
                        return Err(format!("{c} has a dependent type"));
                    }
                    arg_sorts.push(self.sort(d)?);
                }
                if !rest.body.is_closed() {
                    return Err(format!("{c} has a dependent type"));
                }
                let result = self.sort(&rest.body)?;
                let name = mangle(c, &psorts);
                self.declare(name.clone(), arg_sorts, result.clone(), FunKind::Constant)?;
                let mut es = Vec::new();
                for a in &args[nt..] {
                    es.push(self.term(a, scope)?.0);
                }
                Ok((Expr::App(name, es), result))
            }
            Term::Lam(..) | Term::Fix(_) => Err("anonymous function".into()),
            Term::Match(_) => Err("applied match".into()),
            _ => Err(format!("unsupported term `{t}`")),
        }
    }
}

/// Extracts the first-order part of `state`. Hypotheses that are not
/// first-order are reported in `skipped`; the goal must be first-order.
pub fn extract_fol(state: &ProofState) -> Result<FolProblem, ExtractError> {
    let mut ex = Extractor {
        env: &state.env,
        sorts: IndexMap::new(),
        datatypes: IndexMap::new(),
        funs: IndexMap::new(),
        counter: 0,
    };
    let mut skolems = Vec::new();
    let printed = || state.print_statement(&state.goal);
    let negated_goal = ex
        .negated(&state.goal, &mut skolems)
        .map_err(|e| ExtractError::GoalNotFirstOrder(format!("{} ({e})", printed())))?;
    let goal = ex.statement(&state.goal).map_err(|e| ExtractError::GoalNotFirstOrder(format!("{} ({e})", printed())))?;
    let mut axioms = Vec::new();
    let mut skipped = Vec::new();
    for h in &state.hypotheses {
        let mark = ex.mark();
        match ex.statement(&h.statement) {
            Ok(formula) => axioms.push(Axiom {
                name: h.name.clone(),
                formula,
                datatype_axiom: matches!(h.justification, Justification::DatatypeAxiom { .. }),
            }),
            Err(why) => {
                ex.rollback(mark);
                skipped.push((h.name.clone(), why));
            }
        }
    }
    Ok(FolProblem {
        sorts: ex.sorts.keys().filter(|s| !ex.datatypes.contains_key(*s)).cloned().collect(),
        datatypes: ex.datatypes.into_values().collect(),
        functions: ex.funs.into_values().collect(),
        axioms,
        skolems,
        negated_goal,
        goal,
        skipped,
    })
}
