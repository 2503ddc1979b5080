//! Core term language.
//!
//! Types, programs and propositions share one syntax tree. Variables are
//! de Bruijn indices: `Var(0)` is the innermost enclosing binder. Binder
//! names are kept only as printing hints and are ignored by `==` and
//! `Hash`, so structural equality on [`Term`] is alpha-equivalence.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub type Name = Arc<str>;

/// Name of the builtin two-constructor boolean type.
pub const BOOL: &str = "bool";

/// Binder name hint. Never compared.
#[derive(Clone)]
pub struct Hint(pub Name);

impl Hint {
    pub fn new(s: &str) -> Self {
        Hint(Arc::from(s))
    }

    pub fn anon() -> Self {
        Hint(Arc::from("_"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_anon(&self) -> bool {
        self.0.is_empty() || &*self.0 == "_"
    }
}

impl PartialEq for Hint {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Hint {}

impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Debug for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Builtin operators interpreted by the solver back-end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    /// `<=` on Int, a proposition.
    Le,
    /// `<` on Int, a proposition.
    Lt,
    /// `<=?` on Int, a boolean.
    Leb,
    /// `<?` on Int, a boolean.
    Ltb,
    Orb,
    Andb,
    Negb,
    /// Boolean equality `eqb T x y`; takes its type explicitly.
    Eqb,
}

impl Prim {
    pub const ALL: [Prim; 11] = [
        Prim::Add,
        Prim::Sub,
        Prim::Mul,
        Prim::Le,
        Prim::Lt,
        Prim::Leb,
        Prim::Ltb,
        Prim::Orb,
        Prim::Andb,
        Prim::Negb,
        Prim::Eqb,
    ];

    /// Number of arguments of a saturated application.
    pub fn arity(self) -> usize {
        match self {
            Prim::Negb => 1,
            Prim::Eqb => 3,
            _ => 2,
        }
    }

    /// Prefix identifier usable in source files.
    pub fn ident(self) -> &'static str {
        match self {
            Prim::Add => "add",
            Prim::Sub => "sub",
            Prim::Mul => "mul",
            Prim::Le => "le",
            Prim::Lt => "lt",
            Prim::Leb => "leb",
            Prim::Ltb => "ltb",
            Prim::Orb => "orb",
            Prim::Andb => "andb",
            Prim::Negb => "negb",
            Prim::Eqb => "eqb",
        }
    }

    pub fn from_ident(s: &str) -> Option<Prim> {
        Prim::ALL.into_iter().find(|p| p.ident() == s)
    }

    /// Infix spelling, when the operator has one.
    pub fn infix(self) -> Option<&'static str> {
        match self {
            Prim::Add => Some("+"),
            Prim::Sub => Some("-"),
            Prim::Mul => Some("*"),
            Prim::Le => Some("<="),
            Prim::Lt => Some("<"),
            Prim::Leb => Some("<=?"),
            Prim::Ltb => Some("<?"),
            Prim::Orb => Some("||"),
            Prim::Andb => Some("&&"),
            Prim::Negb | Prim::Eqb => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    /// One hint per constructor argument; the first argument is the
    /// outermost binder of `body`.
    pub names: Vec<Hint>,
    pub body: Term,
}

impl Branch {
    pub fn arity(&self) -> usize {
        self.names.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Match {
    pub scrutinee: Term,
    /// Fully applied inductive type of the scrutinee.
    pub scrutinee_type: Term,
    pub return_type: Term,
    /// One branch per constructor, in declaration order.
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fix {
    pub name: Hint,
    /// Position of the structurally decreasing argument (0-based).
    pub decreasing: usize,
    pub ty: Term,
    /// Body under the self binder: `Var(0)` is the recursive function.
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Const(Name),
    /// Constructor `index` of an inductive.
    Ctor(Name, usize),
    Ind(Name),
    /// Opaque type parameter introduced from the goal's leading type binders.
    Param(Name),
    Type,
    Prop,
    Int,
    IntLit(i64),
    Prim(Prim),
    Pi(Hint, Box<Term>, Box<Term>),
    Lam(Hint, Box<Term>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Match(Box<Match>),
    Fix(Box<Fix>),
    /// `Eq(at_type, lhs, rhs)`
    Eq(Box<Term>, Box<Term>, Box<Term>),
    True,
    False,
    And(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    Not(Box<Term>),
    Exists(Hint, Box<Term>, Box<Term>),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Const(Arc::from(name))
    }

    pub fn ind(name: &str) -> Term {
        Term::Ind(Arc::from(name))
    }

    pub fn bool_type() -> Term {
        Term::ind(BOOL)
    }

    pub fn bool_lit(b: bool) -> Term {
        Term::Ctor(Arc::from(BOOL), if b { 0 } else { 1 })
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn pi(hint: &str, dom: Term, cod: Term) -> Term {
        Term::Pi(Hint::new(hint), Box::new(dom), Box::new(cod))
    }

    pub fn arrow(dom: Term, cod: Term) -> Term {
        Term::Pi(Hint::anon(), Box::new(dom), Box::new(lift(&cod, 1, 0)))
    }

    pub fn lam(hint: &str, dom: Term, body: Term) -> Term {
        Term::Lam(Hint::new(hint), Box::new(dom), Box::new(body))
    }

    pub fn eq(ty: Term, a: Term, b: Term) -> Term {
        Term::Eq(Box::new(ty), Box::new(a), Box::new(b))
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Term) -> Term {
        Term::Not(Box::new(a))
    }

    /// Non-dependent implication `a -> b` between closed-context propositions.
    pub fn implies(a: Term, b: Term) -> Term {
        Term::arrow(a, b)
    }

    /// Splits an application spine into head and arguments.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    /// Owned version of [`Term::spine`].
    pub fn into_spine(self) -> (Term, Vec<Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(*a);
            t = *f;
        }
        args.reverse();
        (t, args)
    }

    pub fn head(&self) -> &Term {
        let mut t = self;
        while let Term::App(f, _) = t {
            t = f;
        }
        t
    }

    /// `Some((inductive, index, args))` when the term is a constructor application.
    pub fn as_ctor_app(&self) -> Option<(&Name, usize, Vec<&Term>)> {
        let (h, args) = self.spine();
        match h {
            Term::Ctor(ind, k) => Some((ind, *k, args)),
            _ => None,
        }
    }

    /// `Some((inductive, params))` when the term is an applied inductive type.
    pub fn as_ind_app(&self) -> Option<(&Name, Vec<&Term>)> {
        let (h, args) = self.spine();
        match h {
            Term::Ind(name) => Some((name, args)),
            _ => None,
        }
    }

    pub fn is_sort(&self) -> bool {
        matches!(self, Term::Type | Term::Prop)
    }

    /// Number of nodes, used for size bounds in generators.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Pre-order traversal of every subterm (binder depth not tracked).
    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Pi(_, a, b) | Term::Lam(_, a, b) | Term::Exists(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::App(a, b) | Term::And(a, b) | Term::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Not(a) => a.visit(f),
            Term::Eq(t, a, b) => {
                t.visit(f);
                a.visit(f);
                b.visit(f);
            }
            Term::Match(m) => {
                m.scrutinee.visit(f);
                m.scrutinee_type.visit(f);
                m.return_type.visit(f);
                for br in &m.branches {
                    br.body.visit(f);
                }
            }
            Term::Fix(fx) => {
                fx.ty.visit(f);
                fx.body.visit(f);
            }
            _ => {}
        }
    }

    /// Pre-order traversal reporting the number of binders crossed.
    pub fn visit_with_depth(&self, depth: usize, f: &mut impl FnMut(&Term, usize)) {
        f(self, depth);
        match self {
            Term::Pi(_, a, b) | Term::Lam(_, a, b) | Term::Exists(_, a, b) => {
                a.visit_with_depth(depth, f);
                b.visit_with_depth(depth + 1, f);
            }
            Term::App(a, b) | Term::And(a, b) | Term::Or(a, b) => {
                a.visit_with_depth(depth, f);
                b.visit_with_depth(depth, f);
            }
            Term::Not(a) => a.visit_with_depth(depth, f),
            Term::Eq(t, a, b) => {
                t.visit_with_depth(depth, f);
                a.visit_with_depth(depth, f);
                b.visit_with_depth(depth, f);
            }
            Term::Match(m) => {
                m.scrutinee.visit_with_depth(depth, f);
                m.scrutinee_type.visit_with_depth(depth, f);
                m.return_type.visit_with_depth(depth, f);
                for br in &m.branches {
                    br.body.visit_with_depth(depth + br.arity(), f);
                }
            }
            Term::Fix(fx) => {
                fx.ty.visit_with_depth(depth, f);
                fx.body.visit_with_depth(depth + 1, f);
            }
            _ => {}
        }
    }

    /// True if no variable escapes the term.
    pub fn is_closed(&self) -> bool {
        self.free_above(0)
    }

    /// True if every free variable index is `< bound`, i.e. the term is
    /// well scoped in a context of length `bound`.
    pub fn free_above(&self, bound: usize) -> bool {
        let mut ok = true;
        self.visit_with_depth(0, &mut |t, d| {
            if let Term::Var(i) = t {
                if *i >= d + bound {
                    ok = false;
                }
            }
        });
        ok
    }

    /// True if `Var(index)` (relative to this term's root) occurs.
    pub fn has_var(&self, index: usize) -> bool {
        let mut found = false;
        self.visit_with_depth(0, &mut |t, d| {
            if let Term::Var(i) = t {
                if *i == index + d {
                    found = true;
                }
            }
        });
        found
    }

    /// Replaces every `Param(name)` by `by` (closed).
    pub fn replace_param(&self, name: &str, by: &Term) -> Term {
        map_leaves(self, 0, &mut |t, _| match t {
            Term::Param(p) if &**p == name => Some(by.clone()),
            _ => None,
        })
    }

    /// Names of all `Param`s in first-occurrence order.
    pub fn params(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        self.visit(&mut |t| {
            if let Term::Param(p) = t {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }
}

/// Rebuilds a term bottom-up, letting `f` replace leaves. `f` receives the
/// leaf and the number of binders crossed; returning `None` keeps the leaf.
pub fn map_leaves(t: &Term, depth: usize, f: &mut impl FnMut(&Term, usize) -> Option<Term>) -> Term {
    let b = |x: Term| Box::new(x);
    match t {
        Term::Pi(h, a, body) => Term::Pi(h.clone(), b(map_leaves(a, depth, f)), b(map_leaves(body, depth + 1, f))),
        Term::Lam(h, a, body) => Term::Lam(h.clone(), b(map_leaves(a, depth, f)), b(map_leaves(body, depth + 1, f))),
        Term::Exists(h, a, body) => {
            Term::Exists(h.clone(), b(map_leaves(a, depth, f)), b(map_leaves(body, depth + 1, f)))
        }
        Term::App(x, y) => Term::App(b(map_leaves(x, depth, f)), b(map_leaves(y, depth, f))),
        Term::And(x, y) => Term::And(b(map_leaves(x, depth, f)), b(map_leaves(y, depth, f))),
        Term::Or(x, y) => Term::Or(b(map_leaves(x, depth, f)), b(map_leaves(y, depth, f))),
        Term::Not(x) => Term::Not(b(map_leaves(x, depth, f))),
        Term::Eq(ty, x, y) => Term::Eq(
            b(map_leaves(ty, depth, f)),
            b(map_leaves(x, depth, f)),
            b(map_leaves(y, depth, f)),
        ),
        Term::Match(m) => Term::Match(Box::new(Match {
            scrutinee: map_leaves(&m.scrutinee, depth, f),
            scrutinee_type: map_leaves(&m.scrutinee_type, depth, f),
            return_type: map_leaves(&m.return_type, depth, f),
            branches: m
                .branches
                .iter()
                .map(|br| Branch {
                    names: br.names.clone(),
                    body: map_leaves(&br.body, depth + br.arity(), f),
                })
                .collect(),
        })),
        Term::Fix(fx) => Term::Fix(Box::new(Fix {
            name: fx.name.clone(),
            decreasing: fx.decreasing,
            ty: map_leaves(&fx.ty, depth, f),
            body: map_leaves(&fx.body, depth + 1, f),
        })),
        leaf => f(leaf, depth).unwrap_or_else(|| leaf.clone()),
    }
}

/// Increases every free variable `>= cutoff` by `amount`.
pub fn lift(t: &Term, amount: usize, cutoff: usize) -> Term {
    if amount == 0 {
        return t.clone();
    }
    map_leaves(t, 0, &mut |leaf, d| match leaf {
        Term::Var(i) if *i >= cutoff + d => Some(Term::Var(i + amount)),
        _ => None,
    })
}

/// Decreases every free variable `>= cutoff + amount` by `amount`; `None`
/// if some variable in `[cutoff, cutoff + amount)` occurs.
pub fn unlift(t: &Term, amount: usize, cutoff: usize) -> Option<Term> {
    let mut ok = true;
    let out = map_leaves(t, 0, &mut |leaf, d| match leaf {
        Term::Var(i) if *i >= cutoff + d => {
            if *i < cutoff + d + amount {
                ok = false;
                None
            } else {
                Some(Term::Var(i - amount))
            }
        }
        _ => None,
    });
    ok.then_some(out)
}

/// Substitutes `replacement` for `Var(index)`. Variables above `index`
/// are decremented. `replacement` lives in the context of `t` with the
/// substituted variable removed.
pub fn subst(t: &Term, index: usize, replacement: &Term) -> Term {
    map_leaves(t, 0, &mut |leaf, d| match leaf {
        Term::Var(i) if *i == index + d => Some(lift(replacement, d, 0)),
        Term::Var(i) if *i > index + d => Some(Term::Var(i - 1)),
        _ => None,
    })
}

/// Instantiates the `args.len()` innermost binders of `body` at once.
/// `args[0]` replaces the outermost of them, matching constructor field
/// order in match branches and the argument order of beta reduction.
pub fn instantiate(body: &Term, args: &[Term]) -> Term {
    let n = args.len();
    if n == 0 {
        return body.clone();
    }
    map_leaves(body, 0, &mut |leaf, d| match leaf {
        Term::Var(i) if *i >= d && *i < d + n => Some(lift(&args[n - 1 - (i - d)], d, 0)),
        Term::Var(i) if *i >= d + n => Some(Term::Var(i - n)),
        _ => None,
    })
}

/// A Pi telescope: binders outermost first, each domain in the context of
/// the binders before it, codomain under all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Telescope {
    pub binders: Vec<(Hint, Term)>,
    pub body: Term,
}

impl Telescope {
    /// Peels every leading Pi.
    pub fn of(t: &Term) -> Telescope {
        Self::of_while(t, |_| true)
    }

    /// Peels leading Pis while `keep(domain)` holds.
    pub fn of_while(t: &Term, mut keep: impl FnMut(&Term) -> bool) -> Telescope {
        let mut binders = Vec::new();
        let mut cur = t;
        while let Term::Pi(h, a, b) = cur {
            if !keep(a) {
                break;
            }
            binders.push((h.clone(), (**a).clone()));
            cur = b;
        }
        Telescope { binders, body: cur.clone() }
    }

    pub fn len(&self) -> usize {
        self.binders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.binders.is_empty()
    }

    pub fn rebuild(&self) -> Term {
        rebuild_pi(&self.binders, self.body.clone())
    }
}

pub fn rebuild_pi(binders: &[(Hint, Term)], body: Term) -> Term {
    binders
        .iter()
        .rev()
        .fold(body, |acc, (h, a)| Term::Pi(h.clone(), Box::new(a.clone()), Box::new(acc)))
}

pub fn rebuild_lam(binders: &[(Hint, Term)], body: Term) -> Term {
    binders
        .iter()
        .rev()
        .fold(body, |acc, (h, a)| Term::Lam(h.clone(), Box::new(a.clone()), Box::new(acc)))
}

/// Compact raw rendering with de Bruijn indices, for diagnostics.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "#{i}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Ctor(i, k) => write!(f, "{i}.{k}"),
            Term::Ind(i) => write!(f, "{i}"),
            Term::Param(p) => write!(f, "{p}"),
            Term::Type => write!(f, "Type"),
            Term::Prop => write!(f, "Prop"),
            Term::Int => write!(f, "Int"),
            Term::IntLit(n) => write!(f, "{n}"),
            Term::Prim(p) => write!(f, "{}", p.ident()),
            Term::Pi(h, a, b) => write!(f, "(forall {}:{}, {})", h.as_str(), a, b),
            Term::Lam(h, a, b) => write!(f, "(fun {}:{} => {})", h.as_str(), a, b),
            Term::Exists(h, a, b) => write!(f, "(exists {}:{}, {})", h.as_str(), a, b),
            Term::App(a, b) => write!(f, "({a} {b})"),
            Term::Match(m) => {
                write!(f, "(match {} with", m.scrutinee)?;
                for br in &m.branches {
                    write!(f, " | {} => {}", br.arity(), br.body)?;
                }
                write!(f, " end)")
            }
            Term::Fix(fx) => write!(f, "(fix {}/{} : {} := {})", fx.name.as_str(), fx.decreasing, fx.ty, fx.body),
            Term::Eq(t, a, b) => write!(f, "({a} =[{t}] {b})"),
            Term::True => write!(f, "True"),
            Term::False => write!(f, "False"),
            Term::And(a, b) => write!(f, "({a} /\\ {b})"),
            Term::Or(a, b) => write!(f, "({a} \\/ {b})"),
            Term::Not(a) => write!(f, "~{a}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift(&Term::Var(0), 1, 0), Term::Var(1));
        assert_eq!(lift(&Term::Var(0), 1, 1), Term::Var(0));
        let t = Term::lam("x", Term::Int, Term::Var(1));
        assert_eq!(lift(&t, 2, 0), Term::lam("x", Term::Int, Term::Var(3)));
    }

    #[test]
    fn subst_examples() {
        assert_eq!(subst(&Term::Var(0), 0, &c("c")), c("c"));
        assert_eq!(subst(&Term::Var(1), 0, &c("c")), Term::Var(0));
        let t = Term::lam("x", Term::Int, Term::app(Term::Var(1), Term::Var(0)));
        assert_eq!(
            subst(&t, 0, &c("c")),
            Term::lam("x", Term::Int, Term::app(c("c"), Term::Var(0)))
        );
    }

    #[test]
    fn instantiate_orders_outermost_first() {
        // body under two binders (a, b): b a
        let body = Term::app(Term::Var(0), Term::Var(1));
        let out = instantiate(&body, &[c("a"), c("b")]);
        assert_eq!(out, Term::app(c("b"), c("a")));
    }

    #[test]
    fn names_do_not_affect_equality() {
        let a = Term::lam("x", Term::Int, Term::Var(0));
        let b = Term::lam("y", Term::Int, Term::Var(0));
        assert_eq!(a, b);
    }

    #[test]
    fn unlift_detects_occurrence() {
        assert_eq!(unlift(&Term::Var(2), 1, 0), Some(Term::Var(1)));
        assert_eq!(unlift(&Term::Var(0), 1, 0), None);
    }
}
