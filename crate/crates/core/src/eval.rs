//! Call-by-value evaluator over closures, independent of the reduction
//! engine in [`crate::reduce`], and randomized truth testing of closed
//! propositions built on it.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::GlobalEnv;
use crate::generate::{random_ground_term_with, type_pool, GenError, SizeTable};
use crate::reduce::{whnf, Fuel};
use crate::syntax::{map_leaves, lift, Name, Prim, Term, Telescope, BOOL};
use crate::typing::typecheck;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("evaluation fuel exhausted")]
    FuelExhausted,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("ill-typed evaluation: {0}")]
    Stuck(String),
}

type EResult<T> = Result<T, EvalError>;

#[derive(Clone)]
pub enum Value {
    Int(BigInt),
    Ctor { ind: Name, idx: usize, params: Arc<[Term]>, fields: Arc<[Value]> },
    /// Types are runtime values so that type arguments can flow.
    Type(Term),
    Closure { env: Env, body: Arc<Code> },
    Partial { head: Head, args: Vec<Value> },
    /// Placeholder bound by an implication premise.
    Proof,
}

#[derive(Clone)]
pub enum Head {
    Ctor { ind: Name, idx: usize, nparams: usize, arity: usize },
    Prim(Prim),
    Fix { env: Env, decreasing: usize, body: Arc<Code> },
}

impl Value {
    pub fn bool(b: bool) -> Value {
        Value::Ctor { ind: Arc::from(BOOL), idx: if b { 0 } else { 1 }, params: Arc::from([]), fields: Arc::from([]) }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Ctor { ind, idx, .. } if &**ind == BOOL => Some(*idx == 0),
            _ => None,
        }
    }

    /// Back to a closed term, for first-order values.
    pub fn to_term(&self) -> Option<Term> {
        match self {
            Value::Int(n) => Some(Term::IntLit(i64::try_from(n).ok()?)),
            Value::Type(t) => Some(t.clone()),
            Value::Ctor { ind, idx, params, fields } => {
                let mut args: Vec<Term> = params.to_vec();
                for f in fields.iter() {
                    args.push(f.to_term()?);
                }
                Some(Term::apps(Term::Ctor(ind.clone(), *idx), args))
            }
            _ => None,
        }
    }

    /// Structural equality of first-order values.
    pub fn equal(&self, other: &Value) -> EResult<bool> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Ok(a == b),
            (Value::Ctor { ind: i1, idx: k1, fields: f1, .. }, Value::Ctor { ind: i2, idx: k2, fields: f2, .. }) => {
                if i1 != i2 || k1 != k2 || f1.len() != f2.len() {
                    return Ok(false);
                }
                for (a, b) in f1.iter().zip(f2.iter()) {
                    if !a.equal(b)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (Value::Type(a), Value::Type(b)) => Ok(a == b),
            _ => Err(EvalError::Unsupported("equality on functional values".into())),
        }
    }

    fn collect_subvalues(&self, out: &mut Vec<Value>) {
        match self {
            Value::Int(_) => out.push(self.clone()),
            Value::Ctor { fields, .. } => {
                out.push(self.clone());
                for f in fields.iter() {
                    f.collect_subvalues(out);
                }
            }
            _ => {}
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_term() {
            Some(t) => write!(f, "{t}"),
            None => write!(f, "<function>"),
        }
    }
}

/// Persistent evaluation environment, innermost binding first.
#[derive(Clone, Default)]
pub struct Env(Option<Arc<EnvNode>>);

struct EnvNode {
    value: Value,
    next: Env,
}

impl Env {
    pub fn push(&self, value: Value) -> Env {
        Env(Some(Arc::new(EnvNode { value, next: self.clone() })))
    }

    pub fn get(&self, mut i: usize) -> Option<&Value> {
        let mut cur = self.0.as_ref()?;
        while i > 0 {
            cur = cur.next.0.as_ref()?;
            i -= 1;
        }
        Some(&cur.value)
    }

    fn values(&self) -> Vec<&Value> {
        let mut out = Vec::new();
        let mut cur = &self.0;
        while let Some(n) = cur {
            out.push(&n.value);
            cur = &n.next.0;
        }
        out
    }
}

/// Compiled object-level code with shared subtrees, so closures are cheap.
pub enum Code {
    Var(usize),
    Const(Name),
    Ctor(Name, usize),
    /// A type expression; free variables are type variables.
    Type(Term),
    Int(i64),
    Prim(Prim),
    Lam(Arc<Code>),
    App(Arc<Code>, Arc<Code>),
    Match(Arc<Code>, Vec<(usize, Arc<Code>)>),
    Fix { decreasing: usize, body: Arc<Code> },
}

fn is_type_expr(t: &Term) -> bool {
    matches!(
        t.head(),
        Term::Ind(_) | Term::Int | Term::Param(_) | Term::Type | Term::Prop | Term::Pi(..)
    ) || matches!(
        t,
        Term::Eq(..) | Term::True | Term::False | Term::And(..) | Term::Or(..) | Term::Not(..) | Term::Exists(..)
    )
}

pub fn compile(t: &Term) -> Arc<Code> {
    if is_type_expr(t) {
        return Arc::new(Code::Type(t.clone()));
    }
    Arc::new(match t {
        Term::Var(i) => Code::Var(*i),
        Term::Const(c) => Code::Const(c.clone()),
        Term::Ctor(i, k) => Code::Ctor(i.clone(), *k),
        Term::IntLit(n) => Code::Int(*n),
        Term::Prim(p) => Code::Prim(*p),
        Term::Lam(_, _, b) => Code::Lam(compile(b)),
        Term::App(f, a) => Code::App(compile(f), compile(a)),
        Term::Match(m) => Code::Match(
            compile(&m.scrutinee),
            m.branches.iter().map(|b| (b.arity(), compile(&b.body))).collect(),
        ),
        Term::Fix(fx) => Code::Fix { decreasing: fx.decreasing, body: compile(&fx.body) },
        other => Code::Type(other.clone()),
    })
}

/// Evaluator bound to an environment; definitions are compiled once.
pub struct Evaluator<'e> {
    pub env: &'e GlobalEnv,
    defs: HashMap<Name, Arc<Code>>,
    pub max_steps: u64,
}

struct Budget {
    left: u64,
}

impl Budget {
    fn tick(&mut self) -> EResult<()> {
        if self.left == 0 {
            return Err(EvalError::FuelExhausted);
        }
        self.left -= 1;
        Ok(())
    }
}

/// Substitutes runtime type values for the free variables of a type term.
fn close_type(t: &Term, env: &Env) -> EResult<Term> {
    let mut err = None;
    let out = map_leaves(t, 0, &mut |leaf, d| match leaf {
        Term::Var(i) if *i >= d => match env.get(i - d) {
            Some(Value::Type(u)) => Some(lift(u, d, 0)),
            Some(v) => match v.to_term() {
                Some(u) => Some(lift(&u, d, 0)),
                None => {
                    err = Some(EvalError::Unsupported("function value inside a type or proposition".into()));
                    None
                }
            },
            None => {
                err = Some(EvalError::Stuck(format!("unbound variable {i}")));
                None
            }
        },
        _ => None,
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

impl<'e> Evaluator<'e> {
    pub fn new(env: &'e GlobalEnv) -> Self {
        let defs = env.definitions.values().map(|d| (d.name.clone(), compile(&d.body))).collect();
        Evaluator { env, defs, max_steps: crate::reduce::DEFAULT_FUEL }
    }

    /// Evaluates a closed term.
    pub fn eval_closed(&self, t: &Term) -> EResult<Value> {
        let mut b = Budget { left: self.max_steps };
        self.eval(&compile(t), &Env::default(), &mut b)
    }

    fn eval(&self, c: &Arc<Code>, env: &Env, b: &mut Budget) -> EResult<Value> {
        match &**c {
            Code::Var(i) => env.get(*i).cloned().ok_or_else(|| EvalError::Stuck(format!("unbound variable {i}"))),
            Code::Const(name) => {
                let body = self.defs.get(name).ok_or_else(|| EvalError::Stuck(format!("unknown constant {name}")))?;
                b.tick()?;
                self.eval(body, &Env::default(), b)
            }
            Code::Ctor(ind, idx) => {
                let decl = self.env.inductive(ind).ok_or_else(|| EvalError::Stuck(format!("unknown type {ind}")))?;
                let nparams = decl.params.len();
                let arity = nparams + decl.ctors[*idx].args.len();
                if arity == 0 {
                    return Ok(Value::Ctor { ind: ind.clone(), idx: *idx, params: Arc::from([]), fields: Arc::from([]) });
                }
                Ok(Value::Partial { head: Head::Ctor { ind: ind.clone(), idx: *idx, nparams, arity }, args: vec![] })
            }
            Code::Type(t) => Ok(Value::Type(close_type(t, env)?)),
            Code::Int(n) => Ok(Value::Int(BigInt::from(*n))),
            Code::Prim(p) => Ok(Value::Partial { head: Head::Prim(*p), args: vec![] }),
            Code::Lam(body) => Ok(Value::Closure { env: env.clone(), body: body.clone() }),
            Code::App(f, a) => {
                let fv = self.eval(f, env, b)?;
                let av = self.eval(a, env, b)?;
                self.apply(fv, av, b)
            }
            Code::Match(s, branches) => {
                let sv = self.eval(s, env, b)?;
                b.tick()?;
                match sv {
                    Value::Ctor { idx, fields, .. } => {
                        let (arity, body) = branches.get(idx).ok_or_else(|| EvalError::Stuck("missing branch".into()))?;
                        if *arity != fields.len() {
                            return Err(EvalError::Stuck("branch arity".into()));
                        }
                        let mut e = env.clone();
                        for f in fields.iter() {
                            e = e.push(f.clone());
                        }
                        self.eval(body, &e, b)
                    }
                    _ => Err(EvalError::Stuck("match on a non-constructor value".into())),
                }
            }
            Code::Fix { decreasing, body } => Ok(Value::Partial {
                head: Head::Fix { env: env.clone(), decreasing: *decreasing, body: body.clone() },
                args: vec![],
            }),
        }
    }

    pub fn apply_value(&self, f: Value, a: Value) -> EResult<Value> {
        let mut b = Budget { left: self.max_steps };
        self.apply(f, a, &mut b)
    }

    fn apply(&self, f: Value, a: Value, b: &mut Budget) -> EResult<Value> {
        b.tick()?;
        match f {
            Value::Closure { env, body } => self.eval(&body, &env.push(a), b),
            Value::Type(t) => match a {
                Value::Type(u) => Ok(Value::Type(Term::app(t, u))),
                _ => Err(EvalError::Stuck("type applied to a value".into())),
            },
            Value::Partial { head, mut args } => {
                args.push(a);
                match head {
                    Head::Ctor { ind, idx, nparams, arity } => {
                        if args.len() < arity {
                            return Ok(Value::Partial { head: Head::Ctor { ind, idx, nparams, arity }, args });
                        }
                        let mut params = Vec::with_capacity(nparams);
                        for p in &args[..nparams] {
                            match p {
                                Value::Type(t) => params.push(t.clone()),
                                _ => return Err(EvalError::Stuck("constructor parameter is not a type".into())),
                            }
                        }
                        Ok(Value::Ctor { ind, idx, params: params.into(), fields: args[nparams..].to_vec().into() })
                    }
                    Head::Prim(p) => {
                        if args.len() < p.arity() {
                            return Ok(Value::Partial { head: Head::Prim(p), args });
                        }
                        prim(p, &args)
                    }
                    Head::Fix { env, decreasing, body } => {
                        if args.len() <= decreasing {
                            return Ok(Value::Partial { head: Head::Fix { env, decreasing, body }, args });
                        }
                        let me = Value::Partial {
                            head: Head::Fix { env: env.clone(), decreasing, body: body.clone() },
                            args: vec![],
                        };
                        let mut cur = self.eval(&body, &env.push(me), b)?;
                        for a in args {
                            cur = self.apply(cur, a, b)?;
                        }
                        Ok(cur)
                    }
                }
            }
            _ => Err(EvalError::Stuck("application of a non-function".into())),
        }
    }
}

fn prim(p: Prim, args: &[Value]) -> EResult<Value> {
    let int = |v: &Value| match v {
        Value::Int(n) => Ok(n.clone()),
        _ => Err(EvalError::Stuck("expected an integer".into())),
    };
    let boolean = |v: &Value| v.as_bool().ok_or_else(|| EvalError::Stuck("expected a boolean".into()));
    Ok(match p {
        Prim::Add => Value::Int(int(&args[0])? + int(&args[1])?),
        Prim::Sub => Value::Int(int(&args[0])? - int(&args[1])?),
        Prim::Mul => Value::Int(int(&args[0])? * int(&args[1])?),
        Prim::Le => Value::Type(if int(&args[0])? <= int(&args[1])? { Term::True } else { Term::False }),
        Prim::Lt => Value::Type(if int(&args[0])? < int(&args[1])? { Term::True } else { Term::False }),
        Prim::Leb => Value::bool(int(&args[0])? <= int(&args[1])?),
        Prim::Ltb => Value::bool(int(&args[0])? < int(&args[1])?),
        Prim::Orb => Value::bool(boolean(&args[0])? || boolean(&args[1])?),
        Prim::Andb => Value::bool(boolean(&args[0])? && boolean(&args[1])?),
        Prim::Negb => Value::bool(!boolean(&args[0])?),
        Prim::Eqb => Value::bool(args[1].equal(&args[2])?),
    })
}

/// Evaluates a closed term of ground object type.
pub fn eval_ground(env: &GlobalEnv, t: &Term) -> Result<Value, EvalError> {
    Evaluator::new(env).eval_closed(t)
}

/// Converts a ground constructor/literal term to a value without evaluation.
pub fn value_of_ground(t: &Term) -> Option<Value> {
    let (h, args) = t.spine();
    match h {
        Term::IntLit(n) if args.is_empty() => Some(Value::Int(BigInt::from(*n))),
        Term::Ctor(ind, idx) => {
            // Parameters are the leading type arguments.
            let split = args.iter().take_while(|a| is_type_expr(a)).count();
            let params: Vec<Term> = args[..split].iter().map(|t| (*t).clone()).collect();
            let mut fields = Vec::new();
            for a in &args[split..] {
                fields.push(value_of_ground(a)?);
            }
            Some(Value::Ctor { ind: ind.clone(), idx: *idx, params: params.into(), fields: fields.into() })
        }
        _ => None,
    }
}

// ---- truth testing ----

/// Compiled proposition.
enum PCode {
    True,
    False,
    And(Box<PCode>, Box<PCode>),
    Or(Box<PCode>, Box<PCode>),
    Not(Box<PCode>),
    Implies(Box<PCode>, Box<PCode>),
    ForallType(Box<PCode>),
    ForallObj(Term, Box<PCode>),
    Exists(Term, Box<PCode>),
    Eq { ty: Term, a: Arc<Code>, b: Arc<Code> },
    Cmp(Prim, Arc<Code>, Arc<Code>),
    Stuck(Term),
}

fn compile_prop(env: &GlobalEnv, ctx: &mut Vec<Term>, t: &Term) -> EResult<PCode> {
    let b = Box::new;
    Ok(match t {
        Term::True => PCode::True,
        Term::False => PCode::False,
        Term::And(x, y) => PCode::And(b(compile_prop(env, ctx, x)?), b(compile_prop(env, ctx, y)?)),
        Term::Or(x, y) => PCode::Or(b(compile_prop(env, ctx, x)?), b(compile_prop(env, ctx, y)?)),
        Term::Not(x) => PCode::Not(b(compile_prop(env, ctx, x)?)),
        Term::Pi(_, dom, body) => {
            let sort = typecheck(env, ctx, dom).map_err(|e| EvalError::Stuck(e.to_string()))?;
            let sort = whnf(env, &sort, &mut Fuel::default()).map_err(|_| EvalError::FuelExhausted)?;
            let is_type_binder = **dom == Term::Type;
            let premise = if sort == Term::Prop { Some(compile_prop(env, ctx, dom)?) } else { None };
            ctx.push((**dom).clone());
            let inner = compile_prop(env, ctx, body);
            ctx.pop();
            let inner = inner?;
            match premise {
                Some(p) => PCode::Implies(b(p), b(inner)),
                None if is_type_binder => PCode::ForallType(b(inner)),
                None => PCode::ForallObj((**dom).clone(), b(inner)),
            }
        }
        Term::Exists(_, dom, body) => {
            ctx.push((**dom).clone());
            let inner = compile_prop(env, ctx, body);
            ctx.pop();
            PCode::Exists((**dom).clone(), b(inner?))
        }
        Term::Eq(ty, x, y) => PCode::Eq { ty: (**ty).clone(), a: compile(x), b: compile(y) },
        _ => {
            let (h, args) = t.spine();
            match (h, args.len()) {
                (Term::Prim(p @ (Prim::Le | Prim::Lt)), 2) => PCode::Cmp(*p, compile(args[0]), compile(args[1])),
                _ => PCode::Stuck(t.clone()),
            }
        }
    })
}

/// Options for [`truth_test`].
#[derive(Debug, Clone, Copy)]
pub struct TruthOptions {
    pub samples: usize,
    /// Upper bound on the node count of sampled values.
    pub max_size: usize,
    pub seed: u64,
}

impl Default for TruthOptions {
    fn default() -> Self {
        TruthOptions { samples: 100, max_size: 6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthReport {
    pub trials: usize,
    /// First failing trial and the sampled values, if any.
    pub counterexample: Option<String>,
}

impl TruthReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

struct Trial<'a, 'e> {
    ev: &'a Evaluator<'e>,
    pool: &'a [Term],
    rng: ChaCha8Rng,
    table: SizeTable,
    max_size: usize,
    budget: Budget,
    trace: Vec<String>,
}

impl Trial<'_, '_> {
    fn sample(&mut self, ty: &Term) -> EResult<Value> {
        let w = whnf(self.ev.env, ty, &mut Fuel::default()).map_err(|_| EvalError::FuelExhausted)?;
        if let Term::Pi(..) = w {
            return Err(EvalError::Unsupported(format!("sampling functions of type {w}")));
        }
        if w == Term::Type {
            let i = self.rng.random_range(0..self.pool.len());
            return Ok(Value::Type(self.pool[i].clone()));
        }
        let size = self.rng.random_range(1..=self.max_size);
        let t = random_ground_term_with(self.ev.env, &w, size, &mut self.rng, &mut self.table)
            .or_else(|_| random_ground_term_with(self.ev.env, &w, 64, &mut self.rng, &mut self.table))?;
        value_of_ground(&t).ok_or_else(|| EvalError::Stuck(format!("generated non-value {t}")))
    }

    fn eval(&mut self, c: &Arc<Code>, env: &Env) -> EResult<Value> {
        self.ev.eval(c, env, &mut self.budget)
    }

    fn prop(&mut self, p: &PCode, env: &Env) -> EResult<bool> {
        Ok(match p {
            PCode::True => true,
            PCode::False => false,
            PCode::And(x, y) => self.prop(x, env)? && self.prop(y, env)?,
            PCode::Or(x, y) => self.prop(x, env)? || self.prop(y, env)?,
            PCode::Not(x) => !self.prop(x, env)?,
            PCode::Implies(x, y) => !self.prop(x, env)? || self.prop(y, &env.push(Value::Proof))?,
            PCode::ForallType(body) => {
                let i = self.rng.random_range(0..self.pool.len());
                let v = Value::Type(self.pool[i].clone());
                self.trace.push(format!("{:?}", v));
                self.prop(body, &env.push(v))?
            }
            PCode::ForallObj(dom, body) => {
                let ty = close_type(dom, env)?;
                let v = self.sample(&ty)?;
                self.trace.push(format!("{:?}", v));
                self.prop(body, &env.push(v))?
            }
            PCode::Exists(dom, body) => {
                let ty = close_type(dom, env)?;
                let mut cands = Vec::new();
                for v in env.values() {
                    v.collect_subvalues(&mut cands);
                }
                for _ in 0..16 {
                    cands.push(self.sample(&ty)?);
                }
                let mut found = false;
                for c in cands {
                    // Candidates of the wrong type simply fail.
                    if let Ok(true) = self.prop(body, &env.push(c)) {
                        found = true;
                        break;
                    }
                }
                found
            }
            PCode::Eq { ty, a, b } => {
                let ty = close_type(ty, env)?;
                let x = self.eval(a, env)?;
                let y = self.eval(b, env)?;
                self.values_equal(&ty, x, y)?
            }
            PCode::Cmp(op, a, b) => {
                let x = self.eval(a, env)?;
                let y = self.eval(b, env)?;
                match (x, y) {
                    (Value::Int(x), Value::Int(y)) => {
                        if *op == Prim::Le {
                            x <= y
                        } else {
                            x < y
                        }
                    }
                    _ => return Err(EvalError::Stuck("comparison of non-integers".into())),
                }
            }
            PCode::Stuck(t) => {
                let closed = close_type(t, env)?;
                let w = whnf(self.ev.env, &closed, &mut Fuel::default()).map_err(|_| EvalError::FuelExhausted)?;
                if w == closed {
                    return Err(EvalError::Unsupported(format!("cannot decide proposition {t}")));
                }
                let code = compile_prop(self.ev.env, &mut vec![], &w)?;
                self.prop(&code, &Env::default())?
            }
        })
    }

    /// Equality at `ty`; extensional on function types.
    fn values_equal(&mut self, ty: &Term, x: Value, y: Value) -> EResult<bool> {
        let w = whnf(self.ev.env, ty, &mut Fuel::default()).map_err(|_| EvalError::FuelExhausted)?;
        if let Term::Pi(..) = w {
            let tele = Telescope::of(&w);
            let (mut fx, mut fy) = (x, y);
            let mut env = Env::default();
            for (_, dom) in &tele.binders {
                let dom = close_type(dom, &env)?;
                let v = self.sample(&dom)?;
                env = env.push(v.clone());
                fx = self.ev.apply(fx, v.clone(), &mut self.budget)?;
                fy = self.ev.apply(fy, v, &mut self.budget)?;
            }
            let cod = close_type(&tele.body, &env)?;
            return self.values_equal(&cod, fx, fy);
        }
        match (&x, &y) {
            (Value::Type(a), Value::Type(b)) if w == Term::Prop => {
                // Propositional equality between decided propositions.
                let pa = compile_prop(self.ev.env, &mut vec![], a)?;
                let pb = compile_prop(self.ev.env, &mut vec![], b)?;
                Ok(self.prop(&pa, &Env::default())? == self.prop(&pb, &Env::default())?)
            }
            _ => x.equal(&y),
        }
    }
}

/// Checks a closed proposition on `opts.samples` random instantiations of
/// its universally quantified variables. Opaque type parameters are
/// replaced by ground types from [`type_pool`], cycling across trials.
pub fn truth_test(env: &GlobalEnv, stmt: &Term, opts: TruthOptions) -> Result<TruthReport, EvalError> {
    truth_test_on(env, stmt, opts, true)
}

/// [`truth_test`] with the trials run one after another.
pub fn truth_test_seq(env: &GlobalEnv, stmt: &Term, opts: TruthOptions) -> Result<TruthReport, EvalError> {
    truth_test_on(env, stmt, opts, false)
}

fn truth_test_on(env: &GlobalEnv, stmt: &Term, opts: TruthOptions, parallel: bool) -> Result<TruthReport, EvalError> {
    let ev = Evaluator::new(env);
    let pool = type_pool(env);
    let params = stmt.params();
    let mut assignments: Vec<Vec<Term>> = vec![vec![]];
    for _ in &params {
        let mut next = Vec::new();
        for a in &assignments {
            for t in &pool {
                let mut b = a.clone();
                b.push(t.clone());
                next.push(b);
            }
        }
        next.truncate(16);
        assignments = next;
    }
    let mut compiled = Vec::new();
    for a in &assignments {
        let mut s = stmt.clone();
        for (p, t) in params.iter().zip(a) {
            s = s.replace_param(p, t);
        }
        compiled.push(compile_prop(env, &mut vec![], &s)?);
    }
    let run = |i: usize| -> Result<Option<String>, EvalError> {
        let mut trial = Trial {
            ev: &ev,
            pool: &pool,
            rng: ChaCha8Rng::seed_from_u64(opts.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            table: SizeTable::default(),
            max_size: opts.max_size.max(1),
            budget: Budget { left: ev.max_steps },
            trace: Vec::new(),
        };
        let k = i % compiled.len();
        if trial.prop(&compiled[k], &Env::default())? {
            Ok(None)
        } else {
            let inst: Vec<String> = params.iter().zip(&assignments[k]).map(|(p, t)| format!("{p} := {t}")).collect();
            Ok(Some(format!("trial {i}: {} {}", inst.join(" "), trial.trace.join(" "))))
        }
    };
    let results = if parallel {
        crate::par::map_range(opts.samples, run)
    } else {
        crate::par::map_range_seq(opts.samples, run)
    };
    let mut counterexample = None;
    for r in results {
        if let Some(c) = r? {
            counterexample = Some(c);
            break;
        }
    }
    Ok(TruthReport { trials: opts.samples, counterexample })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_problem, parse_term_in};

    const SRC: &str = "
        data list A = nil | cons (A) (list A).
        def search (A : Type) (x : A) : list A -> bool =
          fix search / 0 (l : list A) : bool :=
            match l with | nil => false | cons x0 l0 => eqb A x x0 || search l0 end.
        def app (A : Type) : list A -> list A -> list A =
          fix app / 0 (l1 : list A) (l2 : list A) : list A :=
            match l1 with | nil => l2 | cons x l => cons A x (app l l2) end.
        goal True.
    ";

    fn env() -> GlobalEnv {
        parse_problem(SRC).unwrap().env
    }

    fn ev(env: &GlobalEnv, s: &str) -> Value {
        eval_ground(env, &parse_term_in(env, &[], s).unwrap()).unwrap()
    }

    #[test]
    fn ground_examples() {
        let env = env();
        assert_eq!(ev(&env, "orb true false").as_bool(), Some(true));
        assert_eq!(ev(&env, "eqb Int 3 4").as_bool(), Some(false));
        assert_eq!(ev(&env, "search Int 2 (cons Int 1 (cons Int 2 (nil Int)))").as_bool(), Some(true));
        assert_eq!(ev(&env, "search Int 5 (cons Int 1 (cons Int 2 (nil Int)))").as_bool(), Some(false));
        let v = ev(&env, "app Int (cons Int 1 (nil Int)) (cons Int 2 (nil Int))");
        assert_eq!(
            v.to_term().unwrap(),
            parse_term_in(&env, &[], "cons Int 1 (cons Int 2 (nil Int))").unwrap()
        );
    }

    #[test]
    fn truth_of_true_and_false_statements() {
        let env = env();
        let good = parse_term_in(
            &env,
            &[],
            "forall (A : Type) (x : A) (l1 l2 : list A), search A x (app A l1 l2) = search A x l1 || search A x l2",
        )
        .unwrap();
        let r = truth_test(&env, &good, TruthOptions { samples: 200, max_size: 6, seed: 1 }).unwrap();
        assert!(r.passed(), "{r:?}");
        let bad = parse_term_in(
            &env,
            &[],
            "forall (l1 l2 : list Int), app Int l1 l2 = app Int l2 l1",
        )
        .unwrap();
        let r = truth_test(&env, &bad, TruthOptions { samples: 200, max_size: 6, seed: 1 }).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn exhaustiveness_needs_witnesses() {
        let env = env();
        let t = parse_term_in(
            &env,
            &[],
            "forall (l : list Int), l = nil Int \\/ (exists (x : Int) (r : list Int), l = cons Int x r)",
        )
        .unwrap();
        assert!(truth_test(&env, &t, TruthOptions::default()).unwrap().passed());
    }

    #[test]
    fn extensional_function_equality() {
        let env = env();
        let t = parse_term_in(&env, &[], "app Int (nil Int) = fun (l : list Int) => l").unwrap();
        assert!(truth_test(&env, &t, TruthOptions::default()).unwrap().passed());
    }

    #[test]
    fn deterministic_counterexample() {
        let env = env();
        let bad = parse_term_in(&env, &[], "forall (x y : Int), x + y = x").unwrap();
        let o = TruthOptions { samples: 50, max_size: 6, seed: 7 };
        assert_eq!(truth_test(&env, &bad, o).unwrap(), truth_test(&env, &bad, o).unwrap());
    }
}
