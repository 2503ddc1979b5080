//! Random test data: ground terms of a given type, and whole random
//! problem files with definitions over a fixed family of datatypes.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::GlobalEnv;
use crate::syntax::{Term, BOOL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no value of type {0} fits in the size bound")]
    Uninhabited(String),
    #[error("cannot generate values of type {0}")]
    Unsupported(String),
}

/// Inclusive range of sampled integer literals.
pub const INT_RANGE: (i64, i64) = (-4, 4);

/// Minimal constructor-node counts per ground type, memoized.
#[derive(Default)]
pub struct SizeTable {
    memo: HashMap<Term, Option<usize>>,
}

impl SizeTable {
    /// Smallest number of nodes of a value of `ty`; `None` if uninhabited.
    pub fn min_size(&mut self, env: &GlobalEnv, ty: &Term) -> Result<Option<usize>, GenError> {
        if *ty == Term::Int {
            return Ok(Some(1));
        }
        if let Some(v) = self.memo.get(ty) {
            return Ok(*v);
        }
        let Some((ind, params)) = ty.as_ind_app() else {
            return Err(GenError::Unsupported(ty.to_string()));
        };
        let decl = env.inductive(ind).ok_or_else(|| GenError::Unsupported(ty.to_string()))?;
        let params: Vec<Term> = params.into_iter().cloned().collect();
        if params.len() != decl.params.len() {
            return Err(GenError::Unsupported(ty.to_string()));
        }
        // In-progress marker: a type reached again through its own
        // constructors contributes no finite base case on that path.
        self.memo.insert(ty.clone(), None);
        let mut best: Option<usize> = None;
        for k in 0..decl.ctors.len() {
            let mut total = Some(1usize);
            for a in decl.ctor_arg_types(k, &params) {
                total = match (total, self.min_size(env, &a)?) {
                    (Some(t), Some(s)) => Some(t + s),
                    _ => None,
                };
            }
            if let Some(t) = total {
                best = Some(best.map_or(t, |b| b.min(t)));
            }
        }
        self.memo.insert(ty.clone(), best);
        if best.is_none() {
            // A later query may succeed once sibling types are known; do
            // not cache failures reached through an in-progress cycle.
            self.memo.remove(ty);
        }
        Ok(best)
    }
}

/// Closed, well-typed term of ground type `ty` with at most `size`
/// nodes (constructors and literals). Deterministic in `seed`.
pub fn random_ground_term(env: &GlobalEnv, ty: &Term, size: usize, seed: u64) -> Result<Term, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_ground_term_with(env, ty, size, &mut rng, &mut SizeTable::default())
}

pub fn random_ground_term_with<R: Rng>(
    env: &GlobalEnv,
    ty: &Term,
    size: usize,
    rng: &mut R,
    table: &mut SizeTable,
) -> Result<Term, GenError> {
    match table.min_size(env, ty)? {
        Some(m) if m <= size => {}
        _ => return Err(GenError::Uninhabited(ty.to_string())),
    }
    gen(env, ty, size, rng, table)
}

fn gen<R: Rng>(env: &GlobalEnv, ty: &Term, size: usize, rng: &mut R, table: &mut SizeTable) -> Result<Term, GenError> {
    if *ty == Term::Int {
        return Ok(Term::IntLit(rng.random_range(INT_RANGE.0..=INT_RANGE.1)));
    }
    let (ind, params) = ty.as_ind_app().expect("checked by min_size");
    let decl = env.inductive(ind).expect("checked by min_size");
    let params: Vec<Term> = params.into_iter().cloned().collect();
    let mut fitting = Vec::new();
    for k in 0..decl.ctors.len() {
        let args = decl.ctor_arg_types(k, &params);
        let mut need = 1usize;
        let mut ok = true;
        let mut mins = Vec::with_capacity(args.len());
        for a in &args {
            match table.min_size(env, a)? {
                Some(s) => {
                    need += s;
                    mins.push(s);
                }
                None => ok = false,
            }
        }
        if ok && need <= size {
            fitting.push((k, args, mins, need));
        }
    }
    let (k, args, mins, need) = fitting.choose(rng).cloned().expect("min_size guarantees a fitting constructor");
    let mut spare = size - need;
    let mut fields = Vec::with_capacity(args.len());
    for (a, m) in args.iter().zip(&mins) {
        let extra = if spare == 0 { 0 } else { rng.random_range(0..=spare) };
        spare -= extra;
        fields.push(gen(env, a, m + extra, rng, table)?);
    }
    Ok(Term::apps(Term::Ctor(decl.name.clone(), k), params.into_iter().chain(fields)))
}

/// Ground types to substitute for type variables during sampling:
/// Int, bool, and every user datatype with all parameters set to Int.
pub fn type_pool(env: &GlobalEnv) -> Vec<Term> {
    let mut pool = vec![Term::Int, Term::bool_type()];
    let mut table = SizeTable::default();
    for d in env.user_inductives() {
        let t = Term::apps(Term::Ind(d.name.clone()), d.params.iter().map(|_| Term::Int));
        if matches!(table.min_size(env, &t), Ok(Some(_))) {
            pool.push(t);
        }
    }
    pool
}

/// Datatypes shared by generated problems.
pub const PRELUDE: &str = "data nat = O | S (nat).
data list A = nil | cons (A) (list A).
data option A = none | some (A).
data pair A B = mk (A) (B).
data tree A = leaf | node (tree A) (A) (tree A).
";

/// A random problem file exercising every transformation: definitions by
/// pattern matching and structural recursion, a polymorphic lemma, and a
/// goal that mentions the definitions at a ground instance.
pub fn random_problem(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ProblemGen { out: String::from(PRELUDE), defs: Vec::new(), rng: &mut rng };
    let n = g.rng.random_range(2..=5);
    for i in 0..n {
        g.definition(i);
    }
    g.finish();
    g.out
}

#[derive(Clone)]
struct DefSig {
    name: String,
    /// Parameter kinds in order, after the type parameter.
    args: Vec<Kind>,
    ret: Kind,
    poly: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Nat,
    Int,
    Bool,
    ListA,
    OptA,
    TreeA,
    A,
}

impl Kind {
    fn text(self) -> &'static str {
        match self {
            Kind::Nat => "nat",
            Kind::Int => "Int",
            Kind::Bool => BOOL,
            Kind::ListA => "list A",
            Kind::OptA => "option A",
            Kind::TreeA => "tree A",
            Kind::A => "A",
        }
    }
}

struct ProblemGen<'r> {
    out: String,
    defs: Vec<DefSig>,
    rng: &'r mut ChaCha8Rng,
}

impl ProblemGen<'_> {
    /// A leaf expression of `kind` using variables of the given kinds.
    fn leaf(&mut self, kind: Kind, vars: &[(String, Kind)]) -> String {
        let cands: Vec<&String> = vars.iter().filter(|(_, k)| *k == kind).map(|(n, _)| n).collect();
        if !cands.is_empty() && self.rng.random_bool(0.7) {
            return cands.choose(self.rng).unwrap().to_string();
        }
        match kind {
            Kind::Nat => ["O", "S O"].choose(self.rng).unwrap().to_string(),
            Kind::Int => self.rng.random_range(-2..=3i64).to_string(),
            Kind::Bool => ["true", "false"].choose(self.rng).unwrap().to_string(),
            Kind::ListA => "nil A".into(),
            Kind::OptA => "none A".into(),
            Kind::TreeA => "leaf A".into(),
            Kind::A => cands.first().map(|s| s.to_string()).unwrap_or_else(|| "a0".into()),
        }
    }

    /// An expression of `kind`, possibly calling earlier definitions.
    fn expr(&mut self, kind: Kind, vars: &[(String, Kind)], depth: u32) -> String {
        if depth == 0 || self.rng.random_bool(0.35) {
            let l = self.leaf(kind, vars);
            return if l.starts_with('-') { format!("({l})") } else { l };
        }
        // Calls to earlier definitions returning this kind.
        let callable: Vec<DefSig> = self
            .defs
            .iter()
            .filter(|d| d.ret == kind && d.args.iter().all(|a| *a != Kind::A || vars.iter().any(|(_, k)| *k == Kind::A)))
            .cloned()
            .collect();
        if !callable.is_empty() && self.rng.random_bool(0.4) {
            let d = callable.choose(self.rng).unwrap().clone();
            let mut s = d.name.clone();
            if d.poly {
                s.push_str(" A");
            }
            for a in &d.args {
                s.push_str(&format!(" ({})", self.expr(*a, vars, depth - 1)));
            }
            return s;
        }
        match kind {
            Kind::Nat => format!("S ({})", self.expr(Kind::Nat, vars, depth - 1)),
            Kind::Int => {
                let op = ["+", "-", "*"].choose(self.rng).unwrap();
                format!("({}) {op} ({})", self.expr(Kind::Int, vars, depth - 1), self.expr(Kind::Int, vars, depth - 1))
            }
            Kind::Bool => match self.rng.random_range(0..4) {
                0 => format!("({}) || ({})", self.expr(Kind::Bool, vars, depth - 1), self.expr(Kind::Bool, vars, depth - 1)),
                1 => format!("negb ({})", self.expr(Kind::Bool, vars, depth - 1)),
                2 => format!("({}) <=? ({})", self.expr(Kind::Int, vars, depth - 1), self.expr(Kind::Int, vars, depth - 1)),
                _ => {
                    if vars.iter().any(|(_, k)| *k == Kind::A) {
                        let x = self.leaf(Kind::A, vars);
                        let y = self.leaf(Kind::A, vars);
                        format!("eqb A {x} {y}")
                    } else {
                        format!("eqb nat ({}) ({})", self.expr(Kind::Nat, vars, depth - 1), self.expr(Kind::Nat, vars, depth - 1))
                    }
                }
            },
            Kind::ListA => {
                if vars.iter().any(|(_, k)| *k == Kind::A) {
                    format!("cons A {} ({})", self.leaf(Kind::A, vars), self.expr(Kind::ListA, vars, depth - 1))
                } else {
                    "nil A".into()
                }
            }
            Kind::OptA => {
                if vars.iter().any(|(_, k)| *k == Kind::A) {
                    format!("some A {}", self.leaf(Kind::A, vars))
                } else {
                    "none A".into()
                }
            }
            Kind::TreeA => {
                if vars.iter().any(|(_, k)| *k == Kind::A) {
                    format!(
                        "node A ({}) {} ({})",
                        self.expr(Kind::TreeA, vars, depth - 1),
                        self.leaf(Kind::A, vars),
                        self.expr(Kind::TreeA, vars, depth - 1)
                    )
                } else {
                    "leaf A".into()
                }
            }
            Kind::A => self.leaf(Kind::A, vars),
        }
    }

    fn definition(&mut self, i: usize) {
        let name = format!("f{i}");
        let scrut = *[Kind::Nat, Kind::ListA, Kind::OptA, Kind::Bool, Kind::TreeA].choose(self.rng).unwrap();
        let ret = *[Kind::Nat, Kind::Int, Kind::Bool, Kind::ListA, Kind::A].choose(self.rng).unwrap();
        let extra = *[Kind::Int, Kind::A, Kind::Nat, Kind::Bool].choose(self.rng).unwrap();
        let recursive = matches!(scrut, Kind::Nat | Kind::ListA | Kind::TreeA) && self.rng.random_bool(0.6);
        // The A-typed return needs an A in scope.
        let extra = if ret == Kind::A { Kind::A } else { extra };
        let args = vec![extra, scrut];
        let vars: Vec<(String, Kind)> = vec![("a0".into(), Kind::A), ("e".into(), extra)];
        let call_self = |this: &mut Self, vars: &[(String, Kind)], sub: &str| -> String {
            format!("rec ({}) {sub}", this.expr(extra, vars, 1))
        };
        let mut branches = Vec::new();
        let ctors: Vec<(String, Vec<(String, Kind)>)> = match scrut {
            Kind::Nat => vec![("O".into(), vec![]), ("S".into(), vec![("n".into(), Kind::Nat)])],
            Kind::ListA => vec![
                ("nil".into(), vec![]),
                ("cons".into(), vec![("h".into(), Kind::A), ("t".into(), Kind::ListA)]),
            ],
            Kind::OptA => vec![("none".into(), vec![]), ("some".into(), vec![("v".into(), Kind::A)])],
            Kind::Bool => vec![("true".into(), vec![]), ("false".into(), vec![])],
            _ => vec![
                ("leaf".into(), vec![]),
                ("node".into(), vec![("lt".into(), Kind::TreeA), ("v".into(), Kind::A), ("rt".into(), Kind::TreeA)]),
            ],
        };
        for (c, fields) in &ctors {
            let mut bvars = vars.clone();
            bvars.extend(fields.iter().cloned());
            let body = if recursive && !fields.is_empty() && self.rng.random_bool(0.7) {
                let sub = fields.iter().find(|(_, k)| *k == scrut).map(|(n, _)| n.clone());
                match sub {
                    Some(sub) => {
                        let call = call_self(self, &bvars, &sub);
                        self.combine(ret, call, &bvars)
                    }
                    None => self.expr(ret, &bvars, 2),
                }
            } else {
                self.expr(ret, &bvars, 2)
            };
            let pat = if fields.is_empty() {
                c.clone()
            } else {
                format!("{c} {}", fields.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" "))
            };
            branches.push(format!("| {pat} => {body}"));
        }
        let sig = DefSig { name: name.clone(), args: args.clone(), ret, poly: true };
        let ety = extra.text();
        let sty = scrut.text();
        let rty = ret.text();
        if recursive {
            let _ = writeln!(
                self.out,
                "def {name} (A : Type) (a0 : A) : {ety} -> {sty} -> {rty} =\n  fix rec / 1 (e : {ety}) (x : {sty}) : {rty} :=\n    match x with {} end.",
                branches.join(" ")
            );
        } else {
            let _ = writeln!(
                self.out,
                "def {name} (A : Type) (a0 : A) (e : {ety}) (x : {sty}) : {rty} =\n  match x with {} end.",
                branches.join(" ")
            );
        }
        // Every definition takes `a0 : A` first so that A-typed leaves exist.
        let mut full = sig;
        full.args.insert(0, Kind::A);
        self.defs.push(full);
    }

    /// Wraps a recursive call result of kind `ret` into a bigger expression.
    fn combine(&mut self, ret: Kind, call: String, vars: &[(String, Kind)]) -> String {
        match ret {
            Kind::Nat => format!("S ({call})"),
            Kind::Int => format!("({}) + ({call})", self.expr(Kind::Int, vars, 1)),
            Kind::Bool => format!("({}) || ({call})", self.expr(Kind::Bool, vars, 1)),
            Kind::ListA => format!("cons A {} ({call})", self.leaf(Kind::A, vars)),
            Kind::A => call,
            _ => call,
        }
    }

    fn finish(&mut self) {
        // Polymorphic lemma: a reflexive equation on the last definition.
        let d = self.defs.last().unwrap().clone();
        let mut binders = vec!["(A : Type)".to_string()];
        let mut args = Vec::new();
        for (i, k) in d.args.iter().enumerate() {
            binders.push(format!("(y{i} : {})", k.text()));
            args.push(format!("y{i}"));
        }
        let _ = writeln!(
            self.out,
            "lemma {}_refl : forall {}, {} A {} = {} A {}.",
            d.name,
            binders.join(" "),
            d.name,
            args.join(" "),
            d.name,
            args.join(" ")
        );
        // Goal at a ground instance mentioning every definition.
        let inst = *["Int", "nat", "bool"].choose(self.rng).unwrap();
        let mut conj = Vec::new();
        for d in &self.defs {
            let mut binders = Vec::new();
            let mut args = Vec::new();
            for (i, k) in d.args.iter().enumerate() {
                let t = if *k == Kind::A { inst.to_string() } else { k.text().replace('A', inst) };
                binders.push(format!("(z{i} : {t})"));
                args.push(format!("z{i}"));
            }
            conj.push(format!(
                "(forall {}, {} {inst} {} = {} {inst} {})",
                binders.join(" "),
                d.name,
                args.join(" "),
                d.name,
                args.join(" ")
            ));
        }
        let _ = writeln!(self.out, "goal {}.", conj.join(" /\\ "));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;
    use crate::typing::typecheck;

    fn env() -> GlobalEnv {
        parse_problem(&format!("{PRELUDE}goal True.")).unwrap().env
    }

    #[test]
    fn bool_size_one() {
        let env = env();
        let t = random_ground_term(&env, &Term::bool_type(), 1, 3).unwrap();
        assert!(t == Term::bool_lit(true) || t == Term::bool_lit(false));
    }

    #[test]
    fn list_int_is_well_typed() {
        let env = env();
        let ty = Term::app(Term::ind("list"), Term::Int);
        for seed in 0..50 {
            let t = random_ground_term(&env, &ty, 5, seed).unwrap();
            assert_eq!(typecheck(&env, &[], &t).unwrap(), ty);
            let mut nodes = 0;
            t.visit(&mut |s| {
                if matches!(s, Term::Ctor(..) | Term::IntLit(_)) {
                    nodes += 1;
                }
            });
            assert!(nodes <= 5, "{t}");
        }
    }

    #[test]
    fn deterministic() {
        let env = env();
        let ty = Term::app(Term::ind("tree"), Term::Int);
        assert_eq!(random_ground_term(&env, &ty, 6, 9).unwrap(), random_ground_term(&env, &ty, 6, 9).unwrap());
    }

    #[test]
    fn uninhabited() {
        let p = parse_problem("data loop = mk (loop).\ngoal True.").unwrap();
        assert!(matches!(
            random_ground_term(&p.env, &Term::ind("loop"), 5, 0),
            Err(GenError::Uninhabited(_))
        ));
        let env = env();
        assert!(matches!(
            random_ground_term(&env, &Term::app(Term::ind("list"), Term::Int), 0, 0),
            Err(GenError::Uninhabited(_))
        ));
    }

    #[test]
    fn random_problems_parse() {
        for seed in 0..200 {
            let src = random_problem(seed);
            if let Err(e) = parse_problem(&src) {
                panic!("seed {seed}: {e}\n{src}");
            }
        }
    }
}
