//! Lexer and parser for problem files.
//!
//! ```text
//! data list A = nil | cons (A) (list A).
//! def hd_error (A : Type) (l : list A) : option A =
//!   match l with | nil => none A | cons x _ => some A x end.
//! hyp h : forall (x : Int), x + 0 = x.
//! lemma app_nil : forall (A : Type) (l : list A), app A l (nil A) = l.
//! goal forall (A : Type) (l : list A) (a : A),
//!   hd_error A l = some A a -> l <> nil A.
//! ```
//!
//! Names are resolved and every declaration is typechecked as it is read,
//! so declarations only see earlier ones.

use std::sync::Arc;

use thiserror::Error;

use crate::env::{CtorDecl, Definition, GlobalEnv, InductiveDecl, Problem};
use crate::reduce::{whnf, Fuel};
use crate::syntax::{lift, rebuild_lam, rebuild_pi, unlift, Branch, Fix, Hint, Match, Prim, Term};
use crate::typing::{check_prop, typecheck, Checker, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("{line}:{col}: unknown identifier `{name}`")]
    Scope { line: usize, col: usize, name: String },
    #[error("{line}:{col}: {detail}")]
    Arity { line: usize, col: usize, detail: String },
    #[error("{line}:{col}: type error: {source}")]
    Type { line: usize, col: usize, source: TypeError },
}

pub const KEYWORDS: &[&str] = &[
    "data", "def", "hyp", "lemma", "goal", "forall", "exists", "fun", "fix", "match", "return", "with", "end",
    "Type", "Prop", "Int", "True", "False", "true_p", "false_p", "_",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

// Longest first so that prefixes do not shadow longer symbols.
const SYMBOLS: &[&str] = &[
    "<=?", ":=", "=>", "->", "/\\", "\\/", "<>", "<=", "<?", "||", "&&", "(", ")", ",", ".", ":", "=", "|", "/", "~",
    "<", "+", "-", "*",
];

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let (sl, sc) = (line, col);
            let mut depth = 0usize;
            loop {
                if i >= chars.len() {
                    return Err(ParseError::Syntax {
                        line: sl,
                        col: sc,
                        expected: "`*)`".into(),
                        found: "end of input".into(),
                    });
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    advance(&mut i, &mut line, &mut col, '(');
                    advance(&mut i, &mut line, &mut col, '*');
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, ')');
                    if depth == 0 {
                        break;
                    }
                } else {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        let (sl, sc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line: sl, col: sc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<i64>().map_err(|_| ParseError::Syntax {
                line: sl,
                col: sc,
                expected: "integer literal in range".into(),
                found: text.clone(),
            })?;
            out.push(Spanned { tok: Tok::Int(n), line: sl, col: sc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                for ch in s.chars() {
                    advance(&mut i, &mut line, &mut col, ch);
                }
                out.push(Spanned { tok: Tok::Sym(s), line: sl, col: sc });
            }
            None => {
                return Err(ParseError::Syntax {
                    line: sl,
                    col: sc,
                    expected: "a token".into(),
                    found: format!("`{c}`"),
                })
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

// Precedence levels, loosest first. Shared with the printer.
pub(crate) const L_TOP: u8 = 0;
pub(crate) const L_ARROW: u8 = 1;
pub(crate) const L_OR: u8 = 2;
pub(crate) const L_AND: u8 = 3;
pub(crate) const L_NOT: u8 = 4;
pub(crate) const L_CMP: u8 = 5;
pub(crate) const L_ORB: u8 = 6;
pub(crate) const L_ANDB: u8 = 7;
pub(crate) const L_ADD: u8 = 8;
pub(crate) const L_MUL: u8 = 9;
pub(crate) const L_APP: u8 = 10;
pub(crate) const L_ATOM: u8 = 11;

struct Parser<'e> {
    toks: Vec<Spanned>,
    pos: usize,
    env: &'e mut GlobalEnv,
    /// Names in scope, innermost last; `None` for anonymous binders.
    names: Vec<Option<String>>,
    /// Types of the binders in scope, aligned with `names`.
    types: Vec<Term>,
}

type PResult<T> = Result<T, ParseError>;

impl<'e> Parser<'e> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, expected: expected.into(), found: self.peek().to_string() })
    }

    fn type_err<T>(&self, at: (usize, usize), e: TypeError) -> PResult<T> {
        Err(ParseError::Type { line: at.0, col: at.1, source: e })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{s}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "_" || !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn fresh_global(&mut self, name: &str) -> PResult<Arc<str>> {
        if self.env.is_global(name) || Prim::from_ident(name).is_some() || name == "_" {
            let (line, col) = self.here();
            return Err(ParseError::Arity { line, col, detail: format!("`{name}` is already declared") });
        }
        Ok(Arc::from(name))
    }

    fn push(&mut self, name: Option<String>, ty: Term) {
        self.names.push(name.filter(|n| n != "_"));
        self.types.push(ty);
    }

    fn pop(&mut self, n: usize) {
        let len = self.names.len() - n;
        self.names.truncate(len);
        self.types.truncate(len);
    }

    fn infer(&self, at: (usize, usize), t: &Term) -> PResult<Term> {
        match typecheck(self.env, &self.types, t) {
            Ok(ty) => Ok(ty),
            Err(e) => self.type_err(at, e),
        }
    }

    // ---- declarations ----

    fn problem(&mut self) -> PResult<Problem> {
        let mut hypotheses = Vec::new();
        let mut lemma_params = Vec::new();
        let mut seen: Vec<String> = Vec::new();
        loop {
            let at = self.here();
            match self.peek().clone() {
                Tok::Ident(kw) if kw == "data" => {
                    self.bump();
                    self.data_decl()?;
                }
                Tok::Ident(kw) if kw == "def" => {
                    self.bump();
                    self.def_decl()?;
                }
                Tok::Ident(kw) if kw == "hyp" || kw == "lemma" => {
                    self.bump();
                    let name = self.ident()?;
                    if seen.contains(&name) {
                        return Err(ParseError::Arity {
                            line: at.0,
                            col: at.1,
                            detail: format!("hypothesis `{name}` declared twice"),
                        });
                    }
                    self.expect_sym(":")?;
                    let at = self.here();
                    let p = self.expr(L_TOP)?;
                    self.expect_sym(".")?;
                    if let Err(e) = check_prop(self.env, &[], &p) {
                        return self.type_err(at, e);
                    }
                    seen.push(name.clone());
                    let name: Arc<str> = Arc::from(name.as_str());
                    if kw == "lemma" {
                        lemma_params.push(name.clone());
                    }
                    hypotheses.push((name, p));
                }
                Tok::Ident(kw) if kw == "goal" => {
                    self.bump();
                    let at = self.here();
                    let goal = self.expr(L_TOP)?;
                    self.eat_sym(".");
                    if let Err(e) = check_prop(self.env, &[], &goal) {
                        return self.type_err(at, e);
                    }
                    if self.peek() != &Tok::Eof {
                        return self.err("end of input after the goal");
                    }
                    return Ok(Problem { env: self.env.clone(), hypotheses, lemma_params, goal });
                }
                _ => return self.err("`data`, `def`, `hyp`, `lemma` or `goal`"),
            }
        }
    }

    fn data_decl(&mut self) -> PResult<()> {
        let at = self.here();
        let name = self.ident()?;
        let name = self.fresh_global(&name)?;
        let mut params = Vec::new();
        loop {
            if self.eat_sym("(") {
                params.push(self.ident()?);
                self.expect_sym(":")?;
                self.expect_kw("Type")?;
                self.expect_sym(")")?;
            } else if matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) {
                params.push(self.ident()?);
            } else {
                break;
            }
        }
        self.expect_sym("=")?;
        self.eat_sym("|");
        // Register the type without constructors so that recursive
        // occurrences resolve.
        let params: Vec<Arc<str>> = params.iter().map(|p| Arc::from(p.as_str())).collect();
        self.env.add_inductive(InductiveDecl { name: name.clone(), params: params.clone(), ctors: vec![] });
        for p in &params {
            self.push(Some(p.to_string()), Term::Type);
        }
        let mut ctors: Vec<CtorDecl> = Vec::new();
        loop {
            let cname = self.ident()?;
            if ctors.iter().any(|c| *c.name == *cname) || cname == *name {
                return Err(ParseError::Arity {
                    line: at.0,
                    col: at.1,
                    detail: format!("constructor `{cname}` declared twice"),
                });
            }
            let cname = self.fresh_global(&cname)?;
            let mut args = Vec::new();
            while self.is_sym("(") {
                self.bump();
                let aat = self.here();
                let ty = self.expr(L_TOP)?;
                self.expect_sym(")")?;
                self.check_ctor_arg(aat, &name, params.len(), &ty)?;
                args.push(ty);
            }
            ctors.push(CtorDecl { name: cname, args });
            if !self.eat_sym("|") {
                break;
            }
        }
        self.pop(params.len());
        self.expect_sym(".")?;
        self.env.add_inductive(InductiveDecl { name, params, ctors });
        Ok(())
    }

    fn check_ctor_arg(&self, at: (usize, usize), ind: &str, nparams: usize, ty: &Term) -> PResult<()> {
        let sort = self.infer(at, ty)?;
        if sort != Term::Type {
            return self.type_err(at, TypeError::Mismatch {
                location: ty.to_string(),
                expected: "a type".into(),
                found: sort.to_string(),
            });
        }
        let mut bad = None;
        ty.visit(&mut |t| match t {
            Term::Pi(..) | Term::Lam(..) | Term::Prop | Term::Type => bad = Some("constructor arguments must be first-order object types"),
            _ => {}
        });
        // Recursive occurrences must be applied uniformly to the parameters.
        let uniform = Term::apps(Term::ind(ind), (0..nparams).map(|j| Term::Var(nparams - 1 - j)));
        check_uniform(ty, ind, &uniform, &mut bad);
        match bad {
            Some(detail) => Err(ParseError::Arity { line: at.0, col: at.1, detail: detail.into() }),
            None => Ok(()),
        }
    }

    fn def_decl(&mut self) -> PResult<()> {
        let name = self.ident()?;
        let name = self.fresh_global(&name)?;
        let binders = self.binders_opt()?;
        self.expect_sym(":")?;
        let ret = self.type_expr()?;
        if !self.eat_sym(":=") {
            self.expect_sym("=")?;
        }
        let at = self.here();
        let body = self.expr(L_TOP)?;
        self.expect_sym(".")?;
        self.pop(binders.len());
        let ty = rebuild_pi(&binders, ret);
        let body = rebuild_lam(&binders, body);
        let mut c = Checker::new(self.env);
        if let Err(e) = c.infer(&mut vec![], &ty).and_then(|_| c.check(&mut vec![], &body, &ty)) {
            return self.type_err(at, e);
        }
        self.env.add_definition(Definition { name, ty, body });
        Ok(())
    }

    /// `(x y : T) (z : U)`; pushes the binders into scope.
    fn binders_opt(&mut self) -> PResult<Vec<(Hint, Term)>> {
        let mut out = Vec::new();
        while self.is_sym("(") {
            self.bump();
            let mut names = vec![self.ident()?];
            while !self.is_sym(":") {
                names.push(self.ident()?);
            }
            self.bump();
            let ty = self.expr(L_TOP)?;
            self.expect_sym(")")?;
            for (i, n) in names.into_iter().enumerate() {
                let t = lift(&ty, i, 0);
                self.push(Some(n.clone()), t.clone());
                out.push((Hint::new(&n), t));
            }
        }
        Ok(out)
    }

    /// Binders of `forall`, `exists` and `fun`: parenthesized groups or
    /// one unparenthesized `x y : T` group.
    fn binders(&mut self) -> PResult<Vec<(Hint, Term)>> {
        if self.is_sym("(") {
            return self.binders_opt();
        }
        let mut names = vec![self.ident()?];
        while !self.is_sym(":") {
            names.push(self.ident()?);
        }
        self.bump();
        let ty = self.type_expr()?;
        let mut out = Vec::new();
        for (i, n) in names.into_iter().enumerate() {
            let t = lift(&ty, i, 0);
            self.push(Some(n.clone()), t.clone());
            out.push((Hint::new(&n), t));
        }
        Ok(out)
    }

    // ---- expressions ----

    /// Restricted grammar for declared types: binders, arrows, applications.
    fn type_expr(&mut self) -> PResult<Term> {
        if self.is_kw("forall") {
            self.bump();
            let bs = self.binders()?;
            self.expect_sym(",")?;
            let body = self.type_expr()?;
            self.pop(bs.len());
            return Ok(rebuild_pi(&bs, body));
        }
        let lhs = self.expr(L_APP)?;
        if self.eat_sym("->") {
            self.push(None, lhs.clone());
            let rhs = self.type_expr();
            self.pop(1);
            return Ok(Term::Pi(Hint::anon(), Box::new(lhs), Box::new(rhs?)));
        }
        Ok(lhs)
    }

    fn binder_form(&mut self) -> PResult<Option<Term>> {
        let kw = match self.peek() {
            Tok::Ident(s) if matches!(s.as_str(), "forall" | "exists" | "fun" | "fix") => s.clone(),
            _ => return Ok(None),
        };
        self.bump();
        match kw.as_str() {
            "forall" | "exists" => {
                let bs = self.binders()?;
                self.expect_sym(",")?;
                let at = self.here();
                let body = self.expr(L_TOP)?;
                self.pop(bs.len());
                if kw == "forall" {
                    return Ok(Some(rebuild_pi(&bs, body)));
                }
                let mut out = body;
                for (h, a) in bs.into_iter().rev() {
                    out = Term::Exists(h, Box::new(a), Box::new(out));
                }
                let _ = at;
                Ok(Some(out))
            }
            "fun" => {
                let bs = self.binders()?;
                self.expect_sym("=>")?;
                let body = self.expr(L_TOP)?;
                self.pop(bs.len());
                Ok(Some(rebuild_lam(&bs, body)))
            }
            _ => self.fix_form().map(Some),
        }
    }

    fn fix_form(&mut self) -> PResult<Term> {
        let at = self.here();
        let fname = self.ident()?;
        self.expect_sym("/")?;
        let k = match self.bump() {
            Tok::Int(n) if n >= 0 => n as usize,
            _ => return self.err("decreasing argument index"),
        };
        let bs = self.binders_opt()?;
        if bs.len() <= k {
            return Err(ParseError::Arity {
                line: at.0,
                col: at.1,
                detail: format!("decreasing argument {k} out of range for {} binders", bs.len()),
            });
        }
        self.expect_sym(":")?;
        let ret = self.type_expr()?;
        self.expect_sym(":=")?;
        self.pop(bs.len());
        let ty = rebuild_pi(&bs, ret);
        self.push(Some(fname.clone()), ty.clone());
        let lifted: Vec<(Hint, Term)> =
            bs.iter().enumerate().map(|(i, (h, a))| (h.clone(), lift(a, 1, i))).collect();
        for (h, a) in &lifted {
            self.push(Some(h.as_str().to_string()), a.clone());
        }
        let body = self.expr(L_TOP);
        self.pop(lifted.len() + 1);
        let body = rebuild_lam(&lifted, body?);
        let fix = Term::Fix(Box::new(Fix { name: Hint::new(&fname), decreasing: k, ty, body }));
        self.infer(at, &fix)?;
        Ok(fix)
    }

    fn expr(&mut self, level: u8) -> PResult<Term> {
        if let Some(t) = self.binder_form()? {
            return Ok(t);
        }
        match level {
            L_TOP | L_ARROW => {
                let lhs = self.expr(L_OR)?;
                if self.eat_sym("->") {
                    self.push(None, lhs.clone());
                    let rhs = self.expr(L_ARROW);
                    self.pop(1);
                    return Ok(Term::Pi(Hint::anon(), Box::new(lhs), Box::new(rhs?)));
                }
                Ok(lhs)
            }
            L_OR => {
                let lhs = self.expr(L_AND)?;
                if self.eat_sym("\\/") {
                    return Ok(Term::or(lhs, self.expr(L_OR)?));
                }
                Ok(lhs)
            }
            L_AND => {
                let lhs = self.expr(L_NOT)?;
                if self.eat_sym("/\\") {
                    return Ok(Term::and(lhs, self.expr(L_AND)?));
                }
                Ok(lhs)
            }
            L_NOT => {
                if self.eat_sym("~") {
                    return Ok(Term::not(self.expr(L_NOT)?));
                }
                self.expr(L_CMP)
            }
            L_CMP => {
                let at = self.here();
                let lhs = self.expr(L_ORB)?;
                let op = match self.peek() {
                    Tok::Sym(s) if matches!(*s, "=" | "<>" | "<=" | "<" | "<=?" | "<?") => *s,
                    _ => return Ok(lhs),
                };
                self.bump();
                let rhs = self.expr(L_ORB)?;
                Ok(match op {
                    "=" | "<>" => {
                        let ty = self.infer(at, &lhs)?;
                        let eq = Term::eq(ty, lhs, rhs);
                        if op == "=" {
                            eq
                        } else {
                            Term::not(eq)
                        }
                    }
                    "<=" => prim2(Prim::Le, lhs, rhs),
                    "<" => prim2(Prim::Lt, lhs, rhs),
                    "<=?" => prim2(Prim::Leb, lhs, rhs),
                    _ => prim2(Prim::Ltb, lhs, rhs),
                })
            }
            L_ORB | L_ANDB | L_ADD | L_MUL => {
                let mut lhs = self.expr(level + 1)?;
                loop {
                    let p = match (level, self.peek()) {
                        (L_ORB, Tok::Sym("||")) => Prim::Orb,
                        (L_ANDB, Tok::Sym("&&")) => Prim::Andb,
                        (L_ADD, Tok::Sym("+")) => Prim::Add,
                        (L_ADD, Tok::Sym("-")) => Prim::Sub,
                        (L_MUL, Tok::Sym("*")) => Prim::Mul,
                        _ => return Ok(lhs),
                    };
                    self.bump();
                    let rhs = self.expr(level + 1)?;
                    lhs = prim2(p, lhs, rhs);
                }
            }
            _ => {
                // Negative literal at operand start.
                if self.is_sym("-") {
                    if let Tok::Int(n) = *self.peek_at(1) {
                        self.bump();
                        self.bump();
                        return Ok(Term::IntLit(-n));
                    }
                }
                let mut head = self.atom()?;
                if level == L_ATOM {
                    return Ok(head);
                }
                while self.starts_atom() {
                    let arg = self.atom()?;
                    head = Term::app(head, arg);
                }
                Ok(head)
            }
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !matches!(
                s.as_str(),
                "with" | "end" | "return" | "data" | "def" | "hyp" | "lemma" | "goal" | "forall" | "exists" | "fun" | "fix"
            ),
            Tok::Int(_) => true,
            Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::IntLit(n))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.expr(L_TOP)?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(s) => {
                if s == "match" {
                    self.bump();
                    return self.match_form(at);
                }
                self.bump();
                self.resolve(at, &s)
            }
            _ => self.err("a term"),
        }
    }

    fn resolve(&self, at: (usize, usize), s: &str) -> PResult<Term> {
        if let Some(pos) = self.names.iter().rposition(|n| n.as_deref() == Some(s)) {
            return Ok(Term::Var(self.names.len() - 1 - pos));
        }
        match s {
            "Type" => return Ok(Term::Type),
            "Prop" => return Ok(Term::Prop),
            "Int" => return Ok(Term::Int),
            "True" | "true_p" => return Ok(Term::True),
            "False" | "false_p" => return Ok(Term::False),
            _ => {}
        }
        if let Some((ind, k)) = self.env.lookup_ctor(s) {
            return Ok(Term::Ctor(ind.clone(), k));
        }
        if self.env.inductive(s).is_some() {
            return Ok(Term::ind(s));
        }
        if self.env.definition(s).is_some() {
            return Ok(Term::constant(s));
        }
        if let Some(p) = Prim::from_ident(s) {
            return Ok(Term::Prim(p));
        }
        Err(ParseError::Scope { line: at.0, col: at.1, name: s.to_string() })
    }

    fn match_form(&mut self, at: (usize, usize)) -> PResult<Term> {
        let scrutinee = self.expr(L_TOP)?;
        let st = self.infer(at, &scrutinee)?;
        let st = match whnf(self.env, &st, &mut Fuel::default()) {
            Ok(t) => t,
            Err(e) => return self.type_err(at, e.into()),
        };
        let (ind, params) = match st.as_ind_app() {
            Some((i, ps)) => (i.clone(), ps.into_iter().cloned().collect::<Vec<_>>()),
            None => {
                return self.type_err(
                    at,
                    TypeError::Mismatch {
                        location: scrutinee.to_string(),
                        expected: "a value of an inductive type".into(),
                        found: st.to_string(),
                    },
                )
            }
        };
        let return_type = if self.is_kw("return") {
            self.bump();
            Some(self.type_expr()?)
        } else {
            None
        };
        self.expect_kw("with")?;
        let decl = self.env.inductive(&ind).expect("resolved inductive").clone();
        let mut branches: Vec<Option<Branch>> = vec![None; decl.ctors.len()];
        self.eat_sym("|");
        loop {
            if self.is_kw("end") {
                break;
            }
            let pat_at = self.here();
            let cname = self.ident()?;
            let k = match decl.ctor_index(&cname) {
                Some(k) => k,
                None => {
                    return Err(ParseError::Arity {
                        line: pat_at.0,
                        col: pat_at.1,
                        detail: format!("`{cname}` is not a constructor of `{}`", decl.name),
                    })
                }
            };
            let mut vars = Vec::new();
            while !self.is_sym("=>") {
                vars.push(self.ident()?);
            }
            self.bump();
            let args = decl.ctor_arg_types(k, &params);
            if vars.len() != args.len() {
                return Err(ParseError::Arity {
                    line: pat_at.0,
                    col: pat_at.1,
                    detail: format!("constructor `{cname}` takes {} arguments, pattern has {}", args.len(), vars.len()),
                });
            }
            if branches[k].is_some() {
                return Err(ParseError::Arity {
                    line: pat_at.0,
                    col: pat_at.1,
                    detail: format!("duplicate branch for `{cname}`"),
                });
            }
            for (i, (v, a)) in vars.iter().zip(&args).enumerate() {
                self.push(Some(v.clone()), lift(a, i, 0));
            }
            let body = self.expr(L_TOP);
            self.pop(vars.len());
            branches[k] = Some(Branch { names: vars.iter().map(|v| Hint::new(v)).collect(), body: body? });
            if !self.eat_sym("|") {
                break;
            }
        }
        self.expect_kw("end")?;
        let mut out = Vec::new();
        for (k, b) in branches.into_iter().enumerate() {
            match b {
                Some(b) => out.push(b),
                None => {
                    return Err(ParseError::Arity {
                        line: at.0,
                        col: at.1,
                        detail: format!("missing branch for `{}`", decl.ctors[k].name),
                    })
                }
            }
        }
        let return_type = match return_type {
            Some(t) => t,
            None => self.infer_return(at, &decl, &params, &out)?,
        };
        let m = Term::Match(Box::new(Match { scrutinee, scrutinee_type: st, return_type, branches: out }));
        self.infer(at, &m)?;
        Ok(m)
    }

    fn infer_return(
        &mut self,
        at: (usize, usize),
        decl: &InductiveDecl,
        params: &[Term],
        branches: &[Branch],
    ) -> PResult<Term> {
        let mut last_err = None;
        for (k, br) in branches.iter().enumerate() {
            let args = decl.ctor_arg_types(k, params);
            let mut ctx = self.types.clone();
            for (i, a) in args.iter().enumerate() {
                ctx.push(lift(a, i, 0));
            }
            match typecheck(self.env, &ctx, &br.body) {
                Ok(ty) => {
                    if let Some(t) = unlift(&ty, args.len(), 0) {
                        return Ok(t);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        match last_err {
            Some(e) => self.type_err(at, e),
            None => Err(ParseError::Arity {
                line: at.0,
                col: at.1,
                detail: "cannot infer the match return type; add `return T`".into(),
            }),
        }
    }
}

fn prim2(p: Prim, a: Term, b: Term) -> Term {
    Term::apps(Term::Prim(p), [a, b])
}

fn check_uniform(t: &Term, ind: &str, uniform: &Term, bad: &mut Option<&'static str>) {
    let (h, args) = t.spine();
    if matches!(h, Term::Ind(n) if &**n == ind) {
        if t != uniform {
            *bad = Some("recursive occurrences must apply the type to its parameters in order");
        }
        return;
    }
    for a in args {
        check_uniform(a, ind, uniform, bad);
    }
}

/// Parses a whole problem file.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut env = GlobalEnv::new();
    let mut p = Parser { toks: lex(text)?, pos: 0, env: &mut env, names: vec![], types: vec![] };
    p.problem()
}

/// Parses a term in `env` with the given names in scope (innermost last).
/// Binder types are unknown, so equalities over these names cannot be
/// elaborated; use [`parse_term_ctx`] for that.
pub fn parse_term_in(env: &GlobalEnv, names: &[&str], text: &str) -> Result<Term, ParseError> {
    let ctx: Vec<Term> = names.iter().map(|_| Term::Type).collect();
    parse_term_ctx(env, &ctx, names, text)
}

/// Parses a term with typed names in scope.
pub fn parse_term_ctx(env: &GlobalEnv, types: &[Term], names: &[&str], text: &str) -> Result<Term, ParseError> {
    let mut env = env.clone();
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        env: &mut env,
        names: names.iter().map(|n| Some(n.to_string())).collect(),
        types: types.to_vec(),
    };
    let t = p.expr(L_TOP)?;
    if p.peek() != &Tok::Eof {
        return p.err("end of input");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const HD_ERROR: &str = "
        data list A = nil | cons (A) (list A).
        data option A = none | some (A).
        def hd_error (A : Type) (l : list A) : option A =
          match l with | nil => none A | cons x _ => some A x end.
        goal forall (A : Type) (l : list A) (a : A),
          hd_error A l = some A a -> l <> nil A.
    ";

    #[test]
    fn hd_error_problem() {
        let p = parse_problem(HD_ERROR).unwrap();
        assert_eq!(p.env.user_inductives().count(), 2);
        assert_eq!(p.env.definitions.len(), 1);
        let goal = parse_term_in(
            &p.env,
            &[],
            "forall (A : Type) (l : list A) (a : A), hd_error A l = some A a -> ~ (l = nil A)",
        )
        .unwrap();
        assert_eq!(p.goal, goal);
        let list_a = Term::app(Term::ind("list"), Term::Var(0));
        match &p.goal {
            Term::Pi(_, a, _) => assert_eq!(**a, Term::Type),
            other => panic!("{other}"),
        }
        // `l` has type `list A` under the type binder.
        let tele = crate::syntax::Telescope::of(&p.goal);
        assert_eq!(tele.binders[1].1, list_a);
    }

    #[test]
    fn trivial_goal() {
        let p = parse_problem("goal true = true.").unwrap();
        assert_eq!(p.goal, Term::eq(Term::bool_type(), Term::bool_lit(true), Term::bool_lit(true)));
    }

    #[test]
    fn nat_goal() {
        let p = parse_problem("data nat = O | S (nat).\ngoal forall (n:nat), S n = S n.").unwrap();
        assert!(check_prop(&p.env, &[], &p.goal).is_ok());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_problem("goal foo = foo."), Err(ParseError::Scope { .. })));
        assert!(matches!(parse_problem("goal (true = ."), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse_problem("data list A = nil | cons (A) (list A).\ngoal forall (l : list Int), match l with | nil => True | cons x => False end."),
            Err(ParseError::Arity { .. })
        ));
        assert!(matches!(parse_problem("goal 1 = true."), Err(ParseError::Type { .. })));
        // non-uniform recursive occurrence
        assert!(parse_problem("data t A = c (t Int).\ngoal True.").is_err());
        // self reference outside a fixpoint
        assert!(parse_problem("def f (x : Int) : Int = f x.\ngoal True.").is_err());
    }

    #[test]
    fn precedence() {
        let env = GlobalEnv::new();
        let t = parse_term_in(&env, &[], "1 + 2 * 3 = 7 /\\ True \\/ False").unwrap();
        let expected = Term::or(
            Term::and(
                Term::eq(
                    Term::Int,
                    prim2(Prim::Add, Term::IntLit(1), prim2(Prim::Mul, Term::IntLit(2), Term::IntLit(3))),
                    Term::IntLit(7),
                ),
                Term::True,
            ),
            Term::False,
        );
        assert_eq!(t, expected);
        let neg = parse_term_in(&env, &[], "1 - -2").unwrap();
        assert_eq!(neg, prim2(Prim::Sub, Term::IntLit(1), Term::IntLit(-2)));
    }

    #[test]
    fn comments_and_branch_order() {
        let p = parse_problem(
            "(* lists (* nested *) *)
             data list A = nil | cons (A) (list A).
             def is_nil (A : Type) (l : list A) : bool =
               match l with cons _ _ => false | nil => true end.
             goal True.",
        )
        .unwrap();
        let d = p.env.definition("is_nil").unwrap();
        let mut found = false;
        d.body.visit(&mut |t| {
            if let Term::Match(m) = t {
                found = true;
                assert_eq!(m.branches[0].body, Term::bool_lit(true));
            }
        });
        assert!(found);
    }
}
