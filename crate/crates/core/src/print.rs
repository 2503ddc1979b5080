//! Pretty-printer producing the concrete syntax accepted by the parser.

use std::collections::HashSet;

use crate::env::{GlobalEnv, Problem};
use crate::parse::{KEYWORDS, L_ADD, L_AND, L_ANDB, L_APP, L_ARROW, L_ATOM, L_CMP, L_MUL, L_NOT, L_OR, L_ORB, L_TOP};
use crate::syntax::{lift, Hint, Prim, Term};

struct Printer<'e> {
    env: &'e GlobalEnv,
    /// Names in scope, innermost last.
    names: Vec<String>,
    /// Names of opaque section parameters, which must not be shadowed.
    params: HashSet<String>,
}

/// Prints `t` with `context_names` bound (innermost last).
pub fn print_term(t: &Term, env: &GlobalEnv, context_names: &[String]) -> String {
    let mut p = Printer { env, names: context_names.to_vec(), params: HashSet::new() };
    t.visit(&mut |s| {
        if let Term::Param(n) = s {
            p.params.insert(n.to_string());
        }
    });
    p.term(t, L_TOP)
}

/// Prints a declared type with the restricted type grammar.
pub fn print_type(t: &Term, env: &GlobalEnv, context_names: &[String]) -> String {
    let mut p = Printer { env, names: context_names.to_vec(), params: HashSet::new() };
    p.ty(t)
}

/// Prints a whole problem file.
pub fn print_problem(p: &Problem) -> String {
    let env = &p.env;
    let mut out = String::new();
    for d in env.user_inductives() {
        out.push_str(&format!("data {}", d.name));
        for a in &d.params {
            out.push_str(&format!(" {a}"));
        }
        out.push_str(" =");
        let names: Vec<String> = d.params.iter().map(|s| s.to_string()).collect();
        for (k, c) in d.ctors.iter().enumerate() {
            out.push_str(if k == 0 { " " } else { " | " });
            out.push_str(&c.name);
            for a in &c.args {
                out.push_str(&format!(" ({})", print_term(a, env, &names)));
            }
        }
        out.push_str(".\n");
    }
    for d in env.definitions.values() {
        out.push_str(&format!(
            "def {} : {} =\n  {}.\n",
            d.name,
            print_type(&d.ty, env, &[]),
            print_term(&d.body, env, &[])
        ));
    }
    for (name, h) in &p.hypotheses {
        let kw = if p.is_lemma(name) { "lemma" } else { "hyp" };
        out.push_str(&format!("{kw} {name} : {}.\n", print_term(h, env, &[])));
    }
    out.push_str(&format!("goal {}.\n", print_term(&p.goal, env, &[])));
    out
}

fn paren(s: String, node: u8, ctx: u8) -> String {
    if node < ctx {
        format!("({s})")
    } else {
        s
    }
}

impl<'e> Printer<'e> {
    fn taken(&self, n: &str) -> bool {
        self.names.iter().any(|x| x == n)
            || self.env.is_global(n)
            || KEYWORDS.contains(&n)
            || Prim::from_ident(n).is_some()
            || self.params.contains(n)
    }

    fn fresh(&self, hint: &Hint) -> String {
        let base: String = if hint.is_anon() { "x".into() } else { hint.as_str().to_string() };
        if !self.taken(&base) {
            return base;
        }
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "x" } else { stem };
        (0..).map(|i| format!("{stem}{i}")).find(|n| !self.taken(n)).expect("infinite names")
    }

    fn var(&self, i: usize) -> String {
        let n = self.names.len();
        if i < n {
            self.names[n - 1 - i].clone()
        } else {
            format!("#{i}")
        }
    }

    fn ty(&mut self, t: &Term) -> String {
        match t {
            Term::Pi(_, a, b) if !b.has_var(0) => {
                let dom = self.term(a, L_APP);
                self.names.push("_".into());
                let cod = self.ty(b);
                self.names.pop();
                format!("{dom} -> {cod}")
            }
            Term::Pi(..) => {
                let (groups, body) = self.binder_groups(t, |t| match t {
                    Term::Pi(h, a, b) if b.has_var(0) => Some((h, &**a, &**b)),
                    _ => None,
                });
                let n = self.names.len();
                let (bs, _) = self.push_groups(&groups);
                let b = self.ty(body);
                self.names.truncate(n);
                format!("forall {bs}, {b}")
            }
            _ => self.term(t, L_APP),
        }
    }

    /// Collects a run of binders, grouping consecutive ones with equal domains.
    fn binder_groups<'t>(
        &self,
        t: &'t Term,
        step: impl Fn(&'t Term) -> Option<(&'t Hint, &'t Term, &'t Term)>,
    ) -> (Vec<(Vec<&'t Hint>, &'t Term)>, &'t Term) {
        let mut groups: Vec<(Vec<&Hint>, &Term)> = Vec::new();
        let mut cur = t;
        let mut prev: Option<&Term> = None;
        while let Some((h, a, b)) = step(cur) {
            match (prev, groups.last_mut()) {
                (Some(p), Some(g)) if lift(p, 1, 0) == *a => g.0.push(h),
                _ => groups.push((vec![h], a)),
            }
            prev = Some(a);
            cur = b;
        }
        (groups, cur)
    }

    /// Renders binder groups, pushing their names; returns the text and count.
    fn push_groups(&mut self, groups: &[(Vec<&Hint>, &Term)]) -> (String, usize) {
        let mut parts = Vec::new();
        let mut count = 0;
        for (hs, a) in groups {
            let dom = self.term(a, L_TOP);
            let mut names = Vec::new();
            for h in hs {
                let n = self.fresh(h);
                self.names.push(n.clone());
                names.push(n);
                count += 1;
            }
            parts.push(format!("({} : {dom})", names.join(" ")));
        }
        (parts.join(" "), count)
    }

    fn term(&mut self, t: &Term, lvl: u8) -> String {
        match t {
            Term::Var(i) => self.var(*i),
            Term::Const(c) => c.to_string(),
            Term::Ctor(i, k) => self.env.ctor_name(i, *k).map(|s| s.to_string()).unwrap_or_else(|| format!("{i}.{k}")),
            Term::Ind(i) | Term::Param(i) => i.to_string(),
            Term::Type => "Type".into(),
            Term::Prop => "Prop".into(),
            Term::Int => "Int".into(),
            Term::IntLit(n) if *n < 0 => format!("(-{})", n.unsigned_abs()),
            Term::IntLit(n) => n.to_string(),
            Term::Prim(p) => p.ident().into(),
            Term::True => "True".into(),
            Term::False => "False".into(),
            Term::Pi(_, a, b) if !b.has_var(0) => {
                let dom = self.term(a, L_OR);
                self.names.push("_".into());
                let cod = self.term(b, L_ARROW);
                self.names.pop();
                paren(format!("{dom} -> {cod}"), L_ARROW, lvl)
            }
            Term::Pi(..) => {
                let (groups, body) = self.binder_groups(t, |t| match t {
                    Term::Pi(h, a, b) if b.has_var(0) => Some((h, &**a, &**b)),
                    _ => None,
                });
                self.binder_text("forall", ",", &groups, body, lvl)
            }
            Term::Lam(..) => {
                let (groups, body) = self.binder_groups(t, |t| match t {
                    Term::Lam(h, a, b) => Some((h, &**a, &**b)),
                    _ => None,
                });
                self.binder_text("fun", " =>", &groups, body, lvl)
            }
            Term::Exists(..) => {
                let (groups, body) = self.binder_groups(t, |t| match t {
                    Term::Exists(h, a, b) => Some((h, &**a, &**b)),
                    _ => None,
                });
                self.binder_text("exists", ",", &groups, body, lvl)
            }
            Term::Fix(fx) => {
                let n0 = self.names.len();
                let ty_tele = crate::syntax::Telescope::of(&fx.ty);
                let mut lams = 0;
                let mut cur = &fx.body;
                while let Term::Lam(_, _, b) = cur {
                    if lams >= ty_tele.len() {
                        break;
                    }
                    lams += 1;
                    cur = b;
                }
                let fname = self.fresh(&fx.name);
                let mut binders = Vec::new();
                let mut bnames = Vec::new();
                for (h, a) in ty_tele.binders.iter().take(lams) {
                    let dom = self.term(a, L_TOP);
                    self.names.push(fname.clone());
                    let n = self.fresh(h);
                    self.names.pop();
                    self.names.push(n.clone());
                    bnames.push(n.clone());
                    binders.push(format!("({n} : {dom})"));
                }
                let rest = crate::syntax::rebuild_pi(&ty_tele.binders[lams..], ty_tele.body.clone());
                let ret = self.ty(&rest);
                self.names.truncate(n0);
                self.names.push(fname.clone());
                self.names.extend(bnames);
                let body = self.term(cur, L_TOP);
                self.names.truncate(n0);
                paren(
                    format!("fix {fname} / {} {} : {ret} := {body}", fx.decreasing, binders.join(" ")),
                    L_TOP,
                    lvl,
                )
            }
            Term::Match(m) => {
                let scrut = self.term(&m.scrutinee, L_TOP);
                let mut out = format!("match {scrut} with");
                let ind = m.scrutinee_type.as_ind_app().map(|(i, _)| i.clone());
                for (k, br) in m.branches.iter().enumerate() {
                    let cname = ind
                        .as_ref()
                        .and_then(|i| self.env.ctor_name(i, k))
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| format!("?{k}"));
                    let n0 = self.names.len();
                    let mut vars = Vec::new();
                    let arity = br.arity();
                    for (j, h) in br.names.iter().enumerate() {
                        // binder j is Var(arity - 1 - j) in the body
                        let used = br.body.has_var(arity - 1 - j);
                        let n = if used { self.fresh(h) } else { "_".into() };
                        self.names.push(n.clone());
                        vars.push(n);
                    }
                    let body = self.term(&br.body, L_TOP);
                    self.names.truncate(n0);
                    out.push_str(&format!(" | {cname}"));
                    for v in vars {
                        out.push(' ');
                        out.push_str(&v);
                    }
                    out.push_str(&format!(" => {body}"));
                }
                out.push_str(" end");
                out
            }
            Term::Eq(_, a, b) => {
                let s = format!("{} = {}", self.term(a, L_ORB), self.term(b, L_ORB));
                paren(s, L_CMP, lvl)
            }
            Term::Not(a) => {
                if let Term::Eq(_, x, y) = &**a {
                    let s = format!("{} <> {}", self.term(x, L_ORB), self.term(y, L_ORB));
                    return paren(s, L_CMP, lvl);
                }
                let s = format!("~ {}", self.term(a, L_NOT));
                paren(s, L_NOT, lvl)
            }
            Term::And(a, b) => {
                let s = format!("{} /\\ {}", self.term(a, L_NOT), self.term(b, L_AND));
                paren(s, L_AND, lvl)
            }
            Term::Or(a, b) => {
                let s = format!("{} \\/ {}", self.term(a, L_AND), self.term(b, L_OR));
                paren(s, L_OR, lvl)
            }
            Term::App(..) => {
                let (head, args) = t.spine();
                if let (Term::Prim(p), 2) = (head, args.len()) {
                    if let Some(op) = p.infix() {
                        let (node, l, r) = match p {
                            Prim::Le | Prim::Lt | Prim::Leb | Prim::Ltb => (L_CMP, L_ORB, L_ORB),
                            Prim::Orb => (L_ORB, L_ORB, L_ANDB),
                            Prim::Andb => (L_ANDB, L_ANDB, L_ADD),
                            Prim::Add | Prim::Sub => (L_ADD, L_ADD, L_MUL),
                            _ => (L_MUL, L_MUL, L_APP),
                        };
                        let s = format!("{} {op} {}", self.term(args[0], l), self.term(args[1], r));
                        return paren(s, node, lvl);
                    }
                }
                let mut s = self.term(head, L_APP);
                for a in args {
                    s.push(' ');
                    s.push_str(&self.term(a, L_ATOM));
                }
                paren(s, L_APP, lvl)
            }
        }
    }

    fn binder_text(
        &mut self,
        kw: &str,
        sep: &str,
        groups: &[(Vec<&Hint>, &Term)],
        body: &Term,
        lvl: u8,
    ) -> String {
        let n0 = self.names.len();
        let (bs, _) = self.push_groups(groups);
        let b = self.term(body, L_TOP);
        self.names.truncate(n0);
        paren(format!("{kw} {bs}{sep} {b}"), L_TOP, lvl)
    }
}
