//! Global environment: inductive declarations and named definitions.

use std::collections::HashMap;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::syntax::{instantiate, lift, Name, Term, BOOL};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: Name,
    /// Argument types in the context of the type parameters: with `p`
    /// parameters, parameter `j` is `Var(p - 1 - j)`.
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InductiveDecl {
    pub name: Name,
    pub params: Vec<Name>,
    pub ctors: Vec<CtorDecl>,
}

impl InductiveDecl {
    /// The inductive applied to its own parameters, in the parameter context.
    pub fn self_type(&self) -> Term {
        let p = self.params.len();
        Term::apps(Term::Ind(self.name.clone()), (0..p).map(|j| Term::Var(p - 1 - j)))
    }

    /// Argument types of constructor `k` at concrete parameters.
    pub fn ctor_arg_types(&self, k: usize, params: &[Term]) -> Vec<Term> {
        self.ctors[k].args.iter().map(|a| instantiate(a, params)).collect()
    }

    /// Full type `forall (params : Type) (args...), I params`.
    pub fn ctor_type(&self, k: usize) -> Term {
        let p = self.params.len();
        let args = &self.ctors[k].args;
        let n = args.len();
        let result = Term::apps(
            Term::Ind(self.name.clone()),
            (0..p).map(|j| Term::Var(n + p - 1 - j)),
        );
        let mut ty = result;
        for (i, a) in args.iter().enumerate().rev() {
            ty = Term::Pi(crate::syntax::Hint::anon(), Box::new(lift(a, i, 0)), Box::new(ty));
        }
        for name in self.params.iter().rev() {
            ty = Term::Pi(crate::syntax::Hint(name.clone()), Box::new(Term::Type), Box::new(ty));
        }
        ty
    }

    /// `forall (params : Type), Type`
    pub fn arity_type(&self) -> Term {
        self.params.iter().rev().fold(Term::Type, |acc, name| {
            Term::Pi(crate::syntax::Hint(name.clone()), Box::new(Term::Type), Box::new(acc))
        })
    }

    pub fn ctor_index(&self, name: &str) -> Option<usize> {
        self.ctors.iter().position(|c| &*c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: Name,
    pub ty: Term,
    pub body: Term,
}

#[derive(Clone, Debug)]
pub struct GlobalEnv {
    pub inductives: IndexMap<Name, InductiveDecl>,
    pub definitions: IndexMap<Name, Definition>,
    ctor_names: HashMap<Name, (Name, usize)>,
}

impl Default for GlobalEnv {
    fn default() -> Self {
        Self::new()
    }
}

impl GlobalEnv {
    /// An environment holding only the builtin `bool` type.
    pub fn new() -> Self {
        let mut env = GlobalEnv {
            inductives: IndexMap::new(),
            definitions: IndexMap::new(),
            ctor_names: HashMap::new(),
        };
        env.add_inductive(InductiveDecl {
            name: Arc::from(BOOL),
            params: vec![],
            ctors: vec![
                CtorDecl { name: Arc::from("true"), args: vec![] },
                CtorDecl { name: Arc::from("false"), args: vec![] },
            ],
        });
        env
    }

    pub fn add_inductive(&mut self, decl: InductiveDecl) {
        for (k, c) in decl.ctors.iter().enumerate() {
            self.ctor_names.insert(c.name.clone(), (decl.name.clone(), k));
        }
        self.inductives.insert(decl.name.clone(), decl);
    }

    pub fn add_definition(&mut self, def: Definition) {
        self.definitions.insert(def.name.clone(), def);
    }

    pub fn inductive(&self, name: &str) -> Option<&InductiveDecl> {
        self.inductives.get(name)
    }

    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.get(name)
    }

    pub fn lookup_ctor(&self, name: &str) -> Option<(&Name, usize)> {
        self.ctor_names.get(name).map(|(i, k)| (i, *k))
    }

    pub fn ctor_name(&self, ind: &str, k: usize) -> Option<&Name> {
        self.inductives.get(ind).and_then(|d| d.ctors.get(k)).map(|c| &c.name)
    }

    /// True if `name` is taken by any global.
    pub fn is_global(&self, name: &str) -> bool {
        self.inductives.contains_key(name)
            || self.definitions.contains_key(name)
            || self.ctor_names.contains_key(name)
    }

    /// User-declared inductives (the builtin `bool` excluded).
    pub fn user_inductives(&self) -> impl Iterator<Item = &InductiveDecl> {
        self.inductives.values().filter(|d| &*d.name != BOOL)
    }
}

/// A parsed problem file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub env: GlobalEnv,
    /// Hypotheses and lemmas in file order.
    pub hypotheses: Vec<(Name, Term)>,
    /// Names among `hypotheses` declared with `lemma`.
    pub lemma_params: Vec<Name>,
    pub goal: Term,
}

impl Problem {
    pub fn is_lemma(&self, name: &str) -> bool {
        self.lemma_params.iter().any(|l| &**l == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Hint;

    fn list_decl() -> InductiveDecl {
        InductiveDecl {
            name: Arc::from("list"),
            params: vec![Arc::from("A")],
            ctors: vec![
                CtorDecl { name: Arc::from("nil"), args: vec![] },
                CtorDecl {
                    name: Arc::from("cons"),
                    args: vec![Term::Var(0), Term::app(Term::ind("list"), Term::Var(0))],
                },
            ],
        }
    }

    #[test]
    fn cons_type() {
        let d = list_decl();
        let expected = Term::Pi(
            Hint::new("A"),
            Box::new(Term::Type),
            Box::new(Term::Pi(
                Hint::anon(),
                Box::new(Term::Var(0)),
                Box::new(Term::Pi(
                    Hint::anon(),
                    Box::new(Term::app(Term::ind("list"), Term::Var(1))),
                    Box::new(Term::app(Term::ind("list"), Term::Var(2))),
                )),
            )),
        );
        assert_eq!(d.ctor_type(1), expected);
    }

    #[test]
    fn ctor_lookup() {
        let mut env = GlobalEnv::new();
        env.add_inductive(list_decl());
        assert_eq!(env.lookup_ctor("cons").map(|(i, k)| (i.to_string(), k)), Some(("list".into(), 1)));
        assert_eq!(env.lookup_ctor("false").map(|(_, k)| k), Some(1));
        let args = env.inductive("list").unwrap().ctor_arg_types(1, &[Term::Int]);
        assert_eq!(args, vec![Term::Int, Term::app(Term::ind("list"), Term::Int)]);
    }
}
