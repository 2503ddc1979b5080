//! Proof states: a goal with named hypotheses, each carrying the evidence
//! that justifies adding it.

use std::sync::Arc;

use crate::env::{GlobalEnv, Problem};
use crate::print::print_term;
use crate::syntax::{Name, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomKind {
    Injectivity(usize),
    Disjointness(usize, usize),
    Exhaustiveness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// Supplied by the user.
    Given,
    ByDefinition(Name),
    /// Closed by conversion, possibly after rewriting once with `source`.
    ByConversion { source: Option<Name> },
    /// Like [`Justification::ByConversion`], after case splits on the
    /// universally bound variables at the given telescope positions.
    ByCaseConversion { source: Option<Name>, split_vars: Vec<usize>, depth: usize },
    ByInstantiation { source: Name, type_args: Vec<Term> },
    DatatypeAxiom { instance: Term, kind: AxiomKind },
}

impl Justification {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Justification::Given => "given",
            Justification::ByDefinition(_) => "definition",
            Justification::ByConversion { .. } => "conversion",
            Justification::ByCaseConversion { .. } => "case-conversion",
            Justification::ByInstantiation { .. } => "instantiation",
            Justification::DatatypeAxiom { .. } => "datatype-axiom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub name: Name,
    pub statement: Term,
    pub justification: Justification,
}

impl Hypothesis {
    pub fn new(name: impl AsRef<str>, statement: Term, justification: Justification) -> Self {
        Hypothesis { name: Arc::from(name.as_ref()), statement, justification }
    }
}

#[derive(Debug, Clone)]
pub struct ProofState {
    pub env: Arc<GlobalEnv>,
    /// Section type variables, bound as [`Term::Param`] in the goal.
    pub params: Vec<Name>,
    pub hypotheses: Vec<Hypothesis>,
    /// User lemmas offered to monomorphization; not part of the context
    /// until instantiated.
    pub lemmas: Vec<(Name, Term)>,
    pub goal: Term,
}

impl ProofState {
    /// Hypotheses become `Given`; the goal's leading type binders become
    /// opaque parameters.
    pub fn from_problem(p: &Problem) -> ProofState {
        let mut params = Vec::new();
        let mut goal = p.goal.clone();
        while let Term::Pi(h, dom, body) = &goal {
            if **dom != Term::Type {
                break;
            }
            let taken = |n: &str| p.env.is_global(n) || params.iter().any(|q: &Name| &**q == n);
            let base = if h.is_anon() { "T".to_string() } else { h.as_str().to_string() };
            let mut name = base.clone();
            let mut k = 2;
            while taken(&name) {
                name = format!("{base}{k}");
                k += 1;
            }
            let name: Name = Arc::from(name.as_str());
            goal = crate::syntax::subst(body, 0, &Term::Param(name.clone()));
            params.push(name);
        }
        let mut hypotheses = Vec::new();
        let mut lemmas = Vec::new();
        for (n, h) in &p.hypotheses {
            if p.is_lemma(n) {
                lemmas.push((n.clone(), h.clone()));
            } else {
                hypotheses.push(Hypothesis { name: n.clone(), statement: h.clone(), justification: Justification::Given });
            }
        }
        ProofState { env: Arc::new(p.env.clone()), params, hypotheses, lemmas, goal }
    }

    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| &*h.name == name)
    }

    /// Statement of a hypothesis or lemma.
    pub fn statement(&self, name: &str) -> Option<&Term> {
        self.hypothesis(name)
            .map(|h| &h.statement)
            .or_else(|| self.lemmas.iter().find(|(n, _)| &**n == name).map(|(_, t)| t))
    }

    /// Alpha-equality dedup test.
    pub fn contains_alpha(&self, statement: &Term) -> bool {
        self.hypotheses.iter().any(|h| h.statement == *statement)
    }

    fn name_taken(&self, name: &str) -> bool {
        self.hypotheses.iter().any(|h| &*h.name == name) || self.lemmas.iter().any(|(n, _)| &**n == name)
    }

    /// `base`, or `base_2`, `base_3`, ... if taken.
    pub fn fresh_name(&self, base: &str) -> Name {
        if !self.name_taken(base) {
            return Arc::from(base);
        }
        let mut k = 2;
        loop {
            let cand = format!("{base}_{k}");
            if !self.name_taken(&cand) {
                return Arc::from(cand.as_str());
            }
            k += 1;
        }
    }

    /// Adds a hypothesis unless an alpha-equal statement is present,
    /// renaming on clashes. Returns the name used, if added.
    pub fn push(&mut self, mut h: Hypothesis) -> Option<Name> {
        if self.contains_alpha(&h.statement) {
            return None;
        }
        h.name = self.fresh_name(&h.name);
        let n = h.name.clone();
        self.hypotheses.push(h);
        Some(n)
    }

    pub fn print_statement(&self, t: &Term) -> String {
        print_term(t, &self.env, &[])
    }

    /// One line per hypothesis, then the goal.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.hypotheses {
            out.push_str(&format!("{} : {}\n", h.name, self.print_statement(&h.statement)));
        }
        out.push_str(&format!("goal : {}\n", self.print_statement(&self.goal)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    #[test]
    fn section_variables_become_params() {
        let p = parse_problem(
            "data list A = nil | cons (A) (list A).
             lemma l : forall (A : Type) (x : A), x = x.
             hyp h : true = true.
             goal forall (A : Type) (l : list A), l = l.",
        )
        .unwrap();
        let s = ProofState::from_problem(&p);
        assert_eq!(s.params.len(), 1);
        assert_eq!(s.hypotheses.len(), 1);
        assert_eq!(s.lemmas.len(), 1);
        assert_eq!(s.render().lines().last().unwrap(), "goal : forall (l : list A), l = l");
    }

    #[test]
    fn push_dedups_and_renames() {
        let p = parse_problem("goal true = true.").unwrap();
        let mut s = ProofState::from_problem(&p);
        let t = Term::eq(Term::bool_type(), Term::bool_lit(true), Term::bool_lit(true));
        assert!(s.push(Hypothesis::new("h", t.clone(), Justification::Given)).is_some());
        assert!(s.push(Hypothesis::new("h", t, Justification::Given)).is_none());
        let u = Term::eq(Term::bool_type(), Term::bool_lit(false), Term::bool_lit(false));
        assert_eq!(&*s.push(Hypothesis::new("h", u, Justification::Given)).unwrap(), "h_2");
    }
}
