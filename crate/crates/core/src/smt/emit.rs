//! SMT-LIB 2.6 rendering.

use std::fmt::Write as _;

use super::fol::{FolProblem, FunKind};

/// Logic string from the content: quantifiers, datatypes, arithmetic.
pub fn logic(p: &FolProblem, native_adt: bool) -> String {
    let quantified = p.axioms.iter().any(|a| a.formula.is_quantified()) || p.goal.is_quantified();
    let nonlinear = p.axioms.iter().any(|a| a.formula.is_nonlinear()) || p.goal.is_nonlinear();
    let dt = native_adt && !p.datatypes.is_empty();
    format!(
        "{}UF{}{}IA",
        if quantified { "" } else { "QF_" },
        if dt { "DT" } else { "" },
        if nonlinear { "N" } else { "L" }
    )
}

fn declarations(p: &FolProblem, native_adt: bool, out: &mut String) {
    for s in &p.sorts {
        let _ = writeln!(out, "(declare-sort {s} 0)");
    }
    if native_adt && !p.datatypes.is_empty() {
        out.push_str("(declare-datatypes (");
        for (i, d) in p.datatypes.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "({} 0)", d.sort);
        }
        out.push_str(") (");
        for (i, d) in p.datatypes.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push('(');
            for (k, (c, args)) in d.ctors.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({c}");
                for (j, a) in args.iter().enumerate() {
                    let _ = write!(out, " ({c}?s{j} {a})");
                }
                out.push(')');
            }
            out.push(')');
        }
        out.push_str("))\n");
    } else {
        for d in &p.datatypes {
            let _ = writeln!(out, "(declare-sort {} 0)", d.sort);
        }
    }
    for f in &p.functions {
        if native_adt && f.kind == FunKind::Constructor {
            continue;
        }
        let args: Vec<String> = f.args.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "(declare-fun {} ({}) {})", f.name, args.join(" "), f.result);
    }
    for (s, sort) in &p.skolems {
        let _ = writeln!(out, "(declare-fun {s} () {sort})");
    }
}

fn axioms(p: &FolProblem, native_adt: bool, out: &mut String) {
    for a in &p.axioms {
        if native_adt && a.datatype_axiom {
            continue;
        }
        let _ = writeln!(out, "; {}", a.name);
        let _ = writeln!(out, "(assert {})", a.formula);
    }
}

/// Script whose `unsat` answer proves the goal.
pub fn emit_smtlib(p: &FolProblem, native_adt: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic {})", logic(p, native_adt));
    declarations(p, native_adt, &mut out);
    axioms(p, native_adt, &mut out);
    out.push_str("; negated goal\n");
    let _ = writeln!(out, "(assert {})", p.negated_goal);
    out.push_str("(check-sat)\n(exit)\n");
    out
}

/// Axioms, plus the goal itself when `with_goal`; an `unsat` answer means
/// the emitted context is inconsistent.
pub fn emit_consistency(p: &FolProblem, native_adt: bool, with_goal: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic {})", logic(p, native_adt));
    declarations(p, native_adt, &mut out);
    axioms(p, native_adt, &mut out);
    if with_goal {
        out.push_str("; goal\n");
        let _ = writeln!(out, "(assert {})", p.goal);
    }
    out.push_str("(check-sat)\n(exit)\n");
    out
}

