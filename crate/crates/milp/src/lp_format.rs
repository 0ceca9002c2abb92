//! CPLEX LP-format text export for cross-checking models against external
//! solvers during development.

use std::fmt::Write as _;

use crate::model::{Model, Relation, VarKind};

fn sanitize(name: &str, fallback: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit() || c == 'e' || c == 'E' || c == '.') {
        s = format!("{fallback}_{s}");
    }
    s
}

fn push_terms(out: &mut String, terms: &[(crate::model::VarId, f64)], names: &[String]) {
    let mut first = true;
    for &(v, c) in terms {
        if c == 0.0 {
            continue;
        }
        if first {
            if c < 0.0 {
                let _ = write!(out, "- ");
            }
        } else if c < 0.0 {
            let _ = write!(out, " - ");
        } else {
            let _ = write!(out, " + ");
        }
        let a = c.abs();
        if a == 1.0 {
            let _ = write!(out, "{}", names[v.index()]);
        } else {
            let _ = write!(out, "{} {}", a, names[v.index()]);
        }
        first = false;
    }
    if first {
        let _ = write!(out, "0 {}", names.first().map(String::as_str).unwrap_or("x0"));
    }
}

/// Renders `model` in LP format.
pub fn to_lp_format(model: &Model) -> String {
    let names: Vec<String> = model
        .var_ids()
        .map(|v| sanitize(model.var_name(v), &format!("x{}", v.index())))
        .collect();

    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name());
    let _ = writeln!(out, "Minimize");
    let obj_terms: Vec<_> = model
        .var_ids()
        .map(|v| (v, model.obj_coeff(v)))
        .filter(|&(_, c)| c != 0.0)
        .collect();
    let _ = write!(out, " obj: ");
    push_terms(&mut out, &obj_terms, &names);
    let _ = writeln!(out);
    let _ = writeln!(out, "Subject To");
    for (i, con) in model.constraints().iter().enumerate() {
        let cname = sanitize(&con.name, &format!("c{i}"));
        let _ = write!(out, " {cname}: ");
        push_terms(&mut out, &con.terms, &names);
        let rel = match con.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        let _ = writeln!(out, " {rel} {}", con.rhs);
    }
    let _ = writeln!(out, "Bounds");
    for v in model.var_ids() {
        let (lo, hi) = model.var_bounds(v);
        let n = &names[v.index()];
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {lo} <= {n} <= {hi}");
            }
            (true, false) => {
                if lo != 0.0 {
                    let _ = writeln!(out, " {n} >= {lo}");
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {n} <= {hi}");
            }
            (false, false) => {
                let _ = writeln!(out, " {n} free");
            }
        }
    }
    let binaries: Vec<_> = model
        .var_ids()
        .filter(|&v| model.var_kind(v) == VarKind::Binary)
        .collect();
    if !binaries.is_empty() {
        let _ = writeln!(out, "Binaries");
        for v in binaries {
            let _ = writeln!(out, " {}", names[v.index()]);
        }
    }
    let _ = writeln!(out, "End");
    out
}
