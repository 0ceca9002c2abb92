//! Independent verification of candidate assignments.
//!
//! This pass evaluates the original model rows directly, so it shares no
//! state with the simplex (which tracks residuals through a factorized
//! basis). Every solution the crate returns has been through it.

use std::fmt;

use crate::model::{Model, Relation, VarKind};

/// A single violated condition.
#[derive(Debug, Clone)]
pub struct Violation {
    pub what: String,
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (by {:.3e})", self.what, self.amount)
    }
}

/// Checks constraint rows and variable bounds against `values`.
///
/// The per-row tolerance is `feas_tol * tol_mult * max(1, |rhs|, max|term|)`
/// so that rows mixing big-M terms with unit terms are judged at their own
/// scale.
pub fn check_assignment(
    model: &Model,
    values: &[f64],
    feas_tol: f64,
    tol_mult: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    assert_eq!(values.len(), model.num_vars());

    for v in model.var_ids() {
        let (lo, hi) = model.var_bounds(v);
        let x = values[v.index()];
        let tol = feas_tol * tol_mult * 1.0f64.max(lo.abs().min(hi.abs()));
        if x < lo - tol || x > hi + tol {
            out.push(Violation {
                what: format!(
                    "variable {} = {x} outside bounds [{lo}, {hi}]",
                    model.var_name(v)
                ),
                amount: (lo - x).max(x - hi),
            });
        }
    }

    for con in model.constraints() {
        let mut act = 0.0;
        let mut mag = 0.0f64;
        for &(v, c) in &con.terms {
            let t = c * values[v.index()];
            act += t;
            mag = mag.max(t.abs());
        }
        let tol = feas_tol * tol_mult * 1.0f64.max(con.rhs.abs()).max(mag);
        let violation = match con.relation {
            Relation::Le => act - con.rhs,
            Relation::Ge => con.rhs - act,
            Relation::Eq => (act - con.rhs).abs(),
        };
        if violation > tol {
            out.push(Violation {
                what: format!(
                    "constraint {}: activity {act} {} rhs {}",
                    con.name, con.relation, con.rhs
                ),
                amount: violation,
            });
        }
    }
    out
}

/// Checks that every binary variable is within `int_tol` of 0 or 1.
pub fn check_integrality(model: &Model, values: &[f64], int_tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for v in model.var_ids() {
        if model.var_kind(v) == VarKind::Binary {
            let x = values[v.index()];
            let frac = (x - x.round()).abs();
            if frac > int_tol {
                out.push(Violation {
                    what: format!("binary {} = {x} is fractional", model.var_name(v)),
                    amount: frac,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, Relation};

    #[test]
    fn flags_violated_row_and_bound() {
        let mut m = Model::new("t");
        let x = m.add_continuous(0.0, 1.0, "x").unwrap();
        m.add_constraint(&[(x, 1.0)], Relation::Ge, 2.0, "need2")
            .unwrap();
        let v = check_assignment(&m, &[0.5], 1e-7, 1.0);
        assert_eq!(v.len(), 1);
        assert!(v[0].what.contains("need2"));
        let v = check_assignment(&m, &[3.0], 1e-7, 1.0);
        assert!(v.iter().any(|v| v.what.contains("outside bounds")));
    }

    #[test]
    fn accepts_within_tolerance() {
        let mut m = Model::new("t");
        let x = m.add_continuous(0.0, 1.0, "x").unwrap();
        m.add_constraint(&[(x, 1.0)], Relation::Eq, 0.5, "half")
            .unwrap();
        assert!(check_assignment(&m, &[0.5 + 1e-9], 1e-7, 1.0).is_empty());
    }

    #[test]
    fn integrality_check() {
        let mut m = Model::new("t");
        m.add_binary("b").unwrap();
        assert!(check_integrality(&m, &[0.4], 1e-6).len() == 1);
        assert!(check_integrality(&m, &[1.0 - 1e-8], 1e-6).is_empty());
    }
}
