//! A self-contained mixed-integer linear programming facility: model
//! construction, LP solution via a bounded-variable revised simplex, and
//! binary branch-and-bound.
//!
//! The solver targets sparse planning problems in the tens of thousands of
//! rows. Every solution is re-verified by an independent constraint-checking
//! pass before it is returned.
//!
//! ```
//! use gridvest_milp::{solve_milp, Model, Relation, SolverOptions, Status};
//!
//! let mut m = Model::new("knapsack");
//! let a = m.add_binary("a").unwrap();
//! let b = m.add_binary("b").unwrap();
//! m.set_obj_coeff(a, -3.0);
//! m.set_obj_coeff(b, -4.0);
//! m.add_constraint(&[(a, 2.0), (b, 3.0)], Relation::Le, 4.0, "cap")
//!     .unwrap();
//! let sol = solve_milp(&m, &SolverOptions::default()).unwrap();
//! assert_eq!(sol.status, Status::Optimal);
//! assert!((sol.objective - (-4.0)).abs() < 1e-9);
//! ```

mod branch;
pub mod checker;
mod factor;
mod lp_format;
mod model;
mod scale;
mod simplex;
mod solution;

pub use lp_format::to_lp_format;
pub use model::{LinearConstraint, Model, Relation, VarId, VarKind};
pub use solution::{Solution, SolveStats, SolverOptions, Status};

use thiserror::Error;

/// Errors from model construction or numerical breakdown. Infeasible and
/// unbounded problems are not errors; they come back as [`Status`] values.
#[derive(Debug, Error)]
pub enum MilpError {
    #[error("variable {name}: invalid bounds [{lo}, {hi}]")]
    BadBounds { name: String, lo: f64, hi: f64 },
    #[error("constraint {constraint}: {detail}")]
    BadCoefficient { constraint: String, detail: String },
    #[error("constraint {constraint}: references undeclared variable index {var}")]
    UnknownVariable { constraint: String, var: usize },
    #[error("numerical breakdown: {detail}")]
    Numerical { detail: String },
}

/// Solves the LP relaxation of `model` (binaries relaxed to `[0, 1]`).
pub fn solve_lp(model: &Model, opts: &SolverOptions) -> Result<Solution, MilpError> {
    let r = simplex::solve_relaxation(model, opts)?;
    let objective = r.objective;
    Ok(Solution {
        status: r.status,
        values: r.values,
        objective,
        mip_gap: 0.0,
        stats: SolveStats {
            simplex_iterations: r.iterations,
            nodes_explored: 0,
            refactorizations: r.refactorizations,
        },
    })
}

/// Solves `model` to optimality within `opts.rel_gap`, or returns
/// `Status::GapLimit` carrying the best incumbent when a node or time cap
/// is hit.
pub fn solve_milp(model: &Model, opts: &SolverOptions) -> Result<Solution, MilpError> {
    if model.binary_vars().is_empty() {
        return solve_lp(model, opts);
    }
    branch::branch_and_bound(model, opts)
}
