//! Solve results and solver options.

use std::time::Duration;

use crate::model::VarId;

/// Outcome of an LP or MILP solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// A node or time cap was hit; the solution carries the best incumbent
    /// and the remaining gap.
    GapLimit,
}

/// Counters for diagnostics and determinism tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub simplex_iterations: u64,
    pub nodes_explored: u64,
    pub refactorizations: u64,
}

/// A solve result. `values` are in variable declaration order.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: Status,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Relative optimality gap `|incumbent - bound| / max(1, |incumbent|)`;
    /// zero for plain LP optima.
    pub mip_gap: f64,
    pub stats: SolveStats,
}

impl Solution {
    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.index()]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Tolerances and caps. Defaults match the planner's expectations; everything
/// is overridable per solve.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Primal feasibility tolerance on constraint residuals and bounds.
    pub feas_tol: f64,
    /// Maximum distance from {0,1} for a binary to count as integral.
    pub int_tol: f64,
    /// Relative MIP gap at which branch-and-bound stops.
    pub rel_gap: f64,
    /// Branch-and-bound node cap; hitting it yields `Status::GapLimit`.
    pub max_nodes: u64,
    /// Wall-clock cap for branch-and-bound.
    pub time_limit: Option<Duration>,
    /// Simplex iteration cap per LP solve.
    pub max_iterations: u64,
    /// Refactorize the basis after this many pivots.
    pub refactor_interval: u32,
    /// Apply geometric-mean equilibration before solving.
    pub scale: bool,
    /// Try rounding fractional binaries into a feasible incumbent at each node.
    pub rounding_heuristic: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-7,
            int_tol: 1e-6,
            rel_gap: 1e-6,
            max_nodes: 200_000,
            time_limit: None,
            max_iterations: 2_000_000,
            refactor_interval: 96,
            scale: true,
            rounding_heuristic: true,
        }
    }
}
