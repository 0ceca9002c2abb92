//! Info-gap robustness and opportunity analysis.
//!
//! Uncertainty envelope: a single radius `alpha` scales the whole PV series
//! by `(1 -+ alpha)` and the EV series by `(1 +- alpha)` (worst direction:
//! PV down, EV up; best direction: PV up, EV down). For a deviation factor
//! `beta`, the robustness radius is the largest `alpha` whose worst-case
//! re-optimized cost stays within `(1 + beta)` of the deterministic optimum;
//! the opportunity radius is the smallest `alpha` whose best-case cost
//! reaches `(1 - beta)` of it. Both come from bisection, justified by the
//! monotonicity of the re-optimized objective in the scaling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::parallel_map;
use crate::planner::{solve_plan, PlanningProblem};

/// Which series the radius applies to. `Joint` moves both radii together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertainParam {
    Pv,
    Ev,
    Joint,
}

impl std::fmt::Display for UncertainParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UncertainParam::Pv => write!(f, "pv"),
            UncertainParam::Ev => write!(f, "ev"),
            UncertainParam::Joint => write!(f, "joint"),
        }
    }
}

/// Robustness (worst case within budget) or opportunity (best case reaching
/// a windfall target).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusKind {
    Robustness,
    Opportunity,
}

impl std::fmt::Display for RadiusKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RadiusKind::Robustness => write!(f, "robustness"),
            RadiusKind::Opportunity => write!(f, "opportunity"),
        }
    }
}

/// Which kinds a sweep computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IgdtMode {
    Robustness,
    Opportunity,
    Both,
}

impl IgdtMode {
    fn kinds(self) -> Vec<RadiusKind> {
        match self {
            IgdtMode::Robustness => vec![RadiusKind::Robustness],
            IgdtMode::Opportunity => vec![RadiusKind::Opportunity],
            IgdtMode::Both => vec![RadiusKind::Robustness, RadiusKind::Opportunity],
        }
    }
}

/// Per-parameter radii (default) or one shared radius for both series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusCoupling {
    Independent,
    Joint,
}

/// The deviation factors to sweep.
#[derive(Debug, Clone)]
pub struct DeviationGrid {
    pub betas: Vec<f64>,
    pub mode: IgdtMode,
}

impl DeviationGrid {
    /// Betas must be strictly increasing in `[0, 1]` (zero is allowed and
    /// yields the all-zero anchor row).
    pub fn new(betas: Vec<f64>, mode: IgdtMode) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::data("deviation grid needs at least one beta"));
        }
        for pair in betas.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::data("betas must be strictly increasing"));
            }
        }
        if betas.iter().any(|&b| !(0.0..=1.0).contains(&b)) {
            return Err(Error::data("betas must lie in [0, 1]"));
        }
        Ok(DeviationGrid { betas, mode })
    }
}

/// Worst case degrades PV and inflates EV; best case does the opposite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleDirection {
    Worst,
    Best,
}

/// Result of one radius computation.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusResult {
    pub beta: f64,
    pub alpha_pv: f64,
    pub alpha_ev: f64,
    pub coupling: RadiusCoupling,
    /// Objective of the re-optimized scaled instance at the returned radius.
    pub achieved_cost: f64,
    /// Number of scaled solves performed.
    pub iterations: u32,
    /// The radius hit 1.0 while still satisfying the budget.
    pub saturated: bool,
    /// Even `alpha = 1` cannot reach the opportunity target.
    pub unattainable: bool,
}

impl RadiusResult {
    /// The radius of the parameter this computation targeted.
    pub fn alpha(&self, param: UncertainParam) -> f64 {
        match param {
            UncertainParam::Pv => self.alpha_pv,
            UncertainParam::Ev => self.alpha_ev,
            UncertainParam::Joint => self.alpha_pv,
        }
    }

    pub fn flags(&self) -> String {
        match (self.saturated, self.unattainable) {
            (true, _) => "saturated".into(),
            (_, true) => "unattainable".into(),
            _ => String::new(),
        }
    }
}

fn factors(
    alpha_pv: f64,
    alpha_ev: f64,
    direction: ScaleDirection,
) -> (f64, f64) {
    match direction {
        ScaleDirection::Worst => (1.0 - alpha_pv, 1.0 + alpha_ev),
        ScaleDirection::Best => (1.0 + alpha_pv, 1.0 - alpha_ev),
    }
}

/// Re-optimizes the full planning MILP with scaled series and returns its
/// objective. Decisions are free to adapt to the scaled data, matching the
/// single-level reformulations.
pub fn evaluate_scaled(
    problem: &PlanningProblem,
    alpha_pv: f64,
    alpha_ev: f64,
    direction: ScaleDirection,
) -> Result<f64> {
    for a in [alpha_pv, alpha_ev] {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::data(format!("alpha {a} outside [0, 1]")));
        }
    }
    let (pv_f, ev_f) = factors(alpha_pv, alpha_ev, direction);
    let scaled = problem.with_scaled_series(pv_f, ev_f)?;
    Ok(solve_plan(&scaled)?.objective)
}

fn apply_target(param: UncertainParam, alpha: f64) -> (f64, f64) {
    match param {
        UncertainParam::Pv => (alpha, 0.0),
        UncertainParam::Ev => (0.0, alpha),
        UncertainParam::Joint => (alpha, alpha),
    }
}

struct Bisection {
    evals: u32,
    last_ok_cost: f64,
}

impl Bisection {
    /// Evaluates the predicate `cost(alpha) <= target`, treating an
    /// infeasible scaled instance as a failure of the predicate.
    fn probe(
        &mut self,
        problem: &PlanningProblem,
        param: UncertainParam,
        direction: ScaleDirection,
        target: f64,
        alpha: f64,
    ) -> Result<bool> {
        let (a_pv, a_ev) = apply_target(param, alpha);
        self.evals += 1;
        match evaluate_scaled(problem, a_pv, a_ev, direction) {
            Ok(cost) => {
                if cost <= target {
                    self.last_ok_cost = cost;
                    Ok(true)
                } else {
                    Ok(false)
                }
            }
            Err(Error::Infeasible(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

/// Largest radius whose worst-case cost stays within `(1 + beta)` of the
/// deterministic optimum `anchor`. Bisection to `alpha_tol`, capped at
/// `max_iter` scaled solves.
pub fn robust_radius(
    problem: &PlanningProblem,
    anchor: f64,
    beta: f64,
    param: UncertainParam,
    alpha_tol: f64,
    max_iter: u32,
) -> Result<RadiusResult> {
    let target = (1.0 + beta) * anchor;
    let mut bis = Bisection {
        evals: 0,
        last_ok_cost: anchor,
    };
    // alpha = 0 reproduces the deterministic instance, which satisfies the
    // budget by construction.
    let mut lo = 0.0f64;
    let mut saturated = false;
    if bis.probe(problem, param, ScaleDirection::Worst, target, 1.0)? {
        lo = 1.0;
        saturated = true;
    } else {
        let mut hi = 1.0f64;
        while hi - lo > alpha_tol && bis.evals < max_iter {
            let mid = 0.5 * (lo + hi);
            if bis.probe(problem, param, ScaleDirection::Worst, target, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let (alpha_pv, alpha_ev) = apply_target(param, lo);
    Ok(RadiusResult {
        beta,
        alpha_pv,
        alpha_ev,
        coupling: coupling_of(param),
        achieved_cost: bis.last_ok_cost,
        iterations: bis.evals,
        saturated,
        unattainable: false,
    })
}

/// Smallest radius whose best-case cost reaches `(1 - beta)` of the
/// deterministic optimum. When even `alpha = 1` cannot reach the target the
/// result carries the `unattainable` flag.
pub fn opportunity_radius(
    problem: &PlanningProblem,
    anchor: f64,
    beta: f64,
    param: UncertainParam,
    alpha_tol: f64,
    max_iter: u32,
) -> Result<RadiusResult> {
    let target = (1.0 - beta) * anchor;
    let mut bis = Bisection {
        evals: 0,
        last_ok_cost: anchor,
    };
    let mut make = |alpha: f64, cost: f64, unattainable: bool, evals: u32| {
        let (alpha_pv, alpha_ev) = apply_target(param, alpha);
        RadiusResult {
            beta,
            alpha_pv,
            alpha_ev,
            coupling: coupling_of(param),
            achieved_cost: cost,
            iterations: evals,
            saturated: false,
            unattainable,
        }
    };
    if anchor <= target {
        // beta = 0: the deterministic optimum already meets the target.
        return Ok(make(0.0, anchor, false, 0));
    }
    // Find a satisfying upper point. The predicate is monotone where the
    // scaled instance stays feasible; surplus-driven infeasibility at large
    // alpha is handled by probing a descending ladder.
    let mut hi = f64::NAN;
    for cand in [1.0, 0.75, 0.5, 0.25] {
        if bis.probe(problem, param, ScaleDirection::Best, target, cand)? {
            hi = cand;
            break;
        }
        if bis.evals >= max_iter {
            break;
        }
    }
    if hi.is_nan() {
        return Ok(make(1.0, bis.last_ok_cost, true, bis.evals));
    }
    let mut lo = 0.0f64;
    let mut hi_cost = bis.last_ok_cost;
    while hi - lo > alpha_tol && bis.evals < max_iter {
        let mid = 0.5 * (lo + hi);
        if bis.probe(problem, param, ScaleDirection::Best, target, mid)? {
            hi = mid;
            hi_cost = bis.last_ok_cost;
        } else {
            lo = mid;
        }
    }
    Ok(make(hi, hi_cost, false, bis.evals))
}

fn coupling_of(param: UncertainParam) -> RadiusCoupling {
    match param {
        UncertainParam::Joint => RadiusCoupling::Joint,
        _ => RadiusCoupling::Independent,
    }
}

/// One row of a sweep output.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub beta: f64,
    pub param: UncertainParam,
    pub kind: RadiusKind,
    /// Radius of the targeted parameter; NaN when the computation failed.
    pub alpha: f64,
    pub achieved_cost: f64,
    pub iterations: u32,
    pub flags: String,
}

/// Radii for every beta of a grid, per parameter and kind, plus the
/// deterministic anchor.
#[derive(Debug, Clone, Serialize)]
pub struct IgdtCurve {
    pub anchor_objective: f64,
    pub alpha_tol: f64,
    pub coupling: RadiusCoupling,
    pub rows: Vec<CurveRow>,
}

pub const DEFAULT_ALPHA_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: u32 = 30;

/// Sweeps the deviation grid. Per-(beta, param, kind) failures are recorded
/// in their row's flags; the sweep continues.
pub fn sweep(
    problem: &PlanningProblem,
    grid: &DeviationGrid,
    coupling: RadiusCoupling,
    alpha_tol: f64,
    max_iter: u32,
) -> Result<IgdtCurve> {
    let anchor = solve_plan(problem)?.objective;

    let params: Vec<UncertainParam> = match coupling {
        RadiusCoupling::Independent => vec![UncertainParam::Pv, UncertainParam::Ev],
        RadiusCoupling::Joint => vec![UncertainParam::Joint],
    };
    let mut tasks: Vec<(f64, UncertainParam, RadiusKind)> = Vec::new();
    for &beta in &grid.betas {
        for &param in &params {
            for kind in grid.mode.kinds() {
                tasks.push((beta, param, kind));
            }
        }
    }

    let rows = parallel_map(tasks, |(beta, param, kind)| {
        let result = match kind {
            RadiusKind::Robustness => {
                robust_radius(problem, anchor, beta, param, alpha_tol, max_iter)
            }
            RadiusKind::Opportunity => {
                opportunity_radius(problem, anchor, beta, param, alpha_tol, max_iter)
            }
        };
        match result {
            Ok(r) => CurveRow {
                beta,
                param,
                kind,
                alpha: r.alpha(param),
                achieved_cost: r.achieved_cost,
                iterations: r.iterations,
                flags: r.flags(),
            },
            Err(e) => CurveRow {
                beta,
                param,
                kind,
                alpha: f64::NAN,
                achieved_cost: f64::NAN,
                iterations: 0,
                flags: format!("error: {e}"),
            },
        }
    });

    Ok(IgdtCurve {
        anchor_objective: anchor,
        alpha_tol,
        coupling,
        rows,
    })
}

/// Re-verifies one robustness row: the budget holds at `alpha` and fails at
/// `alpha + 2 * alpha_tol` (unless saturated). Used by the standalone
/// checker.
pub fn band_check(
    problem: &PlanningProblem,
    anchor: f64,
    beta: f64,
    param: UncertainParam,
    alpha: f64,
    alpha_tol: f64,
) -> Result<bool> {
    let target = (1.0 + beta) * anchor;
    let (a_pv, a_ev) = apply_target(param, alpha);
    let at = evaluate_scaled(problem, a_pv, a_ev, ScaleDirection::Worst)?;
    if at > target {
        return Ok(false);
    }
    let beyond = alpha + 2.0 * alpha_tol;
    if beyond >= 1.0 {
        return Ok(true); // saturated: nothing to violate below the cap
    }
    let (b_pv, b_ev) = apply_target(param, beyond);
    match evaluate_scaled(problem, b_pv, b_ev, ScaleDirection::Worst) {
        Ok(cost) => Ok(cost > target),
        Err(Error::Infeasible(_)) => Ok(true),
        Err(e) => Err(e),
    }
}
