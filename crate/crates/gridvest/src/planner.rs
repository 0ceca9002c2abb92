//! The investment planning problem: per-year battery capacity build-out and
//! hourly dispatch, encoded as a MILP per battery duration type.
//!
//! Model shape for every slot (y,q,d,t):
//!   - SoC recursion `S_t = S_{t-1} + eta_ch*P_ch - P_dis/eta_dis` with the
//!     day boundary closed cyclically (hour 0 is hour 24 of the same day);
//!   - SoC and rate limits against cumulative installed capacity;
//!   - big-M exclusivity between charge and discharge via one binary;
//!   - power balance `PV + utility - ch + dis - load - EV (+ curtail) = 0`;
//!   - no export: utility purchase is nonnegative.
//!
//! Objective: discounted capital cost plus discounted, day-weighted grid
//! purchases.

use gridvest_milp::{solve_milp, Model, Relation, Solution, SolveStats, SolverOptions, Status, VarId};
use serde::Serialize;

use crate::catalog::{BatteryCatalog, BatteryType, EconomicParams};
use crate::error::{Error, Result};
use crate::grid::{TimeGrid, HOURS_PER_DAY};
use crate::parallel::parallel_map;
use crate::scenario::ScenarioData;

/// A fully specified planning instance for one battery type.
#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub grid: TimeGrid,
    pub scenario: ScenarioData,
    /// PV fleet output per slot, kW.
    pub pv_profile: Vec<f64>,
    pub catalog: BatteryCatalog,
    pub econ: EconomicParams,
    pub battery_type: BatteryType,
    /// Big-M for the exclusivity pair, kW.
    pub big_m: f64,
    /// Upper bound on capacity installed in any single year, kWh.
    pub capacity_year_cap: f64,
    /// When false (the default), PV surplus beyond what the battery can
    /// absorb makes the model infeasible.
    pub allow_curtailment: bool,
    /// Forces `Cap = 0` in every year (the no-battery baseline).
    pub force_no_battery: bool,
    pub solver: SolverOptions,
}

impl PlanningProblem {
    /// Default yearly installation cap: ten times the peak combined demand,
    /// expressed as energy for this duration type.
    pub fn default_capacity_year_cap(scenario: &ScenarioData, ty: BatteryType) -> f64 {
        let peak = scenario
            .residential_load
            .iter()
            .zip(&scenario.ev_demand)
            .map(|(l, e)| l + e)
            .fold(0.0f64, f64::max);
        10.0 * peak.max(1.0) * ty.hours()
    }

    /// Tightest valid big-M: the rate limit of a fleet built to the yearly
    /// cap in every year of the horizon.
    pub fn default_big_m(capacity_year_cap: f64, years: usize, ty: BatteryType) -> f64 {
        capacity_year_cap * years as f64 / ty.hours()
    }

    pub fn new(
        grid: TimeGrid,
        scenario: ScenarioData,
        pv_profile: Vec<f64>,
        catalog: BatteryCatalog,
        econ: EconomicParams,
        battery_type: BatteryType,
    ) -> Result<Self> {
        let cap = Self::default_capacity_year_cap(&scenario, battery_type);
        let big_m = Self::default_big_m(cap, grid.years(), battery_type);
        let p = PlanningProblem {
            grid,
            scenario,
            pv_profile,
            catalog,
            econ,
            battery_type,
            big_m,
            capacity_year_cap: cap,
            allow_curtailment: false,
            force_no_battery: false,
            solver: SolverOptions::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.slot_count();
        if self.scenario.grid() != &self.grid {
            return Err(Error::data("scenario grid does not match problem grid"));
        }
        if self.pv_profile.len() != n {
            return Err(Error::data(format!(
                "pv profile has {} slots, grid needs {n}",
                self.pv_profile.len()
            )));
        }
        if self.catalog.years() < self.grid.years() {
            return Err(Error::data(format!(
                "catalog covers {} years, horizon needs {}",
                self.catalog.years(),
                self.grid.years()
            )));
        }
        if !(self.capacity_year_cap > 0.0) {
            return Err(Error::data("capacity_year_cap must be positive"));
        }
        let tightest =
            Self::default_big_m(self.capacity_year_cap, self.grid.years(), self.battery_type);
        if self.big_m < tightest * (1.0 - 1e-12) {
            return Err(Error::data(format!(
                "big_m {} does not dominate the maximum feasible rate {tightest}",
                self.big_m
            )));
        }
        Ok(())
    }

    /// The same data re-targeted at another battery type. Caps that were
    /// left at their defaults are re-derived for the new type; explicit
    /// overrides are kept (big_m is always re-tightened to stay valid).
    pub fn for_type(&self, ty: BatteryType) -> Result<Self> {
        let mut p = self.clone();
        p.battery_type = ty;
        let was_default =
            self.capacity_year_cap == Self::default_capacity_year_cap(&self.scenario, self.battery_type);
        if was_default {
            p.capacity_year_cap = Self::default_capacity_year_cap(&self.scenario, ty);
        }
        p.big_m = Self::default_big_m(p.capacity_year_cap, p.grid.years(), ty)
            .max(if was_default { 0.0 } else { self.big_m });
        p.validate()?;
        Ok(p)
    }

    /// The no-battery baseline of this instance.
    pub fn no_battery(&self) -> Self {
        let mut p = self.clone();
        p.force_no_battery = true;
        p
    }

    /// The same instance with PV and EV series multiplied by constant
    /// factors (the info-gap envelope).
    pub fn with_scaled_series(&self, pv_factor: f64, ev_factor: f64) -> Result<Self> {
        let mut p = self.clone();
        for v in &mut p.pv_profile {
            *v *= pv_factor;
        }
        let mut scenario = p.scenario.clone();
        let ev: Vec<f64> = scenario.ev_demand.iter().map(|v| v * ev_factor).collect();
        scenario.ev_demand = ev;
        p.scenario = scenario;
        p.validate()?;
        Ok(p)
    }

    fn weight(&self, quarter: usize) -> f64 {
        self.grid.day_weight(quarter)
    }
}

/// Variable handles for one built model, in slot order.
struct VarMap {
    p_ch: Vec<VarId>,
    p_dis: Vec<VarId>,
    soc: Vec<VarId>,
    p_util: Vec<VarId>,
    indicator: Vec<VarId>,
    curtail: Option<Vec<VarId>>,
    cap: Vec<VarId>,
    cap_max: Vec<VarId>,
}

/// Builds the MILP for `problem`. Fails only on shape mismatches; an
/// over-constrained instance shows up as an infeasible solve instead.
pub fn build_model(problem: &PlanningProblem) -> Result<Model> {
    build_model_internal(problem).map(|(m, _)| m)
}

fn build_model_internal(problem: &PlanningProblem) -> Result<(Model, VarMap)> {
    problem.validate()?;
    let grid = &problem.grid;
    let years = grid.years();
    let n = grid.slot_count();
    let hours = problem.battery_type.hours();
    let eta_ch = problem.catalog.charge_eff;
    let eta_dis = problem.catalog.discharge_eff;
    let battery_ub = if problem.force_no_battery { 0.0 } else { f64::INFINITY };
    let cap_ub = if problem.force_no_battery {
        0.0
    } else {
        problem.capacity_year_cap
    };

    let mut model = Model::new(format!("plan_{}", problem.battery_type));

    let mut cap = Vec::with_capacity(years);
    let mut cap_max = Vec::with_capacity(years);
    for y in 1..=years {
        cap.push(model.add_continuous(0.0, cap_ub, format!("cap_y{y}"))?);
        cap_max.push(model.add_continuous(0.0, f64::INFINITY, format!("capmax_y{y}"))?);
    }

    let mut vm = VarMap {
        p_ch: Vec::with_capacity(n),
        p_dis: Vec::with_capacity(n),
        soc: Vec::with_capacity(n),
        p_util: Vec::with_capacity(n),
        indicator: Vec::with_capacity(n),
        curtail: problem.allow_curtailment.then(|| Vec::with_capacity(n)),
        cap,
        cap_max,
    };

    for slot in grid.slots() {
        let tag = format!("y{}q{}d{}t{}", slot.year, slot.quarter, slot.day, slot.hour);
        vm.p_ch
            .push(model.add_continuous(0.0, battery_ub, format!("ch_{tag}"))?);
        vm.p_dis
            .push(model.add_continuous(0.0, battery_ub, format!("dis_{tag}"))?);
        vm.soc
            .push(model.add_continuous(0.0, battery_ub, format!("soc_{tag}"))?);
        vm.p_util
            .push(model.add_continuous(0.0, f64::INFINITY, format!("util_{tag}"))?);
        let b = if problem.force_no_battery {
            let v = model.add_var(gridvest_milp::VarKind::Binary, 0.0, 0.0, format!("b_{tag}"))?;
            v
        } else {
            model.add_binary(format!("b_{tag}"))?
        };
        vm.indicator.push(b);
        if let Some(curtail) = &mut vm.curtail {
            curtail.push(model.add_continuous(0.0, f64::INFINITY, format!("cur_{tag}"))?);
        }
    }

    // Cumulative capacity: capmax_y = capmax_{y-1} + cap_y.
    for y in 0..years {
        let mut terms = vec![(vm.cap_max[y], 1.0), (vm.cap[y], -1.0)];
        if y > 0 {
            terms.push((vm.cap_max[y - 1], -1.0));
        }
        model.add_constraint(&terms, Relation::Eq, 0.0, format!("cum_y{}", y + 1))?;
    }

    for slot in grid.slots() {
        let i = slot.index;
        let y = slot.year;
        let tag = format!("y{}q{}d{}t{}", y, slot.quarter, slot.day, slot.hour);
        let ych = vm.cap_max[y - 1];

        // SoC recursion, cyclic within the day: hour 1 links back to hour 24.
        let prev_hour = if slot.hour == 1 { HOURS_PER_DAY } else { slot.hour - 1 };
        let prev = grid
            .slot_index(y, slot.quarter, slot.day, prev_hour)
            .expect("previous hour is inside the grid");
        model.add_constraint(
            &[
                (vm.soc[i], 1.0),
                (vm.soc[prev], -1.0),
                (vm.p_ch[i], -eta_ch),
                (vm.p_dis[i], 1.0 / eta_dis),
            ],
            Relation::Eq,
            0.0,
            format!("soc_{tag}"),
        )?;

        // SoC within installed capacity.
        model.add_constraint(
            &[(vm.soc[i], 1.0), (ych, -1.0)],
            Relation::Le,
            0.0,
            format!("scap_{tag}"),
        )?;

        // Exclusivity big-M pair.
        model.add_constraint(
            &[(vm.p_ch[i], 1.0), (vm.indicator[i], -problem.big_m)],
            Relation::Le,
            0.0,
            format!("mch_{tag}"),
        )?;
        model.add_constraint(
            &[(vm.p_dis[i], 1.0), (vm.indicator[i], problem.big_m)],
            Relation::Le,
            problem.big_m,
            format!("mdis_{tag}"),
        )?;

        // Duration-type rate limits.
        model.add_constraint(
            &[(vm.p_ch[i], 1.0), (ych, -1.0 / hours)],
            Relation::Le,
            0.0,
            format!("rch_{tag}"),
        )?;
        model.add_constraint(
            &[(vm.p_dis[i], 1.0), (ych, -1.0 / hours)],
            Relation::Le,
            0.0,
            format!("rdis_{tag}"),
        )?;

        // Power balance with no export (P_util >= 0 via its bound).
        let rhs = problem.scenario.residential_load[i] + problem.scenario.ev_demand[i]
            - problem.pv_profile[i];
        let mut terms = vec![
            (vm.p_util[i], 1.0),
            (vm.p_ch[i], -1.0),
            (vm.p_dis[i], 1.0),
        ];
        if let Some(curtail) = &vm.curtail {
            terms.push((curtail[i], -1.0));
        }
        model.add_constraint(&terms, Relation::Eq, rhs, format!("bal_{tag}"))?;
    }

    // Objective: discounted capex plus discounted day-weighted opex.
    for y in 1..=years {
        let gamma = problem.econ.discount_factor(y);
        let price_per_kwh = problem.catalog.cost(y, problem.battery_type);
        model.set_obj_coeff(vm.cap[y - 1], gamma * price_per_kwh);
    }
    for slot in grid.slots() {
        let gamma = problem.econ.discount_factor(slot.year);
        let w = problem.weight(slot.quarter);
        let price = problem.scenario.utility_price[slot.index];
        model.set_obj_coeff(vm.p_util[slot.index], gamma * w * price);
    }

    Ok((model, vm))
}

/// Per-slot dispatch of a solved plan, kW (SoC in kWh).
#[derive(Debug, Clone, Serialize)]
pub struct Dispatch {
    pub p_ch: Vec<f64>,
    pub p_dis: Vec<f64>,
    pub soc: Vec<f64>,
    pub p_utility: Vec<f64>,
    /// Zero everywhere when curtailment is disabled.
    pub curtail: Vec<f64>,
}

/// A solved investment plan with its audited cost split.
#[derive(Debug, Clone, Serialize)]
pub struct PlanSolution {
    pub battery_type: BatteryType,
    /// kWh installed per year.
    pub cap_per_year: Vec<f64>,
    /// Running sum of installations.
    pub cap_cumulative: Vec<f64>,
    pub dispatch: Dispatch,
    /// Discounted $ per year.
    pub capex_by_year: Vec<f64>,
    pub opex_by_year: Vec<f64>,
    /// Undiscounted $ per year.
    pub capex_by_year_nominal: Vec<f64>,
    pub opex_by_year_nominal: Vec<f64>,
    pub capex: f64,
    pub opex: f64,
    /// Solver objective; equals `capex + opex` within audit tolerance.
    pub objective: f64,
    pub mip_gap: f64,
    #[serde(skip)]
    pub solver_stats: SolveStats,
}

/// Independent dispatch audit: every quantity is recomputed from the
/// solution values and the raw problem data, not from solver residuals.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DispatchAudit {
    pub max_balance_residual: f64,
    pub min_utility: f64,
    /// Slots where both charge and discharge exceed `int_tol * big_m`.
    pub simultaneous_slots: usize,
    /// Worst SoC bound violation (above cumulative capacity or below zero).
    pub max_soc_violation: f64,
    pub max_rate_violation: f64,
    /// Worst daily deviation of `sum(eta_ch*ch - dis/eta_dis)` from zero.
    pub max_daily_cycle_imbalance: f64,
    /// Relative error between the solver objective and recomputed
    /// capex + opex.
    pub objective_rel_err: f64,
}

impl DispatchAudit {
    /// Power-scale feasibility threshold used by `is_ok`.
    pub fn is_ok(&self, feas_tol: f64, power_scale: f64) -> bool {
        let tol = feas_tol * power_scale.max(1.0);
        self.max_balance_residual <= tol
            && self.min_utility >= -tol
            && self.simultaneous_slots == 0
            && self.max_soc_violation <= tol
            && self.max_rate_violation <= tol
            && self.max_daily_cycle_imbalance <= HOURS_PER_DAY as f64 * tol
            && self.objective_rel_err <= 1e-6
    }
}

/// Recomputes all dispatch invariants of `plan` against `problem`.
pub fn verify_dispatch(problem: &PlanningProblem, plan: &PlanSolution) -> DispatchAudit {
    let grid = &problem.grid;
    let d = &plan.dispatch;
    let eta_ch = problem.catalog.charge_eff;
    let eta_dis = problem.catalog.discharge_eff;
    let rate_div = problem.battery_type.hours();
    let exc_tol = problem.solver.int_tol * problem.big_m;

    let mut max_balance = 0.0f64;
    let mut min_utility = f64::INFINITY;
    let mut simultaneous = 0usize;
    let mut max_soc = 0.0f64;
    let mut max_rate = 0.0f64;
    for slot in grid.slots() {
        let i = slot.index;
        let residual = problem.pv_profile[i] + d.p_utility[i] - d.p_ch[i] + d.p_dis[i]
            - problem.scenario.residential_load[i]
            - problem.scenario.ev_demand[i]
            - d.curtail[i];
        max_balance = max_balance.max(residual.abs());
        min_utility = min_utility.min(d.p_utility[i]);
        if d.p_ch[i] > exc_tol && d.p_dis[i] > exc_tol {
            simultaneous += 1;
        }
        let cum = plan.cap_cumulative[slot.year - 1];
        max_soc = max_soc.max(d.soc[i] - cum).max(-d.soc[i]);
        let rate_cap = cum / rate_div;
        max_rate = max_rate
            .max(d.p_ch[i] - rate_cap)
            .max(d.p_dis[i] - rate_cap)
            .max(-d.p_ch[i])
            .max(-d.p_dis[i]);
    }

    // Daily cyclic energy balance.
    let mut max_cycle = 0.0f64;
    for year in 1..=grid.years() {
        for quarter in 1..=4 {
            for day in 1..=grid.days_in_quarter(quarter) {
                let mut net = 0.0;
                for hour in 1..=HOURS_PER_DAY {
                    let i = grid.slot_index(year, quarter, day, hour).unwrap();
                    net += eta_ch * d.p_ch[i] - d.p_dis[i] / eta_dis;
                }
                max_cycle = max_cycle.max(net.abs());
            }
        }
    }

    // Objective audit from raw data.
    let mut capex = 0.0;
    let mut opex = 0.0;
    for y in 1..=grid.years() {
        let gamma = problem.econ.discount_factor(y);
        capex += gamma * problem.catalog.cost(y, problem.battery_type) * plan.cap_per_year[y - 1];
    }
    for slot in grid.slots() {
        let gamma = problem.econ.discount_factor(slot.year);
        opex += gamma
            * problem.weight(slot.quarter)
            * problem.scenario.utility_price[slot.index]
            * d.p_utility[slot.index];
    }
    let recomputed = capex + opex;
    let objective_rel_err = (recomputed - plan.objective).abs() / 1.0f64.max(plan.objective.abs());

    DispatchAudit {
        max_balance_residual: max_balance,
        min_utility,
        simultaneous_slots: simultaneous,
        max_soc_violation: max_soc,
        max_rate_violation: max_rate,
        max_daily_cycle_imbalance: max_cycle,
        objective_rel_err,
    }
}

/// Peak power magnitude of the instance; dispatch tolerances scale with it.
pub fn power_scale(problem: &PlanningProblem) -> f64 {
    problem
        .scenario
        .residential_load
        .iter()
        .zip(&problem.scenario.ev_demand)
        .zip(&problem.pv_profile)
        .map(|((l, e), p)| l + e + p)
        .fold(1.0f64, f64::max)
}

fn first_surplus_slot(problem: &PlanningProblem) -> Option<(crate::grid::Slot, f64)> {
    for slot in problem.grid.slots() {
        let i = slot.index;
        let surplus = problem.pv_profile[i]
            - problem.scenario.residential_load[i]
            - problem.scenario.ev_demand[i];
        if surplus > 0.0 {
            return Some((slot, surplus));
        }
    }
    None
}

/// Builds and solves the plan, extracts the dispatch and audits it.
pub fn solve_plan(problem: &PlanningProblem) -> Result<PlanSolution> {
    let (model, vm) = build_model_internal(problem)?;
    let solution = solve_milp(&model, &problem.solver)?;
    match solution.status {
        Status::Optimal => {}
        Status::Infeasible => {
            let mut msg = format!(
                "no feasible dispatch for battery type {}",
                problem.battery_type
            );
            if !problem.allow_curtailment {
                if let Some((slot, surplus)) = first_surplus_slot(problem) {
                    msg = format!(
                        "{msg}; first PV surplus of {surplus:.3} kW at slot {slot} \
                         cannot be exported (curtailment is disabled)"
                    );
                }
            }
            return Err(Error::Infeasible(msg));
        }
        Status::Unbounded => {
            return Err(Error::Audit(
                "planner objective is bounded below by zero; unbounded status is a solver defect"
                    .into(),
            ))
        }
        Status::GapLimit => {
            return Err(Error::GapLimit {
                gap: solution.mip_gap,
                detail: format!(
                    "battery type {} stopped after {} nodes",
                    problem.battery_type, solution.stats.nodes_explored
                ),
            })
        }
    }
    extract_plan(problem, &solution, &vm)
}

fn extract_plan(
    problem: &PlanningProblem,
    solution: &Solution,
    vm: &VarMap,
) -> Result<PlanSolution> {
    let grid = &problem.grid;
    let years = grid.years();
    let n = grid.slot_count();

    let cap_per_year: Vec<f64> = vm.cap.iter().map(|&v| solution.value(v)).collect();
    let mut cap_cumulative = Vec::with_capacity(years);
    let mut running = 0.0;
    for &c in &cap_per_year {
        running += c;
        cap_cumulative.push(running);
    }

    let collect = |vars: &Vec<VarId>| -> Vec<f64> { vars.iter().map(|&v| solution.value(v)).collect() };
    let dispatch = Dispatch {
        p_ch: collect(&vm.p_ch),
        p_dis: collect(&vm.p_dis),
        soc: collect(&vm.soc),
        p_utility: collect(&vm.p_util),
        curtail: vm
            .curtail
            .as_ref()
            .map(collect)
            .unwrap_or_else(|| vec![0.0; n]),
    };

    let mut capex_by_year = vec![0.0; years];
    let mut capex_by_year_nominal = vec![0.0; years];
    let mut opex_by_year = vec![0.0; years];
    let mut opex_by_year_nominal = vec![0.0; years];
    for y in 1..=years {
        let gamma = problem.econ.discount_factor(y);
        let cost = problem.catalog.cost(y, problem.battery_type);
        capex_by_year_nominal[y - 1] = cost * cap_per_year[y - 1];
        capex_by_year[y - 1] = gamma * capex_by_year_nominal[y - 1];
    }
    for slot in grid.slots() {
        let spend = problem.weight(slot.quarter)
            * problem.scenario.utility_price[slot.index]
            * dispatch.p_utility[slot.index];
        opex_by_year_nominal[slot.year - 1] += spend;
        opex_by_year[slot.year - 1] += problem.econ.discount_factor(slot.year) * spend;
    }
    let capex: f64 = capex_by_year.iter().sum();
    let opex: f64 = opex_by_year.iter().sum();

    let plan = PlanSolution {
        battery_type: problem.battery_type,
        cap_per_year,
        cap_cumulative,
        dispatch,
        capex_by_year,
        opex_by_year,
        capex_by_year_nominal,
        opex_by_year_nominal,
        capex,
        opex,
        objective: solution.objective,
        mip_gap: solution.mip_gap,
        solver_stats: solution.stats,
    };

    let audit = verify_dispatch(problem, &plan);
    if !audit.is_ok(problem.solver.feas_tol, power_scale(problem)) {
        return Err(Error::Audit(format!(
            "dispatch audit out of tolerance: {audit:?}"
        )));
    }
    Ok(plan)
}

/// Outcome of running every battery type plus the no-battery baseline.
#[derive(Debug)]
pub struct TypeComparison {
    pub baseline: PlanSolution,
    /// Per-type results sorted by objective (failures last, in type order).
    pub results: Vec<(BatteryType, Result<PlanSolution>)>,
    pub winner: Option<BatteryType>,
}

/// Solves `types` independently (in parallel up to `GRIDVEST_THREADS`) and
/// ranks them by objective. Per-type failures are reported per type without
/// aborting the rest.
pub fn compare_types(base: &PlanningProblem, types: &[BatteryType]) -> Result<TypeComparison> {
    let baseline = solve_plan(&base.no_battery())?;

    let jobs: Vec<BatteryType> = types.to_vec();
    let mut results: Vec<(BatteryType, Result<PlanSolution>)> = parallel_map(jobs, |ty| {
        let r = base.for_type(ty).and_then(|p| solve_plan(&p));
        (ty, r)
    });

    results.sort_by(|a, b| {
        let ka = a.1.as_ref().map(|p| p.objective).unwrap_or(f64::INFINITY);
        let kb = b.1.as_ref().map(|p| p.objective).unwrap_or(f64::INFINITY);
        ka.partial_cmp(&kb)
            .unwrap()
            .then(a.0.hours().partial_cmp(&b.0.hours()).unwrap())
    });
    let winner = results
        .iter()
        .find(|(_, r)| r.is_ok())
        .map(|(ty, _)| *ty);

    Ok(TypeComparison {
        baseline,
        results,
        winner,
    })
}
