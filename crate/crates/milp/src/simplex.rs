//! Bounded-variable two-phase revised simplex.
//!
//! Standard form: `A x + s = b` with one slack per row and lower/upper
//! bounds on every column. Phase 1 adds artificial singleton columns for
//! rows whose slack cannot absorb the initial residual and minimizes their
//! sum. Dantzig pricing with a permanent switch to Bland's rule after a
//! degenerate stall guarantees termination.

use log::{debug, trace};

use crate::factor::{ColMatrixBuilder, Factorization};
use crate::model::{Model, Relation, VarKind};
use crate::scale::Scaling;
use crate::solution::{SolverOptions, Status};
use crate::MilpError;

const INF: f64 = f64::INFINITY;
/// Pivot magnitude below which a ratio-test candidate is skipped.
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic,
    AtLo,
    AtHi,
    /// Nonbasic free variable resting at zero.
    FreeZero,
}

pub(crate) struct SimplexResult {
    pub status: Status,
    /// Structural variable values in model order (unscaled). Empty unless
    /// `status == Optimal`.
    pub values: Vec<f64>,
    /// Objective recomputed from the original model coefficients.
    pub objective: f64,
    pub iterations: u64,
    pub refactorizations: u64,
}

struct Simplex {
    m: usize,
    n_struct: usize,
    ncols: usize,
    matrix: crate::factor::ColMatrix,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Phase-2 (scaled model) costs; artificials carry zero.
    cost: Vec<f64>,
    /// Phase-1 costs: one per artificial column.
    p1_cost: Vec<f64>,
    b: Vec<f64>,
    col_scale: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    factor: Factorization,
    // Scratch buffers.
    y: Vec<f64>,
    w: Vec<f64>,
    cb: Vec<f64>,
    iterations: u64,
    refactorizations: u64,
    bland: bool,
    stall: u32,
    stall_limit: u32,
    refactor_interval: u32,
    max_iterations: u64,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

enum RatioOutcome {
    Flip(f64),
    Pivot { theta: f64, slot: usize, at_hi: bool },
    Unbounded,
}

impl Simplex {
    fn build(model: &Model, opts: &SolverOptions, scale: bool) -> Result<Self, MilpError> {
        let m = model.num_constraints();
        let n = model.num_vars();

        let scaling = if scale {
            let fixed: Vec<bool> = model
                .var_ids()
                .map(|v| model.var_kind(v) == VarKind::Binary)
                .collect();
            let entries = |f: &mut dyn FnMut(usize, usize, f64)| {
                for (i, con) in model.constraints().iter().enumerate() {
                    for &(v, c) in &con.terms {
                        f(i, v.index(), c);
                    }
                }
            };
            Scaling::geometric_mean(m, n, entries, &fixed)
        } else {
            Scaling::identity(m, n)
        };

        let ncols = n + m; // artificials appended later
        let mut builder = ColMatrixBuilder::new(m);

        // Structural columns, scaled.
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, con) in model.constraints().iter().enumerate() {
            for &(v, c) in &con.terms {
                by_col[v.index()].push((i, c * scaling.row[i] * scaling.col[v.index()]));
            }
        }
        for col in &by_col {
            builder.push_col(col);
        }
        // Slack columns.
        for i in 0..m {
            builder.push_col(&[(i, 1.0)]);
        }
        let matrix = builder.finish();

        let mut lo = Vec::with_capacity(ncols);
        let mut hi = Vec::with_capacity(ncols);
        let mut cost = Vec::with_capacity(ncols);
        for v in model.var_ids() {
            let (l, h) = model.var_bounds(v);
            let cs = scaling.col[v.index()];
            lo.push(l / cs);
            hi.push(h / cs);
            cost.push(model.obj_coeff(v) * cs);
        }
        for con in model.constraints() {
            let (l, h) = match con.relation {
                Relation::Le => (0.0, INF),
                Relation::Eq => (0.0, 0.0),
                Relation::Ge => (-INF, 0.0),
            };
            lo.push(l);
            hi.push(h);
            cost.push(0.0);
        }
        let b: Vec<f64> = model
            .constraints()
            .iter()
            .enumerate()
            .map(|(i, con)| con.rhs * scaling.row[i])
            .collect();

        Ok(Simplex {
            m,
            n_struct: n,
            ncols,
            matrix,
            lo,
            hi,
            cost,
            p1_cost: Vec::new(),
            b,
            col_scale: scaling.col,
            basis: Vec::new(),
            state: Vec::new(),
            x: Vec::new(),
            factor: Factorization::trivial(),
            y: vec![0.0; m],
            w: vec![0.0; m],
            cb: vec![0.0; m],
            iterations: 0,
            refactorizations: 0,
            bland: false,
            stall: 0,
            stall_limit: (2 * m as u32).max(2000),
            refactor_interval: opts.refactor_interval,
            max_iterations: opts.max_iterations,
        })
    }

    /// Initial point: every column rests at a finite bound (or zero when
    /// free); rows whose slack cannot hold the residual get an artificial.
    fn install_start(&mut self) {
        let n = self.n_struct;
        let m = self.m;
        self.state = vec![VarState::AtLo; self.ncols];
        self.x = vec![0.0; self.ncols];
        for j in 0..self.ncols {
            let (l, h) = (self.lo[j], self.hi[j]);
            let (st, v) = if l.is_finite() {
                (VarState::AtLo, l)
            } else if h.is_finite() {
                (VarState::AtHi, h)
            } else {
                (VarState::FreeZero, 0.0)
            };
            self.state[j] = st;
            self.x[j] = v;
        }

        // Structural activity per row.
        let mut act = vec![0.0f64; m];
        for j in 0..n {
            if self.x[j] != 0.0 {
                let (rows, vals) = self.matrix.col(j);
                for (&r, &v) in rows.iter().zip(vals) {
                    act[r] += v * self.x[j];
                }
            }
        }

        self.basis = Vec::with_capacity(m);
        let mut art_cols: Vec<(usize, f64)> = Vec::new(); // (row, sign)
        for i in 0..m {
            let slack = n + i;
            let resid = self.b[i] - act[i];
            if resid >= self.lo[slack] && resid <= self.hi[slack] {
                self.basis.push(slack);
                self.state[slack] = VarState::Basic;
                self.x[slack] = resid;
            } else {
                let pinned = resid.clamp(self.lo[slack], self.hi[slack]);
                self.x[slack] = pinned;
                self.state[slack] = if pinned == self.lo[slack] {
                    VarState::AtLo
                } else {
                    VarState::AtHi
                };
                let gap = resid - pinned;
                art_cols.push((i, gap.signum()));
                self.basis.push(self.ncols + art_cols.len() - 1);
            }
        }

        if !art_cols.is_empty() {
            // Rebuild the matrix with artificial singleton columns appended.
            let mut builder = ColMatrixBuilder::new(m);
            for j in 0..self.ncols {
                let (rows, vals) = self.matrix.col(j);
                let entries: Vec<(usize, f64)> =
                    rows.iter().copied().zip(vals.iter().copied()).collect();
                builder.push_col(&entries);
            }
            for &(row, sign) in &art_cols {
                builder.push_col(&[(row, sign)]);
            }
            self.matrix = builder.finish();
            for &(row, sign) in &art_cols {
                let slack = n + row;
                let resid = self.b[row] - act[row];
                let gap = resid - self.x[slack];
                self.lo.push(0.0);
                self.hi.push(INF);
                self.cost.push(0.0);
                self.p1_cost.push(1.0);
                self.state.push(VarState::Basic);
                self.x.push(gap * sign); // == |gap|
                self.ncols += 1;
            }
        }
        debug_assert_eq!(self.ncols, self.matrix.ncols());
    }

    fn n_art(&self) -> usize {
        self.p1_cost.len()
    }

    fn col_cost(&self, j: usize, phase1: bool) -> f64 {
        if phase1 {
            if j >= self.n_struct + self.m {
                1.0
            } else {
                0.0
            }
        } else {
            self.cost[j]
        }
    }

    fn refactorize(&mut self) -> Result<(), MilpError> {
        self.factor = Factorization::new(&self.matrix, &self.basis).map_err(|_| {
            MilpError::Numerical {
                detail: "singular basis during refactorization".into(),
            }
        })?;
        self.refactorizations += 1;
        // Recompute basic values from scratch to shed accumulated drift.
        let mut rhs = self.b.clone();
        for j in 0..self.ncols {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let (rows, vals) = self.matrix.col(j);
                for (&r, &v) in rows.iter().zip(vals) {
                    rhs[r] -= v * self.x[j];
                }
            }
        }
        let mut xb = std::mem::take(&mut self.w);
        self.factor.ftran_dense(&rhs, &mut xb);
        for slot in 0..self.m {
            self.x[self.basis[slot]] = xb[slot];
        }
        self.w = xb;
        Ok(())
    }

    /// One phase of the simplex; returns when no eligible entering column.
    fn optimize(&mut self, phase1: bool) -> Result<PhaseEnd, MilpError> {
        let dual_tol = {
            let cmax = (0..self.ncols)
                .map(|j| self.col_cost(j, phase1).abs())
                .fold(0.0f64, f64::max);
            1e-9 * (1.0 + cmax)
        };
        loop {
            if self.iterations >= self.max_iterations {
                return Err(MilpError::Numerical {
                    detail: format!("simplex iteration limit {} hit", self.max_iterations),
                });
            }
            if self.factor.num_etas() >= self.refactor_interval as usize {
                self.refactorize()?;
            }

            // Duals for the current basis.
            for slot in 0..self.m {
                self.cb[slot] = self.col_cost(self.basis[slot], phase1);
            }
            self.factor.btran(&self.cb, &mut self.y);

            let Some((q, dir, _dq)) = self.price(phase1, dual_tol) else {
                return Ok(PhaseEnd::Optimal);
            };

            let (rows, vals) = self.matrix.col(q);
            self.factor.ftran(rows, vals, &mut self.w);

            match self.ratio_test(q, dir) {
                RatioOutcome::Unbounded => return Ok(PhaseEnd::Unbounded),
                RatioOutcome::Flip(theta) => {
                    let delta = dir * theta;
                    for slot in 0..self.m {
                        if self.w[slot] != 0.0 {
                            self.x[self.basis[slot]] -= self.w[slot] * delta;
                        }
                    }
                    self.x[q] += delta;
                    self.state[q] = if dir > 0.0 {
                        VarState::AtHi
                    } else {
                        VarState::AtLo
                    };
                    // Snap to the exact bound.
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                    self.bump_stall(theta);
                }
                RatioOutcome::Pivot { theta, slot, at_hi } => {
                    let delta = dir * theta;
                    for s in 0..self.m {
                        if self.w[s] != 0.0 {
                            self.x[self.basis[s]] -= self.w[s] * delta;
                        }
                    }
                    self.x[q] += delta;
                    let leaving = self.basis[slot];
                    self.state[leaving] = if at_hi { VarState::AtHi } else { VarState::AtLo };
                    self.x[leaving] = if at_hi { self.hi[leaving] } else { self.lo[leaving] };
                    self.factor.push_eta(slot, &self.w).map_err(|_| {
                        MilpError::Numerical {
                            detail: "degenerate pivot element in eta update".into(),
                        }
                    })?;
                    self.basis[slot] = q;
                    self.state[q] = VarState::Basic;
                    self.bump_stall(theta);
                }
            }
            self.iterations += 1;
        }
    }

    fn bump_stall(&mut self, theta: f64) {
        if theta <= 1e-12 {
            self.stall += 1;
            if self.stall >= self.stall_limit && !self.bland {
                debug!("simplex stalled for {} iterations, switching to Bland's rule", self.stall);
                self.bland = true;
            }
        } else {
            self.stall = 0;
        }
    }

    /// Returns the entering column, its direction and reduced cost.
    fn price(&self, phase1: bool, dual_tol: f64) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            let st = self.state[j];
            if st == VarState::Basic || self.lo[j] >= self.hi[j] {
                continue; // fixed columns (incl. pinned artificials) never enter
            }
            let cj = self.col_cost(j, phase1);
            let (rows, vals) = self.matrix.col(j);
            let mut d = cj;
            for (&r, &v) in rows.iter().zip(vals) {
                d -= self.y[r] * v;
            }
            let dir = match st {
                VarState::AtLo if d < -dual_tol => 1.0,
                VarState::AtHi if d > dual_tol => -1.0,
                VarState::FreeZero if d.abs() > dual_tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir, d));
            }
            match best {
                Some((_, _, bd)) if d.abs() <= bd.abs() => {}
                _ => best = Some((j, dir, d)),
            }
        }
        best
    }

    /// Bounded ratio test for entering column `q` moving in `dir`.
    fn ratio_test(&self, q: usize, dir: f64) -> RatioOutcome {
        let flip_theta = self.hi[q] - self.lo[q]; // INF when unbounded range
        let mut theta = INF;
        let mut candidate: Option<(usize, bool, f64)> = None; // slot, at_hi, |pivot|
        for slot in 0..self.m {
            let g = dir * self.w[slot];
            if g.abs() <= PIVOT_TOL {
                continue;
            }
            let bv = self.basis[slot];
            let v = self.x[bv];
            let (t, at_hi) = if g > 0.0 {
                if self.lo[bv] == -INF {
                    continue;
                }
                ((v - self.lo[bv]) / g, false)
            } else {
                if self.hi[bv] == INF {
                    continue;
                }
                ((v - self.hi[bv]) / g, true)
            };
            let t = t.max(0.0);
            let better = match candidate {
                None => t < theta,
                Some((cslot, _, cmag)) => {
                    t < theta - 1e-10
                        || (t < theta + 1e-10
                            && (g.abs() > cmag + 1e-12
                                || (g.abs() > cmag - 1e-12 && self.basis[slot] < self.basis[cslot])))
                }
            };
            if better {
                theta = t.min(theta);
                candidate = Some((slot, at_hi, g.abs()));
            }
        }
        match candidate {
            None if flip_theta.is_infinite() => RatioOutcome::Unbounded,
            None => RatioOutcome::Flip(flip_theta),
            Some((slot, at_hi, _)) => {
                if flip_theta <= theta {
                    RatioOutcome::Flip(flip_theta)
                } else {
                    RatioOutcome::Pivot { theta, slot, at_hi }
                }
            }
        }
    }

    fn phase1_objective(&self) -> f64 {
        (0..self.n_art())
            .map(|k| self.x[self.n_struct + self.m + k])
            .sum()
    }

    fn run(&mut self, model: &Model) -> Result<SimplexResult, MilpError> {
        self.install_start();
        self.refactorize()?;

        if self.n_art() > 0 {
            match self.optimize(true)? {
                PhaseEnd::Unbounded => {
                    return Err(MilpError::Numerical {
                        detail: "phase-1 objective unbounded".into(),
                    });
                }
                PhaseEnd::Optimal => {}
            }
            let p1 = self.phase1_objective();
            let p1_tol = {
                let bmax = self.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                1e-7 * 10.0 * (1.0 + bmax)
            };
            trace!("phase-1 objective {p1} (tol {p1_tol})");
            if p1 > p1_tol {
                return Ok(SimplexResult {
                    status: Status::Infeasible,
                    values: Vec::new(),
                    objective: INF,
                    iterations: self.iterations,
                    refactorizations: self.refactorizations,
                });
            }
            // Pin artificials at zero for phase 2.
            for k in 0..self.n_art() {
                let j = self.n_struct + self.m + k;
                self.hi[j] = 0.0;
                if self.state[j] != VarState::Basic {
                    self.x[j] = 0.0;
                }
            }
        }

        match self.optimize(false)? {
            PhaseEnd::Unbounded => Ok(SimplexResult {
                status: Status::Unbounded,
                values: Vec::new(),
                objective: -INF,
                iterations: self.iterations,
                refactorizations: self.refactorizations,
            }),
            PhaseEnd::Optimal => {
                // Unscale: column scales are powers of two so this is exact
                // for values resting at bounds.
                let values: Vec<f64> = (0..self.n_struct)
                    .map(|j| self.x[j] * self.col_scale[j])
                    .collect();
                let objective = model.objective_value(&values);
                Ok(SimplexResult {
                    status: Status::Optimal,
                    values,
                    objective,
                    iterations: self.iterations,
                    refactorizations: self.refactorizations,
                })
            }
        }
    }
}

/// Solves the LP relaxation of `model` (binaries treated as continuous in
/// their bounds). Retries once with Bland's rule and tighter refactorization
/// on numerical failure.
pub(crate) fn solve_relaxation(
    model: &Model,
    opts: &SolverOptions,
) -> Result<SimplexResult, MilpError> {
    let attempt = |bland: bool, refactor_div: u32| -> Result<SimplexResult, MilpError> {
        let mut s = Simplex::build(model, opts, opts.scale)?;
        s.bland = bland;
        s.refactor_interval = (opts.refactor_interval / refactor_div).max(8);
        let result = s.run(model)?;
        if result.status == Status::Optimal {
            let violations =
                crate::checker::check_assignment(model, &result.values, opts.feas_tol, 1.0);
            if !violations.is_empty() {
                return Err(MilpError::Numerical {
                    detail: format!(
                        "optimal basis failed independent verification: {}",
                        violations[0]
                    ),
                });
            }
        }
        Ok(result)
    };
    match attempt(false, 1) {
        Ok(r) => Ok(r),
        Err(first) => {
            debug!("simplex restart after: {first}");
            attempt(true, 4).map_err(|second| MilpError::Numerical {
                detail: format!("solve failed after restart: {first}; then: {second}"),
            })
        }
    }
}
