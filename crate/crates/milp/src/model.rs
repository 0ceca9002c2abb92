//! Problem description: variables, linear constraints, and the objective.

use std::fmt;

use crate::MilpError;

/// Opaque handle to a variable of a [`Model`].
///
/// Ids are dense indices in declaration order; ordering is used for
/// deterministic tie-breaking throughout the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    /// Position of the variable in declaration order.
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Continuous or binary variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Le => write!(f, "<="),
            Relation::Eq => write!(f, "="),
            Relation::Ge => write!(f, ">="),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VarDef {
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
    pub name: String,
}

/// A single row `sum(coef * var) relation rhs`.
///
/// Terms are kept sorted by variable id with no duplicates.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub name: String,
}

/// A mixed-integer linear program in minimization form.
#[derive(Debug, Clone)]
pub struct Model {
    name: String,
    pub(crate) vars: Vec<VarDef>,
    pub(crate) constraints: Vec<LinearConstraint>,
    /// Dense objective coefficients, one per variable.
    pub(crate) objective: Vec<f64>,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Declares a variable. Binary variables must have bounds inside [0, 1];
    /// out-of-range requests are rejected rather than clamped.
    pub fn add_var(
        &mut self,
        kind: VarKind,
        lo: f64,
        hi: f64,
        name: impl Into<String>,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(MilpError::BadBounds { name, lo, hi });
        }
        if kind == VarKind::Binary && !(lo >= 0.0 && hi <= 1.0) {
            return Err(MilpError::BadBounds { name, lo, hi });
        }
        let id = VarId(self.vars.len());
        self.vars.push(VarDef { kind, lo, hi, name });
        self.objective.push(0.0);
        Ok(id)
    }

    /// Shorthand for a continuous variable.
    pub fn add_continuous(
        &mut self,
        lo: f64,
        hi: f64,
        name: impl Into<String>,
    ) -> Result<VarId, MilpError> {
        self.add_var(VarKind::Continuous, lo, hi, name)
    }

    /// Shorthand for a {0,1} variable.
    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_var(VarKind::Binary, 0.0, 1.0, name)
    }

    /// Adds a row. Rejects duplicate variables, undeclared variables and
    /// non-finite coefficients.
    pub fn add_constraint(
        &mut self,
        terms: &[(VarId, f64)],
        relation: Relation,
        rhs: f64,
        name: impl Into<String>,
    ) -> Result<(), MilpError> {
        let name = name.into();
        if !rhs.is_finite() {
            return Err(MilpError::BadCoefficient {
                constraint: name,
                detail: format!("rhs {rhs} is not finite"),
            });
        }
        let mut sorted: Vec<(VarId, f64)> = terms.to_vec();
        sorted.sort_by_key(|(v, _)| v.0);
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(MilpError::BadCoefficient {
                    constraint: name,
                    detail: format!("duplicate variable {}", pair[0].0),
                });
            }
        }
        for &(v, c) in &sorted {
            if v.0 >= self.vars.len() {
                return Err(MilpError::UnknownVariable {
                    constraint: name,
                    var: v.0,
                });
            }
            if !c.is_finite() {
                return Err(MilpError::BadCoefficient {
                    constraint: name,
                    detail: format!("coefficient {c} on {v} is not finite"),
                });
            }
        }
        self.constraints.push(LinearConstraint {
            terms: sorted,
            relation,
            rhs,
            name,
        });
        Ok(())
    }

    /// Sets the objective coefficient of `var` (minimization).
    pub fn set_obj_coeff(&mut self, var: VarId, coeff: f64) {
        self.objective[var.0] = coeff;
    }

    /// Adds to the objective coefficient of `var`.
    pub fn add_obj_coeff(&mut self, var: VarId, coeff: f64) {
        self.objective[var.0] += coeff;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len()).map(VarId)
    }

    pub fn var_kind(&self, var: VarId) -> VarKind {
        self.vars[var.0].kind
    }

    pub fn var_bounds(&self, var: VarId) -> (f64, f64) {
        (self.vars[var.0].lo, self.vars[var.0].hi)
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.vars[var.0].name
    }

    pub fn obj_coeff(&self, var: VarId) -> f64 {
        self.objective[var.0]
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn binary_vars(&self) -> Vec<VarId> {
        (0..self.vars.len())
            .filter(|&i| self.vars[i].kind == VarKind::Binary)
            .map(VarId)
            .collect()
    }

    /// Objective value of an assignment (no feasibility implied).
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(values)
            .map(|(c, x)| c * x)
            .sum()
    }

    /// Replaces the bounds of one variable, with the same validation as
    /// [`Model::add_var`].
    pub fn set_var_bounds(&mut self, var: VarId, lo: f64, hi: f64) -> Result<(), MilpError> {
        let def = &self.vars[var.0];
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(MilpError::BadBounds {
                name: def.name.clone(),
                lo,
                hi,
            });
        }
        if def.kind == VarKind::Binary && !(lo >= 0.0 && hi <= 1.0) {
            return Err(MilpError::BadBounds {
                name: def.name.clone(),
                lo,
                hi,
            });
        }
        let def = &mut self.vars[var.0];
        def.lo = lo;
        def.hi = hi;
        Ok(())
    }

    /// Tightens the bounds of one variable, e.g. for branching.
    pub(crate) fn restrict_bounds(&mut self, var: VarId, lo: f64, hi: f64) {
        let def = &mut self.vars[var.0];
        def.lo = def.lo.max(lo);
        def.hi = def.hi.min(hi);
    }
}
