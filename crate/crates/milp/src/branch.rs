//! Binary branch-and-bound on top of the simplex.
//!
//! Node selection follows a depth-first dive until the first incumbent, then
//! best-bound. Branching picks the most fractional binary with the lowest
//! variable id breaking ties. A rounding repair heuristic runs at every node;
//! for models whose binaries carry no objective cost (big-M exclusivity
//! indicators) it usually closes the gap at the root.

use std::time::Instant;

use log::{debug, trace};

use crate::checker;
use crate::model::{Model, VarId, VarKind};
use crate::simplex::solve_relaxation;
use crate::solution::{Solution, SolveStats, SolverOptions, Status};
use crate::MilpError;

struct Node {
    id: u64,
    bound: f64,
    /// Branching decisions on the path to this node: `(var index, value)`.
    fixes: Vec<(usize, bool)>,
}

pub(crate) fn branch_and_bound(model: &Model, opts: &SolverOptions) -> Result<Solution, MilpError> {
    let binaries = model.binary_vars();
    let start = Instant::now();
    let mut stats = SolveStats::default();

    let solve_node = |fixes: &[(usize, bool)],
                          stats: &mut SolveStats|
     -> Result<crate::simplex::SimplexResult, MilpError> {
        let mut node_model = model.clone();
        for &(vi, one) in fixes {
            let v = if one { 1.0 } else { 0.0 };
            node_model.restrict_bounds(VarId(vi), v, v);
        }
        let r = solve_relaxation(&node_model, opts)?;
        stats.simplex_iterations += r.iterations;
        stats.refactorizations += r.refactorizations;
        Ok(r)
    };

    let root = solve_node(&[], &mut stats)?;
    stats.nodes_explored = 1;
    match root.status {
        Status::Infeasible => {
            return Ok(Solution {
                status: Status::Infeasible,
                values: Vec::new(),
                objective: f64::INFINITY,
                mip_gap: f64::INFINITY,
                stats,
            })
        }
        Status::Unbounded => {
            return Ok(Solution {
                status: Status::Unbounded,
                values: Vec::new(),
                objective: f64::NEG_INFINITY,
                mip_gap: f64::INFINITY,
                stats,
            })
        }
        _ => {}
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut next_id = 1u64;
    let mut open: Vec<Node> = vec![Node {
        id: 0,
        bound: root.objective,
        fixes: Vec::new(),
    }];
    // Root LP result is reused for the first pop.
    let mut cached_root = Some(root);

    let gap_slack = |inc: f64| opts.rel_gap * 1.0f64.max(inc.abs());

    while let Some(node) = pop_node(&mut open, incumbent.is_some()) {
        if let Some((inc_obj, _)) = &incumbent {
            if node.bound >= inc_obj - gap_slack(*inc_obj) {
                continue;
            }
        }
        if stats.nodes_explored >= opts.max_nodes {
            debug!("node cap {} hit", opts.max_nodes);
            open.push(node);
            break;
        }
        if let Some(limit) = opts.time_limit {
            if start.elapsed() > limit {
                debug!("time limit hit after {} nodes", stats.nodes_explored);
                open.push(node);
                break;
            }
        }

        let relax = match cached_root.take() {
            Some(r) => r,
            None => {
                stats.nodes_explored += 1;
                let r = solve_node(&node.fixes, &mut stats)?;
                match r.status {
                    Status::Infeasible => continue,
                    Status::Unbounded => {
                        return Err(MilpError::Numerical {
                            detail: "node relaxation unbounded below a bounded root".into(),
                        })
                    }
                    _ => r,
                }
            }
        };

        if let Some((inc_obj, _)) = &incumbent {
            if relax.objective >= inc_obj - gap_slack(*inc_obj) {
                continue;
            }
        }

        // Weak duality: a node bound can never exceed a valid incumbent.
        debug_assert!(
            incumbent
                .as_ref()
                .map(|(inc, _)| relax.objective <= *inc + 1e-6 * (1.0 + inc.abs()))
                .unwrap_or(true),
            "node bound above incumbent"
        );

        let frac = most_fractional(&binaries, &relax.values, opts.int_tol);
        match frac {
            None => {
                // Integral within tolerance.
                accept_incumbent(&mut incumbent, relax.objective, relax.values, node.id);
                continue;
            }
            Some((var, value)) => {
                if opts.rounding_heuristic {
                    if let Some(vals) = round_repair(model, &node.fixes, &relax.values, opts) {
                        let obj = model.objective_value(&vals);
                        trace!("rounding heuristic found incumbent {obj}");
                        accept_incumbent(&mut incumbent, obj, vals, node.id);
                        if let Some((inc_obj, _)) = &incumbent {
                            if relax.objective >= inc_obj - gap_slack(*inc_obj) {
                                continue;
                            }
                        }
                    }
                }
                // Children: in the dive phase the nearer side is pushed last
                // so it is explored first.
                let near_one = value >= 0.5;
                let mut far = node.fixes.clone();
                far.push((var.index(), !near_one));
                let mut near = node.fixes;
                near.push((var.index(), near_one));
                open.push(Node {
                    id: next_id,
                    bound: relax.objective,
                    fixes: far,
                });
                open.push(Node {
                    id: next_id + 1,
                    bound: relax.objective,
                    fixes: near,
                });
                next_id += 2;
            }
        }
    }

    let best_open = open
        .iter()
        .map(|n| n.bound)
        .fold(f64::INFINITY, f64::min);
    match incumbent {
        Some((obj, values)) => {
            let bound = best_open.min(obj);
            let gap = ((obj - bound) / 1.0f64.max(obj.abs())).max(0.0);
            let status = if open.is_empty() || gap <= opts.rel_gap {
                Status::Optimal
            } else {
                Status::GapLimit
            };
            Ok(Solution {
                status,
                values,
                objective: obj,
                mip_gap: gap,
                stats,
            })
        }
        None => {
            if open.is_empty() {
                Ok(Solution {
                    status: Status::Infeasible,
                    values: Vec::new(),
                    objective: f64::INFINITY,
                    mip_gap: f64::INFINITY,
                    stats,
                })
            } else {
                // Cap hit before any incumbent was found.
                Ok(Solution {
                    status: Status::GapLimit,
                    values: Vec::new(),
                    objective: f64::INFINITY,
                    mip_gap: f64::INFINITY,
                    stats,
                })
            }
        }
    }
}

/// Dive (LIFO) until an incumbent exists, then best bound with the node id
/// breaking ties deterministically.
fn pop_node(open: &mut Vec<Node>, have_incumbent: bool) -> Option<Node> {
    if open.is_empty() {
        return None;
    }
    if !have_incumbent {
        return open.pop();
    }
    let mut best = 0;
    for i in 1..open.len() {
        let (a, b) = (&open[i], &open[best]);
        if a.bound < b.bound || (a.bound == b.bound && a.id < b.id) {
            best = i;
        }
    }
    Some(open.swap_remove(best))
}

fn accept_incumbent(
    incumbent: &mut Option<(f64, Vec<f64>)>,
    obj: f64,
    values: Vec<f64>,
    node_id: u64,
) {
    match incumbent {
        // Strict improvement only: at equal objective the first incumbent
        // (lowest node id) wins, which keeps parallel schedules reproducible.
        Some((cur, _)) if obj >= *cur => {
            trace!("discarding incumbent {obj} at node {node_id} (have {cur})");
        }
        _ => *incumbent = Some((obj, values)),
    }
}

fn most_fractional(
    binaries: &[VarId],
    values: &[f64],
    int_tol: f64,
) -> Option<(VarId, f64)> {
    let mut best: Option<(VarId, f64, f64)> = None;
    for &b in binaries {
        let x = values[b.index()];
        let dist = (x - x.round()).abs();
        if dist > int_tol {
            let score = 0.5 - (x.fract() - 0.5).abs(); // closeness to one half
            match best {
                Some((_, _, s)) if score <= s => {}
                _ => best = Some((b, x, score)),
            }
        }
    }
    best.map(|(v, x, _)| (v, x))
}

/// Rounds binaries to the nearest integer (respecting branch fixes) and then
/// greedily flips binaries that reduce total violation. Returns a verified
/// feasible assignment or `None`.
fn round_repair(
    model: &Model,
    fixes: &[(usize, bool)],
    base: &[f64],
    opts: &SolverOptions,
) -> Option<Vec<f64>> {
    let mut vals = base.to_vec();
    for v in model.var_ids() {
        if model.var_kind(v) == VarKind::Binary {
            vals[v.index()] = vals[v.index()].round().clamp(0.0, 1.0);
        }
    }
    for &(vi, one) in fixes {
        vals[vi] = if one { 1.0 } else { 0.0 };
    }
    let fixed: Vec<bool> = {
        let mut f = vec![false; model.num_vars()];
        for &(vi, _) in fixes {
            f[vi] = true;
        }
        f
    };

    // Row activities and per-row violation.
    let cons = model.constraints();
    let mut act = vec![0.0f64; cons.len()];
    let mut scale = vec![1.0f64; cons.len()];
    for (i, con) in cons.iter().enumerate() {
        for &(v, c) in &con.terms {
            act[i] += c * vals[v.index()];
            scale[i] = scale[i].max((c * vals[v.index()]).abs()).max(con.rhs.abs());
        }
    }
    let viol = |i: usize, a: f64| -> f64 {
        let con = &cons[i];
        let raw = match con.relation {
            crate::model::Relation::Le => a - con.rhs,
            crate::model::Relation::Ge => con.rhs - a,
            crate::model::Relation::Eq => (a - con.rhs).abs(),
        };
        let tol = opts.feas_tol * 1.0f64.max(scale[i]);
        if raw > tol {
            raw
        } else {
            0.0
        }
    };

    // Column map for binaries only.
    let mut bin_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, con) in cons.iter().enumerate() {
        for &(v, c) in &con.terms {
            if model.var_kind(v) == VarKind::Binary {
                bin_cols[v.index()].push((i, c));
            }
        }
    }

    let max_passes = 2 * model.binary_vars().len().max(1);
    for _ in 0..max_passes {
        let violated: Vec<usize> = (0..cons.len()).filter(|&i| viol(i, act[i]) > 0.0).collect();
        if violated.is_empty() {
            // Full independent re-check before trusting the repair.
            if checker::check_assignment(model, &vals, opts.feas_tol, 4.0).is_empty() {
                return Some(vals);
            }
            return None;
        }
        let mut improved = false;
        for &row in &violated {
            if viol(row, act[row]) == 0.0 {
                continue; // fixed by an earlier flip this pass
            }
            for &(v, _) in &cons[row].terms {
                if model.var_kind(v) != VarKind::Binary || fixed[v.index()] {
                    continue;
                }
                let old = vals[v.index()];
                let new = 1.0 - old;
                let mut delta = 0.0;
                for &(r, c) in &bin_cols[v.index()] {
                    let na = act[r] + c * (new - old);
                    delta += viol(r, na) - viol(r, act[r]);
                }
                if delta < -1e-12 {
                    vals[v.index()] = new;
                    for &(r, c) in &bin_cols[v.index()] {
                        act[r] += c * (new - old);
                    }
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            return None;
        }
    }
    None
}
