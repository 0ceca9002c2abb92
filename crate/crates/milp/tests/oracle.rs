//! Solver oracles: hand-checked LP vertices and exhaustive enumeration of
//! binary assignments as an independent reference for branch-and-bound.

use gridvest_milp::{
    solve_lp, solve_milp, Model, Relation, SolverOptions, Status, VarId,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn lp_single_lower_bound() {
    // min x s.t. x >= 3
    let mut m = Model::new("lb");
    let x = m.add_continuous(0.0, f64::INFINITY, "x").unwrap();
    m.set_obj_coeff(x, 1.0);
    m.add_constraint(&[(x, 1.0)], Relation::Ge, 3.0, "c").unwrap();
    let s = solve_lp(&m, &opts()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.value(x) - 3.0).abs() < 1e-9);
    assert!((s.objective - 3.0).abs() < 1e-9);
}

#[test]
fn lp_max_via_negation() {
    // min -x-y s.t. x+y <= 4, x <= 2, x,y >= 0. Vertices: (0,0), (2,0),
    // (2,2), (0,4); best objective -4.
    let mut m = Model::new("neg");
    let x = m.add_continuous(0.0, f64::INFINITY, "x").unwrap();
    let y = m.add_continuous(0.0, f64::INFINITY, "y").unwrap();
    m.set_obj_coeff(x, -1.0);
    m.set_obj_coeff(y, -1.0);
    m.add_constraint(&[(x, 1.0), (y, 1.0)], Relation::Le, 4.0, "sum")
        .unwrap();
    m.add_constraint(&[(x, 1.0)], Relation::Le, 2.0, "xcap").unwrap();
    let s = solve_lp(&m, &opts()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.objective - (-4.0)).abs() < 1e-9);
}

#[test]
fn lp_contradiction_is_infeasible() {
    let mut m = Model::new("contra");
    let x = m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, "x").unwrap();
    m.add_constraint(&[(x, 1.0)], Relation::Ge, 1.0, "ge").unwrap();
    m.add_constraint(&[(x, 1.0)], Relation::Le, 0.0, "le").unwrap();
    let s = solve_lp(&m, &opts()).unwrap();
    assert_eq!(s.status, Status::Infeasible);
}

#[test]
fn lp_unbounded() {
    let mut m = Model::new("unb");
    let x = m.add_continuous(0.0, f64::INFINITY, "x").unwrap();
    m.set_obj_coeff(x, -1.0);
    let s = solve_lp(&m, &opts()).unwrap();
    assert_eq!(s.status, Status::Unbounded);
}

#[test]
fn lp_free_variable_split() {
    // min x+y s.t. x+y >= 2 with x free: objective pinned at 2.
    let mut m = Model::new("free");
    let x = m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, "x").unwrap();
    let y = m.add_continuous(0.0, 1.0, "y").unwrap();
    m.set_obj_coeff(x, 1.0);
    m.set_obj_coeff(y, 1.0);
    m.add_constraint(&[(x, 1.0), (y, 1.0)], Relation::Ge, 2.0, "c")
        .unwrap();
    let s = solve_lp(&m, &opts()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.objective - 2.0).abs() < 1e-9);
}

#[test]
fn lp_equalities() {
    // x+y = 1, 2x+y = 1.5 -> x = 0.5, y = 0.5.
    let mut m = Model::new("eq");
    let x = m.add_continuous(0.0, f64::INFINITY, "x").unwrap();
    let y = m.add_continuous(0.0, f64::INFINITY, "y").unwrap();
    m.set_obj_coeff(x, 1.0);
    m.set_obj_coeff(y, 1.0);
    m.add_constraint(&[(x, 1.0), (y, 1.0)], Relation::Eq, 1.0, "e1")
        .unwrap();
    m.add_constraint(&[(x, 2.0), (y, 1.0)], Relation::Eq, 1.5, "e2")
        .unwrap();
    let s = solve_lp(&m, &opts()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.value(x) - 0.5).abs() < 1e-8);
    assert!((s.value(y) - 0.5).abs() < 1e-8);
}

#[test]
fn milp_knapsack() {
    // min -(3a+4b) s.t. 2a+3b <= 4, binary. Enumeration: (0,0)=0,
    // (1,0)=-3, (0,1)=-4, (1,1) infeasible. Optimum a=0, b=1.
    let mut m = Model::new("knap");
    let a = m.add_binary("a").unwrap();
    let b = m.add_binary("b").unwrap();
    m.set_obj_coeff(a, -3.0);
    m.set_obj_coeff(b, -4.0);
    m.add_constraint(&[(a, 2.0), (b, 3.0)], Relation::Le, 4.0, "cap")
        .unwrap();
    let s = solve_milp(&m, &opts()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert!((s.objective - (-4.0)).abs() < 1e-9);
    assert!(s.value(a) < 1e-6);
    assert!(s.value(b) > 1.0 - 1e-6);
}

#[test]
fn milp_without_binaries_reduces_to_lp() {
    let mut m = Model::new("nobin");
    let x = m.add_continuous(0.0, 10.0, "x").unwrap();
    m.set_obj_coeff(x, 2.0);
    m.add_constraint(&[(x, 1.0)], Relation::Ge, 4.0, "c").unwrap();
    let lp = solve_lp(&m, &opts()).unwrap();
    let mip = solve_milp(&m, &opts()).unwrap();
    assert_eq!(lp.status, mip.status);
    assert_eq!(lp.objective, mip.objective);
    assert_eq!(lp.values, mip.values);
}

#[test]
fn milp_gap_limit_carries_incumbent() {
    let mut m = Model::new("cap");
    let mut vars = Vec::new();
    for i in 0..8 {
        let b = m.add_binary(format!("b{i}")).unwrap();
        m.set_obj_coeff(b, -(1.0 + i as f64 * 0.37));
        vars.push(b);
    }
    let terms: Vec<(VarId, f64)> = vars.iter().map(|&v| (v, 1.0)).collect();
    m.add_constraint(&terms, Relation::Le, 3.2, "atmost").unwrap();
    let mut o = opts();
    o.max_nodes = 1;
    o.rounding_heuristic = false;
    let s = solve_milp(&m, &o).unwrap();
    assert_eq!(s.status, Status::GapLimit);
    assert!(s.mip_gap > 0.0);
}

// ---------------------------------------------------------------------------
// Random-instance oracle: exhaustive 2^k enumeration of LP solves.
// ---------------------------------------------------------------------------

pub fn random_model(seed: u64, max_bin: usize, max_cont: usize, max_cons: usize) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bin = rng.random_range(1..=max_bin);
    let n_cont = rng.random_range(0..=max_cont);
    let n_cons = rng.random_range(1..=max_cons);

    let mut m = Model::new(format!("rand{seed}"));
    let mut vars: Vec<VarId> = Vec::new();
    let mut reference: Vec<f64> = Vec::new();
    for i in 0..n_bin {
        let v = m.add_binary(format!("b{i}")).unwrap();
        m.set_obj_coeff(v, (rng.random::<f64>() - 0.5) * 20.0);
        reference.push(if rng.random_bool(0.5) { 1.0 } else { 0.0 });
        vars.push(v);
    }
    for i in 0..n_cont {
        let ub = 1.0 + rng.random::<f64>() * 9.0;
        let v = m.add_continuous(0.0, ub, format!("x{i}")).unwrap();
        m.set_obj_coeff(v, (rng.random::<f64>() - 0.5) * 20.0);
        reference.push(rng.random::<f64>() * ub);
        vars.push(v);
    }
    // Constraints are anchored on a reference point so the instance is
    // always feasible (and bounded, because every variable is boxed).
    for c in 0..n_cons {
        let mut terms = Vec::new();
        let mut activity = 0.0;
        for (i, &v) in vars.iter().enumerate() {
            if rng.random_bool(0.6) {
                let coef = rng.random_range(-5..=5) as f64;
                if coef != 0.0 {
                    terms.push((v, coef));
                    activity += coef * reference[i];
                }
            }
        }
        if terms.is_empty() {
            continue;
        }
        let slack = rng.random::<f64>() * 5.0;
        let (rel, rhs) = match rng.random_range(0..4) {
            0 => (Relation::Eq, activity),
            1 => (Relation::Ge, activity - slack),
            _ => (Relation::Le, activity + slack),
        };
        m.add_constraint(&terms, rel, rhs, format!("c{c}")).unwrap();
    }
    m
}

/// Exhaustive enumeration over all binary assignments, each solved as an LP.
pub fn enumerate_optimum(model: &Model, opts: &SolverOptions) -> Option<f64> {
    let bins = model.binary_vars();
    let mut best: Option<f64> = None;
    for mask in 0u64..(1 << bins.len()) {
        let mut fixed = model.clone();
        for (i, &b) in bins.iter().enumerate() {
            let v = if mask >> i & 1 == 1 { 1.0 } else { 0.0 };
            fixed.set_var_bounds(b, v, v).unwrap();
        }
        let s = solve_lp(&fixed, opts).unwrap();
        if s.status == Status::Optimal {
            best = Some(match best {
                Some(b) => b.min(s.objective),
                None => s.objective,
            });
        }
    }
    best
}

#[test]
fn bb_matches_enumeration_on_seeded_instances() {
    let o = opts();
    for seed in 0..100u64 {
        let m = random_model(seed, 6, 8, 12);
        let truth = enumerate_optimum(&m, &o).expect("reference point is feasible");
        let s = solve_milp(&m, &o).unwrap();
        assert_eq!(s.status, Status::Optimal, "seed {seed}");
        let tol = 1e-6 * 1.0f64.max(truth.abs());
        assert!(
            (s.objective - truth).abs() <= tol,
            "seed {seed}: bb {} vs enumeration {}",
            s.objective,
            truth
        );
        assert!(s.mip_gap <= o.rel_gap + 1e-12, "seed {seed}: gap {}", s.mip_gap);
    }
}

#[test]
fn deterministic_resolve() {
    for seed in [3u64, 17, 40] {
        let m = random_model(seed, 6, 8, 12);
        let a = solve_milp(&m, &opts()).unwrap();
        let b = solve_milp(&m, &opts()).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.values.len(), b.values.len());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    /// Branch-and-bound equals brute force on every instance with at most
    /// ten binaries.
    #[test]
    fn bb_equals_brute_force(seed in 0u64..1_000_000) {
        let o = opts();
        let m = random_model(seed, 10, 6, 10);
        let truth = enumerate_optimum(&m, &o).expect("feasible by construction");
        let s = solve_milp(&m, &o).unwrap();
        prop_assert_eq!(s.status, Status::Optimal);
        let tol = 1e-6 * 1.0f64.max(truth.abs());
        prop_assert!((s.objective - truth).abs() <= tol,
            "bb {} vs enumeration {}", s.objective, truth);
    }
}
