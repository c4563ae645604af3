use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{compute_big_m, describe, AllocationResult, AllocationScenario, BigM, Mode, Model};
use crate::cqr::{FrontierSet, QuantileFrontier};
use crate::data::IndustryTotals;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, MilpProgram, Problem, Relation, Sense, Solver, Status, VarId};

/// Planes whose largest margin below the envelope of the others is at most
/// this (relative to the output scale) are treated as redundant.
const PRUNE_TOL: f64 = 1e-9;

/// A built allocation program with the variable handles needed to read a
/// solution back.
#[derive(Debug, Clone)]
pub struct AllocationProgram {
    pub model: Model,
    pub problem: Problem,
    /// `x[g][i][j]`, group 1 first.
    pub x: Vec<Vec<Vec<VarId>>>,
    pub y: Vec<Vec<VarId>>,
    /// Exit binaries, present for exit models only.
    pub b: Option<Vec<Vec<VarId>>>,
    /// Hyperplanes of each group's frontier kept in the technology rows.
    pub planes: Vec<Vec<usize>>,
    pub big_m: Option<BigM>,
    /// Variable scale factors: an LP value `v` of `x_{g,i,j}` means `v·sx[j]`.
    pub sx: Vec<f64>,
    pub sy: f64,
}

impl AllocationProgram {
    fn lp(&self) -> &LinearProgram {
        match &self.problem {
            Problem::Lp(lp) => lp,
            Problem::Milp(m) => &m.base,
        }
    }
}

fn check_inputs(set: &FrontierSet, totals: &IndustryTotals, scen: &AllocationScenario) -> Result<()> {
    scen.validate()?;
    if set.is_empty() {
        return Err(Error::Domain("empty frontier set".into()));
    }
    if totals.dim() != set.dim() {
        return Err(Error::Domain(format!("totals have {} inputs, frontier set has {}", totals.dim(), describe(set))));
    }
    if totals.total.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain("aggregate inputs must be finite and non-negative".into()));
    }
    if scen.mode == Mode::WithinOnly {
        if totals.groups() != set.len() {
            return Err(Error::Domain(format!(
                "within-group models need totals for {} groups, got {}",
                set.len(),
                totals.groups()
            )));
        }
        if totals.per_group.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain("group input totals must be finite and non-negative".into()));
        }
        totals.check_partition()?;
    }
    if let super::BigMPolicy::Explicit { output, input } = &scen.big_m {
        if output.len() != set.len() || input.len() != set.dim() {
            return Err(Error::Domain(format!(
                "explicit big-M needs {} output and {} input values",
                set.len(),
                set.dim()
            )));
        }
    }
    Ok(())
}

/// Input box available to one unit of group `g`.
fn unit_cap(totals: &IndustryTotals, scen: &AllocationScenario, g: usize) -> Vec<f64> {
    let src = match scen.mode {
        Mode::BetweenAndWithin => &totals.total,
        Mode::WithinOnly => &totals.per_group[g - 1],
    };
    src.iter().map(|v| scen.gamma * v).collect()
}

fn is_flat(f: &QuantileFrontier, planes: &[usize]) -> bool {
    planes.iter().all(|&h| f.beta[h].iter().all(|b| *b == 0.0))
}

/// Indices of the hyperplanes of `f` that shape its envelope somewhere on
/// the box `[0, cap]`; the envelope over the box is unchanged when the rest
/// are dropped.
pub fn prune_hyperplanes(solver: &dyn Solver, f: &QuantileFrontier, cap: &[f64]) -> Result<Vec<usize>> {
    let d = f.dim();
    let m = f.len();
    let scale = 1.0 + (0..m).map(|h| f.plane(h, cap).abs().max(f.alpha[h].abs())).fold(0.0, f64::max);
    let tol = PRUNE_TOL * scale;

    // exact duplicates
    let mut kept: Vec<usize> = Vec::new();
    for h in 0..m {
        let dup = kept.iter().any(|&k| f.alpha[k] == f.alpha[h] && f.beta[k] == f.beta[h]);
        if !dup {
            kept.push(h);
        }
    }
    if kept.len() <= 1 {
        return Ok(kept);
    }

    // Points at which a strict unique minimum certifies a plane as needed.
    let mut probes: Vec<Vec<f64>> = Vec::new();
    for mask in 0..(1usize << d.min(12)) {
        probes.push((0..d).map(|j| if mask >> j & 1 == 1 { cap[j] } else { 0.0 }).collect());
    }
    probes.push(cap.iter().map(|c| c / 2.0).collect());
    let mut certified = vec![false; m];
    for p in &probes {
        let vals: Vec<(usize, f64)> = kept.iter().map(|&h| (h, f.plane(h, p))).collect();
        let (hmin, vmin) = vals.iter().copied().fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if vals.iter().all(|&(h, v)| h == hmin || v > vmin + tol) {
            certified[hmin] = true;
        }
    }

    let mut k = 0;
    while k < kept.len() && kept.len() > 1 {
        let h = kept[k];
        if certified[h] {
            k += 1;
            continue;
        }
        // max t  s.t.  t ≤ (plane_o(z) − plane_h(z)) / scale for every other
        // kept o, z in the box; rows are divided by `scale` to keep them O(1)
        let mut lp = LinearProgram::new(Sense::Maximize);
        let z: Vec<VarId> = (0..d).map(|j| lp.add_var(format!("z{j}"), 0.0, 1.0, 0.0)).collect();
        let t = lp.add_var("t", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        for &o in kept.iter().filter(|&&o| o != h) {
            let mut terms = vec![(t, 1.0)];
            for j in 0..d {
                terms.push((z[j], -(f.beta[o][j] - f.beta[h][j]) * cap[j] / scale));
            }
            lp.add_constraint(format!("p{o}"), terms, Relation::Le, (f.alpha[o] - f.alpha[h]) / scale);
        }
        let sol = solver.solve_lp(&lp)?;
        if sol.status == Status::Optimal && sol.value(t) <= PRUNE_TOL {
            kept.remove(k);
        } else {
            k += 1;
        }
    }
    Ok(kept)
}

fn build(
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
    planes: Vec<Vec<usize>>,
    scaled: bool,
) -> AllocationProgram {
    let model = scen.model();
    let k = set.len();
    let d = set.dim();
    let n = scen.units_per_group;
    let exit = scen.exit_allowed;
    let global: Vec<f64> = totals.total.iter().map(|v| scen.gamma * v).collect();
    let big_m = exit.then(|| compute_big_m(set, totals, scen));

    let (sx, sy) = if scaled {
        let sx: Vec<f64> = global.iter().map(|v| if *v > 0.0 { *v } else { 1.0 }).collect();
        let sy = (1..=k)
            .map(|g| {
                let f = set.group_frontier(g);
                f.value_at(&global).abs().max(f.value_at(&vec![0.0; d]).abs())
            })
            .fold(0.0, f64::max);
        (sx, if sy > 0.0 && sy.is_finite() { sy } else { 1.0 })
    } else {
        (vec![1.0; d], 1.0)
    };

    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut x = Vec::with_capacity(k);
    let mut y = Vec::with_capacity(k);
    for g in 1..=k {
        let cap = unit_cap(totals, scen, g);
        let mut xg = Vec::with_capacity(n);
        let mut yg = Vec::with_capacity(n);
        for i in 0..n {
            xg.push(
                (0..d)
                    .map(|j| lp.add_var(format!("x_{g}_{i}_{}", j + 1), 0.0, cap[j] / sx[j], 0.0))
                    .collect::<Vec<_>>(),
            );
            yg.push(lp.add_var(format!("y_{g}_{i}"), f64::NEG_INFINITY, f64::INFINITY, 1.0));
        }
        x.push(xg);
        y.push(yg);
    }
    let mut mip = MilpProgram::new(lp);
    let b: Option<Vec<Vec<VarId>>> =
        exit.then(|| (1..=k).map(|g| (0..n).map(|i| mip.add_binary(format!("b_{g}_{i}"), 0.0)).collect()).collect());
    let lp = &mut mip.base;

    for g in 1..=k {
        let f = set.group_frontier(g);
        for i in 0..n {
            for &h in &planes[g - 1] {
                let mut terms = vec![(y[g - 1][i], 1.0)];
                for j in 0..d {
                    terms.push((x[g - 1][i][j], -f.beta[h][j] * sx[j] / sy));
                }
                let mut rhs = f.alpha[h] / sy;
                if let (Some(b), Some(m)) = (&b, &big_m) {
                    let mh = m.tech[g - 1][h] / sy;
                    if mh > 0.0 {
                        terms.push((b[g - 1][i], mh));
                        rhs += mh;
                    }
                }
                lp.add_constraint(format!("tech_{g}_{i}_{h}"), terms, Relation::Le, rhs);
            }
            if let (Some(b), Some(m)) = (&b, &big_m) {
                let bv = b[g - 1][i];
                lp.add_constraint(
                    format!("mout_{g}_{i}"),
                    [(y[g - 1][i], 1.0), (bv, -m.output[g - 1] / sy)],
                    Relation::Le,
                    0.0,
                );
                for j in 0..d {
                    lp.add_constraint(
                        format!("min_{g}_{i}_{}", j + 1),
                        [(x[g - 1][i][j], 1.0), (bv, -m.input[j] / sx[j])],
                        Relation::Le,
                        0.0,
                    );
                }
                if i + 1 < n {
                    lp.add_constraint(format!("sym_{g}_{i}"), [(b[g - 1][i + 1], 1.0), (bv, -1.0)], Relation::Le, 0.0);
                }
            }
        }
    }

    let global_rel = if exit { Relation::Le } else { Relation::Eq };
    if scen.mode == Mode::WithinOnly {
        for g in 1..=k {
            for j in 0..d {
                let terms: Vec<(VarId, f64)> = (0..n).map(|i| (x[g - 1][i][j], 1.0)).collect();
                let rhs = scen.gamma * totals.per_group[g - 1][j] / sx[j];
                lp.add_constraint(format!("res_{g}_{}", j + 1), terms, global_rel, rhs);
            }
        }
    }
    // problem (8) leaves the global row implied by the group rows
    if model != Model::Lp8 {
        for j in 0..d {
            let terms: Vec<(VarId, f64)> = x.iter().flatten().map(|xi| (xi[j], 1.0)).collect();
            lp.add_constraint(format!("res_{}", j + 1), terms, global_rel, global[j] / sx[j]);
        }
    }

    let problem = if exit { Problem::Milp(mip) } else { Problem::Lp(mip.base) };
    AllocationProgram { model, problem, x, y, b, planes, big_m, sx, sy }
}

fn all_planes(set: &FrontierSet) -> Vec<Vec<usize>> {
    (1..=set.len()).map(|g| (0..set.group_frontier(g).len()).collect()).collect()
}

/// The unscaled program of `scen` with every hyperplane in the technology
/// rows, for export or for solving with an external backend.
pub fn allocation_program(
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
) -> Result<AllocationProgram> {
    check_inputs(set, totals, scen)?;
    Ok(build(set, totals, scen, all_planes(set), false))
}

/// Builds, solves and polishes the program selected by `scen`.
pub fn solve_allocation(
    solver: &dyn Solver,
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
) -> Result<AllocationResult> {
    check_inputs(set, totals, scen)?;
    let mut planes = Vec::with_capacity(set.len());
    for g in 1..=set.len() {
        let cap = unit_cap(totals, scen, g);
        planes.push(prune_hyperplanes(solver, set.group_frontier(g), &cap)?);
    }
    let prog = build(set, totals, scen, planes, true);
    let sol = solver.solve(&prog.problem)?;
    let usable = match sol.status {
        Status::Optimal => true,
        Status::IterationLimit => sol.objective.is_finite(),
        _ => false,
    };
    if !usable {
        return Err(match sol.status {
            Status::Infeasible => Error::Infeasible(format!("{} has no feasible allocation", prog.model)),
            st => Error::Solver(format!("{} stopped with status {}", prog.model, st.as_str())),
        });
    }
    Ok(polish(set, totals, scen, &prog, &sol.x, sol.status, sol.gap.map(|g| g * prog.sy), sol.nodes, sol.iterations))
}

#[allow(clippy::too_many_arguments)]
fn polish(
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
    prog: &AllocationProgram,
    v: &[f64],
    status: Status,
    gap: Option<f64>,
    nodes: usize,
    iterations: usize,
) -> AllocationResult {
    let k = set.len();
    let n = scen.units_per_group;
    let d = set.dim();
    let lp = prog.lp();
    let mut x = vec![vec![vec![0.0; d]; n]; k];
    let mut active = vec![vec![true; n]; k];
    for g in 0..k {
        for i in 0..n {
            if let Some(b) = &prog.b {
                active[g][i] = v[b[g][i].0] > 0.5;
            }
            if active[g][i] {
                for j in 0..d {
                    let var = prog.x[g][i][j].0;
                    x[g][i][j] = v[var].clamp(0.0, lp.upper[var]) * prog.sx[j];
                }
            }
        }
    }

    // Flat groups take the same output whatever they receive.
    let flat: Vec<bool> = (1..=k).map(|g| is_flat(set.group_frontier(g), &prog.planes[g - 1])).collect();
    for g in 0..k {
        if !flat[g] {
            continue;
        }
        let mut moved = vec![0.0; d];
        for xi in x[g].iter_mut() {
            for j in 0..d {
                moved[j] += xi[j];
                xi[j] = 0.0;
            }
        }
        if scen.exit_allowed {
            continue;
        }
        match scen.mode {
            Mode::WithinOnly => {
                for xi in x[g].iter_mut() {
                    for j in 0..d {
                        xi[j] = moved[j] / n as f64;
                    }
                }
            }
            Mode::BetweenAndWithin => {
                // Monotone frontiers never lose output from extra inputs.
                if let Some(t) = (0..k).find(|&t| !flat[t]) {
                    for j in 0..d {
                        x[t][0][j] += moved[j];
                    }
                } else {
                    let total: Vec<f64> = totals.total.iter().map(|v| scen.gamma * v).collect();
                    for xg in x.iter_mut() {
                        for xi in xg.iter_mut() {
                            for j in 0..d {
                                xi[j] = total[j] / (k * n) as f64;
                            }
                        }
                    }
                    break;
                }
            }
        }
    }

    let mut y = vec![vec![0.0; n]; k];
    for g in 0..k {
        let f = set.group_frontier(g + 1);
        for i in 0..n {
            if active[g][i] {
                y[g][i] = f.value_at(&x[g][i]);
            }
        }
    }
    let total_output = y.iter().flatten().sum();
    AllocationResult {
        model: prog.model,
        gamma: scen.gamma,
        x,
        y,
        active,
        total_output,
        status,
        gap,
        nodes,
        iterations,
        big_m: prog.big_m.clone(),
    }
}

fn expect_model(scen: &AllocationScenario, want: Model) -> Result<()> {
    if scen.model() != want {
        return Err(Error::Config(format!("scenario describes {}, expected {want}", scen.model())));
    }
    Ok(())
}

/// Between-group reallocation without exit.
pub fn solve_baseline(
    solver: &dyn Solver,
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
) -> Result<AllocationResult> {
    expect_model(scen, Model::Lp6)?;
    solve_allocation(solver, set, totals, scen)
}

/// Between-group reallocation with exit.
pub fn solve_exit(
    solver: &dyn Solver,
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
) -> Result<AllocationResult> {
    expect_model(scen, Model::Milp7)?;
    solve_allocation(solver, set, totals, scen)
}

/// Reallocation inside each group without exit.
pub fn solve_within(
    solver: &dyn Solver,
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
) -> Result<AllocationResult> {
    expect_model(scen, Model::Lp8)?;
    solve_allocation(solver, set, totals, scen)
}

/// Reallocation inside each group with exit.
pub fn solve_within_exit(
    solver: &dyn Solver,
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
) -> Result<AllocationResult> {
    expect_model(scen, Model::Milp9)?;
    solve_allocation(solver, set, totals, scen)
}

/// Re-checks `res` against the raw constraints of its model without using
/// any solver output beyond the plan itself.
pub fn audit(
    res: &AllocationResult,
    set: &FrontierSet,
    totals: &IndustryTotals,
    scen: &AllocationScenario,
) -> Result<()> {
    let fail = |msg: alloc::string::String| Err(Error::Invariant(format!("{}: {msg}", res.model)));
    let k = set.len();
    let d = set.dim();
    let n = scen.units_per_group;
    if res.x.len() != k || res.y.len() != k || res.active.len() != k {
        return fail(format!("expected {k} groups"));
    }
    let scale = 1.0 + res.y.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    for g in 0..k {
        if res.x[g].len() != n || res.y[g].len() != n || res.active[g].len() != n {
            return fail(format!("group {} should hold {n} units", g + 1));
        }
        let f = set.group_frontier(g + 1);
        for i in 0..n {
            let xi = &res.x[g][i];
            if xi.len() != d {
                return fail(format!("unit ({}, {i}) has {} inputs", g + 1, xi.len()));
            }
            if xi.iter().any(|v| !v.is_finite() || *v < -1e-9 * (1.0 + v.abs())) {
                return fail(format!("unit ({}, {i}) has a negative input", g + 1));
            }
            if !res.active[g][i] {
                if !scen.exit_allowed {
                    return fail(format!("unit ({}, {i}) inactive without exit", g + 1));
                }
                if xi.iter().any(|v| *v != 0.0) || res.y[g][i] != 0.0 {
                    return fail(format!("inactive unit ({}, {i}) holds resources", g + 1));
                }
                continue;
            }
            let cap = f.value_at(xi);
            if res.y[g][i] > cap + 1e-6 * scale {
                return fail(format!("unit ({}, {i}) output {} exceeds frontier {cap}", g + 1, res.y[g][i]));
            }
        }
    }
    let check_row = |name: alloc::string::String, lhs: f64, rhs: f64, rel: Relation| {
        let tol = 1e-6 * (1.0 + rhs.abs());
        let bad = match rel {
            Relation::Eq => (lhs - rhs).abs() > tol,
            Relation::Le => lhs > rhs + tol,
            Relation::Ge => lhs < rhs - tol,
        };
        if bad {
            return Err(Error::Invariant(format!("{}: row {name} has {lhs}, limit {rhs}", res.model)));
        }
        Ok(())
    };
    let rel = if scen.exit_allowed { Relation::Le } else { Relation::Eq };
    let used = res.total_inputs();
    for j in 0..d {
        // problem (8)'s global equality follows from its group rows
        check_row(format!("res_{}", j + 1), used[j], scen.gamma * totals.total[j], rel)?;
    }
    if scen.mode == Mode::WithinOnly {
        for g in 1..=k {
            let gi = res.group_inputs(g);
            for j in 0..d {
                check_row(format!("res_{g}_{}", j + 1), gi[j], scen.gamma * totals.per_group[g - 1][j], rel)?;
            }
        }
    }
    let sum: f64 = res.y.iter().flatten().sum();
    if (sum - res.total_output).abs() > 1e-9 * (1.0 + sum.abs()) {
        return fail(format!("total output {} differs from the unit sum {sum}", res.total_output));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqr::{Rts, Tau};
    use crate::lp::BuiltinSolver;

    fn frontier(tau: f64, planes: &[(f64, &[f64])]) -> QuantileFrontier {
        let n = planes.len();
        QuantileFrontier::from_coefficients(
            Tau::Quantile(tau),
            Rts::Vrs,
            planes.iter().map(|p| p.0).collect(),
            planes.iter().map(|p| p.1.to_vec()).collect(),
            vec![0.0; n],
            vec![0.0; n],
        )
        .unwrap()
    }

    fn single(planes: &[(f64, &[f64])]) -> FrontierSet {
        FrontierSet::new(vec![frontier(0.5, planes)], None).unwrap()
    }

    fn run(set: &FrontierSet, totals: &IndustryTotals, model: Model, n: usize) -> AllocationResult {
        let scen = AllocationScenario::new(model, 1.0, n);
        let r = solve_allocation(&BuiltinSolver::default(), set, totals, &scen).unwrap();
        audit(&r, set, totals, &scen).unwrap();
        r
    }

    #[test]
    fn linear_technology_uses_everything() {
        let set = single(&[(0.0, &[1.0])]);
        let t = IndustryTotals { total: vec![10.0], per_group: vec![vec![10.0]] };
        assert!((run(&set, &t, Model::Lp6, 5).total_output - 10.0).abs() < 1e-9);
    }

    #[test]
    fn kink_split() {
        let set = single(&[(0.0, &[2.0]), (1.0, &[1.0])]);
        let t = IndustryTotals { total: vec![2.0], per_group: vec![vec![2.0]] };
        let r = run(&set, &t, Model::Lp6, 2);
        assert!((r.total_output - 4.0).abs() < 1e-9);
    }

    #[test]
    fn exit_drops_negative_intercept() {
        let set = single(&[(-1.0, &[1.0])]);
        let t = IndustryTotals { total: vec![1.0], per_group: vec![vec![1.0]] };
        assert!((run(&set, &t, Model::Lp6, 2).total_output + 1.0).abs() < 1e-9);
        let r = run(&set, &t, Model::Milp7, 2);
        assert!(r.total_output.abs() < 1e-9);
        // either no unit or one unit at x = 1 reaches zero
        assert!(r.active_count() <= 1);
    }

    #[test]
    fn within_versus_between() {
        let fs = vec![frontier(0.25, &[(0.0, &[0.0])]), frontier(0.75, &[(0.0, &[2.0])])];
        let set = FrontierSet::new(fs, None).unwrap();
        // group 1 is the productive one
        let t = IndustryTotals { total: vec![10.0], per_group: vec![vec![1.0], vec![9.0]] };
        assert!((run(&set, &t, Model::Lp8, 1).total_output - 2.0).abs() < 1e-9);
        let r = run(&set, &t, Model::Lp6, 1);
        assert!((r.total_output - 20.0).abs() < 1e-9);
        // flat group canonicalised to nothing
        assert_eq!(r.group_inputs(2), [0.0]);
    }

    #[test]
    fn pruning_keeps_the_envelope() {
        // middle plane lies above the other two everywhere on [0, 4]
        let f = frontier(0.5, &[(0.0, &[2.0]), (1.0, &[1.5]), (2.0, &[0.5]), (2.0, &[0.5])]);
        let kept = prune_hyperplanes(&BuiltinSolver::default(), &f, &[4.0]).unwrap();
        assert_eq!(kept, [0, 2]);
    }

    #[test]
    fn wrong_entry_point() {
        let set = single(&[(0.0, &[1.0])]);
        let t = IndustryTotals { total: vec![1.0], per_group: vec![vec![1.0]] };
        let scen = AllocationScenario::new(Model::Lp8, 1.0, 1);
        assert!(matches!(solve_baseline(&BuiltinSolver::default(), &set, &t, &scen), Err(Error::Config(_))));
    }
}
