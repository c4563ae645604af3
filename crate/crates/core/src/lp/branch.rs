//! Best-bound branch-and-bound over binary variables.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{LinearProgram, MilpProgram, Sense, Solution, SolverOptions, Status};
use crate::error::Result;

struct Node {
    /// Relaxation bound inherited from the parent, in maximisation form.
    bound: f64,
    depth: usize,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(self.depth.cmp(&other.depth))
    }
}

struct Incumbent {
    value: f64,
    x: Vec<f64>,
}

/// Solves `mip` by branch-and-bound, calling `relax` for each node's LP
/// relaxation. Node selection is best-bound; the branching variable is the
/// most fractional binary.
pub fn branch_and_bound(
    mip: &MilpProgram,
    opts: &SolverOptions,
    relax: &dyn Fn(&LinearProgram) -> Result<Solution>,
) -> Result<Solution> {
    let base = &mip.base;
    let sign = if base.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let int_tol = opts.integrality_tol;
    let mut iterations = 0;
    let mut nodes = 0;

    let with_fixings = |fix: &[(usize, f64)]| {
        let mut lp = base.clone();
        for &(j, v) in fix {
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        lp
    };
    let most_fractional = |x: &[f64]| {
        let mut best: Option<(usize, f64)> = None;
        for &b in &mip.binaries {
            let f = (x[b] - libm::round(x[b])).abs();
            if f > int_tol && best.is_none_or(|(_, bf)| f > bf) {
                best = Some((b, f));
            }
        }
        best.map(|(b, _)| b)
    };
    let snap = |x: &mut [f64]| {
        for &b in &mip.binaries {
            x[b] = libm::round(x[b]).clamp(0.0, 1.0);
        }
    };

    let root = relax(base)?;
    iterations += root.iterations;
    nodes += 1;
    match root.status {
        Status::Optimal => {}
        Status::Infeasible | Status::Unbounded => {
            let mut s = Solution::empty(root.status, base.num_vars());
            s.iterations = iterations;
            s.nodes = nodes;
            return Ok(s);
        }
        Status::IterationLimit => {
            let mut s = root;
            s.duals = None;
            return Ok(s);
        }
    }

    let mut incumbent: Option<Incumbent> = None;
    let prune_tol = |inc: f64| 1e-9 * (1.0 + inc.abs());
    let offer = |x: Vec<f64>, value: f64, incumbent: &mut Option<Incumbent>| {
        if incumbent.as_ref().is_none_or(|i| value > i.value + prune_tol(i.value)) {
            *incumbent = Some(Incumbent { value, x });
        }
    };

    // rounding heuristics at the root: nearest and ceiling
    if most_fractional(&root.x).is_some() {
        for up in [false, true] {
            let fix: Vec<(usize, f64)> = mip
                .binaries
                .iter()
                .map(|&b| {
                    let v = if up { libm::ceil(root.x[b] - int_tol) } else { libm::round(root.x[b]) };
                    (b, v.clamp(0.0, 1.0))
                })
                .collect();
            let s = relax(&with_fixings(&fix))?;
            iterations += s.iterations;
            if s.status == Status::Optimal {
                let mut x = s.x;
                snap(&mut x);
                let v = sign * base.objective_value(&x);
                offer(x, v, &mut incumbent);
            }
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: sign * root.objective, depth: 0, fixings: Vec::new() });
    let mut pending_root = Some(root);
    let mut exhausted = false;
    let mut truncated = false;

    while let Some(node) = heap.pop() {
        if let Some(inc) = &incumbent {
            if node.bound <= inc.value + prune_tol(inc.value) {
                continue;
            }
        }
        if nodes >= opts.node_limit {
            heap.push(node);
            exhausted = true;
            break;
        }
        let sol = match pending_root.take() {
            Some(r) => r,
            None => {
                nodes += 1;
                let s = relax(&with_fixings(&node.fixings))?;
                iterations += s.iterations;
                s
            }
        };
        if sol.status != Status::Optimal {
            if sol.status == Status::IterationLimit {
                truncated = true;
            }
            continue;
        }
        let value = sign * sol.objective;
        if let Some(inc) = &incumbent {
            if value <= inc.value + prune_tol(inc.value) {
                continue;
            }
        }
        match most_fractional(&sol.x) {
            None => {
                let mut x = sol.x;
                snap(&mut x);
                let v = sign * base.objective_value(&x);
                offer(x, v, &mut incumbent);
            }
            Some(b) => {
                if node.depth >= opts.depth_limit {
                    truncated = true;
                    continue;
                }
                for v in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((b, v));
                    heap.push(Node { bound: value, depth: node.depth + 1, fixings });
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::NEG_INFINITY, f64::max);
    match incumbent {
        Some(inc) => {
            let complete = !exhausted && !truncated;
            let gap = if complete { 0.0 } else { (open_bound - inc.value).max(0.0) };
            Ok(Solution {
                status: if complete { Status::Optimal } else { Status::IterationLimit },
                objective: base.objective_value(&inc.x),
                x: inc.x,
                duals: None,
                iterations,
                nodes,
                gap: Some(gap),
            })
        }
        None => {
            let status = if exhausted || truncated { Status::IterationLimit } else { Status::Infeasible };
            let mut s = Solution::empty(status, base.num_vars());
            s.iterations = iterations;
            s.nodes = nodes;
            if status == Status::IterationLimit {
                s.gap = Some(f64::INFINITY);
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{BuiltinSolver, Relation, Solver};

    #[test]
    fn half_bound_binary_rounds_down() {
        let mut mip = MilpProgram::new(LinearProgram::new(Sense::Maximize));
        let b = mip.add_binary("b", 1.0);
        mip.base.add_constraint("half", [(b, 1.0)], Relation::Le, 0.5);
        let s = BuiltinSolver::default().solve_milp(&mip).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.x[0], 0.0);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn two_item_knapsack() {
        let mut mip = MilpProgram::new(LinearProgram::new(Sense::Maximize));
        let a = mip.add_binary("a", 3.0);
        let b = mip.add_binary("b", 2.0);
        mip.base.add_constraint("cap", [(a, 2.0), (b, 2.0)], Relation::Le, 3.0);
        let s = BuiltinSolver::default().solve_milp(&mip).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-9);
        assert_eq!((s.x[0], s.x[1]), (1.0, 0.0));
    }

    #[test]
    fn node_limit_reports_gap() {
        let mut mip = MilpProgram::new(LinearProgram::new(Sense::Maximize));
        let vars: Vec<_> = (0..12).map(|i| mip.add_binary(alloc::format!("b{i}"), 1.0 + i as f64 * 0.1)).collect();
        mip.base.add_constraint("cap", vars.iter().map(|&v| (v, 2.0)), Relation::Le, 11.0);
        let opts = SolverOptions { node_limit: 2, ..Default::default() };
        let s = BuiltinSolver::new(opts).solve_milp(&mip).unwrap();
        assert_eq!(s.status, Status::IterationLimit);
        assert!(s.gap.unwrap() > 0.0);
    }
}
