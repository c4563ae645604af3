use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::simplex::Tableau;
use super::{
    branch_and_bound, Constraint, LazySolution, LinearProgram, MilpProgram, Separator, Solution, Solver, SolverOptions,
    Status,
};

/// Slack (in scaled row units) beyond which a lazily added row is dropped.
const DROP_MARGIN: f64 = 1e-6;
use crate::error::Result;

/// Dense two-phase primal simplex for LPs, branch-and-bound for MILPs.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinSolver {
    pub options: SolverOptions,
}

impl BuiltinSolver {
    pub fn new(options: SolverOptions) -> Self {
        BuiltinSolver { options }
    }

    fn finish(&self, t: &Tableau, status: Status, lp: &LinearProgram) -> Solution {
        let x = t.primal_values();
        let objective = lp.objective_value(&x);
        Solution {
            status,
            objective: if status == Status::Optimal || status == Status::IterationLimit { objective } else { f64::NAN },
            duals: (status == Status::Optimal).then(|| t.duals()),
            x,
            iterations: t.iterations,
            nodes: 0,
            gap: None,
        }
    }
}

impl Solver for BuiltinSolver {
    fn name(&self) -> &str {
        "builtin"
    }

    fn options(&self) -> SolverOptions {
        self.options
    }

    fn solve_lp(&self, lp: &LinearProgram) -> Result<Solution> {
        lp.validate()?;
        let mut t = match Tableau::new(lp, self.options) {
            Ok(t) => t,
            Err(st) => return Ok(Solution::empty(st, lp.num_vars())),
        };
        let status = t.solve();
        Ok(self.finish(&t, status, lp))
    }

    fn solve_milp(&self, mip: &MilpProgram) -> Result<Solution> {
        mip.validate()?;
        branch_and_bound(mip, &self.options, &|lp| self.solve_lp(lp))
    }

    fn solve_lp_lazy(&self, lp: &LinearProgram, separator: &mut dyn Separator) -> Result<LazySolution> {
        lp.validate()?;
        let mut t = match Tableau::new(lp, self.options) {
            Ok(t) => t,
            Err(st) => {
                return Ok(LazySolution { solution: Solution::empty(st, lp.num_vars()), rounds: 1, rows_added: 0 });
            }
        };
        let mut status = t.solve();
        let mut rounds = 1;
        let mut added = 0;
        let mut full = lp.clone();
        // a row that comes back after being dropped is kept from then on
        let mut sticky = vec![false; lp.constraints.len()];
        let mut dropped_names = BTreeSet::new();
        while status == Status::Optimal {
            let dropped = t.drop_slack_rows(lp.constraints.len(), DROP_MARGIN, &|k| !sticky[k]);
            if !dropped.is_empty() {
                let rows: Vec<Constraint> = dropped.iter().map(|&k| full.constraints[k].clone()).collect();
                dropped_names.extend(rows.iter().map(|r| r.name.clone()));
                separator.dropped(&rows);
            }
            let x = t.primal_values();
            let cuts = separator.separate(&x);
            if cuts.is_empty() {
                break;
            }
            for c in &cuts {
                if c.terms.iter().any(|&(j, _)| j >= lp.num_vars()) {
                    return Err(crate::Error::InvalidProblem("lazy row references unknown column".into()));
                }
            }
            added += cuts.len();
            rounds += 1;
            sticky.extend(cuts.iter().map(|c| dropped_names.contains(&c.name)));
            status = t.add_rows(&cuts);
            full.constraints.extend(cuts);
        }
        let mut solution = self.finish(&t, status, &full);
        // duals beyond the original rows belong to lazily added ones
        if let Some(d) = solution.duals.as_mut() {
            d.truncate(lp.constraints.len());
        }
        Ok(LazySolution { solution, rounds, rows_added: added })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Relation, Sense};

    fn solve(lp: &LinearProgram) -> Solution {
        BuiltinSolver::default().solve_lp(lp).unwrap()
    }

    #[test]
    fn single_bound_maximum() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
        lp.add_constraint("cap", [(x, 1.0)], Relation::Le, 5.0);
        let s = solve(&lp);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.x[0] - 5.0).abs() < 1e-12);
        assert!((s.objective - 5.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
        lp.add_constraint("a", [(x, 1.0)], Relation::Le, 1.0);
        lp.add_constraint("b", [(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve(&lp).status, Status::Infeasible);
    }

    #[test]
    fn open_direction_is_unbounded() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, 1.0);
        lp.add_constraint("a", [(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&lp).status, Status::Unbounded);
    }

    #[test]
    fn free_and_negative_bounded_variables() {
        // min x + y, x free, y in [-3, -1], x + y >= -10, x - y <= 4
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        let y = lp.add_var("y", -3.0, -1.0, 1.0);
        lp.add_constraint("a", [(x, 1.0), (y, 1.0)], Relation::Ge, -10.0);
        lp.add_constraint("b", [(x, 1.0), (y, -1.0)], Relation::Le, 4.0);
        let s = solve(&lp);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective + 10.0).abs() < 1e-9, "{s:?}");
        assert!(lp.max_relative_violation(&s.x) < 1e-9);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, 2.0);
        lp.add_constraint("a", [(x, 1.0), (y, 1.0)], Relation::Eq, 4.0);
        lp.add_constraint("b", [(x, 2.0), (y, 2.0)], Relation::Eq, 8.0);
        lp.add_constraint("c", [(y, 1.0)], Relation::Le, 3.0);
        let s = solve(&lp);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 7.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_variables_are_substituted() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 2.0, 2.0, 1.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, 1.0);
        lp.add_constraint("a", [(x, 1.0), (y, 1.0)], Relation::Le, 5.0);
        lp.add_constraint("b", [(x, 1.0)], Relation::Le, 3.0);
        let s = solve(&lp);
        assert!((s.objective - 5.0).abs() < 1e-12);
        assert_eq!(s.x[0], 2.0);
    }

    #[test]
    fn duals_close_the_gap_on_a_textbook_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY, 3.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, 5.0);
        lp.add_constraint("r1", [(x, 1.0)], Relation::Le, 4.0);
        lp.add_constraint("r2", [(y, 2.0)], Relation::Le, 12.0);
        lp.add_constraint("r3", [(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
        let s = solve(&lp);
        assert!((s.objective - 36.0).abs() < 1e-9);
        let y = s.duals.unwrap();
        assert!((y[0] - 0.0).abs() < 1e-9 && (y[1] - 1.5).abs() < 1e-9 && (y[2] - 1.0).abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn lazy_rows_reach_the_full_optimum() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 10.0, 1.0);
        let y = lp.add_var("y", 0.0, 10.0, 1.0);
        lp.add_constraint("a", [(x, 1.0)], Relation::Le, 8.0);
        let mut full = lp.clone();
        full.add_constraint("c1", [(x, 1.0), (y, 1.0)], Relation::Le, 12.0);
        full.add_constraint("c2", [(x, 1.0), (y, 3.0)], Relation::Le, 20.0);
        let pool = full.constraints[1..].to_vec();
        let mut sep = |v: &[f64]| pool.iter().filter(|c| c.violation(v) > 1e-9).cloned().collect::<Vec<_>>();
        let lazy = BuiltinSolver::default().solve_lp_lazy(&lp, &mut sep).unwrap();
        let direct = solve(&full);
        assert_eq!(lazy.solution.status, Status::Optimal);
        assert!((lazy.solution.objective - direct.objective).abs() < 1e-9);
        assert!(lazy.rounds >= 2);
    }
}
