//! Second solver backend on top of the `microlp` crate, and the default
//! registry used by the command line.

use std::panic::{catch_unwind, AssertUnwindSafe};

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use qalloc_core::lp::{
    BuiltinSolver, LinearProgram, MilpProgram, Relation, Sense, Solution, Solver, SolverRegistry, Status,
};
use qalloc_core::{Error, Result};

/// Sparse revised simplex with branch-and-bound from `microlp`.
///
/// Reports neither duals nor iteration counts.
#[derive(Debug, Clone, Copy, Default)]
pub struct MicroLpSolver;

impl MicroLpSolver {
    fn run(&self, lp: &LinearProgram, binaries: &[usize]) -> Result<Solution> {
        let dir = match lp.sense {
            Sense::Maximize => OptimizationDirection::Maximize,
            Sense::Minimize => OptimizationDirection::Minimize,
        };
        let mut is_bin = vec![false; lp.num_vars()];
        for &b in binaries {
            is_bin[b] = true;
        }
        let mut p = Problem::new(dir);
        let vars: Vec<Variable> = (0..lp.num_vars())
            .map(|i| {
                if is_bin[i] {
                    p.add_binary_var(lp.objective[i])
                } else {
                    p.add_var(lp.objective[i], (lp.lower[i], lp.upper[i]))
                }
            })
            .collect();
        for c in &lp.constraints {
            let op = match c.relation {
                Relation::Le => ComparisonOp::Le,
                Relation::Eq => ComparisonOp::Eq,
                Relation::Ge => ComparisonOp::Ge,
            };
            p.add_constraint(c.terms.iter().map(|&(j, a)| (vars[j], a)).collect::<Vec<_>>(), op, c.rhs);
        }
        // the crate asserts on some internal states; report those as failures
        let out = catch_unwind(AssertUnwindSafe(|| p.solve()))
            .map_err(|_| Error::Solver("microlp panicked while solving".into()))?;
        match out {
            Ok(sol) => {
                let x: Vec<f64> = vars
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if is_bin[i] { sol.var_value_rounded(v) } else { *sol.var_value(v) })
                    .collect();
                let objective = lp.objective_value(&x);
                let gap = (!binaries.is_empty()).then_some(0.0);
                Ok(Solution { status: Status::Optimal, x, objective, duals: None, iterations: 0, nodes: 0, gap })
            }
            Err(microlp::Error::Infeasible) => Ok(Solution::empty(Status::Infeasible, lp.num_vars())),
            Err(microlp::Error::Unbounded) => Ok(Solution::empty(Status::Unbounded, lp.num_vars())),
            Err(microlp::Error::InternalError(m)) => Err(Error::Solver(format!("microlp: {m}"))),
        }
    }
}

impl Solver for MicroLpSolver {
    fn name(&self) -> &str {
        "microlp"
    }

    fn solve_lp(&self, lp: &LinearProgram) -> Result<Solution> {
        lp.validate()?;
        self.run(lp, &[])
    }

    fn solve_milp(&self, mip: &MilpProgram) -> Result<Solution> {
        mip.validate()?;
        self.run(&mip.base, &mip.binaries)
    }
}

/// `builtin` and `microlp`.
pub fn default_registry() -> SolverRegistry {
    let mut r = SolverRegistry::new();
    r.register(Box::new(BuiltinSolver::default()));
    r.register(Box::new(MicroLpSolver));
    r
}
