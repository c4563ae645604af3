//! Linear and mixed-binary programs, solutions, and the pluggable solver
//! contract.
//!
//! Problems are assembled with named variables through
//! [`LinearProgram::add_var`] and sparse rows through
//! [`LinearProgram::add_constraint`]. Any backend implementing [`Solver`] can
//! be registered in a [`SolverRegistry`] and selected by name.

mod branch;
mod builtin;
pub(crate) mod simplex;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use branch::branch_and_bound;
pub use builtin::BuiltinSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// Index of a variable inside a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// One row `Σ coeff·x  rel  rhs`, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    /// Builds a row, merging repeated columns and dropping zero coefficients.
    pub fn new(
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Self {
        let terms = merge_terms(terms.into_iter().map(|(v, a)| (v.0, a)));
        Constraint { name: name.into(), terms, relation, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub names: Vec<String>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            constraints: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Registers a variable with bounds `[lower, upper]` (either may be
    /// infinite) and objective coefficient `cost`.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> VarId {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(name.into());
        VarId(self.objective.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint::new(name, terms, relation, rhs));
        self.constraints.len() - 1
    }

    pub fn var_index(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(VarId)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::InvalidProblem("program has no variables".into()));
        }
        if self.lower.len() != n || self.upper.len() != n || self.names.len() != n {
            return Err(Error::InvalidProblem("bound/name vectors do not match variable count".into()));
        }
        for (j, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::InvalidProblem(format!("variable {} has bounds [{l}, {u}]", self.names[j])));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProblem("objective has non-finite coefficients".into()));
        }
        for row in &self.constraints {
            if !row.rhs.is_finite() {
                return Err(Error::InvalidProblem(format!("row {} has non-finite rhs", row.name)));
            }
            for &(j, a) in &row.terms {
                if j >= n || !a.is_finite() {
                    return Err(Error::InvalidProblem(format!("row {} references bad column {j}", row.name)));
                }
            }
        }
        Ok(())
    }

    /// Largest row violation or bound violation of `x`, each measured
    /// relative to `1 + |rhs|` (resp. `1 + |bound|`).
    pub fn max_relative_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|r| r.violation(x) / (1.0 + r.rhs.abs()));
        let bounds = x.iter().enumerate().map(|(j, &v)| {
            let lo = if v < self.lower[j] { (self.lower[j] - v) / (1.0 + self.lower[j].abs()) } else { 0.0 };
            let hi = if v > self.upper[j] { (v - self.upper[j]) / (1.0 + self.upper[j].abs()) } else { 0.0 };
            lo.max(hi)
        });
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

fn merge_terms(terms: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = terms.collect();
    v.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(v.len());
    for (j, a) in v {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

/// A linear program some of whose variables are restricted to {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpProgram {
    pub base: LinearProgram,
    pub binaries: Vec<usize>,
}

impl MilpProgram {
    pub fn new(base: LinearProgram) -> Self {
        MilpProgram { base, binaries: Vec::new() }
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> VarId {
        let v = self.base.add_var(name, 0.0, 1.0, cost);
        self.binaries.push(v.0);
        v
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for &b in &self.binaries {
            if b >= self.base.num_vars() {
                return Err(Error::InvalidProblem(format!("binary index {b} out of range")));
            }
            if self.base.lower[b] != 0.0 || self.base.upper[b] != 1.0 {
                return Err(Error::InvalidProblem(format!("binary {} must have bounds [0, 1]", self.base.names[b])));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row multipliers, sign-normalised so that `Σ rhs·dual` equals the
    /// optimal objective when all variable bounds are `[0, ∞)`.
    pub duals: Option<Vec<f64>>,
    pub iterations: usize,
    pub nodes: usize,
    /// Best bound minus incumbent (MILP only).
    pub gap: Option<f64>,
}

impl Solution {
    pub fn empty(status: Status, n: usize) -> Self {
        Solution {
            status,
            x: alloc::vec![0.0; n],
            objective: f64::NAN,
            duals: None,
            iterations: 0,
            nodes: 0,
            gap: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.x[v.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub integrality_tol: f64,
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    /// `None` picks a limit from the problem size.
    pub max_iterations: Option<usize>,
    pub node_limit: usize,
    pub depth_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            integrality_tol: 1e-6,
            pivot_tol: 1e-9,
            bland_after: 50,
            max_iterations: None,
            node_limit: 200_000,
            depth_limit: 10_000,
        }
    }
}

/// Either kind of problem accepted by [`SolverRegistry::solve`].
#[derive(Debug, Clone)]
pub enum Problem {
    Lp(LinearProgram),
    Milp(MilpProgram),
}

/// Backend contract. Implementations must be stateless between calls so one
/// instance can serve concurrent solves.
pub trait Solver: Send + Sync {
    fn name(&self) -> &str;

    fn options(&self) -> SolverOptions {
        SolverOptions::default()
    }

    fn solve_lp(&self, lp: &LinearProgram) -> Result<Solution>;

    fn solve_milp(&self, mip: &MilpProgram) -> Result<Solution>;

    /// Solves `lp` with rows supplied lazily by `separator`, which receives
    /// the current optimum and returns violated rows (empty when none
    /// remain).
    ///
    /// The default re-solves from scratch after every round and never drops
    /// rows.
    fn solve_lp_lazy(&self, lp: &LinearProgram, separator: &mut dyn Separator) -> Result<LazySolution> {
        let mut work = lp.clone();
        let mut rounds = 0;
        let mut added = 0;
        let mut iterations = 0;
        loop {
            let mut sol = self.solve_lp(&work)?;
            iterations += sol.iterations;
            rounds += 1;
            if sol.status != Status::Optimal {
                sol.iterations = iterations;
                return Ok(LazySolution { solution: sol, rounds, rows_added: added });
            }
            let cuts = separator.separate(&sol.x);
            if cuts.is_empty() {
                sol.iterations = iterations;
                if let Some(d) = sol.duals.as_mut() {
                    d.truncate(lp.constraints.len());
                }
                return Ok(LazySolution { solution: sol, rounds, rows_added: added });
            }
            added += cuts.len();
            work.constraints.extend(cuts);
        }
    }

    fn solve(&self, problem: &Problem) -> Result<Solution> {
        match problem {
            Problem::Lp(lp) => self.solve_lp(lp),
            Problem::Milp(mip) => self.solve_milp(mip),
        }
    }
}

/// Supplies rows on demand to [`Solver::solve_lp_lazy`].
pub trait Separator {
    /// Rows violated by `x`; empty when `x` is acceptable.
    fn separate(&mut self, x: &[f64]) -> Vec<Constraint>;

    /// Rows the backend discarded after they became slack. They may be
    /// offered again by a later call to [`Separator::separate`].
    fn dropped(&mut self, _rows: &[Constraint]) {}
}

impl<F: FnMut(&[f64]) -> Vec<Constraint>> Separator for F {
    fn separate(&mut self, x: &[f64]) -> Vec<Constraint> {
        self(x)
    }
}

#[derive(Debug, Clone)]
pub struct LazySolution {
    pub solution: Solution,
    pub rounds: usize,
    pub rows_added: usize,
}

/// Name → backend table.
#[derive(Default)]
pub struct SolverRegistry {
    backends: BTreeMap<String, Box<dyn Solver>>,
}

impl SolverRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// A registry holding only the built-in simplex / branch-and-bound backend.
    pub fn with_builtin() -> Self {
        let mut r = Self::new();
        r.register(Box::new(BuiltinSolver::default()));
        r
    }

    pub fn register(&mut self, backend: Box<dyn Solver>) {
        self.backends.insert(backend.name().to_string(), backend);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Solver> {
        self.backends.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            let known: Vec<&str> = self.backends.keys().map(String::as_str).collect();
            Error::Config(format!("unknown solver backend '{name}' (registered: {})", known.join(", ")))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.backends.keys().map(String::as_str)
    }

    pub fn solve(&self, name: &str, problem: &Problem) -> Result<Solution> {
        self.get(name)?.solve(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_terms_sums_duplicates_and_drops_zeros() {
        let t = merge_terms([(2, 1.0), (0, 3.0), (2, -1.0), (1, 0.5)].into_iter());
        assert_eq!(t, alloc::vec![(0, 3.0), (1, 0.5)]);
    }

    #[test]
    fn validate_rejects_inverted_bounds() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_var("x", 2.0, 1.0, 1.0);
        assert!(matches!(lp.validate(), Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn registry_reports_unknown_backend() {
        let reg = SolverRegistry::with_builtin();
        let err = reg.get("foo").err().unwrap();
        assert!(matches!(err, Error::Config(ref m) if m.contains("builtin")));
    }
}
