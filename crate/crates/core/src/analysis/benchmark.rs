use alloc::format;
use alloc::vec::Vec;

use crate::allocation::prune_hyperplanes;
use crate::cqr::{CrossSection, QuantileFrontier};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense, Solver, Status, VarId};

/// Limit on the reallocated aggregate inputs, relative to the observed ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregateLimit {
    /// `Σ x ≤ factor · X`.
    AtMost(f64),
    /// `Σ x = X`.
    Fixed,
}

/// Per-DMU input bounds `[lower·x_i, upper·x_i]` and an aggregate limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeaScenario {
    pub lower: f64,
    pub upper: f64,
    pub aggregate: AggregateLimit,
    /// Keep each DMU's year shortfall below the envelope after reallocation.
    pub carry_over: bool,
}

impl DeaScenario {
    /// Inputs may fall 10% or rise 30% per DMU; aggregates may grow by 1%.
    pub fn dea1() -> Self {
        DeaScenario { lower: 0.9, upper: 1.3, aggregate: AggregateLimit::AtMost(1.01), carry_over: true }
    }

    /// As [`DeaScenario::dea1`] with the aggregates held fixed.
    pub fn dea2() -> Self {
        DeaScenario { aggregate: AggregateLimit::Fixed, ..Self::dea1() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeaBenchmark {
    pub total_output: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

/// Reallocates observed inputs among DMUs whose technology is the envelope
/// `dea`, within the per-DMU and aggregate limits of `scen`.
pub fn benchmark_dea_allocation(
    solver: &dyn Solver,
    dea: &QuantileFrontier,
    cs: &CrossSection,
    scen: &DeaScenario,
) -> Result<DeaBenchmark> {
    let n = cs.len();
    let d = cs.dim();
    if dea.len() != n || dea.dim() != d {
        return Err(Error::Domain("envelope does not match the cross-section".into()));
    }
    if !(scen.lower >= 0.0 && scen.lower <= scen.upper && scen.upper.is_finite()) {
        return Err(Error::Domain(format!("invalid DMU bounds [{}, {}]", scen.lower, scen.upper)));
    }
    let total: Vec<f64> = (0..d).map(|j| cs.x.iter().map(|x| x[j]).sum()).collect();
    let cap: Vec<f64> = (0..d).map(|j| cs.x.iter().map(|x| x[j]).fold(0.0, f64::max) * scen.upper).collect();
    let planes = prune_hyperplanes(solver, dea, &cap)?;
    let sx: Vec<f64> = total.iter().map(|t| if *t > 0.0 { *t } else { 1.0 }).collect();
    let sy = cs.y.iter().map(|v| v.abs()).sum::<f64>().max(1.0);

    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut xv: Vec<Vec<VarId>> = Vec::with_capacity(n);
    let mut yv = Vec::with_capacity(n);
    for i in 0..n {
        xv.push(
            (0..d)
                .map(|j| {
                    let o = cs.x[i][j];
                    lp.add_var(format!("x_{i}_{}", j + 1), scen.lower * o / sx[j], scen.upper * o / sx[j], 0.0)
                })
                .collect(),
        );
        yv.push(lp.add_var(format!("y_{i}"), f64::NEG_INFINITY, f64::INFINITY, 1.0));
    }
    for i in 0..n {
        let shift = if scen.carry_over { dea.eps_minus[i] } else { 0.0 };
        for &h in &planes {
            let mut terms = alloc::vec![(yv[i], 1.0)];
            for j in 0..d {
                terms.push((xv[i][j], -dea.beta[h][j] * sx[j] / sy));
            }
            lp.add_constraint(format!("tech_{i}_{h}"), terms, Relation::Le, (dea.alpha[h] - shift) / sy);
        }
    }
    for j in 0..d {
        let (rel, rhs) = match scen.aggregate {
            AggregateLimit::AtMost(f) => (Relation::Le, f * total[j]),
            AggregateLimit::Fixed => (Relation::Eq, total[j]),
        };
        lp.add_constraint(format!("res_{}", j + 1), (0..n).map(|i| (xv[i][j], 1.0)), rel, rhs / sx[j]);
    }
    let sol = solver.solve_lp(&lp)?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Err(Error::Infeasible("DEA benchmark bounds admit no allocation".into())),
        st => return Err(Error::Solver(format!("DEA benchmark LP ended with status {}", st.as_str()))),
    }
    let x: Vec<Vec<f64>> = (0..n).map(|i| (0..d).map(|j| sol.value(xv[i][j]) * sx[j]).collect()).collect();
    let y: Vec<f64> =
        (0..n).map(|i| dea.value_at(&x[i]) - if scen.carry_over { dea.eps_minus[i] } else { 0.0 }).collect();
    Ok(DeaBenchmark { total_output: y.iter().sum(), x, y })
}
