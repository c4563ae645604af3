use alloc::format;
use alloc::vec::Vec;

use crate::allocation::{AllocationResult, Model};
use crate::cqr::{nearest_quantile_at, CrossSection, DecileAssignment, FrontierSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelEfficiency {
    pub model: Model,
    pub y_star: f64,
    /// `current / Y* · 100`.
    pub efficiency: f64,
    /// `(Y* / current − 1) · 100`.
    pub potential_gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub current: f64,
    pub models: Vec<ModelEfficiency>,
}

impl EfficiencyReport {
    pub fn get(&self, model: Model) -> Option<&ModelEfficiency> {
        self.models.iter().find(|m| m.model == model)
    }

    /// Checks that efficiency falls as constraints are relaxed:
    /// `milp7 ≤ lp6 ≤ lp8` and `milp7 ≤ milp9 ≤ lp8`, each within `tol`.
    pub fn check_ordering(&self, tol: f64) -> Result<()> {
        let chains = [[Model::Milp7, Model::Lp6, Model::Lp8], [Model::Milp7, Model::Milp9, Model::Lp8]];
        for chain in chains {
            for w in chain.windows(2) {
                if let (Some(a), Some(b)) = (self.get(w[0]), self.get(w[1])) {
                    if a.efficiency > b.efficiency + tol {
                        return Err(Error::Invariant(format!(
                            "efficiency of {} ({}) exceeds {} ({})",
                            a.model, a.efficiency, b.model, b.efficiency
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Efficiency of the observed output against each optimum.
pub fn allocative_efficiency(current: &CrossSection, results: &[AllocationResult]) -> Result<EfficiencyReport> {
    let y: f64 = current.y.iter().sum();
    if y == 0.0 || !y.is_finite() {
        return Err(Error::Undefined(format!("current output is {y}; efficiency is undefined")));
    }
    let mut models = Vec::with_capacity(results.len());
    for r in results {
        if r.total_output == 0.0 {
            return Err(Error::Undefined(format!("{} optimum is zero; efficiency is undefined", r.model)));
        }
        models.push(ModelEfficiency {
            model: r.model,
            y_star: r.total_output,
            efficiency: y / r.total_output * 100.0,
            potential_gain: (r.total_output / y - 1.0) * 100.0,
        });
    }
    Ok(EfficiencyReport { current: y, models })
}

/// Σ of each DMU's inputs evaluated on its group's frontier.
pub fn current_output_grouped(set: &FrontierSet, cs: &CrossSection, groups: &DecileAssignment) -> Result<f64> {
    let mut s = 0.0;
    for (i, id) in cs.ids.iter().enumerate() {
        let g = groups.group_of(id).ok_or_else(|| Error::Coverage(format!("DMU '{id}' has no group")))?;
        s += set.group_frontier(g).value_at(&cs.x[i]);
    }
    Ok(s)
}

/// Σ of each DMU's inputs evaluated on its nearest-quantile frontier.
pub fn current_output_nearest(set: &FrontierSet, cs: &CrossSection) -> f64 {
    (0..cs.len()).map(|i| set.frontier(nearest_quantile_at(set, &cs.x[i], cs.y[i])).value_at(&cs.x[i])).sum()
}
