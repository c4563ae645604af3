use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cqr::{fit_dea, fit_frontier_set, nearest_quantile_at, CrossSection, FrontierSet, QuantileFrontier, Rts};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense, Solver, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct OosPrediction {
    pub dmu_id: String,
    pub y: f64,
    pub cqr: f64,
    pub dea: f64,
    /// Year-`t` nearest quantile used for the CQR prediction.
    pub nearest_tau: f64,
    /// Inputs lie outside the convex hull of the year-`t` inputs.
    pub extrapolated: bool,
}

/// Out-of-sample errors for one pair of consecutive years.
#[derive(Debug, Clone, PartialEq)]
pub struct MseYear {
    pub from: Option<i32>,
    pub to: Option<i32>,
    pub mse_cqr: f64,
    pub mse_dea: f64,
    /// DMUs present in both years, sorted by id.
    pub predictions: Vec<OosPrediction>,
    /// DMUs present in only one of the years.
    pub excluded: usize,
}

impl MseYear {
    pub fn joined(&self) -> usize {
        self.predictions.len()
    }

    pub fn extrapolated(&self) -> usize {
        self.predictions.iter().filter(|p| p.extrapolated).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsePrediction {
    pub years: Vec<MseYear>,
    pub average_cqr: f64,
    pub average_dea: f64,
}

impl MsePrediction {
    /// Averages the yearly errors.
    pub fn new(years: Vec<MseYear>) -> Result<Self> {
        if years.is_empty() {
            return Err(Error::Domain("no year pairs".into()));
        }
        let n = years.len() as f64;
        let average_cqr = years.iter().map(|y| y.mse_cqr).sum::<f64>() / n;
        let average_dea = years.iter().map(|y| y.mse_dea).sum::<f64>() / n;
        Ok(MsePrediction { years, average_cqr, average_dea })
    }
}

/// Whether `x` is a convex combination of `points`.
pub fn in_hull(solver: &dyn Solver, points: &[Vec<f64>], x: &[f64]) -> Result<bool> {
    if points.is_empty() {
        return Ok(false);
    }
    let d = x.len();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let lam: Vec<_> = (0..points.len()).map(|i| lp.add_var(format!("l{i}"), 0.0, f64::INFINITY, 0.0)).collect();
    lp.add_constraint("convex", lam.iter().map(|&v| (v, 1.0)), Relation::Eq, 1.0);
    for j in 0..d {
        let s = points.iter().map(|p| p[j].abs()).fold(x[j].abs(), f64::max).max(f64::MIN_POSITIVE);
        lp.add_constraint(format!("x{j}"), lam.iter().zip(points).map(|(&v, p)| (v, p[j] / s)), Relation::Eq, x[j] / s);
    }
    let sol = solver.solve_lp(&lp)?;
    match sol.status {
        Status::Optimal => Ok(true),
        Status::Infeasible => Ok(false),
        st => Err(Error::Solver(format!("hull membership LP ended with status {}", st.as_str()))),
    }
}

/// Predicts year `t+1` outputs from year-`t` fits: CQR uses the frontier
/// nearest each DMU in year `t`, DEA subtracts the DMU's year-`t` shortfall
/// from the envelope.
pub fn oos_predictions(
    solver: &dyn Solver,
    set: &FrontierSet,
    dea: &QuantileFrontier,
    year_t: &CrossSection,
    year_t1: &CrossSection,
) -> Result<MseYear> {
    if dea.len() != year_t.len() {
        return Err(Error::Domain(format!(
            "envelope has {} hyperplanes, year-t data has {} rows",
            dea.len(),
            year_t.len()
        )));
    }
    if year_t.dim() != set.dim() || year_t1.dim() != set.dim() {
        return Err(Error::Domain("input dimensions of the two years differ from the frontiers".into()));
    }
    let taus = set.taus();
    let mut ids: Vec<(&String, usize, usize)> =
        year_t1.ids.iter().enumerate().filter_map(|(k, id)| year_t.position(id).map(|i| (id, i, k))).collect();
    ids.sort();
    let excluded = year_t.len() + year_t1.len() - 2 * ids.len();
    if ids.is_empty() {
        return Err(Error::Coverage("no DMU is present in both years".into()));
    }
    let mut predictions = Vec::with_capacity(ids.len());
    for (id, i, k) in ids {
        let q = nearest_quantile_at(set, &year_t.x[i], year_t.y[i]);
        let x1 = &year_t1.x[k];
        predictions.push(OosPrediction {
            dmu_id: id.clone(),
            y: year_t1.y[k],
            cqr: set.frontier(q).value_at(x1),
            dea: dea.value_at(x1) - dea.eps_minus[i],
            nearest_tau: taus[q],
            extrapolated: !in_hull(solver, &year_t.x, x1)?,
        });
    }
    let n = predictions.len() as f64;
    let mse = |f: fn(&OosPrediction) -> f64| predictions.iter().map(|p| (f(p) - p.y) * (f(p) - p.y)).sum::<f64>() / n;
    let mse_cqr = mse(|p| p.cqr);
    let mse_dea = mse(|p| p.dea);
    Ok(MseYear { from: year_t.period, to: year_t1.period, mse_cqr, mse_dea, predictions, excluded })
}

/// Fits year `t` and scores the predictions for year `t+1`.
pub fn oos_mse(
    solver: &dyn Solver,
    year_t: &CrossSection,
    year_t1: &CrossSection,
    taus: &[f64],
    rts: Rts,
) -> Result<MseYear> {
    let set = fit_frontier_set(solver, year_t, taus, rts)?;
    let dea = fit_dea(solver, year_t, rts)?;
    oos_predictions(solver, &set, &dea, year_t, year_t1)
}
