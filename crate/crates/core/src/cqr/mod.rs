//! Quantile production frontiers: estimation, evaluation, and performance
//! groups.
//!
//! A fitted frontier is the lower envelope of one affine function per
//! observation, `f(x) = min_i (alpha_i + beta_i·x)`, with `beta_i ≥ 0`.

mod deciles;
mod fit;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::data::Panel;
use crate::error::{Error, Result};

pub use deciles::{
    efficiency_key, nearest_quantile, nearest_quantile_at, partition_deciles, DecileAssignment, DecileEntry,
};
pub use fit::{cqr_program, dea_program, fit_cqr, fit_cqr_with, fit_dea, fit_dea_with, fit_frontier_set, FitOptions};

/// Returns to scale of the fitted technology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rts {
    /// Free intercepts.
    Vrs,
    /// Intercepts fixed at zero.
    Crs,
}

impl Rts {
    pub fn as_str(self) -> &'static str {
        match self {
            Rts::Vrs => "vrs",
            Rts::Crs => "crs",
        }
    }
}

impl core::str::FromStr for Rts {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vrs" => Ok(Rts::Vrs),
            "crs" => Ok(Rts::Crs),
            _ => Err(Error::Config(format!("unknown returns-to-scale '{s}' (expected vrs or crs)"))),
        }
    }
}

/// Quantile level of a frontier, or the envelopment limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    Quantile(f64),
    DeaLimit,
}

impl Tau {
    pub fn value(self) -> Option<f64> {
        match self {
            Tau::Quantile(t) => Some(t),
            Tau::DeaLimit => None,
        }
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tau::Quantile(t) => write!(f, "{t}"),
            Tau::DeaLimit => f.write_str("DEA_LIMIT"),
        }
    }
}

impl core::str::FromStr for Tau {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "DEA_LIMIT" {
            return Ok(Tau::DeaLimit);
        }
        let t: f64 = s.parse().map_err(|_| Error::Config(format!("invalid tau '{s}'")))?;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("tau must lie in (0,1), got {t}")));
        }
        Ok(Tau::Quantile(t))
    }
}

/// One cross-section in estimation form: inputs `x[i]`, outputs `y[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub period: Option<i32>,
    pub ids: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub unit_costs: Option<Vec<Vec<f64>>>,
}

impl CrossSection {
    /// Anonymous data; identifiers are the row positions.
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let ids = (0..y.len()).map(|i| i.to_string()).collect();
        let cs = CrossSection { period: None, ids, x, y, unit_costs: None };
        cs.validate()?;
        Ok(cs)
    }

    /// Requires a panel restricted to a single period.
    pub fn from_panel(panel: &Panel) -> Result<Self> {
        if panel.periods().len() != 1 {
            return Err(Error::Domain(format!(
                "a cross-section needs exactly one period, found {}",
                panel.periods().len()
            )));
        }
        let obs = panel.observations();
        let unit_costs =
            panel.has_unit_costs().then(|| obs.iter().map(|o| o.unit_costs.clone().unwrap_or_default()).collect());
        Ok(CrossSection {
            period: Some(panel.periods()[0]),
            ids: obs.iter().map(|o| o.dmu_id.clone()).collect(),
            x: obs.iter().map(|o| o.inputs.clone()).collect(),
            y: obs.iter().map(|o| o.output).collect(),
            unit_costs,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.y.len();
        if n == 0 {
            return Err(Error::Domain("empty cross-section".into()));
        }
        if self.x.len() != n || self.ids.len() != n {
            return Err(Error::Domain("inputs, outputs and identifiers differ in length".into()));
        }
        let d = self.x[0].len();
        if d == 0 {
            return Err(Error::Domain("at least one input is required".into()));
        }
        for (i, xi) in self.x.iter().enumerate() {
            if xi.len() != d {
                return Err(Error::Domain(format!("row {i} has {} inputs, expected {d}", xi.len())));
            }
            if xi.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Domain(format!("row {i} has a negative or non-finite input")));
            }
            if !self.y[i].is_finite() {
                return Err(Error::Domain(format!("row {i} has a non-finite output")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn position(&self, dmu_id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == dmu_id)
    }
}

/// Work counters of one estimation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FitStats {
    pub rounds: usize,
    pub rows_added: usize,
    pub iterations: usize,
}

/// A fitted quantile (or envelopment) frontier.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFrontier {
    pub tau: Tau,
    pub rts: Rts,
    pub alpha: Vec<f64>,
    pub beta: Vec<Vec<f64>>,
    pub eps_plus: Vec<f64>,
    pub eps_minus: Vec<f64>,
    pub objective: f64,
    pub stats: FitStats,
}

impl QuantileFrontier {
    /// Rebuilds a frontier from exported coefficients; the objective is
    /// recomputed from the residuals.
    pub fn from_coefficients(
        tau: Tau,
        rts: Rts,
        alpha: Vec<f64>,
        beta: Vec<Vec<f64>>,
        eps_plus: Vec<f64>,
        eps_minus: Vec<f64>,
    ) -> Result<Self> {
        let n = alpha.len();
        if n == 0 || beta.len() != n || eps_plus.len() != n || eps_minus.len() != n {
            return Err(Error::Validation("frontier coefficient vectors differ in length".into()));
        }
        let d = beta[0].len();
        if d == 0 || beta.iter().any(|b| b.len() != d) {
            return Err(Error::Validation("frontier slopes differ in dimension".into()));
        }
        let objective = residual_objective(tau, &eps_plus, &eps_minus);
        Ok(QuantileFrontier { tau, rts, alpha, beta, eps_plus, eps_minus, objective, stats: FitStats::default() })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.beta.first().map_or(0, Vec::len)
    }

    /// `alpha_h + beta_h·x`.
    #[inline]
    pub fn plane(&self, h: usize, x: &[f64]) -> f64 {
        self.alpha[h] + self.beta[h].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    /// Lower envelope at `x` without dimension checks.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        (0..self.len()).map(|h| self.plane(h, x)).fold(f64::INFINITY, f64::min)
    }

    /// Lower envelope at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!("point has {} inputs, frontier has {}", x.len(), self.dim())));
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("point has NaN inputs".into()));
        }
        Ok(self.value_at(x))
    }

    /// Hyperplanes within `rel_tol·(1+|min|)` of the minimum at `x`.
    pub fn active(&self, x: &[f64], rel_tol: f64) -> Vec<usize> {
        let vals: Vec<f64> = (0..self.len()).map(|h| self.plane(h, x)).collect();
        let m = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = rel_tol * (1.0 + m.abs());
        (0..vals.len()).filter(|&h| vals[h] - m <= tol).collect()
    }

    /// The fitted value of observation `i`'s own hyperplane at its inputs.
    pub fn fitted(&self, i: usize, x_i: &[f64]) -> f64 {
        self.plane(i, x_i)
    }

    /// Checks sign, concavity, residual and returns-to-scale invariants on
    /// the data the frontier was fitted to.
    pub fn check(&self, cs: &CrossSection, tol: f64) -> Result<()> {
        let n = self.len();
        if cs.len() != n {
            return Err(Error::Invariant(format!("frontier has {n} hyperplanes, data has {} rows", cs.len())));
        }
        for i in 0..n {
            if self.beta[i].iter().any(|b| *b < -tol) {
                return Err(Error::Invariant(format!("negative slope at hyperplane {i}")));
            }
            if self.rts == Rts::Crs && self.alpha[i] != 0.0 {
                return Err(Error::Invariant(format!("nonzero intercept {} under CRS", self.alpha[i])));
            }
            if self.eps_plus[i] < 0.0 || self.eps_minus[i] < 0.0 {
                return Err(Error::Invariant(format!("negative residual at row {i}")));
            }
            let own = self.plane(i, &cs.x[i]);
            let r = cs.y[i] - (own + self.eps_plus[i] - self.eps_minus[i]);
            if r.abs() > tol {
                return Err(Error::Invariant(format!("residual identity off by {r} at row {i}")));
            }
            for h in 0..n {
                let v = own - self.plane(h, &cs.x[i]);
                if v > tol {
                    return Err(Error::Invariant(format!("concavity row ({i},{h}) violated by {v}")));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn residual_objective(tau: Tau, eps_plus: &[f64], eps_minus: &[f64]) -> f64 {
    let sp: f64 = eps_plus.iter().sum();
    let sm: f64 = eps_minus.iter().sum();
    match tau {
        Tau::Quantile(t) => t * sp + (1.0 - t) * sm,
        Tau::DeaLimit => sm,
    }
}

/// The ten-point grid 0.05, 0.15, ..., 0.95.
pub fn standard_grid() -> Vec<f64> {
    (0..10).map(|k| (2 * k + 1) as f64 / 20.0).collect()
}

/// Frontiers over a strictly increasing quantile grid, optionally tied to
/// the cross-section they were fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierSet {
    frontiers: Vec<QuantileFrontier>,
    source: Option<CrossSection>,
}

impl FrontierSet {
    pub fn new(frontiers: Vec<QuantileFrontier>, source: Option<CrossSection>) -> Result<Self> {
        if frontiers.is_empty() {
            return Err(Error::Validation("a frontier set needs at least one frontier".into()));
        }
        let mut prev = 0.0;
        for f in &frontiers {
            let t =
                f.tau.value().ok_or_else(|| Error::Validation("frontier sets hold quantile frontiers only".into()))?;
            if !(t > prev && t < 1.0) {
                return Err(Error::Validation(format!("tau grid must be strictly increasing in (0,1), got {t}")));
            }
            prev = t;
        }
        let d = frontiers[0].dim();
        if frontiers.iter().any(|f| f.dim() != d) {
            return Err(Error::Validation("frontiers differ in input dimension".into()));
        }
        if let Some(cs) = &source {
            if cs.dim() != d || frontiers.iter().any(|f| f.len() != cs.len()) {
                return Err(Error::Validation("frontiers do not match their source data".into()));
            }
        }
        Ok(FrontierSet { frontiers, source })
    }

    pub fn len(&self) -> usize {
        self.frontiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frontiers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.frontiers[0].dim()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.frontiers.iter().filter_map(|f| f.tau.value()).collect()
    }

    pub fn frontiers(&self) -> &[QuantileFrontier] {
        &self.frontiers
    }

    pub fn frontier(&self, k: usize) -> &QuantileFrontier {
        &self.frontiers[k]
    }

    pub fn source(&self) -> Option<&CrossSection> {
        self.source.as_ref()
    }

    /// Frontier serving performance group `g` (1 = top, highest τ).
    pub fn group_frontier(&self, g: usize) -> &QuantileFrontier {
        &self.frontiers[self.len() - g]
    }

    /// `"1 (90-100%)"` style label for group `g`.
    pub fn group_label(&self, g: usize) -> String {
        group_label(g, self.len())
    }
}

pub fn group_label(g: usize, k: usize) -> String {
    let lo = (k - g) as f64 * 100.0 / k as f64;
    let hi = (k - g + 1) as f64 * 100.0 / k as f64;
    if 100 % k == 0 {
        format!("{g} ({}-{}%)", lo as u32, hi as u32)
    } else {
        format!("{g} ({lo:.1}-{hi:.1}%)")
    }
}
