//! Random within-group splits of the input totals, evaluated on the group
//! frontiers, as a baseline for the optimal allocations.
//!
//! Every draw owns one ChaCha20 stream per group (`draw · K + g`) derived
//! from the master seed, so draws can be evaluated in any order or in
//! parallel with identical results.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::cqr::FrontierSet;
use crate::data::IndustryTotals;
use crate::error::{Error, Result};

/// Which totals each group splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TotalsInterpretation {
    /// Each group splits its own observed totals `X^g`.
    #[default]
    PerDecileObserved,
    /// Each group splits the full industry total `X`.
    GlobalPerDecile,
}

impl TotalsInterpretation {
    pub fn as_str(self) -> &'static str {
        match self {
            TotalsInterpretation::PerDecileObserved => "per_decile_observed",
            TotalsInterpretation::GlobalPerDecile => "global_per_decile",
        }
    }
}

impl fmt::Display for TotalsInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TotalsInterpretation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_decile_observed" => Ok(TotalsInterpretation::PerDecileObserved),
            "global_per_decile" => Ok(TotalsInterpretation::GlobalPerDecile),
            _ => Err(Error::Config(format!(
                "unknown totals interpretation '{s}' (valid: per_decile_observed, global_per_decile)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomAllocationConfig {
    pub draws: usize,
    pub seed: u64,
    pub totals: TotalsInterpretation,
    pub units_per_group: usize,
    /// Keep every draw's total in the summary.
    pub keep_samples: bool,
}

impl RandomAllocationConfig {
    pub fn new(seed: u64, units_per_group: usize) -> Self {
        RandomAllocationConfig {
            draws: 1000,
            seed,
            totals: TotalsInterpretation::default(),
            units_per_group,
            keep_samples: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::Domain("at least one draw is required".into()));
        }
        if self.units_per_group == 0 {
            return Err(Error::Domain("at least one pseudo-DMU per group is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomAllocationSummary {
    pub draws: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub samples: Option<Vec<f64>>,
}

/// Mean, median (average of the middle pair for even counts) and range.
pub fn summarize(samples: Vec<f64>, keep: bool) -> Result<RandomAllocationSummary> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples to summarise".into()));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    Ok(RandomAllocationSummary {
        draws: n,
        // the running sum can leave the range by an ulp
        mean: mean.clamp(sorted[0], sorted[n - 1]),
        median,
        min: sorted[0],
        max: sorted[n - 1],
        samples: keep.then_some(samples),
    })
}

fn check(set: &FrontierSet, totals: &IndustryTotals, cfg: &RandomAllocationConfig) -> Result<()> {
    cfg.validate()?;
    if totals.dim() != set.dim() {
        return Err(Error::Domain(format!("totals have {} inputs, frontiers have {}", totals.dim(), set.dim())));
    }
    if cfg.totals == TotalsInterpretation::PerDecileObserved && totals.groups() != set.len() {
        return Err(Error::Domain(format!(
            "per-group totals cover {} groups, frontier set has {}",
            totals.groups(),
            set.len()
        )));
    }
    Ok(())
}

/// Totals split by group `g` (1-based).
fn group_totals<'a>(totals: &'a IndustryTotals, cfg: &RandomAllocationConfig, g: usize) -> &'a [f64] {
    match cfg.totals {
        TotalsInterpretation::PerDecileObserved => &totals.per_group[g - 1],
        TotalsInterpretation::GlobalPerDecile => &totals.total,
    }
}

/// Input split of group `g` in draw `draw`: `x[i][j] = X_j · u_ij / Σ_i u_ij`.
pub fn draw_split(
    set: &FrontierSet,
    totals: &IndustryTotals,
    cfg: &RandomAllocationConfig,
    draw: usize,
    g: usize,
) -> Vec<Vec<f64>> {
    let n = cfg.units_per_group;
    let d = set.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream((draw * set.len() + (g - 1)) as u64);
    let mut w = vec![vec![0.0; d]; n];
    for j in 0..d {
        loop {
            for wi in w.iter_mut() {
                wi[j] = rng.random::<f64>();
            }
            if w.iter().any(|wi| wi[j] > 0.0) {
                break;
            }
        }
    }
    let tot = group_totals(totals, cfg, g);
    let sums: Vec<f64> = (0..d).map(|j| w.iter().map(|wi| wi[j]).sum()).collect();
    for wi in w.iter_mut() {
        for j in 0..d {
            wi[j] = tot[j] * wi[j] / sums[j];
        }
    }
    w
}

/// Total output of one draw.
pub fn draw_total(set: &FrontierSet, totals: &IndustryTotals, cfg: &RandomAllocationConfig, draw: usize) -> f64 {
    (1..=set.len())
        .map(|g| {
            let f = set.group_frontier(g);
            draw_split(set, totals, cfg, draw, g).iter().map(|x| f.value_at(x)).sum::<f64>()
        })
        .sum()
}

/// Runs `cfg.draws` draws sequentially and summarises them.
pub fn simulate(
    set: &FrontierSet,
    totals: &IndustryTotals,
    cfg: &RandomAllocationConfig,
) -> Result<RandomAllocationSummary> {
    check(set, totals, cfg)?;
    let samples = (0..cfg.draws).map(|k| draw_total(set, totals, cfg, k)).collect();
    summarize(samples, cfg.keep_samples)
}

/// Validates the inputs of [`draw_total`] for callers that distribute the
/// draws themselves.
pub fn prepare(set: &FrontierSet, totals: &IndustryTotals, cfg: &RandomAllocationConfig) -> Result<()> {
    check(set, totals, cfg)
}
