//! Parallel drivers over independent solves and draws.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use qalloc_core::allocation::{solve_allocation, AllocationResult, AllocationScenario};
use qalloc_core::analysis::{oos_mse, MsePrediction};
use qalloc_core::cqr::{fit_cqr, fit_dea, CrossSection, FrontierSet, QuantileFrontier, Rts};
use qalloc_core::data::{IndustryTotals, Panel};
use qalloc_core::lp::Solver;
use qalloc_core::random_alloc::{draw_total, prepare, summarize, RandomAllocationConfig, RandomAllocationSummary};
use qalloc_core::{Error, Result};

/// A fitted frontier and the wall time of its solve.
pub struct Timed<T> {
    pub value: T,
    pub elapsed: Duration,
}

fn timed<T>(f: impl FnOnce() -> T) -> Timed<T> {
    let t = Instant::now();
    let value = f();
    Timed { value, elapsed: t.elapsed() }
}

/// One quantile fit per grid point plus the envelopment fit, in parallel.
pub fn fit_all(
    solver: &dyn Solver,
    cs: &CrossSection,
    taus: &[f64],
    rts: Rts,
) -> Result<(FrontierSet, Vec<Duration>, Timed<QuantileFrontier>)> {
    let (quantiles, dea) = rayon::join(
        || {
            taus.par_iter()
                .map(|&t| {
                    let r = timed(|| fit_cqr(solver, cs, t, rts));
                    r.value.map(|f| (f, r.elapsed))
                })
                .collect::<Result<Vec<_>>>()
        },
        || {
            let r = timed(|| fit_dea(solver, cs, rts));
            r.value.map(|value| Timed { value, elapsed: r.elapsed })
        },
    );
    let (fs, times): (Vec<_>, Vec<_>) = quantiles?.into_iter().unzip();
    Ok((FrontierSet::new(fs, Some(cs.clone()))?, times, dea?))
}

/// Solves every scenario; failures are reported per scenario.
pub fn solve_scenarios(
    solver: &dyn Solver,
    set: &FrontierSet,
    totals: &IndustryTotals,
    scenarios: &[AllocationScenario],
) -> Vec<Timed<Result<AllocationResult>>> {
    scenarios.par_iter().map(|s| timed(|| solve_allocation(solver, set, totals, s))).collect()
}

/// Same totals as [`qalloc_core::random_alloc::simulate`], with the draws
/// spread over threads; results do not depend on the thread count.
pub fn simulate(
    set: &FrontierSet,
    totals: &IndustryTotals,
    cfg: &RandomAllocationConfig,
) -> Result<RandomAllocationSummary> {
    prepare(set, totals, cfg)?;
    let samples: Vec<f64> = (0..cfg.draws).into_par_iter().map(|k| draw_total(set, totals, cfg, k)).collect();
    summarize(samples, cfg.keep_samples)
}

/// Out-of-sample errors for each consecutive pair of `periods`.
pub fn mse_years(solver: &dyn Solver, panel: &Panel, periods: &[i32], taus: &[f64], rts: Rts) -> Result<MsePrediction> {
    if periods.len() < 2 {
        return Err(Error::Domain(format!("need at least two periods, got {}", periods.len())));
    }
    for p in periods {
        if !panel.periods().contains(p) {
            return Err(Error::Lookup(format!("period {p} is not in the data")));
        }
    }
    let years = periods
        .par_windows(2)
        .map(|w| {
            let a = CrossSection::from_panel(&panel.cross_section(w[0]))?;
            let b = CrossSection::from_panel(&panel.cross_section(w[1]))?;
            oos_mse(solver, &a, &b, taus, rts)
        })
        .collect::<Result<Vec<_>>>()?;
    MsePrediction::new(years)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qalloc_core::cqr::{standard_grid, QuantileFrontier, Tau};
    use qalloc_core::random_alloc::simulate as sequential;

    #[test]
    fn parallel_draws_match_sequential() {
        let fs = standard_grid()
            .into_iter()
            .map(|t| {
                QuantileFrontier::from_coefficients(
                    Tau::Quantile(t),
                    Rts::Vrs,
                    vec![0.0, t],
                    vec![vec![1.0], vec![0.3]],
                    vec![0.0; 2],
                    vec![0.0; 2],
                )
                .unwrap()
            })
            .collect();
        let set = FrontierSet::new(fs, None).unwrap();
        let totals = IndustryTotals { total: vec![55.0], per_group: (1..=10).map(|g| vec![g as f64]).collect() };
        let cfg = RandomAllocationConfig { draws: 64, keep_samples: true, ..RandomAllocationConfig::new(9, 3) };
        assert_eq!(simulate(&set, &totals, &cfg).unwrap(), sequential(&set, &totals, &cfg).unwrap());
    }
}
