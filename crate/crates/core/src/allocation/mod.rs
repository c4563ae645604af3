//! Quantile resource-allocation programs over a [`FrontierSet`].
//!
//! Each performance group `g` receives `n` pseudo-DMUs whose technology is
//! the group's frontier. The four models differ in where inputs may move
//! (across all groups or only inside each group) and whether pseudo-DMUs may
//! exit:
//!
//! | model   | resource rows                       | exit |
//! |---------|-------------------------------------|------|
//! | `lp6`   | `Σ x = γX`                          | no   |
//! | `milp7` | `Σ x ≤ γX`                          | yes  |
//! | `lp8`   | `Σ_i x_gi = γX_g` per group         | no   |
//! | `milp9` | `Σ_i x_gi ≤ γX_g` and `Σ x ≤ γX`    | yes  |

mod program;
mod shares;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cqr::FrontierSet;
use crate::data::IndustryTotals;
use crate::error::{Error, Result};
use crate::lp::Status;

pub use program::{
    allocation_program, audit, prune_hyperplanes, solve_allocation, solve_baseline, solve_exit, solve_within,
    solve_within_exit, AllocationProgram,
};
pub use shares::{share_table, ShareRow, ShareTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Model {
    Lp6,
    Milp7,
    Lp8,
    Milp9,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Lp6, Model::Milp7, Model::Lp8, Model::Milp9];

    pub fn name(self) -> &'static str {
        match self {
            Model::Lp6 => "lp6",
            Model::Milp7 => "milp7",
            Model::Lp8 => "lp8",
            Model::Milp9 => "milp9",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Model::Lp6 | Model::Milp7 => Mode::BetweenAndWithin,
            Model::Lp8 | Model::Milp9 => Mode::WithinOnly,
        }
    }

    pub fn exit(self) -> bool {
        matches!(self, Model::Milp7 | Model::Milp9)
    }

    pub fn from_parts(mode: Mode, exit: bool) -> Model {
        match (mode, exit) {
            (Mode::BetweenAndWithin, false) => Model::Lp6,
            (Mode::BetweenAndWithin, true) => Model::Milp7,
            (Mode::WithinOnly, false) => Model::Lp8,
            (Mode::WithinOnly, true) => Model::Milp9,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model '{s}' (valid: lp6, milp7, lp8, milp9)")))
    }
}

/// Where inputs may be moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    BetweenAndWithin,
    WithinOnly,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum BigMPolicy {
    #[default]
    Auto,
    /// Output bound per group and input bound per input dimension.
    Explicit { output: Vec<f64>, input: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationScenario {
    pub mode: Mode,
    pub exit_allowed: bool,
    /// Multiplier on the aggregate input supply.
    pub gamma: f64,
    /// Pseudo-DMUs per group.
    pub units_per_group: usize,
    pub big_m: BigMPolicy,
}

impl AllocationScenario {
    pub fn new(model: Model, gamma: f64, units_per_group: usize) -> Self {
        AllocationScenario {
            mode: model.mode(),
            exit_allowed: model.exit(),
            gamma,
            units_per_group,
            big_m: BigMPolicy::Auto,
        }
    }

    pub fn model(&self) -> Model {
        Model::from_parts(self.mode, self.exit_allowed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.units_per_group == 0 {
            return Err(Error::Domain("at least one pseudo-DMU per group is required".into()));
        }
        if let BigMPolicy::Explicit { output, input } = &self.big_m {
            if output.iter().chain(input).any(|m| !(m.is_finite() && *m > 0.0)) {
                return Err(Error::Domain("explicit big-M values must be finite and positive".into()));
            }
        }
        Ok(())
    }
}

/// `⌈N/K⌉`.
pub fn units_per_group(observations: usize, groups: usize) -> usize {
    observations.div_ceil(groups).max(1)
}

/// Constants switching off the rows of exited pseudo-DMUs.
#[derive(Debug, Clone, PartialEq)]
pub struct BigM {
    /// Bound on a unit's output, per group.
    pub output: Vec<f64>,
    /// Bound on a unit's inputs, per input dimension.
    pub input: Vec<f64>,
    /// Relaxation of each technology row, per group and hyperplane:
    /// `max(0, -alpha_h)`, the least amount that lets `x = 0, y = 0` pass.
    pub tech: Vec<Vec<f64>>,
}

/// Output bound `max(f_g(γX), 0) + 1` per group, input bound `γX`, and the
/// per-hyperplane technology relaxations.
pub fn compute_big_m(set: &FrontierSet, totals: &IndustryTotals, scen: &AllocationScenario) -> BigM {
    let k = set.len();
    let cap: Vec<f64> = totals.total.iter().map(|v| scen.gamma * v).collect();
    let tech = (1..=k).map(|g| set.group_frontier(g).alpha.iter().map(|a| (-a).max(0.0)).collect()).collect();
    match &scen.big_m {
        BigMPolicy::Auto => BigM {
            output: (1..=k).map(|g| set.group_frontier(g).value_at(&cap).max(0.0) + 1.0).collect(),
            input: cap,
            tech,
        },
        BigMPolicy::Explicit { output, input } => BigM { output: output.clone(), input: input.clone(), tech },
    }
}

/// Optimal plan of one allocation model.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub model: Model,
    pub gamma: f64,
    /// `x[g][i]`, group 1 first.
    pub x: Vec<Vec<Vec<f64>>>,
    pub y: Vec<Vec<f64>>,
    pub active: Vec<Vec<bool>>,
    pub total_output: f64,
    pub status: Status,
    /// Branch-and-bound gap when the node limit stopped the search.
    pub gap: Option<f64>,
    pub nodes: usize,
    pub iterations: usize,
    pub big_m: Option<BigM>,
}

impl AllocationResult {
    pub fn groups(&self) -> usize {
        self.x.len()
    }

    pub fn units(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn dim(&self) -> usize {
        self.x.first().and_then(|g| g.first()).map_or(0, Vec::len)
    }

    /// Inputs used by group `g` (1-based).
    pub fn group_inputs(&self, g: usize) -> Vec<f64> {
        let mut s = vec![0.0; self.dim()];
        for xi in &self.x[g - 1] {
            for (a, b) in s.iter_mut().zip(xi) {
                *a += b;
            }
        }
        s
    }

    pub fn group_output(&self, g: usize) -> f64 {
        self.y[g - 1].iter().sum()
    }

    pub fn total_inputs(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim()];
        for g in 1..=self.groups() {
            for (a, b) in s.iter_mut().zip(self.group_inputs(g)) {
                *a += b;
            }
        }
        s
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().flatten().filter(|a| **a).count()
    }

    /// Smallest gap between an active unit's output and its output big-M.
    pub fn output_m_slack(&self) -> Option<f64> {
        let m = self.big_m.as_ref()?;
        let mut best = f64::INFINITY;
        for (g, ys) in self.y.iter().enumerate() {
            for (i, y) in ys.iter().enumerate() {
                if self.active[g][i] {
                    best = best.min(m.output[g] - y);
                }
            }
        }
        Some(best)
    }
}

pub(crate) fn describe(set: &FrontierSet) -> String {
    format!("{} groups, {} inputs", set.len(), set.dim())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_round_trip() {
        for m in Model::ALL {
            assert_eq!(m.name().parse::<Model>().unwrap(), m);
            assert_eq!(Model::from_parts(m.mode(), m.exit()), m);
        }
        let e = "lp10".parse::<Model>().unwrap_err();
        assert!(matches!(&e, Error::Config(s) if s.contains("lp6, milp7, lp8, milp9")));
    }

    #[test]
    fn units_round_up() {
        assert_eq!(units_per_group(20, 10), 2);
        assert_eq!(units_per_group(23, 10), 3);
        assert_eq!(units_per_group(3, 10), 1);
    }
}
