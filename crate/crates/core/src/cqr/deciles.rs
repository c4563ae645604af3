use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{CrossSection, FrontierSet};
use crate::error::{Error, Result};

/// Group membership of one DMU.
#[derive(Debug, Clone, PartialEq)]
pub struct DecileEntry {
    pub dmu_id: String,
    /// Row in the cross-section.
    pub index: usize,
    /// 1 = top performers.
    pub group: usize,
    pub nearest_tau: f64,
    /// Secondary ranking score, `y / f(x)` at the median frontier.
    pub score: f64,
}

/// Partition of a cross-section into performance groups.
#[derive(Debug, Clone, PartialEq)]
pub struct DecileAssignment {
    groups: usize,
    entries: Vec<DecileEntry>,
    by_id: BTreeMap<String, usize>,
}

impl DecileAssignment {
    pub fn new(groups: usize, entries: Vec<DecileEntry>) -> Result<Self> {
        if groups == 0 {
            return Err(Error::Validation("at least one group is required".into()));
        }
        let mut by_id = BTreeMap::new();
        for (k, e) in entries.iter().enumerate() {
            if e.group == 0 || e.group > groups {
                return Err(Error::Validation(format!(
                    "DMU '{}' has group {} outside 1..={groups}",
                    e.dmu_id, e.group
                )));
            }
            if by_id.insert(e.dmu_id.clone(), k).is_some() {
                return Err(Error::Validation(format!("DMU '{}' assigned twice", e.dmu_id)));
            }
        }
        Ok(DecileAssignment { groups, entries, by_id })
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn entries(&self) -> &[DecileEntry] {
        &self.entries
    }

    pub fn get(&self, dmu_id: &str) -> Option<&DecileEntry> {
        self.by_id.get(dmu_id).map(|&k| &self.entries[k])
    }

    pub fn group_of(&self, dmu_id: &str) -> Option<usize> {
        self.get(dmu_id).map(|e| e.group)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.groups];
        for e in &self.entries {
            s[e.group - 1] += 1;
        }
        s
    }

    /// Cross-section rows belonging to group `g`.
    pub fn members(&self, g: usize) -> Vec<usize> {
        self.entries.iter().filter(|e| e.group == g).map(|e| e.index).collect()
    }
}

/// Index into the grid of the frontier closest to `y` at `x`; ties go to the
/// lower quantile.
pub fn nearest_quantile_at(set: &FrontierSet, x: &[f64], y: f64) -> usize {
    let mut best = 0;
    let mut best_gap = f64::INFINITY;
    for (k, f) in set.frontiers().iter().enumerate() {
        let gap = (y - f.value_at(x)).abs();
        if gap < best_gap {
            best = k;
            best_gap = gap;
        }
    }
    best
}

/// Nearest grid quantile of a DMU of the set's source cross-section.
pub fn nearest_quantile(set: &FrontierSet, dmu_id: &str) -> Result<f64> {
    let cs = set.source().ok_or_else(|| Error::Lookup("frontier set carries no source data".into()))?;
    let i = cs
        .position(dmu_id)
        .ok_or_else(|| Error::Lookup(format!("DMU '{dmu_id}' is not in the fitted cross-section")))?;
    Ok(set.taus()[nearest_quantile_at(set, &cs.x[i], cs.y[i])])
}

/// Envelope value at τ = 0.5, interpolated linearly between the grid points
/// around it (or the nearest end of the grid).
fn median_value(set: &FrontierSet, x: &[f64]) -> f64 {
    let taus = set.taus();
    let k = taus.partition_point(|&t| t < 0.5);
    if k == 0 {
        return set.frontier(0).value_at(x);
    }
    if k == taus.len() {
        return set.frontier(k - 1).value_at(x);
    }
    let (t0, t1) = (taus[k - 1], taus[k]);
    let w = (0.5 - t0) / (t1 - t0);
    (1.0 - w) * set.frontier(k - 1).value_at(x) + w * set.frontier(k).value_at(x)
}

/// Ranking key of a point: the index of the highest frontier lying on or
/// below it (−1 when below all of them), then `y / f_0.5(x)`.
pub fn efficiency_key(set: &FrontierSet, x: &[f64], y: f64) -> (isize, f64) {
    let tol = 1e-9 * (1.0 + y.abs());
    let level = (0..set.len()).rev().find(|&k| set.frontier(k).value_at(x) <= y + tol).map_or(-1, |k| k as isize);
    let m = median_value(set, x);
    let score = if m > 0.0 { y / m } else { f64::INFINITY };
    (level, score)
}

/// Splits a cross-section into `set.len()` contiguous groups of nearly
/// equal size by descending efficiency; group 1 holds the best performers
/// and the first `N mod K` groups receive one extra member.
pub fn partition_deciles(set: &FrontierSet, cs: &CrossSection) -> Result<DecileAssignment> {
    if cs.is_empty() {
        return Err(Error::Domain("empty cross-section".into()));
    }
    if cs.dim() != set.dim() {
        return Err(Error::Domain(format!("data has {} inputs, frontiers have {}", cs.dim(), set.dim())));
    }
    let n = cs.len();
    let k = set.len();
    let keys: Vec<(isize, f64)> = (0..n).map(|i| efficiency_key(set, &cs.x[i], cs.y[i])).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[b].0.cmp(&keys[a].0).then(keys[b].1.total_cmp(&keys[a].1)).then(a.cmp(&b)));
    let (base, extra) = (n / k, n % k);
    let taus = set.taus();
    let mut entries: Vec<Option<DecileEntry>> = vec![None; n];
    let mut pos = 0;
    for g in 1..=k {
        let size = base + usize::from(g <= extra);
        for &i in &order[pos..pos + size] {
            entries[i] = Some(DecileEntry {
                dmu_id: cs.ids[i].clone(),
                index: i,
                group: g,
                nearest_tau: taus[nearest_quantile_at(set, &cs.x[i], cs.y[i])],
                score: keys[i].1,
            });
        }
        pos += size;
    }
    DecileAssignment::new(k, entries.into_iter().map(|e| e.expect("every row is placed")).collect())
}
