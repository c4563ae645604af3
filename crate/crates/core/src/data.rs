//! Panel data: observations, validation, filtering, deflation and totals.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::cqr::DecileAssignment;
use crate::error::{Error, Result};

/// One DMU in one period.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub dmu_id: String,
    pub period: i32,
    pub output: f64,
    pub inputs: Vec<f64>,
    pub unit_costs: Option<Vec<f64>>,
}

impl Observation {
    pub fn new(dmu_id: impl Into<String>, period: i32, output: f64, inputs: Vec<f64>) -> Self {
        Observation { dmu_id: dmu_id.into(), period, output, inputs, unit_costs: None }
    }

    pub fn with_unit_costs(mut self, costs: Vec<f64>) -> Self {
        self.unit_costs = Some(costs);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let who = || format!("{} ({})", self.dmu_id, self.period);
        if !(self.output.is_finite() && self.output > 0.0) {
            return Err(Error::Validation(format!("{}: output must be positive, got {}", who(), self.output)));
        }
        if let Some(v) = self.inputs.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!("{}: inputs must be nonnegative, got {v}", who())));
        }
        if let Some(c) = &self.unit_costs {
            if c.len() != self.inputs.len() {
                return Err(Error::Validation(format!(
                    "{}: {} unit costs for {} inputs",
                    who(),
                    c.len(),
                    self.inputs.len()
                )));
            }
            if let Some(v) = c.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Validation(format!("{}: unit costs must be nonnegative, got {v}", who())));
            }
        }
        Ok(())
    }
}

/// Logical names of the numeric fields, used by filters and deflation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldNames {
    pub output: String,
    pub inputs: Vec<String>,
    /// One name per input when unit costs are present.
    pub unit_costs: Vec<String>,
}

impl FieldNames {
    /// `output`, `x1`, `x2`, ... and `c1`, `c2`, ...
    pub fn generic(d: usize) -> Self {
        FieldNames {
            output: "output".into(),
            inputs: (1..=d).map(|j| format!("x{j}")).collect(),
            unit_costs: (1..=d).map(|j| format!("c{j}")).collect(),
        }
    }

    pub fn resolve(&self, name: &str) -> Result<Field> {
        if name == self.output {
            return Ok(Field::Output);
        }
        if let Some(j) = self.inputs.iter().position(|n| n == name) {
            return Ok(Field::Input(j));
        }
        if let Some(j) = self.unit_costs.iter().position(|n| n == name) {
            return Ok(Field::UnitCost(j));
        }
        Err(Error::Config(format!("unknown field '{name}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Output,
    Input(usize),
    UnitCost(usize),
}

impl Field {
    /// `None` when the observation has no unit costs.
    pub fn get(self, o: &Observation) -> Option<f64> {
        match self {
            Field::Output => Some(o.output),
            Field::Input(j) => o.inputs.get(j).copied(),
            Field::UnitCost(j) => o.unit_costs.as_ref().and_then(|c| c.get(j).copied()),
        }
    }

    fn scale(self, o: &mut Observation, f: impl Fn(f64) -> f64) {
        match self {
            Field::Output => o.output = f(o.output),
            Field::Input(j) => o.inputs[j] = f(o.inputs[j]),
            Field::UnitCost(j) => {
                if let Some(c) = o.unit_costs.as_mut() {
                    c[j] = f(c[j]);
                }
            }
        }
    }
}

/// A validated, immutable collection of observations sharing one input
/// dimension, unique on `(dmu_id, period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    observations: Vec<Observation>,
    input_dim: usize,
    periods: Vec<i32>,
    fields: FieldNames,
}

impl Panel {
    pub fn new(observations: Vec<Observation>, fields: FieldNames) -> Result<Self> {
        let input_dim = fields.inputs.len();
        if input_dim == 0 {
            return Err(Error::Validation("at least one input is required".into()));
        }
        if !fields.unit_costs.is_empty() && fields.unit_costs.len() != input_dim {
            return Err(Error::Validation("unit-cost names must match the inputs".into()));
        }
        let mut seen = BTreeSet::new();
        let mut periods = BTreeSet::new();
        for o in &observations {
            o.validate()?;
            if o.inputs.len() != input_dim {
                return Err(Error::Validation(format!(
                    "{} ({}): {} inputs, expected {input_dim}",
                    o.dmu_id,
                    o.period,
                    o.inputs.len()
                )));
            }
            if !seen.insert((o.dmu_id.clone(), o.period)) {
                return Err(Error::Validation(format!("duplicate observation {} ({})", o.dmu_id, o.period)));
            }
            periods.insert(o.period);
        }
        Ok(Panel { observations, input_dim, periods: periods.into_iter().collect(), fields })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn periods(&self) -> &[i32] {
        &self.periods
    }

    pub fn fields(&self) -> &FieldNames {
        &self.fields
    }

    pub fn get(&self, dmu_id: &str, period: i32) -> Option<&Observation> {
        self.observations.iter().find(|o| o.dmu_id == dmu_id && o.period == period)
    }

    /// Observations of one period, in panel order.
    pub fn cross_section(&self, period: i32) -> Panel {
        let obs: Vec<Observation> = self.observations.iter().filter(|o| o.period == period).cloned().collect();
        let periods = if obs.is_empty() { vec![] } else { vec![period] };
        Panel { observations: obs, input_dim: self.input_dim, periods, fields: self.fields.clone() }
    }

    /// True when every observation carries unit costs.
    pub fn has_unit_costs(&self) -> bool {
        !self.observations.is_empty() && self.observations.iter().all(|o| o.unit_costs.is_some())
    }

    fn with_observations(&self, observations: Vec<Observation>) -> Panel {
        let periods: BTreeSet<i32> = observations.iter().map(|o| o.period).collect();
        Panel {
            observations,
            input_dim: self.input_dim,
            periods: periods.into_iter().collect(),
            fields: self.fields.clone(),
        }
    }

    /// Multiplies the given fields by `a`; used for unit conversion.
    pub fn rescale(&self, a: f64, fields: &[&str]) -> Result<Panel> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Domain(format!("scale factor must be positive, got {a}")));
        }
        let fs = fields.iter().map(|f| self.fields.resolve(f)).collect::<Result<Vec<_>>>()?;
        let mut obs = self.observations.clone();
        for o in &mut obs {
            for f in &fs {
                f.scale(o, |v| v * a);
            }
        }
        Ok(self.with_observations(obs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Ge,
    Gt,
    Le,
    Lt,
}

/// `field <op> value`, e.g. labour at least one employee.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub field: String,
    pub op: Comparison,
    pub value: f64,
}

impl Threshold {
    pub fn new(field: impl Into<String>, op: Comparison, value: f64) -> Self {
        Threshold { field: field.into(), op, value }
    }
}

/// Keeps the observations satisfying every threshold, preserving order.
/// Rows without the referenced value (absent unit costs) are dropped.
pub fn filter_panel(panel: &Panel, rules: &[Threshold]) -> Result<Panel> {
    let resolved =
        rules.iter().map(|r| Ok((panel.fields.resolve(&r.field)?, r.op, r.value))).collect::<Result<Vec<_>>>()?;
    let keep = |o: &Observation| {
        resolved.iter().all(|&(f, op, t)| match f.get(o) {
            None => false,
            Some(v) => match op {
                Comparison::Ge => v >= t,
                Comparison::Gt => v > t,
                Comparison::Le => v <= t,
                Comparison::Lt => v < t,
            },
        })
    };
    Ok(panel.with_observations(panel.observations.iter().filter(|o| keep(o)).cloned().collect()))
}

/// Period → price deflator, with the base period pinned to exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatorTable {
    base_period: i32,
    values: BTreeMap<i32, f64>,
}

impl DeflatorTable {
    pub fn new(base_period: i32, values: impl IntoIterator<Item = (i32, f64)>) -> Result<Self> {
        let values: BTreeMap<i32, f64> = values.into_iter().collect();
        for (p, v) in &values {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Validation(format!("deflator for {p} must be positive, got {v}")));
            }
        }
        match values.get(&base_period) {
            Some(1.0) => {}
            Some(&v) => return Err(Error::Validation(format!("base-period deflator must be 1, got {v}"))),
            None => return Err(Error::Validation(format!("base period {base_period} missing from deflator table"))),
        }
        Ok(DeflatorTable { base_period, values })
    }

    /// Rebases arbitrary index values (e.g. 2010 = 100) so the base period is 1.
    pub fn rebased(base_period: i32, index: impl IntoIterator<Item = (i32, f64)>) -> Result<Self> {
        let index: BTreeMap<i32, f64> = index.into_iter().collect();
        let b = *index
            .get(&base_period)
            .ok_or_else(|| Error::Validation(format!("base period {base_period} missing from deflator index")))?;
        Self::new(base_period, index.into_iter().map(|(p, v)| (p, if p == base_period { 1.0 } else { v / b })))
    }

    pub fn base_period(&self) -> i32 {
        self.base_period
    }

    pub fn get(&self, period: i32) -> Option<f64> {
        self.values.get(&period).copied()
    }
}

/// Divides each monetary field by its period's deflator.
pub fn deflate(panel: &Panel, table: &DeflatorTable, monetary_fields: &[&str]) -> Result<Panel> {
    let fs = monetary_fields.iter().map(|f| panel.fields.resolve(f)).collect::<Result<Vec<_>>>()?;
    if let Some(p) = panel.periods.iter().find(|p| table.get(**p).is_none()) {
        return Err(Error::Lookup(format!("no deflator for period {p}")));
    }
    let mut obs = panel.observations.clone();
    for o in &mut obs {
        let d = table.values[&o.period];
        for f in &fs {
            f.scale(o, |v| v / d);
        }
    }
    Ok(panel.with_observations(obs))
}

/// Industry input totals and their split over performance groups.
#[derive(Debug, Clone, PartialEq)]
pub struct IndustryTotals {
    pub total: Vec<f64>,
    /// Indexed by group, group 1 (top performers) first.
    pub per_group: Vec<Vec<f64>>,
}

impl IndustryTotals {
    /// Totals without a group split (between-group programs only).
    pub fn global(total: Vec<f64>, groups: usize) -> Self {
        let d = total.len();
        IndustryTotals { total, per_group: vec![vec![0.0; d]; groups] }
    }

    pub fn dim(&self) -> usize {
        self.total.len()
    }

    pub fn groups(&self) -> usize {
        self.per_group.len()
    }

    /// Checks `Σ_g X^g = X` within `1e-6·‖X‖₁`.
    pub fn check_partition(&self) -> Result<()> {
        let tol = 1e-6 * self.total.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        for j in 0..self.dim() {
            let s: f64 = self.per_group.iter().map(|g| g[j]).sum();
            if (s - self.total[j]).abs() > tol {
                return Err(Error::Invariant(format!(
                    "group totals of input {j} sum to {s}, expected {}",
                    self.total[j]
                )));
            }
        }
        Ok(())
    }
}

/// Sums inputs over a single-period cross-section and within each group of
/// `deciles`.
pub fn aggregate_totals(cross_section: &Panel, deciles: &DecileAssignment) -> Result<IndustryTotals> {
    if cross_section.is_empty() {
        return Err(Error::Domain("empty cross-section".into()));
    }
    if cross_section.periods().len() > 1 {
        return Err(Error::Domain(format!("expected one period, found {}", cross_section.periods().len())));
    }
    let d = cross_section.input_dim();
    let k = deciles.groups();
    let mut total = vec![0.0; d];
    let mut per_group = vec![vec![0.0; d]; k];
    let mut used = BTreeSet::new();
    for o in cross_section.observations() {
        let g = deciles
            .group_of(&o.dmu_id)
            .ok_or_else(|| Error::Coverage(format!("DMU '{}' has no group assignment", o.dmu_id)))?;
        used.insert(o.dmu_id.as_str());
        for j in 0..d {
            total[j] += o.inputs[j];
            per_group[g - 1][j] += o.inputs[j];
        }
    }
    if let Some(e) = deciles.entries().iter().find(|e| !used.contains(e.dmu_id.as_str())) {
        return Err(Error::Coverage(format!("assigned DMU '{}' is not in the cross-section", e.dmu_id)));
    }
    Ok(IndustryTotals { total, per_group })
}

/// Convenience: the cross-sectional input sum.
pub fn input_totals(cross_section: &Panel) -> Vec<f64> {
    let mut t = vec![0.0; cross_section.input_dim()];
    for o in cross_section.observations() {
        for (a, b) in t.iter_mut().zip(&o.inputs) {
            *a += b;
        }
    }
    t
}

/// The observation identifiers in panel order; handy for reports.
pub fn dmu_ids(panel: &Panel) -> Vec<String> {
    panel.observations().iter().map(|o| o.dmu_id.to_string()).collect()
}
