//! JSON run configuration.

use std::path::{Path, PathBuf};

use qalloc_core::allocation::{AllocationScenario, BigMPolicy, Model};
use qalloc_core::analysis::DeaScenario;
use qalloc_core::cqr::{standard_grid, Rts};
use qalloc_core::data::{Comparison, Threshold};
use qalloc_core::random_alloc::TotalsInterpretation;
use qalloc_core::Error;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csv_panel::Schema;
use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    pub path: PathBuf,
    pub schema: Schema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterRule {
    pub field: String,
    /// One of `>=`, `>`, `<=`, `<`.
    pub op: String,
    pub value: f64,
}

impl FilterRule {
    pub fn threshold(&self) -> Result<Threshold> {
        let op = match self.op.as_str() {
            ">=" => Comparison::Ge,
            ">" => Comparison::Gt,
            "<=" => Comparison::Le,
            "<" => Comparison::Lt,
            o => return Err(Error::Config(format!("unknown comparison '{o}' (valid: >=, >, <=, <)")).into()),
        };
        Ok(Threshold::new(self.field.clone(), op, self.value))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeflatorConfig {
    /// Two columns: period and index value.
    pub path: PathBuf,
    pub base_year: i32,
    /// Monetary columns to divide by the deflator.
    pub fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: String,
    #[serde(default = "one")]
    pub gamma: f64,
    /// Optional restatement of whether the model allows exit; must agree
    /// with `model`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit: Option<bool>,
}

fn one() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn model(&self) -> Result<Model> {
        let m: Model = self.model.parse()?;
        if let Some(e) = self.exit {
            if e != m.exit() {
                return Err(Error::Config(format!("scenario {m} has exit={}, config says exit={e}", m.exit())).into());
            }
        }
        Ok(m)
    }

    /// File-name-safe label, e.g. `lp6_g1.01`.
    pub fn label(&self) -> Result<String> {
        Ok(format!("{}_g{}", self.model()?, self.gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BigMConfig {
    pub output: Vec<f64>,
    pub input: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomConfig {
    #[serde(default = "thousand")]
    pub draws: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "per_decile")]
    pub totals: String,
    #[serde(default)]
    pub keep_samples: bool,
}

fn thousand() -> usize {
    1000
}

fn default_seed() -> u64 {
    42
}

fn per_decile() -> String {
    TotalsInterpretation::default().as_str().into()
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig { draws: thousand(), seed: default_seed(), totals: per_decile(), keep_samples: false }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MseConfig {
    /// Periods to chain into consecutive pairs; all panel periods when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSource,
    #[serde(default)]
    pub filters: Vec<FilterRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deflator: Option<DeflatorConfig>,
    /// Cross-section used by estimate, allocate, random and report; the
    /// latest period when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<i32>,
    #[serde(default = "standard_grid")]
    pub taus: Vec<f64>,
    #[serde(default = "vrs")]
    pub rts: String,
    #[serde(default)]
    pub scenarios: Vec<ScenarioConfig>,
    /// Pseudo-DMUs per group; `ceil(N / K)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units_per_group: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_m: Option<BigMConfig>,
    /// DEA reallocation benchmarks added to the comparison table.
    #[serde(default = "both_dea")]
    pub dea_benchmarks: Vec<String>,
    #[serde(default)]
    pub random: RandomConfig,
    #[serde(default)]
    pub mse: MseConfig,
    #[serde(default = "builtin")]
    pub solver: String,
    #[serde(default = "out")]
    pub output_dir: PathBuf,
    /// Also write each allocation program in LP text format.
    #[serde(default)]
    pub dump_lp: bool,
}

fn vrs() -> String {
    "vrs".into()
}

fn both_dea() -> Vec<String> {
    vec!["dea1".into(), "dea2".into()]
}

fn builtin() -> String {
    "builtin".into()
}

fn out() -> PathBuf {
    "out".into()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Reads `path`; relative data, deflator and output paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut c = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut c.data.path);
        if let Some(d) = c.deflator.as_mut() {
            fix(&mut d.path);
        }
        fix(&mut c.output_dir);
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() {
            return Err(Error::Config("tau grid is empty".into()).into());
        }
        let mut prev = 0.0;
        for &t in &self.taus {
            if !(t > prev && t < 1.0) {
                return Err(
                    Error::Config(format!("tau grid must be strictly increasing inside (0,1); found {t}")).into()
                );
            }
            prev = t;
        }
        self.rts()?;
        for s in &self.scenarios {
            s.model()?;
            if !(s.gamma.is_finite() && s.gamma > 0.0) {
                return Err(Error::Config(format!("scenario gamma must be positive, got {}", s.gamma)).into());
            }
        }
        for f in &self.filters {
            f.threshold()?;
        }
        self.dea_scenarios()?;
        self.totals_interpretation()?;
        if self.random.draws == 0 {
            return Err(Error::Config("random.draws must be at least 1".into()).into());
        }
        if self.units_per_group == Some(0) {
            return Err(Error::Config("units_per_group must be at least 1".into()).into());
        }
        Ok(())
    }

    pub fn rts(&self) -> Result<Rts> {
        Ok(self.rts.parse()?)
    }

    pub fn thresholds(&self) -> Result<Vec<Threshold>> {
        self.filters.iter().map(FilterRule::threshold).collect()
    }

    pub fn totals_interpretation(&self) -> Result<TotalsInterpretation> {
        Ok(self.random.totals.parse()?)
    }

    pub fn dea_scenarios(&self) -> Result<Vec<(String, DeaScenario)>> {
        self.dea_benchmarks
            .iter()
            .map(|n| match n.to_ascii_lowercase().as_str() {
                "dea1" => Ok((n.to_ascii_lowercase(), DeaScenario::dea1())),
                "dea2" => Ok((n.to_ascii_lowercase(), DeaScenario::dea2())),
                _ => Err(Error::Config(format!("unknown DEA benchmark '{n}' (valid: dea1, dea2)")).into()),
            })
            .collect()
    }

    pub fn big_m_policy(&self) -> BigMPolicy {
        match &self.big_m {
            Some(b) => BigMPolicy::Explicit { output: b.output.clone(), input: b.input.clone() },
            None => BigMPolicy::Auto,
        }
    }

    pub fn allocation_scenario(&self, s: &ScenarioConfig, units_per_group: usize) -> Result<AllocationScenario> {
        let mut a = AllocationScenario::new(s.model()?, s.gamma, units_per_group);
        a.big_m = self.big_m_policy();
        a.validate()?;
        Ok(a)
    }

    /// Canonical JSON of the effective configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serialises")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"data": {"path": "d.csv", "schema": {"id": "i", "period": "t", "output": "y", "inputs": ["x"]}}}"#;

    #[test]
    fn defaults() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.taus, standard_grid());
        assert_eq!(c.rts().unwrap(), Rts::Vrs);
        assert_eq!(c.random.draws, 1000);
        assert_eq!(c.solver, "builtin");
        assert_eq!(c.dea_scenarios().unwrap().len(), 2);
        assert_eq!(c.data.schema.delimiter, ',');
    }

    #[test]
    fn unknown_model_lists_valid_names() {
        let text = MINIMAL.replacen('{', r#"{"scenarios": [{"model": "lp7"}], "#, 1);
        let e = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(e.contains("lp6, milp7, lp8, milp9"), "{e}");
    }

    #[test]
    fn exit_flag_must_agree() {
        let ok = MINIMAL.replacen('{', r#"{"scenarios": [{"model": "milp9", "exit": true, "gamma": 1.01}], "#, 1);
        assert!(RunConfig::from_json(&ok).is_ok());
        let bad = MINIMAL.replacen('{', r#"{"scenarios": [{"model": "lp8", "exit": true}], "#, 1);
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn tau_grid_must_increase() {
        let text = MINIMAL.replacen('{', r#"{"taus": [0.5, 0.4], "#, 1);
        assert!(RunConfig::from_json(&text).is_err());
        let text = MINIMAL.replacen('{', r#"{"taus": [0.5, 1.0], "#, 1);
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replacen('{', r#"{"tau": [0.5], "#, 1);
        assert!(matches!(RunConfig::from_json(&text), Err(AppError::Json(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::from_json(MINIMAL).unwrap();
        let mut b = a.clone();
        assert_eq!(a.sha256(), b.sha256());
        b.random.seed = 7;
        assert_ne!(a.sha256(), b.sha256());
    }
}
