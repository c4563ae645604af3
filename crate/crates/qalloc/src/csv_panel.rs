//! Delimiter-separated panel files.

use std::collections::HashMap;
use std::io::{Read, Write};

use qalloc_core::data::{DeflatorTable, FieldNames, Observation, Panel};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Maps logical fields to column names. Filters and deflation refer to the
/// output, input and unit-cost fields by these column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub id: String,
    pub period: String,
    pub output: String,
    pub inputs: Vec<String>,
    #[serde(default)]
    pub unit_costs: Vec<String>,
    #[serde(default = "comma")]
    pub delimiter: char,
}

fn comma() -> char {
    ','
}

impl Schema {
    pub fn new(id: &str, period: &str, output: &str, inputs: &[&str]) -> Self {
        Schema {
            id: id.into(),
            period: period.into(),
            output: output.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            unit_costs: Vec::new(),
            delimiter: ',',
        }
    }

    pub fn field_names(&self) -> FieldNames {
        FieldNames { output: self.output.clone(), inputs: self.inputs.clone(), unit_costs: self.unit_costs.clone() }
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| AppError::Format(format!("delimiter '{}' must be a single ASCII character", self.delimiter)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPanel {
    pub panel: Panel,
    /// Rows skipped because a mapped cell was empty or `NA`.
    pub dropped: usize,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "na" | "NaN" | "nan" | ".")
}

/// Reads a panel. Rows with a missing value in any mapped column are
/// dropped and counted; nothing is imputed.
pub fn load_panel<R: Read>(source: R, schema: &Schema) -> Result<LoadedPanel> {
    if schema.inputs.is_empty() {
        return Err(qalloc_core::Error::Config("schema maps no input columns".into()).into());
    }
    if !schema.unit_costs.is_empty() && schema.unit_costs.len() != schema.inputs.len() {
        return Err(qalloc_core::Error::Config(format!(
            "schema maps {} unit-cost columns for {} inputs",
            schema.unit_costs.len(),
            schema.inputs.len()
        ))
        .into());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter_byte()?)
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header: HashMap<String, usize> = rdr.headers()?.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
    let col = |name: &str| {
        header
            .get(name)
            .copied()
            .ok_or_else(|| AppError::from(qalloc_core::Error::Config(format!("column '{name}' not found in header"))))
    };
    let id_c = col(&schema.id)?;
    let period_c = col(&schema.period)?;
    let out_c = col(&schema.output)?;
    let in_c = schema.inputs.iter().map(|n| col(n)).collect::<Result<Vec<_>>>()?;
    let cost_c = schema.unit_costs.iter().map(|n| col(n)).collect::<Result<Vec<_>>>()?;

    let mut obs = Vec::new();
    let mut dropped = 0;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => AppError::Format(format!("data row {}: {e}", k + 1)),
            _ => AppError::Csv(e),
        })?;
        let row = k + 1;
        let mapped = [id_c, period_c, out_c].into_iter().chain(in_c.iter().copied()).chain(cost_c.iter().copied());
        if mapped.into_iter().any(|c| is_missing(&rec[c])) {
            dropped += 1;
            continue;
        }
        let num = |c: usize, name: &str| -> Result<f64> {
            rec[c].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| AppError::Parse {
                row,
                column: name.to_string(),
                value: rec[c].to_string(),
            })
        };
        let period: i32 = rec[period_c].parse().map_err(|_| AppError::Parse {
            row,
            column: schema.period.clone(),
            value: rec[period_c].to_string(),
        })?;
        let inputs = in_c.iter().zip(&schema.inputs).map(|(&c, n)| num(c, n)).collect::<Result<Vec<_>>>()?;
        let mut o = Observation::new(&rec[id_c], period, num(out_c, &schema.output)?, inputs);
        if !cost_c.is_empty() {
            o = o.with_unit_costs(
                cost_c.iter().zip(&schema.unit_costs).map(|(&c, n)| num(c, n)).collect::<Result<_>>()?,
            );
        }
        obs.push(o);
    }
    Ok(LoadedPanel { panel: Panel::new(obs, schema.field_names())?, dropped })
}

/// Writes `panel` with the columns of `schema`, in schema order. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn write_panel<W: Write>(sink: W, panel: &Panel, schema: &Schema) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(schema.delimiter_byte()?).from_writer(sink);
    let mut header = vec![schema.id.as_str(), schema.period.as_str(), schema.output.as_str()];
    header.extend(schema.inputs.iter().map(String::as_str));
    header.extend(schema.unit_costs.iter().map(String::as_str));
    w.write_record(&header)?;
    for o in panel.observations() {
        let mut rec = vec![o.dmu_id.clone(), o.period.to_string(), o.output.to_string()];
        rec.extend(o.inputs.iter().map(f64::to_string));
        if !schema.unit_costs.is_empty() {
            let c = o
                .unit_costs
                .as_ref()
                .ok_or_else(|| AppError::Format(format!("{} ({}) has no unit costs to write", o.dmu_id, o.period)))?;
            rec.extend(c.iter().map(f64::to_string));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| AppError::io("<panel sink>", e))?;
    Ok(())
}

/// Reads a two-column `period,index` table and rebases it so that
/// `base_period` is exactly 1.
pub fn load_deflators<R: Read>(source: R, base_period: i32) -> Result<DeflatorTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(AppError::Format(format!("deflator row {} needs period and value", k + 1)));
        }
        let p: i32 = rec[0].parse().map_err(|_| AppError::Parse {
            row: k + 1,
            column: "period".into(),
            value: rec[0].to_string(),
        })?;
        let v: f64 = rec[1].parse().map_err(|_| AppError::Parse {
            row: k + 1,
            column: "deflator".into(),
            value: rec[1].to_string(),
        })?;
        values.push((p, v));
    }
    Ok(DeflatorTable::rebased(base_period, values)?)
}
