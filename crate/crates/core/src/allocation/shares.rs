use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::AllocationResult;
use crate::error::{Error, Result};

/// Percentages of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareRow {
    pub group: usize,
    pub inputs: Vec<f64>,
    pub output: f64,
    /// Integer percentages; each column sums to exactly 100.
    pub inputs_rounded: Vec<i64>,
    pub output_rounded: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareTable {
    pub rows: Vec<ShareRow>,
}

/// Largest-remainder rounding of percentages that sum to 100.
fn round_column(p: &[f64]) -> Vec<i64> {
    if p.iter().any(|v| *v < 0.0) {
        return p.iter().map(|v| libm::round(*v) as i64).collect();
    }
    let mut out: Vec<i64> = p.iter().map(|v| libm::floor(*v) as i64).collect();
    let short = 100 - out.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| (p[b] - libm::floor(p[b])).total_cmp(&(p[a] - libm::floor(p[a]))).then(a.cmp(&b)));
    for &i in order.iter().take(short.max(0) as usize) {
        out[i] += 1;
    }
    out
}

fn percentages(values: &[f64], what: &str) -> Result<Vec<f64>> {
    let total: f64 = values.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::Undefined(format!("{what} total is {total}, shares are undefined")));
    }
    Ok(values.iter().map(|v| 100.0 * v / total).collect())
}

/// Per-group percentages of each input and of output in `res`.
pub fn share_table(res: &AllocationResult) -> Result<ShareTable> {
    let k = res.groups();
    let d = res.dim();
    let mut input_cols = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = (1..=k).map(|g| res.group_inputs(g)[j]).collect();
        input_cols.push(percentages(&col, &format!("input {}", j + 1))?);
    }
    let out: Vec<f64> = (1..=k).map(|g| res.group_output(g)).collect();
    let out = percentages(&out, "output")?;
    let rounded_in: Vec<Vec<i64>> = input_cols.iter().map(|c| round_column(c)).collect();
    let rounded_out = round_column(&out);
    let rows = (0..k)
        .map(|g| ShareRow {
            group: g + 1,
            inputs: input_cols.iter().map(|c| c[g]).collect(),
            output: out[g],
            inputs_rounded: rounded_in.iter().map(|c| c[g]).collect(),
            output_rounded: rounded_out[g],
        })
        .collect();
    Ok(ShareTable { rows })
}

impl ShareTable {
    /// `group,input_1,..,output` lines with integer percentages.
    pub fn to_lines(&self, labels: &[String], input_names: &[String]) -> Vec<String> {
        let mut lines = Vec::with_capacity(self.rows.len() + 1);
        let mut head = String::from("decile");
        for n in input_names {
            head.push(',');
            head.push_str(n);
        }
        head.push_str(",output");
        lines.push(head);
        for r in &self.rows {
            let mut l = labels.get(r.group - 1).cloned().unwrap_or_else(|| format!("{}", r.group));
            for v in &r.inputs_rounded {
                l.push_str(&format!(",{v}"));
            }
            l.push_str(&format!(",{}", r.output_rounded));
            lines.push(l);
        }
        lines
    }
}
