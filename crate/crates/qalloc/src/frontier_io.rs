//! Frontier coefficient files: one row per hyperplane with columns `tau`,
//! `dmu_index`, `alpha`, `beta_1..beta_d`, `eps_plus`, `eps_minus`. Reals
//! are written with 17 significant digits so coefficients reload exactly.

use std::path::{Path, PathBuf};

use qalloc_core::cqr::{FrontierSet, QuantileFrontier, Rts, Tau};

use crate::error::{AppError, Result};
use crate::tables::{read_table, Metadata, Table};

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn frontier_table(f: &QuantileFrontier) -> Table {
    let d = f.dim();
    let mut header = vec!["tau".to_string(), "dmu_index".into(), "alpha".into()];
    header.extend((1..=d).map(|j| format!("beta_{j}")));
    header.extend(["eps_plus".into(), "eps_minus".into()]);
    let mut t = Table::new(&header);
    for i in 0..f.len() {
        let mut row = vec![f.tau.to_string(), i.to_string(), sci(f.alpha[i])];
        row.extend(f.beta[i].iter().map(|&b| sci(b)));
        row.extend([sci(f.eps_plus[i]), sci(f.eps_minus[i])]);
        t.push(row);
    }
    t
}

/// Adds the keys [`frontier_from_table`] reads back.
pub fn annotate(meta: &mut Metadata, f: &QuantileFrontier) {
    meta.push("rts", f.rts.as_str());
    meta.push("tau", f.tau);
    meta.push("objective", sci(f.objective));
}

/// Rebuilds a frontier; the returns-to-scale flag comes from the `rts`
/// metadata key (VRS when absent).
pub fn frontier_from_table(meta: &Metadata, t: &Table) -> Result<QuantileFrontier> {
    let rts: Rts = meta.get("rts").unwrap_or("vrs").parse()?;
    let d = t.header.len().checked_sub(5).filter(|d| *d > 0).ok_or_else(|| {
        AppError::Format(format!("frontier table needs at least one beta column, header is {:?}", t.header))
    })?;
    let mut want = vec!["tau".to_string(), "dmu_index".into(), "alpha".into()];
    want.extend((1..=d).map(|j| format!("beta_{j}")));
    want.extend(["eps_plus".into(), "eps_minus".into()]);
    if t.header != want {
        return Err(AppError::Format(format!("frontier header {:?}, expected {:?}", t.header, want)));
    }
    if t.rows.is_empty() {
        return Err(AppError::Format("frontier table has no rows".into()));
    }
    let tau: Tau = t.rows[0][0].parse()?;
    let (mut alpha, mut beta, mut ep, mut em) = (vec![], vec![], vec![], vec![]);
    for (r, row) in t.rows.iter().enumerate() {
        if row[0] != t.rows[0][0] {
            return Err(AppError::Format(format!("row {} has tau {}, file tau is {}", r + 1, row[0], t.rows[0][0])));
        }
        if row[1] != r.to_string() {
            return Err(AppError::Format(format!("row {} has dmu_index {}, expected {r}", r + 1, row[1])));
        }
        alpha.push(t.number(r, "alpha")?);
        beta.push((1..=d).map(|j| t.number(r, &format!("beta_{j}"))).collect::<Result<Vec<_>>>()?);
        ep.push(t.number(r, "eps_plus")?);
        em.push(t.number(r, "eps_minus")?);
    }
    Ok(QuantileFrontier::from_coefficients(tau, rts, alpha, beta, ep, em)?)
}

pub fn frontier_file(dir: &Path, tau: Tau) -> PathBuf {
    match tau {
        Tau::Quantile(t) => dir.join(format!("frontier_tau_{t}.csv")),
        Tau::DeaLimit => dir.join("frontier_dea.csv"),
    }
}

pub fn read_frontier(path: &Path) -> Result<QuantileFrontier> {
    let (meta, t) = read_table(path, "estimate")?;
    frontier_from_table(&meta, &t)
}

/// Loads the frontier files of `taus` from `dir` without source data.
pub fn read_frontier_set(dir: &Path, taus: &[f64]) -> Result<FrontierSet> {
    let fs = taus.iter().map(|&t| read_frontier(&frontier_file(dir, Tau::Quantile(t)))).collect::<Result<Vec<_>>>()?;
    Ok(FrontierSet::new(fs, None)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{parse_table, render};

    #[test]
    fn exact_round_trip() {
        let f = QuantileFrontier::from_coefficients(
            Tau::Quantile(0.15),
            Rts::Crs,
            vec![0.0, 0.0],
            vec![vec![0.1 + 0.2, 1.0 / 3.0], vec![f64::MIN_POSITIVE, 12345.678901234567]],
            vec![0.0, 2.0 / 7.0],
            vec![1e-300, 0.0],
        )
        .unwrap();
        let mut meta = Metadata::default();
        annotate(&mut meta, &f);
        let bytes = render(&meta, &frontier_table(&f)).unwrap();
        let (m, t) = parse_table(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(frontier_from_table(&m, &t).unwrap(), f);
    }

    #[test]
    fn dea_token() {
        let f = QuantileFrontier::from_coefficients(
            Tau::DeaLimit,
            Rts::Vrs,
            vec![1.0],
            vec![vec![2.0]],
            vec![0.0],
            vec![0.5],
        )
        .unwrap();
        let t = frontier_table(&f);
        assert_eq!(t.rows[0][0], "DEA_LIMIT");
        assert_eq!(frontier_from_table(&Metadata::default(), &t).unwrap(), f);
    }

    #[test]
    fn shuffled_rows_are_rejected() {
        let f = QuantileFrontier::from_coefficients(
            Tau::Quantile(0.5),
            Rts::Vrs,
            vec![1.0, 2.0],
            vec![vec![2.0], vec![1.0]],
            vec![0.0; 2],
            vec![0.0; 2],
        )
        .unwrap();
        let mut t = frontier_table(&f);
        t.rows.swap(0, 1);
        assert!(frontier_from_table(&Metadata::default(), &t).is_err());
    }
}
