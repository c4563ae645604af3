use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cqr::{nearest_quantile_at, CrossSection, FrontierSet};
use crate::error::{Error, Result};

/// Hyperplanes within this relative distance of the envelope count as
/// supporting; their slopes are averaged.
const ACTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DmuMarginalProduct {
    pub dmu_id: String,
    pub nearest_tau: f64,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalProductReport {
    pub dmus: Vec<DmuMarginalProduct>,
    /// Mean marginal product per input.
    pub mean_marginal_product: Vec<f64>,
    /// Mean unit cost per input, when the data carries unit costs.
    pub mean_unit_cost: Option<Vec<f64>>,
    /// `mean_unit_cost / mean_marginal_product`; `None` for an input whose
    /// mean marginal product is zero.
    pub ratio: Option<Vec<Option<f64>>>,
    /// Why ratios are absent.
    pub notice: Option<String>,
}

/// Slope of the supporting hyperplane of each DMU's nearest-quantile
/// frontier at its own inputs, and industry means.
pub fn marginal_products(set: &FrontierSet, cs: &CrossSection) -> Result<MarginalProductReport> {
    if cs.is_empty() {
        return Err(Error::Domain("empty cross-section".into()));
    }
    if cs.dim() != set.dim() {
        return Err(Error::Domain(format!("data has {} inputs, frontiers have {}", cs.dim(), set.dim())));
    }
    let d = cs.dim();
    let taus = set.taus();
    let mut dmus = Vec::with_capacity(cs.len());
    for i in 0..cs.len() {
        let k = nearest_quantile_at(set, &cs.x[i], cs.y[i]);
        let f = set.frontier(k);
        let act = f.active(&cs.x[i], ACTIVE_TOL);
        let mut beta = vec![0.0; d];
        for &h in &act {
            for j in 0..d {
                beta[j] += f.beta[h][j];
            }
        }
        for b in &mut beta {
            *b /= act.len() as f64;
        }
        dmus.push(DmuMarginalProduct { dmu_id: cs.ids[i].clone(), nearest_tau: taus[k], beta });
    }
    let n = dmus.len() as f64;
    let mean_mp: Vec<f64> = (0..d).map(|j| dmus.iter().map(|m| m.beta[j]).sum::<f64>() / n).collect();
    let (mean_uc, ratio, notice) = match &cs.unit_costs {
        Some(c) => {
            let uc: Vec<f64> = (0..d).map(|j| c.iter().map(|r| r[j]).sum::<f64>() / n).collect();
            let ratio = (0..d).map(|j| (mean_mp[j] != 0.0).then(|| uc[j] / mean_mp[j])).collect();
            (Some(uc), Some(ratio), None)
        }
        None => (None, None, Some(String::from("no unit costs in the data; cost ratios omitted"))),
    };
    Ok(MarginalProductReport { dmus, mean_marginal_product: mean_mp, mean_unit_cost: mean_uc, ratio, notice })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqr::{QuantileFrontier, Rts, Tau};

    fn set(planes: &[(f64, Vec<f64>)]) -> FrontierSet {
        let n = planes.len();
        let f = QuantileFrontier::from_coefficients(
            Tau::Quantile(0.5),
            Rts::Vrs,
            planes.iter().map(|p| p.0).collect(),
            planes.iter().map(|p| p.1.clone()).collect(),
            vec![0.0; n],
            vec![0.0; n],
        )
        .unwrap();
        FrontierSet::new(vec![f], None).unwrap()
    }

    #[test]
    fn single_plane() {
        let cs = CrossSection::new(vec![vec![1.0, 2.0], vec![3.0, 1.0]], vec![2.0, 5.0]).unwrap();
        let r = marginal_products(&set(&[(0.0, vec![2.0, 0.5])]), &cs).unwrap();
        assert!(r.dmus.iter().all(|m| m.beta == [2.0, 0.5]));
        assert!(r.ratio.is_none() && r.notice.is_some());
    }

    #[test]
    fn kink_averages() {
        let cs = CrossSection::new(vec![vec![1.0]], vec![2.0]).unwrap();
        let r = marginal_products(&set(&[(0.0, vec![2.0]), (1.0, vec![1.0])]), &cs).unwrap();
        assert_eq!(r.dmus[0].beta, [1.5]);
    }

    #[test]
    fn costs_equal_to_products_give_unit_ratios() {
        let mut cs = CrossSection::new(vec![vec![1.0, 1.0], vec![2.0, 2.0]], vec![1.0, 2.0]).unwrap();
        cs.unit_costs = Some(vec![vec![0.7, 0.3]; 2]);
        let r = marginal_products(&set(&[(0.0, vec![0.7, 0.3])]), &cs).unwrap();
        for v in r.ratio.unwrap() {
            assert!((v.unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
