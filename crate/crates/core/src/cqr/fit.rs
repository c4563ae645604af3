use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{residual_objective, CrossSection, FitStats, FrontierSet, QuantileFrontier, Rts, Tau};
use crate::error::{Error, Result};
use crate::lp::{Constraint, LinearProgram, Relation, Sense, Separator, Solver, Status, VarId};

/// Tuning of the row-generation scheme used by the fitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Concavity rows seeded per observation from its nearest neighbours.
    pub neighbours: usize,
    /// Most-violated rows added per observation and round.
    pub cuts_per_row: usize,
    /// Violation (in internally scaled units) that triggers a new row.
    pub separation_tol: f64,
    pub max_rounds: usize,
    /// When false the complete program is solved in one go.
    pub lazy: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { neighbours: 4, cuts_per_row: 4, separation_tol: 1e-10, max_rounds: 1000, lazy: true }
    }
}

struct Layout {
    n: usize,
    d: usize,
    plus: bool,
}

impl Layout {
    fn alpha(&self, i: usize) -> VarId {
        VarId(i * (self.d + 1))
    }
    fn beta(&self, i: usize, j: usize) -> VarId {
        VarId(i * (self.d + 1) + 1 + j)
    }
    fn eps_plus(&self, i: usize) -> VarId {
        VarId(self.n * (self.d + 1) + i)
    }
    fn eps_minus(&self, i: usize) -> VarId {
        VarId(self.n * (self.d + 1) + if self.plus { self.n } else { 0 } + i)
    }
}

struct Scale {
    x: Vec<f64>,
    y: f64,
}

impl Scale {
    fn unit(d: usize) -> Self {
        Scale { x: vec![1.0; d], y: 1.0 }
    }

    fn of(cs: &CrossSection) -> Self {
        let n = cs.len() as f64;
        let pos = |v: f64| if v > 0.0 && v.is_finite() { v } else { 1.0 };
        let x = (0..cs.dim()).map(|j| pos(cs.x.iter().map(|r| r[j]).sum::<f64>() / n)).collect();
        let y = pos(cs.y.iter().map(|v| v.abs()).sum::<f64>() / n);
        Scale { x, y }
    }
}

fn concavity_row(l: &Layout, xs: &[Vec<f64>], i: usize, h: usize) -> Constraint {
    // own hyperplane at x_i must not exceed hyperplane h at x_i
    let mut terms = Vec::with_capacity(2 * l.d + 2);
    terms.push((l.alpha(i), 1.0));
    terms.push((l.alpha(h), -1.0));
    for j in 0..l.d {
        terms.push((l.beta(i, j), xs[i][j]));
        terms.push((l.beta(h, j), -xs[i][j]));
    }
    Constraint::new(format!("conc_{i}_{h}"), terms, Relation::Le, 0.0)
}

/// Problem without any concavity rows, in scaled units.
fn base_program(cs: &CrossSection, tau: Tau, rts: Rts, s: &Scale) -> (LinearProgram, Layout, Vec<Vec<f64>>) {
    let (n, d) = (cs.len(), cs.dim());
    let plus = matches!(tau, Tau::Quantile(_));
    let l = Layout { n, d, plus };
    let xs: Vec<Vec<f64>> = cs.x.iter().map(|r| r.iter().zip(&s.x).map(|(v, k)| v / k).collect()).collect();
    let mut lp = LinearProgram::new(Sense::Minimize);
    for i in 0..n {
        match rts {
            Rts::Vrs => lp.add_var(format!("alpha_{i}"), f64::NEG_INFINITY, f64::INFINITY, 0.0),
            Rts::Crs => lp.add_var(format!("alpha_{i}"), 0.0, 0.0, 0.0),
        };
        for j in 0..d {
            lp.add_var(format!("beta_{i}_{j}"), 0.0, f64::INFINITY, 0.0);
        }
    }
    let (wp, wm) = match tau {
        Tau::Quantile(t) => (t, 1.0 - t),
        Tau::DeaLimit => (0.0, 1.0),
    };
    if plus {
        for i in 0..n {
            lp.add_var(format!("eps_plus_{i}"), 0.0, f64::INFINITY, wp);
        }
    }
    for i in 0..n {
        lp.add_var(format!("eps_minus_{i}"), 0.0, f64::INFINITY, wm);
    }
    for i in 0..n {
        let mut terms = vec![(l.alpha(i), 1.0), (l.eps_minus(i), -1.0)];
        if plus {
            terms.push((l.eps_plus(i), 1.0));
        }
        terms.extend((0..d).map(|j| (l.beta(i, j), xs[i][j])));
        lp.add_constraint(format!("fit_{i}"), terms, Relation::Eq, cs.y[i] / s.y);
    }
    (lp, l, xs)
}

fn full_program(cs: &CrossSection, tau: Tau, rts: Rts) -> Result<LinearProgram> {
    cs.validate()?;
    let (mut lp, l, xs) = base_program(cs, tau, rts, &Scale::unit(cs.dim()));
    for i in 0..l.n {
        for h in 0..l.n {
            if h != i {
                lp.constraints.push(concavity_row(&l, &xs, i, h));
            }
        }
    }
    Ok(lp)
}

/// The complete quantile-regression program for `tau` in original units,
/// with every pairwise concavity row. Column order: per observation
/// `alpha_i, beta_i_1..d`, then all `eps_plus`, then all `eps_minus`.
pub fn cqr_program(cs: &CrossSection, tau: f64, rts: Rts) -> Result<LinearProgram> {
    check_tau(tau)?;
    full_program(cs, Tau::Quantile(tau), rts)
}

/// The complete envelopment program (no `eps_plus` columns).
pub fn dea_program(cs: &CrossSection, rts: Rts) -> Result<LinearProgram> {
    full_program(cs, Tau::DeaLimit, rts)
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau must lie in (0,1), got {tau}")))
    }
}

fn seed_pairs(xs: &[Vec<f64>], k: usize) -> Vec<(usize, usize)> {
    let n = xs.len();
    let mut pairs = Vec::new();
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        dist.clear();
        for h in (0..n).filter(|&h| h != i) {
            let d2: f64 = xs[i].iter().zip(&xs[h]).map(|(a, b)| (a - b) * (a - b)).sum();
            dist.push((d2, h));
        }
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        pairs.extend(dist.iter().take(k).map(|&(_, h)| (i, h)));
    }
    pairs
}

/// Finds the most violated pairwise concavity rows.
struct Concavity<'a> {
    l: &'a Layout,
    xs: &'a [Vec<f64>],
    present: Vec<bool>,
    opts: &'a FitOptions,
    rounds_left: usize,
    exhausted: bool,
}

impl Separator for Concavity<'_> {
    fn separate(&mut self, v: &[f64]) -> Vec<Constraint> {
        if self.rounds_left == 0 {
            self.exhausted = true;
            return Vec::new();
        }
        self.rounds_left -= 1;
        let (l, xs) = (self.l, self.xs);
        let n = l.n;
        let plane = |h: usize, x: &[f64]| v[l.alpha(h).0] + (0..l.d).map(|j| v[l.beta(h, j).0] * x[j]).sum::<f64>();
        let mut cuts = Vec::new();
        let mut viol: Vec<(f64, usize)> = Vec::new();
        for i in 0..n {
            let own = plane(i, &xs[i]);
            viol.clear();
            for h in 0..n {
                if h == i || self.present[i * n + h] {
                    continue;
                }
                let g = own - plane(h, &xs[i]);
                if g > self.opts.separation_tol * (1.0 + own.abs()) {
                    viol.push((g, h));
                }
            }
            viol.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for &(_, h) in viol.iter().take(self.opts.cuts_per_row) {
                self.present[i * n + h] = true;
                cuts.push(concavity_row(l, xs, i, h));
            }
        }
        cuts
    }

    fn dropped(&mut self, rows: &[Constraint]) {
        for r in rows {
            if let Some((i, h)) = parse_pair(&r.name) {
                self.present[i * self.l.n + h] = false;
            }
        }
    }
}

fn parse_pair(name: &str) -> Option<(usize, usize)> {
    let mut it = name.strip_prefix("conc_")?.split('_');
    Some((it.next()?.parse().ok()?, it.next()?.parse().ok()?))
}

fn fit(solver: &dyn Solver, cs: &CrossSection, tau: Tau, rts: Rts, opts: &FitOptions) -> Result<QuantileFrontier> {
    cs.validate()?;
    let scale = Scale::of(cs);
    let (mut lp, l, xs) = base_program(cs, tau, rts, &scale);
    let n = l.n;
    let mut present = vec![false; n * n];
    let initial: Vec<(usize, usize)> = if opts.lazy {
        seed_pairs(&xs, opts.neighbours)
    } else {
        (0..n).flat_map(|i| (0..n).map(move |h| (i, h))).filter(|(i, h)| i != h).collect()
    };
    for (i, h) in initial {
        present[i * n + h] = true;
        lp.constraints.push(concavity_row(&l, &xs, i, h));
    }

    let mut sep = Concavity { l: &l, xs: &xs, present, opts, rounds_left: opts.max_rounds, exhausted: false };
    let lazy = solver.solve_lp_lazy(&lp, &mut sep)?;
    let exhausted = sep.exhausted;
    let sol = lazy.solution;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!(
            "estimation LP for tau={tau} ended with status {} (n={n}, d={}, rows={}, rounds={})",
            sol.status.as_str(),
            l.d,
            lp.constraints.len() + lazy.rows_added,
            lazy.rounds
        )));
    }
    if exhausted {
        return Err(Error::Solver(format!("row generation for tau={tau} hit the round limit ({})", opts.max_rounds)));
    }

    let alpha: Vec<f64> = (0..n)
        .map(|i| match rts {
            Rts::Crs => 0.0,
            Rts::Vrs => sol.x[l.alpha(i).0] * scale.y,
        })
        .collect();
    let beta: Vec<Vec<f64>> =
        (0..n).map(|i| (0..l.d).map(|j| (sol.x[l.beta(i, j).0] * scale.y / scale.x[j]).max(0.0)).collect()).collect();
    let mut eps_plus = vec![0.0; n];
    let mut eps_minus = vec![0.0; n];
    for i in 0..n {
        let own = alpha[i] + beta[i].iter().zip(&cs.x[i]).map(|(b, x)| b * x).sum::<f64>();
        let r = cs.y[i] - own;
        match tau {
            Tau::Quantile(_) => {
                eps_plus[i] = r.max(0.0);
                eps_minus[i] = (-r).max(0.0);
            }
            // the envelopment program has no upward residual; a tiny
            // positive remainder is solver noise
            Tau::DeaLimit => eps_minus[i] = (-r).max(0.0),
        }
    }
    let objective = residual_objective(tau, &eps_plus, &eps_minus);
    Ok(QuantileFrontier {
        tau,
        rts,
        alpha,
        beta,
        eps_plus,
        eps_minus,
        objective,
        stats: FitStats { rounds: lazy.rounds, rows_added: lazy.rows_added, iterations: sol.iterations },
    })
}

/// Fits the `tau` quantile frontier with default options.
pub fn fit_cqr(solver: &dyn Solver, cs: &CrossSection, tau: f64, rts: Rts) -> Result<QuantileFrontier> {
    fit_cqr_with(solver, cs, tau, rts, &FitOptions::default())
}

pub fn fit_cqr_with(
    solver: &dyn Solver,
    cs: &CrossSection,
    tau: f64,
    rts: Rts,
    opts: &FitOptions,
) -> Result<QuantileFrontier> {
    check_tau(tau)?;
    fit(solver, cs, Tau::Quantile(tau), rts, opts)
}

/// Fits the envelopment (DEA) frontier; `eps_minus` are the per-DMU
/// inefficiencies.
pub fn fit_dea(solver: &dyn Solver, cs: &CrossSection, rts: Rts) -> Result<QuantileFrontier> {
    fit_dea_with(solver, cs, rts, &FitOptions::default())
}

pub fn fit_dea_with(solver: &dyn Solver, cs: &CrossSection, rts: Rts, opts: &FitOptions) -> Result<QuantileFrontier> {
    fit(solver, cs, Tau::DeaLimit, rts, opts)
}

/// Fits one frontier per grid point, sequentially.
pub fn fit_frontier_set(solver: &dyn Solver, cs: &CrossSection, taus: &[f64], rts: Rts) -> Result<FrontierSet> {
    let frontiers = taus.iter().map(|&t| fit_cqr(solver, cs, t, rts)).collect::<Result<Vec<_>>>()?;
    FrontierSet::new(frontiers, Some(cs.clone()))
}
