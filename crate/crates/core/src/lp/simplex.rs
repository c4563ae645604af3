//! Dense-tableau bounded primal simplex (two phases) with a dual simplex used
//! to re-optimise after rows are appended.
//!
//! Every row `a·x rel b` is stored as `a·x + s = b` with a slack whose bounds
//! encode the relation. Variables keep their own bounds; nonbasic columns sit
//! at a finite bound (or at zero when free). Fixed variables are substituted
//! out and rows are scaled to unit max-norm before they enter the tableau.

use alloc::vec;
use alloc::vec::Vec;

use super::{Constraint, LinearProgram, Relation, Sense, SolverOptions, Status};

/// Relative size of the bound perturbation applied on a degenerate stall.
const PERTURB: f64 = 1e-6;
/// Reduced costs up to this size on an unblocked ray are treated as zero.
const RAY_TOL: f64 = 1e-7;
/// Stalls handled by perturbation before falling back to Bland's rule.
const MAX_PERTURB_ROUNDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
    /// Free nonbasic variable held at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Step {
    theta: f64,
    /// `(row, leaves_at_upper)`; `None` is a bound flip of the entering column.
    leave: Option<(usize, bool)>,
}

#[derive(Clone)]
pub(crate) struct Tableau {
    opts: SolverOptions,
    rows: Vec<Vec<f64>>,
    d: Vec<f64>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    state: Vec<VarState>,
    kind: Vec<ColKind>,
    basis: Vec<usize>,
    xb: Vec<f64>,
    // scaled standard-form data, kept for refinement
    a_rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    row_origin: Vec<usize>,
    slack_col: Vec<usize>,
    // variable mapping
    col_of_var: Vec<Option<usize>>,
    fixed_val: Vec<f64>,
    sign: f64,
    n_orig_rows: usize,
    pub(crate) iterations: usize,
    max_iter: usize,
    degenerate_run: usize,
    bland: bool,
    phase1: bool,
    /// Original bounds of columns widened to break a degenerate stall.
    perturbed: Vec<(usize, f64, f64)>,
    perturb_rounds: usize,
    rng: u64,
}

impl Tableau {
    /// Builds the tableau with slack columns basic. Returns `Err(Infeasible)`
    /// when presolve finds an empty row that cannot be satisfied.
    pub(crate) fn new(lp: &LinearProgram, opts: SolverOptions) -> Result<Tableau, Status> {
        let n = lp.num_vars();
        let sign = if lp.sense == Sense::Minimize { 1.0 } else { -1.0 };
        let mut col_of_var = vec![None; n];
        let mut fixed_val = vec![0.0; n];
        let mut lb = Vec::new();
        let mut ub = Vec::new();
        let mut cost = Vec::new();
        let mut kind = Vec::new();
        for j in 0..n {
            if lp.lower[j] == lp.upper[j] {
                fixed_val[j] = lp.lower[j];
            } else {
                col_of_var[j] = Some(lb.len());
                lb.push(lp.lower[j]);
                ub.push(lp.upper[j]);
                cost.push(sign * lp.objective[j]);
                kind.push(ColKind::Structural);
            }
        }
        let nstruct = lb.len();
        let state = (0..nstruct)
            .map(|c| {
                if lb[c].is_finite() {
                    VarState::Lower
                } else if ub[c].is_finite() {
                    VarState::Upper
                } else {
                    VarState::Zero
                }
            })
            .collect();
        let max_iter = opts.max_iterations.unwrap_or(20_000 + 60 * (n + lp.constraints.len()));
        let mut t = Tableau {
            opts,
            rows: Vec::new(),
            d: Vec::new(),
            cost,
            lb,
            ub,
            state,
            kind,
            basis: Vec::new(),
            xb: Vec::new(),
            a_rows: Vec::new(),
            b: Vec::new(),
            row_scale: Vec::new(),
            row_origin: Vec::new(),
            slack_col: Vec::new(),
            col_of_var,
            fixed_val,
            sign,
            n_orig_rows: lp.constraints.len(),
            iterations: 0,
            max_iter,
            degenerate_run: 0,
            bland: false,
            phase1: false,
            perturbed: Vec::new(),
            perturb_rounds: 0,
            rng: 0x9e37_79b9_7f4a_7c15,
        };
        t.d = vec![0.0; t.lb.len()];
        let mut pending = Vec::new();
        for (k, row) in lp.constraints.iter().enumerate() {
            if let Some(sr) = t.standardize(row)? {
                pending.push((k, sr));
            }
        }
        let ncols = t.lb.len() + pending.len();
        for (i, (k, (terms, rhs, scale, rel))) in pending.into_iter().enumerate() {
            let slack = t.lb.len();
            let (slo, shi) = slack_bounds(rel);
            t.lb.push(slo);
            t.ub.push(shi);
            t.cost.push(0.0);
            t.kind.push(ColKind::Slack);
            t.d.push(0.0);
            let mut dense = vec![0.0; ncols];
            for &(c, a) in &terms {
                dense[c] = a;
            }
            dense[slack] = 1.0;
            t.rows.push(dense);
            t.state.push(VarState::Basic(i));
            t.basis.push(slack);
            t.xb.push(0.0);
            t.a_rows.push(terms);
            t.b.push(rhs);
            t.row_scale.push(scale);
            t.row_origin.push(k);
            t.slack_col.push(slack);
        }
        for i in 0..t.rows.len() {
            t.xb[i] = t.b[i] - t.row_activity(i);
        }
        Ok(t)
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.lb.len()
    }

    /// Maps a constraint over original variables onto tableau columns,
    /// moving fixed variables to the right-hand side and scaling the row.
    #[allow(clippy::type_complexity)]
    fn standardize(&self, row: &Constraint) -> Result<Option<(Vec<(usize, f64)>, f64, f64, Relation)>, Status> {
        let mut rhs = row.rhs;
        let mut terms = Vec::with_capacity(row.terms.len());
        for &(j, a) in &row.terms {
            match self.col_of_var[j] {
                Some(c) => terms.push((c, a)),
                None => rhs -= a * self.fixed_val[j],
            }
        }
        let scale = terms.iter().fold(0.0f64, |acc, t| acc.max(t.1.abs()));
        if scale == 0.0 {
            let tol = self.opts.feasibility_tol * (1.0 + row.rhs.abs());
            let ok = match row.relation {
                Relation::Le => rhs >= -tol,
                Relation::Ge => rhs <= tol,
                Relation::Eq => rhs.abs() <= tol,
            };
            return if ok { Ok(None) } else { Err(Status::Infeasible) };
        }
        for t in &mut terms {
            t.1 /= scale;
        }
        Ok(Some((terms, rhs / scale, scale, row.relation)))
    }

    fn value(&self, c: usize) -> f64 {
        match self.state[c] {
            VarState::Basic(r) => self.xb[r],
            VarState::Lower => self.lb[c],
            VarState::Upper => self.ub[c],
            VarState::Zero => 0.0,
        }
    }

    /// `a_i·x` over structural columns for scaled row `i`.
    fn row_activity(&self, i: usize) -> f64 {
        self.a_rows[i].iter().map(|&(c, a)| a * self.value(c)).sum()
    }

    /// Runs phase 1 (if needed) and phase 2.
    pub(crate) fn solve(&mut self) -> Status {
        let needs_phase1 = self.install_artificials();
        if needs_phase1 {
            let st = self.primal();
            if st == Status::IterationLimit {
                return st;
            }
            if !self.retire_artificials() {
                return Status::Infeasible;
            }
        }
        self.set_phase2_costs();
        let st = self.primal();
        if st == Status::Optimal {
            self.refine();
        }
        st
    }

    /// Replaces infeasible basic slacks by artificials. Returns whether any
    /// were needed.
    fn install_artificials(&mut self) -> bool {
        let bad: Vec<usize> = (0..self.m())
            .filter(|&r| {
                let c = self.basis[r];
                self.xb[r] < self.lb[c] || self.xb[r] > self.ub[c]
            })
            .collect();
        if bad.is_empty() {
            return false;
        }
        for &r in &bad {
            let slack = self.basis[r];
            // slack leaves at the bound nearest to zero (all slack bounds contain 0)
            self.state[slack] = if self.lb[slack] == 0.0 { VarState::Lower } else { VarState::Upper };
            let resid = self.b[r] - self.row_activity(r);
            let sigma = if resid >= 0.0 { 1.0 } else { -1.0 };
            let art = self.ncols();
            for row in &mut self.rows {
                row.push(0.0);
            }
            self.lb.push(0.0);
            self.ub.push(f64::INFINITY);
            self.cost.push(0.0);
            self.d.push(0.0);
            self.kind.push(ColKind::Artificial);
            self.state.push(VarState::Basic(r));
            for v in self.rows[r].iter_mut() {
                *v *= sigma;
            }
            self.rows[r][art] = 1.0;
            self.basis[r] = art;
            self.xb[r] = resid.abs();
        }
        // phase-1 costs: one per artificial
        self.phase1 = true;
        self.reset_reduced_costs();
        true
    }

    fn retire_artificials(&mut self) -> bool {
        for r in 0..self.m() {
            let c = self.basis[r];
            if self.kind[c] == ColKind::Artificial {
                let tol = self.opts.feasibility_tol * (1.0 + self.b[r].abs());
                if self.xb[r] > tol {
                    return false;
                }
            }
        }
        for r in 0..self.m() {
            let art = self.basis[r];
            if self.kind[art] != ColKind::Artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for c in 0..self.ncols() {
                if self.kind[c] == ColKind::Artificial || matches!(self.state[c], VarState::Basic(_)) {
                    continue;
                }
                let a = self.rows[r][c].abs();
                if a > 1e-7 && best.is_none_or(|(_, ba)| a > ba) {
                    best = Some((c, a));
                }
            }
            match best {
                Some((c, _)) => {
                    let v = self.value(c);
                    self.pivot(r, c);
                    self.state[art] = VarState::Lower;
                    self.basis[r] = c;
                    self.state[c] = VarState::Basic(r);
                    self.xb[r] = v;
                }
                None => {
                    // redundant row: keep the artificial basic at zero
                    for (c, v) in self.rows[r].iter_mut().enumerate() {
                        if c != art {
                            *v = 0.0;
                        }
                    }
                    self.xb[r] = 0.0;
                }
            }
        }
        for c in 0..self.ncols() {
            if self.kind[c] == ColKind::Artificial {
                self.ub[c] = 0.0;
                if !matches!(self.state[c], VarState::Basic(_)) {
                    self.state[c] = VarState::Lower;
                }
            }
        }
        true
    }

    fn set_phase2_costs(&mut self) {
        self.phase1 = false;
        self.reset_reduced_costs();
    }

    /// Recomputes the reduced costs of the current phase from the tableau.
    fn reset_reduced_costs(&mut self) {
        let c: Vec<f64> = if self.phase1 {
            self.kind.iter().map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 }).collect()
        } else {
            self.cost.clone()
        };
        self.compute_reduced_costs(&c);
    }

    fn compute_reduced_costs(&mut self, cost: &[f64]) {
        let mut d = cost.to_vec();
        for r in 0..self.m() {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (dj, &t) in d.iter_mut().zip(&self.rows[r]) {
                    *dj -= cb * t;
                }
            }
        }
        for r in 0..self.m() {
            d[self.basis[r]] = 0.0;
        }
        self.d = d;
    }

    /// Primal simplex; a perturbation introduced on the way is removed at the
    /// end of phase 2 and the resulting infeasibilities are repaired with the
    /// dual simplex.
    fn primal(&mut self) -> Status {
        loop {
            let st = self.primal_pass();
            if st != Status::Optimal || self.phase1 || self.perturbed.is_empty() {
                return st;
            }
            self.unperturb();
            let st = self.dual();
            if st != Status::Optimal {
                return st;
            }
        }
    }

    fn next_uniform(&mut self) -> f64 {
        // xorshift64*
        self.rng ^= self.rng >> 12;
        self.rng ^= self.rng << 25;
        self.rng ^= self.rng >> 27;
        (self.rng.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Widens the finite bounds of the basic non-artificial columns by small
    /// random amounts so that the current vertex stops being degenerate.
    fn perturb(&mut self) {
        self.perturb_rounds += 1;
        for r in 0..self.m() {
            let c = self.basis[r];
            if self.kind[c] == ColKind::Artificial || self.perturbed.iter().any(|p| p.0 == c) {
                continue;
            }
            let (lo, hi) = (self.lb[c], self.ub[c]);
            let u = self.next_uniform();
            let w = self.next_uniform();
            if lo.is_finite() {
                self.lb[c] = lo - PERTURB * (1.0 + lo.abs()) * (1.0 + u);
            }
            if hi.is_finite() {
                self.ub[c] = hi + PERTURB * (1.0 + hi.abs()) * (1.0 + w);
            }
            self.perturbed.push((c, lo, hi));
        }
        self.degenerate_run = 0;
        self.bland = false;
    }

    fn unperturb(&mut self) {
        for (c, lo, hi) in core::mem::take(&mut self.perturbed) {
            self.lb[c] = lo;
            self.ub[c] = hi;
            if let VarState::Zero = self.state[c] {
                continue;
            }
            if !matches!(self.state[c], VarState::Basic(_)) && lo == hi {
                self.state[c] = VarState::Lower;
            }
        }
        self.refine();
    }

    fn primal_pass(&mut self) -> Status {
        let mut fresh = false;
        // columns whose improving ray was unblocked at noise-level reduced cost
        let mut skip: Vec<usize> = Vec::new();
        loop {
            if self.iterations >= self.max_iter {
                return Status::IterationLimit;
            }
            let Some((j, dir)) = self.price(&skip) else {
                if fresh {
                    return Status::Optimal;
                }
                // confirm optimality against reduced costs free of update drift
                self.reset_reduced_costs();
                fresh = true;
                continue;
            };
            match self.ratio_test(j, dir) {
                Some(step) => {
                    fresh = false;
                    skip.clear();
                    self.apply(j, dir, step);
                }
                None if !fresh => {
                    self.reset_reduced_costs();
                    fresh = true;
                }
                None if self.d[j].abs() <= RAY_TOL => skip.push(j),
                None => return Status::Unbounded,
            }
        }
    }

    fn eligible(&self, c: usize) -> Option<f64> {
        let tol = self.opts.optimality_tol;
        let dj = self.d[c];
        match self.state[c] {
            VarState::Basic(_) => None,
            _ if self.lb[c] == self.ub[c] => None,
            VarState::Lower if dj < -tol => Some(1.0),
            VarState::Upper if dj > tol => Some(-1.0),
            VarState::Zero if dj.abs() > tol => Some(if dj < 0.0 { 1.0 } else { -1.0 }),
            _ => None,
        }
    }

    fn price(&self, skip: &[usize]) -> Option<(usize, f64)> {
        let ok = |c: usize| if skip.contains(&c) { None } else { self.eligible(c) };
        if self.bland {
            return (0..self.ncols()).find_map(|c| ok(c).map(|dir| (c, dir)));
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for c in 0..self.ncols() {
            if let Some(dir) = ok(c) {
                let score = self.d[c].abs();
                if best.is_none_or(|b| score > b.2) {
                    best = Some((c, dir, score));
                }
            }
        }
        best.map(|(c, dir, _)| (c, dir))
    }

    /// Limit on the step for basic row `r` when the entering column moves
    /// with rate `delta` on that row, with bounds relaxed by `slack`.
    fn row_limit(&self, r: usize, delta: f64, slack: f64) -> Option<f64> {
        let bc = self.basis[r];
        if delta < 0.0 {
            let l = self.lb[bc];
            l.is_finite().then(|| ((self.xb[r] - l + slack) / -delta).max(0.0))
        } else {
            let u = self.ub[bc];
            u.is_finite().then(|| ((u - self.xb[r] + slack) / delta).max(0.0))
        }
    }

    fn ratio_test(&self, j: usize, dir: f64) -> Option<Step> {
        let ptol = self.opts.pivot_tol;
        let flip =
            if self.lb[j].is_finite() && self.ub[j].is_finite() { self.ub[j] - self.lb[j] } else { f64::INFINITY };
        if self.bland {
            let mut best = Step { theta: flip, leave: None };
            let mut best_col = usize::MAX;
            for r in 0..self.m() {
                let alpha = self.rows[r][j];
                if alpha.abs() <= ptol {
                    continue;
                }
                let delta = -dir * alpha;
                if let Some(lim) = self.row_limit(r, delta, 0.0) {
                    let bc = self.basis[r];
                    let tie = best.theta.is_finite() && (lim - best.theta).abs() <= 1e-12 * (1.0 + best.theta.abs());
                    if lim < best.theta && !tie || (tie && best.leave.is_some() && bc < best_col) {
                        best = Step { theta: lim, leave: Some((r, delta > 0.0)) };
                        best_col = bc;
                    }
                }
            }
            return if best.theta.is_finite() { Some(best) } else { None };
        }
        // Harris two-pass ratio test
        let relax = self.opts.feasibility_tol * 1e-2;
        let mut theta_max = flip;
        for r in 0..self.m() {
            let alpha = self.rows[r][j];
            if alpha.abs() <= ptol {
                continue;
            }
            if let Some(lim) = self.row_limit(r, -dir * alpha, relax) {
                theta_max = theta_max.min(lim);
            }
        }
        if !theta_max.is_finite() {
            return None;
        }
        if flip <= theta_max {
            return Some(Step { theta: flip, leave: None });
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..self.m() {
            let alpha = self.rows[r][j];
            if alpha.abs() <= ptol {
                continue;
            }
            let delta = -dir * alpha;
            if let Some(lim) = self.row_limit(r, delta, 0.0) {
                if lim <= theta_max && best.is_none_or(|b| alpha.abs() > b.2) {
                    best = Some((r, lim, alpha.abs()));
                }
            }
        }
        best.map(|(r, lim, _)| Step { theta: lim, leave: Some((r, -dir * self.rows[r][j] > 0.0)) })
    }

    fn apply(&mut self, j: usize, dir: f64, step: Step) {
        let theta = step.theta;
        let entering_val = self.value(j) + dir * theta;
        if theta != 0.0 {
            for r in 0..self.m() {
                let alpha = self.rows[r][j];
                if alpha != 0.0 {
                    self.xb[r] -= dir * alpha * theta;
                }
            }
        }
        match step.leave {
            None => {
                self.state[j] = if self.state[j] == VarState::Lower { VarState::Upper } else { VarState::Lower };
            }
            Some((r, to_upper)) => {
                let leaving = self.basis[r];
                self.state[leaving] =
                    if to_upper && self.lb[leaving] != self.ub[leaving] { VarState::Upper } else { VarState::Lower };
                self.pivot(r, j);
                self.basis[r] = j;
                self.state[j] = VarState::Basic(r);
                self.xb[r] = entering_val;
            }
        }
        if theta <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > self.opts.bland_after {
                if self.perturb_rounds < MAX_PERTURB_ROUNDS {
                    self.perturb();
                } else {
                    self.bland = true;
                }
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
        self.iterations += 1;
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let inv = 1.0 / self.rows[r][j];
        let mut prow = core::mem::take(&mut self.rows[r]);
        let mut nz = Vec::new();
        for (c, v) in prow.iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= inv;
                nz.push(c);
            }
        }
        prow[j] = 1.0;
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for &c in &nz {
                    row[c] -= f * prow[c];
                }
                row[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for &c in &nz {
                self.d[c] -= f * prow[c];
            }
            self.d[j] = 0.0;
        }
        self.rows[r] = prow;
    }

    /// One step of iterative refinement of the basic values, using the slack
    /// columns of the tableau as the explicit basis inverse.
    fn refine(&mut self) {
        let m = self.m();
        let mut resid = vec![0.0; m];
        for (i, res) in resid.iter_mut().enumerate() {
            let slack = self.slack_col[i];
            *res = self.b[i] - self.row_activity(i) - self.value(slack);
        }
        if resid.iter().all(|v| *v == 0.0) {
            return;
        }
        for r in 0..m {
            let mut delta = 0.0;
            for (i, &res) in resid.iter().enumerate() {
                if res != 0.0 {
                    delta += self.rows[r][self.slack_col[i]] * res;
                }
            }
            self.xb[r] += delta;
        }
    }

    /// Appends rows to an optimal tableau and re-optimises with the dual
    /// simplex followed by a primal clean-up.
    pub(crate) fn add_rows(&mut self, cons: &[Constraint]) -> Status {
        for row in cons {
            let origin = self.n_orig_rows;
            self.n_orig_rows += 1;
            let sr = match self.standardize(row) {
                Ok(Some(sr)) => sr,
                Ok(None) => continue,
                Err(st) => return st,
            };
            let (terms, rhs, scale, rel) = sr;
            let slack = self.ncols();
            for r in &mut self.rows {
                r.push(0.0);
            }
            let (slo, shi) = slack_bounds(rel);
            self.lb.push(slo);
            self.ub.push(shi);
            self.cost.push(0.0);
            self.d.push(0.0);
            self.kind.push(ColKind::Slack);
            let mut dense = vec![0.0; slack + 1];
            for &(c, a) in &terms {
                dense[c] += a;
            }
            dense[slack] = 1.0;
            for &(c, a) in &terms {
                if let VarState::Basic(k) = self.state[c] {
                    for (v, &t) in dense.iter_mut().zip(&self.rows[k]) {
                        *v -= a * t;
                    }
                    dense[c] = 0.0;
                }
            }
            let i = self.rows.len();
            self.rows.push(dense);
            self.state.push(VarState::Basic(i));
            self.basis.push(slack);
            self.a_rows.push(terms);
            self.b.push(rhs);
            self.row_scale.push(scale);
            self.row_origin.push(origin);
            self.slack_col.push(slack);
            self.xb.push(0.0);
            self.xb[i] = self.b[i] - self.row_activity(i);
        }
        let st = self.dual();
        if st != Status::Optimal {
            return st;
        }
        let st = self.primal();
        if st == Status::Optimal {
            self.refine();
        }
        st
    }

    /// Removes rows appended by [`Tableau::add_rows`] whose slack is basic
    /// and more than `margin` inside its bound. Returns the removed rows'
    /// origin indices (`>= first_lazy`).
    pub(crate) fn drop_slack_rows(
        &mut self,
        first_lazy: usize,
        margin: f64,
        allowed: &dyn Fn(usize) -> bool,
    ) -> Vec<usize> {
        let ncons = self.a_rows.len();
        let mut drop_con = vec![false; ncons];
        let mut drop_col = vec![false; self.ncols()];
        let mut drop_trow = vec![false; self.m()];
        let mut removed = Vec::new();
        for i in 0..ncons {
            if self.row_origin[i] < first_lazy || !allowed(self.row_origin[i]) {
                continue;
            }
            let s = self.slack_col[i];
            let VarState::Basic(k) = self.state[s] else { continue };
            let v = self.xb[k];
            let inside = (self.lb[s] == 0.0 && v > margin) || (self.ub[s] == 0.0 && v < -margin);
            if inside && self.lb[s] != self.ub[s] {
                drop_con[i] = true;
                drop_col[s] = true;
                drop_trow[k] = true;
                removed.push(self.row_origin[i]);
            }
        }
        if removed.is_empty() {
            return removed;
        }
        let mut new_col = vec![usize::MAX; self.ncols()];
        let mut next = 0;
        for (c, slot) in new_col.iter_mut().enumerate() {
            if !drop_col[c] {
                *slot = next;
                next += 1;
            }
        }
        let mut new_trow = vec![usize::MAX; self.m()];
        let mut next = 0;
        for (r, slot) in new_trow.iter_mut().enumerate() {
            if !drop_trow[r] {
                *slot = next;
                next += 1;
            }
        }
        fn keep<T: Copy>(v: &[T], mask: &[bool]) -> Vec<T> {
            v.iter().zip(mask).filter(|(_, &d)| !d).map(|(x, _)| *x).collect()
        }
        let old_rows = core::mem::take(&mut self.rows);
        self.rows =
            old_rows.into_iter().zip(&drop_trow).filter(|(_, &d)| !d).map(|(row, _)| keep(&row, &drop_col)).collect();
        self.lb = keep(&self.lb, &drop_col);
        self.ub = keep(&self.ub, &drop_col);
        self.cost = keep(&self.cost, &drop_col);
        self.d = keep(&self.d, &drop_col);
        self.kind = keep(&self.kind, &drop_col);
        self.state = keep(&self.state, &drop_col)
            .into_iter()
            .map(|s| match s {
                VarState::Basic(r) => VarState::Basic(new_trow[r]),
                other => other,
            })
            .collect();
        self.basis = keep(&self.basis, &drop_trow).into_iter().map(|c| new_col[c]).collect();
        self.xb = keep(&self.xb, &drop_trow);
        self.a_rows =
            core::mem::take(&mut self.a_rows).into_iter().zip(&drop_con).filter(|(_, &d)| !d).map(|(r, _)| r).collect();
        self.b = keep(&self.b, &drop_con);
        self.row_scale = keep(&self.row_scale, &drop_con);
        self.row_origin = keep(&self.row_origin, &drop_con);
        self.slack_col = keep(&self.slack_col, &drop_con).into_iter().map(|c| new_col[c]).collect();
        for c in self.col_of_var.iter_mut().flatten() {
            *c = new_col[*c];
        }
        removed
    }

    fn dual(&mut self) -> Status {
        let ptol = self.opts.pivot_tol;
        let tol = self.opts.feasibility_tol * 1e-2;
        loop {
            if self.iterations >= self.max_iter {
                return Status::IterationLimit;
            }
            let mut leave: Option<(usize, bool, f64)> = None;
            for r in 0..self.m() {
                let bc = self.basis[r];
                let (viol, up) = if self.xb[r] < self.lb[bc] - tol {
                    (self.lb[bc] - self.xb[r], true)
                } else if self.xb[r] > self.ub[bc] + tol {
                    (self.xb[r] - self.ub[bc], false)
                } else {
                    continue;
                };
                if leave.is_none_or(|l| viol > l.2) {
                    leave = Some((r, up, viol));
                }
            }
            let Some((r, increase, _)) = leave else {
                return Status::Optimal;
            };
            // two-pass (Harris) ratio test on the reduced costs
            let dtol = self.opts.optimality_tol;
            let eligible = |c: usize| -> Option<f64> {
                let st = self.state[c];
                if matches!(st, VarState::Basic(_)) || self.lb[c] == self.ub[c] {
                    return None;
                }
                let alpha = self.rows[r][c];
                if alpha.abs() <= ptol {
                    return None;
                }
                // x_r = const - alpha * x_c
                let ok = match st {
                    VarState::Lower => (alpha < 0.0) == increase,
                    VarState::Upper => (alpha > 0.0) == increase,
                    _ => true,
                };
                ok.then_some(alpha)
            };
            let mut bound = f64::INFINITY;
            for c in 0..self.ncols() {
                if let Some(alpha) = eligible(c) {
                    bound = bound.min((self.d[c].abs() + dtol) / alpha.abs());
                }
            }
            let mut enter: Option<(usize, f64, f64)> = None;
            for c in 0..self.ncols() {
                if let Some(alpha) = eligible(c) {
                    let ratio = self.d[c].abs() / alpha.abs();
                    if ratio <= bound && enter.is_none_or(|e| alpha.abs() > e.2) {
                        enter = Some((c, ratio, alpha.abs()));
                    }
                }
            }
            let Some((j, _, _)) = enter else {
                return Status::Infeasible;
            };
            let bc = self.basis[r];
            let target = if increase { self.lb[bc] } else { self.ub[bc] };
            let alpha = self.rows[r][j];
            let step = (self.xb[r] - target) / alpha;
            let entering_val = self.value(j) + step;
            for k in 0..self.m() {
                let a = self.rows[k][j];
                if a != 0.0 {
                    self.xb[k] -= a * step;
                }
            }
            self.state[bc] = if increase || self.lb[bc] == self.ub[bc] { VarState::Lower } else { VarState::Upper };
            self.pivot(r, j);
            self.basis[r] = j;
            self.state[j] = VarState::Basic(r);
            self.xb[r] = entering_val;
            self.iterations += 1;
        }
    }

    /// Values of the original variables.
    pub(crate) fn primal_values(&self) -> Vec<f64> {
        self.col_of_var
            .iter()
            .zip(&self.fixed_val)
            .map(|(c, &f)| match c {
                Some(c) => self.value(*c),
                None => f,
            })
            .collect()
    }

    /// Row multipliers for the original rows (and appended rows, in order).
    /// For a maximisation with `≤` rows they are nonnegative.
    pub(crate) fn duals(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n_orig_rows];
        for i in 0..self.m() {
            // d_slack = -y_i in the internal minimisation
            let yi = -self.d[self.slack_col[i]];
            y[self.row_origin[i]] = self.sign * yi / self.row_scale[i];
        }
        y
    }
}

fn slack_bounds(rel: Relation) -> (f64, f64) {
    match rel {
        Relation::Le => (0.0, f64::INFINITY),
        Relation::Ge => (f64::NEG_INFINITY, 0.0),
        Relation::Eq => (0.0, 0.0),
    }
}
