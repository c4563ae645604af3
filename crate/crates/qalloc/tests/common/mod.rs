//! Reference solvers and instance generators shared by the integration
//! tests. Nothing here calls into the production solvers.

#![allow(dead_code)]

use qalloc_core::cqr::CrossSection;
use qalloc_core::lp::{LinearProgram, MilpProgram, Relation, Sense};
use rand::Rng;

/// Dense `a·x = b` by partial pivoting; `None` when singular.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                let (top, rest) = a.split_at_mut(r);
                for (v, p) in rest[0][c..].iter_mut().zip(&top[c][c..]) {
                    *v -= f * p;
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

fn feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    let tol = |v: f64| 1e-7 * (1.0 + v.abs());
    let in_box = x.iter().zip(lp.lower.iter().zip(&lp.upper)).all(|(v, (l, u))| *v >= l - tol(*l) && *v <= u + tol(*u));
    if !in_box {
        return false;
    }
    lp.constraints.iter().all(|c| c.violation(x) <= tol(c.rhs))
}

/// Best objective over all basic feasible points of a box-bounded LP, or
/// `None` when no vertex is feasible.
pub fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    assert!(lp.lower.iter().chain(&lp.upper).all(|v| v.is_finite()), "oracle needs finite bounds");
    // a vertex of a nonempty box-bounded polytope is fixed by n linearly
    // independent active hyperplanes; equalities are enforced by `feasible`
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![0.0; n];
        for &(j, a) in &c.terms {
            row[j] += a;
        }
        planes.push((row, c.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let mut best: Option<f64> = None;
    for_each_subset(planes.len(), n, &mut |s| {
        if let Some(x) = solve_rows(lp, s.iter().map(|&i| &planes[i])) {
            let v = lp.objective_value(&x);
            best = Some(best.map_or(v, |b| better(lp.sense, b, v)));
        }
    });
    best
}

fn better(sense: Sense, a: f64, b: f64) -> f64 {
    match sense {
        Sense::Minimize => a.min(b),
        Sense::Maximize => a.max(b),
    }
}

fn solve_rows<'a>(lp: &LinearProgram, rows: impl Iterator<Item = &'a (Vec<f64>, f64)>) -> Option<Vec<f64>> {
    let (a, b): (Vec<_>, Vec<_>) = rows.map(|(r, v)| (r.clone(), *v)).unzip();
    let x = gauss(a, b)?;
    feasible(lp, &x).then_some(x)
}

fn for_each_subset(n: usize, k: usize, visit: &mut dyn FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            go(i + 1, n, k, cur, visit);
            cur.pop();
        }
    }
    if k <= n {
        go(0, n, k, &mut Vec::with_capacity(k), visit);
    }
}

/// Fixes every binary both ways and keeps the best vertex-oracle value.
pub fn enumeration_oracle(mip: &MilpProgram) -> Option<f64> {
    let b = mip.binaries.len();
    let mut best: Option<f64> = None;
    for mask in 0..1usize << b {
        let mut lp = mip.base.clone();
        for (k, &j) in mip.binaries.iter().enumerate() {
            let v = (mask >> k & 1) as f64;
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        if let Some(v) = vertex_oracle(&lp) {
            best = Some(best.map_or(v, |w| better(mip.base.sense, w, v)));
        }
    }
    best
}

fn coeff(rng: &mut impl Rng) -> f64 {
    if rng.random_bool(0.35) {
        0.0
    } else {
        rng.random_range(-5..=5) as f64
    }
}

fn add_rows(rng: &mut impl Rng, lp: &mut LinearProgram, m: usize, anchor: &[f64]) {
    let n = lp.num_vars();
    for r in 0..m {
        let row: Vec<f64> = (0..n).map(|_| coeff(rng)).collect();
        let at: f64 = row.iter().zip(anchor).map(|(a, x)| a * x).sum();
        let rel = match rng.random_range(0..20) {
            0..=11 => Relation::Le,
            12..=16 => Relation::Ge,
            _ => Relation::Eq,
        };
        let slack = rng.random_range(0..=3) as f64;
        let rhs = if rng.random_bool(0.08) {
            rng.random_range(-10..=10) as f64
        } else {
            match rel {
                Relation::Le => at + slack,
                Relation::Ge => at - slack,
                Relation::Eq => at,
            }
        };
        lp.add_constraint(
            format!("r{r}"),
            row.iter().enumerate().map(|(j, a)| (qalloc_core::lp::VarId(j), *a)),
            rel,
            rhs,
        );
    }
}

fn random_sense(rng: &mut impl Rng) -> Sense {
    if rng.random_bool(0.5) {
        Sense::Minimize
    } else {
        Sense::Maximize
    }
}

/// Box-bounded LP with integer data, usually feasible through an integer
/// anchor point.
pub fn random_lp(rng: &mut impl Rng, n: usize, m: usize) -> LinearProgram {
    let mut lp = LinearProgram::new(random_sense(rng));
    let mut anchor = Vec::with_capacity(n);
    for j in 0..n {
        let lo = rng.random_range(-3..=0) as f64;
        let up = lo + rng.random_range(1..=6) as f64;
        anchor.push(rng.random_range(lo as i32..=up as i32) as f64);
        lp.add_var(format!("x{j}"), lo, up, coeff(rng));
    }
    add_rows(rng, &mut lp, m, &anchor);
    lp
}

/// Mixed program with `b` binaries and a few bounded continuous columns.
pub fn random_milp(rng: &mut impl Rng, b: usize, c: usize, m: usize) -> MilpProgram {
    let mut mip = MilpProgram::new(LinearProgram::new(random_sense(rng)));
    let mut anchor = Vec::new();
    for j in 0..c {
        let up = rng.random_range(1..=5) as f64;
        anchor.push(rng.random_range(0..=up as i32) as f64);
        mip.base.add_var(format!("c{j}"), 0.0, up, coeff(rng));
    }
    for j in 0..b {
        anchor.push(rng.random_range(0..=1) as f64);
        mip.add_binary(format!("b{j}"), coeff(rng));
    }
    let mut base = std::mem::replace(&mut mip.base, LinearProgram::new(Sense::Minimize));
    add_rows(rng, &mut base, m, &anchor);
    mip.base = base;
    mip
}

/// Output-oriented variable-returns envelope of one-input data at each
/// sample point: the best convex combination using no more input.
pub fn dea_hull_1d(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut best = f64::NEG_INFINITY;
            for j in 0..n {
                if x[j] > x[i] {
                    continue;
                }
                best = best.max(y[j]);
                for k in 0..n {
                    if x[k] > x[i] && y[k] > y[j] {
                        let w = (x[i] - x[j]) / (x[k] - x[j]);
                        best = best.max(y[j] + w * (y[k] - y[j]));
                    }
                }
            }
            best
        })
        .collect()
}

/// Univariate quantile regression under concavity and monotonicity written
/// on the fitted values of the sorted sample instead of hyperplanes.
pub fn sorted_cqr_program(x: &[f64], y: &[f64], tau: f64) -> LinearProgram {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut lp = LinearProgram::new(Sense::Minimize);
    let fit: Vec<_> = (0..n).map(|i| lp.add_var(format!("f{i}"), f64::NEG_INFINITY, f64::INFINITY, 0.0)).collect();
    for i in 0..n {
        let up = lp.add_var(format!("u{i}"), 0.0, f64::INFINITY, tau);
        let dn = lp.add_var(format!("d{i}"), 0.0, f64::INFINITY, 1.0 - tau);
        lp.add_constraint(format!("res{i}"), [(fit[i], 1.0), (up, 1.0), (dn, -1.0)], Relation::Eq, y[i]);
    }
    // distinct abscissae in order, with tied points sharing one value
    let mut knots: Vec<usize> = Vec::new();
    for w in order.windows(2) {
        if x[w[1]] == x[w[0]] {
            lp.add_constraint("tie", [(fit[w[0]], 1.0), (fit[w[1]], -1.0)], Relation::Eq, 0.0);
        }
    }
    for &i in &order {
        if knots.last().is_none_or(|&k| x[k] != x[i]) {
            knots.push(i);
        }
    }
    let slope = |a: usize, b: usize| {
        let h = x[b] - x[a];
        [(fit[b], 1.0 / h), (fit[a], -1.0 / h)]
    };
    for w in knots.windows(3) {
        let mut t = slope(w[1], w[2]).to_vec();
        t.extend(slope(w[0], w[1]).iter().map(|&(v, a)| (v, -a)));
        lp.add_constraint("concave", t, Relation::Le, 0.0);
    }
    if knots.len() >= 2 {
        let k = knots.len();
        lp.add_constraint("monotone", slope(knots[k - 2], knots[k - 1]), Relation::Ge, 0.0);
    }
    lp
}

/// `n` draws of a Cobb-Douglas-type technology scaled by noise in
/// `[0.5, 1.5]`.
pub fn random_dataset(rng: &mut impl Rng, n: usize, d: usize) -> CrossSection {
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(1.0..10.0)).collect()).collect();
    let e = 0.8 / d as f64;
    let y = x.iter().map(|r| r.iter().map(|v: &f64| v.powf(e)).product::<f64>() * rng.random_range(0.5..1.5)).collect();
    CrossSection::new(x, y).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
