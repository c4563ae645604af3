//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the report is always printed; the process fails when a gating criterion
//! fails.
//!
//! Criteria 8 and 9 need the OECD subset of the Penn World Table 10.01. Point
//! `QALLOC_PWT_CSV` at a CSV export with columns `countrycode`, `year`,
//! `cgdpo`, `emp` and `cn`; without it they report FAIL and print the same
//! statistics on the bundled 22-country sample instead.

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qalloc::backend::MicroLpSolver;
use qalloc::csv_panel::{load_panel, Schema};
use qalloc::pipeline::{fit_all, mse_years};
use qalloc_core::allocation::{audit, solve_allocation, AllocationScenario, Model};
use qalloc_core::analysis::{allocative_efficiency, benchmark_dea_allocation, DeaScenario};
use qalloc_core::cqr::{
    cqr_program, fit_cqr, fit_dea, partition_deciles, standard_grid, CrossSection, FrontierSet, QuantileFrontier, Rts,
    Tau,
};
use qalloc_core::data::{aggregate_totals, IndustryTotals, Panel};
use qalloc_core::lp::{BuiltinSolver, LinearProgram, Relation, Sense, Solver, Status};
use qalloc_core::random_alloc::{draw_total, simulate, RandomAllocationConfig};

use common::*;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
    /// Counts towards the exit status.
    gating: bool,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail, gating: true }
}

fn builtin() -> BuiltinSolver {
    BuiltinSolver::default()
}

fn solver_oracles() -> Outcome {
    let s = builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let mut infeasible = 0;
    for k in 0..200 {
        let (n, m) = (rng.random_range(1..=8), rng.random_range(1..=12));
        let lp = random_lp(&mut rng, n, m);
        let sol = s.solve_lp(&lp).unwrap();
        match (vertex_oracle(&lp), sol.status) {
            (None, Status::Infeasible) => infeasible += 1,
            (Some(v), Status::Optimal) => {
                worst = worst.max((v - sol.objective).abs());
                if (v - sol.objective).abs() > 1e-6 {
                    bad.push(format!("lp {k}: {} vs {v}", sol.objective));
                }
            }
            (o, st) => bad.push(format!("lp {k}: oracle {o:?}, solver {}", st.as_str())),
        }
    }
    let mut mip_worst = 0.0f64;
    for k in 0..100 {
        let (b, c, m) = (rng.random_range(1..=6), rng.random_range(0..=2), rng.random_range(1..=6));
        let mip = random_milp(&mut rng, b, c, m);
        let sol = s.solve_milp(&mip).unwrap();
        match (enumeration_oracle(&mip), sol.status) {
            (None, Status::Infeasible) => infeasible += 1,
            (Some(v), Status::Optimal) => {
                mip_worst = mip_worst.max((v - sol.objective).abs());
                if (v - sol.objective).abs() > 1e-6 {
                    bad.push(format!("milp {k}: {} vs {v}", sol.objective));
                }
            }
            (o, st) => bad.push(format!("milp {k}: oracle {o:?}, solver {}", st.as_str())),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "200 LPs max |diff| {worst:.1e}, 100 MILPs max |diff| {mip_worst:.1e}, {infeasible} infeasible agreed{}",
            if bad.is_empty() { String::new() } else { format!("; mismatches: {}", bad.join(", ")) }
        ),
    )
}

fn datasets() -> Vec<CrossSection> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..50)
        .map(|_| {
            let n = rng.random_range(8..=60);
            let d = rng.random_range(1..=3);
            random_dataset(&mut rng, n, d)
        })
        .collect()
}

fn scale(cs: &CrossSection) -> f64 {
    cs.y.iter().fold(1.0, |m, v| m.max(v.abs()))
}

/// Midpoint concavity and monotonicity on random pairs inside the data box.
fn probe(f: &QuantileFrontier, cs: &CrossSection, rng: &mut impl Rng) -> Result<(), String> {
    let d = cs.dim();
    let hi: Vec<f64> = (0..d).map(|j| cs.x.iter().map(|r| r[j]).fold(0.0, f64::max) * 1.2).collect();
    let pick = |rng: &mut dyn rand::RngCore| -> Vec<f64> { hi.iter().map(|h| rng.random_range(0.0..*h)).collect() };
    for _ in 0..1000 {
        let (p, q) = (pick(rng), pick(rng));
        let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
        let (fp, fq, fm) = (f.evaluate(&p).unwrap(), f.evaluate(&q).unwrap(), f.evaluate(&mid).unwrap());
        let tol = 1e-9 * (1.0 + fp.abs().max(fq.abs()));
        if fm < 0.5 * (fp + fq) - tol {
            return Err(format!("midpoint {mid:?}: {fm} < {}", 0.5 * (fp + fq)));
        }
        let up: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a.max(*b)).collect();
        if f.evaluate(&up).unwrap() < fp - tol {
            return Err(format!("decrease from {p:?} to {up:?}"));
        }
    }
    Ok(())
}

fn cqr_structure(data: &[CrossSection]) -> Outcome {
    let (s, micro) = (builtin(), MicroLpSolver);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut fits = 0;
    for (k, cs) in data.iter().enumerate() {
        for tau in [0.1, 0.5, 0.9] {
            let f = fit_cqr(&s, cs, tau, Rts::Vrs).unwrap();
            fits += 1;
            if f.beta.iter().flatten().any(|b| *b < 0.0) {
                bad.push(format!("set {k} tau {tau}: negative slope"));
            }
            if let Err(e) = f.check(cs, 1e-6 * scale(cs)) {
                bad.push(format!("set {k} tau {tau}: {e}"));
            }
            if let Err(e) = probe(&f, cs, &mut rng) {
                bad.push(format!("set {k} tau {tau}: {e}"));
            }
            let reference = micro.solve_lp(&cqr_program(cs, tau, Rts::Vrs).unwrap()).unwrap();
            let diff = (reference.objective - f.objective).abs() / (1.0 + reference.objective.abs());
            worst = worst.max(diff);
            if reference.status != Status::Optimal || diff > 1e-6 {
                bad.push(format!("set {k} tau {tau}: objective {} vs microlp {}", f.objective, reference.objective));
            }
        }
    }
    outcome(bad.is_empty(), format!("{fits} fits, max relative objective gap to microlp {worst:.1e}{}", list(&bad)))
}

fn list(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failures: {}", bad.iter().take(5).cloned().collect::<Vec<_>>().join("; "))
    }
}

fn dea_limit(data: &[CrossSection]) -> Outcome {
    let s = builtin();
    let mut bad = Vec::new();
    let mut hull_checked = 0;
    for (k, cs) in data.iter().enumerate() {
        let dea = fit_dea(&s, cs, Rts::Vrs).unwrap();
        let tol = 1e-6 * scale(cs);
        if let Some(i) = (0..cs.len()).find(|&i| dea.value_at(&cs.x[i]) < cs.y[i] - tol) {
            bad.push(format!("set {k}: row {i} lies above the envelope"));
        }
        if cs.dim() == 1 {
            let x: Vec<f64> = cs.x.iter().map(|r| r[0]).collect();
            let hull = dea_hull_1d(&x, &cs.y);
            hull_checked += 1;
            if let Some(i) = (0..cs.len()).find(|&i| (dea.value_at(&cs.x[i]) - hull[i]).abs() > tol) {
                bad.push(format!("set {k}: envelope {} vs hull {} at row {i}", dea.value_at(&cs.x[i]), hull[i]));
            }
        }
        let above = |t| fit_cqr(&s, cs, t, Rts::Vrs).unwrap().eps_plus.iter().sum::<f64>();
        let (hi, mid) = (above(0.99), above(0.5));
        if hi > mid + tol {
            bad.push(format!("set {k}: sum eps+ at 0.99 is {hi}, at 0.5 {mid}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} envelopes, {hull_checked} matched the one-input hull oracle{}", data.len(), list(&bad)),
    )
}

fn coverage() -> Outcome {
    let s = builtin();
    let taus = [0.25, 0.5, 0.75];
    let mut passed = 0;
    let mut cells = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random_range(1.0..10.0)]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 + 3.0 * r[0].sqrt() + rng.random_range(-1.0..1.0)).collect();
        let cs = CrossSection::new(x, y).unwrap();
        let mut ok = true;
        for tau in taus {
            let f = fit_cqr(&s, &cs, tau, Rts::Vrs).unwrap();
            let tol = 1e-9 * scale(&cs);
            let above = (0..cs.len()).filter(|&i| cs.y[i] > f.value_at(&cs.x[i]) + tol).count() as f64 / 200.0;
            let below = 1.0 - above;
            cells.push(below);
            ok &= (below - tau).abs() <= 0.1;
        }
        passed += usize::from(ok);
    }
    let rate = passed as f64 / 20.0;
    let lo = cells.iter().copied().fold(1.0, f64::min);
    let hi = cells.iter().copied().fold(0.0, f64::max);
    outcome(
        rate >= 0.9,
        format!("{passed}/20 seeds with every tau covered (share on or below the frontier in [{lo:.3}, {hi:.3}])"),
    )
}

fn random_set(rng: &mut impl Rng) -> (FrontierSet, IndustryTotals, usize) {
    let k = rng.random_range(2..=5);
    let d = rng.random_range(1..=2);
    let units = rng.random_range(1..=3);
    let fs = (1..=k)
        .map(|g| {
            let m = rng.random_range(1..=4);
            QuantileFrontier::from_coefficients(
                Tau::Quantile(g as f64 / (k + 1) as f64),
                Rts::Vrs,
                (0..m).map(|_| rng.random_range(-2.0..4.0)).collect(),
                (0..m).map(|_| (0..d).map(|_| rng.random_range(0.0..3.0)).collect()).collect(),
                vec![0.0; m],
                vec![0.0; m],
            )
            .unwrap()
        })
        .collect();
    let per_group: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.random_range(0.5..10.0)).collect()).collect();
    let total = (0..d).map(|j| per_group.iter().map(|g| g[j]).sum()).collect();
    (FrontierSet::new(fs, None).unwrap(), IndustryTotals { total, per_group }, units)
}

fn ordering_chain() -> Outcome {
    let s = builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    for k in 0..50 {
        let (set, totals, units) = random_set(&mut rng);
        let y = |m, gamma| {
            let scen = AllocationScenario::new(m, gamma, units);
            let r = solve_allocation(&s, &set, &totals, &scen).unwrap();
            audit(&r, &set, &totals, &scen).unwrap();
            r.total_output
        };
        for gamma in [1.0, 1.01] {
            let [y6, y7, y8, y9] = Model::ALL.map(|m| y(m, gamma));
            let tol = 1e-6;
            if !(y8 <= y6 + tol && y6 <= y7 + tol && y8 <= y9 + tol && y9 <= y7 + tol) {
                bad.push(format!("instance {k} gamma {gamma}: lp6 {y6} milp7 {y7} lp8 {y8} milp9 {y9}"));
            }
        }
        for m in Model::ALL {
            let (a, b) = (y(m, 1.0), y(m, 1.01));
            if a > b + 1e-6 {
                bad.push(format!("instance {k} {m}: {a} at gamma 1.0 above {b} at 1.01"));
            }
        }
    }
    outcome(bad.is_empty(), format!("50 instances, both gammas{}", list(&bad)))
}

/// Best output of two units on `y ≤ x − 1` sharing one unit of input, by
/// enumerating which units stay and solving each case exactly.
fn planted_exit_oracle(exit: bool) -> f64 {
    let patterns: &[[bool; 2]] =
        if exit { &[[false, false], [true, false], [false, true], [true, true]] } else { &[[true, true]] };
    let mut best = f64::NEG_INFINITY;
    for b in patterns {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x: Vec<_> = (0..2).map(|i| lp.add_var(format!("x{i}"), 0.0, 1.0, 0.0)).collect();
        let y: Vec<_> = (0..2).map(|i| lp.add_var(format!("y{i}"), -5.0, 5.0, 1.0)).collect();
        for i in 0..2 {
            if b[i] {
                lp.add_constraint("tech", [(y[i], 1.0), (x[i], -1.0)], Relation::Le, -1.0);
            } else {
                lp.add_constraint("off_x", [(x[i], 1.0)], Relation::Eq, 0.0);
                lp.add_constraint("off_y", [(y[i], 1.0)], Relation::Eq, 0.0);
            }
        }
        let rel = if exit { Relation::Le } else { Relation::Eq };
        lp.add_constraint("supply", [(x[0], 1.0), (x[1], 1.0)], rel, 1.0);
        if let Some(v) = vertex_oracle(&lp) {
            best = best.max(v);
        }
    }
    best
}

fn exit_semantics() -> Outcome {
    let f = QuantileFrontier::from_coefficients(
        Tau::Quantile(0.5),
        Rts::Vrs,
        vec![-1.0],
        vec![vec![1.0]],
        vec![0.0],
        vec![0.0],
    )
    .unwrap();
    let set = FrontierSet::new(vec![f], None).unwrap();
    let totals = IndustryTotals { total: vec![1.0], per_group: vec![vec![1.0]] };
    let run =
        |m| solve_allocation(&builtin(), &set, &totals, &AllocationScenario::new(m, 1.0, 2)).unwrap().total_output;
    let gap = run(Model::Milp7) - run(Model::Lp6);
    let oracle = planted_exit_oracle(true) - planted_exit_oracle(false);
    outcome(
        (gap - 1.0).abs() <= 1e-6 && (oracle - 1.0).abs() <= 1e-6,
        format!("Y*(7) - Y*(6) = {gap}, enumeration oracle {oracle}"),
    )
}

fn random_feasibility() -> Outcome {
    let s = builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    let mut draws = 0;
    for k in 0..20 {
        let (set, totals, units) = random_set(&mut rng);
        let y8 =
            solve_allocation(&s, &set, &totals, &AllocationScenario::new(Model::Lp8, 1.0, units)).unwrap().total_output;
        let cfg = RandomAllocationConfig { draws: 200, keep_samples: true, ..RandomAllocationConfig::new(k, units) };
        for d in 0..cfg.draws {
            draws += 1;
            let t = draw_total(&set, &totals, &cfg, d);
            if t > y8 + 1e-6 {
                bad.push(format!("instance {k} draw {d}: {t} > {y8}"));
            }
        }
        let (a, b) = (simulate(&set, &totals, &cfg).unwrap(), simulate(&set, &totals, &cfg).unwrap());
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        if bits(a.samples.as_deref().unwrap()) != bits(b.samples.as_deref().unwrap()) {
            bad.push(format!("instance {k}: repeated run differs"));
        }
    }
    let cli = cli_random_repeat();
    let cli_ok = cli.is_ok();
    if let Err(e) = cli {
        bad.push(e);
    }
    outcome(
        bad.is_empty(),
        format!("{draws} draws within Y*(8), library and CLI reruns byte-identical: {}{}", cli_ok, list(&bad)),
    )
}

fn qalloc_bin() -> &'static str {
    env!("CARGO_BIN_EXE_qalloc")
}

fn sample_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/pwt_sample.json")
}

/// Runs the sample configuration twice into the same directory.
fn cli_random_repeat() -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for _ in 0..2 {
        for cmd in ["estimate", "random"] {
            let st = std::process::Command::new(qalloc_bin())
                .arg("-c")
                .arg(sample_config())
                .arg("-o")
                .arg(tmp.path())
                .arg(cmd)
                .output()
                .map_err(|e| e.to_string())?;
            if !st.status.success() {
                return Err(format!("qalloc {cmd}: {}", String::from_utf8_lossy(&st.stderr)));
            }
        }
        bytes.push(std::fs::read(tmp.path().join("random_allocation.csv")).map_err(|e| e.to_string())?);
    }
    if bytes[0] == bytes[1] {
        Ok(())
    } else {
        Err("CLI random outputs differ".into())
    }
}

const OECD: [&str; 38] = [
    "AUS", "AUT", "BEL", "CAN", "CHL", "COL", "CRI", "CZE", "DNK", "EST", "FIN", "FRA", "DEU", "GRC", "HUN", "ISL",
    "IRL", "ISR", "ITA", "JPN", "KOR", "LVA", "LTU", "LUX", "MEX", "NLD", "NZL", "NOR", "POL", "PRT", "SVK", "SVN",
    "ESP", "SWE", "CHE", "TUR", "GBR", "USA",
];

/// The OECD panel for 2015-2019 and a description of where it came from.
fn pwt_panel() -> (Option<Panel>, Panel) {
    let sample = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/pwt_sample_2015_2019.csv");
    let schema = Schema::new("isocode", "year", "rgdpo", &["emp", "rnna"]);
    let proxy = load_panel(std::fs::File::open(sample).unwrap(), &schema).unwrap().panel;
    let real = std::env::var_os("QALLOC_PWT_CSV").map(|p| {
        let schema = Schema::new("countrycode", "year", "cgdpo", &["emp", "cn"]);
        let panel =
            load_panel(std::fs::File::open(&p).expect("QALLOC_PWT_CSV is not readable"), &schema).unwrap().panel;
        let obs = panel
            .observations()
            .iter()
            .filter(|o| OECD.contains(&o.dmu_id.as_str()) && (2015..=2019).contains(&o.period))
            .cloned()
            .collect();
        Panel::new(obs, panel.fields().clone()).unwrap()
    });
    (real, proxy)
}

fn mse_ordering(panel: &Panel) -> (bool, String) {
    let t = Instant::now();
    let m = mse_years(&builtin(), panel, &[2015, 2016, 2017, 2018, 2019], &standard_grid(), Rts::Vrs).unwrap();
    let wins = m.years.iter().filter(|y| y.mse_cqr < y.mse_dea).count();
    let pass = wins >= 3 && m.average_cqr < m.average_dea;
    (
        pass,
        format!(
            "CQR better in {wins}/4 year pairs, average {:.4e} vs DEA {:.4e} ({:.1}s)",
            m.average_cqr,
            m.average_dea,
            t.elapsed().as_secs_f64()
        ),
    )
}

fn figure_ordering(panel: &Panel) -> (bool, String) {
    let s = builtin();
    let year = panel.cross_section(2019);
    let cs = CrossSection::from_panel(&year).unwrap();
    let (set, _, dea) = fit_all(&s, &cs, &standard_grid(), Rts::Vrs).unwrap();
    let groups = partition_deciles(&set, &cs).unwrap();
    let totals = aggregate_totals(&year, &groups).unwrap();
    let units = qalloc_core::allocation::units_per_group(cs.len(), set.len());
    let y = |m, g| solve_allocation(&s, &set, &totals, &AllocationScenario::new(m, g, units)).unwrap().total_output;
    let dea2 = benchmark_dea_allocation(&s, &dea.value, &cs, &DeaScenario::dea2()).unwrap().total_output;
    let mut pass = true;
    let mut parts = Vec::new();
    for m in Model::ALL {
        let (a, b) = (y(m, 1.0), y(m, 1.01));
        pass &= a >= dea2 - 1e-6 * dea2.abs() && b >= a - 1e-6 * a.abs();
        parts.push(format!("{m} {a:.4e}/{b:.4e}"));
    }
    (pass, format!("dea2 {dea2:.4e}; gamma 1.0/1.01: {}", parts.join(", ")))
}

fn on_pwt(real: &Option<Panel>, proxy: &Panel, check: fn(&Panel) -> (bool, String)) -> Outcome {
    match real {
        Some(p) => {
            let (pass, detail) = check(p);
            Outcome { pass, detail: format!("{} countries: {detail}", p.cross_section(2019).len()), gating: false }
        }
        None => {
            let (_, detail) = check(proxy);
            Outcome {
                pass: false,
                detail: format!("QALLOC_PWT_CSV not set, OECD subset unavailable; 22-country proxy: {detail}"),
                gating: false,
            }
        }
    }
}

fn within_dominates_between() -> Outcome {
    let s = builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad = Vec::new();
    let industries = 8;
    for k in 0..industries {
        let n = rng.random_range(20..=40);
        let cs = random_dataset(&mut rng, n, 2);
        let (set, _, _) = fit_all(&s, &cs, &standard_grid(), Rts::Vrs).unwrap();
        let groups = partition_deciles(&set, &cs).unwrap();
        let obs = (0..n)
            .map(|i| qalloc_core::data::Observation::new(cs.ids[i].clone(), 0, cs.y[i], cs.x[i].clone()))
            .collect();
        let panel = Panel::new(obs, qalloc_core::data::FieldNames::generic(2)).unwrap();
        let totals = aggregate_totals(&panel, &groups).unwrap();
        let units = qalloc_core::allocation::units_per_group(n, set.len());
        let results: Vec<_> = [Model::Lp6, Model::Lp8]
            .map(|m| solve_allocation(&s, &set, &totals, &AllocationScenario::new(m, 1.0, units)).unwrap())
            .into();
        let eff = allocative_efficiency(&cs, &results).unwrap();
        let (between, within) = (eff.get(Model::Lp6).unwrap().efficiency, eff.get(Model::Lp8).unwrap().efficiency);
        if within < between - 1e-6 {
            bad.push(format!("industry {k}: within {within:.3} < between {between:.3}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{industries} synthetic industries, within-group efficiency >= between-group{}", list(&bad)),
    )
}

fn main() {
    let data = datasets();
    let (real, proxy) = pwt_panel();
    let criteria: Vec<Criterion> = vec![
        ("solver oracle equivalence", Box::new(solver_oracles)),
        ("CQR structural suite", Box::new(|| cqr_structure(&data))),
        ("DEA limit", Box::new(|| dea_limit(&data))),
        ("statistical coverage", Box::new(coverage)),
        ("allocation ordering chain", Box::new(ordering_chain)),
        ("exit semantics", Box::new(exit_semantics)),
        ("random-allocation feasibility", Box::new(random_feasibility)),
        ("PWT out-of-sample ordering", Box::new(|| on_pwt(&real, &proxy, mse_ordering))),
        ("PWT allocation ordering", Box::new(|| on_pwt(&real, &proxy, figure_ordering))),
        ("within vs between efficiency", Box::new(within_dominates_between)),
    ];
    let mut failed_gating = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if o.gating { "" } else { " (informational)" };
        println!("[{tag}] {:>2} {name}{note}: {} [{:.1}s]", i + 1, o.detail, t.elapsed().as_secs_f64());
        if o.gating && !o.pass {
            failed_gating += 1;
        }
    }
    if failed_gating > 0 {
        eprintln!("{failed_gating} gating criteria failed");
        std::process::exit(1);
    }
}
