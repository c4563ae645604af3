//! The five subcommands. Each reads the configuration and upstream
//! artifacts, and writes its tables into the output directory.

use std::fs::File;
use std::path::{Path, PathBuf};

use log::{info, warn};
use qalloc_core::allocation::{allocation_program, audit, share_table, units_per_group, AllocationResult};
use qalloc_core::analysis::{allocative_efficiency, benchmark_dea_allocation, marginal_products};
use qalloc_core::cqr::{group_label, partition_deciles, CrossSection, FrontierSet, Tau};
use qalloc_core::data::{aggregate_totals, deflate, filter_panel, IndustryTotals, Panel};
use qalloc_core::lp::{Solver, SolverOptions, SolverRegistry};
use qalloc_core::random_alloc::RandomAllocationConfig;
use qalloc_core::Error;

use crate::backend::default_registry;
use crate::config::RunConfig;
use crate::csv_panel::{load_deflators, load_panel};
use crate::error::{AppError, Result};
use crate::frontier_io::{annotate, frontier_file, frontier_table, read_frontier, read_frontier_set};
use crate::lp_format::write_problem;
use crate::pipeline;
use crate::tables::{num, read_table, write_atomic, write_table, Metadata, Table};

pub const COMPARISON_FILE: &str = "allocation_comparison.csv";
pub const RANDOM_FILE: &str = "random_allocation.csv";

/// Effective configuration plus command-line switches.
pub struct Run {
    pub cfg: RunConfig,
    /// Append wall-clock columns; makes outputs run-dependent.
    pub timings: bool,
    registry: SolverRegistry,
}

/// The data a command works on after filtering and deflation.
pub struct Prepared {
    pub panel: Panel,
    pub dropped: usize,
}

/// A cross-section with its fitted set and performance groups.
struct Industry {
    cs: CrossSection,
    set: FrontierSet,
    totals: IndustryTotals,
}

impl Run {
    pub fn new(cfg: RunConfig, timings: bool) -> Result<Self> {
        let registry = default_registry();
        registry.get(&cfg.solver)?;
        Ok(Run { cfg, timings, registry })
    }

    pub fn out_dir(&self) -> &Path {
        &self.cfg.output_dir
    }

    fn solver(&self) -> &dyn Solver {
        self.registry.get(&self.cfg.solver).expect("checked in Run::new")
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir().join(name)
    }

    fn metadata(&self, command: &str, prep: Option<&Prepared>) -> Metadata {
        let mut m = Metadata::for_run(command, &self.cfg);
        m.push("solver", &self.cfg.solver);
        let o: SolverOptions = self.solver().options();
        m.push(
            "solver_tolerances",
            format!(
                "feasibility={:e} optimality={:e} integrality={:e} bland_after={}",
                o.feasibility_tol, o.optimality_tol, o.integrality_tol, o.bland_after
            ),
        );
        m.push("nearest_quantile_rule", "argmin over the grid of |y - f(x)|, ties to the smaller tau");
        m.push(
            "deflation",
            match &self.cfg.deflator {
                Some(d) => format!("fields {:?} to {} prices", d.fields, d.base_year),
                None => "none".into(),
            },
        );
        if let Some(p) = prep {
            m.push("rows_dropped_missing", p.dropped);
            m.push("observations", p.panel.len());
        }
        m
    }

    pub fn prepare(&self) -> Result<Prepared> {
        let src = &self.cfg.data;
        let f = File::open(&src.path).map_err(|e| AppError::io(&src.path, e))?;
        let loaded = load_panel(f, &src.schema)?;
        let mut panel = filter_panel(&loaded.panel, &self.cfg.thresholds()?)?;
        if let Some(d) = &self.cfg.deflator {
            let f = File::open(&d.path).map_err(|e| AppError::io(&d.path, e))?;
            let table = load_deflators(f, d.base_year)?;
            let fields: Vec<&str> = d.fields.iter().map(String::as_str).collect();
            panel = deflate(&panel, &table, &fields)?;
        }
        if panel.is_empty() {
            return Err(Error::Domain("no observations left after filtering".into()).into());
        }
        info!("{} observations, {} rows dropped for missing values", panel.len(), loaded.dropped);
        Ok(Prepared { panel, dropped: loaded.dropped })
    }

    fn period(&self, panel: &Panel) -> Result<i32> {
        match self.cfg.period {
            Some(p) if panel.periods().contains(&p) => Ok(p),
            Some(p) => Err(Error::Lookup(format!("period {p} is not in the data")).into()),
            None => Ok(*panel.periods().last().expect("nonempty panel")),
        }
    }

    /// Cross-section of the configured period with the exported frontiers.
    fn industry(&self, prep: &Prepared) -> Result<Industry> {
        let panel = prep.panel.cross_section(self.period(&prep.panel)?);
        let cs = CrossSection::from_panel(&panel)?;
        let set = read_frontier_set(self.out_dir(), &self.cfg.taus)?;
        let set = FrontierSet::new(set.frontiers().to_vec(), Some(cs.clone())).map_err(|e| {
            AppError::Format(format!("frontier files do not match the configured data ({e}); rerun `qalloc estimate`"))
        })?;
        let groups = partition_deciles(&set, &cs)?;
        let totals = aggregate_totals(&panel, &groups)?;
        Ok(Industry { cs, set, totals })
    }

    fn units(&self, ind: &Industry) -> usize {
        self.cfg.units_per_group.unwrap_or_else(|| units_per_group(ind.cs.len(), ind.set.len()))
    }

    fn labels(&self, k: usize) -> Vec<String> {
        (1..=k).map(|g| group_label(g, k)).collect()
    }
}

fn secs(d: std::time::Duration) -> String {
    format!("{:.6}", d.as_secs_f64())
}

/// Fits the frontier set and the envelope on one cross-section and writes
/// one coefficient file per frontier, the group assignment and a log.
pub fn cmd_estimate(run: &Run) -> Result<Vec<PathBuf>> {
    let prep = run.prepare()?;
    let period = run.period(&prep.panel)?;
    let cs = CrossSection::from_panel(&prep.panel.cross_section(period))?;
    let rts = run.cfg.rts()?;
    info!("fitting {} quantiles and the envelope on {} DMUs ({period})", run.cfg.taus.len(), cs.len());
    let (set, times, dea) = pipeline::fit_all(run.solver(), &cs, &run.cfg.taus, rts)?;
    let dea_time = dea.elapsed;
    let dea = dea.value;
    let mut written = Vec::new();
    let mut log = if run.timings {
        Table::new(&["tau", "objective", "iterations", "rounds", "rows_added", "seconds"])
    } else {
        Table::new(&["tau", "objective", "iterations", "rounds", "rows_added"])
    };
    let frontiers: Vec<_> = set.frontiers().iter().zip(&times).chain([(&dea, &dea_time)]).collect();
    // invariants hold to 1e-6 in units of the largest output
    let tol = 1e-6 * cs.y.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    for (f, t) in frontiers {
        f.check(&cs, tol)?;
        let mut meta = run.metadata("estimate", Some(&prep));
        meta.push("period", period);
        annotate(&mut meta, f);
        let path = frontier_file(run.out_dir(), f.tau);
        write_table(&path, &meta, &frontier_table(f))?;
        written.push(path);
        let mut row = vec![
            f.tau.to_string(),
            format!("{:.16e}", f.objective),
            f.stats.iterations.to_string(),
            f.stats.rounds.to_string(),
            f.stats.rows_added.to_string(),
        ];
        if run.timings {
            row.push(secs(*t));
        }
        log.push(row);
    }
    let mut meta = run.metadata("estimate", Some(&prep));
    meta.push("period", period);
    let path = run.path("estimation_log.csv");
    write_table(&path, &meta, &log)?;
    written.push(path);

    let groups = partition_deciles(&set, &cs)?;
    let labels = run.labels(set.len());
    let mut t = Table::new(&["dmu_id", "group", "label", "nearest_tau", "score"]);
    for e in groups.entries() {
        t.push(vec![
            e.dmu_id.clone(),
            e.group.to_string(),
            labels[e.group - 1].clone(),
            num(e.nearest_tau),
            num(e.score),
        ]);
    }
    let path = run.path("deciles.csv");
    write_table(&path, &meta, &t)?;
    written.push(path);
    Ok(written)
}

fn result_table(res: &AllocationResult, labels: &[String], inputs: &[String]) -> Table {
    let mut header = vec!["group".to_string(), "label".into(), "unit".into(), "active".into()];
    header.extend(inputs.iter().cloned());
    header.push("output".into());
    let mut t = Table::new(&header);
    for (g, label) in labels.iter().enumerate().take(res.groups()) {
        for i in 0..res.units() {
            let mut row =
                vec![(g + 1).to_string(), label.clone(), (i + 1).to_string(), u8::from(res.active[g][i]).to_string()];
            row.extend(res.x[g][i].iter().map(|&v| num(v)));
            row.push(num(res.y[g][i]));
            t.push(row);
        }
    }
    t
}

/// Solves every configured scenario on the exported frontiers, audits the
/// plans, and writes per-scenario plans, share tables, the DEA benchmarks
/// and a comparison table.
pub fn cmd_allocate(run: &Run) -> Result<Vec<PathBuf>> {
    if run.cfg.scenarios.is_empty() {
        return Err(
            Error::Config("no scenarios configured; add e.g. {\"model\": \"lp6\", \"gamma\": 1.0}".into()).into()
        );
    }
    let prep = run.prepare()?;
    let ind = run.industry(&prep)?;
    let n = run.units(&ind);
    let scens = run.cfg.scenarios.iter().map(|s| run.cfg.allocation_scenario(s, n)).collect::<Result<Vec<_>>>()?;
    let labels = run.labels(ind.set.len());
    let inputs = run.cfg.data.schema.inputs.clone();
    let mut meta = run.metadata("allocate", Some(&prep));
    meta.push("period", ind.cs.period.map_or("-".into(), |p| p.to_string()));
    meta.push("units_per_group", n);
    let mut written = Vec::new();

    if run.cfg.dump_lp {
        for (s, sc) in run.cfg.scenarios.iter().zip(&scens) {
            let prog = allocation_program(&ind.set, &ind.totals, sc)?;
            let path = run.path(&format!("lp/{}.lp", s.label()?));
            write_atomic(&path, write_problem(&prog.problem).as_bytes())?;
            written.push(path);
        }
    }

    let current: f64 = ind.cs.y.iter().sum();
    let mut cmp = Table::new(&["category", "value", "model", "gamma", "status", "gap", "active_units", "seconds"]);
    if !run.timings {
        cmp.header.pop();
    }
    let mut push_cmp = |cat: String,
                        value: f64,
                        model: &str,
                        gamma: String,
                        status: &str,
                        gap: String,
                        active: String,
                        t: Option<String>| {
        let mut row = vec![cat, num(value), model.into(), gamma, status.into(), gap, active];
        if run.timings {
            row.push(t.unwrap_or_default());
        }
        cmp.push(row);
    };
    push_cmp("Current".into(), current, "observed", "-".into(), "-", "-".into(), ind.cs.len().to_string(), None);

    let outcomes = pipeline::solve_scenarios(run.solver(), &ind.set, &ind.totals, &scens);
    let mut results = Vec::with_capacity(scens.len());
    for ((s, sc), out) in run.cfg.scenarios.iter().zip(&scens).zip(outcomes) {
        let label = s.label()?;
        let res = out.value?;
        audit(&res, &ind.set, &ind.totals, sc)?;
        info!("{label}: Y* = {}", res.total_output);
        let mut m = meta.clone();
        m.push("scenario", &label);
        m.push("status", res.status.as_str());
        m.push("total_output", num(res.total_output));
        if let Some(bm) = &res.big_m {
            m.push("big_m_output", format!("{:?}", bm.output));
            m.push("big_m_input", format!("{:?}", bm.input));
        }
        let path = run.path(&format!("allocation_{label}.csv"));
        write_table(&path, &m, &result_table(&res, &labels, &inputs))?;
        written.push(path);
        match share_table(&res) {
            Ok(sh) => {
                let mut t = Table::new(&sh.to_lines(&labels, &inputs)[0].split(',').collect::<Vec<_>>());
                for r in &sh.rows {
                    let mut row = vec![labels[r.group - 1].clone()];
                    row.extend(r.inputs_rounded.iter().map(i64::to_string));
                    row.push(r.output_rounded.to_string());
                    t.push(row);
                }
                let path = run.path(&format!("shares_{label}.csv"));
                write_table(&path, &m, &t)?;
                written.push(path);
            }
            Err(e) => warn!("{label}: no share table ({e})"),
        }
        push_cmp(
            label,
            res.total_output,
            res.model.name(),
            num(s.gamma),
            res.status.as_str(),
            res.gap.map_or("-".into(), num),
            res.active_count().to_string(),
            Some(secs(out.elapsed)),
        );
        results.push(res);
    }

    let dea_path = frontier_file(run.out_dir(), Tau::DeaLimit);
    let dea = read_frontier(&dea_path)?;
    for (name, sc) in run.cfg.dea_scenarios()? {
        let t0 = std::time::Instant::now();
        match benchmark_dea_allocation(run.solver(), &dea, &ind.cs, &sc) {
            Ok(b) => push_cmp(
                name,
                b.total_output,
                "dea",
                "-".into(),
                "optimal",
                "-".into(),
                ind.cs.len().to_string(),
                Some(secs(t0.elapsed())),
            ),
            Err(e @ Error::Infeasible(_)) => warn!("{name}: {e}"),
            Err(e) => return Err(e.into()),
        }
    }
    let path = run.path(COMPARISON_FILE);
    write_table(&path, &meta, &cmp)?;
    written.push(path);

    let mut eff = Table::new(&["scenario", "model", "gamma", "y_star", "efficiency", "potential_gain"]);
    let report = allocative_efficiency(&ind.cs, &results)?;
    for (s, m) in run.cfg.scenarios.iter().zip(&report.models) {
        eff.push(vec![
            s.label()?,
            m.model.name().into(),
            num(s.gamma),
            num(m.y_star),
            num(m.efficiency),
            num(m.potential_gain),
        ]);
    }
    let mut gammas: Vec<f64> = run.cfg.scenarios.iter().map(|s| s.gamma).collect();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    for g in gammas {
        let same: Vec<AllocationResult> = results.iter().filter(|r| r.gamma == g).cloned().collect();
        allocative_efficiency(&ind.cs, &same)?.check_ordering(1e-6 * report.current.abs().max(1.0))?;
    }
    let mut m = meta.clone();
    m.push("current_output", num(current));
    let path = run.path("efficiency.csv");
    write_table(&path, &m, &eff)?;
    written.push(path);
    Ok(written)
}

/// Random within-group splits of the group input totals.
pub fn cmd_random(run: &Run) -> Result<Vec<PathBuf>> {
    let prep = run.prepare()?;
    let ind = run.industry(&prep)?;
    let cfg = RandomAllocationConfig {
        draws: run.cfg.random.draws,
        seed: run.cfg.random.seed,
        totals: run.cfg.totals_interpretation()?,
        units_per_group: run.units(&ind),
        keep_samples: run.cfg.random.keep_samples,
    };
    let s = pipeline::simulate(&ind.set, &ind.totals, &cfg)?;
    let mut meta = run.metadata("random", Some(&prep));
    meta.push("seed", cfg.seed);
    meta.push("totals", cfg.totals);
    meta.push("units_per_group", cfg.units_per_group);
    meta.push("stream", "ChaCha20, stream = draw * groups + (group - 1)");
    let mut t = Table::new(&["statistic", "value"]);
    for (k, v) in [("draws", s.draws as f64), ("mean", s.mean), ("median", s.median), ("min", s.min), ("max", s.max)] {
        t.push(vec![k.into(), num(v)]);
    }
    let mut written = vec![run.path(RANDOM_FILE)];
    write_table(&written[0], &meta, &t)?;
    if let Some(samples) = &s.samples {
        let mut t = Table::new(&["draw", "total_output"]);
        for (k, v) in samples.iter().enumerate() {
            t.push(vec![k.to_string(), num(*v)]);
        }
        let path = run.path("random_samples.csv");
        write_table(&path, &meta, &t)?;
        written.push(path);
    }
    Ok(written)
}

/// Out-of-sample errors of the quantile and envelope predictions for each
/// consecutive pair of periods.
pub fn cmd_mse(run: &Run) -> Result<Vec<PathBuf>> {
    let prep = run.prepare()?;
    let periods = run.cfg.mse.periods.clone().unwrap_or_else(|| prep.panel.periods().to_vec());
    let r = pipeline::mse_years(run.solver(), &prep.panel, &periods, &run.cfg.taus, run.cfg.rts()?)?;
    let meta = run.metadata("mse", Some(&prep));
    let mut header = vec!["model".to_string()];
    for y in &r.years {
        header.push(format!("{}-{}", y.from.unwrap_or_default(), y.to.unwrap_or_default()));
    }
    header.push("average".into());
    let mut t = Table::new(&header);
    let mut cqr = vec!["cqr".to_string()];
    let mut dea = vec!["dea".to_string()];
    for y in &r.years {
        cqr.push(num(y.mse_cqr));
        dea.push(num(y.mse_dea));
    }
    cqr.push(num(r.average_cqr));
    dea.push(num(r.average_dea));
    t.push(cqr);
    t.push(dea);
    let mut written = vec![run.path("mse.csv")];
    write_table(&written[0], &meta, &t)?;

    let mut p = Table::new(&["from", "to", "dmu_id", "y", "cqr", "dea", "nearest_tau", "extrapolated"]);
    for y in &r.years {
        for q in &y.predictions {
            p.push(vec![
                y.from.unwrap_or_default().to_string(),
                y.to.unwrap_or_default().to_string(),
                q.dmu_id.clone(),
                num(q.y),
                num(q.cqr),
                num(q.dea),
                num(q.nearest_tau),
                u8::from(q.extrapolated).to_string(),
            ]);
        }
    }
    let path = run.path("mse_predictions.csv");
    write_table(&path, &meta, &p)?;
    written.push(path);
    Ok(written)
}

/// Bar-chart data (current, random, optima) with percentage gains, and the
/// marginal-product table.
pub fn cmd_report(run: &Run) -> Result<Vec<PathBuf>> {
    let prep = run.prepare()?;
    let ind = run.industry(&prep)?;
    let (_, cmp) = read_table(&run.path(COMPARISON_FILE), "allocate")?;
    let (_, rnd) = read_table(&run.path(RANDOM_FILE), "random")?;
    let current: f64 = ind.cs.y.iter().sum();
    if current == 0.0 {
        return Err(Error::Undefined("current output is zero".into()).into());
    }
    let mean_row = (0..rnd.rows.len())
        .find(|&r| rnd.rows[r][0] == "mean")
        .ok_or_else(|| AppError::Format(format!("{RANDOM_FILE} has no mean row")))?;
    let mut bars = vec![("Current".to_string(), current), ("Random".to_string(), rnd.number(mean_row, "value")?)];
    for r in 0..cmp.rows.len() {
        let cat = &cmp.rows[r][0];
        if cat != "Current" {
            bars.push((cat.clone(), cmp.number(r, "value")?));
        }
    }
    let meta = run.metadata("report", Some(&prep));
    let mut t = Table::new(&["category", "value", "gain_percent"]);
    for (c, v) in &bars {
        t.push(vec![c.clone(), num(*v), num((v / current - 1.0) * 100.0)]);
    }
    let mut written = vec![run.path("report_bars.csv")];
    write_table(&written[0], &meta, &t)?;

    let mp = marginal_products(&ind.set, &ind.cs)?;
    let inputs = &run.cfg.data.schema.inputs;
    let mut header = vec!["dmu_id".to_string(), "nearest_tau".into()];
    header.extend(inputs.iter().map(|n| format!("mp_{n}")));
    let mut t = Table::new(&header);
    for m in &mp.dmus {
        let mut row = vec![m.dmu_id.clone(), num(m.nearest_tau)];
        row.extend(m.beta.iter().map(|&b| num(b)));
        t.push(row);
    }
    let mut row = vec!["mean".to_string(), "-".into()];
    row.extend(mp.mean_marginal_product.iter().map(|&b| num(b)));
    t.push(row);
    if let (Some(uc), Some(ratio)) = (&mp.mean_unit_cost, &mp.ratio) {
        let mut row = vec!["mean_unit_cost".to_string(), "-".into()];
        row.extend(uc.iter().map(|&c| num(c)));
        t.push(row);
        let mut row = vec!["cost_to_product_ratio".to_string(), "-".into()];
        row.extend(ratio.iter().map(|r| r.map_or("undefined".into(), num)));
        t.push(row);
    }
    let mut m = meta.clone();
    if let Some(n) = &mp.notice {
        m.push("notice", n);
    }
    let path = run.path("marginal_products.csv");
    write_table(&path, &m, &t)?;
    written.push(path);
    Ok(written)
}
