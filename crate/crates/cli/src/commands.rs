//! Subcommand execution.

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use serde::Serialize;
use serde_json::json;

use otto_ising::analysis::{
    extract_regime_boundary, find_peaks, fit_power_law, sweep_observable, sweep_regime_map, velocity_scan, Curve,
    Exclusion, Observable, Peak, PeakPair, H_CRIT,
};
use otto_ising::oracle::{exact_cycle, exact_cycles, OracleIntegrator, DYNAMIC_CAP};
use otto_ising::otto_engine::{engine_metrics, run_cycle, run_cycles_partial, CycleRecord, CycleSpec, Regime};

use crate::config::{observable, RunConfig};
use crate::output::{fmt_float, OutDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Cycle,
    Cycles,
    PhaseDiagram,
    Curves,
    Scaling,
    Velocity,
}

#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config error: {e:#}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e:#}"),
        }
    }
}

/// Files written and recoverable problems met along the way.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

pub fn execute(command: Command, cfg: &RunConfig) -> std::result::Result<Report, Failure> {
    cfg.validate().map_err(Failure::Config)?;
    if cfg.oracle {
        if !matches!(command, Command::Cycle | Command::Cycles) {
            return Err(Failure::Config(anyhow!("--oracle is supported by cycle and cycles only")));
        }
        if cfg.n_sites > DYNAMIC_CAP {
            return Err(Failure::Config(anyhow!("--oracle needs n_sites <= {DYNAMIC_CAP}, got {}", cfg.n_sites)));
        }
    }
    let out = OutDir::create(&cfg.out).map_err(Failure::Config)?;
    let mut report = Report::default();
    let run = match command {
        Command::Cycle => cycle(cfg, &out, &mut report),
        Command::Cycles => cycles(cfg, &out, &mut report),
        Command::PhaseDiagram => phase_diagram(cfg, &out, &mut report),
        Command::Curves => curves(cfg, &out, &mut report),
        Command::Scaling => scaling(cfg, &out, &mut report),
        Command::Velocity => velocity(cfg, &out, &mut report),
    };
    run.map_err(Failure::Numerical)?;
    Ok(report)
}

#[derive(Serialize)]
struct Parameters {
    n_sites: usize,
    coupling: f64,
    h_i: f64,
    h_f: f64,
    velocity: f64,
    t_c: f64,
    t_h: f64,
    placement: crate::config::Placement,
    integrator: crate::config::IntegratorKind,
}

fn parameters(cfg: &RunConfig) -> Parameters {
    Parameters {
        n_sites: cfg.n_sites,
        coupling: cfg.coupling,
        h_i: cfg.h_i,
        h_f: cfg.h_f(),
        velocity: cfg.velocity,
        t_c: cfg.t_c,
        t_h: cfg.t_h,
        placement: cfg.placement,
        integrator: cfg.integrator,
    }
}

fn regime_name(r: Option<Regime>) -> String {
    r.map_or("forbidden".into(), |r| r.to_string())
}

fn record_json(r: &CycleRecord, spec: &CycleSpec) -> serde_json::Value {
    let m = engine_metrics(r, spec);
    json!({
        "e_a": r.e_a, "e_b": r.e_b, "e_c": r.e_c, "e_d": r.e_d,
        "w": r.w, "q_c": r.q_c, "q_h": r.q_h,
        "regime": regime_name(r.regime), "marginal": r.marginal,
        "eta": m.eta, "eta_carnot": m.eta_carnot, "delta_eta": m.delta_eta, "pi": m.pi,
        "eta_r": m.eta_r, "eta_r_carnot": m.eta_r_carnot, "delta_eta_r": m.delta_eta_r, "pi_r": m.pi_r,
        "engine_native": m.engine_native, "refrigerator_native": m.refrigerator_native,
        "pi_overflow": m.pi_overflow, "pi_r_overflow": m.pi_r_overflow,
    })
}

fn max_deviation(a: &[CycleRecord], b: &[CycleRecord]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| [x.e_a - y.e_a, x.e_b - y.e_b, x.e_c - y.e_c, x.e_d - y.e_d, x.q_c - y.q_c])
        .fold(0.0, |m, d| m.max(d.abs()))
}

fn cycle(cfg: &RunConfig, out: &OutDir, report: &mut Report) -> Result<()> {
    let spec = cfg.cycle_spec()?;
    let r = run_cycle(&spec)?;
    let mut doc = record_json(&r, &spec);
    doc["parameters"] = serde_json::to_value(parameters(cfg))?;
    if cfg.oracle {
        let x = exact_cycle(&spec, OracleIntegrator::Taylor)?;
        doc["oracle"] = json!({
            "record": record_json(&x, &spec),
            "max_deviation": max_deviation(&[r], &[x]),
        });
    }
    log::info!("cycle: W = {}, regime {}", r.w, regime_name(r.regime));
    report.files.push(out.write_json("cycle.json", &doc)?);
    Ok(())
}

fn cycles(cfg: &RunConfig, out: &OutDir, report: &mut Report) -> Result<()> {
    let complete = run_cycle(&cfg.cycle_spec()?)?;
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for &jt in &cfg.jt {
        let spec = cfg.partial_spec(jt)?;
        let records = run_cycles_partial(&spec, cfg.n_cyc)?;
        for r in &records {
            rows.push(vec![
                fmt_float(jt),
                r.n_cycle.to_string(),
                fmt_float(r.e_a),
                fmt_float(r.e_b),
                fmt_float(r.e_c),
                fmt_float(r.e_d),
                fmt_float(r.w),
                fmt_float(r.q_c),
                fmt_float(r.q_h),
                r.regime.map_or(String::new(), |g| g.code().to_string()),
            ]);
        }
        let last = records[records.len() - 1].w;
        let change = records.len().checked_sub(2).map(|k| (last - records[k].w).abs());
        let mut run = json!({"jt": jt, "final_w": last, "last_change": change});
        if cfg.oracle {
            let exact = exact_cycles(&spec, cfg.n_cyc, OracleIntegrator::Taylor)?;
            run["oracle_max_deviation"] = json!(max_deviation(&records, &exact));
        }
        log::info!("cycles: Jt = {jt}, W after {} cycles = {last}", cfg.n_cyc);
        runs.push(run);
    }
    let header = ["jt", "cycle", "e_a", "e_b", "e_c", "e_d", "w", "q_c", "q_h", "regime"];
    report.files.push(out.write_csv("cycles.csv", &header, &rows)?);
    let doc = json!({
        "parameters": parameters(cfg),
        "n_cyc": cfg.n_cyc,
        "complete_w": complete.w,
        "runs": runs,
    });
    report.files.push(out.write_json("cycles.json", &doc)?);
    Ok(())
}

fn phase_diagram(cfg: &RunConfig, out: &OutDir, report: &mut Report) -> Result<()> {
    let grid = cfg.phase_grid()?;
    log::info!("phase diagram: {} × {} cells at N = {}", grid.x_values.len(), grid.y_values.len(), cfg.n_sites);
    let map = sweep_regime_map(&grid)?;
    let mut rows = Vec::new();
    let mut marginal = 0;
    for cell in map.iter() {
        if let Some(e) = &cell.error {
            report.warnings.push(format!("cell h_i={}, T_c={}: {e}", cell.h_i, cell.t_c));
        }
        marginal += usize::from(cell.marginal);
        let (w, q_c, q_h) = cell.record.map_or((String::new(), String::new(), String::new()), |r| {
            (fmt_float(r.w), fmt_float(r.q_c), fmt_float(r.q_h))
        });
        let code = cell.regime.map_or("X".to_string(), |r| r.code().to_string());
        rows.push(vec![fmt_float(cell.h_i), fmt_float(cell.t_c), code, w, q_c, q_h]);
    }
    report.files.push(out.write_csv("phase_diagram.csv", &["h_i", "T_c", "regime", "w", "q_c", "q_h"], &rows)?);
    let boundaries: serde_json::Map<String, serde_json::Value> = Regime::ALL
        .iter()
        .map(|r| (r.to_string(), json!(extract_regime_boundary(&map, *r))))
        .collect();
    let counts: serde_json::Map<String, serde_json::Value> =
        Regime::ALL.iter().map(|r| (r.to_string(), json!(map.count(*r)))).collect();
    let doc = json!({
        "parameters": parameters(cfg),
        "counts": counts,
        "marginal_cells": marginal,
        "failed_cells": report.warnings.len(),
        "boundaries": boundaries,
    });
    report.files.push(out.write_json("phase_boundaries.json", &doc)?);
    Ok(())
}

fn exclusion_reason(e: &Exclusion) -> String {
    match e {
        Exclusion::OutsideRegime => "outside-regime".into(),
        Exclusion::CarnotOverflow => "carnot-overflow".into(),
        Exclusion::NonFinite => "non-finite".into(),
        Exclusion::Failed(msg) => format!("failed: {msg}"),
    }
}

/// Long-format curve table plus the excluded points.
fn write_curves(out: &OutDir, stem: &str, curves: &[Curve], report: &mut Report) -> Result<()> {
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for c in curves {
        let m = &c.meta;
        let key = |h: f64| {
            vec![m.n_sites.to_string(), fmt_float(m.velocity), fmt_float(m.t_c), m.observable.tag().to_string(), fmt_float(h)]
        };
        for (x, y) in c.x.iter().zip(&c.y) {
            let mut r = key(*x);
            r.push(fmt_float(*y));
            rows.push(r);
        }
        for (x, why) in &c.excluded {
            if let Exclusion::Failed(msg) = why {
                report.warnings.push(format!("N={}, v={}, h_i={x}: {msg}", m.n_sites, m.velocity));
            }
            let mut r = key(*x);
            r.push(exclusion_reason(why));
            excluded.push(r);
        }
    }
    let head = ["n_sites", "velocity", "t_c", "observable", "h_i"];
    let with = |last: &'static str| head.iter().copied().chain([last]).collect::<Vec<_>>();
    report.files.push(out.write_csv(&format!("{stem}.csv"), &with("value"), &rows)?);
    report.files.push(out.write_csv(&format!("{stem}_excluded.csv"), &with("reason"), &excluded)?);
    Ok(())
}

fn curves(cfg: &RunConfig, out: &OutDir, report: &mut Report) -> Result<()> {
    let obs: Vec<Observable> = cfg.curves.observables.iter().map(|t| observable(t)).collect::<Result<_>>()?;
    let h = cfg.curves.grid.values()?;
    log::info!("curves: {} points × sizes {:?}", h.len(), cfg.curves.sizes);
    let curves = sweep_observable(&h, &cfg.curves.sizes, &cfg.template(), &obs)?;
    write_curves(out, "curves", &curves, report)
}

fn peak_cells(p: Option<Peak>) -> [String; 2] {
    p.map_or([String::new(), String::new()], |p| [fmt_float(p.h_i), fmt_float(p.height)])
}

fn peak_row(label: String, p: &PeakPair) -> Vec<String> {
    let mut r = vec![label];
    r.extend(peak_cells(p.critical));
    r.extend(peak_cells(p.paramagnetic));
    r
}

fn fit_json(points: &[(f64, f64)], side: &str, report: &mut Report) -> serde_json::Value {
    match fit_power_law(points) {
        Ok(f) => json!({"alpha": f.alpha, "prefactor": f.prefactor, "residual": f.residual, "points": f.points}),
        Err(e) => {
            report.warnings.push(format!("{side} fit: {e}"));
            json!({"alpha": null, "error": e.to_string(), "points": points})
        }
    }
}

fn scaling(cfg: &RunConfig, out: &OutDir, report: &mut Report) -> Result<()> {
    let obs = observable(&cfg.scaling.observable)?;
    let h = cfg.scaling.grid.values()?;
    log::info!("scaling: {} points × sizes {:?}", h.len(), cfg.scaling.sizes);
    let curves = sweep_observable(&h, &cfg.scaling.sizes, &cfg.template(), &[obs])?;
    write_curves(out, "scaling_curves", &curves, report)?;
    let mut rows = Vec::new();
    let mut peaks = Vec::new();
    let (mut crit, mut para) = (Vec::new(), Vec::new());
    for c in &curves {
        let p = find_peaks(c, H_CRIT)?;
        let n = c.meta.n_sites as f64;
        crit.extend(p.critical.map(|q| (n, q.height)));
        para.extend(p.paramagnetic.map(|q| (n, q.height)));
        rows.push(peak_row(c.meta.n_sites.to_string(), &p));
        peaks.push(json!({"n_sites": c.meta.n_sites, "critical": p.critical, "paramagnetic": p.paramagnetic}));
    }
    let header = ["n_sites", "critical_h_i", "critical_height", "paramagnetic_h_i", "paramagnetic_height"];
    report.files.push(out.write_csv("scaling_peaks.csv", &header, &rows)?);
    let critical = fit_json(&crit, "critical", report);
    let paramagnetic = fit_json(&para, "paramagnetic", report);
    let doc = json!({
        "parameters": parameters(cfg),
        "observable": obs.tag(),
        "sizes": cfg.scaling.sizes,
        "peaks": peaks,
        "alpha_critical": critical["alpha"],
        "alpha_paramagnetic": paramagnetic["alpha"],
        "critical_fit": critical,
        "paramagnetic_fit": paramagnetic,
    });
    report.files.push(out.write_json("scaling.json", &doc)?);
    Ok(())
}

fn velocity(cfg: &RunConfig, out: &OutDir, report: &mut Report) -> Result<()> {
    let obs = observable(&cfg.velocity_scan.observable)?;
    let h = cfg.velocity_scan.grid.values()?;
    log::info!("velocity scan: {} points × v {:?}", h.len(), cfg.velocity_scan.velocities);
    let curves = velocity_scan(&cfg.velocity_scan.velocities, &h, &cfg.template(), &[obs])?;
    write_curves(out, "velocity_curves", &curves, report)?;
    let mut rows = Vec::new();
    for c in &curves {
        rows.push(peak_row(fmt_float(c.meta.velocity), &find_peaks(c, H_CRIT)?));
    }
    let header = ["velocity", "critical_h_i", "critical_height", "paramagnetic_h_i", "paramagnetic_height"];
    report.files.push(out.write_csv("velocity_peaks.csv", &header, &rows)?);
    Ok(())
}
