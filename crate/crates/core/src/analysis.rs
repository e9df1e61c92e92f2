//! Parameter sweeps over the cycle: regime maps and their boundaries,
//! observable curves against h_i, peak extraction and finite-size fits.
//!
//! Every sweep is a parallel map over independent cells with results kept in
//! input order, so outputs do not depend on the worker count. Cells sharing a
//! sweep geometry (N, h_i, δh, v) share one propagator.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain_model::ChainSpec;
use crate::dynamics::Integrator;
use crate::error::{invalid, Error, Result};
use crate::otto_engine::{
    engine_metrics, BathPlacement, CycleRecord, CycleSpec, PreparedCycle, Regime, Thermalization,
};
use crate::thermal_bath::BathSpec;

pub const H_CRIT: f64 = 1.0;
/// Peaks must rise above this fraction of the curve's range.
pub const PEAK_NOISE_FLOOR: f64 = 1e-3;
pub const DEFAULT_H_STEP: f64 = 0.02;

/// Everything but (h_i, T_c) of a completely thermalizing cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleTemplate {
    pub n_sites: usize,
    pub coupling: f64,
    pub delta_h: f64,
    pub velocity: f64,
    pub t_c: f64,
    pub t_h: f64,
    pub placement: BathPlacement,
    pub integrator: Integrator,
}

impl Default for CycleTemplate {
    fn default() -> Self {
        Self {
            n_sites: 50,
            coupling: 1.0,
            delta_h: 0.5,
            velocity: 0.005,
            t_c: 0.25,
            t_h: 0.5,
            placement: BathPlacement::default(),
            integrator: Integrator::default(),
        }
    }
}

impl CycleTemplate {
    pub fn chain(&self) -> Result<ChainSpec> {
        ChainSpec::new(self.n_sites, self.coupling)
    }

    pub fn spec(&self, h_i: f64, t_c: f64) -> Result<CycleSpec> {
        let s = CycleSpec::new(self.chain()?, h_i, h_i + self.delta_h, self.velocity, t_c, self.t_h)?;
        Ok(s.with_placement(self.placement).with_integrator(self.integrator))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_h >= 0.0) {
            return invalid(format!("delta_h >= 0 required, got {}", self.delta_h));
        }
        self.spec(0.0, self.t_c).map(|_| ())
    }

    fn prepare(&self, h_i: f64) -> Result<PreparedCycle> {
        PreparedCycle::new(self.chain()?, h_i, h_i + self.delta_h, self.velocity, self.integrator)
    }

    fn baths(&self, t_c: f64) -> Result<(BathSpec, BathSpec)> {
        Ok((BathSpec::at(t_c)?, BathSpec::at(self.t_h)?))
    }
}

/// n evenly spaced values over [a, b].
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// a, a + step, ... up to b inclusive (to within step/1000).
pub fn grid_with_step(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && b >= a) {
        return invalid(format!("bad grid [{a}, {b}] with step {step}"));
    }
    let n = ((b - a) / step + 1e-3).floor() as usize + 1;
    Ok((0..n).map(|k| a + step * k as f64).collect())
}

fn check_ascending(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return invalid(format!("{name} axis is empty"));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return invalid(format!("{name} axis must be finite and strictly ascending"));
    }
    Ok(())
}

/// (h_i, T_c) grid; T_c of the template is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub template: CycleTemplate,
}

impl Grid2D {
    pub fn new(x_values: Vec<f64>, y_values: Vec<f64>, template: CycleTemplate) -> Result<Self> {
        let g = Self {
            x_values,
            y_values,
            template,
        };
        g.validate()?;
        Ok(g)
    }

    /// 60 × 50 over h_i ∈ [0.1, 2], T_c ∈ [0.02, T_h − 0.02].
    pub fn default_for(template: CycleTemplate) -> Result<Self> {
        Self::new(linspace(0.1, 2.0, 60), linspace(0.02, template.t_h - 0.02, 50), template)
    }

    pub fn validate(&self) -> Result<()> {
        check_ascending("h_i", &self.x_values)?;
        check_ascending("T_c", &self.y_values)?;
        self.template.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub h_i: f64,
    pub t_c: f64,
    /// None if the cell failed or its signs fit no regime.
    pub regime: Option<Regime>,
    /// Some quantity fell in the sign band; `regime` then comes from a neighbor.
    pub marginal: bool,
    pub record: Option<CycleRecord>,
    pub error: Option<String>,
}

/// Cells indexed `[iy][ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeMap {
    pub grid: Grid2D,
    pub cells: Vec<Vec<MapCell>>,
}

impl RegimeMap {
    pub fn label(&self, ix: usize, iy: usize) -> Option<Regime> {
        self.cells[iy][ix].regime
    }

    pub fn count(&self, r: Regime) -> usize {
        self.cells.iter().flatten().filter(|c| c.regime == Some(r)).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MapCell> {
        self.cells.iter().flatten()
    }

    /// Synthetic map from a labelling function, for tests and external data.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> Option<Regime>) -> Self {
        let cells = grid
            .y_values
            .iter()
            .map(|&t_c| {
                grid.x_values
                    .iter()
                    .map(|&h_i| MapCell {
                        h_i,
                        t_c,
                        regime: f(h_i, t_c),
                        marginal: false,
                        record: None,
                        error: None,
                    })
                    .collect()
            })
            .collect();
        Self { grid, cells }
    }
}

/// Regime map from complete-thermalization cycles; one propagator per h_i.
pub fn sweep_regime_map(grid: &Grid2D) -> Result<RegimeMap> {
    grid.validate()?;
    let t = grid.template;
    let columns: Vec<Vec<MapCell>> = grid
        .x_values
        .par_iter()
        .map(|&h_i| {
            let prepared = t.prepare(h_i);
            grid.y_values
                .iter()
                .map(|&t_c| {
                    let result = prepared.as_ref().map_err(Clone::clone).and_then(|p| {
                        let (cold, hot) = t.baths(t_c)?;
                        p.complete(&cold, &hot, t.placement)
                    });
                    match result {
                        Ok(r) => MapCell {
                            h_i,
                            t_c,
                            regime: r.regime,
                            marginal: r.marginal,
                            error: r.regime.is_none().then(|| {
                                Error::ForbiddenRegime {
                                    w: r.w,
                                    q_c: r.q_c,
                                    q_h: r.q_h,
                                }
                                .to_string()
                            }),
                            record: Some(r),
                        },
                        Err(e) => MapCell {
                            h_i,
                            t_c,
                            regime: None,
                            marginal: false,
                            record: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect()
        })
        .collect();
    let ny = grid.y_values.len();
    let mut cells: Vec<Vec<MapCell>> = (0..ny)
        .map(|iy| columns.iter().map(|col| col[iy].clone()).collect())
        .collect();
    resolve_marginal(&mut cells);
    Ok(RegimeMap {
        grid: grid.clone(),
        cells,
    })
}

/// Marginal cells take the label of the first non-marginal 4-neighbor
/// (left, right, below, above).
fn resolve_marginal(cells: &mut [Vec<MapCell>]) {
    let ny = cells.len();
    let nx = cells.first().map_or(0, Vec::len);
    let snapshot: Vec<Vec<(bool, Option<Regime>)>> = cells
        .iter()
        .map(|row| row.iter().map(|c| (c.marginal, c.regime)).collect())
        .collect();
    for iy in 0..ny {
        for ix in 0..nx {
            if !snapshot[iy][ix].0 {
                continue;
            }
            let neighbors = [
                (ix.wrapping_sub(1), iy),
                (ix + 1, iy),
                (ix, iy.wrapping_sub(1)),
                (ix, iy + 1),
            ];
            let found = neighbors
                .iter()
                .filter(|&&(x, y)| x < nx && y < ny)
                .map(|&(x, y)| snapshot[y][x])
                .find(|&(m, r)| !m && r.is_some());
            if let Some((_, r)) = found {
                cells[iy][ix].regime = r;
            }
        }
    }
}

pub type Polyline = Vec<(f64, f64)>;

/// Marching-squares contour of the indicator of `target`, in (h_i, T_c)
/// coordinates. Crossings sit at edge midpoints; open curves end on the grid
/// border.
pub fn extract_regime_boundary(map: &RegimeMap, target: Regime) -> Vec<Polyline> {
    let xs = &map.grid.x_values;
    let ys = &map.grid.y_values;
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let inside = |ix: usize, iy: usize| map.cells[iy][ix].regime == Some(target);
    // Edge keys: (0, ix, iy) joins (ix, iy)-(ix+1, iy); (1, ix, iy) joins (ix, iy)-(ix, iy+1).
    type Key = (u8, usize, usize);
    let point = |k: Key| match k {
        (0, ix, iy) => (0.5 * (xs[ix] + xs[ix + 1]), ys[iy]),
        (_, ix, iy) => (xs[ix], 0.5 * (ys[iy] + ys[iy + 1])),
    };
    let mut segments: Vec<(Key, Key)> = Vec::new();
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let c = [inside(ix, iy), inside(ix + 1, iy), inside(ix + 1, iy + 1), inside(ix, iy + 1)];
            // Edges in order bottom, right, top, left; corners 0..3 counterclockwise.
            let edges: [Key; 4] = [(0, ix, iy), (1, ix + 1, iy), (0, ix, iy + 1), (1, ix, iy)];
            let crossing: Vec<Key> = (0..4).filter(|&e| c[e] != c[(e + 1) % 4]).map(|e| edges[e]).collect();
            match crossing.len() {
                2 => segments.push((crossing[0], crossing[1])),
                4 => {
                    // Saddle: the center (mean 1/2) is read as inside.
                    if c[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    // Chain segments sharing edge keys into polylines.
    let mut adjacency: HashMap<Key, Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(i);
        adjacency.entry(*b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    // Open chains first (start at keys of degree 1), then closed loops.
    let mut starts: Vec<Key> = adjacency.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    starts.sort();
    let mut loop_starts: Vec<Key> = segments.iter().map(|s| s.0).collect();
    loop_starts.sort();
    for start in starts.into_iter().chain(loop_starts) {
        let Some(&first) = adjacency[&start].iter().find(|&&i| !used[i]) else {
            continue;
        };
        let mut keys = vec![start];
        let mut seg = first;
        let mut at = start;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            at = if a == at { b } else { a };
            keys.push(at);
            match adjacency[&at].iter().find(|&&i| !used[i]) {
                Some(&next) => seg = next,
                None => break,
            }
        }
        lines.push(keys.into_iter().map(point).collect());
    }
    lines
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    /// W/N
    Work,
    /// η, heat-engine cells only
    Efficiency,
    /// Q_c/N
    HeatCold,
    /// η^R, refrigerator cells only
    Cop,
    /// Π/N, heat-engine cells only
    Performance,
    /// Π_R/N, refrigerator cells only
    RefrigeratorPerformance,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::Work,
        Observable::Efficiency,
        Observable::HeatCold,
        Observable::Cop,
        Observable::Performance,
        Observable::RefrigeratorPerformance,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Observable::Work => "w",
            Observable::Efficiency => "eta",
            Observable::HeatCold => "q_c",
            Observable::Cop => "eta_r",
            Observable::Performance => "pi",
            Observable::RefrigeratorPerformance => "pi_r",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.tag() == s)
    }

    /// Regime in which the observable is physical; None for W and Q_c.
    pub fn native_regime(self) -> Option<Regime> {
        match self {
            Observable::Efficiency | Observable::Performance => Some(Regime::HeatEngine),
            Observable::Cop | Observable::RefrigeratorPerformance => Some(Regime::Refrigerator),
            Observable::Work | Observable::HeatCold => None,
        }
    }

    /// Value at a cell, or why it is excluded.
    pub fn evaluate(self, record: &CycleRecord, spec: &CycleSpec) -> std::result::Result<f64, Exclusion> {
        if let Some(r) = self.native_regime() {
            if record.regime != Some(r) {
                return Err(Exclusion::OutsideRegime);
            }
        }
        let n = spec.chain.n_sites() as f64;
        let m = engine_metrics(record, spec);
        let value = match self {
            Observable::Work => record.w / n,
            Observable::HeatCold => record.q_c / n,
            Observable::Efficiency => m.eta,
            Observable::Cop => m.eta_r,
            Observable::Performance if m.pi_overflow => return Err(Exclusion::CarnotOverflow),
            Observable::Performance => m.pi / n,
            Observable::RefrigeratorPerformance if m.pi_r_overflow => return Err(Exclusion::CarnotOverflow),
            Observable::RefrigeratorPerformance => m.pi_r / n,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Exclusion::NonFinite)
        }
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Exclusion {
    OutsideRegime,
    CarnotOverflow,
    NonFinite,
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub n_sites: usize,
    pub t_c: f64,
    pub t_h: f64,
    pub delta_h: f64,
    pub velocity: f64,
    pub observable: Observable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Grid points left out of (x, y).
    pub excluded: Vec<(f64, Exclusion)>,
    /// The full h_i grid the curve was evaluated on.
    pub grid: Vec<f64>,
    pub meta: CurveMeta,
}

fn curves_for(template: &CycleTemplate, h_grid: &[f64], observables: &[Observable]) -> Result<Vec<Curve>> {
    let cells: Vec<Result<(CycleRecord, CycleSpec)>> = h_grid
        .par_iter()
        .map(|&h_i| {
            let spec = template.spec(h_i, template.t_c)?;
            let (cold, hot) = template.baths(template.t_c)?;
            let r = template.prepare(h_i)?.complete(&cold, &hot, template.placement)?;
            Ok((r, spec))
        })
        .collect();
    Ok(observables
        .iter()
        .map(|&obs| {
            let mut curve = Curve {
                x: Vec::new(),
                y: Vec::new(),
                excluded: Vec::new(),
                grid: h_grid.to_vec(),
                meta: CurveMeta {
                    n_sites: template.n_sites,
                    t_c: template.t_c,
                    t_h: template.t_h,
                    delta_h: template.delta_h,
                    velocity: template.velocity,
                    observable: obs,
                },
            };
            for (&h_i, cell) in h_grid.iter().zip(&cells) {
                match cell.as_ref().map(|(r, s)| obs.evaluate(r, s)) {
                    Ok(Ok(v)) => {
                        curve.x.push(h_i);
                        curve.y.push(v);
                    }
                    Ok(Err(why)) => curve.excluded.push((h_i, why)),
                    Err(e) => curve.excluded.push((h_i, Exclusion::Failed(e.to_string()))),
                }
            }
            curve
        })
        .collect())
}

fn check_h_grid(h_grid: &[f64]) -> Result<()> {
    check_ascending("h_i", h_grid)
}

/// Curves ordered by size, then observable.
pub fn sweep_observable(
    h_grid: &[f64],
    sizes: &[usize],
    template: &CycleTemplate,
    observables: &[Observable],
) -> Result<Vec<Curve>> {
    check_h_grid(h_grid)?;
    template.validate()?;
    let mut out = Vec::new();
    for &n in sizes {
        let t = CycleTemplate { n_sites: n, ..*template };
        t.validate()?;
        out.extend(curves_for(&t, h_grid, observables)?);
    }
    Ok(out)
}

/// Curves ordered by velocity, then observable.
pub fn velocity_scan(
    velocities: &[f64],
    h_grid: &[f64],
    template: &CycleTemplate,
    observables: &[Observable],
) -> Result<Vec<Curve>> {
    check_h_grid(h_grid)?;
    if let Some(v) = velocities.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return invalid(format!("velocities must be > 0, got {v}"));
    }
    let mut out = Vec::new();
    for &v in velocities {
        let t = CycleTemplate { velocity: v, ..*template };
        t.validate()?;
        out.extend(curves_for(&t, h_grid, observables)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub h_i: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPair {
    /// h_i < h_crit
    pub critical: Option<Peak>,
    /// h_i > h_crit
    pub paramagnetic: Option<Peak>,
}

/// Discrete argmax on each side of `h_crit`. A side reports a peak only if
/// its argmax has valid neighbors on both sides and exceeds the lower of its
/// two flanking minima by the noise floor.
pub fn find_peaks(curve: &Curve, h_crit: f64) -> Result<PeakPair> {
    let below = curve.grid.iter().filter(|&&x| x < h_crit).count();
    let above = curve.grid.iter().filter(|&&x| x > h_crit).count();
    if below < 3 || above < 3 {
        return Err(Error::InvalidParameter(format!(
            "peak search needs 3 grid points on each side of {h_crit}, got {below} and {above}"
        )));
    }
    let range = curve.y.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - curve.y.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let floor = PEAK_NOISE_FLOOR * range;
    let side = |keep: &dyn Fn(f64) -> bool| -> Option<Peak> {
        let pts: Vec<(f64, f64)> = curve
            .x
            .iter()
            .zip(&curve.y)
            .filter(|(x, _)| keep(**x))
            .map(|(x, y)| (*x, *y))
            .collect();
        let (k, &(h_i, height)) = pts.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
        if k == 0 || k + 1 == pts.len() {
            return None;
        }
        let left = pts[..k].iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let right = pts[k + 1..].iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        (height - left.max(right) > floor).then_some(Peak { h_i, height })
    };
    Ok(PeakPair {
        critical: side(&|x| x < h_crit),
        paramagnetic: side(&|x| x > h_crit),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub prefactor: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares fit of log value = log prefactor + α log N.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0 && n.is_finite() && v.is_finite())) {
        return Err(Error::Fit(format!("sizes and values must be positive, got {p:?}")));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = points.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all sizes are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    Ok(ScalingFit {
        alpha,
        prefactor: intercept.exp(),
        residual: (ss / m).sqrt(),
        points: points.to_vec(),
    })
}

/// Cycle template for partial-thermalization scans.
pub fn partial_spec(template: &CycleTemplate, h_i: f64, jt: f64) -> Result<CycleSpec> {
    template.spec(h_i, template.t_c)?.with_thermalization(Thermalization::Partial { jt })
}
