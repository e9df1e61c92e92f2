//! Run configuration: TOML file, then command-line overrides, then validation.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use otto_ising::analysis::{grid_with_step, linspace, CycleTemplate, Grid2D, Observable};
use otto_ising::chain_model::ChainSpec;
use otto_ising::dynamics::{Integrator, DEFAULT_SPLITTING_STEP};
use otto_ising::otto_engine::{BathPlacement, CycleSpec, Thermalization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    HotAtHighField,
    HotAtLowField,
}

impl From<Placement> for BathPlacement {
    fn from(p: Placement) -> Self {
        match p {
            Placement::HotAtHighField => BathPlacement::HotAtHighField,
            Placement::HotAtLowField => BathPlacement::HotAtLowField,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorKind {
    Splitting4,
    Splitting6,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub h_min: f64,
    pub h_max: f64,
    pub h_points: usize,
    pub t_c_min: f64,
    /// Defaults to T_h - 0.02.
    pub t_c_max: Option<f64>,
    pub t_c_points: usize,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        Self {
            h_min: 0.1,
            h_max: 2.0,
            h_points: 60,
            t_c_min: 0.02,
            t_c_max: None,
            t_c_points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HGrid {
    pub h_min: f64,
    pub h_max: f64,
    pub h_step: f64,
}

impl Default for HGrid {
    fn default() -> Self {
        Self {
            h_min: 0.1,
            h_max: 2.0,
            h_step: 0.02,
        }
    }
}

impl HGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        Ok(grid_with_step(self.h_min, self.h_max, self.h_step)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurvesConfig {
    #[serde(flatten)]
    pub grid: HGrid,
    pub sizes: Vec<usize>,
    pub observables: Vec<String>,
}

impl Default for CurvesConfig {
    fn default() -> Self {
        Self {
            grid: HGrid::default(),
            sizes: vec![20, 50],
            observables: Observable::ALL.iter().map(|o| o.tag().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingConfig {
    #[serde(flatten)]
    pub grid: HGrid,
    pub sizes: Vec<usize>,
    pub observable: String,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            grid: HGrid::default(),
            sizes: vec![20, 30, 40, 50],
            observable: "pi".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VelocityConfig {
    #[serde(flatten)]
    pub grid: HGrid,
    pub velocities: Vec<f64>,
    pub observable: String,
}

impl Default for VelocityConfig {
    fn default() -> Self {
        Self {
            grid: HGrid::default(),
            velocities: vec![1e-3, 5e-3, 1e-2, 5e-2],
            observable: "pi".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_sites: usize,
    pub coupling: f64,
    pub h_i: f64,
    /// Defaults to h_i + delta_h.
    pub h_f: Option<f64>,
    pub delta_h: f64,
    pub velocity: f64,
    pub t_c: f64,
    pub t_h: f64,
    pub placement: Placement,
    pub integrator: IntegratorKind,
    pub max_step: f64,
    /// Bath contact times for `cycles`.
    pub jt: Vec<f64>,
    pub n_cyc: usize,
    pub oracle: bool,
    pub out: PathBuf,
    #[serde(rename = "phase-diagram")]
    pub phase_diagram: PhaseDiagramConfig,
    pub curves: CurvesConfig,
    pub scaling: ScalingConfig,
    pub velocity_scan: VelocityConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_sites: 50,
            coupling: 1.0,
            h_i: 0.75,
            h_f: None,
            delta_h: 0.5,
            velocity: 0.005,
            t_c: 0.25,
            t_h: 0.5,
            placement: Placement::HotAtHighField,
            integrator: IntegratorKind::Splitting6,
            max_step: DEFAULT_SPLITTING_STEP,
            jt: vec![0.5, 1.0, 2.0, 5.0],
            n_cyc: 20,
            oracle: false,
            out: PathBuf::from("out"),
            phase_diagram: PhaseDiagramConfig::default(),
            curves: CurvesConfig::default(),
            scaling: ScalingConfig::default(),
            velocity_scan: VelocityConfig::default(),
        }
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n_sites: Option<usize>,
    pub h_i: Option<f64>,
    pub h_f: Option<f64>,
    pub velocity: Option<f64>,
    pub t_c: Option<f64>,
    pub t_h: Option<f64>,
    pub jt: Option<Vec<f64>>,
    pub n_cyc: Option<usize>,
    pub oracle: bool,
    pub out: Option<PathBuf>,
}

/// Option-valued keys, absent from the serialized defaults.
const OPTIONAL_KEYS: [&str; 2] = ["h_f", "phase-diagram.t_c_max"];

fn key_paths(table: &toml::Table, prefix: &str, out: &mut BTreeSet<String>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        if let toml::Value::Table(t) = v {
            key_paths(t, &path, out);
        }
        out.insert(path);
    }
}

impl RunConfig {
    /// Parses TOML text, reporting every unknown key at once.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().context("config is not valid TOML")?;
        let mut known = BTreeSet::new();
        key_paths(&toml::Table::try_from(RunConfig::default())?, "", &mut known);
        known.extend(OPTIONAL_KEYS.iter().map(|s| s.to_string()));
        let mut given = BTreeSet::new();
        key_paths(&table, "", &mut given);
        let unknown: Vec<&String> = given.difference(&known).collect();
        if !unknown.is_empty() {
            let list: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            bail!("unknown config keys: {}", list.join(", "));
        }
        Ok(toml::Value::Table(table).try_into()?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($($f:ident => $t:ident),*) => { $(if let Some(v) = o.$f { self.$t = v; })* };
        }
        set!(n_sites => n_sites, h_i => h_i, velocity => velocity, t_c => t_c, t_h => t_h, jt => jt, n_cyc => n_cyc, out => out);
        if o.h_f.is_some() {
            self.h_f = o.h_f;
        }
        self.oracle |= o.oracle;
    }

    pub fn h_f(&self) -> f64 {
        self.h_f.unwrap_or(self.h_i + self.delta_h)
    }

    /// Sweep commands use h_f - h_i as the fixed δh.
    pub fn delta_h(&self) -> f64 {
        self.h_f() - self.h_i
    }

    pub fn integrator(&self) -> Integrator {
        match self.integrator {
            IntegratorKind::Splitting4 => Integrator::Splitting4 { max_step: self.max_step },
            IntegratorKind::Splitting6 => Integrator::Splitting6 { max_step: self.max_step },
            IntegratorKind::Rk4 => Integrator::RungeKutta4,
        }
    }

    pub fn chain(&self) -> Result<ChainSpec> {
        Ok(ChainSpec::new(self.n_sites, self.coupling)?)
    }

    pub fn cycle_spec(&self) -> Result<CycleSpec> {
        let s = CycleSpec::new(self.chain()?, self.h_i, self.h_f(), self.velocity, self.t_c, self.t_h)?;
        Ok(s.with_placement(self.placement.into()).with_integrator(self.integrator()))
    }

    pub fn partial_spec(&self, jt: f64) -> Result<CycleSpec> {
        Ok(self.cycle_spec()?.with_thermalization(Thermalization::Partial { jt })?)
    }

    pub fn template(&self) -> CycleTemplate {
        CycleTemplate {
            n_sites: self.n_sites,
            coupling: self.coupling,
            delta_h: self.delta_h(),
            velocity: self.velocity,
            t_c: self.t_c,
            t_h: self.t_h,
            placement: self.placement.into(),
            integrator: self.integrator(),
        }
    }

    pub fn phase_grid(&self) -> Result<Grid2D> {
        let p = &self.phase_diagram;
        let t_c_max = p.t_c_max.unwrap_or(self.t_h - 0.02);
        if t_c_max >= self.t_h {
            bail!("phase-diagram.t_c_max < T_h required");
        }
        Ok(Grid2D::new(
            linspace(p.h_min, p.h_max, p.h_points),
            linspace(p.t_c_min, t_c_max, p.t_c_points),
            self.template(),
        )?)
    }

    /// Checks every constraint the commands rely on.
    pub fn validate(&self) -> Result<()> {
        if !(self.h_i < self.h_f()) {
            bail!("h_i < h_f required (h_i = {}, h_f = {})", self.h_i, self.h_f());
        }
        if !(self.t_c < self.t_h) {
            bail!("T_c < T_h required (T_c = {}, T_h = {})", self.t_c, self.t_h);
        }
        if self.n_cyc == 0 {
            bail!("n_cyc >= 1 required");
        }
        if self.jt.is_empty() || self.jt.iter().any(|j| !(*j > 0.0 && j.is_finite())) {
            bail!("jt values must be > 0");
        }
        if !(self.max_step > 0.0) {
            bail!("max_step > 0 required");
        }
        self.cycle_spec()?;
        for tag in self.curves.observables.iter().chain([&self.scaling.observable, &self.velocity_scan.observable]) {
            observable(tag)?;
        }
        for (name, sizes) in [("curves", &self.curves.sizes), ("scaling", &self.scaling.sizes)] {
            if sizes.is_empty() || sizes.iter().any(|n| *n < 2) {
                bail!("{name}.sizes must be nonempty with every N >= 2");
            }
        }
        if self.velocity_scan.velocities.is_empty() || self.velocity_scan.velocities.iter().any(|v| !(*v > 0.0)) {
            bail!("velocity_scan.velocities must be nonempty and > 0");
        }
        for g in [&self.curves.grid, &self.scaling.grid, &self.velocity_scan.grid] {
            g.values()?;
        }
        self.phase_grid()?;
        Ok(())
    }
}

pub fn observable(tag: &str) -> Result<Observable> {
    Observable::from_tag(tag).ok_or_else(|| {
        let known: Vec<&str> = Observable::ALL.iter().map(|o| o.tag()).collect();
        anyhow!("unknown observable '{tag}', expected one of {}", known.join(", "))
    })
}
