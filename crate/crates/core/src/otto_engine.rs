//! The four-stroke Otto cycle.
//!
//! A: relaxed by the low-field bath at h_i
//! B: after the sweep h_i → h_f
//! C: after contact with the high-field bath at h_f
//! D: after the sweep h_f → h_i; the low-field bath closes the cycle.
//!
//! Which reservoir sits at which field is set by [`BathPlacement`]. By
//! default the hot bath acts at h_f: every gap of the paramagnet grows with
//! h, so with the hot bath at h_i the cycle can never extract work or cool
//! for h_i > 1.
//!
//! W > 0 is work extracted from the chain, Q > 0 is heat absorbed by it.

use serde::{Deserialize, Serialize};

use crate::chain_model::{ChainSpec, MajoranaCovariance};
use crate::dynamics::{quench_propagator_with, stroke_work, Integrator, Propagator, QuenchProtocol};
use crate::error::{invalid, Error, Result};
use crate::thermal_bath::{heat_exchanged, relax_covariance, thermal_covariance, BathSpec, RelaxationSchedule};

/// Sign band per site for regime classification.
pub const SIGN_BAND_PER_SITE: f64 = 1e-12;
/// |δη| below this makes Π a Carnot-point overflow.
pub const CARNOT_GAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Thermalization {
    Complete,
    /// Each bath stroke lasts for the given 𝒥t.
    Partial { jt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BathPlacement {
    /// Hot bath at h_f, cold bath at h_i.
    #[default]
    HotAtHighField,
    /// Hot bath at h_i, cold bath at h_f.
    HotAtLowField,
}

impl BathPlacement {
    /// (low-field bath, high-field bath)
    pub(crate) fn order<'a>(self, cold: &'a BathSpec, hot: &'a BathSpec) -> (&'a BathSpec, &'a BathSpec) {
        match self {
            BathPlacement::HotAtHighField => (cold, hot),
            BathPlacement::HotAtLowField => (hot, cold),
        }
    }

    /// (q_c, q_h) from the heats absorbed at low and high field.
    pub(crate) fn heats(self, q_low: f64, q_high: f64) -> (f64, f64) {
        match self {
            BathPlacement::HotAtHighField => (q_low, q_high),
            BathPlacement::HotAtLowField => (q_high, q_low),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSpec {
    pub chain: ChainSpec,
    pub h_i: f64,
    pub h_f: f64,
    pub velocity: f64,
    pub bath_cold: BathSpec,
    pub bath_hot: BathSpec,
    pub thermalization: Thermalization,
    pub placement: BathPlacement,
    pub integrator: Integrator,
}

impl CycleSpec {
    /// Completely thermalizing cycle with unit bath density of states.
    pub fn new(chain: ChainSpec, h_i: f64, h_f: f64, velocity: f64, t_c: f64, t_h: f64) -> Result<Self> {
        let s = Self {
            chain,
            h_i,
            h_f,
            velocity,
            bath_cold: BathSpec::at(t_c)?,
            bath_hot: BathSpec::at(t_h)?,
            thermalization: Thermalization::Complete,
            placement: BathPlacement::default(),
            integrator: Integrator::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_thermalization(mut self, thermalization: Thermalization) -> Result<Self> {
        self.thermalization = thermalization;
        self.validate()?;
        Ok(self)
    }

    pub fn with_placement(mut self, placement: BathPlacement) -> Self {
        self.placement = placement;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    /// h_i = h_f and T_c = T_h are admitted as degenerate cycles.
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.bath_cold.validate()?;
        self.bath_hot.validate()?;
        if !(self.h_i.is_finite() && self.h_f.is_finite() && self.h_i <= self.h_f) {
            return invalid(format!("h_i <= h_f required, got {} and {}", self.h_i, self.h_f));
        }
        if self.bath_cold.temperature > self.bath_hot.temperature {
            return invalid(format!(
                "T_c <= T_h required, got {} and {}",
                self.bath_cold.temperature, self.bath_hot.temperature
            ));
        }
        if let Thermalization::Partial { jt } = self.thermalization {
            if !(jt >= 0.0 && jt.is_finite()) {
                return invalid(format!("Jt >= 0 required, got {jt}"));
            }
        }
        self.protocol().map(|_| ())
    }

    pub fn protocol(&self) -> Result<QuenchProtocol> {
        QuenchProtocol::new(self.h_i, self.h_f, self.velocity)
    }

    pub fn eta_carnot(&self) -> f64 {
        1.0 - self.bath_cold.temperature / self.bath_hot.temperature
    }

    pub fn eta_r_carnot(&self) -> f64 {
        self.bath_cold.temperature / (self.bath_hot.temperature - self.bath_cold.temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    HeatEngine,
    Refrigerator,
    Accelerator,
    Heater,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::HeatEngine, Regime::Refrigerator, Regime::Accelerator, Regime::Heater];

    /// One-letter code used in regime maps.
    pub fn code(self) -> char {
        match self {
            Regime::HeatEngine => 'E',
            Regime::Refrigerator => 'R',
            Regime::Accelerator => 'A',
            Regime::Heater => 'H',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.code() == c)
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::HeatEngine => "heat-engine",
            Regime::Refrigerator => "refrigerator",
            Regime::Accelerator => "accelerator",
            Regime::Heater => "heater",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub regime: Regime,
    /// Some quantity lay inside the sign band and was read as zero.
    pub marginal: bool,
}

/// Regime from exact signs; zero counts as non-positive.
pub fn classify_regime(w: f64, q_c: f64, q_h: f64) -> Result<Regime> {
    classify_regime_banded(w, q_c, q_h, 0.0).map(|c| c.regime)
}

/// Regime with |x| <= band read as zero.
pub fn classify_regime_banded(w: f64, q_c: f64, q_h: f64, band: f64) -> Result<Classification> {
    if !(w.is_finite() && q_c.is_finite() && q_h.is_finite()) {
        return Err(Error::ForbiddenRegime { w, q_c, q_h });
    }
    let pos = |x: f64| x > band;
    let marginal = [w, q_c, q_h].iter().any(|x| x.abs() <= band);
    let regime = match (pos(w), pos(q_c), pos(q_h)) {
        (true, false, true) => Regime::HeatEngine,
        (false, true, false) => Regime::Refrigerator,
        (false, false, true) => Regime::Accelerator,
        (false, false, false) => Regime::Heater,
        _ => return Err(Error::ForbiddenRegime { w, q_c, q_h }),
    };
    Ok(Classification { regime, marginal })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub e_a: f64,
    pub e_b: f64,
    pub e_c: f64,
    pub e_d: f64,
    pub w: f64,
    pub q_c: f64,
    pub q_h: f64,
    /// None only for transient cycles of a partially thermalizing run.
    pub regime: Option<Regime>,
    pub marginal: bool,
    /// 1-based.
    pub n_cycle: usize,
}

impl CycleRecord {
    pub(crate) fn new(
        n_sites: usize,
        placement: BathPlacement,
        [e_a, e_b, e_c, e_d]: [f64; 4],
        e_next_a: f64,
        n_cycle: usize,
    ) -> Self {
        let w = stroke_work(e_a, e_b) + stroke_work(e_c, e_d);
        let (q_c, q_h) = placement.heats(heat_exchanged(e_d, e_next_a), heat_exchanged(e_b, e_c));
        let band = SIGN_BAND_PER_SITE * n_sites as f64;
        let cls = classify_regime_banded(w, q_c, q_h, band).ok();
        Self {
            e_a,
            e_b,
            e_c,
            e_d,
            w,
            q_c,
            q_h,
            regime: cls.map(|c| c.regime),
            marginal: cls.is_some_and(|c| c.marginal),
            n_cycle,
        }
    }

    /// |W - Q_c - Q_h|
    pub fn first_law_defect(&self) -> f64 {
        (self.w - self.q_c - self.q_h).abs()
    }

    /// Q_h/T_h + Q_c/T_c; +∞ when T_c = 0 and Q_c > 0.
    pub fn clausius_sum(&self, t_c: f64, t_h: f64) -> f64 {
        let term = |q: f64, t: f64| if q == 0.0 { 0.0 } else { q / t };
        term(self.q_h, t_h) + term(self.q_c, t_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub eta: f64,
    pub eta_carnot: f64,
    pub delta_eta: f64,
    pub pi: f64,
    pub eta_r: f64,
    pub eta_r_carnot: f64,
    pub delta_eta_r: f64,
    pub pi_r: f64,
    /// The record is a heat engine, so η and Π are physical.
    pub engine_native: bool,
    /// The record is a refrigerator, so η^R and Π_R are physical.
    pub refrigerator_native: bool,
    pub pi_overflow: bool,
    pub pi_r_overflow: bool,
}

pub fn engine_metrics(record: &CycleRecord, spec: &CycleSpec) -> Metrics {
    let eta = record.w / record.q_h;
    let eta_carnot = spec.eta_carnot();
    let delta_eta = eta_carnot - eta;
    let eta_r = record.q_c / record.w.abs();
    let eta_r_carnot = spec.eta_r_carnot();
    let delta_eta_r = eta_r_carnot - eta_r;
    Metrics {
        eta,
        eta_carnot,
        delta_eta,
        pi: record.w / delta_eta,
        eta_r,
        eta_r_carnot,
        delta_eta_r,
        pi_r: record.q_c / delta_eta_r,
        engine_native: record.regime == Some(Regime::HeatEngine),
        refrigerator_native: record.regime == Some(Regime::Refrigerator),
        pi_overflow: !(delta_eta.abs() >= CARNOT_GAP_TOL),
        pi_r_overflow: !(delta_eta_r.abs() >= CARNOT_GAP_TOL),
    }
}

/// Sweep propagators of one (N, h_i, h_f, v) geometry, reusable across bath
/// temperatures.
#[derive(Debug, Clone)]
pub struct PreparedCycle {
    pub chain: ChainSpec,
    pub h_i: f64,
    pub h_f: f64,
    pub up: Propagator,
    pub down: Propagator,
}

impl PreparedCycle {
    pub fn new(chain: ChainSpec, h_i: f64, h_f: f64, velocity: f64, integrator: Integrator) -> Result<Self> {
        let up = quench_propagator_with(&chain, &QuenchProtocol::new(h_i, h_f, velocity)?, integrator)?;
        let down = up.reversed();
        Ok(Self {
            chain,
            h_i,
            h_f,
            up,
            down,
        })
    }

    pub fn from_spec(spec: &CycleSpec) -> Result<Self> {
        spec.validate()?;
        Self::new(spec.chain, spec.h_i, spec.h_f, spec.velocity, spec.integrator)
    }

    fn energy(&self, c: &MajoranaCovariance, h: f64) -> Result<f64> {
        c.energy(&self.chain, h)
    }

    /// Cycle with both baths reaching equilibrium.
    pub fn complete(&self, cold: &BathSpec, hot: &BathSpec, placement: BathPlacement) -> Result<CycleRecord> {
        let (low, high) = placement.order(cold, hot);
        let a = thermal_covariance(&self.chain, self.h_i, low)?;
        let c = thermal_covariance(&self.chain, self.h_f, high)?;
        let b = a.conjugate(&self.up.majorana)?;
        let d = c.conjugate(&self.down.majorana)?;
        let e_a = self.energy(&a, self.h_i)?;
        let e = [e_a, self.energy(&b, self.h_f)?, self.energy(&c, self.h_f)?, self.energy(&d, self.h_i)?];
        Ok(CycleRecord::new(self.chain.n_sites(), placement, e, e_a, 1))
    }

    /// `n_cyc` cycles with bath strokes of finite 𝒥t, starting from the
    /// Gibbs state of the low-field bath at h_i. The low-field heat of cycle
    /// n is that of the stroke preparing A of cycle n+1.
    pub fn partial(
        &self,
        cold: &BathSpec,
        hot: &BathSpec,
        placement: BathPlacement,
        jt: f64,
        n_cyc: usize,
    ) -> Result<Vec<CycleRecord>> {
        if n_cyc == 0 {
            return invalid("n_cyc >= 1 required");
        }
        if !(jt >= 0.0 && jt.is_finite()) {
            return invalid(format!("Jt >= 0 required, got {jt}"));
        }
        let (low, high) = placement.order(cold, hot);
        let low_state = thermal_covariance(&self.chain, self.h_i, low)?;
        let high_state = thermal_covariance(&self.chain, self.h_f, high)?;
        let low_schedule = RelaxationSchedule::Duration(jt / low.dos);
        let high_schedule = RelaxationSchedule::Duration(jt / high.dos);
        let mut a = low_state.clone();
        let mut e_a = self.energy(&a, self.h_i)?;
        let mut out = Vec::with_capacity(n_cyc);
        for n in 1..=n_cyc {
            let b = a.conjugate(&self.up.majorana)?;
            let c = relax_covariance(&b, &high_state, high, high_schedule)?;
            let d = c.conjugate(&self.down.majorana)?;
            let next = relax_covariance(&d, &low_state, low, low_schedule)?;
            let e_next = self.energy(&next, self.h_i)?;
            let e = [e_a, self.energy(&b, self.h_f)?, self.energy(&c, self.h_f)?, self.energy(&d, self.h_i)?];
            out.push(CycleRecord::new(self.chain.n_sites(), placement, e, e_next, n));
            a = next;
            e_a = e_next;
        }
        Ok(out)
    }
}

/// One cycle; under partial thermalization, the first of
/// [`run_cycles_partial`].
pub fn run_cycle(spec: &CycleSpec) -> Result<CycleRecord> {
    let prepared = PreparedCycle::from_spec(spec)?;
    match spec.thermalization {
        Thermalization::Complete => prepared.complete(&spec.bath_cold, &spec.bath_hot, spec.placement),
        Thermalization::Partial { jt } => {
            Ok(prepared.partial(&spec.bath_cold, &spec.bath_hot, spec.placement, jt, 1)?[0])
        }
    }
}

/// Repeated cycles carrying the state across cycles.
pub fn run_cycles_partial(spec: &CycleSpec, n_cyc: usize) -> Result<Vec<CycleRecord>> {
    let jt = match spec.thermalization {
        Thermalization::Partial { jt } => jt,
        Thermalization::Complete => return invalid("run_cycles_partial needs partial thermalization"),
    };
    PreparedCycle::from_spec(spec)?.partial(&spec.bath_cold, &spec.bath_hot, spec.placement, jt, n_cyc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(n: usize, h_i: f64, h_f: f64, v: f64, t_c: f64, t_h: f64) -> CycleSpec {
        CycleSpec::new(ChainSpec::new(n, 1.0).unwrap(), h_i, h_f, v, t_c, t_h).unwrap()
    }

    #[test]
    fn validation() {
        let chain = ChainSpec::new(4, 1.0).unwrap();
        assert!(CycleSpec::new(chain, 1.0, 0.5, 0.1, 0.1, 0.5).is_err());
        assert!(CycleSpec::new(chain, 0.5, 1.0, 0.1, 0.6, 0.5).is_err());
        assert!(CycleSpec::new(chain, 0.5, 1.0, 0.0, 0.1, 0.5).is_err());
        let s = CycleSpec::new(chain, 0.5, 1.0, 0.1, 0.1, 0.5).unwrap();
        assert!(s.with_thermalization(Thermalization::Partial { jt: -1.0 }).is_err());
        assert!(run_cycles_partial(&s, 3).is_err());
    }

    #[test]
    fn classification_table() {
        assert_eq!(classify_regime(1.0, -2.0, 3.0).unwrap(), Regime::HeatEngine);
        assert_eq!(classify_regime(-1.0, 2.0, -3.0).unwrap(), Regime::Refrigerator);
        assert_eq!(classify_regime(-1.0, -2.0, 3.0).unwrap(), Regime::Accelerator);
        assert_eq!(classify_regime(-1.0, -2.0, -3.0).unwrap(), Regime::Heater);
        assert!(matches!(classify_regime(1.0, 2.0, 3.0), Err(Error::ForbiddenRegime { .. })));
        assert!(classify_regime(1.0, -2.0, -3.0).is_err());
        assert!(classify_regime(f64::NAN, -2.0, 3.0).is_err());
    }

    #[test]
    fn banded_classification_marks_marginal() {
        let c = classify_regime_banded(1e-14, -1.0, 1.0, 1e-12).unwrap();
        assert_eq!(c.regime, Regime::Accelerator);
        assert!(c.marginal);
        let c = classify_regime_banded(1e-6, -1.0, 1.0, 1e-12).unwrap();
        assert_eq!(c.regime, Regime::HeatEngine);
        assert!(!c.marginal);
    }

    #[test]
    fn regime_codes_round_trip() {
        for r in Regime::ALL {
            assert_eq!(Regime::from_code(r.code()), Some(r));
        }
    }

    #[test]
    fn first_law_and_clausius_hold() {
        for placement in [BathPlacement::HotAtHighField, BathPlacement::HotAtLowField] {
            for (h_i, v, t_c) in [(0.75, 0.05, 0.25), (1.2, 0.5, 0.45), (0.2, 0.01, 0.1), (1.6, 5.0, 0.0)] {
                let s = spec(8, h_i, h_i + 0.5, v, t_c, 0.5).with_placement(placement);
                let r = run_cycle(&s).unwrap();
                assert!(r.first_law_defect() < 1e-10);
                assert!(r.clausius_sum(t_c, 0.5) <= 1e-10);
                assert!(r.regime.is_some());
            }
        }
    }

    #[test]
    fn placements_exchange_the_baths() {
        let s = spec(6, 1.3, 1.8, 0.05, 0.1, 0.5);
        let high = run_cycle(&s).unwrap();
        let low = run_cycle(&s.with_placement(BathPlacement::HotAtLowField)).unwrap();
        assert_eq!(high.regime, Some(Regime::HeatEngine));
        // Growing gaps with the hot bath at low field: no work, no cooling.
        assert!(low.w < 0.0 && low.q_c < 0.0);
    }

    #[test]
    fn adiabatic_mode_formula() {
        // Slow gapped sweep: W = Σ (ε_i - ε_f)(n_A - n_C).
        let chain = ChainSpec::new(4, 1.0).unwrap();
        let s = CycleSpec::new(chain, 1.5, 2.0, 1e-3, 0.2, 0.6).unwrap();
        let r = run_cycle(&s).unwrap();
        let ti = crate::chain_model::diagonalize(&chain, 1.5).unwrap();
        let tf = crate::chain_model::diagonalize(&chain, 2.0).unwrap();
        let na = crate::chain_model::thermal_occupations(ti.energies.as_slice(), 0.2).unwrap();
        let nc = crate::chain_model::thermal_occupations(tf.energies.as_slice(), 0.6).unwrap();
        let w: f64 = (0..4)
            .map(|k| (ti.energies[k] - tf.energies[k]) * (na.values()[k] - nc.values()[k]))
            .sum();
        assert_abs_diff_eq!(r.w, w, epsilon = 1e-6);
    }

    #[test]
    fn single_temperature_gives_no_work() {
        for v in [0.01, 0.3, 10.0] {
            let r = run_cycle(&spec(6, 0.6, 1.1, v, 0.4, 0.4)).unwrap();
            assert!(r.w <= 1e-10);
        }
    }

    #[test]
    fn undriven_cycle_conducts_heat() {
        let r = run_cycle(&spec(6, 0.9, 0.9, 0.1, 0.25, 0.5)).unwrap();
        assert_eq!(r.w, 0.0);
        assert!(r.q_h > 0.0);
        assert_abs_diff_eq!(r.q_h, -r.q_c, epsilon = 1e-14);
        assert_eq!(r.regime, Some(Regime::Accelerator));
        assert!(r.marginal);
    }

    #[test]
    fn metrics_arithmetic() {
        let s = spec(4, 0.5, 1.0, 0.1, 0.25, 0.5);
        let mut r = run_cycle(&s).unwrap();
        r.w = 0.1;
        r.q_h = 0.4;
        r.q_c = -0.3;
        r.regime = Some(Regime::HeatEngine);
        let m = engine_metrics(&r, &s);
        assert_abs_diff_eq!(m.eta_carnot, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.eta_r_carnot, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.eta, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m.delta_eta, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m.pi, 0.4, epsilon = 1e-14);
        assert!(m.engine_native && !m.refrigerator_native);
        assert!(!m.pi_overflow);
        r.w = 0.2;
        assert!(engine_metrics(&r, &s).pi_overflow);
    }

    #[test]
    fn carnot_bounds() {
        for (h_i, t_c) in [(0.75, 0.25), (0.3, 0.1), (1.2, 0.45), (1.1, 0.4)] {
            let s = spec(8, h_i, h_i + 0.5, 0.05, t_c, 0.5);
            let r = run_cycle(&s).unwrap();
            let m = engine_metrics(&r, &s);
            if m.engine_native {
                assert!(m.eta >= 0.0 && m.eta <= m.eta_carnot + 1e-10);
            }
            if m.refrigerator_native {
                assert!(m.eta_r >= 0.0 && m.eta_r <= m.eta_r_carnot + 1e-10);
            }
        }
    }

    #[test]
    fn long_contact_reproduces_complete_cycle() {
        let s = spec(6, 0.75, 1.25, 0.05, 0.25, 0.5);
        let complete = run_cycle(&s).unwrap();
        let p = s.with_thermalization(Thermalization::Partial { jt: 50.0 }).unwrap();
        for r in run_cycles_partial(&p, 4).unwrap() {
            assert_abs_diff_eq!(r.w, complete.w, epsilon = 1e-8);
            assert_abs_diff_eq!(r.q_c, complete.q_c, epsilon = 1e-8);
            assert_abs_diff_eq!(r.q_h, complete.q_h, epsilon = 1e-8);
        }
    }

    #[test]
    fn no_contact_means_no_heat() {
        let s = spec(6, 0.75, 1.25, 0.2, 0.25, 0.5)
            .with_thermalization(Thermalization::Partial { jt: 0.0 })
            .unwrap();
        let rs = run_cycles_partial(&s, 5).unwrap();
        for r in &rs {
            assert_eq!(r.q_c, 0.0);
            assert_eq!(r.q_h, 0.0);
            assert!(r.w <= 1e-12);
        }
    }

    #[test]
    fn partial_cycles_converge_geometrically() {
        let jt = 0.4;
        let s = spec(6, 0.75, 1.25, 0.05, 0.25, 0.5)
            .with_thermalization(Thermalization::Partial { jt })
            .unwrap();
        let rs = run_cycles_partial(&s, 12).unwrap();
        let bound = (-2.0 * jt).exp();
        for k in 1..rs.len() - 1 {
            let d0 = (rs[k].w - rs[k - 1].w).abs();
            let d1 = (rs[k + 1].w - rs[k].w).abs();
            if d0 > 1e-14 {
                assert!(d1 <= bound * d0 + 1e-15, "cycle {k}: {d1} > {bound}·{d0}");
            }
        }
    }

    #[test]
    fn partial_work_grows_with_contact_time() {
        let s = spec(6, 1.5, 2.0, 0.05, 0.1, 0.5);
        let complete = run_cycle(&s).unwrap();
        assert_eq!(complete.regime, Some(Regime::HeatEngine));
        let mut prev = f64::NEG_INFINITY;
        for jt in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let p = s.with_thermalization(Thermalization::Partial { jt }).unwrap();
            let w = run_cycles_partial(&p, 60).unwrap().last().unwrap().w;
            assert!(w > prev && w <= complete.w + 1e-12, "Jt = {jt}: {w}");
            prev = w;
        }
    }

    #[test]
    fn run_cycle_partial_is_first_cycle() {
        let s = spec(4, 0.5, 1.0, 0.1, 0.1, 0.5)
            .with_thermalization(Thermalization::Partial { jt: 0.7 })
            .unwrap();
        assert_eq!(run_cycle(&s).unwrap(), run_cycles_partial(&s, 3).unwrap()[0]);
    }
}
