//! Thermalization strokes.
//!
//! Every site couples to an identical bath, so all modes relax at the common
//! rate 2𝒥 towards the Gibbs state of the instantaneous Hamiltonian. A stroke
//! of length t therefore mixes the incoming state with the thermal one at
//! weight p = e^{-2𝒥t}. Only 𝒥t is ever needed.

use serde::{Deserialize, Serialize};

use crate::chain_model::{
    diagonalize, thermal_occupations, ChainSpec, CorrelationMatrix, MajoranaCovariance, ModeOccupations,
    C64, ZERO_MODE_TOL,
};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub temperature: f64,
    /// Density of states 𝒥 (a rate).
    pub dos: f64,
}

impl BathSpec {
    pub fn new(temperature: f64, dos: f64) -> Result<Self> {
        let b = Self { temperature, dos };
        b.validate()?;
        Ok(b)
    }

    /// Bath with 𝒥 = 1, so that durations are measured in units of 1/𝒥.
    pub fn at(temperature: f64) -> Result<Self> {
        Self::new(temperature, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return invalid(format!("bath temperature >= 0 required, got {}", self.temperature));
        }
        if !(self.dos > 0.0 && self.dos.is_finite()) {
            return invalid(format!("bath density of states > 0 required, got {}", self.dos));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RelaxationSchedule {
    Duration(f64),
    Complete,
}

impl RelaxationSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RelaxationSchedule::Duration(t) if !(t >= 0.0) => {
                invalid(format!("relaxation time >= 0 required, got {t}"))
            }
            _ => Ok(()),
        }
    }

    /// Weight e^{-2𝒥t} retained by the incoming state.
    pub fn survival(&self, bath: &BathSpec) -> Result<f64> {
        self.validate()?;
        bath.validate()?;
        Ok(match *self {
            RelaxationSchedule::Duration(t) => (-2.0 * bath.dos * t).exp(),
            RelaxationSchedule::Complete => 0.0,
        })
    }
}

/// Gibbs state of the chain at field `h`; the unique fixed point of the bath.
pub fn thermal_correlations(spec: &ChainSpec, h: f64, bath: &BathSpec) -> Result<CorrelationMatrix> {
    thermal_covariance(spec, h, bath).map(|c| CorrelationMatrix::from_majorana(&c))
}

/// [`thermal_correlations`] in Majorana form.
pub fn thermal_covariance(spec: &ChainSpec, h: f64, bath: &BathSpec) -> Result<MajoranaCovariance> {
    bath.validate()?;
    if h.abs() < ZERO_MODE_TOL {
        log::warn!("thermalizing at h = 0: the open chain has a zero mode and a flat band");
    }
    let t = diagonalize(spec, h)?;
    let occ = thermal_occupations(t.energies.as_slice(), bath.temperature)?;
    MajoranaCovariance::from_modes(&t, &occ)
}

/// n_k(t) = f(ε_k)(1 - e^{-2𝒥t}) + n0_k e^{-2𝒥t}.
pub fn relax_mode_occupations(
    n0: &ModeOccupations,
    energies: &[f64],
    bath: &BathSpec,
    t: f64,
) -> Result<ModeOccupations> {
    if n0.len() != energies.len() {
        return Err(Error::DimensionMismatch {
            expected: energies.len(),
            found: n0.len(),
        });
    }
    let p = RelaxationSchedule::Duration(t).survival(bath)?;
    let f = thermal_occupations(energies, bath.temperature)?;
    ModeOccupations::new(
        f.values()
            .iter()
            .zip(n0.values())
            .map(|(f, n)| f * (1.0 - p) + n * p)
            .collect(),
    )
}

/// c_thermal (1 - e^{-2𝒥t}) + c0 e^{-2𝒥t}; exactly c_thermal when complete.
pub fn relax_correlations(
    c0: &CorrelationMatrix,
    c_thermal: &CorrelationMatrix,
    bath: &BathSpec,
    schedule: RelaxationSchedule,
) -> Result<CorrelationMatrix> {
    check_dims(c0.n_sites(), c_thermal.n_sites())?;
    let p = schedule.survival(bath)?;
    if p == 0.0 {
        return Ok(c_thermal.clone());
    }
    Ok(CorrelationMatrix {
        g_block: &c_thermal.g_block * real(1.0 - p) + &c0.g_block * real(p),
        f_block: &c_thermal.f_block * real(1.0 - p) + &c0.f_block * real(p),
    })
}

/// [`relax_correlations`] in Majorana form.
pub fn relax_covariance(
    c0: &MajoranaCovariance,
    c_thermal: &MajoranaCovariance,
    bath: &BathSpec,
    schedule: RelaxationSchedule,
) -> Result<MajoranaCovariance> {
    check_dims(c0.n_sites(), c_thermal.n_sites())?;
    let p = schedule.survival(bath)?;
    if p == 0.0 {
        return Ok(c_thermal.clone());
    }
    c0.mix(c_thermal, p)
}

/// Heat absorbed by the system at fixed field.
pub fn heat_exchanged(e_before: f64, e_after: f64) -> f64 {
    e_after - e_before
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::{energy_expectation, mode_occupations};
    use approx::assert_abs_diff_eq;

    fn spec(n: usize) -> ChainSpec {
        ChainSpec::new(n, 1.0).unwrap()
    }

    fn max_diff(a: &CorrelationMatrix, b: &CorrelationMatrix) -> f64 {
        (a.nambu() - b.nambu()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn bath_validation() {
        assert!(BathSpec::new(-0.1, 1.0).is_err());
        assert!(BathSpec::new(0.1, 0.0).is_err());
        assert!(BathSpec::new(0.0, 2.0).is_ok());
        assert!(RelaxationSchedule::Duration(-1.0).validate().is_err());
    }

    #[test]
    fn zero_temperature_state_is_pure() {
        let c = thermal_correlations(&spec(6), 0.7, &BathSpec::at(0.0).unwrap()).unwrap();
        assert!(c.purity_defect() < 1e-10);
    }

    #[test]
    fn infinite_temperature_energy_vanishes() {
        let s = spec(8);
        let c = thermal_correlations(&s, 0.9, &BathSpec::at(1e6).unwrap()).unwrap();
        assert!(energy_expectation(&s, 0.9, &c).unwrap().abs() < 1e-3 * 8.0);
    }

    #[test]
    fn mode_relaxation_limits() {
        let b = BathSpec::at(0.5).unwrap();
        let e = [0.3, 1.0, 2.5];
        let n0 = ModeOccupations::new(vec![1.0, 0.2, 0.9]).unwrap();
        let f = thermal_occupations(&e, 0.5).unwrap();
        assert_eq!(relax_mode_occupations(&n0, &e, &b, 0.0).unwrap(), n0);
        let half = relax_mode_occupations(&n0, &e, &b, 0.5 * 2f64.ln()).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(half.values()[k], 0.5 * (f.values()[k] + n0.values()[k]), epsilon = 1e-14);
        }
        let long = relax_mode_occupations(&n0, &e, &b, 50.0).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(long.values()[k], f.values()[k], epsilon = 1e-12);
        }
        assert!(relax_mode_occupations(&n0, &e, &b, -1.0).is_err());
    }

    #[test]
    fn dos_enters_only_through_product() {
        let e = [0.3, 1.0];
        let n0 = ModeOccupations::new(vec![1.0, 0.0]).unwrap();
        let a = relax_mode_occupations(&n0, &e, &BathSpec::new(0.4, 2.0).unwrap(), 0.3).unwrap();
        let b = relax_mode_occupations(&n0, &e, &BathSpec::new(0.4, 0.5).unwrap(), 1.2).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(a.values()[k], b.values()[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn thermal_state_is_fixed_point() {
        let s = spec(5);
        let b = BathSpec::at(0.3).unwrap();
        let th = thermal_correlations(&s, 0.8, &b).unwrap();
        for t in [0.0, 0.1, 1.0, 10.0] {
            let c = relax_correlations(&th, &th, &b, RelaxationSchedule::Duration(t)).unwrap();
            assert!(max_diff(&c, &th) < 1e-15);
        }
        assert_eq!(relax_correlations(&th, &th, &b, RelaxationSchedule::Complete).unwrap(), th);
    }

    #[test]
    fn schedule_end_points() {
        let s = spec(4);
        let b = BathSpec::at(0.5).unwrap();
        let th = thermal_correlations(&s, 0.5, &b).unwrap();
        let c0 = thermal_correlations(&s, 1.5, &BathSpec::at(0.0).unwrap()).unwrap();
        assert_eq!(relax_correlations(&c0, &th, &b, RelaxationSchedule::Complete).unwrap(), th);
        assert_eq!(relax_correlations(&c0, &th, &b, RelaxationSchedule::Duration(0.0)).unwrap(), c0);
        let mismatch = thermal_correlations(&spec(3), 0.5, &b).unwrap();
        assert!(relax_correlations(&mismatch, &th, &b, RelaxationSchedule::Complete).is_err());
    }

    #[test]
    fn approach_is_monotone() {
        let s = spec(4);
        let b = BathSpec::at(0.5).unwrap();
        let th = thermal_correlations(&s, 0.5, &b).unwrap();
        let c0 = thermal_correlations(&s, 1.5, &BathSpec::at(0.0).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for t in [0.0, 0.05, 0.2, 0.7, 2.0, 5.0] {
            let d = max_diff(&relax_correlations(&c0, &th, &b, RelaxationSchedule::Duration(t)).unwrap(), &th);
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn correlation_and_mode_pictures_agree() {
        let s = spec(6);
        let h = 0.6;
        let b = BathSpec::at(0.4).unwrap();
        let tr = diagonalize(&s, h).unwrap();
        let th = thermal_correlations(&s, h, &b).unwrap();
        // An incoming state diagonal in the same basis, as after a slow sweep.
        let n0 = ModeOccupations::new(vec![0.9, 0.1, 0.5, 0.3, 0.0, 0.7]).unwrap();
        let c0 = crate::chain_model::correlation_matrix(&tr, &n0).unwrap();
        for t in [0.0, 0.3, 1.1, 4.0] {
            let c = relax_correlations(&c0, &th, &b, RelaxationSchedule::Duration(t)).unwrap();
            let projected = mode_occupations(&tr, &c).unwrap();
            let direct = relax_mode_occupations(&n0, tr.energies.as_slice(), &b, t).unwrap();
            for k in 0..6 {
                assert_abs_diff_eq!(projected.values()[k], direct.values()[k], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn heat_follows_survival_factor() {
        let s = spec(6);
        let h = 1.25;
        let b = BathSpec::at(0.25).unwrap();
        let th = thermal_covariance(&s, h, &b).unwrap();
        let c0 = thermal_covariance(&s, h, &BathSpec::at(0.5).unwrap()).unwrap();
        let e0 = c0.energy(&s, h).unwrap();
        let q_inf = heat_exchanged(e0, th.energy(&s, h).unwrap());
        assert!(q_inf < 0.0);
        for t in [0.01, 0.2, 1.0, 3.0] {
            let c = relax_covariance(&c0, &th, &b, RelaxationSchedule::Duration(t)).unwrap();
            let q = heat_exchanged(e0, c.energy(&s, h).unwrap());
            assert_abs_diff_eq!(q / q_inf, 1.0 - (-2.0 * t).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn mixed_state_stays_physical() {
        let s = spec(5);
        let b = BathSpec::at(0.2).unwrap();
        let th = thermal_correlations(&s, 0.4, &b).unwrap();
        let c0 = thermal_correlations(&s, 1.3, &BathSpec::at(0.0).unwrap()).unwrap();
        let c = relax_correlations(&c0, &th, &b, RelaxationSchedule::Duration(0.4)).unwrap();
        for x in c.nambu_eigenvalues() {
            assert!((-1e-12..=1.0 + 1e-12).contains(&x));
        }
    }

    #[test]
    fn heat_sign_convention() {
        assert_eq!(heat_exchanged(1.0, 1.0), 0.0);
        assert!(heat_exchanged(-2.0, -1.0) > 0.0);
    }
}
