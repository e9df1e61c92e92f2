//! Module invariants as seeded property checks, shared by the `properties`
//! and `acceptance` test targets.

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use otto_ising::analysis::fit_power_law;
use otto_ising::chain_model::{diagonalize, energy_expectation, thermal_occupations, ChainSpec, MajoranaCovariance};
use otto_ising::dynamics::{quench_propagator, QuenchProtocol};
use otto_ising::otto_engine::{classify_regime, engine_metrics, run_cycle, CycleSpec, Regime};
use otto_ising::thermal_bath::{relax_covariance, thermal_covariance, BathSpec, RelaxationSchedule};

pub type Property = fn(u32) -> Result<(), String>;

pub const ALL: [(&str, Property); 8] = [
    ("bogoliubov_constraints", bogoliubov_constraints),
    ("gaussian_state_positivity", gaussian_state_positivity),
    ("propagator_unitarity", propagator_unitarity),
    ("relaxation_fixed_point_and_monotonicity", relaxation_fixed_point_and_monotonicity),
    ("regime_exclusivity", regime_exclusivity),
    ("cycle_laws_and_carnot_bounds", cycle_laws_and_carnot_bounds),
    ("power_law_fit_exactness", power_law_fit_exactness),
    ("free_energy_energy_ordering", free_energy_energy_ordering),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(cases: u32, s: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(cases).run(&s, test).map_err(|e| e.to_string())
}

fn ok<T>(r: otto_ising::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

fn chain(n: usize, j: f64) -> Result<ChainSpec, TestCaseError> {
    ok(ChainSpec::new(n, j))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

/// φφᵀ = ψψᵀ = 1 and sorted nonnegative energies at every (N, J, h).
pub fn bogoliubov_constraints(cases: u32) -> Result<(), String> {
    check(cases, (2usize..=24, 0.2f64..2.0, 0.0f64..3.0), |(n, j, h)| {
        let t = ok(diagonalize(&chain(n, j)?, h))?;
        let (rp, rq) = t.constraint_residuals();
        prop_assert!(rp < 1e-10 && rq < 1e-10, "residuals {rp:e} {rq:e}");
        prop_assert!(t.energies.iter().all(|e| *e >= 0.0));
        prop_assert!(t.energies.as_slice().windows(2).all(|w| w[0] <= w[1]));
        Ok(())
    })
}

/// Thermal correlators are Hermitian with Nambu eigenvalues in [0, 1].
pub fn gaussian_state_positivity(cases: u32) -> Result<(), String> {
    check(cases, (2usize..=16, 0.0f64..3.0, 0.0f64..3.0), |(n, h, temp)| {
        let s = chain(n, 1.0)?;
        let cov = ok(thermal_covariance(&s, h, &ok(BathSpec::at(temp))?))?;
        let c = otto_ising::chain_model::CorrelationMatrix::from_majorana(&cov);
        let (herm, part) = c.symmetry_residuals();
        prop_assert!(herm < 1e-10 && part < 1e-10);
        for ev in c.nambu_eigenvalues() {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&ev), "eigenvalue {ev}");
        }
        Ok(())
    })
}

/// Sweep propagators stay orthogonal and the reversed sweep is their time reverse.
pub fn propagator_unitarity(cases: u32) -> Result<(), String> {
    check(cases, (2usize..=12, 0.0f64..2.0, 0.0f64..2.0, 0.05f64..2.0), |(n, h0, h1, v)| {
        let s = chain(n, 1.0)?;
        let p = ok(QuenchProtocol::new(h0, h1, v))?;
        let w = ok(quench_propagator(&s, &p))?;
        prop_assert!(w.orthogonality_defect() < 1e-10, "defect {:e}", w.orthogonality_defect());
        let back = ok(quench_propagator(&s, &p.reversed()))?;
        let diff = max_abs(&(&back.majorana - &w.reversed().majorana));
        prop_assert!(diff < 1e-9, "reverse mismatch {diff:e}");
        Ok(())
    })
}

/// The Gibbs state is a fixed point, and the distance to it shrinks with 𝒥t.
pub fn relaxation_fixed_point_and_monotonicity(cases: u32) -> Result<(), String> {
    check(cases, (2usize..=10, 0.0f64..2.0, 0.01f64..2.0, 0.0f64..3.0, 0.0f64..3.0), |(n, h, temp, t0, t1)| {
        let s = chain(n, 1.0)?;
        let bath = ok(BathSpec::at(temp))?;
        let th = ok(thermal_covariance(&s, h, &bath))?;
        let fixed = ok(relax_covariance(&th, &th, &bath, RelaxationSchedule::Duration(t0)))?;
        prop_assert!(max_abs(&(&fixed.matrix - &th.matrix)) < 1e-12);
        // Start from a state thermal at another field.
        let start = ok(thermal_covariance(&s, h + 1.0, &ok(BathSpec::at(0.05))?))?;
        let dist = |t: f64| -> Result<f64, TestCaseError> {
            let c = ok(relax_covariance(&start, &th, &bath, RelaxationSchedule::Duration(t)))?;
            Ok(max_abs(&(&c.matrix - &th.matrix)))
        };
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        prop_assert!(dist(hi)? <= dist(lo)? + 1e-14);
        let done = ok(relax_covariance(&start, &th, &bath, RelaxationSchedule::Complete))?;
        prop_assert!(max_abs(&(&done.matrix - &th.matrix)) == 0.0);
        Ok(())
    })
}

/// Every sign pattern allowed by the first law maps to exactly one regime
/// whose defining signs it satisfies.
pub fn regime_exclusivity(cases: u32) -> Result<(), String> {
    check(cases, (-1.0f64..1.0, -1.0f64..1.0), |(q_c, q_h)| {
        let w = q_c + q_h;
        let defining = |r: Regime| match r {
            Regime::HeatEngine => w > 0.0 && q_c <= 0.0 && q_h > 0.0,
            Regime::Refrigerator => w <= 0.0 && q_c > 0.0 && q_h <= 0.0,
            Regime::Accelerator => w <= 0.0 && q_c <= 0.0 && q_h > 0.0,
            Regime::Heater => w <= 0.0 && q_c <= 0.0 && q_h <= 0.0,
        };
        let matching: Vec<Regime> = Regime::ALL.into_iter().filter(|r| defining(*r)).collect();
        match classify_regime(w, q_c, q_h) {
            Ok(r) => prop_assert_eq!(&matching, &vec![r]),
            Err(_) => prop_assert!(matching.is_empty()),
        }
        // Under the first law only W > 0 with Q_c > 0 is left unclassified.
        prop_assert_eq!(matching.is_empty(), w > 0.0 && q_c > 0.0);
        Ok(())
    })
}

/// First law, Clausius inequality and Carnot bounds for random cycles.
pub fn cycle_laws_and_carnot_bounds(cases: u32) -> Result<(), String> {
    let s = (2usize..=8, 0.05f64..2.0, 0.05f64..1.0, 0.01f64..0.5, 0.02f64..1.0, 0.05f64..1.0);
    check(cases, s, |(n, h_i, dh, v, t_c, dt)| {
        let spec = ok(CycleSpec::new(chain(n, 1.0)?, h_i, h_i + dh, v, t_c, t_c + dt))?;
        let r = ok(run_cycle(&spec))?;
        prop_assert!(r.first_law_defect() < 1e-10);
        prop_assert!(r.clausius_sum(t_c, t_c + dt) <= 1e-10);
        prop_assert!(r.regime.is_some());
        let m = engine_metrics(&r, &spec);
        if m.engine_native {
            prop_assert!(m.eta <= m.eta_carnot + 1e-10);
        }
        if m.refrigerator_native {
            prop_assert!(m.eta_r <= m.eta_r_carnot + 1e-10);
        }
        Ok(())
    })
}

/// Exact power laws are recovered with zero residual.
pub fn power_law_fit_exactness(cases: u32) -> Result<(), String> {
    check(cases, (-3.0f64..3.0, 1e-3f64..1e3, prop::collection::btree_set(2u32..500, 3..8)), |(alpha, a, sizes)| {
        let pts: Vec<(f64, f64)> = sizes.iter().map(|&n| (n as f64, a * (n as f64).powf(alpha))).collect();
        let f = ok(fit_power_law(&pts))?;
        prop_assert!((f.alpha - alpha).abs() < 1e-9, "alpha {} vs {alpha}", f.alpha);
        prop_assert!((f.prefactor / a - 1.0).abs() < 1e-9);
        prop_assert!(f.residual < 1e-9);
        Ok(())
    })
}

/// Thermal energy is nondecreasing in T and bounded below by the ground energy.
pub fn free_energy_energy_ordering(cases: u32) -> Result<(), String> {
    check(cases, (2usize..=16, 0.0f64..2.5, 0.0f64..2.0, 0.0f64..2.0), |(n, h, t0, t1)| {
        let s = chain(n, 1.0)?;
        let t = ok(diagonalize(&s, h))?;
        let energy = |temp: f64| -> Result<f64, TestCaseError> {
            let occ = ok(thermal_occupations(t.energies.as_slice(), temp))?;
            let cov = ok(MajoranaCovariance::from_modes(&t, &occ))?;
            let c = otto_ising::chain_model::CorrelationMatrix::from_majorana(&cov);
            let e = ok(cov.energy(&s, h))?;
            let e2 = ok(energy_expectation(&s, h, &c))?;
            prop_assert!((e - e2).abs() < 1e-9, "representations disagree: {e} vs {e2}");
            Ok(e)
        };
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        prop_assert!(energy(hi)? >= energy(lo)? - 1e-10);
        prop_assert!(energy(lo)? >= t.ground_energy() - 1e-10);
        Ok(())
    })
}
