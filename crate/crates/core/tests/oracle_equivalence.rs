use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;

use otto_ising::chain_model::{diagonalize, energy_expectation, ChainSpec, C64};
use otto_ising::dynamics::{evolve_correlations, quench_propagator, QuenchProtocol};
use otto_ising::oracle::{
    exact_correlations, exact_cycle, exact_cycles, exact_energy, exact_gibbs_state, exact_quench, exact_site_densities,
    exact_spectrum, exact_thermal_energy, OracleIntegrator,
};
use otto_ising::otto_engine::{run_cycle, run_cycles_partial, BathPlacement, CycleSpec, Thermalization};
use otto_ising::thermal_bath::{thermal_correlations, BathSpec};

fn chain(n: usize) -> ChainSpec {
    ChainSpec::new(n, 1.0).unwrap()
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn many_body_spectrum_is_sum_of_quasiparticles() {
    for (n, h) in [(6, 0.7), (4, 0.0), (5, 1.0), (3, 2.5)] {
        let s = chain(n);
        let t = diagonalize(&s, h).unwrap();
        let mut sums: Vec<f64> = (0..1usize << n)
            .map(|mask| t.ground_energy() + (0..n).filter(|k| mask >> k & 1 == 1).map(|k| t.energies[k]).sum::<f64>())
            .collect();
        sums.sort_by(f64::total_cmp);
        let exact = exact_spectrum(&s, h).unwrap();
        for (a, b) in sums.iter().zip(&exact) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }
}

#[test]
fn small_chain_spectra() {
    // Single-particle gaps of the flat-band chain, read off the many-body spectrum.
    let e = exact_spectrum(&chain(4), 0.0).unwrap();
    let t = diagonalize(&chain(4), 0.0).unwrap();
    assert_abs_diff_eq!(t.ground_energy(), e[0], epsilon = 1e-10);
    let gaps: Vec<f64> = e.iter().map(|x| x - e[0]).filter(|g| *g > 1e-9).collect();
    assert_abs_diff_eq!(gaps[0], 2.0, epsilon = 1e-10);
}

#[test]
fn thermal_energies_match() {
    for n in [2, 5, 8] {
        let s = chain(n);
        for h in [0.2, 1.0, 2.0] {
            for temp in [0.0, 0.5] {
                let c = thermal_correlations(&s, h, &BathSpec::at(temp).unwrap()).unwrap();
                let e = energy_expectation(&s, h, &c).unwrap();
                assert_abs_diff_eq!(e, exact_thermal_energy(&s, h, temp).unwrap(), epsilon = 1e-8);
            }
        }
    }
}

#[test]
fn gibbs_correlators_match() {
    let s = chain(4);
    for (h, temp) in [(0.5, 0.5), (0.0, 0.0), (1.3, 0.0), (0.8, 2.0)] {
        let c = thermal_correlations(&s, h, &BathSpec::at(temp).unwrap()).unwrap();
        let rho = exact_gibbs_state(&s, h, temp).unwrap();
        let exact = exact_correlations(&s, &rho).unwrap();
        assert!(max_abs(&(&c.g_block - &exact.g_block)) < 1e-8, "G at h={h}, T={temp}");
        assert!(max_abs(&(&c.f_block - &exact.f_block)) < 1e-8, "F at h={h}, T={temp}");
        let dens = exact_site_densities(&s, &rho).unwrap();
        for (a, b) in c.site_densities().iter().zip(&dens) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }
}

fn sweep_energy_gap(n: usize, temp: f64, h0: f64, h1: f64, v: f64) -> f64 {
    let s = chain(n);
    let p = QuenchProtocol::new(h0, h1, v).unwrap();
    let c0 = thermal_correlations(&s, h0, &BathSpec::at(temp).unwrap()).unwrap();
    let c1 = evolve_correlations(&c0, &quench_propagator(&s, &p).unwrap()).unwrap();
    let fermion = energy_expectation(&s, h1, &c1).unwrap();
    let rho0 = exact_gibbs_state(&s, h0, temp).unwrap().map(|x| C64::new(x, 0.0));
    let rho1 = exact_quench(&s, &p, &rho0, OracleIntegrator::Taylor).unwrap();
    (fermion - exact_energy(&s, h1, &rho1).unwrap()).abs()
}

#[test]
fn sweep_from_ground_state_matches() {
    assert!(sweep_energy_gap(6, 0.0, 0.5, 1.5, 0.05) < 1e-6);
}

#[test]
fn sweeps_from_thermal_states_match() {
    assert!(sweep_energy_gap(5, 0.5, 0.5, 1.5, 0.05) < 1e-6);
    assert!(sweep_energy_gap(4, 0.3, 1.8, 0.2, 0.2) < 1e-6);
    assert!(sweep_energy_gap(6, 1.0, 0.0, 0.3, 1.0) < 1e-6);
}

#[test]
fn sweep_correlations_match() {
    let s = chain(4);
    let p = QuenchProtocol::new(0.4, 1.4, 0.1).unwrap();
    let c0 = thermal_correlations(&s, 0.4, &BathSpec::at(0.3).unwrap()).unwrap();
    let c1 = evolve_correlations(&c0, &quench_propagator(&s, &p).unwrap()).unwrap();
    let rho0 = exact_gibbs_state(&s, 0.4, 0.3).unwrap().map(|x| C64::new(x, 0.0));
    let rho1 = exact_quench(&s, &p, &rho0, OracleIntegrator::Taylor).unwrap();
    // ⟨a_j a†_l⟩ = tr(ρ a_j a†_l) with complex ρ: compare through real and imaginary parts.
    let re = exact_correlations(&s, &rho1.map(|z| z.re)).unwrap();
    let im = exact_correlations(&s, &rho1.map(|z| z.im)).unwrap();
    let g = re.g_block.zip_map(&im.g_block, |a, b| a + C64::new(0.0, 1.0) * b);
    let f = re.f_block.zip_map(&im.f_block, |a, b| a + C64::new(0.0, 1.0) * b);
    assert!(max_abs(&(&c1.g_block - &g)) < 1e-8);
    assert!(max_abs(&(&c1.f_block - &f)) < 1e-8);
}

fn assert_records_match(n: usize, h_i: f64, v: f64, t_c: f64, placement: BathPlacement) {
    let s = CycleSpec::new(chain(n), h_i, h_i + 0.5, v, t_c, 0.5).unwrap().with_placement(placement);
    let a = run_cycle(&s).unwrap();
    let b = exact_cycle(&s, OracleIntegrator::Taylor).unwrap();
    assert_abs_diff_eq!(a.w, b.w, epsilon = 1e-7);
    assert_abs_diff_eq!(a.q_c, b.q_c, epsilon = 1e-7);
    assert_abs_diff_eq!(a.q_h, b.q_h, epsilon = 1e-7);
    assert_eq!(a.regime, b.regime);
}

#[test]
fn cycles_match_for_small_chains() {
    assert_records_match(4, 0.75, 0.005, 0.25, BathPlacement::HotAtHighField);
    assert_records_match(6, 0.75, 0.005, 0.25, BathPlacement::HotAtHighField);
    assert_records_match(6, 1.2, 0.05, 0.45, BathPlacement::HotAtLowField);
    assert_records_match(8, 0.75, 0.05, 0.25, BathPlacement::HotAtHighField);
}

#[test]
fn partial_cycles_match() {
    let s = CycleSpec::new(chain(4), 0.6, 1.1, 0.1, 0.1, 0.5)
        .unwrap()
        .with_thermalization(Thermalization::Partial { jt: 0.3 })
        .unwrap();
    let a = run_cycles_partial(&s, 5).unwrap();
    let b = exact_cycles(&s, 5, OracleIntegrator::Taylor).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_abs_diff_eq!(x.w, y.w, epsilon = 1e-8);
        assert_abs_diff_eq!(x.q_c, y.q_c, epsilon = 1e-8);
        assert_abs_diff_eq!(x.q_h, y.q_h, epsilon = 1e-8);
    }
}
