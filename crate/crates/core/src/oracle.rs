//! Exact reference in the full 2^N-dimensional spin space.
//!
//! Nothing here goes through the free-fermion machinery: the Hamiltonian is
//! assembled from Pauli strings, thermal states from dense eigendecomposition
//! and sweeps from a Taylor-series integration of the spin propagator.
//! Basis state s has bit j set when spin j points down (σᶻ_j = -1).

use nalgebra::DMatrix;

use crate::chain_model::{ChainSpec, CorrelationMatrix, C64};
use crate::dynamics::QuenchProtocol;
use crate::error::{invalid, Error, Result};
use crate::otto_engine::{CycleRecord, CycleSpec, Thermalization};
use crate::thermal_bath::{BathSpec, RelaxationSchedule};

/// Largest chain accepted for static quantities.
pub const STATIC_CAP: usize = 12;
/// Largest chain accepted for sweeps and cycles.
pub const DYNAMIC_CAP: usize = 10;
/// Ground-space degeneracy tolerance at T = 0.
pub const DEGENERACY_TOL: f64 = 1e-10;

const TAYLOR_TOL: f64 = 1e-17;
const TAYLOR_MAX_TERMS: usize = 80;

fn check_size(spec: &ChainSpec, cap: usize) -> Result<usize> {
    spec.validate()?;
    let n = spec.n_sites();
    if n > cap {
        return Err(Error::OracleSizeCap { n_sites: n, cap });
    }
    Ok(n)
}

fn spin_down(s: usize, j: usize) -> bool {
    s >> j & 1 == 1
}

/// Diagonal of -Σ σᶻ_j, i.e. ∂H/∂h.
fn field_diagonal(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|s| (0..n).map(|j| if spin_down(s, j) { 1.0 } else { -1.0 }).sum())
        .collect()
}

/// H = -J Σ σˣ_j σˣ_{j+1} - h Σ σᶻ_j as a dense real matrix.
pub fn exact_spin_hamiltonian(spec: &ChainSpec, h: f64) -> Result<DMatrix<f64>> {
    let n = check_size(spec, STATIC_CAP)?;
    let dim = 1usize << n;
    let dz = field_diagonal(n);
    let mut m = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        m[(s, s)] = h * dz[s];
        for j in 0..n - 1 {
            m[(s ^ (0b11 << j), s)] -= spec.coupling();
        }
    }
    Ok(m)
}

/// Sorted many-body spectrum.
pub fn exact_spectrum(spec: &ChainSpec, h: f64) -> Result<Vec<f64>> {
    let mut e: Vec<f64> = exact_spin_hamiltonian(spec, h)?.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Gibbs density matrix; at T = 0 the uniform mixture over the ground space.
pub fn exact_gibbs_state(spec: &ChainSpec, h: f64, temperature: f64) -> Result<DMatrix<f64>> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return invalid(format!("temperature >= 0 required, got {temperature}"));
    }
    let eig = exact_spin_hamiltonian(spec, h)?.symmetric_eigen();
    let e0 = eig.eigenvalues.min();
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| {
            if temperature == 0.0 {
                if e - e0 < DEGENERACY_TOL {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-(e - e0) / temperature).exp()
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let mut scaled = eig.eigenvectors.clone();
    for (k, w) in weights.iter().enumerate() {
        scaled.column_mut(k).scale_mut(w / z);
    }
    Ok(scaled * eig.eigenvectors.transpose())
}

pub fn exact_thermal_energy(spec: &ChainSpec, h: f64, temperature: f64) -> Result<f64> {
    let rho = exact_gibbs_state(spec, h, temperature)?;
    let hm = exact_spin_hamiltonian(spec, h)?;
    Ok(hm.component_mul(&rho).sum())
}

/// tr(H ρ) for a possibly complex density matrix.
pub fn exact_energy(spec: &ChainSpec, h: f64, rho: &DMatrix<C64>) -> Result<f64> {
    let hm = exact_spin_hamiltonian(spec, h)?;
    if rho.shape() != hm.shape() {
        return Err(Error::DimensionMismatch {
            expected: hm.nrows(),
            found: rho.nrows(),
        });
    }
    // H is symmetric, so tr(Hρ) = Σ H_ab ρ_ab.
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in hm.iter().zip(rho.iter()) {
        acc += b * *a;
    }
    if acc.im.abs() > 1e-8 {
        return Err(Error::ComplexEnergy { imag: acc.im });
    }
    Ok(acc.re)
}

/// Jordan-Wigner annihilator a_j = (Π_{l<j} σᶻ_l) σ⁺_j with n_j = (1 - σᶻ_j)/2.
pub fn jordan_wigner_annihilator(n: usize, j: usize) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut a = DMatrix::zeros(dim, dim);
    for s in (0..dim).filter(|&s| spin_down(s, j)) {
        let string = (0..j).filter(|&l| spin_down(s, l)).count();
        a[(s ^ (1 << j), s)] = if string % 2 == 0 { 1.0 } else { -1.0 };
    }
    a
}

/// G_jl = ⟨a_j a†_l⟩ and F_jl = ⟨a_j a_l⟩ of a real density matrix.
pub fn exact_correlations(spec: &ChainSpec, rho: &DMatrix<f64>) -> Result<CorrelationMatrix> {
    let n = check_size(spec, STATIC_CAP)?;
    if rho.nrows() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: rho.nrows(),
        });
    }
    let ops: Vec<DMatrix<f64>> = (0..n).map(|j| jordan_wigner_annihilator(n, j)).collect();
    let expect = |op: DMatrix<f64>| C64::new((op.transpose().component_mul(rho)).sum(), 0.0);
    let g = DMatrix::from_fn(n, n, |j, l| expect(&ops[j] * ops[l].transpose()));
    let f = DMatrix::from_fn(n, n, |j, l| expect(&ops[j] * &ops[l]));
    Ok(CorrelationMatrix { g_block: g, f_block: f })
}

/// ⟨a†_j a_j⟩ = (1 - ⟨σᶻ_j⟩)/2.
pub fn exact_site_densities(spec: &ChainSpec, rho: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = check_size(spec, STATIC_CAP)?;
    Ok((0..n)
        .map(|j| (0..1usize << n).filter(|&s| spin_down(s, j)).map(|s| rho[(s, s)]).sum())
        .collect())
}

/// Time integrator for the spin propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleIntegrator {
    /// Exact Taylor recurrence for a linear ramp; steps with ‖H‖dt ≤ 1 and
    /// terms summed to 1e-17.
    Taylor,
    /// Classical RK4 with dt = 1e-3/(J + max|h|).
    RungeKutta4,
}

struct Generator {
    n: usize,
    coupling: f64,
    dz: Vec<f64>,
}

impl Generator {
    /// H(h) x, using only the bit-flip action of σˣσˣ.
    fn apply(&self, h: f64, x: &DMatrix<C64>) -> DMatrix<C64> {
        let dim = x.nrows();
        let mut out = DMatrix::zeros(dim, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for s in 0..dim {
                let mut acc = xc[s] * (h * self.dz[s]);
                for j in 0..self.n - 1 {
                    acc -= xc[s ^ (0b11 << j)] * self.coupling;
                }
                oc[s] = acc;
            }
        }
        out
    }

    fn apply_field(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = x.clone();
        for mut col in out.column_iter_mut() {
            for (v, d) in col.iter_mut().zip(&self.dz) {
                *v *= *d;
            }
        }
        out
    }
}

/// Spin-space propagator U of a sweep, ψ(T) = U ψ(0).
pub fn exact_quench_unitary(
    spec: &ChainSpec,
    protocol: &QuenchProtocol,
    method: OracleIntegrator,
) -> Result<DMatrix<C64>> {
    let n = check_size(spec, DYNAMIC_CAP)?;
    protocol.validate()?;
    let dim = 1usize << n;
    let gen = Generator {
        n,
        coupling: spec.coupling(),
        dz: field_diagonal(n),
    };
    let duration = protocol.duration();
    let h_max = protocol.h_start.abs().max(protocol.h_end.abs());
    let mut u = DMatrix::<C64>::identity(dim, dim);
    if duration == 0.0 {
        return Ok(u);
    }
    let mi = C64::new(0.0, -1.0);
    match method {
        OracleIntegrator::Taylor => {
            let norm = spec.coupling().abs() * (n - 1) as f64 + h_max * n as f64;
            let steps = (duration * norm.max(1.0)).ceil() as usize;
            let dt = duration / steps as f64;
            let r = protocol.rate();
            for k in 0..steps {
                let h0 = protocol.field_at(k as f64 * dt);
                // φ_n = ψ_n dt^n with i(n+1)ψ_{n+1} = H0 ψ_n + r Hz ψ_{n-1}.
                let mut prev = DMatrix::<C64>::zeros(dim, dim);
                let mut cur = u.clone();
                let mut sum = u.clone();
                let mut small = 0;
                for m in 0..TAYLOR_MAX_TERMS {
                    let mut next = gen.apply(h0, &cur);
                    if m > 0 {
                        next += gen.apply_field(&prev) * C64::new(r * dt, 0.0);
                    }
                    next *= mi * (dt / (m + 1) as f64);
                    sum += &next;
                    let size = next.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    small = if size < TAYLOR_TOL { small + 1 } else { 0 };
                    prev = cur;
                    cur = next;
                    if small == 2 {
                        break;
                    }
                }
                if small < 2 {
                    return Err(Error::NoConvergence("Taylor series of the spin propagator".into()));
                }
                u = sum;
            }
        }
        OracleIntegrator::RungeKutta4 => {
            let dt_max = 1e-3 / (spec.coupling().abs() + h_max);
            let steps = (duration / dt_max).ceil() as usize;
            let dt = duration / steps as f64;
            let deriv = |t: f64, x: &DMatrix<C64>| gen.apply(protocol.field_at(t), x) * mi;
            for k in 0..steps {
                let t = k as f64 * dt;
                let k1 = deriv(t, &u);
                let k2 = deriv(t + 0.5 * dt, &(&u + &k1 * C64::new(0.5 * dt, 0.0)));
                let k3 = deriv(t + 0.5 * dt, &(&u + &k2 * C64::new(0.5 * dt, 0.0)));
                let k4 = deriv(t + dt, &(&u + &k3 * C64::new(dt, 0.0)));
                u += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
            }
        }
    }
    Ok(u)
}

/// ρ ↦ U ρ U† for the sweep.
pub fn exact_quench(
    spec: &ChainSpec,
    protocol: &QuenchProtocol,
    rho0: &DMatrix<C64>,
    method: OracleIntegrator,
) -> Result<DMatrix<C64>> {
    let u = exact_quench_unitary(spec, protocol, method)?;
    if rho0.shape() != u.shape() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: rho0.nrows(),
        });
    }
    Ok(&u * rho0 * u.adjoint())
}

fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Exact counterpart of [`crate::otto_engine::run_cycle`] and
/// [`crate::otto_engine::run_cycles_partial`]; returns `n_cyc` records (one
/// when thermalization is complete).
pub fn exact_cycles(spec: &CycleSpec, n_cyc: usize, method: OracleIntegrator) -> Result<Vec<CycleRecord>> {
    spec.validate()?;
    check_size(&spec.chain, DYNAMIC_CAP)?;
    if n_cyc == 0 {
        return invalid("n_cyc >= 1 required");
    }
    let chain = &spec.chain;
    let (low, high): (&BathSpec, &BathSpec) = spec.placement.order(&spec.bath_cold, &spec.bath_hot);
    let u_up = exact_quench_unitary(chain, &spec.protocol()?, method)?;
    // H(t) is real and symmetric, so the reversed sweep is the transpose.
    let u_down = u_up.transpose();
    let low_state = complexify(&exact_gibbs_state(chain, spec.h_i, low.temperature)?);
    let high_state = complexify(&exact_gibbs_state(chain, spec.h_f, high.temperature)?);
    let (low_p, high_p, count) = match spec.thermalization {
        Thermalization::Complete => (0.0, 0.0, 1),
        Thermalization::Partial { jt } => (
            RelaxationSchedule::Duration(jt / low.dos).survival(low)?,
            RelaxationSchedule::Duration(jt / high.dos).survival(high)?,
            n_cyc,
        ),
    };
    let mix = |state: &DMatrix<C64>, fixed: &DMatrix<C64>, p: f64| fixed * C64::new(1.0 - p, 0.0) + state * C64::new(p, 0.0);
    let mut a = low_state.clone();
    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        let b = &u_up * &a * u_up.adjoint();
        let c = mix(&b, &high_state, high_p);
        let d = &u_down * &c * u_down.adjoint();
        let next = mix(&d, &low_state, low_p);
        let e = [
            exact_energy(chain, spec.h_i, &a)?,
            exact_energy(chain, spec.h_f, &b)?,
            exact_energy(chain, spec.h_f, &c)?,
            exact_energy(chain, spec.h_i, &d)?,
        ];
        out.push(CycleRecord::new(chain.n_sites(), spec.placement, e, exact_energy(chain, spec.h_i, &next)?, k));
        a = next;
    }
    Ok(out)
}

/// Single complete-thermalization cycle.
pub fn exact_cycle(spec: &CycleSpec, method: OracleIntegrator) -> Result<CycleRecord> {
    Ok(exact_cycles(spec, 1, method)?[0])
}
