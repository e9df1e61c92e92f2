//! Unitary strokes: linear field sweeps of the Gaussian state.
//!
//! In the Majorana basis γ = (x_1, y_1, ..., x_N, y_N) the chain Hamiltonian
//! is H = (i/4) Σ K_ab γ_a γ_b with the real antisymmetric generator
//! K_{x_j y_j} = 2h and K_{y_j x_{j+1}} = 2J. Heisenberg operators evolve as
//! γ(t) = O(t) γ with dO/dt = K(t) O, so the single-particle propagator is a
//! real orthogonal 2N×2N matrix. The Nambu-space propagator W with
//! i dW/dt = 2ℍ W is recovered from it by a fixed change of basis, see
//! [`Propagator::nambu`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain_model::{omega_row, ChainSpec, CorrelationMatrix, C64};
use crate::error::{invalid, Error, Result};

/// Linear sweep h(t) = h_start ± v t between two fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchProtocol {
    pub h_start: f64,
    pub h_end: f64,
    pub velocity: f64,
}

impl QuenchProtocol {
    pub fn new(h_start: f64, h_end: f64, velocity: f64) -> Result<Self> {
        let p = Self {
            h_start,
            h_end,
            velocity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_start.is_finite() && self.h_end.is_finite()) {
            return invalid("sweep end points must be finite");
        }
        if !(self.velocity.is_finite() && self.velocity > 0.0) {
            return invalid(format!("velocity > 0 required, got {}", self.velocity));
        }
        if !self.duration().is_finite() {
            return invalid("sweep duration overflows");
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        (self.h_end - self.h_start).abs() / self.velocity
    }

    /// Signed sweep rate dh/dt.
    pub fn rate(&self) -> f64 {
        if self.h_end >= self.h_start {
            self.velocity
        } else {
            -self.velocity
        }
    }

    pub fn field_at(&self, t: f64) -> f64 {
        self.h_start + self.rate() * t
    }

    /// ∫ h dt over [t0, t1] (t1 < t0 allowed).
    fn field_integral(&self, t0: f64, t1: f64) -> f64 {
        self.h_start * (t1 - t0) + 0.5 * self.rate() * (t1 * t1 - t0 * t0)
    }

    pub fn reversed(&self) -> Self {
        Self {
            h_start: self.h_end,
            h_end: self.h_start,
            velocity: self.velocity,
        }
    }

    fn max_abs_field(&self) -> f64 {
        self.h_start.abs().max(self.h_end.abs())
    }
}

/// Time integrator for the single-particle propagator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Integrator {
    /// Symmetric splitting into exactly exponentiated field and bond layers,
    /// each layer a product of commuting 2×2 rotations. Strang steps are
    /// composed to fourth order (Suzuki).
    Splitting4 { max_step: f64 },
    /// As [`Integrator::Splitting4`] with a sixth-order Yoshida composition.
    Splitting6 { max_step: f64 },
    /// Classical RK4 with dt = min(0.01/ε_max, 0.01/v) and polar
    /// re-orthonormalization every 100 steps.
    RungeKutta4,
}

pub const DEFAULT_SPLITTING_STEP: f64 = 0.025;

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Splitting6 {
            max_step: DEFAULT_SPLITTING_STEP,
        }
    }
}

/// Single-particle propagator of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    /// Real orthogonal Majorana-basis matrix O with γ(t) = O γ(0).
    pub majorana: DMatrix<f64>,
    pub t_elapsed: f64,
}

const DRIFT_ABORT: f64 = 1e-6;
const DRIFT_REPAIR: f64 = 1e-10;
const MIN_STEP: f64 = 1e-12;

impl Propagator {
    pub fn identity(n_sites: usize) -> Self {
        Self {
            majorana: DMatrix::identity(2 * n_sites, 2 * n_sites),
            t_elapsed: 0.0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.majorana.nrows() / 2
    }

    /// ‖OᵀO - I‖_max
    pub fn orthogonality_defect(&self) -> f64 {
        orthogonality_defect(&self.majorana)
    }

    /// Propagator of the time-reversed sweep (same velocity, swapped end
    /// points). For a real Hamiltonian this is S Oᵀ S with S = diag(1, -1, ...).
    pub fn reversed(&self) -> Self {
        let m = &self.majorana;
        let dim = m.nrows();
        let sign = |a: usize| if a.is_multiple_of(2) { 1.0 } else { -1.0 };
        Self {
            majorana: DMatrix::from_fn(dim, dim, |a, b| sign(a) * sign(b) * m[(b, a)]),
            t_elapsed: self.t_elapsed,
        }
    }

    /// Nambu-space propagator W with Ψ(t) = W Ψ(0), Ψ = (a, a†).
    pub fn nambu(&self) -> DMatrix<C64> {
        let n = self.n_sites();
        let o = &self.majorana;
        DMatrix::from_fn(2 * n, 2 * n, |p, q| {
            let mut acc = C64::new(0.0, 0.0);
            for &(m, wm) in &omega_row(p, n) {
                for &(l, wl) in &omega_row(q, n) {
                    acc += wm * o[(m, l)] * wl.conj();
                }
            }
            acc * 2.0
        })
    }

    /// Then-composition: first `self`, then `later`.
    pub fn then(&self, later: &Propagator) -> Result<Propagator> {
        if later.majorana.shape() != self.majorana.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.majorana.nrows(),
                found: later.majorana.nrows(),
            });
        }
        Ok(Propagator {
            majorana: &later.majorana * &self.majorana,
            t_elapsed: self.t_elapsed + later.t_elapsed,
        })
    }
}

fn orthogonality_defect(o: &DMatrix<f64>) -> f64 {
    let n = o.nrows();
    (o.transpose() * o - DMatrix::<f64>::identity(n, n)).amax()
}

pub fn quench_propagator(spec: &ChainSpec, protocol: &QuenchProtocol) -> Result<Propagator> {
    quench_propagator_with(spec, protocol, Integrator::default())
}

pub fn quench_propagator_with(
    spec: &ChainSpec,
    protocol: &QuenchProtocol,
    integrator: Integrator,
) -> Result<Propagator> {
    spec.validate()?;
    protocol.validate()?;
    let n = spec.n_sites();
    let duration = protocol.duration();
    if duration == 0.0 {
        return Ok(Propagator::identity(n));
    }
    // Work on P = Oᵀ: left rotations of O become column rotations of P,
    // which are contiguous in column-major storage.
    let p = match integrator {
        Integrator::Splitting4 { max_step } => split_propagate(spec, protocol, max_step, &suzuki_weights())?,
        Integrator::Splitting6 { max_step } => split_propagate(spec, protocol, max_step, &yoshida6_weights())?,
        Integrator::RungeKutta4 => rk4_propagate(spec, protocol)?,
    };
    let majorana = p.transpose();
    let drift = orthogonality_defect(&majorana);
    if drift > DRIFT_ABORT {
        return Err(Error::UnitarityDrift { drift });
    }
    Ok(Propagator {
        majorana,
        t_elapsed: duration,
    })
}

/// Rotates columns a, b of a column-major matrix by angle θ:
/// (c_a, c_b) ← (cos θ c_a + sin θ c_b, -sin θ c_a + cos θ c_b).
#[inline]
fn rotate_columns(data: &mut [f64], dim: usize, a: usize, b: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    debug_assert!(a < b);
    let (head, tail) = data.split_at_mut(b * dim);
    let col_a = &mut head[a * dim..(a + 1) * dim];
    let col_b = &mut tail[..dim];
    for (xa, xb) in col_a.iter_mut().zip(col_b.iter_mut()) {
        let u = *xa;
        let w = *xb;
        *xa = c * u + s * w;
        *xb = -s * u + c * w;
    }
}

// Fourth-order Suzuki composition of Strang steps.
fn suzuki_weights() -> Vec<f64> {
    let p = 1.0 / (4.0 - 4f64.powf(1.0 / 3.0));
    vec![p, p, 1.0 - 4.0 * p, p, p]
}

// Sixth-order Yoshida composition (solution A) of Strang steps.
fn yoshida6_weights() -> Vec<f64> {
    let w1 = -1.177_679_984_178_87;
    let w2 = 0.235_573_213_359_357;
    let w3 = 0.784_513_610_477_560;
    let w0 = 1.0 - 2.0 * (w1 + w2 + w3);
    vec![w3, w2, w1, w0, w1, w2, w3]
}

fn split_propagate(
    spec: &ChainSpec,
    protocol: &QuenchProtocol,
    max_step: f64,
    weights: &[f64],
) -> Result<DMatrix<f64>> {
    if !(max_step.is_finite() && max_step > 0.0) {
        return invalid(format!("splitting step must be positive, got {max_step}"));
    }
    let n = spec.n_sites();
    let dim = 2 * n;
    let duration = protocol.duration();
    let steps = (duration / max_step).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    if dt < MIN_STEP {
        return Err(Error::StepUnderflow { dt });
    }
    let bond_angle = |tau: f64| 2.0 * spec.coupling() * tau;

    let mut p = DMatrix::<f64>::identity(dim, dim);
    let data = p.as_mut_slice();
    // The field flow carries the clock; consecutive field flows commute and
    // merge into one rotation over the accumulated time interval.
    let mut field_from = 0.0;
    let mut clock = 0.0;
    let flush_field = |data: &mut [f64], from: f64, to: f64| {
        if to != from {
            let theta = 2.0 * protocol.field_integral(from, to);
            for j in 0..n {
                rotate_columns(data, dim, 2 * j, 2 * j + 1, theta);
            }
        }
    };
    for step in 0..steps {
        for &w in weights {
            let tau = w * dt;
            clock += 0.5 * tau;
            flush_field(data, field_from, clock);
            field_from = clock;
            let theta = bond_angle(tau);
            for j in 0..n - 1 {
                rotate_columns(data, dim, 2 * j + 1, 2 * j + 2, theta);
            }
            clock += 0.5 * tau;
        }
        // pin the clock to the grid so rounding does not accumulate
        clock = (step + 1) as f64 * dt;
    }
    flush_field(data, field_from, duration);
    Ok(p)
}

// dP/dt = -P K(t), P = Oᵀ.
fn generator_apply(p: &DMatrix<f64>, out: &mut DMatrix<f64>, h: f64, coupling: f64) {
    let dim = p.nrows();
    let n = dim / 2;
    let src = p.as_slice();
    let dst = out.as_mut_slice();
    let col = |a: usize| &src[a * dim..(a + 1) * dim];
    for j in 0..n {
        // column x_j: -(P_{:,y_j} K_{y_j x_j} + P_{:,y_{j-1}} K_{y_{j-1} x_j}) = 2h P_y_j - 2J P_y_{j-1}
        let x = 2 * j;
        let y = 2 * j + 1;
        let out_x = &mut dst[x * dim..(x + 1) * dim];
        let py = col(y);
        if j > 0 {
            let pprev = col(2 * j - 1);
            for i in 0..dim {
                out_x[i] = 2.0 * h * py[i] - 2.0 * coupling * pprev[i];
            }
        } else {
            for i in 0..dim {
                out_x[i] = 2.0 * h * py[i];
            }
        }
        // column y_j: -(P_{:,x_j} K_{x_j y_j} + P_{:,x_{j+1}} K_{x_{j+1} y_j}) = -2h P_x_j + 2J P_x_{j+1}
        let out_y = &mut dst[y * dim..(y + 1) * dim];
        let px = col(x);
        if j + 1 < n {
            let pnext = col(2 * j + 2);
            for i in 0..dim {
                out_y[i] = -2.0 * h * px[i] + 2.0 * coupling * pnext[i];
            }
        } else {
            for i in 0..dim {
                out_y[i] = -2.0 * h * px[i];
            }
        }
    }
}

fn rk4_propagate(spec: &ChainSpec, protocol: &QuenchProtocol) -> Result<DMatrix<f64>> {
    let dim = 2 * spec.n_sites();
    let duration = protocol.duration();
    let eps_max = 2.0 * (spec.coupling() + protocol.max_abs_field());
    let dt_target = (0.01 / eps_max).min(0.01 / protocol.velocity);
    let steps = (duration / dt_target).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    if dt < MIN_STEP {
        return Err(Error::StepUnderflow { dt });
    }
    let j = spec.coupling();
    let mut p = DMatrix::<f64>::identity(dim, dim);
    let mut k1 = DMatrix::zeros(dim, dim);
    let mut k2 = DMatrix::zeros(dim, dim);
    let mut k3 = DMatrix::zeros(dim, dim);
    let mut k4 = DMatrix::zeros(dim, dim);
    let mut tmp = DMatrix::zeros(dim, dim);
    for step in 0..steps {
        let t = step as f64 * dt;
        let h0 = protocol.field_at(t);
        let hm = protocol.field_at(t + 0.5 * dt);
        let h1 = protocol.field_at(t + dt);
        generator_apply(&p, &mut k1, h0, j);
        tmp.copy_from(&p);
        axpy(&mut tmp, 0.5 * dt, &k1);
        generator_apply(&tmp, &mut k2, hm, j);
        tmp.copy_from(&p);
        axpy(&mut tmp, 0.5 * dt, &k2);
        generator_apply(&tmp, &mut k3, hm, j);
        tmp.copy_from(&p);
        axpy(&mut tmp, dt, &k3);
        generator_apply(&tmp, &mut k4, h1, j);
        axpy(&mut p, dt / 6.0, &k1);
        axpy(&mut p, dt / 3.0, &k2);
        axpy(&mut p, dt / 3.0, &k3);
        axpy(&mut p, dt / 6.0, &k4);
        if (step + 1) % 100 == 0 {
            let drift = orthogonality_defect(&p);
            if drift > DRIFT_ABORT {
                return Err(Error::UnitarityDrift { drift });
            }
            if drift > DRIFT_REPAIR {
                p = polar_project(&p)?;
            }
        }
    }
    Ok(p)
}

fn axpy(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

/// Nearest orthogonal matrix (polar factor) via SVD.
fn polar_project(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NoConvergence("polar projection".into()))?;
    Ok(svd.u.expect("requested U") * svd.v_t.expect("requested Vᵀ"))
}

/// Conjugates the state by the propagator: 𝔾 ↦ W 𝔾 W†.
pub fn evolve_correlations(c: &CorrelationMatrix, w: &Propagator) -> Result<CorrelationMatrix> {
    if c.n_sites() != w.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: w.n_sites(),
            found: c.n_sites(),
        });
    }
    let evolved = c.to_majorana().conjugate(&w.majorana)?;
    Ok(CorrelationMatrix::from_majorana(&evolved))
}

/// Work done by the system during a unitary stroke.
pub fn stroke_work(e_start: f64, e_end: f64) -> f64 {
    e_start - e_end
}
