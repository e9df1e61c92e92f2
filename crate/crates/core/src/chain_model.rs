//! Free-fermion representation of the open transverse-field Ising chain
//!
//! H = -J Σ σˣ_j σˣ_{j+1} - h Σ σᶻ_j
//!
//! is mapped by Jordan-Wigner onto a quadratic fermion Hamiltonian. The
//! Bogoliubov-de Gennes matrix used here is the particle-hole symmetric form
//!
//! ```text
//!     ⎛ A   B ⎞
//!     ⎝-B  -A ⎠
//! ```
//!
//! with A_jj = h, A_{j,j±1} = -J/2 and B_{j,j+1} = -B_{j+1,j} = -J/2. Its
//! spectrum is ±λ_k and the physical quasiparticle energies are ε_k = 2λ_k,
//! so that H = Σ_k ε_k (b†_k b_k - 1/2) exactly, with no further constant.
//!
//! Two equivalent representations of a Gaussian state live here: the Nambu
//! correlation matrix (G, F) and the real antisymmetric Majorana covariance
//! Γ. The first is the public currency of the crate, the second is what the
//! time evolution and the cycle bookkeeping operate on.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex<f64>;

/// Quasiparticle energies below this are treated as exact zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-12;

const SVD_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
}

/// Static definition of the working substance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n_sites: usize,
    coupling: f64,
    #[serde(default)]
    boundary: Boundary,
}

impl ChainSpec {
    pub fn new(n_sites: usize, coupling: f64) -> Result<Self> {
        let spec = Self {
            n_sites,
            coupling,
            boundary: Boundary::Open,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return invalid(format!("n_sites >= 2 required, got {}", self.n_sites));
        }
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return invalid(format!("coupling > 0 required, got {}", self.coupling));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
}

/// The A and B blocks of the Bogoliubov-de Gennes matrix at a fixed field.
#[derive(Debug, Clone, PartialEq)]
pub struct BdgMatrix {
    pub a_block: DMatrix<f64>,
    pub b_block: DMatrix<f64>,
    pub field: f64,
}

impl BdgMatrix {
    pub fn n_sites(&self) -> usize {
        self.a_block.nrows()
    }

    /// Full 2N×2N matrix [[A, B], [-B, -A]].
    pub fn full(&self) -> DMatrix<f64> {
        let n = self.n_sites();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a_block);
        m.view_mut((0, n), (n, n)).copy_from(&self.b_block);
        m.view_mut((n, 0), (n, n)).copy_from(&(-&self.b_block));
        m.view_mut((n, n), (n, n)).copy_from(&(-&self.a_block));
        m
    }
}

pub fn build_bdg(spec: &ChainSpec, h: f64) -> Result<BdgMatrix> {
    spec.validate()?;
    if !h.is_finite() {
        return invalid(format!("field must be finite, got {h}"));
    }
    let n = spec.n_sites();
    let half_j = 0.5 * spec.coupling();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        a[(j, j)] = h;
        if j + 1 < n {
            a[(j, j + 1)] = -half_j;
            a[(j + 1, j)] = -half_j;
            b[(j, j + 1)] = -half_j;
            b[(j + 1, j)] = half_j;
        }
    }
    Ok(BdgMatrix {
        a_block: a,
        b_block: b,
        field: h,
    })
}

/// Bogoliubov transformation diagonalizing a [`BdgMatrix`].
///
/// Site fermions expand as a_j = Σ_k U_jk b_k + V_jk b†_k. For a real BdG
/// matrix both blocks are real. `energies` are the physical ε_k in ascending
/// order, column k of U and V belongs to `energies[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform {
    pub u_block: DMatrix<f64>,
    pub v_block: DMatrix<f64>,
    pub energies: DVector<f64>,
}

impl BogoliubovTransform {
    pub fn n_modes(&self) -> usize {
        self.energies.len()
    }

    /// Φ = U + V, the x-Majorana amplitudes of each mode.
    pub fn phi(&self) -> DMatrix<f64> {
        &self.u_block + &self.v_block
    }

    /// Ψ = U - V, the y-Majorana amplitudes of each mode.
    pub fn psi(&self) -> DMatrix<f64> {
        &self.u_block - &self.v_block
    }

    /// The 2N×2N Nambu transformation [[U, V*], [V, U*]].
    pub fn nambu(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.u_block);
        m.view_mut((0, n), (n, n)).copy_from(&self.v_block);
        m.view_mut((n, 0), (n, n)).copy_from(&self.v_block);
        m.view_mut((n, n), (n, n)).copy_from(&self.u_block);
        m
    }

    /// Max-norm residuals of UU† + VV† - I and UVᵀ + VUᵀ.
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let n = self.n_modes();
        let u = &self.u_block;
        let v = &self.v_block;
        let first = u * u.transpose() + v * v.transpose() - DMatrix::<f64>::identity(n, n);
        let second = u * v.transpose() + v * u.transpose();
        (first.amax(), second.amax())
    }

    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.energies.sum()
    }
}

/// Diagonalizes the BdG matrix.
///
/// The eigenproblem of [[A, B], [-B, -A]] is solved through the singular
/// value decomposition of Z = A + B: with φ = u + v and ψ = u - v the
/// eigen-equations become Zφ = λψ and Zᵀψ = λφ. Singular pairs are paired
/// by construction, so the ±λ partners never mix, and zero modes come out
/// as two orthonormal null vectors.
pub fn diagonalize_bdg(m: &BdgMatrix) -> Result<BogoliubovTransform> {
    let n = m.n_sites();
    let z = &m.a_block + &m.b_block;
    let svd = z
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::NoConvergence(format!("SVD of the {n}×{n} pairing kernel")))?;
    let left = svd.u.expect("requested U");
    let right_t = svd.v_t.expect("requested Vᵀ");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]).then(a.cmp(&b)));

    let mut u = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    let mut energies = DVector::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        let lambda = svd.singular_values[src];
        energies[k] = if lambda < 0.5 * ZERO_MODE_TOL { 0.0 } else { 2.0 * lambda };
        let mut phi = right_t.row(src).transpose();
        let mut psi = left.column(src).into_owned();
        fix_sign(&mut phi, &mut psi);
        for j in 0..n {
            u[(j, k)] = 0.5 * (phi[j] + psi[j]);
            v[(j, k)] = 0.5 * (phi[j] - psi[j]);
        }
    }
    Ok(BogoliubovTransform {
        u_block: u,
        v_block: v,
        energies,
    })
}

// Flip the pair so the largest-magnitude entry of φ is positive; makes the
// output independent of the solver's arbitrary sign choice.
fn fix_sign(phi: &mut DVector<f64>, psi: &mut DVector<f64>) {
    let pivot = phi.iamax();
    if phi[pivot] < 0.0 {
        phi.neg_mut();
        psi.neg_mut();
    }
}

/// Thermodynamic-limit dispersion 2J √(1 + (h/J)² - 2(h/J) cos k).
pub fn analytic_dispersion(coupling: f64, h: f64, k: f64) -> f64 {
    let g = h / coupling;
    2.0 * coupling * (1.0 + g * g - 2.0 * g * k.cos()).max(0.0).sqrt()
}

/// Quasiparticle occupations ⟨b†_k b_k⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeOccupations(Vec<f64>);

impl ModeOccupations {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (k, &x) in values.iter().enumerate() {
            if !(x > -1e-12 && x < 1.0 + 1e-12) {
                return invalid(format!("occupation {k} = {x} outside [0, 1]"));
            }
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fermi-Dirac occupation with the T = 0 limit (zero modes half filled).
pub fn fermi(energy: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        if energy.abs() < ZERO_MODE_TOL {
            0.5
        } else if energy > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        let x = energy / temperature;
        if x > 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + x.exp())
        }
    }
}

pub fn thermal_occupations(energies: &[f64], temperature: f64) -> Result<ModeOccupations> {
    if !(temperature >= 0.0) {
        return invalid(format!("temperature >= 0 required, got {temperature}"));
    }
    if let Some(e) = energies.iter().find(|e| !(**e >= -ZERO_MODE_TOL)) {
        return invalid(format!("quasiparticle energies must be >= 0, got {e}"));
    }
    Ok(ModeOccupations(
        energies.iter().map(|&e| fermi(e.max(0.0), temperature)).collect(),
    ))
}

/// Site-basis two-point functions G_jl = ⟨a_j a†_l⟩ and F_jl = ⟨a_j a_l⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub g_block: DMatrix<C64>,
    pub f_block: DMatrix<C64>,
}

impl CorrelationMatrix {
    pub fn n_sites(&self) -> usize {
        self.g_block.nrows()
    }

    /// The assembled 2N×2N matrix [[G, F], [F†, 1 - Gᵀ]].
    pub fn nambu(&self) -> DMatrix<C64> {
        let n = self.n_sites();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.g_block);
        m.view_mut((0, n), (n, n)).copy_from(&self.f_block);
        m.view_mut((n, 0), (n, n)).copy_from(&self.f_block.adjoint());
        let lower = DMatrix::<C64>::identity(n, n) - self.g_block.transpose();
        m.view_mut((n, n), (n, n)).copy_from(&lower);
        m
    }

    /// ⟨a†_j a_j⟩ for each site.
    pub fn site_densities(&self) -> Vec<f64> {
        (0..self.n_sites()).map(|j| 1.0 - self.g_block[(j, j)].re).collect()
    }

    pub fn to_majorana(&self) -> MajoranaCovariance {
        let n = self.n_sites();
        let big_g = self.nambu();
        let mut gamma = DMatrix::zeros(2 * n, 2 * n);
        // C = 4 Ω† 𝔾 Ω = 1 - iΓ
        for m in 0..2 * n {
            let col_m = omega_column(m, n);
            for l in 0..2 * n {
                let col_l = omega_column(l, n);
                let mut c = C64::new(0.0, 0.0);
                for &(p, wp) in &col_m {
                    for &(q, wq) in &col_l {
                        c += wp.conj() * big_g[(p, q)] * wq;
                    }
                }
                gamma[(m, l)] = -4.0 * c.im;
            }
        }
        MajoranaCovariance { matrix: gamma }
    }

    pub fn from_majorana(cov: &MajoranaCovariance) -> Self {
        let n = cov.n_sites();
        let gamma = &cov.matrix;
        // 𝔾 = Ω (1 - iΓ) Ω†, only the top row of blocks is needed
        let entry = |p: usize, q: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for &(m, wm) in &omega_row(p, n) {
                for &(l, wl) in &omega_row(q, n) {
                    let c = if m == l {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, -gamma[(m, l)])
                    };
                    acc += wm * c * wl.conj();
                }
            }
            acc
        };
        let g = DMatrix::from_fn(n, n, entry);
        let f = DMatrix::from_fn(n, n, |j, l| entry(j, n + l));
        Self {
            g_block: g,
            f_block: f,
        }
    }

    /// Max-norm deviations from G = G† and F = -Fᵀ.
    pub fn symmetry_residuals(&self) -> (f64, f64) {
        let g = &self.g_block;
        let f = &self.f_block;
        let herm = (g - g.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let anti = (f + f.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        (herm, anti)
    }

    /// Eigenvalues of the assembled Nambu matrix, ascending.
    pub fn nambu_eigenvalues(&self) -> Vec<f64> {
        let mut eig: Vec<f64> = self.nambu().symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// Max-norm of 𝔾² - 𝔾; zero for pure Gaussian states.
    pub fn purity_defect(&self) -> f64 {
        let m = self.nambu();
        (&m * &m - &m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

// Ψ = Ω γ with Ψ = (a_1..a_N, a†_1..a†_N) and γ = (x_1, y_1, x_2, y_2, ...),
// a_j = (x_j + i y_j)/2.
pub(crate) fn omega_row(p: usize, n: usize) -> [(usize, C64); 2] {
    if p < n {
        [(2 * p, C64::new(0.5, 0.0)), (2 * p + 1, C64::new(0.0, 0.5))]
    } else {
        let j = p - n;
        [(2 * j, C64::new(0.5, 0.0)), (2 * j + 1, C64::new(0.0, -0.5))]
    }
}

fn omega_column(m: usize, n: usize) -> [(usize, C64); 2] {
    let j = m / 2;
    if m.is_multiple_of(2) {
        [(j, C64::new(0.5, 0.0)), (n + j, C64::new(0.5, 0.0))]
    } else {
        [(j, C64::new(0.0, 0.5)), (n + j, C64::new(0.0, -0.5))]
    }
}

/// Builds the Nambu correlation matrix 𝔾 = 𝕌 diag(1 - n, n) 𝕌†.
pub fn correlation_matrix(t: &BogoliubovTransform, occ: &ModeOccupations) -> Result<CorrelationMatrix> {
    let n = t.n_modes();
    if occ.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: occ.len(),
        });
    }
    let hole = DVector::from_iterator(n, occ.values().iter().map(|x| 1.0 - x));
    let part = DVector::from_column_slice(occ.values());
    let u = &t.u_block;
    let v = &t.v_block;
    let u_hole = scale_columns(u, &hole);
    let v_part = scale_columns(v, &part);
    let g = &u_hole * u.transpose() + &v_part * v.transpose();
    let f = &u_hole * v.transpose() + &v_part * u.transpose();
    Ok(CorrelationMatrix {
        g_block: g.map(|x| C64::new(x, 0.0)),
        f_block: f.map(|x| C64::new(x, 0.0)),
    })
}

fn scale_columns(m: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (k, mut col) in out.column_iter_mut().enumerate() {
        col *= s[k];
    }
    out
}

/// ⟨H⟩ = -tr(ℍ 𝔾) evaluated from (G, F) at field `h`.
pub fn energy_expectation(spec: &ChainSpec, h: f64, c: &CorrelationMatrix) -> Result<f64> {
    let n = spec.n_sites();
    if c.n_sites() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.n_sites(),
        });
    }
    let bdg = build_bdg(spec, h)?;
    let a = &bdg.a_block;
    let b = &bdg.b_block;
    let g = &c.g_block;
    let f = &c.f_block;
    // tr(ℍ𝔾) = tr(AG) + tr(BF†) - tr(BF) - tr(A) + tr(AGᵀ)
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        tr -= a[(i, i)];
        for j in 0..n {
            let aij = a[(i, j)];
            let bij = b[(i, j)];
            if aij != 0.0 {
                tr += aij * (g[(j, i)] + g[(i, j)]);
            }
            if bij != 0.0 {
                tr += bij * (f[(i, j)].conj() - f[(j, i)]);
            }
        }
    }
    if tr.im.abs() > 1e-8 {
        return Err(Error::ComplexEnergy { imag: tr.im });
    }
    Ok(-tr.re)
}

/// Real antisymmetric Majorana covariance Γ_ab = (i/2)⟨[γ_a, γ_b]⟩ with
/// γ ordered as (x_1, y_1, x_2, y_2, ...), x_j = a_j + a†_j,
/// y_j = i(a†_j - a_j).
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaCovariance {
    pub matrix: DMatrix<f64>,
}

impl MajoranaCovariance {
    pub fn n_sites(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Gaussian state with the given mode occupations.
    pub fn from_modes(t: &BogoliubovTransform, occ: &ModeOccupations) -> Result<Self> {
        let n = t.n_modes();
        if occ.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: occ.len(),
            });
        }
        // Mode Majoranas X_k = Σ φ_jk x_j, Y_k = Σ ψ_jk y_j with Γ_{X_k Y_k} = 2n_k - 1.
        let d = DVector::from_iterator(n, occ.values().iter().map(|x| 2.0 * x - 1.0));
        let xy = scale_columns(&t.phi(), &d) * t.psi().transpose();
        let mut gamma = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for l in 0..n {
                gamma[(2 * j, 2 * l + 1)] = xy[(j, l)];
                gamma[(2 * l + 1, 2 * j)] = -xy[(j, l)];
            }
        }
        Ok(Self { matrix: gamma })
    }

    /// ⟨H⟩ = h Σ Γ_{x_j y_j} + J Σ Γ_{y_j x_{j+1}}.
    pub fn energy(&self, spec: &ChainSpec, h: f64) -> Result<f64> {
        let n = spec.n_sites();
        if self.n_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n_sites(),
            });
        }
        let g = &self.matrix;
        let field: f64 = (0..n).map(|j| g[(2 * j, 2 * j + 1)]).sum();
        let bond: f64 = (0..n - 1).map(|j| g[(2 * j + 1, 2 * j + 2)]).sum();
        Ok(h * field + spec.coupling() * bond)
    }

    /// Γ ↦ O Γ Oᵀ.
    pub fn conjugate(&self, o: &DMatrix<f64>) -> Result<Self> {
        if o.nrows() != self.matrix.nrows() || o.ncols() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                found: o.nrows(),
            });
        }
        let mut out = o * &self.matrix * o.transpose();
        antisymmetrize(&mut out);
        Ok(Self { matrix: out })
    }

    /// `weight`·self + (1 - weight)·other.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        if self.matrix.shape() != other.matrix.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                found: other.matrix.nrows(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * weight + &other.matrix * (1.0 - weight),
        })
    }

    /// Occupations ⟨b†_k b_k⟩ in the basis of `t`.
    pub fn mode_occupations(&self, t: &BogoliubovTransform) -> Result<Vec<f64>> {
        let n = t.n_modes();
        if self.n_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n_sites(),
            });
        }
        let xy = DMatrix::from_fn(n, n, |j, l| self.matrix[(2 * j, 2 * l + 1)]);
        let projected = t.phi().transpose() * xy * t.psi();
        Ok((0..n).map(|k| 0.5 * (1.0 + projected[(k, k)])).collect())
    }
}

pub(crate) fn antisymmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = 0.0;
        for j in i + 1..n {
            let x = 0.5 * (m[(i, j)] - m[(j, i)]);
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
    }
}

/// Quasiparticle occupations of a correlation matrix in the basis of `t`.
pub fn mode_occupations(t: &BogoliubovTransform, c: &CorrelationMatrix) -> Result<ModeOccupations> {
    let values = c.to_majorana().mode_occupations(t)?;
    Ok(ModeOccupations(values))
}

/// Diagonalizes the chain at field `h` in one call.
pub fn diagonalize(spec: &ChainSpec, h: f64) -> Result<BogoliubovTransform> {
    diagonalize_bdg(&build_bdg(spec, h)?)
}
