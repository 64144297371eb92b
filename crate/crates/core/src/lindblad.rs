//! Exact steady state of the full master equation on the 2^N-dimensional
//! Hilbert space. Only meant as ground truth for the weak-drive solver at
//! small N.
//!
//! Basis states are bit strings in site order (site 0 is the most
//! significant bit), a set bit meaning the emitter is excited. Density
//! matrices are vectorized column by column: ρ_rc ↦ index r + d c.
//!
//! The dissipator is Σ_jl Γ_jl (σ_l ρ σ_j† − ½{σ_j†σ_l, ρ}), the ordering
//! that keeps the trace for complex Hermitian Γ and whose linearization is
//! the weak-drive system used in [`crate::steady_state`].

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::coupling::{CMatrix, CouplingMatrices};
use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::params::ModelParams;
use crate::steady_state::drive_phases;

/// Largest emitter count the dense superoperator is built for.
pub const MAX_ATOMS: usize = 6;

/// Above this many emitters the null vector comes from a trace-constrained
/// LU solve instead of an SVD.
const SVD_MAX_ATOMS: usize = 4;

/// Relative size of the second-smallest singular value below which the
/// null space counts as degenerate.
const DEGENERACY_TOLERANCE: f64 = 1e-9;

type C = Complex64;

/// Vectorized generator ρ̇ = L ρ.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub matrix: CMatrix,
    pub n_atoms: usize,
}

impl Liouvillian {
    /// Hilbert-space dimension 2^N.
    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_atoms
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.hilbert_dim();
        let v = DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        DMatrix::from_column_slice(d, d, out.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub rho: CMatrix,
    pub n_atoms: usize,
}

impl DensityMatrix {
    pub fn trace(&self) -> C {
        self.rho.trace()
    }

    /// Excited-state population of site j.
    pub fn excited_population(&self, j: usize) -> f64 {
        let bit = site_bit(self.n_atoms, j);
        (0..self.rho.nrows()).filter(|s| s & bit != 0).map(|s| self.rho[(s, s)].re).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * C::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks trace, Hermiticity and positivity.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - C::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::AmbiguousSteadyState(format!("trace {tr} differs from 1")));
        }
        let skew = (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if skew > 1e-10 {
            return Err(Error::AmbiguousSteadyState(format!("non-Hermitian state, skew {skew:.2e}")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -1e-9 {
            return Err(Error::AmbiguousSteadyState(format!("negative eigenvalue {min_eig:.2e}")));
        }
        Ok(())
    }
}

fn site_bit(n_atoms: usize, j: usize) -> usize {
    1 << (n_atoms - 1 - j)
}

/// Σ_jl c_jl σ_j† σ_l as a d×d operator.
fn hopping_operator(coeff: &CMatrix, include_diagonal: bool) -> CMatrix {
    let n = coeff.nrows();
    let d = 1usize << n;
    let mut op = DMatrix::zeros(d, d);
    for s in 0..d {
        for l in 0..n {
            let bl = site_bit(n, l);
            if s & bl == 0 {
                continue;
            }
            let lowered = s & !bl;
            for j in 0..n {
                if j == l && !include_diagonal {
                    continue;
                }
                let bj = site_bit(n, j);
                if lowered & bj != 0 {
                    continue;
                }
                op[(lowered | bj, s)] += coeff[(j, l)];
            }
        }
    }
    op
}

/// Hamiltonian Σ_j [Ω(e^{iφ_j} σ_j† + h.c.) − Δ σ_j†σ_j] + Σ_{j≠l} V_jl σ_j†σ_l.
fn hamiltonian(params: &ModelParams, m: &CouplingMatrices) -> CMatrix {
    let n = m.dim();
    let d = 1usize << n;
    let mut h = hopping_operator(&m.v_coherent, false);
    let phases = drive_phases(&m.positions, params.theta());
    for s in 0..d {
        for (j, &phi) in phases.iter().enumerate() {
            let bj = site_bit(n, j);
            if s & bj == 0 {
                let up = Complex64::from_polar(params.omega(), phi);
                h[(s | bj, s)] += up;
                h[(s, s | bj)] += up.conj();
            } else {
                h[(s, s)] -= C::new(params.delta(), 0.0);
            }
        }
    }
    h
}

/// Builds the dense 4^N × 4^N generator.
pub fn build_liouvillian(params: &ModelParams, m: &CouplingMatrices) -> Result<Liouvillian> {
    let n = m.dim();
    if n > MAX_ATOMS {
        return Err(Error::Capability(format!("exact master equation limited to N <= {MAX_ATOMS}, got N = {n}")));
    }
    let d = 1usize << n;
    let gamma = m.gamma_total();
    let k = hopping_operator(&gamma, true);
    let i = C::i();
    // H_eff = H − (i/2) K
    let h_eff = hamiltonian(params, m) - &k * C::new(0.0, 0.5);
    let h_eff_adj = h_eff.adjoint();

    let mut l = DMatrix::zeros(d * d, d * d);
    for c in 0..d {
        for r in 0..d {
            let col = r + d * c;
            // −i H_eff |r⟩⟨c|
            for s in 0..d {
                let h = h_eff[(s, r)];
                if h != C::new(0.0, 0.0) {
                    l[(s + d * c, col)] -= i * h;
                }
            }
            // +i |r⟩⟨c| H_eff†
            for s in 0..d {
                let h = h_eff_adj[(c, s)];
                if h != C::new(0.0, 0.0) {
                    l[(r + d * s, col)] += i * h;
                }
            }
            // Σ Γ_jl σ_l |r⟩⟨c| σ_j†
            for li in 0..n {
                let bl = site_bit(n, li);
                if r & bl == 0 {
                    continue;
                }
                for j in 0..n {
                    let bj = site_bit(n, j);
                    if c & bj == 0 {
                        continue;
                    }
                    l[((r & !bl) + d * (c & !bj), col)] += gamma[(j, li)];
                }
            }
        }
    }
    Ok(Liouvillian { matrix: l, n_atoms: n })
}

fn to_density(vec: &DVector<C>, n_atoms: usize) -> Result<DensityMatrix> {
    let d = 1usize << n_atoms;
    let rho = DMatrix::from_column_slice(d, d, vec.as_slice());
    let tr = rho.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::AmbiguousSteadyState("null vector has zero trace".into()));
    }
    let rho = &rho / tr;
    let rho = (&rho + rho.adjoint()) * C::new(0.5, 0.0);
    Ok(DensityMatrix { rho, n_atoms })
}

/// Null vector of L normalized to unit trace. Falls back to time
/// integration when the direct route does not produce a valid state.
pub fn steady_density(l: &Liouvillian) -> Result<DensityMatrix> {
    let direct = if l.n_atoms <= SVD_MAX_ATOMS { null_vector_svd(l) } else { null_vector_bordered(l) };
    match direct.and_then(|v| to_density(&v, l.n_atoms)) {
        Ok(rho) if rho.validate().is_ok() => Ok(rho),
        Err(e @ Error::AmbiguousSteadyState(_)) => Err(e),
        _ => steady_density_by_integration(l),
    }
}

fn null_vector_svd(l: &Liouvillian) -> Result<DVector<C>> {
    let svd = l.matrix.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::AmbiguousSteadyState("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let largest = svd.singular_values[order[order.len() - 1]];
    if order.len() > 1 && svd.singular_values[order[1]] < DEGENERACY_TOLERANCE * largest {
        return Err(Error::AmbiguousSteadyState(format!(
            "null space dimension > 1 (second singular value {:.2e})",
            svd.singular_values[order[1]]
        )));
    }
    Ok(v_t.row(order[0]).adjoint())
}

/// Replaces one equation by Tr ρ = 1 and solves the resulting system.
fn null_vector_bordered(l: &Liouvillian) -> Result<DVector<C>> {
    let d = l.hilbert_dim();
    let mut a = l.matrix.clone();
    let dim = a.nrows();
    // The trace row is a linear combination of the others: drop row 0.
    for col in 0..dim {
        a[(0, col)] = C::new(0.0, 0.0);
    }
    for r in 0..d {
        a[(0, r + d * r)] = C::new(1.0, 0.0);
    }
    let mut rhs = DVector::zeros(dim);
    rhs[0] = C::new(1.0, 0.0);
    let lu = Lu::new(a);
    let cond = lu.condition_estimate();
    if cond.is_nan() || cond >= 1.0 / DEGENERACY_TOLERANCE * 1e3 {
        return Err(Error::AmbiguousSteadyState(format!("trace-constrained system singular (condition {cond:.2e})")));
    }
    Ok(lu.solve(&rhs))
}

/// Integrates ρ̇ = Lρ from the all-ground state until ‖ρ̇‖ < 1e−12, using
/// an RK4 step matrix that is squared to take doubling time steps.
pub fn steady_density_by_integration(l: &Liouvillian) -> Result<DensityMatrix> {
    let dim = l.matrix.nrows();
    let norm1 = l.matrix.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let h = 1.0 / norm1.max(1.0);
    let hl = &l.matrix * C::new(h, 0.0);
    let mut step = DMatrix::identity(dim, dim);
    let mut power = DMatrix::identity(dim, dim);
    for k in 1..=4 {
        power = &power * &hl / C::new(k as f64, 0.0);
        step += &power;
    }
    let mut rho0 = DVector::zeros(dim);
    rho0[0] = C::new(1.0, 0.0);
    for _ in 0..64 {
        let rho = &step * &rho0;
        if (&l.matrix * &rho).norm() < 1e-12 {
            return to_density(&rho, l.n_atoms);
        }
        step = &step * &step;
    }
    Err(Error::AmbiguousSteadyState("time integration did not converge".into()))
}

/// Σ_jl Γ_jl Tr(ρ σ_j† σ_l) for the channel matrix Γ.
pub fn guided_rate_exact(rho: &DensityMatrix, gamma: &CMatrix) -> f64 {
    let op = hopping_operator(gamma, true);
    let d = rho.rho.nrows();
    let mut acc = C::new(0.0, 0.0);
    for r in 0..d {
        for s in 0..d {
            acc += rho.rho[(r, s)] * op[(s, r)];
        }
    }
    acc.re.max(0.0)
}

/// Right-mode rate from the exact steady state.
pub fn right_rate_exact(params: &ModelParams, m: &CouplingMatrices) -> Result<f64> {
    let l = build_liouvillian(params, m)?;
    let rho = steady_density(&l)?;
    Ok(guided_rate_exact(&rho, &m.gamma_right))
}
