//! Weak-drive steady state.
//!
//! To first order in Ω the coherences x_j = ⟨σ_j⟩ obey
//! ẋ = −A x − iΩ v with A = −iΔ + Γ/2 + iV and v_j = e^{iφ_j}, so the
//! stationary amplitudes solve A x = −iΩ v. The detuning enters with a
//! minus sign (H contains −Δ σ†σ): that is the choice under which the
//! cascaded solve reproduces the transfer-sum rate at the same Δ.

use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;

#[allow(unused_imports)] // inherent f64 math needs std
use num_traits::Float;

use crate::coupling::{CMatrix, CouplingMatrices};
use crate::error::Result;
use crate::linalg::Lu;
use crate::params::{ModelParams, K0};

/// Largest accepted 1-norm condition estimate of the steady-state system.
pub const MAX_CONDITION: f64 = 1e12;

/// Stationary coherences and the drive phases they were computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    pub x: DVector<Complex64>,
    pub drive_phases: Vec<f64>,
}

/// Drive phases φ_j = k0 z_j cos θ.
pub fn drive_phases(positions: &[f64], theta: f64) -> Vec<f64> {
    let c = theta.cos();
    positions.iter().map(|&z| K0 * z * c).collect()
}

/// System matrix A and drive vector v for the current (θ, Δ) of `params`.
pub fn assemble_system(m: &CouplingMatrices, params: &ModelParams) -> (CMatrix, DVector<Complex64>) {
    let n = m.dim();
    let i = Complex64::i();
    let gamma = m.gamma_total();
    let mut a = gamma * Complex64::new(0.5, 0.0) + &m.v_coherent * i;
    for j in 0..n {
        a[(j, j)] -= i * params.delta();
    }
    let v = DVector::from_iterator(
        n,
        drive_phases(&m.positions, params.theta()).into_iter().map(|p| Complex64::from_polar(1.0, p)),
    );
    (a, v)
}

/// Solves A x = −iΩ v by dense LU, rejecting ill-conditioned systems.
pub fn solve_amplitudes(a: CMatrix, v: &DVector<Complex64>, omega: f64) -> Result<DVector<Complex64>> {
    let rhs = v * Complex64::new(0.0, -omega);
    crate::linalg::solve_checked(a, &rhs, MAX_CONDITION)
}

/// Assembles and solves the steady state for `params`.
pub fn steady_state(m: &CouplingMatrices, params: &ModelParams) -> Result<AmplitudeVector> {
    let (a, v) = assemble_system(m, params);
    let x = solve_amplitudes(a, &v, params.omega())?;
    Ok(AmplitudeVector { x, drive_phases: drive_phases(&m.positions, params.theta()) })
}

/// Quadratic form x† Γ x: the photon flux into the channel described by Γ
/// (Γ^R, Γ^L or Γ^u).
pub fn guided_rate(x: &DVector<Complex64>, gamma: &CMatrix) -> f64 {
    let gx = gamma * x;
    x.dotc(&gx).re.max(0.0)
}

/// Right-mode rate for `params` in the weak-drive limit.
pub fn right_rate(m: &CouplingMatrices, params: &ModelParams) -> Result<f64> {
    Ok(guided_rate(&steady_state(m, params)?.x, &m.gamma_right))
}

/// Right-mode rate from a pre-factored system; used by scans that reuse
/// the coupling matrices for many drive settings.
pub fn right_rate_with(lu: &Lu, v: &DVector<Complex64>, omega: f64, gamma_right: &CMatrix) -> f64 {
    let x = lu.solve(&(v * Complex64::new(0.0, -omega)));
    guided_rate(&x, gamma_right)
}

/// Relative mismatch between total emission x†Γx and absorbed power
/// 2Ω Im(Σ x_j* e^{iφ_j}). Zero for an exact solve; returns 0 when no
/// light is scattered.
pub fn energy_balance_residual(amps: &AmplitudeVector, m: &CouplingMatrices, params: &ModelParams) -> f64 {
    let emitted = guided_rate(&amps.x, &m.gamma_total());
    let drive: Complex64 =
        amps.x.iter().zip(&amps.drive_phases).map(|(xj, &p)| xj.conj() * Complex64::from_polar(1.0, p)).sum();
    let absorbed = 2.0 * params.omega() * drive.im;
    if emitted == 0.0 {
        return if absorbed == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (emitted - absorbed).abs() / emitted
}

/// ‖A x + iΩ v‖ / ‖iΩ v‖.
pub fn solve_residual(a: &CMatrix, x: &DVector<Complex64>, v: &DVector<Complex64>, omega: f64) -> f64 {
    let rhs = v * Complex64::new(0.0, omega);
    (a * x + &rhs).norm() / rhs.norm()
}
