//! Analytic model of a cascaded (D = 1) chain.
//!
//! Guided light passing one emitter is multiplied by the transmission
//! coefficient t, and the drive advances its phase by k0 a cos θ per site
//! while the guided mode advances by k_f a. The guided rate is the squared
//! coherent sum of the single-emitter contributions.
//!
//! Every function here takes the right-mode coupling γ_R as its `beta`
//! argument. For D = 1 this is the beta factor; for D < 1 the expressions
//! are the single-pass approximation and only the steady-state solver is
//! exact.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math needs std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, K0};

/// Denominator threshold below which the geometric-sum ratio is evaluated by
/// its series limit.
pub const SINGULAR_DENOMINATOR: f64 = 1e-12;

/// |b| below this (after folding) counts as b ≡ 0 mod 2π.
pub const PHASE_LOCK_TOLERANCE: f64 = 1e-9;

/// Regime thresholds: |N ln|t|| for negligible damping, the fraction of an
/// oscillation period for negligible dephasing, and |t|^N for a saturated
/// chain.
pub const QUADRATIC_DAMPING_MAX: f64 = 0.05;
pub const QUADRATIC_PERIOD_FRACTION: f64 = 0.1;
pub const SATURATED_FIELD_MAX: f64 = 0.01;

/// Exponents of the modified-Bragg scalings: Δ_max ∝ N^{1/2}, rate ∝ N.
pub const MB_DETUNING_EXPONENT: f64 = 0.5;
pub const MB_RATE_EXPONENT: f64 = 1.0;

/// Single-emitter amplitude transmission t = 1 − 2iβ/(2Δ + i).
pub fn transmission_coefficient(delta: f64, beta: f64) -> Complex64 {
    let i = Complex64::i();
    Complex64::new(1.0, 0.0) - i * (2.0 * beta) / (Complex64::new(2.0 * delta, 1.0))
}

/// |t|² = (4Δ² + (1 − 2β)²)/(4Δ² + 1), and 1 − |t|² = 4β(1 − β)/(4Δ² + 1)
/// evaluated without cancellation.
fn transmission_magnitude(delta: f64, beta: f64) -> (f64, f64) {
    let d2 = 4.0 * delta * delta + 1.0;
    let one_minus_r2 = 4.0 * beta * (1.0 - beta) / d2;
    let r2 = (4.0 * delta * delta + (1.0 - 2.0 * beta) * (1.0 - 2.0 * beta)) / d2;
    (r2.sqrt(), one_minus_r2)
}

/// Single-emitter scattering rate into the guided mode,
/// Γ̃_Δ = 4Ω²β/(4Δ² + 1).
pub fn single_atom_guided_rate(delta: f64, omega: f64, beta: f64) -> f64 {
    4.0 * omega * omega * beta / (4.0 * delta * delta + 1.0)
}

/// k_eff a = (k0 cos θ + k_f) a.
pub fn k_eff_a(theta: f64, params: &ModelParams) -> f64 {
    (K0 * theta.cos() + params.k_f()) * params.a()
}

/// Reduces an angle to (−π, π], ties at ±π going to +π.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x % TAU;
    if y <= -PI {
        y += TAU;
    } else if y > PI {
        y -= TAU;
    }
    y
}

/// Per-site phase mismatch b = arg t − k_eff a, reduced to (−π, π].
pub fn phase_mismatch(theta: f64, delta: f64, params: &ModelParams) -> f64 {
    let beta = params.coupling().gamma_r;
    wrap_phase(transmission_coefficient(delta, beta).arg() - k_eff_a(theta, params))
}

/// Term-by-term Γ̃_Δ |Σ_{m<N} t^m e^{−i m k_eff a}|².
pub fn rate_direct_sum(n: usize, theta: f64, delta: f64, params: &ModelParams) -> f64 {
    let beta = params.coupling().gamma_r;
    let t = transmission_coefficient(delta, beta);
    let q = t * Complex64::from_polar(1.0, -k_eff_a(theta, params));
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        // Neumaier-compensated accumulation.
        let next = sum + term;
        if sum.re.abs() >= term.re.abs() {
            comp.re += (sum.re - next.re) + term.re;
        } else {
            comp.re += (term.re - next.re) + sum.re;
        }
        if sum.im.abs() >= term.im.abs() {
            comp.im += (sum.im - next.im) + term.im;
        } else {
            comp.im += (term.im - next.im) + sum.im;
        }
        sum = next;
        term *= q;
    }
    single_atom_guided_rate(delta, params.omega(), beta) * (sum + comp).norm_sqr()
}

/// Guided rate for emitters at arbitrary positions (e.g. a lattice with
/// voids): Γ̃_Δ |Σ_k t^{N−1−k} e^{i k_eff z_k}|², the last emitter being the
/// most downstream.
pub fn rate_direct_sum_at(positions: &[f64], theta: f64, delta: f64, params: &ModelParams) -> f64 {
    let beta = params.coupling().gamma_r;
    let t = transmission_coefficient(delta, beta);
    let k_eff = K0 * theta.cos() + params.k_f();
    // Horner accumulation from the upstream end.
    let mut field = Complex64::new(0.0, 0.0);
    for &z in positions {
        field = field * t + Complex64::from_polar(1.0, k_eff * z);
    }
    single_atom_guided_rate(delta, params.omega(), beta) * field.norm_sqr()
}

/// (e^{x+iy} − 1) without cancellation for small arguments.
fn cexpm1(x: f64, y: f64) -> Complex64 {
    let s = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// |Σ_{m<N} q^m|² for q = r e^{ib}, given 1 − r².
fn geometric_ratio(n: usize, r: f64, one_minus_r2: f64, b: f64) -> f64 {
    let nf = n as f64;
    let one_minus_r = one_minus_r2 / (1.0 + r);
    let sb = (0.5 * b).sin();
    let denominator = one_minus_r * one_minus_r + 4.0 * r * sb * sb;
    let ln_r = 0.5 * (-one_minus_r2).ln_1p();

    if denominator < SINGULAR_DENOMINATOR {
        // Series limit (e^{Nw} − 1)/(e^w − 1), w = ln r + ib → N as w → 0.
        if ln_r == 0.0 && b == 0.0 {
            return nf * nf;
        }
        let num = cexpm1(nf * ln_r, nf * b);
        let den = cexpm1(ln_r, b);
        return (num / den).norm_sqr();
    }

    // 1 + r^{2N} − 2 r^N cos(bN) = (1 − r^N)² + 4 r^N sin²(bN/2)
    let r_n = (nf * ln_r).exp();
    let one_minus_r_n = -(nf * ln_r).exp_m1();
    let sbn = (0.5 * b * nf).sin();
    let numerator = one_minus_r_n * one_minus_r_n + 4.0 * r_n * sbn * sbn;
    numerator / denominator
}

/// Closed-form geometric sum:
/// Γ̃_Δ (1 + |t|^{2N} − 2|t|^N cos bN) / (1 + |t|² − 2|t| cos b).
pub fn rate_geometric_sum(n: usize, theta: f64, delta: f64, params: &ModelParams) -> f64 {
    let beta = params.coupling().gamma_r;
    let (r, one_minus_r2) = transmission_magnitude(delta, beta);
    let b = phase_mismatch(theta, delta, params);
    single_atom_guided_rate(delta, params.omega(), beta) * geometric_ratio(n, r, one_minus_r2, b)
}

/// Geometric sum on the phase-locked locus b = 0:
/// Γ̃_Δ (1 − |t|^N)² / (1 − |t|)².
pub fn mb_envelope(n: usize, delta: f64, beta: f64, omega: f64) -> f64 {
    let (r, one_minus_r2) = transmission_magnitude(delta, beta);
    single_atom_guided_rate(delta, omega, beta) * geometric_ratio(n, r, one_minus_r2, 0.0)
}

/// cos θ_GB = 2πm/(a k0) − k_f/k0.
pub fn cos_geometric_bragg(m: i64, params: &ModelParams) -> f64 {
    m as f64 / params.a() - params.n_eff()
}

fn checked_arccos(c: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !c.is_finite() || c.abs() > 1.0 + SLACK {
        return Err(Error::AngleOutOfRange { cos_theta: c });
    }
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// Geometric Bragg angle for order m.
pub fn geometric_bragg_angle(m: i64, params: &ModelParams) -> Result<f64> {
    checked_arccos(cos_geometric_bragg(m, params))
}

/// All Bragg orders with a real geometric angle, ascending in m.
pub fn bragg_orders(params: &ModelParams) -> Vec<(i64, f64)> {
    let a = params.a();
    let lo = ((params.n_eff() - 1.0) * a - 1e-9).ceil() as i64;
    let hi = ((params.n_eff() + 1.0) * a + 1e-9).floor() as i64;
    (lo..=hi).filter_map(|m| geometric_bragg_angle(m, params).ok().map(|th| (m, th))).collect()
}

/// cos θ_MB = cos θ_GB + arg t/(k0 a) for lattice constant `lattice`.
pub fn cos_modified_bragg(m: i64, delta: f64, lattice: f64, params: &ModelParams) -> f64 {
    let t = transmission_coefficient(delta, params.coupling().gamma_r);
    m as f64 / lattice - params.n_eff() + t.arg() / (K0 * lattice)
}

/// Modified Bragg angle: the incidence angle at which b ≡ 0 mod 2π.
pub fn modified_bragg_angle(m: i64, delta: f64, params: &ModelParams) -> Result<f64> {
    checked_arccos(cos_modified_bragg(m, delta, params.a(), params))
}

/// Modified Bragg angle for an effective lattice constant (e.g. a/η for a
/// partially filled array), keeping the geometric angle of order m on the
/// underlying lattice.
pub fn modified_bragg_angle_for_lattice(m: i64, delta: f64, lattice: f64, params: &ModelParams) -> Result<f64> {
    let t = transmission_coefficient(delta, params.coupling().gamma_r);
    checked_arccos(cos_geometric_bragg(m, params) + t.arg() / (K0 * lattice))
}

/// Folded oscillation frequency of a phase b sampled at integer N, and the
/// corresponding period (∞ when b ≡ 0).
pub fn alias_analysis(b: f64) -> (f64, f64) {
    let alias = wrap_phase(b).abs();
    let period = if alias == 0.0 { f64::INFINITY } else { TAU / alias };
    (alias, period)
}

/// Large-N, Δ ≫ 1 peaks at the geometric Bragg angle: Δ ≈ ±βN/π with rate
/// (Ω²/β)(1 + e^{−π²(1−β)/(2βN)})².
pub fn gb_peak_asymptotics(n: usize, beta: f64, omega: f64) -> ((f64, f64), f64) {
    let nf = n as f64;
    let d = beta * nf / PI;
    let e = (-(PI * PI) * (1.0 - beta) / (2.0 * beta * nf)).exp();
    ((-d, d), omega * omega / beta * (1.0 + e) * (1.0 + e))
}

/// N → ∞ limit of the geometric-Bragg peak rate, 4Ω²/β.
pub fn gb_saturation_rate(beta: f64, omega: f64) -> f64 {
    4.0 * omega * omega / beta
}

/// Full description of one Bragg order at a given detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BraggSolution {
    pub order: i64,
    pub theta_gb: f64,
    pub cos_theta_gb: f64,
    /// None when |cos θ_MB| > 1 at this detuning.
    pub theta_mb: Option<f64>,
    pub cos_theta_mb: f64,
    /// Phase mismatch when driven at θ_GB.
    pub b: f64,
    pub b_alias: f64,
    pub period: f64,
}

impl BraggSolution {
    pub fn new(m: i64, delta: f64, params: &ModelParams) -> Result<Self> {
        let theta_gb = geometric_bragg_angle(m, params)?;
        let cos_theta_mb = cos_modified_bragg(m, delta, params.a(), params);
        let theta_mb = checked_arccos(cos_theta_mb).ok();
        let b = phase_mismatch(theta_gb, delta, params);
        let (b_alias, period) = alias_analysis(b);
        Ok(BraggSolution {
            order: m,
            theta_gb,
            cos_theta_gb: cos_geometric_bragg(m, params),
            theta_mb,
            cos_theta_mb,
            b,
            b_alias,
            period,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Quadratic,
    Linear,
    Saturating,
    Oscillatory,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Quadratic => "quadratic",
            Regime::Linear => "linear",
            Regime::Saturating => "saturating",
            Regime::Oscillatory => "oscillatory",
        }
    }
}

/// Regime label with the diagnostics that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub t_abs: f64,
    pub n_ln_t: f64,
    pub b_alias: f64,
    pub period: f64,
}

/// Classifies the N-dependence of the guided rate at (θ, Δ).
///
/// Precedence: quadratic, then linear, then saturating, then oscillatory.
pub fn classify_regime(n: usize, theta: f64, delta: f64, params: &ModelParams) -> RegimeLabel {
    let beta = params.coupling().gamma_r;
    let (t_abs, one_minus_r2) = transmission_magnitude(delta, beta);
    let nf = n as f64;
    let n_ln_t = nf * 0.5 * (-one_minus_r2).ln_1p();
    let (b_alias, period) = alias_analysis(phase_mismatch(theta, delta, params));
    let field = n_ln_t.exp();

    let regime = if n_ln_t.abs() <= QUADRATIC_DAMPING_MAX && nf <= QUADRATIC_PERIOD_FRACTION * period {
        Regime::Quadratic
    } else if b_alias <= PHASE_LOCK_TOLERANCE && t_abs < 1.0 {
        Regime::Linear
    } else if field <= SATURATED_FIELD_MAX {
        Regime::Saturating
    } else {
        Regime::Oscillatory
    };
    RegimeLabel { regime, t_abs, n_ln_t, b_alias, period }
}
