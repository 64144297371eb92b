//! Dominant oscillation frequency of a rate sampled at consecutive N.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 math needs std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 16;
const OVERSAMPLING: usize = 16;
const TREND_GRID: usize = 800;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationEstimate {
    /// Angular frequency per unit N, in [0, π].
    pub frequency: f64,
    /// Amplitude of the dominant component, in the units of the input.
    pub amplitude: f64,
    /// Frequency resolution 2π / (number of samples).
    pub bin_width: f64,
    /// Decay ratio of the fitted trend A + Bρ^N + Cρ^{2N}.
    pub trend_ratio: f64,
    /// No oscillation above round-off.
    pub flat: bool,
}

/// Solves the 3×3 normal equations; `None` when singular.
fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        for r in 0..3 {
            if r != c {
                let pivot = m[c];
                let f = m[r][c] / pivot[c];
                for (x, &y) in m[r].iter_mut().zip(&pivot).skip(c) {
                    *x -= f * y;
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Residual of the best trend fit over a grid of decay ratios.
fn detrend(y: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut best: Option<(f64, f64, [f64; 3])> = None;
    for g in 0..TREND_GRID {
        // 1 − ρ log-spaced over [1e-5, 0.5].
        let lg = -5.0 + (5.0 - 0.5f64.log10().abs()) * g as f64 / (TREND_GRID - 1) as f64;
        let rho = 1.0 - 10f64.powf(lg);
        let basis = |k: usize| {
            let e = rho.powi(k as i32);
            [1.0, e, e * e]
        };
        let mut m = [[0.0; 4]; 3];
        for (k, &yk) in y.iter().enumerate() {
            let b = basis(k);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += b[i] * b[j];
                }
                m[i][3] += b[i] * yk;
            }
        }
        let Some(c) = solve3(m) else { continue };
        let sse: f64 = (0..n)
            .map(|k| {
                let b = basis(k);
                let r = y[k] - c[0] * b[0] - c[1] * b[1] - c[2] * b[2];
                r * r
            })
            .sum();
        if sse.is_finite() && best.is_none_or(|(s, _, _)| sse < s) {
            best = Some((sse, rho, c));
        }
    }
    match best {
        Some((_, rho, c)) => {
            let res = (0..n)
                .map(|k| {
                    let e = rho.powi(k as i32);
                    y[k] - c[0] - c[1] * e - c[2] * e * e
                })
                .collect();
            (res, rho)
        }
        None => {
            let mean = y.iter().sum::<f64>() / n as f64;
            (y.iter().map(|v| v - mean).collect(), 1.0)
        }
    }
}

/// Estimates the dominant oscillation of `rates` sampled at consecutive
/// integers `n_values` after removing a smooth saturating trend.
pub fn oscillation_frequency(n_values: &[usize], rates: &[f64]) -> Result<OscillationEstimate> {
    if n_values.len() != rates.len() {
        return Err(Error::Domain("N and rate sequences differ in length".into()));
    }
    if rates.len() < MIN_SAMPLES {
        return Err(Error::Domain(format!("oscillation analysis needs at least {MIN_SAMPLES} samples")));
    }
    if n_values.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Domain("oscillation analysis needs consecutive N".into()));
    }
    if rates.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite rate in oscillation analysis".into()));
    }
    let len = rates.len();
    let (residual, trend_ratio) = detrend(rates);
    let bins = OVERSAMPLING * len;
    let mut best = (0.0, 0.0);
    for j in 0..=bins {
        let f = PI * j as f64 / bins as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (k, r) in residual.iter().enumerate() {
            let (s, c) = (f * k as f64).sin_cos();
            re += r * c;
            im -= r * s;
        }
        let power = re * re + im * im;
        if power > best.1 {
            best = (f, power);
        }
    }
    let amplitude = 2.0 * best.1.sqrt() / len as f64;
    let scale = rates.iter().map(|v| v.abs()).sum::<f64>() / len as f64;
    let flat = amplitude <= 1e-12 * scale;
    Ok(OscillationEstimate {
        frequency: if flat { 0.0 } else { best.0 },
        amplitude,
        bin_width: 2.0 * PI / len as f64,
        trend_ratio,
        flat,
    })
}
