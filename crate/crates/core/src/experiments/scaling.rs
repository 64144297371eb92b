//! Peak location and height versus emitter number.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math needs std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::exec::Executor;
use super::peak::{find_peak, Branch, PeakResult};
use super::scan::{linspace, Axis, MetaValue, Observable, RateModel, ScanResult, Tier};
use crate::closed_form::{geometric_bragg_angle, mb_envelope, modified_bragg_angle};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// How the incidence angle (and detuning) is chosen for each N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Policy {
    /// θ = θ_GB(m), maximise over Δ.
    AtGb { m: i64 },
    /// θ = θ_MB(m, Δ) tracked along Δ, maximise over Δ.
    AtMb { m: i64 },
    /// Fixed θ and Δ; no search.
    Fixed { theta: f64, delta: f64 },
}

/// Detuning grid used by the peak search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSearch {
    pub points: usize,
    /// Points of a second pass over the two cells around the coarse argmax;
    /// 0 disables it.
    pub zoom_points: usize,
    pub branch: Branch,
}

impl PeakSearch {
    pub fn for_tier(tier: Tier) -> Self {
        match tier {
            Tier::Closed => PeakSearch { points: 2001, zoom_points: 0, branch: Branch::Positive },
            Tier::Linear | Tier::Lindblad => PeakSearch { points: 161, zoom_points: 41, branch: Branch::Positive },
        }
    }
}

/// Half-width of the detuning window, max(4, 2βN).
pub fn detuning_window(n: usize, beta: f64) -> f64 {
    (2.0 * beta * n as f64).max(4.0)
}

/// Maximises `f` over [−w, w] with an optional zoom pass.
pub fn search_peak<E, F>(f: F, window: f64, search: &PeakSearch, exec: &E) -> Result<PeakResult>
where
    E: Executor,
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let eval = |grid: &[f64]| -> Result<Vec<f64>> { exec.map(grid.len(), |k| f(grid[k])).into_iter().collect() };
    let grid = linspace(-window, window, search.points);
    let values = eval(&grid)?;
    let coarse = find_peak(&grid, &values, search.branch)?;
    if search.zoom_points < 3 || coarse.on_boundary {
        return Ok(coarse);
    }
    let k = coarse.grid_index;
    let fine_grid = linspace(grid[k - 1], grid[k + 1], search.zoom_points);
    let fine_values = eval(&fine_grid)?;
    let mut fine = find_peak(&fine_grid, &fine_values, Branch::Global)?;
    fine.branch = search.branch;
    fine.on_boundary = false;
    Ok(fine)
}

/// Rate as a function of Δ for the given policy; −∞ where θ_MB does not exist.
fn policy_rate(policy: &Policy, model: &RateModel, delta: f64) -> Result<f64> {
    let p = model.params();
    match *policy {
        Policy::AtGb { m } => model.rate(geometric_bragg_angle(m, p)?, delta),
        Policy::AtMb { m } => match modified_bragg_angle(m, delta, p) {
            Err(Error::AngleOutOfRange { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
            Ok(_) if model.tier() == Tier::Closed => {
                Ok(mb_envelope(model.n_atoms(), delta, p.coupling().gamma_r, p.omega()))
            }
            Ok(theta) => model.rate(theta, delta),
        },
        Policy::Fixed { theta, .. } => model.rate(theta, delta),
    }
}

/// Peak of the policy's rate curve for one (filled) array.
pub fn policy_peak<E: Executor>(
    policy: &Policy,
    tier: Tier,
    params: &ModelParams,
    search: &PeakSearch,
    exec: &E,
) -> Result<PeakResult> {
    let model = RateModel::new(tier, params)?;
    if let Policy::Fixed { theta, delta } = *policy {
        let rate = model.rate(theta, delta)?;
        return Ok(PeakResult {
            delta_max: delta,
            rate_max: rate,
            grid_index: 0,
            grid_step: 0.0,
            correction: 0.0,
            branch: Branch::Global,
            on_boundary: false,
        });
    }
    let window = detuning_window(model.n_atoms(), params.beta());
    search_peak(|d| policy_rate(policy, &model, d), window, search, exec)
}

/// Peak detuning and height for each N in `n_list`.
pub fn n_scaling<E: Executor>(
    policy: &Policy,
    n_list: &[usize],
    tier: Tier,
    params: &ModelParams,
    search: &PeakSearch,
    exec: &E,
) -> Result<ScanResult> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Domain("N list must be non-empty with N >= 1".into()));
    }
    let mut delta_max = Vec::with_capacity(n_list.len());
    let mut rate_max = Vec::with_capacity(n_list.len());
    let mut boundary = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let peak = policy_peak(policy, tier, &params.with_filled(n)?, search, exec)?;
        delta_max.push(peak.delta_max);
        rate_max.push(peak.rate_max);
        boundary.push(if peak.on_boundary { 1.0 } else { 0.0 });
    }
    let mut out = ScanResult::new(
        alloc::vec![Axis { name: "n".into(), values: n_list.iter().map(|&n| n as f64).collect() }],
        alloc::vec![
            Observable { name: "delta_max".into(), values: delta_max },
            Observable { name: "rate_max".into(), values: rate_max },
            Observable { name: "boundary_flag".into(), values: boundary },
        ],
        tier,
        params.clone(),
        None,
    );
    let label = match policy {
        Policy::AtGb { m } => format!("gb:{m}"),
        Policy::AtMb { m } => format!("mb:{m}"),
        Policy::Fixed { theta, delta } => format!("fixed:{theta}:{delta}"),
    };
    out.set_meta("policy", MetaValue::Text(label));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Least-squares fit of log y = log c + p log x.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() {
        return Err(Error::Domain("x and y differ in length".into()));
    }
    if x.len() < 4 {
        return Err(Error::Domain(format!("power-law fit needs at least 4 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::Domain("power-law fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("power-law fit needs distinct x values".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - exponent * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(PowerLawFit { exponent, prefactor: intercept.exp(), r_squared })
}
