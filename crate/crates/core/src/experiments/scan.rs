//! Spectra and (θ, Δ) maps of the right-mode scattering rate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::exec::Executor;
use crate::closed_form::{rate_direct_sum_at, rate_geometric_sum};
use crate::coupling::{guided_coupling_matrices, CouplingMatrices};
use crate::error::{Error, Result};
use crate::lindblad::{self, MAX_ATOMS};
use crate::params::{positions_from_mask, ModelParams};
use crate::steady_state;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Model used to evaluate the guided rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Analytic transfer sum; D = 1 only.
    Closed,
    /// Weak-drive linear steady state; any D.
    Linear,
    /// Exact master equation; N ≤ 6.
    Lindblad,
}

impl Tier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tier::Closed => "closed",
            Tier::Linear => "linear",
            Tier::Lindblad => "lindblad",
        }
    }
}

impl core::str::FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Tier::Closed),
            "linear" => Ok(Tier::Linear),
            "lindblad" => Ok(Tier::Lindblad),
            other => Err(Error::Configuration(format!("unknown tier '{other}'"))),
        }
    }
}

/// Guided-rate evaluator for one emitter configuration. Coupling matrices
/// are built once and reused across drive settings.
#[derive(Debug, Clone)]
pub struct RateModel {
    tier: Tier,
    params: ModelParams,
    positions: Vec<f64>,
    filled: bool,
    matrices: Option<CouplingMatrices>,
}

impl RateModel {
    pub fn new(tier: Tier, params: &ModelParams) -> Result<Self> {
        let positions = positions_from_mask(params);
        let n = positions.len();
        match tier {
            Tier::Closed if !params.coupling().is_unidirectional() => {
                return Err(Error::Configuration(format!(
                    "closed-form tier requires D = 1 (gamma_l = 0), got D = {}",
                    params.directionality()
                )))
            }
            Tier::Lindblad if n > MAX_ATOMS => {
                return Err(Error::Capability(format!("lindblad tier supports N <= {MAX_ATOMS}, got N = {n}")))
            }
            _ => {}
        }
        let matrices = match tier {
            Tier::Closed => None,
            _ => Some(guided_coupling_matrices(params)),
        };
        let filled = params.occupation().iter().all(|&o| o);
        Ok(RateModel { tier, params: params.clone(), positions, filled, matrices })
    }

    pub fn tier(&self) -> Tier {
        self.tier
    }

    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Right-mode rate Γ_R at incidence `theta` and detuning `delta`.
    pub fn rate(&self, theta: f64, delta: f64) -> Result<f64> {
        match self.tier {
            Tier::Closed if self.filled => Ok(rate_geometric_sum(self.n_atoms(), theta, delta, &self.params)),
            Tier::Closed => Ok(rate_direct_sum_at(&self.positions, theta, delta, &self.params)),
            Tier::Linear => {
                let p = self.params.clone().with_drive(self.params.omega(), delta, theta)?;
                steady_state::right_rate(self.matrices.as_ref().expect("matrices"), &p)
            }
            Tier::Lindblad => {
                let p = self.params.clone().with_drive(self.params.omega(), delta, theta)?;
                lindblad::right_rate_exact(&p, self.matrices.as_ref().expect("matrices"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub version: String,
}

/// Gridded observables. Values are stored row-major over the axes (the
/// first axis varies slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub axes: Vec<Axis>,
    pub observables: Vec<Observable>,
    pub tier: Tier,
    pub params: ModelParams,
    pub provenance: Provenance,
    pub metadata: BTreeMap<String, MetaValue>,
}

impl ScanResult {
    pub fn new(
        axes: Vec<Axis>,
        observables: Vec<Observable>,
        tier: Tier,
        params: ModelParams,
        seed: Option<u64>,
    ) -> Self {
        ScanResult {
            axes,
            observables,
            tier,
            params,
            provenance: Provenance { seed, version: VERSION.to_string() },
            metadata: BTreeMap::new(),
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables.iter().find(|o| o.name == name).map(|o| o.values.as_slice())
    }

    pub fn set_meta(&mut self, key: &str, value: MetaValue) {
        self.metadata.insert(key.to_string(), value);
    }

    /// Column names: axes first, then observables.
    pub fn columns(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.name.as_str()).chain(self.observables.iter().map(|o| o.name.as_str())).collect()
    }

    /// Row `k` as (axis coordinates…, observable values…).
    pub fn row(&self, k: usize) -> Vec<f64> {
        let shape = self.shape();
        let mut idx = Vec::with_capacity(shape.len());
        let mut rem = k;
        for &len in shape.iter().rev() {
            idx.push(rem % len);
            rem /= len;
        }
        idx.reverse();
        self.axes
            .iter()
            .zip(idx)
            .map(|(a, i)| a.values[i])
            .chain(self.observables.iter().map(|o| o.values[k]))
            .collect()
    }

    /// Checks the shape and non-negativity invariants.
    pub fn validate(&self) -> Result<()> {
        let len = self.len();
        for o in &self.observables {
            if o.values.len() != len {
                return Err(Error::Domain(format!(
                    "observable '{}' has {} values, expected {len}",
                    o.name,
                    o.values.len()
                )));
            }
            if o.name.starts_with("rate") && o.values.iter().any(|&v| v < 0.0) {
                return Err(Error::Domain(format!("negative rate in '{}'", o.name)));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("{name} grid has non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("{name} grid must be strictly ascending")));
    }
    Ok(())
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Γ_R(θ, Δ) over a detuning grid at fixed θ.
pub fn spectrum_scan<E: Executor>(
    theta: f64,
    delta_grid: &[f64],
    tier: Tier,
    params: &ModelParams,
    exec: &E,
) -> Result<ScanResult> {
    check_grid("delta", delta_grid)?;
    let model = RateModel::new(tier, params)?;
    let rates = collect(exec.map(delta_grid.len(), |k| model.rate(theta, delta_grid[k])))?;
    let mut out = ScanResult::new(
        alloc::vec![Axis { name: "delta".into(), values: delta_grid.to_vec() }],
        alloc::vec![Observable { name: "rate_r".into(), values: rates }],
        tier,
        params.clone(),
        None,
    );
    out.set_meta("theta", MetaValue::Number(theta));
    Ok(out)
}

/// Γ_R over a (θ, Δ) grid.
pub fn map_scan<E: Executor>(
    theta_grid: &[f64],
    delta_grid: &[f64],
    tier: Tier,
    params: &ModelParams,
    exec: &E,
) -> Result<ScanResult> {
    check_grid("theta", theta_grid)?;
    check_grid("delta", delta_grid)?;
    let model = RateModel::new(tier, params)?;
    let nd = delta_grid.len();
    let rates = collect(exec.map(theta_grid.len() * nd, |k| model.rate(theta_grid[k / nd], delta_grid[k % nd])))?;
    Ok(ScanResult::new(
        alloc::vec![
            Axis { name: "theta".into(), values: theta_grid.to_vec() },
            Axis { name: "delta".into(), values: delta_grid.to_vec() },
        ],
        alloc::vec![Observable { name: "rate_r".into(), values: rates }],
        tier,
        params.clone(),
        None,
    ))
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
    }
}
