//! Ensembles of randomly voided arrays.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math needs std
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::exec::Executor;
use super::scaling::{policy_peak, PeakSearch, Policy};
use super::scan::{Axis, MetaValue, Observable, RateModel, ScanResult, Tier};
use crate::closed_form::modified_bragg_angle_for_lattice;
use crate::error::{Error, Result};
use crate::params::{Coupling, ModelParams};

pub const DEFAULT_SEED: u64 = 0x5eed_b7a6;

/// Drive applied to both the voided arrays and the perfect reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "drive", rename_all = "snake_case")]
pub enum VoidDrive {
    /// Δ at the perfect array's θ_MB peak; θ_MB of the effective lattice a/η
    /// for the voided arrays.
    ModifiedBragg {
        m: i64,
    },
    Fixed {
        theta: f64,
        delta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoidEnsembleSpec {
    pub n_atoms: usize,
    /// Target filling η; the lattice has round(N/η) sites.
    pub filling: f64,
    pub n_configs: usize,
    pub seed: u64,
    pub drive: VoidDrive,
    pub tier: Tier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoidEnsembleResult {
    pub n_atoms: usize,
    pub n_sites: usize,
    /// Realised filling N / n_sites.
    pub filling: f64,
    pub n_configs: usize,
    pub seed: u64,
    pub theta: f64,
    pub delta: f64,
    pub mean_rate: f64,
    pub std_rate: f64,
    /// Perfect array of N emitters at spacing a, θ_MB(Δ) and the same Δ.
    pub perfect_rate: f64,
    /// mean_rate / perfect_rate.
    pub robustness: f64,
    pub rates: Vec<f64>,
}

/// Occupation mask of configuration `index`: N of n_sites chosen uniformly.
pub fn void_mask(n_sites: usize, n_atoms: usize, seed: u64, index: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut mask = vec![false; n_sites];
    for k in rand::seq::index::sample(&mut rng, n_sites, n_atoms) {
        mask[k] = true;
    }
    mask
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let v0 = values[0];
    let mean = v0 + values.iter().map(|v| v - v0).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn void_ensemble<E: Executor>(
    spec: &VoidEnsembleSpec,
    params: &ModelParams,
    exec: &E,
) -> Result<VoidEnsembleResult> {
    if spec.n_atoms == 0 || spec.n_configs == 0 {
        return Err(Error::Domain("void ensemble needs N >= 1 and at least one configuration".into()));
    }
    if !(spec.filling.is_finite() && spec.filling > 0.0 && spec.filling <= 1.0) {
        return Err(Error::Validation(format!("filling eta = {} must be in (0, 1]", spec.filling)));
    }
    let n = spec.n_atoms;
    let n_sites = ((n as f64 / spec.filling).round() as usize).max(n);
    let filling = n as f64 / n_sites as f64;
    let perfect = params.with_filled(n)?;

    let (theta_perfect, theta_void, delta) = match spec.drive {
        VoidDrive::Fixed { theta, delta } => (theta, theta, delta),
        VoidDrive::ModifiedBragg { m } => {
            let search = PeakSearch::for_tier(spec.tier);
            let peak = policy_peak(&Policy::AtMb { m }, spec.tier, &perfect, &search, exec)?;
            let d = peak.delta_max;
            let a = params.a();
            (
                modified_bragg_angle_for_lattice(m, d, a, params)?,
                modified_bragg_angle_for_lattice(m, d, a / filling, params)?,
                d,
            )
        }
    };
    let perfect_rate = RateModel::new(spec.tier, &perfect)?.rate(theta_perfect, delta)?;

    let rates: Vec<f64> = exec
        .map(spec.n_configs, |k| {
            let mask = void_mask(n_sites, n, spec.seed, k as u64);
            RateModel::new(spec.tier, &params.with_occupation(mask)?)?.rate(theta_void, delta)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let (mean_rate, std_rate) = mean_std(&rates);
    Ok(VoidEnsembleResult {
        n_atoms: n,
        n_sites,
        filling,
        n_configs: spec.n_configs,
        seed: spec.seed,
        theta: theta_void,
        delta,
        mean_rate,
        std_rate,
        perfect_rate,
        robustness: mean_rate / perfect_rate,
        rates,
    })
}

fn sweep_result(
    axis: &str,
    values: Vec<f64>,
    results: &[VoidEnsembleResult],
    spec: &VoidEnsembleSpec,
    params: &ModelParams,
) -> ScanResult {
    let col = |f: fn(&VoidEnsembleResult) -> f64| results.iter().map(f).collect::<Vec<_>>();
    let mut out = ScanResult::new(
        vec![Axis { name: "beta_or_n".into(), values }],
        vec![
            Observable { name: "mean_rate".into(), values: col(|r| r.mean_rate) },
            Observable { name: "std_rate".into(), values: col(|r| r.std_rate) },
            Observable { name: "robustness_r".into(), values: col(|r| r.robustness) },
        ],
        spec.tier,
        params.clone(),
        Some(spec.seed),
    );
    out.set_meta("sweep", MetaValue::Text(axis.to_string()));
    out.set_meta("eta", MetaValue::Number(spec.filling));
    out.set_meta("n_configs", MetaValue::Number(spec.n_configs as f64));
    out
}

/// Ensemble statistics versus β at fixed directionality.
pub fn void_beta_sweep<E: Executor>(
    betas: &[f64],
    spec: &VoidEnsembleSpec,
    params: &ModelParams,
    exec: &E,
) -> Result<ScanResult> {
    let d = params.directionality();
    let results = betas
        .iter()
        .map(|&b| void_ensemble(spec, &params.with_coupling(Coupling::from_beta(b, d)?)?, exec))
        .collect::<Result<Vec<_>>>()?;
    let mut out = sweep_result("beta", betas.to_vec(), &results, spec, params);
    out.set_meta("n_atoms", MetaValue::Number(spec.n_atoms as f64));
    Ok(out)
}

/// Ensemble statistics versus N.
pub fn void_n_sweep<E: Executor>(
    n_list: &[usize],
    spec: &VoidEnsembleSpec,
    params: &ModelParams,
    exec: &E,
) -> Result<ScanResult> {
    let results = n_list
        .iter()
        .map(|&n| void_ensemble(&VoidEnsembleSpec { n_atoms: n, ..*spec }, params, exec))
        .collect::<Result<Vec<_>>>()?;
    Ok(sweep_result("n", n_list.iter().map(|&n| n as f64).collect(), &results, spec, params))
}
