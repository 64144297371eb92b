//! One function per subcommand, each producing a table.

use bragg_core::closed_form::{bragg_orders, classify_regime, BraggSolution};
use bragg_core::coupling::guided_coupling_matrices;
use bragg_core::experiments::scan::{Axis, Observable};
use bragg_core::experiments::{
    fit_power_law, map_scan, n_scaling, spectrum_scan, void_beta_sweep, void_n_sweep, Executor, MetaValue, PeakSearch,
    Policy, ScanResult, Tier, VoidDrive, VoidEnsembleSpec,
};
use bragg_core::lindblad::right_rate_exact;
use bragg_core::steady_state::right_rate;

use crate::config::{Resolved, ThetaSpec};
use crate::error::{CliError, CliResult};

/// Largest relative gap accepted by `oracle-check`.
pub const ORACLE_TOLERANCE: f64 = 1e-3;

pub struct Outcome {
    pub table: ScanResult,
    /// Set when the run completed but a check did not pass.
    pub failure: Option<String>,
}

impl From<ScanResult> for Outcome {
    fn from(table: ScanResult) -> Self {
        Outcome { table, failure: None }
    }
}

pub fn run_command<E: Executor>(r: &Resolved, exec: &E) -> CliResult<Outcome> {
    match r.command.as_str() {
        "spectrum" => spectrum(r, exec).map(Into::into),
        "map" => map(r, exec).map(Into::into),
        "scaling" => scaling(r, exec).map(Into::into),
        "bragg" => bragg(r).map(Into::into),
        "voids" => voids(r, exec).map(Into::into),
        "oracle-check" => oracle_check(r),
        other => Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    }
}

fn spectrum<E: Executor>(r: &Resolved, exec: &E) -> CliResult<ScanResult> {
    r.single_n()?;
    let theta = r.theta_at(&r.params, r.delta())?;
    let grid = r.delta_grid_values()?;
    Ok(spectrum_scan(theta, &grid, r.tier, &r.params, exec)?)
}

fn map<E: Executor>(r: &Resolved, exec: &E) -> CliResult<ScanResult> {
    r.single_n()?;
    let thetas = r.theta_grid_values(&r.params)?;
    let deltas = r.delta_grid_values()?;
    let mut out = map_scan(&thetas, &deltas, r.tier, &r.params, exec)?;
    out.set_meta("order", MetaValue::Number(r.m as f64));
    Ok(out)
}

fn scaling<E: Executor>(r: &Resolved, exec: &E) -> CliResult<ScanResult> {
    let policy = match r.policy.as_str() {
        "gb" => Policy::AtGb { m: r.m },
        "mb" => Policy::AtMb { m: r.m },
        _ => Policy::Fixed { theta: r.theta_at(&r.params, r.delta())?, delta: r.delta() },
    };
    let mut out = n_scaling(&policy, &r.n_list, r.tier, &r.params, &PeakSearch::for_tier(r.tier), exec)?;
    let n: Vec<f64> = r.n_list.iter().map(|&n| n as f64).collect();
    let fits = [
        ("rate", out.observable("rate_max").map(<[f64]>::to_vec)),
        ("delta", out.observable("delta_max").map(|v| v.iter().map(|d| d.abs()).collect::<Vec<_>>())),
    ];
    for (name, values) in fits {
        if name == "delta" && matches!(policy, Policy::Fixed { .. }) {
            continue;
        }
        match fit_power_law(&n, &values.unwrap_or_default()) {
            Ok(fit) => {
                out.set_meta(&format!("{name}_exponent"), MetaValue::Number(fit.exponent));
                out.set_meta(&format!("{name}_prefactor"), MetaValue::Number(fit.prefactor));
                out.set_meta(&format!("{name}_r_squared"), MetaValue::Number(fit.r_squared));
            }
            Err(e) => out.set_meta(&format!("{name}_fit"), MetaValue::Text(format!("unavailable: {e}"))),
        }
    }
    Ok(out)
}

fn bragg(r: &Resolved) -> CliResult<ScanResult> {
    let p = &r.params;
    let delta = r.delta();
    let solutions =
        bragg_orders(p).into_iter().map(|(m, _)| BraggSolution::new(m, delta, p)).collect::<Result<Vec<_>, _>>()?;
    if solutions.is_empty() {
        return Err(bragg_core::Error::AngleOutOfRange { cos_theta: f64::NAN }.into());
    }
    let col = |name: &str, f: &dyn Fn(&BraggSolution) -> f64| Observable {
        name: name.into(),
        values: solutions.iter().map(f).collect(),
    };
    let mut out = ScanResult::new(
        vec![Axis { name: "m".into(), values: solutions.iter().map(|s| s.order as f64).collect() }],
        vec![
            col("theta_gb", &|s| s.theta_gb),
            col("cos_theta_gb", &|s| s.cos_theta_gb),
            col("theta_mb", &|s| s.theta_mb.unwrap_or(f64::NAN)),
            col("cos_theta_mb", &|s| s.cos_theta_mb),
            col("b", &|s| s.b),
            col("b_alias", &|s| s.b_alias),
            col("period", &|s| s.period),
        ],
        Tier::Closed,
        p.clone(),
        None,
    );
    let n = r.single_n()?;
    let theta = r.theta_at(p, delta)?;
    let label = classify_regime(n, theta, delta, p);
    out.set_meta("regime", MetaValue::Text(label.regime.as_str().into()));
    out.set_meta("regime_theta", MetaValue::Number(theta));
    out.set_meta("regime_order", MetaValue::Number(r.m as f64));
    out.set_meta("t_abs", MetaValue::Number(label.t_abs));
    out.set_meta("n_ln_t", MetaValue::Number(label.n_ln_t));
    out.set_meta("b_alias", MetaValue::Number(label.b_alias));
    out.set_meta("period", MetaValue::Number(label.period));
    Ok(out)
}

fn voids<E: Executor>(r: &Resolved, exec: &E) -> CliResult<ScanResult> {
    let drive = match r.theta {
        ThetaSpec::Mb => VoidDrive::ModifiedBragg { m: r.m },
        _ => VoidDrive::Fixed { theta: r.theta_at(&r.params, r.delta())?, delta: r.delta() },
    };
    let spec = VoidEnsembleSpec {
        n_atoms: r.n_list[0],
        filling: r.eta,
        n_configs: r.configs,
        seed: r.seed,
        drive,
        tier: r.tier,
    };
    match &r.betas {
        Some(betas) => {
            r.single_n()?;
            Ok(void_beta_sweep(betas, &spec, &r.params, exec)?)
        }
        None => Ok(void_n_sweep(&r.n_list, &spec, &r.params, exec)?),
    }
}

fn oracle_check(r: &Resolved) -> CliResult<Outcome> {
    let mut linear = Vec::new();
    let mut exact = Vec::new();
    for &n in &r.n_list {
        let base = r.params.with_filled(n)?;
        let theta = r.theta_at(&base, r.delta())?;
        let p = base.with_angle(theta)?;
        let m = guided_coupling_matrices(&p);
        linear.push(right_rate(&m, &p)?);
        exact.push(right_rate_exact(&p, &m)?);
    }
    let rel: Vec<f64> = linear
        .iter()
        .zip(&exact)
        .map(|(l, e)| if *l == 0.0 && *e == 0.0 { 0.0 } else { (e - l).abs() / l.abs().max(e.abs()) })
        .collect();
    let worst = rel.iter().copied().fold(0.0, f64::max);
    let mut table = ScanResult::new(
        vec![Axis { name: "n".into(), values: r.n_list.iter().map(|&n| n as f64).collect() }],
        vec![
            Observable { name: "rate_linear".into(), values: linear },
            Observable { name: "rate_lindblad".into(), values: exact },
            Observable { name: "rel_diff".into(), values: rel },
        ],
        Tier::Lindblad,
        r.params.clone(),
        None,
    );
    table.set_meta("max_rel_diff", MetaValue::Number(worst));
    table.set_meta("tolerance", MetaValue::Number(ORACLE_TOLERANCE));
    let failure = (worst > ORACLE_TOLERANCE)
        .then(|| format!("linear and master-equation rates differ by {worst:.3e} (tolerance {ORACLE_TOLERANCE:e})"));
    Ok(Outcome { table, failure })
}
