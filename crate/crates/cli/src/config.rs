//! Run configuration: command-line flags merged over an optional TOML or
//! JSON file, then resolved into model parameters and grids.

use std::fs;
use std::path::{Path, PathBuf};

use bragg_core::closed_form::{geometric_bragg_angle, modified_bragg_angle};
use bragg_core::experiments::voids::DEFAULT_SEED;
use bragg_core::experiments::{linspace, Tier};
use bragg_core::params::{DEFAULT_LATTICE_CONSTANT, DEFAULT_N_EFF};
use bragg_core::{Coupling, ModelParams};
use clap::Args;
use serde::de::Deserializer;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_BETA: f64 = 0.0707;
pub const DEFAULT_OMEGA: f64 = 0.01;
pub const DEFAULT_ORDER: i64 = 2;
pub const DEFAULT_CONFIGS: usize = 1000;
pub const DEFAULT_ETA: f64 = 0.5;
pub const THREADS_ENV: &str = "BRAGG_THREADS";

/// Every setting a run can take. Field names double as config-file keys;
/// absent values fall back to the config file, then to defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand the configuration was written for.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,

    /// TOML or JSON configuration file; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Lattice constant in wavelengths.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,

    /// Effective index of the guided mode.
    #[arg(long = "neff")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neff: Option<f64>,

    /// Emitter numbers: `144`, `10,20,40` or `start:stop:step`.
    #[arg(long)]
    #[serde(default, deserialize_with = "text_or_number", skip_serializing_if = "Option::is_none")]
    pub n: Option<String>,

    /// Total guided fraction β = (γ_R + γ_L)/Γ.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    /// Directionality D = (γ_R − γ_L)/(γ_R + γ_L).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,

    #[arg(long = "gamma-r")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_r: Option<f64>,

    #[arg(long = "gamma-l")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_l: Option<f64>,

    #[arg(long = "gamma-u")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_u: Option<f64>,

    /// Rabi frequency in units of Γ.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,

    /// Detuning in units of Γ.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,

    /// Incidence angle: radians, `gb`, `gb+x`, `gb-x` or `mb`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "text_or_number", skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,

    /// Bragg order.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,

    /// closed, linear or lindblad.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<String>,

    /// Detuning grid `start:stop:count`.
    #[arg(long = "delta-grid", allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<String>,

    /// Angle grid `start:stop:count`; endpoints accept the `gb±x` form.
    #[arg(long = "theta-grid", allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<String>,

    /// gb, mb or fixed.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Number of void configurations.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configs: Option<usize>,

    /// Filling fraction of voided arrays.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,

    /// β values for a void sweep, comma separated.
    #[arg(long)]
    #[serde(default, deserialize_with = "text_or_number", skip_serializing_if = "Option::is_none")]
    pub betas: Option<String>,

    /// csv or json.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,

    /// Output file; standard output when absent.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,

    /// Worker threads; all cores when unset.
    #[arg(long, env = THREADS_ENV)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TextOrNumber {
    Text(String),
    Int(i64),
    Float(f64),
    List(Vec<TextOrNumber>),
}

impl TextOrNumber {
    fn render(self) -> String {
        match self {
            TextOrNumber::Text(s) => s,
            TextOrNumber::Int(v) => v.to_string(),
            TextOrNumber::Float(v) => format!("{v:?}"),
            TextOrNumber::List(items) => items.into_iter().map(TextOrNumber::render).collect::<Vec<_>>().join(","),
        }
    }
}

fn text_or_number<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Option::<TextOrNumber>::deserialize(d).map(|v| v.map(TextOrNumber::render))
}

/// Reads a config file. JSON documents produced by this tool carry the
/// settings under a `config` key.
pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let parse_err = |message: String| CliError::ConfigParse { path: path.to_path_buf(), message };
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| parse_err(e.to_string()))
    }
}

fn has_beta_form(c: &RunConfig) -> bool {
    c.beta.is_some() || c.d.is_some()
}

fn has_rate_form(c: &RunConfig) -> bool {
    c.gamma_r.is_some() || c.gamma_l.is_some() || c.gamma_u.is_some()
}

fn check_coupling_form(c: &RunConfig, source: &str) -> CliResult<()> {
    if has_beta_form(c) && has_rate_form(c) {
        return Err(CliError::Usage(format!(
            "{source} mixes --beta/--d with --gamma-r/--gamma-l/--gamma-u; use one form"
        )));
    }
    Ok(())
}

fn beta_form_rates(c: &RunConfig) -> CliResult<Coupling> {
    Ok(Coupling::from_beta(c.beta.unwrap_or(DEFAULT_BETA), c.d.unwrap_or(1.0))?)
}

macro_rules! overlay {
    ($out:ident, $flags:ident; $($field:ident),*) => {
        $( if $flags.$field.is_some() { $out.$field = $flags.$field.clone(); } )*
    };
}

/// Flags override the file field by field. The coupling is taken in the
/// form the flags use; a file in the other form is converted to rates
/// before explicit rate flags are applied.
pub fn merge(file: &RunConfig, flags: &RunConfig) -> CliResult<RunConfig> {
    check_coupling_form(file, "config file")?;
    check_coupling_form(flags, "command line")?;
    let mut out = file.clone();
    overlay!(out, flags; config, a, neff, n, omega, delta, theta, m, tier, delta_grid, theta_grid, policy,
        seed, configs, eta, betas, format, output, threads);
    if has_beta_form(flags) {
        out.beta = flags.beta.or(file.beta);
        out.d = flags.d.or(file.d);
        out.gamma_r = None;
        out.gamma_l = None;
        out.gamma_u = None;
    } else if has_rate_form(flags) {
        if has_beta_form(file) {
            let c = beta_form_rates(file)?;
            out.gamma_r = Some(c.gamma_r);
            out.gamma_l = Some(c.gamma_l);
            out.gamma_u = Some(c.gamma_u);
            out.beta = None;
            out.d = None;
        }
        overlay!(out, flags; gamma_r, gamma_l, gamma_u);
    }
    Ok(out)
}

/// Incidence angle as given by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaSpec {
    Radians(f64),
    /// Offset from the geometric Bragg angle.
    Gb(f64),
    /// Modified Bragg angle at the run's detuning.
    Mb,
}

impl ThetaSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        let t = s.trim();
        let bad = || CliError::Usage(format!("invalid angle '{s}': expected radians, gb, gb+x, gb-x or mb"));
        if t == "mb" {
            return Ok(ThetaSpec::Mb);
        }
        if let Some(rest) = t.strip_prefix("gb") {
            if rest.is_empty() {
                return Ok(ThetaSpec::Gb(0.0));
            }
            let (sign, num) = match rest.as_bytes()[0] {
                b'+' => (1.0, &rest[1..]),
                b'-' => (-1.0, &rest[1..]),
                _ => return Err(bad()),
            };
            return num.trim().parse::<f64>().map(|x| ThetaSpec::Gb(sign * x)).map_err(|_| bad());
        }
        t.parse::<f64>().map(ThetaSpec::Radians).map_err(|_| bad())
    }

    pub fn resolve(&self, m: i64, delta: f64, params: &ModelParams) -> CliResult<f64> {
        Ok(match *self {
            ThetaSpec::Radians(th) => th,
            ThetaSpec::Gb(off) => geometric_bragg_angle(m, params)? + off,
            ThetaSpec::Mb => modified_bragg_angle(m, delta, params)?,
        })
    }
}

/// `start:stop:count` grid, endpoints parsed by `endpoint`.
fn parse_grid_with<T>(s: &str, endpoint: impl Fn(&str) -> CliResult<T>) -> CliResult<(T, T, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("invalid grid '{s}': expected start:stop:count")));
    }
    let count: usize = parts[2].trim().parse().map_err(|_| CliError::Usage(format!("invalid grid count in '{s}'")))?;
    if count < 1 {
        return Err(CliError::Usage(format!("grid '{s}' needs a count of at least 1")));
    }
    Ok((endpoint(parts[0])?, endpoint(parts[1])?, count))
}

pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let (a, b, n) = parse_grid_with(s, |p| {
        p.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("invalid grid endpoint '{p}'")))
    })?;
    Ok(linspace(a, b, n))
}

/// Emitter numbers: a single value, a comma list or `start:stop:step`
/// (inclusive).
pub fn parse_n_list(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("invalid N specification '{s}'"));
    let num = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
    let list: Vec<usize> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step == 0 || stop < start {
            return Err(bad());
        }
        (start..=stop).step_by(step).collect()
    } else {
        s.split(',').map(num).collect::<CliResult<_>>()?
    };
    if list.is_empty() || list.contains(&0) {
        return Err(CliError::Usage(format!("N specification '{s}' must list values >= 1")));
    }
    Ok(list)
}

pub fn parse_float_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("invalid number '{p}' in '{s}'"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Per-subcommand defaults for settings whose natural value differs.
pub struct Defaults {
    pub n: &'static str,
    pub theta: &'static str,
    pub omega: f64,
}

pub fn defaults_for(command: &str) -> Defaults {
    match command {
        "scaling" => Defaults { n: "50:500:10", theta: "gb", omega: DEFAULT_OMEGA },
        "voids" => Defaults { n: "50", theta: "mb", omega: DEFAULT_OMEGA },
        "oracle-check" => Defaults { n: "1,2,3", theta: "gb", omega: 1e-3 },
        _ => Defaults { n: "100", theta: "gb", omega: DEFAULT_OMEGA },
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: String,
    /// The merged configuration with defaults filled in; re-reading it
    /// reproduces the run.
    pub echo: RunConfig,
    /// Parameters for the first N in `n_list`.
    pub params: ModelParams,
    pub n_list: Vec<usize>,
    pub theta: ThetaSpec,
    pub m: i64,
    pub tier: Tier,
    pub delta_grid: String,
    pub theta_grid: String,
    pub policy: String,
    pub seed: u64,
    pub configs: usize,
    pub eta: f64,
    pub betas: Option<Vec<f64>>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Resolved {
    pub fn delta(&self) -> f64 {
        self.params.delta()
    }

    pub fn single_n(&self) -> CliResult<usize> {
        match self.n_list.as_slice() {
            [n] => Ok(*n),
            _ => Err(CliError::Usage(format!("{} takes a single N", self.command))),
        }
    }

    pub fn theta_at(&self, params: &ModelParams, delta: f64) -> CliResult<f64> {
        self.theta.resolve(self.m, delta, params)
    }

    pub fn theta_grid_values(&self, params: &ModelParams) -> CliResult<Vec<f64>> {
        let (a, b, n) = parse_grid_with(&self.theta_grid, ThetaSpec::parse)?;
        let a = a.resolve(self.m, self.delta(), params)?;
        let b = b.resolve(self.m, self.delta(), params)?;
        Ok(linspace(a, b, n))
    }

    pub fn delta_grid_values(&self) -> CliResult<Vec<f64>> {
        parse_grid(&self.delta_grid)
    }
}

pub fn resolve(command: &str, merged: &RunConfig) -> CliResult<Resolved> {
    if let Some(c) = &merged.command {
        if c != command {
            return Err(CliError::Usage(format!("configuration was written for '{c}', not '{command}'")));
        }
    }
    let def = defaults_for(command);
    let mut echo = merged.clone();
    echo.command = Some(command.to_string());
    echo.config = None;
    echo.a.get_or_insert(DEFAULT_LATTICE_CONSTANT);
    echo.neff.get_or_insert(DEFAULT_N_EFF);
    echo.n.get_or_insert_with(|| def.n.to_string());
    echo.omega.get_or_insert(def.omega);
    echo.delta.get_or_insert(0.0);
    echo.theta.get_or_insert_with(|| def.theta.to_string());
    echo.m.get_or_insert(DEFAULT_ORDER);
    echo.delta_grid.get_or_insert_with(|| "-10:10:401".to_string());
    echo.theta_grid.get_or_insert_with(|| "gb-0.05:gb+0.05:201".to_string());
    echo.policy.get_or_insert_with(|| "mb".to_string());
    echo.seed.get_or_insert(DEFAULT_SEED);
    echo.configs.get_or_insert(DEFAULT_CONFIGS);
    echo.eta.get_or_insert(DEFAULT_ETA);
    echo.format.get_or_insert_with(|| "csv".to_string());

    let coupling = if has_rate_form(&echo) {
        Coupling::new(echo.gamma_r.unwrap_or(0.0), echo.gamma_l.unwrap_or(0.0), echo.gamma_u.unwrap_or(0.0))?
    } else {
        echo.beta.get_or_insert(DEFAULT_BETA);
        echo.d.get_or_insert(1.0);
        beta_form_rates(&echo)?
    };
    if has_rate_form(&echo) {
        echo.gamma_r = Some(coupling.gamma_r);
        echo.gamma_l = Some(coupling.gamma_l);
        echo.gamma_u = Some(coupling.gamma_u);
    }

    let default_tier = if coupling.is_unidirectional() { "closed" } else { "linear" };
    echo.tier.get_or_insert_with(|| default_tier.to_string());

    let n_list = parse_n_list(echo.n.as_deref().unwrap_or_default())?;
    let theta = ThetaSpec::parse(echo.theta.as_deref().unwrap_or_default())?;
    let m = echo.m.unwrap_or(DEFAULT_ORDER);
    let base = ModelParams::filled(n_list[0], echo.a.unwrap_or_default(), echo.neff.unwrap_or_default(), coupling)?;
    let delta = echo.delta.unwrap_or_default();
    // θ itself is resolved per command; π/2 is a placeholder.
    let params = base.with_drive(echo.omega.unwrap_or_default(), delta, std::f64::consts::FRAC_PI_2)?;
    let tier = echo.tier.as_deref().unwrap_or_default().parse::<Tier>().map_err(CliError::from)?;
    let format = match echo.format.as_deref() {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        other => return Err(CliError::Usage(format!("unknown format '{}'", other.unwrap_or_default()))),
    };
    let policy = echo.policy.clone().unwrap_or_default();
    if !matches!(policy.as_str(), "gb" | "mb" | "fixed") {
        return Err(CliError::Usage(format!("unknown policy '{policy}': expected gb, mb or fixed")));
    }
    let eta = echo.eta.unwrap_or_default();
    let betas = echo.betas.as_deref().map(parse_float_list).transpose()?;
    // Validate the grids early so bad input fails before any work.
    parse_grid(echo.delta_grid.as_deref().unwrap_or_default())?;
    parse_grid_with(echo.theta_grid.as_deref().unwrap_or_default(), ThetaSpec::parse)?;
    if let Some(0) = merged.threads {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }

    Ok(Resolved {
        command: command.to_string(),
        params,
        n_list,
        theta,
        m,
        tier,
        delta_grid: echo.delta_grid.clone().unwrap_or_default(),
        theta_grid: echo.theta_grid.clone().unwrap_or_default(),
        policy,
        seed: echo.seed.unwrap_or_default(),
        configs: echo.configs.unwrap_or_default(),
        eta,
        betas,
        format,
        output: merged.output.clone(),
        threads: merged.threads,
        echo,
    })
}

/// Reads the file named by `--config` (if any) and merges the flags over it.
pub fn load_and_merge(flags: &RunConfig) -> CliResult<RunConfig> {
    let file = match &flags.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    merge(&file, flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("144").unwrap(), vec![144]);
        assert_eq!(parse_n_list("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_n_list("50:80:10").unwrap(), vec![50, 60, 70, 80]);
        assert_eq!(parse_n_list("50:85:10").unwrap(), vec![50, 60, 70, 80]);
        for bad in ["", "0", "5:1:1", "1:5:0", "x", "1:2"] {
            assert!(parse_n_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("2:3:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn theta_tokens() {
        assert_eq!(ThetaSpec::parse("0.5").unwrap(), ThetaSpec::Radians(0.5));
        assert_eq!(ThetaSpec::parse("gb").unwrap(), ThetaSpec::Gb(0.0));
        assert_eq!(ThetaSpec::parse("gb+0.004").unwrap(), ThetaSpec::Gb(0.004));
        assert_eq!(ThetaSpec::parse("gb-0.25").unwrap(), ThetaSpec::Gb(-0.25));
        assert_eq!(ThetaSpec::parse("mb").unwrap(), ThetaSpec::Mb);
        assert!(ThetaSpec::parse("gb*2").is_err());
        assert!(ThetaSpec::parse("north").is_err());
    }

    #[test]
    fn empty_file_uses_flags() {
        let flags = RunConfig { beta: Some(0.2), d: Some(0.5), n: Some("12".into()), ..Default::default() };
        let merged = merge(&RunConfig::default(), &flags).unwrap();
        let r = resolve("spectrum", &merged).unwrap();
        assert_eq!(r.n_list, vec![12]);
        assert!((r.params.beta() - 0.2).abs() < 1e-15);
        assert!((r.params.directionality() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rate_flag_overrides_beta_file() {
        let file = RunConfig { beta: Some(0.2), d: Some(1.0), ..Default::default() };
        // γ_R = 0.2, γ_L = 0, γ_u = 0.8 from the file; the override breaks
        // normalization and must be rejected.
        let flags = RunConfig { gamma_u: Some(0.7), ..Default::default() };
        let merged = merge(&file, &flags).unwrap();
        assert_eq!(merged.gamma_u, Some(0.7));
        assert!(resolve("spectrum", &merged).is_err());
        let flags = RunConfig { gamma_u: Some(0.7), gamma_l: Some(0.1), ..Default::default() };
        let r = resolve("spectrum", &merge(&file, &flags).unwrap()).unwrap();
        assert!((r.params.coupling().gamma_l - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mixed_forms_rejected() {
        let mixed = RunConfig { beta: Some(0.2), gamma_r: Some(0.1), ..Default::default() };
        assert!(merge(&mixed, &RunConfig::default()).is_err());
        assert!(merge(&RunConfig::default(), &mixed).is_err());
    }

    #[test]
    fn toml_accepts_numbers_for_text_fields() {
        let c: RunConfig = toml::from_str("n = 144\ntheta = 0.5\nbetas = [0.05, 0.9]\n").unwrap();
        assert_eq!(c.n.as_deref(), Some("144"));
        assert_eq!(c.theta.as_deref(), Some("0.5"));
        assert_eq!(c.betas.as_deref(), Some("0.05,0.9"));
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let flags = RunConfig { n: Some("7".into()), theta: Some("gb+0.01".into()), ..Default::default() };
        let r = resolve("spectrum", &merge(&RunConfig::default(), &flags).unwrap()).unwrap();
        let json = serde_json::to_string(&r.echo).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        let again = resolve("spectrum", &back).unwrap();
        assert_eq!(again.echo, r.echo);
        assert_eq!(again.params, r.params);
    }
}
