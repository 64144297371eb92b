//! CSV and JSON emission.
//!
//! CSV files start with `#` metadata lines followed by a header row. Numbers
//! are written with 17 significant digits so every double round-trips.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use bragg_core::experiments::{MetaValue, ScanResult};
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn metadata(result: &ScanResult, command: &str) -> Map<String, Value> {
    let p = &result.params;
    let c = p.coupling();
    let mut meta = Map::new();
    meta.insert("command".into(), json!(command));
    meta.insert("version".into(), json!(result.provenance.version));
    meta.insert("seed".into(), json!(result.provenance.seed));
    meta.insert("tier".into(), json!(result.tier.as_str()));
    meta.insert(
        "params".into(),
        json!({
            "a": p.a(),
            "n_eff": p.n_eff(),
            "n_atoms": p.n_atoms(),
            "omega": p.omega(),
            "delta": p.delta(),
            "gamma_r": c.gamma_r,
            "gamma_l": c.gamma_l,
            "gamma_u": c.gamma_u,
        }),
    );
    for (k, v) in &result.metadata {
        let value = match v {
            MetaValue::Number(x) if x.is_finite() => json!(x),
            MetaValue::Number(x) => json!(x.to_string()),
            MetaValue::Text(s) => json!(s),
        };
        meta.insert(k.clone(), value);
    }
    meta
}

pub fn render_csv(result: &ScanResult, command: &str) -> String {
    let mut out = String::new();
    for (k, v) in metadata(result, command) {
        let text = match v {
            Value::String(s) => s,
            other => other.to_string(),
        };
        let _ = writeln!(out, "# {k}: {text}");
    }
    out.push_str(&result.columns().join(","));
    out.push('\n');
    for k in 0..result.len() {
        let row: Vec<String> = result.row(k).into_iter().map(fmt_num).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(result: &ScanResult, command: &str, config: &RunConfig) -> CliResult<String> {
    let rows: Vec<Vec<Value>> = (0..result.len())
        .map(|k| result.row(k).into_iter().map(|v| if v.is_finite() { json!(v) } else { Value::Null }).collect())
        .collect();
    let doc = json!({
        "metadata": metadata(result, command),
        "config": config,
        "columns": result.columns(),
        "rows": rows,
    });
    let mut text =
        serde_json::to_string_pretty(&doc).map_err(|e| CliError::Usage(format!("serializing output: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn render(result: &ScanResult, command: &str, config: &RunConfig, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(render_csv(result, command)),
        Format::Json => render_json(result, command, config),
    }
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, text: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let ctx = |what: &str| format!("{what} {}", path.display());
    fs::create_dir_all(dir).map_err(|e| CliError::io(ctx("creating directory for"), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(ctx("writing"), e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| CliError::io(ctx("writing"), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(ctx("writing"), e))?;
    tmp.persist(path).map_err(|e| CliError::io(ctx("renaming into"), e.error))?;
    Ok(())
}
