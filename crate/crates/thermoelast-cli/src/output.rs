//! Report assembly and atomic file output. Every float in CSV output is
//! printed with 17 significant digits, '.' decimal separator; report JSON
//! isolates volatile fields (timestamp, runtimes) in a `meta` object so
//! the rest is byte-reproducible for a fixed config and seed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thermoelast::report::CheckRecord;

use crate::config::Config;

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write via a temp file in the same directory, then rename into place.
pub fn atomic_write(path: &Path, contents: &str) -> Result<(), String> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .map_err(|e| format!("cannot create `{}`: {e}", tmp.display()))?;
        f.write_all(contents.as_bytes())
            .map_err(|e| format!("cannot write `{}`: {e}", tmp.display()))?;
    }
    std::fs::rename(&tmp, path)
        .map_err(|e| format!("cannot move into place `{}`: {e}", path.display()))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), String> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| fmt_float(*x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    atomic_write(path, &out)
}

#[derive(Serialize)]
pub struct Meta {
    pub timestamp_unix: f64,
    pub runtimes_s: BTreeMap<String, f64>,
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a Config,
    pub checks: Vec<CheckRecord>,
    pub aggregate_pass: bool,
    pub meta: Meta,
}

pub fn build_report<'a>(
    command: &'a str,
    config: &'a Config,
    checks: Vec<CheckRecord>,
    runtimes: BTreeMap<String, f64>,
) -> Report<'a> {
    let aggregate_pass = checks.iter().all(|c| c.is_pass());
    Report {
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        checks,
        aggregate_pass,
        meta: Meta {
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            runtimes_s: runtimes,
        },
    }
}

pub fn write_report(dir: &Path, report: &Report) -> Result<PathBuf, String> {
    let path = dir.join("report.json");
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    atomic_write(&path, &text)?;
    Ok(path)
}

pub fn ensure_out_dir(config: &Config, flag: Option<&str>) -> Result<PathBuf, String> {
    let dir = PathBuf::from(flag.unwrap_or(&config.out_dir));
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create `{}`: {e}", dir.display()))?;
    Ok(dir)
}
