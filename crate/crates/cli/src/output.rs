//! Artifact writing: JSON results, CSV series and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// One command's results: a JSON document plus a CSV table.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    /// Column names, with units in parentheses for numeric columns.
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip decimal (scientific outside `[1e-5, 1e16)`);
/// `inf` / `-inf` / `nan` for the non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x != 0.0 && !(1e-5..1e16).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
struct Versions {
    #[serde(rename = "boundary-lab")]
    core: &'static str,
    #[serde(rename = "boundary-lab-cli")]
    cli: &'static str,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    versions: Versions,
    command: &'a str,
    seed: u64,
    rng: &'static str,
    config: &'a Value,
    config_sha256: &'a str,
    outputs: Vec<String>,
}

/// Write to a sibling temp file, then rename over the target.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

fn csv_bytes(report: &Report, seed: u64, config_sha: &str) -> Result<Vec<u8>, CliError> {
    let mut buf = format!("# seed={seed} config_sha256={config_sha}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&report.header)?;
        for row in &report.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(csv::Error::from)?;
    }
    Ok(buf)
}

/// Write `<command>.json`, `<command>.csv` and `<command>.manifest.json` into `dir`.
pub fn write_artifacts<C: Serialize>(
    dir: &Path,
    command: &str,
    seed: u64,
    config: &C,
    report: &Report,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    // Hash the canonical form: a JSON value with sorted keys, as stored in the manifest.
    let config = serde_json::to_value(config).expect("plain data");
    let config_sha = sha256_hex(&serde_json::to_vec(&config).expect("plain data"));

    let names = [
        format!("{command}.json"),
        format!("{command}.csv"),
        format!("{command}.manifest.json"),
    ];
    let mut json = serde_json::to_vec_pretty(&report.json).expect("plain data");
    json.push(b'\n');
    let manifest = Manifest {
        tool: "boundary-lab",
        versions: Versions {
            core: boundary_lab::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        },
        command,
        seed,
        rng: boundary_lab::walk_engine::RNG_NAME,
        config: &config,
        config_sha256: &config_sha,
        outputs: names[..2].to_vec(),
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest).expect("plain data");
    manifest_bytes.push(b'\n');

    let contents = [json, csv_bytes(report, seed, &config_sha)?, manifest_bytes];
    let mut written = Vec::new();
    for (name, bytes) in names.iter().zip(&contents) {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_formatting() {
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(-2.5e-7), "-2.5e-7");
        assert_eq!(fmt_f64(std::f64::consts::LN_2), "0.6931471805599453");
    }

    #[test]
    fn artifacts_are_written_with_header_line() {
        let dir = tempfile::tempdir().unwrap();
        let report = Report {
            json: serde_json::json!({"x": 1}),
            header: vec!["x (nats)"],
            rows: vec![vec!["1".into()]],
        };
        let paths =
            write_artifacts(dir.path(), "demo", 3, &serde_json::json!({"k": 1}), &report).unwrap();
        assert_eq!(paths.len(), 3);
        let csv = fs::read_to_string(&paths[1]).unwrap();
        assert!(csv.starts_with("# seed=3 config_sha256="));
        assert!(csv.ends_with("x (nats)\n1\n"));
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .file_name()
                    .to_string_lossy()
                    .starts_with('.')
            })
            .collect();
        assert!(leftovers.is_empty());
    }
}
