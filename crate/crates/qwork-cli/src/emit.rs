use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the config file bytes, hex-encoded.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// 17 significant digits, locale-free, bit-stable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a CSV with the provenance header comment. Rows are written in the
/// order given; all numbers at full precision; LF line endings.
pub fn write_csv(
    path: &Path,
    hash: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = Vec::new();
    writeln!(out, "# config_hash={hash} tool_version={TOOL_VERSION}")?;
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
