//! Deterministic output plumbing: metadata headers, 17-significant-digit
//! floats, and file/stdout writers.
//!
//! Outputs carry no timestamps, so identical invocations are byte-identical.

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Provenance recorded at the top of every artifact.
pub struct RunMeta {
    pub command: &'static str,
    /// Canonical JSON of the effective parameters.
    pub params: serde_json::Value,
    pub seed: Option<u64>,
}

impl RunMeta {
    pub fn new(command: &'static str, params: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command,
            params,
            seed,
        }
    }

    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.command.as_bytes());
        hasher.update(b"\n");
        hasher.update(self.params.to_string().as_bytes());
        hasher.update(b"\n");
        if let Some(seed) = self.seed {
            hasher.update(seed.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }

    /// `#`-prefixed header lines for CSV artifacts.
    pub fn csv_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# nlslab {} v{}", self.command, env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# config: {}", self.params);
        let _ = writeln!(s, "# config_sha256: {}", self.config_hash());
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        s
    }

    /// Metadata object embedded in JSON artifacts.
    pub fn json_meta(&self) -> serde_json::Value {
        let mut meta = serde_json::json!({
            "tool": format!("nlslab v{}", env!("CARGO_PKG_VERSION")),
            "command": self.command,
            "config": self.params,
            "config_sha256": self.config_hash(),
        });
        if let Some(seed) = self.seed {
            meta["seed"] = serde_json::json!(seed);
        }
        meta
    }
}

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(meta: &RunMeta, extra_header_lines: &[String], columns: &[&str]) -> Self {
        let mut text = meta.csv_header();
        for line in extra_header_lines {
            let _ = writeln!(text, "# {line}");
        }
        let _ = writeln!(text, "{}", columns.join(","));
        Self { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    /// Row with preformatted cells (empty strings for inapplicable fields).
    pub fn row_cells(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn print_stdout(contents: &str) -> Result<()> {
    std::io::stdout()
        .write_all(contents.as_bytes())
        .context("writing to stdout")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [
            0.1,
            -3.0e-17,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            -0.0,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn hash_is_stable_and_input_sensitive() {
        let a = RunMeta::new("gauss", serde_json::json!({"p": 1}), None);
        let b = RunMeta::new("gauss", serde_json::json!({"p": 1}), None);
        let c = RunMeta::new("gauss", serde_json::json!({"p": 2}), None);
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }
}
