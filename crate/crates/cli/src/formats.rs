//! Input file parsing: coefficient maps and grid specifications.

use anyhow::{bail, Context, Result};
use nlslab_core::{CoefficientState, C64};
use std::collections::BTreeMap;
use std::path::Path;

/// JSON map `"k" -> [re, im]`.
pub fn load_coeff_map(path: &Path) -> Result<BTreeMap<i64, C64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let repr: BTreeMap<i64, [f64; 2]> = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a JSON map k -> [re, im]", path.display()))?;
    Ok(repr
        .into_iter()
        .map(|(k, [re, im])| (k, C64::new(re, im)))
        .collect())
}

/// Either a full serialized state (`{tau, mode, coeffs}`) or a bare
/// coefficient map.
pub enum StateFile {
    State(CoefficientState),
    Map(BTreeMap<i64, C64>),
}

pub fn load_state_file(path: &Path) -> Result<StateFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not JSON", path.display()))?;
    if value.get("tau").is_some() {
        let state: CoefficientState = serde_json::from_value(value)
            .with_context(|| format!("{} is not a valid state file", path.display()))?;
        Ok(StateFile::State(state))
    } else {
        let repr: BTreeMap<i64, [f64; 2]> = serde_json::from_value(value)
            .with_context(|| format!("{} is not a coefficient map", path.display()))?;
        Ok(StateFile::Map(
            repr.into_iter()
                .map(|(k, [re, im])| (k, C64::new(re, im)))
                .collect(),
        ))
    }
}

/// `x0:x1:n` with `n >= 2`; points are `x0 + i (x1 - x0)/(n-1)`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must look like x0:x1:n, got {spec:?}");
    }
    let x0: f64 = parts[0].parse().context("grid x0")?;
    let x1: f64 = parts[1].parse().context("grid x1")?;
    let n: usize = parts[2].parse().context("grid n")?;
    if n < 2 || !(x1 > x0) {
        bail!("grid needs n >= 2 and x1 > x0");
    }
    let h = (x1 - x0) / (n - 1) as f64;
    Ok((0..n).map(|i| x0 + h * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-1:1:5").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[4], 1.0);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("1:0:5").is_err());
        assert!(parse_grid("0:1:1").is_err());
    }
}
