use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Values a JSON config file may supply. Command-line flags take precedence.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub pcc: Option<String>,
    pub n_range: Option<String>,
    pub k: Option<usize>,
    pub k_values: Option<String>,
    pub n_bits: Option<u32>,
    pub n_bits_values: Option<String>,
    pub channels: Option<String>,
    pub profiles: Option<Vec<PathBuf>>,
    pub model: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub limit: Option<usize>,
    pub bandwidth: Option<f64>,
    pub source: Option<String>,
    pub b2s: Option<String>,
    pub readout: Option<String>,
    /// LFSR polynomial overrides: width -> exponents of the nonzero terms.
    pub lfsr_taps: Option<BTreeMap<u32, Vec<u32>>>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// `8`, `3-10`, `3..10` (inclusive) or comma-separated mixes of those.
pub fn parse_list<T>(s: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr + TryFrom<u64>,
{
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().with_context(|| format!("bad range start in `{part}`"))?;
                let b: u64 =
                    b.trim().trim_start_matches('=').parse().with_context(|| format!("bad range end in `{part}`"))?;
                if a > b {
                    bail!("empty range `{part}`");
                }
                for v in a..=b {
                    out.push(T::try_from(v).map_err(|_| anyhow::anyhow!("{v} out of range"))?);
                }
            }
            None => out.push(part.parse().map_err(|_| anyhow::anyhow!("bad value `{part}`"))?),
        }
    }
    if out.is_empty() {
        bail!("empty list `{s}`");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u32>("3..10").unwrap(), (3..=10).collect::<Vec<_>>());
        assert_eq!(parse_list::<u32>("3-5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_list::<u64>("8,16, 32").unwrap(), vec![8, 16, 32]);
        assert_eq!(parse_list::<u32>("1,4-5").unwrap(), vec![1, 4, 5]);
        assert!(parse_list::<u32>("5-3").is_err());
        assert!(parse_list::<u32>("x").is_err());
        assert!(parse_list::<u32>("").is_err());
    }
}
