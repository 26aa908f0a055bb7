//! Run configuration: a TOML file with per-command blocks, every field
//! overridable from the command line.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Deserialize;
use std::path::Path;

/// Parses `re`, `re,im` or `re+imi`-style complex literals.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t = text.trim();
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex64::new(
            re.trim().parse::<f64>().context("bad real part")?,
            im.trim().parse::<f64>().context("bad imaginary part")?,
        ));
    }
    Ok(Complex64::new(
        t.parse::<f64>().context("bad real number")?,
        0.0,
    ))
}

#[derive(Debug, Clone, Deserialize, Default)]
pub struct FileConfig {
    pub rho: Option<toml::Value>,
    #[serde(default)]
    pub render: RenderBlock,
    #[serde(default)]
    pub trace: TraceBlock,
    #[serde(default)]
    pub solve: SolveBlock,
    #[serde(default)]
    pub classify: ClassifyBlock,
}

#[derive(Debug, Clone, Deserialize, Default)]
pub struct RenderBlock {
    /// `[re_min, re_max, im_min, im_max]`
    pub window: Option<[f64; 4]>,
    /// `[width, height]`
    pub size: Option<[usize; 2]>,
    pub max_iter: Option<usize>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
pub struct TraceBlock {
    pub word: Option<String>,
    pub samples_per_branch: Option<usize>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
pub struct SolveBlock {
    pub kind: Option<String>,
    #[serde(default)]
    pub words: Vec<String>,
    pub seed: Option<[f64; 2]>,
    pub seed_z: Option<[f64; 2]>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
pub struct ClassifyBlock {
    pub lambda: Option<[f64; 2]>,
    pub max_iter: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn rho(&self) -> Result<Option<Complex64>> {
        match &self.rho {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(Complex64::new(*x, 0.0))),
            Some(toml::Value::Integer(x)) => Ok(Some(Complex64::new(*x as f64, 0.0))),
            Some(toml::Value::String(s)) => Ok(Some(parse_complex(s)?)),
            Some(toml::Value::Array(a)) => {
                let nums: Vec<f64> = a
                    .iter()
                    .map(|v| {
                        v.as_float()
                            .or_else(|| v.as_integer().map(|i| i as f64))
                            .context("rho array entries must be numbers")
                    })
                    .collect::<Result<_>>()?;
                match nums.as_slice() {
                    [re] => Ok(Some(Complex64::new(*re, 0.0))),
                    [re, im] => Ok(Some(Complex64::new(*re, *im))),
                    _ => bail!("rho array must have one or two entries"),
                }
            }
            Some(other) => bail!("unsupported rho value: {other}"),
        }
    }
}
