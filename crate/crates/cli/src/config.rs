//! Key-value configuration file with one section per command; every CLI
//! flag overrides its config key.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub screen: ScreenSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub assemble: AssembleSection,
    #[serde(default, rename = "sweep-threshold")]
    pub sweep_threshold: SweepSection,
    #[serde(default)]
    pub evaluate: EvaluateSection,
    #[serde(default)]
    pub diagnose: DiagnoseSection,
    #[serde(default)]
    pub tune: TuneSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub t_len: Option<usize>,
    pub n_per_time: Option<usize>,
    pub nodes_per_archetype: Option<usize>,
    pub noise_sd: Option<f64>,
    pub chain_len: Option<usize>,
    pub thin: Option<usize>,
    pub keep: Option<usize>,
    pub omega: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenSection {
    pub input: Option<String>,
    pub output_dir: Option<String>,
    pub screen_budget: Option<String>,
    pub targets: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub input: Option<String>,
    pub output_dir: Option<String>,
    pub lambda: Option<f64>,
    pub k: Option<f64>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub targets: Option<String>,
    pub screen_budget: Option<String>,
    pub screen_file: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssembleSection {
    pub input: Option<String>,
    pub output_dir: Option<String>,
    pub phi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub input: Option<String>,
    pub output_dir: Option<String>,
    pub phi_grid: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub input: Option<String>,
    pub truth: Option<String>,
    pub output_dir: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSection {
    pub input: Option<String>,
    pub output_dir: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneSection {
    pub input: Option<String>,
    pub output_dir: Option<String>,
    pub lambda_grid: Option<String>,
    pub k_grid: Option<String>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    pub targets: Option<String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config file {}", p.display()))
            }
        }
    }
}
