//! Experiment configuration: TOML files with strict key checking.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use invertor_core::{KernelConfig, MethodSpec, Norm, ResampleScheme, SiteMode};

/// Which simulator the experiment inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatorKind {
    Lobe,
    Oracle,
}

impl SimulatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            SimulatorKind::Lobe => "lobe",
            SimulatorKind::Oracle => "oracle",
        }
    }
}

fn default_parallel() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_grid_cells() -> usize {
    64
}

fn default_sample_spacing() -> f64 {
    0.05
}

fn default_porosity_span() -> f64 {
    0.3
}

/// One experiment: a simulator, a method, and the run protocol.
///
/// Unknown keys are rejected with the offending key named.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub simulator: SimulatorKind,
    pub method: MethodSpec,
    pub gamma: f64,
    /// Number of sequential steps `T`.
    pub horizon: usize,
    /// Independent chains; chain `k` is seeded with `base_seed + k`.
    pub runs: usize,
    pub base_seed: u64,
    pub data_path: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_parallel")]
    pub parallel_chains: usize,
    /// MH proposal granularity.
    #[serde(default)]
    pub site_mode: SiteMode,
    /// Resampling scheme for conditional SMC.
    #[serde(default)]
    pub resampling: ResampleScheme,
    /// Lobe runs only: penalize final column-top mismatch per well.
    #[serde(default = "default_true")]
    pub terminal_penalty: bool,
    /// Lobe runs only: per-well segment norm.
    #[serde(default)]
    pub segment_norm: Norm,
    #[serde(default = "default_grid_cells")]
    pub grid_cells: usize,
    #[serde(default = "default_sample_spacing")]
    pub sample_spacing_m: f64,
    #[serde(default = "default_porosity_span")]
    pub porosity_span: f64,
    #[serde(default)]
    pub lamination_wavelength_m: f64,
}

impl ExperimentConfig {
    /// Check every invariant that can be checked without loading data.
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            bail!("runs must be >= 1");
        }
        if self.horizon == 0 {
            bail!("horizon must be >= 1");
        }
        if self.parallel_chains == 0 {
            bail!("parallel_chains must be >= 1");
        }
        KernelConfig::new(self.gamma).context("invalid gamma")?;
        self.method.validate().context("invalid method")?;
        if !self.data_path.exists() {
            bail!("data_path does not exist: {}", self.data_path.display());
        }
        Ok(())
    }

    pub fn kernel(&self) -> KernelConfig {
        KernelConfig::new(self.gamma).expect("validated gamma")
    }
}

/// Parse and validate a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut config: ExperimentConfig = toml::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    // Paths in the config are relative to the config file's directory.
    if let Some(dir) = path.parent() {
        if config.data_path.is_relative() {
            config.data_path = dir.join(&config.data_path);
        }
        if config.output_dir.is_relative() {
            config.output_dir = dir.join(&config.output_dir);
        }
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("exp.toml");
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    fn base_config(dir: &Path) -> String {
        // A data file that exists.
        let data = dir.join("targets.csv");
        fs::write(&data, "step,target\n1,0.1\n2,0.2\n3,0.3\n").unwrap();
        format!(
            r#"
simulator = "oracle"
gamma = 1.0
horizon = 3
runs = 30
base_seed = 42
data_path = "targets.csv"
output_dir = "out"

[method]
kind = "mh"
iterations = 500
"#
        )
    }

    #[test]
    fn parses_reference_mh_protocol() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), &base_config(dir.path()));
        let config = parse_config(&path).unwrap();
        assert_eq!(config.runs, 30);
        assert_eq!(config.gamma, 1.0);
        assert_eq!(config.method, MethodSpec::Mh { iterations: 500 });
        assert_eq!(config.method.kind_name(), "mh");
    }

    #[test]
    fn rejects_zero_runs() {
        let dir = tempfile::tempdir().unwrap();
        let body = base_config(dir.path()).replace("runs = 30", "runs = 0");
        let path = write_config(dir.path(), &body);
        let err = parse_config(&path).unwrap_err();
        assert!(format!("{err:#}").contains("runs"));
    }

    #[test]
    fn unknown_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let body = base_config(dir.path()) + "\nparticels = 10\n";
        let path = write_config(dir.path(), &body);
        let err = parse_config(&path).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("particels"), "error should name the key: {msg}");
    }

    #[test]
    fn unknown_method_kind_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let body = base_config(dir.path()).replace("kind = \"mh\"", "kind = \"annealing\"");
        let path = write_config(dir.path(), &body);
        assert!(parse_config(&path).is_err());
    }

    #[test]
    fn missing_data_path_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let body = base_config(dir.path()).replace("targets.csv", "nope.csv");
        let path = write_config(dir.path(), &body);
        let err = parse_config(&path).unwrap_err();
        assert!(format!("{err:#}").contains("nope.csv"));
    }
}
