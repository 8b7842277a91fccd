//! Run configuration file loading. The file is TOML with sections
//! mirroring `RunConfig`; see the README for the schema.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bar::BarConfig;
use crate::cost::PriceSheet;
use crate::engine::{ProblemConfig, RunConfig};
use crate::stats::HistogramSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    campaign: CampaignSection,
    problem: ProblemSection,
    #[serde(default)]
    histogram: Option<HistogramSpec>,
    #[serde(default)]
    prices: PriceSheet,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CampaignSection {
    n_mc: u64,
    n_serial: u64,
    #[serde(default = "default_workers")]
    n_workers: u64,
    #[serde(default)]
    base_seed: u64,
    #[serde(default = "default_lease_ms")]
    lease_duration_ms: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn default_workers() -> u64 {
    1
}

fn default_lease_ms() -> u64 {
    30_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ProblemSection {
    ToyDigitSquare {
        #[serde(default)]
        busy_work_iters: u64,
    },
    Bar(Box<BarConfig>),
}

/// Parsed campaign plus the pricing model used for the cost report.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub run: RunConfig,
    pub prices: PriceSheet,
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|e| match e {
        ConfigError::Parse { source, .. } => ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn parse(text: &str) -> Result<LoadedConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|source| ConfigError::Parse {
        path: PathBuf::new(),
        source: Box::new(source),
    })?;
    let problem = match file.problem {
        ProblemSection::ToyDigitSquare { busy_work_iters } => {
            ProblemConfig::ToyDigitSquare { busy_work_iters }
        }
        ProblemSection::Bar(bar) => ProblemConfig::Bar(*bar),
    };
    let run = RunConfig {
        n_mc: file.campaign.n_mc,
        n_serial: file.campaign.n_serial,
        n_workers: file.campaign.n_workers,
        base_seed: file.campaign.base_seed,
        lease_duration_ms: file.campaign.lease_duration_ms,
        problem,
        histogram_spec: file.histogram.unwrap_or_else(HistogramSpec::normalized_default),
        output_dir: file.campaign.output_dir,
    };
    run.validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(LoadedConfig {
        run,
        prices: file.prices,
    })
}
