use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{balance_classes, load_csv, CsvSchema, Dataset, SplitSpec, Standardization};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::metrics::BenefitKind;
use crate::solver::SolveOptions;
use crate::synthgen::{gen_eop_dataset_with, gen_sp_dataset, EopMixture, SynthConfig, DEFAULT_PHI};
use crate::trainer::{GammaGrid, LambdaGrid, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixtureChoice {
    #[default]
    Calibrated,
    Listed,
}

impl MixtureChoice {
    pub fn mixture(self) -> EopMixture {
        match self {
            MixtureChoice::Calibrated => EopMixture::calibrated(),
            MixtureChoice::Listed => EopMixture::listed(),
        }
    }
}

fn sp_n() -> usize {
    6000
}

fn eop_n() -> usize {
    16000
}

fn default_phi() -> f64 {
    DEFAULT_PHI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSource {
    SyntheticSp {
        #[serde(default = "sp_n")]
        n: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_phi")]
        phi: f64,
    },
    SyntheticEop {
        #[serde(default = "eop_n")]
        n: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        mixture: MixtureChoice,
    },
    Csv {
        path: PathBuf,
        schema: PathBuf,
        /// Downsample the majority class before splitting.
        #[serde(default)]
        balance_classes: bool,
        #[serde(default)]
        balance_seed: u64,
    },
}

/// A dataset ready for the protocol, plus how its splits are standardised.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub standardize: Standardization,
}

impl DataSource {
    pub fn default_kind(&self) -> Option<BenefitKind> {
        match self {
            DataSource::SyntheticSp { .. } => Some(BenefitKind::AcceptanceRate),
            DataSource::SyntheticEop { .. } => Some(BenefitKind::TruePositiveRate),
            DataSource::Csv { .. } => None,
        }
    }

    pub fn load(&self) -> Result<LoadedData> {
        match self {
            DataSource::SyntheticSp { n, seed, phi } => Ok(LoadedData {
                dataset: gen_sp_dataset(&SynthConfig {
                    n: *n,
                    seed: *seed,
                    phi: *phi,
                })?,
                standardize: Standardization::Off,
            }),
            DataSource::SyntheticEop { n, seed, mixture } => Ok(LoadedData {
                dataset: gen_eop_dataset_with(&SynthConfig::new(*n, *seed), &mixture.mixture())?,
                standardize: Standardization::Off,
            }),
            DataSource::Csv {
                path,
                schema,
                balance_classes: balance,
                balance_seed,
            } => {
                let schema = CsvSchema::from_toml_file(schema)?;
                let mut dataset = load_csv(path, &schema)?;
                if *balance {
                    dataset = balance_classes(&dataset, *balance_seed)?;
                }
                Ok(LoadedData {
                    dataset,
                    standardize: schema.standardize,
                })
            }
        }
    }

    fn resolve(&mut self, base: &Path) {
        if let DataSource::Csv { path, schema, .. } = self {
            *path = base.join(&*path);
            *schema = base.join(&*schema);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitFractions {
    pub train_fraction: f64,
    pub val_fraction_of_train: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        let s = SplitSpec::default();
        SplitFractions {
            train_fraction: s.train_fraction,
            val_fraction_of_train: s.val_fraction_of_train,
        }
    }
}

impl SplitFractions {
    pub fn with_seed(self, seed: u64) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            val_fraction_of_train: self.val_fraction_of_train,
            seed,
        }
    }
}

pub const DEFAULT_M_VALUES: [f64; 8] = [1.0, 0.8, 0.6, 0.4, 0.2, 0.1, 0.05, 0.0];

fn default_m_values() -> Vec<f64> {
    DEFAULT_M_VALUES.to_vec()
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Everything needed to reproduce one sweep. Relative paths in a config file
/// are taken relative to the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DataSource,
    /// Defaults to acceptance rate for the SP generator and true positive
    /// rate for the EOP generator; required for CSV data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<BenefitKind>,
    #[serde(default = "default_m_values")]
    pub m_values: Vec<f64>,
    /// One shuffle of the data per seed.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub split: SplitFractions,
    #[serde(default)]
    pub lambda_grid: LambdaGrid,
    #[serde(default)]
    pub gamma_grid: GammaGrid,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub strict_gain: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Also write every trained θ under `output_dir/models`.
    #[serde(default)]
    pub write_models: bool,
}

impl ExperimentConfig {
    pub fn new(dataset: DataSource) -> Self {
        ExperimentConfig {
            dataset,
            kind: None,
            m_values: default_m_values(),
            seeds: default_seeds(),
            split: SplitFractions::default(),
            lambda_grid: LambdaGrid::default(),
            gamma_grid: GammaGrid::default(),
            solver: SolveOptions::default(),
            execution: Execution::default(),
            strict_gain: false,
            output_dir: default_output_dir(),
            write_models: false,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.dataset.resolve(base);
        cfg.output_dir = base.join(&cfg.output_dir);
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn kind(&self) -> Result<BenefitKind> {
        self.kind
            .or_else(|| self.dataset.default_kind())
            .ok_or_else(|| Error::Config("`kind` is required for csv data".into()))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            solve: self.solver,
            execution: self.execution,
            strict_gain: self.strict_gain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.kind()?;
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.m_values.is_empty() {
            return bad("m_values is empty".into());
        }
        if let Some(m) = self.m_values.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return bad(format!("m value {m} outside [0, 1]"));
        }
        if self.m_values.windows(2).any(|w| w[0] <= w[1]) {
            return bad("m_values must be strictly descending".into());
        }
        LambdaGrid::new(self.lambda_grid.values().to_vec()).map_err(|e| Error::Config(e.to_string()))?;
        GammaGrid::new(self.gamma_grid.values().to_vec()).map_err(|e| Error::Config(e.to_string()))?;
        self.solver.validate().map_err(|e| Error::Config(e.to_string()))?;
        for f in [self.split.train_fraction, self.split.val_fraction_of_train] {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("split fraction {f} not in (0, 1)"));
            }
        }
        match &self.dataset {
            DataSource::SyntheticSp { n: 0, .. } | DataSource::SyntheticEop { n: 0, .. } => {
                bad("synthetic n must be positive".into())
            }
            DataSource::SyntheticSp { phi, .. } if !phi.is_finite() => bad("phi must be finite".into()),
            _ => Ok(()),
        }
    }
}
