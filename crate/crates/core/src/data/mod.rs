//! Dataset representation and the split/shuffle protocol.
//!
//! A [`Dataset`] holds an `N × d` feature matrix whose last column is the
//! constant bias feature, `±1` labels, and a binary sensitive attribute that is
//! never part of the features.

mod csv;

pub use self::csv::{load_csv, write_csv, CsvSchema, LabelColumn, MissingPolicy, SensitiveColumn};

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BIAS_NAME: &str = "bias";

/// Value of the binary sensitive attribute. `z = 0` is the protected group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    Protected,
    NonProtected,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Protected, Group::NonProtected];

    pub fn value(self) -> u8 {
        match self {
            Group::Protected => 0,
            Group::NonProtected => 1,
        }
    }

    pub fn from_value(z: u8) -> Option<Group> {
        match z {
            0 => Some(Group::Protected),
            1 => Some(Group::NonProtected),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self.value() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<i8>,
    sensitive: Vec<u8>,
    name: String,
    feature_names: Vec<String>,
    /// Feature columns eligible for standardisation (never includes the bias).
    numeric: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset from raw features; the bias column is appended here.
    /// All raw columns are treated as numeric.
    pub fn new(
        raw_features: Array2<f64>,
        labels: Vec<i8>,
        sensitive: Vec<u8>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let names = (1..=raw_features.ncols()).map(|j| format!("x{j}")).collect();
        let numeric = (0..raw_features.ncols()).collect();
        Self::with_columns(raw_features, labels, sensitive, name, names, numeric)
    }

    /// Like [`Dataset::new`] with explicit feature names (excluding the bias)
    /// and the indices of standardisable columns.
    pub fn with_columns(
        raw_features: Array2<f64>,
        labels: Vec<i8>,
        sensitive: Vec<u8>,
        name: impl Into<String>,
        mut feature_names: Vec<String>,
        numeric: Vec<usize>,
    ) -> Result<Self> {
        let n = raw_features.nrows();
        let raw_width = raw_features.ncols();
        if feature_names.len() != raw_width {
            return Err(Error::DimensionMismatch {
                expected: raw_width,
                got: feature_names.len(),
            });
        }
        if numeric.iter().any(|&j| j >= raw_width) {
            return Err(Error::InvalidDataset("numeric column index out of range".into()));
        }
        let mut features = Array2::ones((n, raw_width + 1));
        features.slice_mut(ndarray::s![.., ..raw_width]).assign(&raw_features);
        feature_names.push(BIAS_NAME.to_string());
        let ds = Dataset {
            features,
            labels,
            sensitive,
            name: name.into(),
            feature_names,
            numeric,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let n = self.features.nrows();
        if self.labels.len() != n || self.sensitive.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows, {} labels, {} sensitive values",
                n,
                self.labels.len(),
                self.sensitive.len()
            )));
        }
        if let Some(y) = self.labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidDataset(format!("label {y} is not ±1")));
        }
        if let Some(z) = self.sensitive.iter().find(|&&z| z > 1) {
            return Err(Error::InvalidDataset(format!("sensitive value {z} is not 0/1")));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        let bias = self.features.column(self.width() - 1);
        if bias.iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidDataset("last column is not the bias".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature width including the bias column.
    pub fn width(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn sensitive(&self) -> &[u8] {
        &self.sensitive
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn numeric_columns(&self) -> &[usize] {
        &self.numeric
    }

    pub fn labels_f64(&self) -> Array1<f64> {
        self.labels.iter().map(|&y| f64::from(y)).collect()
    }

    pub fn group(&self, i: usize) -> Group {
        if self.sensitive[i] == 0 {
            Group::Protected
        } else {
            Group::NonProtected
        }
    }

    /// Row indices matching an optional group and, if `positives_only`, `y = +1`.
    pub fn rows_where(&self, group: Option<Group>, positives_only: bool) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| group.is_none_or(|g| self.sensitive[i] == g.value()))
            .filter(|&i| !positives_only || self.labels[i] == 1)
            .collect()
    }

    pub fn count(&self, group: Option<Group>, positives_only: bool) -> usize {
        self.rows_where(group, positives_only).len()
    }

    /// A new dataset made of the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            sensitive: rows.iter().map(|&i| self.sensitive[i]).collect(),
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            numeric: self.numeric.clone(),
        }
    }

    /// Column statistics (population mean and standard deviation) of the numeric columns.
    pub fn numeric_stats(&self) -> Result<Standardizer> {
        let mut columns = Vec::with_capacity(self.numeric.len());
        for &j in &self.numeric {
            let col = self.features.column(j);
            let n = col.len() as f64;
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            if !(var > 0.0) {
                return Err(Error::ConstantColumn(self.feature_names[j].clone()));
            }
            columns.push((j, mean, var.sqrt()));
        }
        Ok(Standardizer { columns })
    }

    /// Standardises numeric columns in place with this dataset's own statistics.
    pub fn standardize(&mut self) -> Result<Standardizer> {
        let stats = self.numeric_stats()?;
        stats.apply(self);
        Ok(stats)
    }
}

/// Per-column affine map `(v - mean) / std` for the numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    columns: Vec<(usize, f64, f64)>,
}

impl Standardizer {
    pub fn apply(&self, ds: &mut Dataset) {
        for &(j, mean, std) in &self.columns {
            ds.features.column_mut(j).mapv_inplace(|v| (v - mean) / std);
        }
    }
}

/// Where numeric standardisation statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Standardization {
    /// Statistics of the full loaded dataset, applied at load time.
    #[default]
    Full,
    /// Statistics of the training split only, applied after splitting.
    TrainSplit,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction_of_train: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec {
            seed,
            ..Default::default()
        }
    }

    /// `(train, val, test)` sizes for `n` rows.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        for (name, f) in [
            ("train_fraction", self.train_fraction),
            ("val_fraction_of_train", self.val_fraction_of_train),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} = {f} not in (0, 1)")));
            }
        }
        if n < 10 {
            return Err(Error::TooSmall(format!("{n} rows, need at least 10 to split")));
        }
        let fit = (self.train_fraction * n as f64).round() as usize;
        let test = n - fit;
        let val = (self.val_fraction_of_train * fit as f64).round() as usize;
        let train = fit - val;
        if train == 0 || val == 0 || test == 0 {
            return Err(Error::TooSmall(format!(
                "{n} rows give an empty split ({train}/{val}/{test})"
            )));
        }
        Ok((train, val, test))
    }

    /// Row indices of each split after a seeded permutation.
    pub fn partition(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
        let (train, val, _) = self.sizes(n)?;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        let test = perm.split_off(train + val);
        let val = perm.split_off(train);
        Ok((perm, val, test))
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            val_fraction_of_train: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

/// Seeded train/validation/test split: test is the last 30% of a random
/// permutation, validation the last 30% of the remainder.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<Splits> {
    let (train, val, test) = spec.partition(ds.len())?;
    Ok(Splits {
        train: ds.subset(&train),
        val: ds.subset(&val),
        test: ds.subset(&test),
    })
}

impl Splits {
    /// Standardises all three splits with the training split's statistics.
    pub fn standardize_from_train(&mut self) -> Result<()> {
        let stats = self.train.standardize()?;
        stats.apply(&mut self.val);
        stats.apply(&mut self.test);
        Ok(())
    }
}

/// Downsamples the majority class uniformly at random to the minority count.
/// Selected rows keep their original relative order.
pub fn balance_classes(ds: &Dataset, seed: u64) -> Result<Dataset> {
    let pos = ds.rows_where(None, true);
    let neg: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels[i] == -1).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::EmptySubset("balancing needs both classes".into()));
    }
    if pos.len() == neg.len() {
        return Ok(ds.clone());
    }
    let (major, minor) = if pos.len() > neg.len() { (pos, neg) } else { (neg, pos) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = index::sample(&mut rng, major.len(), minor.len())
        .into_iter()
        .map(|k| major[k])
        .chain(minor)
        .collect();
    keep.sort_unstable();
    Ok(ds.subset(&keep))
}
