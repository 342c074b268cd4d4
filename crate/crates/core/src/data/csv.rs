use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Dataset, Standardization};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelColumn {
    pub name: String,
    /// Raw values mapped to `+1`; every other value maps to `-1`.
    pub positive: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitiveColumn {
    pub name: String,
    /// Raw value of the protected group (`z = 0`).
    pub protected: String,
    /// If set, only this value maps to `z = 1` and rows with any other value are dropped.
    #[serde(default)]
    pub non_protected: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    DropRow,
}

/// Column roles for [`load_csv`]. Every header column must be named in exactly
/// one role (label, sensitive, categorical, numeric or drop).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    #[serde(default)]
    pub name: Option<String>,
    pub label: LabelColumn,
    pub sensitive: SensitiveColumn,
    #[serde(default)]
    pub categorical: Vec<String>,
    #[serde(default)]
    pub numeric: Vec<String>,
    #[serde(default)]
    pub drop: Vec<String>,
    #[serde(default = "default_missing")]
    pub missing_values: Vec<String>,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
    #[serde(default)]
    pub standardize: Standardization,
}

fn default_missing() -> Vec<String> {
    vec![String::new(), "?".into(), "NA".into()]
}

impl CsvSchema {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema is always representable as TOML")
    }

    /// The schema that reads back a file produced by [`write_csv`] unchanged.
    pub fn for_export(ds: &Dataset) -> Self {
        let raw = &ds.feature_names()[..ds.width() - 1];
        CsvSchema {
            name: Some(ds.name().to_string()),
            label: LabelColumn {
                name: "label".into(),
                positive: vec!["1".into()],
            },
            sensitive: SensitiveColumn {
                name: "sensitive".into(),
                protected: "0".into(),
                non_protected: None,
            },
            categorical: vec![],
            numeric: raw.to_vec(),
            drop: vec![],
            missing_values: default_missing(),
            missing_policy: MissingPolicy::DropRow,
            standardize: Standardization::Off,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let roles = [&self.label.name, &self.sensitive.name]
            .into_iter()
            .chain(&self.categorical)
            .chain(&self.numeric)
            .chain(&self.drop);
        for name in roles {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("column `{name}` listed twice")));
            }
        }
        if self.label.positive.is_empty() {
            return Err(Error::Schema("label needs at least one positive value".into()));
        }
        Ok(())
    }
}

enum Role {
    Label,
    Sensitive,
    Categorical,
    Numeric,
    Drop,
}

/// Reads a headered CSV into a [`Dataset`]: drops rows with missing values,
/// one-hot encodes categoricals (levels sorted), optionally standardises
/// numerics over the loaded rows, and appends the bias column. Feature columns
/// follow header order.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    schema.validate()?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let position: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    let mut roles = Vec::with_capacity(header.len());
    for h in &header {
        let role = if *h == schema.label.name {
            Role::Label
        } else if *h == schema.sensitive.name {
            Role::Sensitive
        } else if schema.categorical.contains(h) {
            Role::Categorical
        } else if schema.numeric.contains(h) {
            Role::Numeric
        } else if schema.drop.contains(h) {
            Role::Drop
        } else {
            return Err(Error::Schema(format!("column `{h}` has no role in the schema")));
        };
        roles.push(role);
    }
    let named = [&schema.label.name, &schema.sensitive.name]
        .into_iter()
        .chain(&schema.categorical)
        .chain(&schema.numeric)
        .chain(&schema.drop);
    for name in named {
        if !position.contains_key(name.as_str()) {
            return Err(Error::UnknownColumn(name.clone()));
        }
    }

    let is_missing = |v: &str| schema.missing_values.iter().any(|m| m == v);
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let complete = record
            .iter()
            .zip(&roles)
            .all(|(v, role)| matches!(role, Role::Drop) || !is_missing(v));
        if !complete {
            continue;
        }
        let z = &record[position[schema.sensitive.name.as_str()]];
        if let Some(other) = &schema.sensitive.non_protected {
            if z != schema.sensitive.protected && z != other {
                continue;
            }
        }
        rows.push(record);
    }

    // Build feature columns in header order.
    let mut names = Vec::new();
    let mut numeric_idx = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (c, role) in roles.iter().enumerate() {
        match role {
            Role::Categorical => {
                let levels: BTreeSet<&str> = rows.iter().map(|r| &r[c]).collect();
                if levels.len() < 2 {
                    return Err(Error::ConstantColumn(header[c].clone()));
                }
                for level in levels {
                    names.push(format!("{}={}", header[c], level));
                    columns.push(rows.iter().map(|r| f64::from(u8::from(&r[c] == level))).collect());
                }
            }
            Role::Numeric => {
                let mut col = Vec::with_capacity(rows.len());
                for (i, r) in rows.iter().enumerate() {
                    let v: f64 = r[c].parse().map_err(|_| Error::BadNumber {
                        column: header[c].clone(),
                        row: i,
                        value: r[c].to_string(),
                    })?;
                    col.push(v);
                }
                if col.windows(2).all(|w| w[0] == w[1]) {
                    return Err(Error::ConstantColumn(header[c].clone()));
                }
                numeric_idx.push(columns.len());
                names.push(header[c].clone());
                columns.push(col);
            }
            _ => {}
        }
    }

    let n = rows.len();
    let raw = Array2::from_shape_fn((n, columns.len()), |(i, j)| columns[j][i]);
    let label_col = position[schema.label.name.as_str()];
    let labels = rows
        .iter()
        .map(|r| {
            if schema.label.positive.iter().any(|p| p == &r[label_col]) {
                1
            } else {
                -1
            }
        })
        .collect();
    let z_col = position[schema.sensitive.name.as_str()];
    let sensitive = rows
        .iter()
        .map(|r| u8::from(r[z_col] != schema.sensitive.protected))
        .collect();
    let tag = schema.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let mut ds = Dataset::with_columns(raw, labels, sensitive, tag, names, numeric_idx)?;
    if schema.standardize == Standardization::Full {
        ds.standardize()?;
    }
    Ok(ds)
}

/// Writes features (without the bias), `label` (±1) and `sensitive` (0/1).
/// [`CsvSchema::for_export`] reads the file back bit-identically.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let raw = ds.width() - 1;
    let mut header: Vec<&str> = ds.feature_names()[..raw].iter().map(String::as_str).collect();
    header.extend(["label", "sensitive"]);
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let row = ds.row(i);
        let mut rec: Vec<String> = row.iter().take(raw).map(|v| v.to_string()).collect();
        rec.push(ds.labels()[i].to_string());
        rec.push(ds.sensitive()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn schema() -> CsvSchema {
        CsvSchema {
            name: None,
            label: LabelColumn {
                name: "income".into(),
                positive: vec![">50K".into()],
            },
            sensitive: SensitiveColumn {
                name: "sex".into(),
                protected: "Female".into(),
                non_protected: None,
            },
            categorical: vec!["job".into()],
            numeric: vec!["age".into()],
            drop: vec![],
            missing_values: default_missing(),
            missing_policy: MissingPolicy::DropRow,
            standardize: Standardization::Full,
        }
    }

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn drops_rows_with_missing_values() {
        let f = write("age,job,sex,income\n30,a,Male,>50K\n40,?,Female,<=50K\n50,b,Female,<=50K\n");
        let ds = load_csv(f.path(), &schema()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels(), &[1, -1]);
        assert_eq!(ds.sensitive(), &[1, 0]);
    }

    #[test]
    fn one_hot_width() {
        let f = write("age,job,sex,income\n30,a,Male,>50K\n40,b,Female,<=50K\n50,c,Female,<=50K\n20,a,Male,<=50K\n");
        let ds = load_csv(f.path(), &schema()).unwrap();
        // 3 one-hot + 1 numeric + bias
        assert_eq!(ds.width(), 5);
        assert_eq!(
            ds.feature_names(),
            &["age", "job=a", "job=b", "job=c", "bias"].map(String::from)
        );
        assert_eq!(ds.numeric_columns(), &[0]);
        let age = ds.features().column(0);
        let mean = age.sum() / 4.0;
        let var = age.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_column_is_rejected() {
        let f = write("age,job,gender,income\n30,a,Male,>50K\n");
        let err = load_csv(f.path(), &schema()).unwrap_err();
        assert!(matches!(err, Error::Schema(_) | Error::UnknownColumn(_)), "{err}");
        let mut s = schema();
        s.drop.push("zip".into());
        let f = write("age,job,sex,income\n30,a,Male,>50K\n31,b,Female,>50K\n");
        assert!(matches!(load_csv(f.path(), &s), Err(Error::UnknownColumn(c)) if c == "zip"));
    }

    #[test]
    fn constant_column_is_rejected() {
        let f = write("age,job,sex,income\n30,a,Male,>50K\n30,b,Female,<=50K\n");
        assert!(matches!(load_csv(f.path(), &schema()), Err(Error::ConstantColumn(c)) if c == "age"));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv(Path::new("/nonexistent/file.csv"), &schema()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn non_protected_filter_drops_other_values() {
        let mut s = schema();
        s.sensitive.non_protected = Some("Male".into());
        let f = write("age,job,sex,income\n30,a,Male,>50K\n40,b,Other,<=50K\n50,b,Female,<=50K\n");
        assert_eq!(load_csv(f.path(), &s).unwrap().len(), 2);
    }
}
