//! Plain-text model files.
//!
//! ```text
//! lossfair-model dim=3 dataset=synthetic-sp
//! 0.4213
//! -1.07
//! 0.0031
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so a model
//! read back is bit-identical to the one written.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::metrics::LinearModel;

const MAGIC: &str = "lossfair-model";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub dataset: String,
    pub model: LinearModel,
}

pub fn to_string(model: &LinearModel, dataset: &str) -> Result<String> {
    if dataset.is_empty() || dataset.chars().any(char::is_whitespace) {
        return Err(Error::ModelFormat(format!(
            "dataset tag `{dataset}` must be a single non-empty word"
        )));
    }
    let mut out = format!("{MAGIC} dim={} dataset={dataset}\n", model.dim());
    for v in model.theta() {
        writeln!(out, "{v:?}").expect("writing to a String");
    }
    Ok(out)
}

pub fn parse(text: &str) -> Result<ModelFile> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::ModelFormat("empty file".into()))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(Error::ModelFormat(format!("header must start with `{MAGIC}`")));
    }
    let (mut dim, mut dataset) = (None, None);
    for f in fields {
        match f.split_once('=') {
            Some(("dim", v)) => {
                dim = Some(
                    v.parse::<usize>()
                        .map_err(|_| Error::ModelFormat(format!("bad dim `{v}`")))?,
                )
            }
            Some(("dataset", v)) => dataset = Some(v.to_string()),
            _ => return Err(Error::ModelFormat(format!("unexpected header field `{f}`"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::ModelFormat("header lacks dim".into()))?;
    let dataset = dataset.ok_or_else(|| Error::ModelFormat("header lacks dataset".into()))?;
    let values = lines
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| Error::ModelFormat(format!("bad value `{}`", l.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != dim {
        return Err(Error::ModelFormat(format!(
            "header says dim={dim}, found {} values",
            values.len()
        )));
    }
    let model = LinearModel::new(Array1::from(values)).map_err(|e| Error::ModelFormat(e.to_string()))?;
    Ok(ModelFile { dataset, model })
}

pub fn write_model(path: &Path, model: &LinearModel, dataset: &str) -> Result<()> {
    std::fs::write(path, to_string(model, dataset)?).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}
