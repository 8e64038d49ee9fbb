//! JSON operator and channel files.
//!
//! Operators: `{"dim": n, "re": [[...]], "im": [[...]]}`. Channels:
//! `{"kraus": [{"re": [[...]], "im": [[...]]}, ...]}` where each Kraus
//! matrix is output-dim rows by input-dim columns.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{c, CMatrix, HermitianOperator, QuantumChannel};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub kraus: Vec<MatrixJson>,
}

fn assemble(re: &[Vec<f64>], im: Option<&[Vec<f64>]>, what: &str) -> Result<CMatrix> {
    let rows = re.len();
    let cols = re.first().map_or(0, |r| r.len());
    if re.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("field `re` of {what}: ragged rows")));
    }
    if let Some(im) = im {
        if im.len() != rows || im.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse(format!(
                "field `im` of {what}: shape differs from `re` ({rows}x{cols})"
            )));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        c(re[i][j], im.map_or(0.0, |m| m[i][j]))
    }))
}

impl OperatorJson {
    pub fn from_operator(op: &HermitianOperator) -> Self {
        let m = op.matrix();
        let n = op.dim();
        Self {
            dim: n,
            re: (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let m = assemble(&self.re, Some(&self.im), "operator")?;
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::Parse(format!(
                "field `dim` is {} but `re` is {}x{}",
                self.dim,
                m.nrows(),
                m.ncols()
            )));
        }
        HermitianOperator::new(m)
    }
}

impl ChannelJson {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self {
            kraus: ch
                .kraus()
                .iter()
                .map(|k| MatrixJson {
                    re: k
                        .row_iter()
                        .map(|r| r.iter().map(|z| z.re).collect())
                        .collect(),
                    im: Some(
                        k.row_iter()
                            .map(|r| r.iter().map(|z| z.im).collect())
                            .collect(),
                    ),
                })
                .collect(),
        }
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(i, k)| assemble(&k.re, k.im.as_deref(), &format!("kraus[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(kraus)
    }
}

pub fn parse_operator(text: &str) -> Result<HermitianOperator> {
    let parsed: OperatorJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    parsed.to_operator()
}

pub fn parse_channel(text: &str) -> Result<QuantumChannel> {
    let parsed: ChannelJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    parsed.to_channel()
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<HermitianOperator> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_operator(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_channel(path: impl AsRef<Path>) -> Result<QuantumChannel> {
    let text = fs::read_to_string(path)?;
    parse_channel(&text)
}

pub fn operator_to_json(op: &HermitianOperator) -> String {
    serde_json::to_string_pretty(&OperatorJson::from_operator(op)).expect("plain data")
}

pub fn write_operator(path: impl AsRef<Path>, op: &HermitianOperator) -> Result<()> {
    fs::write(path, operator_to_json(op))?;
    Ok(())
}
