//! Share and answer files: a JSON header next to a little-endian blob of
//! interleaved `(re, im)` doubles, one row-major matrix per listed worker.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::decode::{Eval, EvalSet};
use super::encode::{Share, ShareSet};
use crate::error::{Error, Result};
use crate::numerics::CMatrix;

pub const SHARES_FORMAT: &str = "alcc-shares/1";
pub const EVALS_FORMAT: &str = "alcc-evals/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireHeader {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params_fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly_degree: Option<usize>,
    pub rows: usize,
    pub cols: usize,
    pub workers: Vec<usize>,
}

fn pack(mats: &[&CMatrix]) -> Vec<u8> {
    let mut out = Vec::with_capacity(mats.iter().map(|m| m.as_slice().len() * 16).sum());
    for m in mats {
        for z in m.as_slice() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn unpack(header: &WireHeader, blob: &[u8]) -> Result<Vec<CMatrix>> {
    let per = header.rows * header.cols * 16;
    if blob.len() != per * header.workers.len() {
        return Err(Error::Format(format!(
            "blob holds {} bytes, header implies {}",
            blob.len(),
            per * header.workers.len()
        )));
    }
    if per == 0 {
        return Ok(header.workers.iter().map(|_| CMatrix::zeros(header.rows, header.cols)).collect());
    }
    blob.chunks_exact(per)
        .map(|chunk| {
            let data = chunk
                .chunks_exact(16)
                .map(|b| {
                    let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
                    Complex64::new(re, im)
                })
                .collect();
            CMatrix::from_vec(header.rows, header.cols, data)
        })
        .collect()
}

fn dims_of<'a>(mut mats: impl Iterator<Item = &'a CMatrix>) -> Result<(usize, usize)> {
    let Some(first) = mats.next() else {
        return Ok((0, 0));
    };
    let dims = first.dims();
    if mats.any(|m| m.dims() != dims) {
        return Err(Error::DimensionMismatch("matrices differ in shape".into()));
    }
    Ok(dims)
}

fn expect_format(header: &WireHeader, format: &str) -> Result<()> {
    if header.format != format {
        return Err(Error::Format(format!("expected `{format}`, found `{}`", header.format)));
    }
    Ok(())
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

fn save(stem: &Path, header: &WireHeader, blob: &[u8]) -> Result<()> {
    let (json, bin) = paths(stem);
    fs::write(json, serde_json::to_string_pretty(header)?)?;
    fs::write(bin, blob)?;
    Ok(())
}

fn load(stem: &Path) -> Result<(WireHeader, Vec<u8>)> {
    let (json, bin) = paths(stem);
    let header = serde_json::from_str(&fs::read_to_string(json)?)?;
    Ok((header, fs::read(bin)?))
}

impl ShareSet {
    pub fn to_wire(&self) -> Result<(WireHeader, Vec<u8>)> {
        let (rows, cols) = dims_of(self.shares.iter().map(|s| &s.value))?;
        let header = WireHeader {
            format: SHARES_FORMAT.into(),
            params_fingerprint: Some(self.params_fingerprint.clone()),
            poly_degree: None,
            rows,
            cols,
            workers: self.shares.iter().map(|s| s.worker).collect(),
        };
        let mats: Vec<_> = self.shares.iter().map(|s| &s.value).collect();
        Ok((header, pack(&mats)))
    }

    pub fn from_wire(header: &WireHeader, blob: &[u8]) -> Result<Self> {
        expect_format(header, SHARES_FORMAT)?;
        let values = unpack(header, blob)?;
        Ok(Self {
            params_fingerprint: header.params_fingerprint.clone().unwrap_or_default(),
            shares: header
                .workers
                .iter()
                .zip(values)
                .map(|(&worker, value)| Share { worker, value })
                .collect(),
        })
    }

    /// Writes `<stem>.json` and `<stem>.bin`.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let (h, b) = self.to_wire()?;
        save(stem, &h, &b)
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (h, b) = load(stem)?;
        Self::from_wire(&h, &b)
    }
}

impl EvalSet {
    pub fn to_wire(&self) -> Result<(WireHeader, Vec<u8>)> {
        let (rows, cols) = dims_of(self.results.iter().map(|e| &e.value))?;
        let header = WireHeader {
            format: EVALS_FORMAT.into(),
            params_fingerprint: None,
            poly_degree: Some(self.poly_degree),
            rows,
            cols,
            workers: self.results.iter().map(|e| e.worker).collect(),
        };
        let mats: Vec<_> = self.results.iter().map(|e| &e.value).collect();
        Ok((header, pack(&mats)))
    }

    pub fn from_wire(header: &WireHeader, blob: &[u8]) -> Result<Self> {
        expect_format(header, EVALS_FORMAT)?;
        let poly_degree = header
            .poly_degree
            .ok_or_else(|| Error::Format("answer header lacks `poly_degree`".into()))?;
        let values = unpack(header, blob)?;
        Ok(Self {
            poly_degree,
            results: header
                .workers
                .iter()
                .zip(values)
                .map(|(&worker, value)| Eval { worker, value })
                .collect(),
        })
    }

    pub fn save(&self, stem: &Path) -> Result<()> {
        let (h, b) = self.to_wire()?;
        save(stem, &h, &b)
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (h, b) = load(stem)?;
        Self::from_wire(&h, &b)
    }
}
