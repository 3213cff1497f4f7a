//! TOML model files.
//!
//! ```toml
//! num_regimes = 2
//! P = [
//!   [0.7, 0.3],
//!   [0.4, 0.6],
//! ]
//! lam = [0.2, 0.15]
//! mu1 = [0.3, 0.35]
//! mu2 = [0.5, 0.5]
//! ```
//!
//! Dimension problems are reported with the line of the offending value.
//! Probability checks (row sums, rate sums, irreducibility) are left to
//! [`crate::model::validate_inputs`] so a front end can print a full report.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, ValidationReport};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    num_regimes: Spanned<usize>,
    #[serde(rename = "P")]
    p: Spanned<Vec<Spanned<Vec<f64>>>>,
    lam: Spanned<Vec<f64>>,
    mu1: Spanned<Vec<f64>>,
    mu2: Spanned<Vec<f64>>,
}

/// A model file with consistent dimensions but not yet validated.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub p: DMatrix<f64>,
    pub lam: Vec<f64>,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: Raw = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            msg: e.message().to_string(),
        })?;
        let n = *raw.num_regimes.get_ref();
        let at = |span: std::ops::Range<usize>, msg: String| Error::Parse {
            line: line_of(text, span.start),
            msg,
        };
        if n == 0 {
            return Err(at(raw.num_regimes.span(), "num_regimes must be positive".into()));
        }
        if raw.p.get_ref().len() != n {
            return Err(at(
                raw.p.span(),
                format!("P has {} rows, expected {n}", raw.p.get_ref().len()),
            ));
        }
        for (i, row) in raw.p.get_ref().iter().enumerate() {
            if row.get_ref().len() != n {
                return Err(at(
                    row.span(),
                    format!("row {} of P has {} entries, expected {n}", i + 1, row.get_ref().len()),
                ));
            }
        }
        for (name, v) in [("lam", &raw.lam), ("mu1", &raw.mu1), ("mu2", &raw.mu2)] {
            if v.get_ref().len() != n {
                return Err(at(
                    v.span(),
                    format!("{name} has {} entries, expected {n}", v.get_ref().len()),
                ));
            }
        }
        let flat: Vec<f64> = raw.p.get_ref().iter().flat_map(|r| r.get_ref().clone()).collect();
        Ok(ModelFile {
            p: DMatrix::from_row_slice(n, n, &flat),
            lam: raw.lam.into_inner(),
            mu1: raw.mu1.into_inner(),
            mu2: raw.mu2.into_inner(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> ValidationReport {
        model::validate_inputs(&self.p, &self.lam, &self.mu1, &self.mu2)
    }

    pub fn into_params(self) -> Result<ModelParams> {
        ModelParams::new(self.p, self.lam, self.mu1, self.mu2)
    }
}

/// Render a model in the file format. Parsing the output gives back the same numbers.
pub fn to_toml(params: &ModelParams) -> String {
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let n = params.num_regimes();
    let mut s = format!("num_regimes = {n}\nP = [\n");
    for i in 0..n {
        let row: Vec<f64> = params.p().row(i).iter().copied().collect();
        s.push_str(&format!("  [{}],\n", fmt(&row)));
    }
    s.push_str(&format!(
        "]\nlam = [{}]\nmu1 = [{}]\nmu2 = [{}]\n",
        fmt(params.lam()),
        fmt(params.mu1()),
        fmt(params.mu2())
    ));
    s
}
