//! JSON documents for extension pairs and their elements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{ExtensionPair, LatticeElement};

/// `{"base_weights": [...], "fiber_cells": n, "orthogonal_part": bool}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub base_weights: Vec<f64>,
    pub fiber_cells: usize,
    #[serde(default)]
    pub orthogonal_part: bool,
}

impl SpaceDoc {
    pub fn to_pair(&self) -> Result<ExtensionPair<f64>> {
        ExtensionPair::new(self.base_weights.clone(), self.fiber_cells, self.orthogonal_part)
    }

    pub fn from_pair(pair: &ExtensionPair<f64>) -> Self {
        Self {
            base_weights: pair.base_space().weights().to_vec(),
            fiber_cells: pair.fiber_cells(),
            orthogonal_part: pair.has_orthogonal(),
        }
    }
}

/// `{"rows": [[...], ...], "plus": [...], "minus": [...]}`; every key may be
/// omitted and then stands for zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<Vec<f64>>,
}

fn doc_error(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Document {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn check_cells(pointer: &str, cells: &[f64], n: usize) -> Result<()> {
    if cells.len() != n {
        return Err(doc_error(
            pointer,
            format!("expected {n} fiber cells, found {}", cells.len()),
        ));
    }
    if let Some(j) = cells.iter().position(|v| !v.is_finite()) {
        return Err(doc_error(format!("{pointer}/{j}"), "value must be finite"));
    }
    Ok(())
}

impl ElementDoc {
    /// Validates the document against `pair` and builds the element.
    pub fn to_element(&self, pair: &ExtensionPair<f64>) -> Result<LatticeElement<f64>> {
        let n = pair.fiber_cells();
        let m = pair.base_atoms();
        let rows = match &self.rows {
            Some(rows) => {
                if rows.len() != m {
                    return Err(doc_error(
                        "/rows",
                        format!("expected {m} rows, found {}", rows.len()),
                    ));
                }
                for (i, row) in rows.iter().enumerate() {
                    check_cells(&format!("/rows/{i}"), row, n)?;
                }
                rows.clone()
            }
            None => vec![vec![0.0; n]; m],
        };
        for (key, cells) in [("plus", &self.plus), ("minus", &self.minus)] {
            if let Some(cells) = cells {
                if !pair.has_orthogonal() {
                    return Err(doc_error(
                        format!("/{key}"),
                        "space has no orthogonal part",
                    ));
                }
                check_cells(&format!("/{key}"), cells, n)?;
            }
        }
        pair.element(rows, self.plus.clone(), self.minus.clone())
    }

    pub fn from_element(pair: &ExtensionPair<f64>, f: &LatticeElement<f64>) -> Result<Self> {
        pair.check_total(f)?;
        let rows = (0..pair.base_atoms())
            .map(|i| pair.fiber(f, i).to_vec())
            .collect();
        Ok(Self {
            rows: Some(rows),
            plus: pair.plus_fiber(f).map(<[f64]>::to_vec),
            minus: pair.minus_fiber(f).map(<[f64]>::to_vec),
        })
    }
}
