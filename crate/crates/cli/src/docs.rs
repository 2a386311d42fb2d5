//! Input documents and their loaders.
//!
//! Every loader reads the file once, feeds the bytes into the run digest and
//! reports schema errors with a JSON pointer to the offending value.

use std::path::Path;

use canonbase::json::{ElementDoc, SpaceDoc};
use canonbase::{Element, Pair, Rational, Scalar};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_path_to_error::Segment;

use crate::error::{CliError, CliResult};
use crate::report::Digest;

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for segment in path.iter() {
        out.push('/');
        match segment {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Reads `path` and deserialises it as `T`.
pub fn load<T: DeserializeOwned>(path: &Path, digest: &mut Digest) -> CliResult<T> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    digest.add(&shown, &bytes);
    let mut de = serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Schema {
        path: shown,
        pointer: pointer_of(e.path()),
        message: e.inner().to_string(),
    })
}

fn locate(path: &Path, err: canonbase::Error) -> CliError {
    match err {
        canonbase::Error::Document { pointer, message } => CliError::Schema {
            path: path.display().to_string(),
            pointer,
            message,
        },
        other => CliError::Core(other),
    }
}

pub fn load_space(path: &Path, digest: &mut Digest) -> CliResult<Pair> {
    let doc: SpaceDoc = load(path, digest)?;
    doc.to_pair().map_err(|e| locate(path, e))
}

/// Loads an element document against `space`. Absent keys stand for zero.
pub fn load_element(path: &Path, space: &Pair, digest: &mut Digest) -> CliResult<Element> {
    let doc: ElementDoc = load(path, digest)?;
    doc.to_element(space).map_err(|e| locate(path, e))
}

/// `{"weights": [...], "blocks": [[atom, ...], ...]}`: a probability space
/// with a conditioning partition.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityDoc {
    pub weights: Vec<f64>,
    pub blocks: Vec<Vec<usize>>,
}

/// A probability space together with a list of events.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventsDoc {
    pub weights: Vec<f64>,
    pub blocks: Vec<Vec<usize>>,
    pub events: Vec<Vec<f64>>,
}

/// `{"dim": d, "basis": [[...], ...]}` with an orthonormal basis.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceDoc {
    pub dim: usize,
    pub basis: Vec<Vec<f64>>,
}

/// A number written either as JSON number or as a `"p/q"` string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Number(serde_json::Number),
    Text(String),
}

impl Literal {
    pub fn exact(&self) -> CliResult<Rational> {
        let text = match self {
            Self::Number(n) => n.to_string(),
            Self::Text(t) => t.clone(),
        };
        Rational::parse_literal(&text)
            .ok_or_else(|| CliError::Usage(format!("not a rational number: {text:?}")))
    }
}

/// A convex piecewise-linear function given by domain, breakpoints, slopes
/// and one anchor value.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlDoc {
    #[serde(default)]
    pub lower: Option<Literal>,
    #[serde(default)]
    pub upper: Option<Literal>,
    #[serde(default)]
    pub breakpoints: Vec<Literal>,
    pub slopes: Vec<Literal>,
    pub anchor: (Literal, Literal),
}
