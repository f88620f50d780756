//! JSON representation files and report helpers.
//!
//! Matrix entries are written as decimal strings with 17 significant digits,
//! which round-trips every `f64` exactly. Reports write floats as their
//! shortest round-trip decimal string.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::invariants::{Representation, Target};
use crate::surface::SurfacePresentation;

pub const SCHEMA_VERSION: u32 = 1;
/// Relator tolerance when loading files; loose enough for the
/// cubic-power and unipotent builders.
pub const LOAD_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub genus: usize,
    pub boundary: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: String,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A matrix entry: decimal string on output, string or number on input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Number(f64),
}

impl Entry {
    fn value(&self) -> Result<f64> {
        match self {
            Entry::Number(x) => Ok(*x),
            Entry::Text(s) => s.trim().parse().map_err(|_| Error::Parse(format!("not a number: {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationSpec {
    pub schema: u32,
    pub surface: SurfaceSpec,
    pub target: TargetSpec,
    /// One matrix per generator, as rows.
    pub generators: Vec<Vec<Vec<Entry>>>,
    #[serde(default)]
    pub metadata: Metadata,
}

pub fn format_entry(x: f64) -> String {
    format!("{x:.16e}")
}

impl RepresentationSpec {
    pub fn from_representation(rep: &Representation, metadata: Metadata) -> Self {
        let p = rep.presentation();
        let (kind, n) = match rep.target() {
            Target::Psl2 => ("psl2", 1),
            Target::Sp(n) => ("sp", n),
        };
        let generators = rep
            .images()
            .iter()
            .map(|m| (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| Entry::Text(format_entry(m[(r, c)]))).collect()).collect())
            .collect();
        Self {
            schema: SCHEMA_VERSION,
            surface: SurfaceSpec { genus: p.genus(), boundary: p.boundary_count() },
            target: TargetSpec { kind: kind.into(), n },
            generators,
            metadata,
        }
    }

    pub fn to_representation(&self) -> Result<Representation> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported schema version {}", self.schema)));
        }
        let presentation = SurfacePresentation::new(self.surface.genus, self.surface.boundary)?;
        let target = match (self.target.kind.as_str(), self.target.n) {
            ("psl2", 1) => Target::Psl2,
            ("psl2", n) => return Err(Error::Schema(format!("psl2 target with n = {n}"))),
            ("sp", 0) => return Err(Error::Schema("sp target with n = 0".into())),
            ("sp", n) => Target::Sp(n),
            (k, _) => return Err(Error::Schema(format!("unknown target kind {k:?}"))),
        };
        if self.generators.len() != presentation.generator_count() {
            return Err(Error::Schema(format!(
                "{} generators given, presentation has {}",
                self.generators.len(),
                presentation.generator_count()
            )));
        }
        let dim = 2 * target.order();
        let mut images = Vec::with_capacity(self.generators.len());
        for (i, rows) in self.generators.iter().enumerate() {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::Schema(format!("generator {i} is not {dim}x{dim}")));
            }
            let mut m = DMatrix::zeros(dim, dim);
            for (r, row) in rows.iter().enumerate() {
                for (c, e) in row.iter().enumerate() {
                    m[(r, c)] = e.value()?;
                }
            }
            images.push(m);
        }
        Representation::with_tolerance(presentation, target, images, LOAD_TOLERANCE)
    }
}

pub fn parse_representation(text: &str) -> Result<Representation> {
    let spec: RepresentationSpec = serde_json::from_str(text).map_err(|e| {
        if e.is_data() {
            Error::Schema(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    })?;
    spec.to_representation()
}

pub fn representation_json(rep: &Representation, metadata: Metadata) -> String {
    let spec = RepresentationSpec::from_representation(rep, metadata);
    serde_json::to_string_pretty(&spec).expect("spec serializes") + "\n"
}

pub fn load_representation(path: impl AsRef<Path>) -> Result<Representation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_representation(&text)
}

pub fn save_representation(path: impl AsRef<Path>, rep: &Representation, metadata: Metadata) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, representation_json(rep, metadata)).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

/// Replaces every float in `v` by its shortest round-trip decimal string.
/// Integers stay numbers.
pub fn decimal_strings(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format!("{}", n.as_f64().expect("f64"))),
        Value::Array(a) => Value::Array(a.into_iter().map(decimal_strings).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, x)| (k, decimal_strings(x))).collect()),
        other => other,
    }
}

/// Envelope of every command's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub tool_version: String,
    /// Hex SHA-256 of the input files, in argument order.
    pub input_digest: Option<String>,
    pub seed: Option<u64>,
    pub results: Value,
}

impl Report {
    pub fn new(command: &str, input_digest: Option<String>, seed: Option<u64>, results: impl Serialize) -> Self {
        let results = serde_json::to_value(results).expect("results serialize");
        Self {
            schema: SCHEMA_VERSION,
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            input_digest,
            seed,
            results: decimal_strings(results),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
