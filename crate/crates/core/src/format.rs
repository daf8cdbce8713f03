//! JSON file formats: problems, pencils, pairs and solutions.
//!
//! Matrices are nested row lists of `[re, im]` pairs. Every file carries
//! `"format": 1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numerics::{c, CMatrix, C64};
use crate::pencil::{DeflatingPair, StructureTag};
use crate::specializations::PsdStrategy;
use crate::update_unstructured::{Provenance, UpdateResult};
use crate::verify::Certificate;

pub const FORMAT_VERSION: u32 = 1;

/// Failures reading or validating a file (all map to exit code 2).
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema: {0}")]
    Schema(String),
}

fn schema<T>(msg: impl Into<String>) -> Result<T, FileError> {
    Err(FileError::Schema(msg.into()))
}

/// A matrix as written in files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat(pub Vec<Vec<[f64; 2]>>);

impl Mat {
    pub fn from_matrix(a: &CMatrix) -> Self {
        Mat((0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
            .collect())
    }

    pub fn to_matrix(&self, name: &str) -> Result<CMatrix, FileError> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return schema(format!("{name} is empty"));
        }
        if self.0.iter().any(|r| r.len() != cols) {
            return schema(format!("{name} has ragged rows"));
        }
        let mut a = CMatrix::zeros(rows, cols);
        for (i, r) in self.0.iter().enumerate() {
            for (j, e) in r.iter().enumerate() {
                if !e[0].is_finite() || !e[1].is_finite() {
                    return schema(format!("{name}[{i}][{j}] is not finite"));
                }
                a[(i, j)] = c(e[0], e[1]);
            }
        }
        Ok(a)
    }
}

pub fn complex_list(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_complex_list(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|e| c(e[0], e[1])).collect()
}

/// `(X, Λ)`; `X` may be omitted where the context supplies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Mat>,
    #[serde(rename = "Lambda")]
    pub lambda: Mat,
}

impl PairJson {
    pub fn from_pair(d: &DeflatingPair) -> Self {
        Self {
            x: Some(Mat::from_matrix(&d.x)),
            lambda: Mat::from_matrix(&d.lambda),
        }
    }

    pub fn lambda(&self, name: &str) -> Result<CMatrix, FileError> {
        let l = self.lambda.to_matrix(&format!("{name}.Lambda"))?;
        if !l.is_square() {
            return schema(format!("{name}.Lambda must be square"));
        }
        Ok(l)
    }

    pub fn x(&self, name: &str) -> Result<Option<CMatrix>, FileError> {
        self.x.as_ref().map(|x| x.to_matrix(&format!("{name}.X"))).transpose()
    }
}

/// Update parameters; which ones apply depends on the structure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(rename = "Mhat", default, skip_serializing_if = "Option::is_none")]
    pub mhat: Option<Mat>,
    #[serde(rename = "Z1", default, skip_serializing_if = "Option::is_none")]
    pub z1: Option<Mat>,
    #[serde(rename = "Z2", default, skip_serializing_if = "Option::is_none")]
    pub z2: Option<Mat>,
    /// `n×2n` free matrix of the general unstructured solution.
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Mat>,
    #[serde(rename = "Mtilde", default, skip_serializing_if = "Option::is_none")]
    pub mtilde: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<PsdStrategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[serde(rename = "Phi", default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub format: u32,
    pub structure: String,
    #[serde(rename = "M")]
    pub m: Mat,
    #[serde(rename = "K")]
    pub k: Mat,
    pub change: PairJson,
    pub targets: PairJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<PairJson>,
    #[serde(default)]
    pub params: Params,
    /// Change and target eigenvalues are quadratic `z` values (`λ = z²`).
    #[serde(default)]
    pub quadratic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilFile {
    pub format: u32,
    pub structure: String,
    #[serde(rename = "M")]
    pub m: Mat,
    #[serde(rename = "K")]
    pub k: Mat,
}

/// Any subset of the pairs of a problem, plus an optional expected spectrum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairsFile {
    pub format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub change: Option<PairJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<PairJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<PairJson>,
    /// Eigenvalues of the updated pencil.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<[f64; 2]>>,
}

impl PairsFile {
    /// Fills fields missing here from `other`.
    pub fn merge(mut self, other: PairsFile) -> PairsFile {
        self.change = self.change.or(other.change);
        self.targets = self.targets.or(other.targets);
        self.fixed = self.fixed.or(other.fixed);
        self.expected = self.expected.or(other.expected);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMat {
    pub name: String,
    pub value: Mat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceJson {
    pub method: String,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Mat>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Mat>,
    #[serde(rename = "R_a", default, skip_serializing_if = "Option::is_none")]
    pub r_a: Option<Mat>,
    pub params: Vec<NamedMat>,
    pub scalars: Vec<(String, f64)>,
    pub assumed_spectral_condition: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_structure_residuals: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_structure: Option<String>,
    pub notes: Vec<String>,
}

impl ProvenanceJson {
    pub fn from_provenance(p: &Provenance) -> Self {
        Self {
            method: p.method.clone(),
            g: p.g.as_ref().map(Mat::from_matrix),
            u: p.u.as_ref().map(Mat::from_matrix),
            r_a: p.r_a.as_ref().map(Mat::from_matrix),
            params: p
                .params
                .iter()
                .map(|(n, m)| NamedMat { name: n.clone(), value: Mat::from_matrix(m) })
                .collect(),
            scalars: p.scalars.clone(),
            assumed_spectral_condition: p.assumed_spectral_condition,
            core_structure_residuals: p.structure.as_ref().map(|d| d.core_residuals),
            result_structure: p.result_tag.map(|t| t.name().to_string()),
            notes: p.notes.clone(),
        }
    }
}

/// Output of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub format: u32,
    #[serde(rename = "DeltaM")]
    pub delta_m: Mat,
    #[serde(rename = "DeltaK")]
    pub delta_k: Mat,
    pub provenance: ProvenanceJson,
    pub certificate: Certificate,
}

impl SolutionFile {
    pub fn new(r: &UpdateResult, certificate: Certificate) -> Self {
        Self {
            format: FORMAT_VERSION,
            delta_m: Mat::from_matrix(&r.delta_m),
            delta_k: Mat::from_matrix(&r.delta_k),
            provenance: ProvenanceJson::from_provenance(&r.provenance),
            certificate,
        }
    }
}

/// `ΔM`, `ΔK` only; a solution file also parses as this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaFile {
    pub format: u32,
    #[serde(rename = "DeltaM")]
    pub delta_m: Mat,
    #[serde(rename = "DeltaK")]
    pub delta_k: Mat,
}

/// Files with a `format` field.
pub trait Versioned {
    fn format(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(impl Versioned for $t { fn format(&self) -> u32 { self.format } })*};
}
versioned!(ProblemFile, PencilFile, PairsFile, SolutionFile, DeltaFile);

pub fn parse<T: for<'de> Deserialize<'de> + Versioned>(text: &str) -> Result<T, FileError> {
    let v: T = serde_json::from_str(text)?;
    if v.format() != FORMAT_VERSION {
        return schema(format!("unsupported format {} (expected {FORMAT_VERSION})", v.format()));
    }
    Ok(v)
}

pub fn emit<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("file types serialize");
    s.push('\n');
    s
}

pub fn read<T: for<'de> Deserialize<'de> + Versioned>(path: &Path) -> Result<T, FileError> {
    let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn write<T: Serialize>(path: &Path, v: &T) -> Result<(), FileError> {
    std::fs::write(path, emit(v)).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Structure names accepted in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileStructure {
    Tag(StructureTag),
    StarShh,
    TShh,
}

impl FileStructure {
    pub fn parse(s: &str) -> Result<Self, FileError> {
        match s {
            "star-shh" | "*-shh" => Ok(FileStructure::StarShh),
            "t-shh" => Ok(FileStructure::TShh),
            _ => StructureTag::parse(s)
                .map(FileStructure::Tag)
                .ok_or_else(|| FileError::Schema(format!("unknown structure {s:?}"))),
        }
    }
}
