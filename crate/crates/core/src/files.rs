//! Text document formats: weighted families, vectors, vector systems,
//! local-frame assemblies, and harmonic specifications.
//!
//! All documents are UTF-8 JSON. Real documents store entries as plain
//! numbers; complex documents store `[re, im]` pairs. Floating-point
//! values are written with 17 significant digits so that a round trip
//! reproduces them bit for bit.

use std::io::Write as IoWrite;

use serde::{Deserialize, Serialize};

use crate::assembly::LocalFrame;
use crate::error::{Error, Result};
use crate::fusion::WeightedFamily;
use crate::harmonic::HarmonicSpec;
use crate::linalg::{cx, Mat, Scalar, Vector};
use crate::subspace::Subspace;

/// Scalar field of a problem instance, fixed per document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
}

/// One number in a document: a plain real or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl EntryRepr {
    fn to_scalar(self, field: FieldKind, context: &str) -> Result<Scalar> {
        let z = match (self, field) {
            (EntryRepr::Real(x), _) => cx(x, 0.0),
            (EntryRepr::Pair(p), FieldKind::Complex) => cx(p[0], p[1]),
            (EntryRepr::Pair(_), FieldKind::Real) => {
                return Err(Error::invalid(format!(
                    "{context}: complex entry in a real document"
                )))
            }
        };
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::invalid(format!("{context}: non-finite entry")));
        }
        Ok(z)
    }

    fn from_scalar(z: Scalar, field: FieldKind, context: &str) -> Result<Self> {
        match field {
            FieldKind::Real => {
                if z.im.abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "{context}: value has imaginary part {} but the document is real",
                        z.im
                    )));
                }
                Ok(EntryRepr::Real(z.re))
            }
            FieldKind::Complex => Ok(EntryRepr::Pair([z.re, z.im])),
        }
    }
}

/// Subspace record: a positive weight and basis vectors given as rows.
/// Rows may be a raw spanning set; they are re-orthonormalized on load
/// and the event is flagged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceRecord {
    pub weight: f64,
    pub basis: Vec<Vec<EntryRepr>>,
}

/// A weighted family of subspaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyFile {
    pub ambient_dim: usize,
    pub field: FieldKind,
    pub subspaces: Vec<SubspaceRecord>,
}

/// A single vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorFile {
    pub field: FieldKind,
    pub entries: Vec<EntryRepr>,
}

/// A flat system of vectors (rows are vectors).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorSystemFile {
    pub ambient_dim: usize,
    pub field: FieldKind,
    pub vectors: Vec<Vec<EntryRepr>>,
}

/// One local frame: a weight, its vectors as rows, and optionally the
/// claimed frame-sequence bounds (validated against recomputed values).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalRecord {
    pub weight: f64,
    pub vectors: Vec<Vec<EntryRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
}

/// Local frames to assemble into a global system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssemblyFile {
    pub ambient_dim: usize,
    pub field: FieldKind,
    pub locals: Vec<LocalRecord>,
}

/// Orbit specification: the stepping unitary as matrix rows, the seed
/// subspace as basis rows, the number of orbit steps, and either one
/// uniform weight or a full weight list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicFile {
    pub field: FieldKind,
    pub unitary: Vec<Vec<EntryRepr>>,
    pub seed_basis: Vec<Vec<EntryRepr>>,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

/// A family parsed from a document, with the indices of subspaces whose
/// rows were not orthonormal and had to be re-orthonormalized.
#[derive(Debug, Clone)]
pub struct ParsedFamily {
    pub family: WeightedFamily,
    pub field: FieldKind,
    pub reorthonormalized: Vec<usize>,
}

fn json_error(err: serde_json::Error) -> Error {
    Error::invalid(format!("document does not match the schema: {err}"))
}

/// Rows-as-vectors: each document row becomes one column of the matrix.
fn rows_as_columns(
    rows: &[Vec<EntryRepr>],
    ambient_dim: usize,
    field: FieldKind,
    context: &str,
) -> Result<Mat> {
    let mut m = Mat::zeros(ambient_dim, rows.len());
    for (j, row) in rows.iter().enumerate() {
        if row.len() != ambient_dim {
            return Err(Error::invalid(format!(
                "{context}: row {j} has length {}, expected {ambient_dim}",
                row.len()
            )));
        }
        for (i, &entry) in row.iter().enumerate() {
            m[(i, j)] = entry.to_scalar(field, &format!("{context}, row {j}, entry {i}"))?;
        }
    }
    Ok(m)
}

/// Rows as matrix rows (for operators).
fn rows_as_matrix(rows: &[Vec<EntryRepr>], field: FieldKind, context: &str) -> Result<Mat> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::invalid(format!("{context}: empty matrix")));
    }
    let ncols = rows[0].len();
    let mut m = Mat::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::invalid(format!(
                "{context}: row {i} has length {}, expected {ncols}",
                row.len()
            )));
        }
        for (j, &entry) in row.iter().enumerate() {
            m[(i, j)] = entry.to_scalar(field, &format!("{context}, row {i}, entry {j}"))?;
        }
    }
    Ok(m)
}

fn columns_as_rows(m: &Mat, field: FieldKind, context: &str) -> Result<Vec<Vec<EntryRepr>>> {
    let mut rows = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut row = Vec::with_capacity(m.nrows());
        for i in 0..m.nrows() {
            row.push(EntryRepr::from_scalar(m[(i, j)], field, context)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_family_str(doc: &str) -> Result<ParsedFamily> {
    let file: FamilyFile = serde_json::from_str(doc).map_err(json_error)?;
    parse_family_file(&file)
}

pub fn parse_family_file(file: &FamilyFile) -> Result<ParsedFamily> {
    let n = file.ambient_dim;
    let mut items = Vec::with_capacity(file.subspaces.len());
    let mut reorthonormalized = Vec::new();
    for (k, record) in file.subspaces.iter().enumerate() {
        if !(record.weight > 0.0) || !record.weight.is_finite() {
            return Err(Error::invalid(format!(
                "subspace {k}: weight must be a positive finite number, got {}",
                record.weight
            )));
        }
        let m = rows_as_columns(&record.basis, n, file.field, &format!("subspace {k}"))?;
        let subspace = match Subspace::from_orthonormal(m.clone()) {
            Ok(w) => w,
            Err(_) => {
                reorthonormalized.push(k);
                Subspace::from_spanning(&m, None)?
            }
        };
        items.push((subspace, record.weight));
    }
    Ok(ParsedFamily {
        family: WeightedFamily::new(n, items)?,
        field: file.field,
        reorthonormalized,
    })
}

pub fn family_to_file(family: &WeightedFamily, field: FieldKind) -> Result<FamilyFile> {
    let subspaces = family
        .items()
        .iter()
        .enumerate()
        .map(|(k, (w, v))| {
            Ok(SubspaceRecord {
                weight: *v,
                basis: columns_as_rows(w.basis(), field, &format!("subspace {k}"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyFile {
        ambient_dim: family.ambient_dim(),
        field,
        subspaces,
    })
}

pub fn parse_vector_str(doc: &str) -> Result<(Vector, FieldKind)> {
    let file: VectorFile = serde_json::from_str(doc).map_err(json_error)?;
    let mut v = Vector::zeros(file.entries.len());
    for (i, &entry) in file.entries.iter().enumerate() {
        v[i] = entry.to_scalar(file.field, &format!("entry {i}"))?;
    }
    Ok((v, file.field))
}

pub fn vector_to_file(v: &Vector, field: FieldKind) -> Result<VectorFile> {
    let entries = v
        .iter()
        .map(|&z| EntryRepr::from_scalar(z, field, "entry"))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorFile { field, entries })
}

pub fn parse_vector_system_str(doc: &str) -> Result<(Mat, FieldKind)> {
    let file: VectorSystemFile = serde_json::from_str(doc).map_err(json_error)?;
    let m = rows_as_columns(&file.vectors, file.ambient_dim, file.field, "vectors")?;
    Ok((m, file.field))
}

pub fn parse_assembly_str(doc: &str) -> Result<(Vec<(LocalFrame, f64)>, FieldKind)> {
    let file: AssemblyFile = serde_json::from_str(doc).map_err(json_error)?;
    let mut locals = Vec::with_capacity(file.locals.len());
    for (k, record) in file.locals.iter().enumerate() {
        if !(record.weight > 0.0) || !record.weight.is_finite() {
            return Err(Error::invalid(format!(
                "local {k}: weight must be a positive finite number"
            )));
        }
        let vectors = rows_as_columns(
            &record.vectors,
            file.ambient_dim,
            file.field,
            &format!("local {k}"),
        )?;
        let mut local = LocalFrame::new(vectors);
        if let Some([a, b]) = record.bounds {
            local = local.with_declared_bounds(a, b);
        }
        locals.push((local, record.weight));
    }
    Ok((locals, file.field))
}

pub fn parse_harmonic_str(doc: &str) -> Result<(HarmonicSpec, FieldKind)> {
    let file: HarmonicFile = serde_json::from_str(doc).map_err(json_error)?;
    let unitary = rows_as_matrix(&file.unitary, file.field, "unitary")?;
    if unitary.nrows() != unitary.ncols() {
        return Err(Error::invalid("unitary must be square"));
    }
    let n = unitary.nrows();
    let seed_vectors = rows_as_columns(&file.seed_basis, n, file.field, "seed_basis")?;
    let seed = Subspace::from_spanning(&seed_vectors, None)?;
    let weights = match (&file.weights, file.weight) {
        (Some(ws), _) => ws.clone(),
        (None, Some(v)) => vec![v; file.steps],
        (None, None) => vec![1.0; file.steps],
    };
    Ok((
        HarmonicSpec::new(unitary, seed, file.steps, weights)?,
        file.field,
    ))
}

/// JSON writer that renders every float with 17 significant digits, so a
/// parse of the output reproduces each double bit for bit.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + IoWrite,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any document with the 17-significant-digit float convention.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::invalid(format!("serialization failed: {e}")))
}
