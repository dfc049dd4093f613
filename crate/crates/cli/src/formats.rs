//! JSON file formats: tensors, pencils, certificates.
//!
//! Complex numbers are `{re, im}` pairs and matrices are row-major nested
//! arrays. Floats that JSON cannot represent (`±∞`, NaN) are written as the
//! strings `"inf"`, `"-inf"` and `"nan"`.

use std::collections::BTreeSet;
use std::fmt;

use qflow::applications::MatrixPencil;
use qflow::pd_geometry::{BoundaryCertificate, FlagWeights};
use qflow::tensor_action::DenseTensor;
use qflow::{CMat, Complex64};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// An `f64` that survives JSON even when non-finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

pub fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().map(|&x| Num(x)).collect()
}

pub fn floats(xs: &[Num]) -> Vec<f64> {
    xs.iter().map(|x| x.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for Complex64 {
    fn from(z: JsonComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub fn matrix_to_json(m: &CMat) -> Vec<Vec<JsonComplex>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

pub fn matrix_from_json(rows: &[Vec<JsonComplex>], what: &str) -> Result<CMat, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(CliError::input(format!("{what}: rows have different lengths")));
    }
    if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::input(format!("{what}: non-finite entry")));
    }
    Ok(CMat::from_fn(r, c, |i, j| rows[i][j].into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub idx: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// Sparse tensor file; unlisted entries are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub dims: Vec<usize>,
    pub entries: Vec<TensorEntry>,
}

impl TensorFile {
    /// Nonzero entries in row-major order.
    pub fn from_tensor(t: &DenseTensor) -> Self {
        let dims = t.dims().to_vec();
        let mut entries = Vec::new();
        let mut idx = vec![0; dims.len()];
        for z in t.data() {
            if *z != Complex64::new(0.0, 0.0) {
                entries.push(TensorEntry { idx: idx.clone(), re: z.re, im: z.im });
            }
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self { dims, entries }
    }

    pub fn to_tensor(&self) -> Result<DenseTensor, CliError> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(CliError::input(format!("dims must be a nonempty list of positive sizes, got {:?}", self.dims)));
        }
        let mut t = DenseTensor::zeros(&self.dims);
        let mut data = t.data().to_vec();
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if e.idx.len() != self.dims.len() || e.idx.iter().zip(&self.dims).any(|(i, n)| i >= n) {
                return Err(CliError::input(format!("entry index {:?} out of range for dims {:?}", e.idx, self.dims)));
            }
            if !seen.insert(e.idx.clone()) {
                return Err(CliError::input(format!("duplicate entry index {:?}", e.idx)));
            }
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(CliError::input(format!("non-finite entry at {:?}", e.idx)));
            }
            data[t.offset(&e.idx)] = Complex64::new(e.re, e.im);
        }
        t = DenseTensor::new(self.dims.clone(), data).map_err(CliError::from)?;
        Ok(t)
    }
}

/// `sum_k A_k x_k` as a list of `n x n` matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PencilFile {
    pub n: usize,
    pub matrices: Vec<Vec<Vec<JsonComplex>>>,
}

impl PencilFile {
    pub fn from_pencil(p: &MatrixPencil) -> Self {
        Self { n: p.n(), matrices: p.matrices().iter().map(matrix_to_json).collect() }
    }

    pub fn to_pencil(&self) -> Result<MatrixPencil, CliError> {
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let a = matrix_from_json(m, &format!("pencil matrix {k}"))?;
                if a.nrows() != self.n || a.ncols() != self.n {
                    return Err(CliError::input(format!(
                        "pencil matrix {k} is {}x{}, expected {}x{}",
                        a.nrows(),
                        a.ncols(),
                        self.n,
                        self.n
                    )));
                }
                Ok(a)
            })
            .collect::<Result<Vec<_>, _>>()?;
        MatrixPencil::new(mats).map_err(CliError::from)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagWeightsJson {
    pub basis: Vec<Vec<JsonComplex>>,
    pub weights: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub euclid_dir: Vec<Num>,
    pub blocks: Vec<FlagWeightsJson>,
}

impl CertificateJson {
    pub fn from_certificate(c: &BoundaryCertificate) -> Self {
        Self {
            euclid_dir: nums(&c.euclid_dir),
            blocks: c
                .blocks
                .iter()
                .map(|b| FlagWeightsJson { basis: matrix_to_json(&b.basis), weights: nums(&b.weights) })
                .collect(),
        }
    }

    pub fn to_certificate(&self) -> Result<BoundaryCertificate, CliError> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                Ok(FlagWeights {
                    basis: matrix_from_json(&b.basis, &format!("certificate block {i}"))?,
                    weights: floats(&b.weights),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let c = BoundaryCertificate { euclid_dir: floats(&self.euclid_dir), blocks };
        c.validate().map_err(|e| CliError::input(format!("malformed certificate: {e}")))?;
        Ok(c)
    }
}
