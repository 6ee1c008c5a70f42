//! JSON wire formats. Complex numbers are always `[re, im]` pairs.
//!
//! ```text
//! BilinearForm      { "dim": N, "matrix": [[[re,im], …], …] }            row-major
//! Projection        { "dim": N, "rows": [[r₁,…,r_N], …] }
//! SymTensor         { "nvars": n, "rank": k, "entries": [{"idx": [...], "val": [re,im]}, …] }
//! MomentFunctional  { "nvars": n, "max_degree": D, "tensors": [SymTensor, …] }
//! ```
//!
//! Tensor indices are 0-based and sorted.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::model::{BilinearForm, ModelSpace, Projection};
use crate::moments::MomentFunctional;
use crate::polytensor::SymTensor;

pub type ComplexPair = [f64; 2];

pub fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

pub fn unpair(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub dim: usize,
    pub matrix: Vec<Vec<ComplexPair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionJson {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub idx: Vec<usize>,
    pub val: ComplexPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    /// May be omitted inside a moment functional, which carries it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nvars: Option<usize>,
    pub rank: usize,
    pub entries: Vec<EntryJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFunctionalJson {
    pub nvars: usize,
    pub max_degree: usize,
    pub tensors: Vec<TensorJson>,
}

impl From<&BilinearForm> for FormJson {
    fn from(form: &BilinearForm) -> Self {
        let m = form.matrix();
        Self {
            dim: m.nrows(),
            matrix: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect())
                .collect(),
        }
    }
}

impl TryFrom<FormJson> for BilinearForm {
    type Error = Error;

    fn try_from(json: FormJson) -> Result<Self> {
        let dim = json.dim;
        if json.matrix.len() != dim || json.matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::shape(format!("form matrix is not {dim}x{dim}")));
        }
        let matrix = CMatrix::from_fn(dim, dim, |r, c| unpair(json.matrix[r][c]));
        BilinearForm::new(ModelSpace::new(dim)?, matrix)
    }
}

impl From<&Projection> for ProjectionJson {
    fn from(p: &Projection) -> Self {
        let m = p.matrix();
        Self {
            dim: m.ncols(),
            rows: (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect(),
        }
    }
}

impl TryFrom<ProjectionJson> for Projection {
    type Error = Error;

    fn try_from(json: ProjectionJson) -> Result<Self> {
        Projection::from_rows(ModelSpace::new(json.dim)?, &json.rows)
    }
}

impl From<&SymTensor> for TensorJson {
    fn from(t: &SymTensor) -> Self {
        Self {
            nvars: Some(t.nvars()),
            rank: t.rank(),
            entries: t
                .entries()
                .iter()
                .map(|(idx, v)| EntryJson {
                    idx: idx.clone(),
                    val: pair(*v),
                })
                .collect(),
        }
    }
}

impl TensorJson {
    pub fn into_tensor(self, default_nvars: Option<usize>) -> Result<SymTensor> {
        let nvars = self
            .nvars
            .or(default_nvars)
            .ok_or_else(|| Error::Invalid("tensor JSON without nvars".into()))?;
        let mut t = SymTensor::zeros(nvars, self.rank);
        for e in self.entries {
            t.add_at(&e.idx, unpair(e.val))?;
        }
        Ok(t)
    }
}

impl TryFrom<TensorJson> for SymTensor {
    type Error = Error;

    fn try_from(json: TensorJson) -> Result<Self> {
        json.into_tensor(None)
    }
}

impl From<&MomentFunctional> for MomentFunctionalJson {
    fn from(mu: &MomentFunctional) -> Self {
        Self {
            nvars: mu.nvars(),
            max_degree: mu.max_degree(),
            tensors: mu
                .tensors()
                .iter()
                .map(|t| TensorJson {
                    nvars: None,
                    ..TensorJson::from(t)
                })
                .collect(),
        }
    }
}

impl TryFrom<MomentFunctionalJson> for MomentFunctional {
    type Error = Error;

    fn try_from(json: MomentFunctionalJson) -> Result<Self> {
        if json.tensors.len() != json.max_degree + 1 {
            return Err(Error::shape(format!(
                "max_degree {} but {} tensors",
                json.max_degree,
                json.tensors.len()
            )));
        }
        let tensors = json
            .tensors
            .into_iter()
            .map(|t| t.into_tensor(Some(json.nvars)))
            .collect::<Result<_>>()?;
        MomentFunctional::new(json.nvars, tensors)
    }
}

fn from_str<W, T>(text: &str) -> Result<T>
where
    W: for<'de> Deserialize<'de>,
    T: TryFrom<W, Error = Error>,
{
    let wire: W = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("bad JSON: {e}")))?;
    T::try_from(wire)
}

pub fn form_from_str(text: &str) -> Result<BilinearForm> {
    from_str::<FormJson, _>(text)
}

pub fn projection_from_str(text: &str) -> Result<Projection> {
    from_str::<ProjectionJson, _>(text)
}

pub fn tensor_from_str(text: &str) -> Result<SymTensor> {
    from_str::<TensorJson, _>(text)
}

pub fn functional_from_str(text: &str) -> Result<MomentFunctional> {
    from_str::<MomentFunctionalJson, _>(text)
}

/// Real matrix from nested rows.
pub fn real_matrix(rows: &[Vec<f64>]) -> Result<RMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::shape("ragged matrix rows"));
    }
    Ok(RMatrix::from_fn(n, m, |r, c| rows[r][c]))
}
