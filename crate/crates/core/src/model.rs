//! Finite-dimensional model of the test-function space, its dual, and the
//! projections `π: S′ → ℝⁿ` induced by tuples of test functions.
//!
//! The test-function space is represented as ℝᴺ in a fixed basis; the pairing
//! between a test function and a dual element is the Euclidean dot product of
//! coefficient vectors. Every construction in the engine only ever touches
//! finitely many test functions at a time, so nothing checkable is lost.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};

/// Relative tolerance for the symmetry check `B = Bᵀ`.
pub const TOL_SYM: f64 = 1e-12;
/// Relative tolerance for semidefiniteness of `Im B`.
pub const TOL_PSD: f64 = 1e-10;

/// Truncation of the test-function space to `dim` basis functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpace {
    dim: usize,
    basis_labels: Vec<String>,
}

impl ModelSpace {
    /// A space with default labels `e1, …, eN`.
    pub fn new(dim: usize) -> Result<Arc<Self>> {
        let labels = (1..=dim).map(|j| format!("e{j}")).collect();
        Self::with_labels(labels)
    }

    pub fn with_labels(basis_labels: Vec<String>) -> Result<Arc<Self>> {
        if basis_labels.is_empty() {
            return Err(Error::Invalid("model space needs dim >= 1".into()));
        }
        Ok(Arc::new(Self {
            dim: basis_labels.len(),
            basis_labels,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }
}

/// Element of the (complexified) test-function space, given by its
/// coefficients in the model basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    space: Arc<ModelSpace>,
    coeffs: Vec<Complex64>,
}

impl TestFunction {
    pub fn new(space: Arc<ModelSpace>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::shape(format!(
                "test function has {} coefficients, space dim is {}",
                coeffs.len(),
                space.dim()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn real(space: Arc<ModelSpace>, coeffs: &[f64]) -> Result<Self> {
        Self::new(space, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The `j`-th basis function (0-based).
    pub fn basis(space: Arc<ModelSpace>, j: usize) -> Result<Self> {
        let mut c = vec![0.0; space.dim()];
        *c.get_mut(j)
            .ok_or_else(|| Error::shape(format!("basis index {j} out of range")))? = 1.0;
        Self::real(space, &c)
    }

    pub fn space(&self) -> &Arc<ModelSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|z| z.im == 0.0)
    }

    pub fn real_coeffs(&self) -> Result<Vec<f64>> {
        if !self.is_real() {
            return Err(Error::Domain("test function has complex coefficients".into()));
        }
        Ok(self.coeffs.iter().map(|z| z.re).collect())
    }
}

/// The projection `π: S′ → ℝⁿ` defined by `n` real test functions, stored as
/// the explicit `n×N` row matrix. Rows may be linearly dependent.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    space: Arc<ModelSpace>,
    rows: RMatrix,
}

impl Projection {
    pub fn new(space: Arc<ModelSpace>, rows: RMatrix) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::Invalid("projection needs at least one row".into()));
        }
        if rows.ncols() != space.dim() {
            return Err(Error::shape(format!(
                "projection rows have length {}, space dim is {}",
                rows.ncols(),
                space.dim()
            )));
        }
        Ok(Self { space, rows })
    }

    pub fn from_rows(space: Arc<ModelSpace>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let dim = space.dim();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::shape(format!(
                "projection row of length {}, space dim is {dim}",
                bad.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(space, RMatrix::from_row_slice(n, dim, &flat))
    }

    pub fn from_test_functions(funcs: &[TestFunction]) -> Result<Self> {
        let first = funcs
            .first()
            .ok_or_else(|| Error::Invalid("projection needs at least one row".into()))?;
        let space = first.space().clone();
        let mut rows = Vec::with_capacity(funcs.len());
        for f in funcs {
            if f.space() != &space {
                return Err(Error::shape("projection rows from different model spaces"));
            }
            rows.push(f.real_coeffs()?);
        }
        Self::from_rows(space, &rows)
    }

    /// The canonical projection onto all basis coordinates.
    pub fn identity(space: Arc<ModelSpace>) -> Self {
        let dim = space.dim();
        Self {
            space,
            rows: RMatrix::identity(dim, dim),
        }
    }

    pub fn space(&self) -> &Arc<ModelSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.rows
    }

    /// Number of test functions `n`.
    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn row(&self, i: usize) -> TestFunction {
        let coeffs = self.rows.row(i).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        TestFunction {
            space: self.space.clone(),
            coeffs,
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = TestFunction> + '_ {
        (0..self.len()).map(|i| self.row(i))
    }

    /// `λ ∘ π`, the projection whose rows are `λ · P`.
    pub fn then(&self, lambda: &LinearMap) -> Result<Self> {
        if lambda.ncols() != self.len() {
            return Err(Error::shape(format!(
                "linear map expects {} inputs, projection has {} rows",
                lambda.ncols(),
                self.len()
            )));
        }
        Self::new(self.space.clone(), lambda.matrix() * &self.rows)
    }
}

/// Real linear map `λ: ℝⁿ → ℝᵐ`, an `m×n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: RMatrix,
}

impl LinearMap {
    pub fn new(matrix: RMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::shape("ragged linear map rows"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Ok(Self::new(RMatrix::from_row_slice(m, n, &flat)))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(RMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    /// Output dimension `m`.
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Input dimension `n`.
    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// `self ∘ inner`: first apply `inner`, then `self`.
    pub fn after(&self, inner: &LinearMap) -> Result<Self> {
        if self.ncols() != inner.nrows() {
            return Err(Error::shape(format!(
                "cannot compose {}x{} after {}x{}",
                self.nrows(),
                self.ncols(),
                inner.nrows(),
                inner.ncols()
            )));
        }
        Ok(Self::new(&self.matrix * &inner.matrix))
    }
}

/// Complex symmetric (not Hermitian) bilinear form `B` on the model space,
/// with positive semidefinite imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    space: Arc<ModelSpace>,
    matrix: CMatrix,
    strictly_positive: bool,
}

impl BilinearForm {
    pub fn new(space: Arc<ModelSpace>, matrix: CMatrix) -> Result<Self> {
        let dim = space.dim();
        if matrix.shape() != (dim, dim) {
            return Err(Error::shape(format!(
                "form is {}x{}, space dim is {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("form has non-finite entries".into()));
        }
        let scale = linalg::max_abs(&matrix);
        let asym = linalg::max_abs(&(&matrix - matrix.transpose()));
        if asym > TOL_SYM * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Domain(format!(
                "form is not symmetric (max |B - Bᵀ| = {asym:.3e})"
            )));
        }
        let im = linalg::imag_part(&matrix);
        let im_scale = im.amax();
        let lambda_min = linalg::sym_min_eigenvalue(&im);
        if lambda_min < -TOL_PSD * im_scale {
            return Err(Error::Domain(format!(
                "imaginary part is not positive semidefinite (smallest eigenvalue {lambda_min:.3e})"
            )));
        }
        let strictly_positive = im_scale > 0.0 && lambda_min > TOL_PSD * im_scale;
        Ok(Self {
            space,
            matrix,
            strictly_positive,
        })
    }

    pub fn from_real(space: Arc<ModelSpace>, matrix: &RMatrix) -> Result<Self> {
        Self::new(space, linalg::to_complex(matrix))
    }

    /// `B = i·C` for a real symmetric `C`.
    pub fn imaginary(space: Arc<ModelSpace>, c: &RMatrix) -> Result<Self> {
        Self::new(space, c.map(|x| Complex64::new(0.0, x)))
    }

    pub fn space(&self) -> &Arc<ModelSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Whether `Im B` is positive definite, not merely semidefinite.
    pub fn strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    /// `B(φ, ψ) = φᵀ B ψ`, bilinear (no conjugation).
    pub fn eval(&self, phi: &TestFunction, psi: &TestFunction) -> Result<Complex64> {
        let g = restrict_form(self, &[phi.clone(), psi.clone()])?;
        Ok(g[(0, 1)])
    }
}

/// `π′(c) = Σᵢ cᵢ φᵢ`, the dual map `ℝⁿ′ → S` applied to a covector.
pub fn apply_projection_dual(proj: &Projection, covector: &[f64]) -> Result<TestFunction> {
    if covector.len() != proj.len() {
        return Err(Error::shape(format!(
            "covector has length {}, projection has {} rows",
            covector.len(),
            proj.len()
        )));
    }
    let c = nalgebra::DVector::from_column_slice(covector);
    let coeffs = proj.matrix().tr_mul(&c);
    TestFunction::real(proj.space().clone(), coeffs.as_slice())
}

/// Gram matrix `G_ab = B(ψ_a, ψ_b)` of the form restricted to `funcs`.
pub fn restrict_form(form: &BilinearForm, funcs: &[TestFunction]) -> Result<CMatrix> {
    if let Some(f) = funcs.iter().find(|f| f.space() != form.space()) {
        return Err(Error::shape(format!(
            "test function of dim {} does not live in the form's space (dim {})",
            f.space().dim(),
            form.space().dim()
        )));
    }
    let dim = form.space().dim();
    let psi = CMatrix::from_fn(funcs.len(), dim, |a, j| funcs[a].coeffs()[j]);
    let g = &psi * form.matrix() * psi.transpose();
    // Symmetrize away rounding so downstream code sees an exactly symmetric Gram.
    Ok((&g + g.transpose()) * Complex64::new(0.5, 0.0))
}
