//! Small dense linear-algebra helpers shared by the numeric modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub(crate) fn real_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.re)
}

pub(crate) fn imag_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.im)
}

/// Smallest eigenvalue of the symmetric part of a real square matrix.
pub fn sym_min_eigenvalue(m: &RMatrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of the Hermitian part `(M + Mᴴ)/2`.
pub fn hermitian_min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a general complex square matrix, read off the diagonal of
/// its complex Schur form.
pub(crate) fn complex_eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn inverse(m: &CMatrix) -> Option<CMatrix> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    m.clone().try_inverse()
}

/// Thin rank-revealing factorization `A = L · R` of a real `n×N` matrix with
/// `L` of full column rank and `R` having orthonormal rows.
///
/// Singular values below `rel_tol · σ_max` count as zero.
pub(crate) fn rank_factor(a: &RMatrix, rel_tol: f64) -> (RMatrix, RMatrix) {
    let (n, cols) = a.shape();
    if n == 0 || cols == 0 {
        return (RMatrix::zeros(n, 0), RMatrix::zeros(0, cols));
    }
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("requested Vᵀ");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&j| sigma_max > 0.0 && sigma[j] > rel_tol * sigma_max)
        .collect();
    let k = kept.len();
    let mut right = RMatrix::zeros(k, cols);
    for (slot, &j) in kept.iter().enumerate() {
        let mut row: DVector<f64> = v_t.row(j).transpose().into_owned();
        // Sign convention: first significant entry of each basis row is positive.
        if let Some(first) = row.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                row = -row;
            }
        }
        right.set_row(slot, &row.transpose());
    }
    // The SVD iteration stops with off-diagonal residue near 1e-12, so `U·Σ`
    // reproduces `A` only to that level. Projecting onto the orthonormal rows
    // is exact to rounding.
    let left = a * right.transpose();
    (left, right)
}
