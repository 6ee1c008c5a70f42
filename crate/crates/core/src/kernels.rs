//! Ready-made covariance forms: the free lattice scalar field on a periodic
//! chain, in Euclidean and Minkowski signature, and real Gaussian measures.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianSpec, ImaginaryGaussianSpec};
use crate::linalg::{self, RMatrix};
use crate::model::{BilinearForm, ModelSpace};
use crate::moments::{CylDistribution, DEFAULT_MAX_DEGREE};

/// Periodic one-dimensional lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub sites: usize,
    pub spacing: f64,
    pub mass: f64,
}

impl LatticeSpec {
    pub fn new(sites: usize, spacing: f64, mass: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::Invalid(format!("lattice needs at least 2 sites, got {sites}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Invalid(format!("lattice spacing must be positive, got {spacing}")));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::Invalid(format!("mass must be nonnegative, got {mass}")));
        }
        Ok(Self {
            sites,
            spacing,
            mass,
        })
    }

    pub fn space(&self) -> Result<Arc<ModelSpace>> {
        ModelSpace::with_labels((0..self.sites).map(|j| format!("site{j}")).collect())
    }

    /// `−Δ_h + m²`, with `−Δ_h = (2δ_{jk} − δ_{j,k+1} − δ_{j,k−1}) / h²` (indices mod N).
    pub fn operator(&self) -> RMatrix {
        let n = self.sites;
        let inv_h2 = 1.0 / (self.spacing * self.spacing);
        let mut k = RMatrix::from_diagonal_element(n, n, 2.0 * inv_h2 + self.mass * self.mass);
        for j in 0..n {
            k[(j, (j + 1) % n)] -= inv_h2;
            k[(j, (j + n - 1) % n)] -= inv_h2;
        }
        k
    }

    /// The propagator `(−Δ_h + m²)⁻¹`.
    pub fn propagator(&self) -> Result<RMatrix> {
        let op = self.operator();
        let lambda_min = linalg::sym_min_eigenvalue(&op);
        if lambda_min <= 1e-12 * op.amax() {
            return Err(Error::Singular(format!(
                "lattice operator has smallest eigenvalue {lambda_min:.3e} (massless constant mode)"
            )));
        }
        let inv = op
            .cholesky()
            .ok_or_else(|| Error::Singular("lattice operator".into()))?
            .inverse();
        Ok((&inv + inv.transpose()) * 0.5)
    }
}

/// Euclidean free field: `B = i·(−Δ_h + m²)⁻¹`.
pub fn klein_gordon_euclidean(spec: &LatticeSpec) -> Result<BilinearForm> {
    BilinearForm::imaginary(spec.space()?, &spec.propagator()?)
}

/// Minkowski free field: real form `(−Δ_h + m²)⁻¹` with the default ε-schedule.
pub fn klein_gordon_minkowski(spec: &LatticeSpec) -> Result<ImaginaryGaussianSpec> {
    let form = BilinearForm::from_real(spec.space()?, &spec.propagator()?)?;
    ImaginaryGaussianSpec::with_default_schedule(form)
}

/// Centered Gaussian probability measure with covariance `C`, as the
/// distribution with `B = i·C`.
pub fn real_gaussian_measure(space: Arc<ModelSpace>, covariance: &RMatrix) -> Result<CylDistribution> {
    real_gaussian_measure_with_degree(space, covariance, DEFAULT_MAX_DEGREE)
}

pub fn real_gaussian_measure_with_degree(
    space: Arc<ModelSpace>,
    covariance: &RMatrix,
    max_degree: usize,
) -> Result<CylDistribution> {
    let dim = space.dim();
    if covariance.shape() != (dim, dim) {
        return Err(Error::shape(format!(
            "covariance is {}x{}, space dim is {dim}",
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    if (covariance - covariance.transpose()).amax() > 1e-12 * covariance.amax() {
        return Err(Error::Domain("covariance is not symmetric".into()));
    }
    if linalg::sym_min_eigenvalue(covariance) <= 0.0 {
        return Err(Error::Domain("covariance is not positive definite".into()));
    }
    let form = BilinearForm::imaginary(space, covariance)?;
    let embedded = GaussianSpec::new(form, max_degree)?;
    Ok(CylDistribution::measure_backed(covariance.clone(), embedded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn two_site_propagator() {
        let spec = LatticeSpec::new(2, 1.0, 1.0).unwrap();
        assert_eq!(spec.operator(), RMatrix::from_row_slice(2, 2, &[3.0, -2.0, -2.0, 3.0]));
        let c = spec.propagator().unwrap();
        let expected = RMatrix::from_row_slice(2, 2, &[0.6, 0.4, 0.4, 0.6]);
        assert!((&c - &expected).amax() < 1e-15);
        let b = klein_gordon_euclidean(&spec).unwrap();
        assert!(b.strictly_positive());
        assert!((b.matrix()[(0, 1)] - Complex64::new(0.0, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn four_site_propagator_is_circulant() {
        let spec = LatticeSpec::new(4, 0.5, 0.7).unwrap();
        let c = spec.propagator().unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let shifted = c[((j + 1) % 4, (k + 1) % 4)];
                assert!((c[(j, k)] - shifted).abs() < 1e-14);
            }
        }
        assert!(linalg::sym_min_eigenvalue(&c) > 0.0);
    }

    #[test]
    fn massless_chain_is_singular() {
        let spec = LatticeSpec::new(3, 1.0, 0.0).unwrap();
        assert!(matches!(spec.propagator(), Err(Error::Singular(_))));
        assert!(LatticeSpec::new(1, 1.0, 1.0).is_err());
        assert!(LatticeSpec::new(3, 0.0, 1.0).is_err());
    }

    #[test]
    fn minkowski_kernel_is_real() {
        let spec = LatticeSpec::new(2, 1.0, 1.0).unwrap();
        let limit = klein_gordon_minkowski(&spec).unwrap();
        assert!((limit.form_real().matrix()[(0, 0)] - Complex64::new(0.6, 0.0)).norm() < 1e-15);
        assert_eq!(limit.schedule(), &[0.2, 0.1, 0.05, 0.025]);
    }

    #[test]
    fn measure_rejects_indefinite_covariance() {
        let space = ModelSpace::new(2).unwrap();
        let bad = RMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(real_gaussian_measure(space, &bad), Err(Error::Domain(_))));
    }
}
