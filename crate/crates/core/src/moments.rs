//! Moment functionals on `Pol(ℝⁿ)` and the distribution axioms: evaluation,
//! pushforward along linear maps, the compatibility residual, and moment-wise
//! convergence of families.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianSpec, ImaginaryGaussianSpec};
use crate::linalg::{RMatrix, I};
use crate::model::{LinearMap, ModelSpace, Projection};
use crate::polytensor::{compose_linear, fourier_poly, poly_from_tensors, Polynomial, SymTensor};

/// Default truncation degree `D` of the carried moment series.
pub const DEFAULT_MAX_DEGREE: usize = 8;

/// Element of `Pol(ℝⁿ)′` truncated at degree `D`, stored as its moment
/// tensors `M₀, …, M_D` (`M_k` has rank `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFunctional {
    nvars: usize,
    tensors: Vec<SymTensor>,
}

impl MomentFunctional {
    pub fn new(nvars: usize, tensors: Vec<SymTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Invalid("moment functional needs at least M₀".into()));
        }
        for (k, t) in tensors.iter().enumerate() {
            if t.rank() != k || t.nvars() != nvars {
                return Err(Error::shape(format!(
                    "slot {k} holds a rank-{} tensor over {} vars, expected rank {k} over {nvars}",
                    t.rank(),
                    t.nvars()
                )));
            }
        }
        Ok(Self { nvars, tensors })
    }

    /// The point mass at the origin: `M₀ = 1`, all higher moments zero.
    pub fn delta(nvars: usize, max_degree: usize) -> Self {
        let mut tensors: Vec<SymTensor> = (0..=max_degree).map(|k| SymTensor::zeros(nvars, k)).collect();
        tensors[0] = SymTensor::scalar(nvars, Complex64::new(1.0, 0.0));
        Self { nvars, tensors }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_degree(&self) -> usize {
        self.tensors.len() - 1
    }

    pub fn tensors(&self) -> &[SymTensor] {
        &self.tensors
    }

    pub fn tensor(&self, k: usize) -> Result<&SymTensor> {
        self.tensors.get(k).ok_or(Error::Truncation {
            requested: k,
            max: self.max_degree(),
        })
    }

    pub fn tensor_mut(&mut self, k: usize) -> Result<&mut SymTensor> {
        let max = self.max_degree();
        self.tensors
            .get_mut(k)
            .ok_or(Error::Truncation { requested: k, max })
    }

    /// `M₀`, the value on the constant polynomial 1.
    pub fn total_mass(&self) -> Complex64 {
        self.tensors[0].get(&[])
    }

    /// Largest entrywise difference over all degrees.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.nvars != other.nvars || self.max_degree() != other.max_degree() {
            return Err(Error::shape(format!(
                "comparing functionals ({} vars, D={}) and ({} vars, D={})",
                self.nvars,
                self.max_degree(),
                other.nvars,
                other.max_degree()
            )));
        }
        self.tensors
            .iter()
            .zip(&other.tensors)
            .try_fold(0.0f64, |acc, (a, b)| Ok(acc.max(a.max_abs_diff(b)?)))
    }
}

/// `μ_π(P)`: pairs the coefficient tensors of `P` with the moment tensors.
pub fn evaluate(mu: &MomentFunctional, p: &Polynomial) -> Result<Complex64> {
    if p.nvars() != mu.nvars() {
        return Err(Error::shape(format!(
            "polynomial in {} vars against a functional on ℝ^{}",
            p.nvars(),
            mu.nvars()
        )));
    }
    if p.degree() > mu.max_degree() {
        return Err(Error::Truncation {
            requested: p.degree(),
            max: mu.max_degree(),
        });
    }
    fourier_poly(p)
        .iter()
        .zip(mu.tensors())
        .try_fold(Complex64::default(), |acc, (t, m)| Ok(acc + m.pair(t)?))
}

/// `λ_* μ` for `λ: ℝⁿ → ℝᵐ`, so that `(λ_*μ)(P) = μ(P ∘ λ)`.
///
/// Tensor-wise this is `M′_k = λ^{⊗k} M_k`; it is computed through the
/// homogeneous moment polynomial `x ↦ ⟨M_k, x^{⊗k}⟩`, which transforms by
/// precomposition with `λᵀ`.
pub fn pushforward(lambda: &LinearMap, mu: &MomentFunctional) -> Result<MomentFunctional> {
    if lambda.ncols() != mu.nvars() {
        return Err(Error::shape(format!(
            "linear map expects ℝ^{}, functional lives on ℝ^{}",
            lambda.ncols(),
            mu.nvars()
        )));
    }
    let m = lambda.nrows();
    if lambda.ncols() == m && *lambda.matrix() == RMatrix::identity(m, m) {
        return Ok(mu.clone());
    }
    if mu.nvars() == 0 {
        let mut out = MomentFunctional::delta(m, mu.max_degree());
        out.tensors[0] = SymTensor::scalar(m, mu.total_mass());
        return Ok(out);
    }
    let transpose = LinearMap::new(lambda.matrix().transpose());
    let mut tensors = Vec::with_capacity(mu.tensors().len());
    for (k, t) in mu.tensors().iter().enumerate() {
        if k == 0 {
            tensors.push(SymTensor::scalar(m, t.get(&[])));
            continue;
        }
        let q = poly_from_tensors(std::slice::from_ref(t))?;
        let q = compose_linear(&q, &transpose)?;
        let mut parts = fourier_poly(&q);
        let tensor = if parts.len() > k {
            parts.swap_remove(k)
        } else {
            SymTensor::zeros(m, k)
        };
        tensors.push(tensor);
    }
    MomentFunctional::new(m, tensors)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind {
    /// Complex Gaussian with `Im B` positive definite.
    Gaussian(GaussianSpec),
    /// Real Gaussian measure with covariance `C`, embedded as `B = i·C`.
    MeasureBacked {
        covariance: RMatrix,
        embedded: GaussianSpec,
    },
    /// Regularized family `B_real + iε·E`, extrapolated to ε → 0.
    LimitFamily(ImaginaryGaussianSpec),
}

/// A cylindrical distribution: produces a moment functional for every
/// projection of the model space.
#[derive(Debug, Clone, PartialEq)]
pub struct CylDistribution {
    kind: DistributionKind,
}

impl CylDistribution {
    pub fn gaussian(spec: GaussianSpec) -> Self {
        Self {
            kind: DistributionKind::Gaussian(spec),
        }
    }

    pub fn limit_family(spec: ImaginaryGaussianSpec) -> Self {
        Self {
            kind: DistributionKind::LimitFamily(spec),
        }
    }

    pub(crate) fn measure_backed(covariance: RMatrix, embedded: GaussianSpec) -> Self {
        Self {
            kind: DistributionKind::MeasureBacked {
                covariance,
                embedded,
            },
        }
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn space(&self) -> &Arc<ModelSpace> {
        match &self.kind {
            DistributionKind::Gaussian(s) | DistributionKind::MeasureBacked { embedded: s, .. } => {
                s.form().space()
            }
            DistributionKind::LimitFamily(s) => s.form_real().space(),
        }
    }

    pub fn max_degree(&self) -> usize {
        match &self.kind {
            DistributionKind::Gaussian(s) | DistributionKind::MeasureBacked { embedded: s, .. } => {
                s.max_degree()
            }
            DistributionKind::LimitFamily(s) => s.max_degree(),
        }
    }
}

/// `μ_π` for the given projection.
pub fn project(mu: &CylDistribution, pi: &Projection) -> Result<MomentFunctional> {
    if pi.space() != mu.space() {
        return Err(Error::shape("projection and distribution live on different model spaces"));
    }
    match mu.kind() {
        DistributionKind::Gaussian(spec)
        | DistributionKind::MeasureBacked { embedded: spec, .. } => {
            gaussian::gaussian_project(spec, pi)
        }
        DistributionKind::LimitFamily(spec) => {
            gaussian::imaginary_project(spec, pi).map(|r| r.functional)
        }
    }
}

/// Residual of the compatibility condition `μ_{λ∘π} = λ_* μ_π`: the largest
/// entrywise deviation over all degrees. Zero (to rounding) for every
/// genuine distribution.
pub fn check_compatibility(mu: &CylDistribution, pi: &Projection, lambda: &LinearMap) -> Result<f64> {
    let composed = project(mu, &pi.then(lambda)?)?;
    let pushed = pushforward(lambda, &project(mu, pi)?)?;
    composed.max_abs_diff(&pushed)
}

/// `F_k μ` paired with `g`: `i^k · ⟨M_k, g⟩` with `M_k` taken in the full
/// model basis.
pub fn pair_green(mu: &CylDistribution, k: usize, g: &SymTensor) -> Result<Complex64> {
    if k > mu.max_degree() {
        return Err(Error::Truncation {
            requested: k,
            max: mu.max_degree(),
        });
    }
    if g.rank() != k || g.nvars() != mu.space().dim() {
        return Err(Error::shape(format!(
            "test tensor of rank {} over {} coordinates, expected rank {k} over {}",
            g.rank(),
            g.nvars(),
            mu.space().dim()
        )));
    }
    let full = project(mu, &Projection::identity(mu.space().clone()))?;
    Ok(I.powu(k as u32) * full.tensor(k)?.pair(g)?)
}

/// Moment-wise Cauchy diagnostics of a family of functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `deltas[k][j] = max |M_k^{(j+1)} − M_k^{(j)}|`.
    pub deltas: Vec<Vec<f64>>,
    pub final_deltas: Vec<f64>,
    pub tol: f64,
    pub converged: bool,
}

pub fn check_convergence(family: &[MomentFunctional], tol: f64) -> Result<ConvergenceReport> {
    if family.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "convergence check needs at least 3 functionals, got {}",
            family.len()
        )));
    }
    let (n, d) = (family[0].nvars(), family[0].max_degree());
    if family.iter().any(|f| f.nvars() != n || f.max_degree() != d) {
        return Err(Error::shape("family members differ in arity or truncation degree"));
    }
    let mut deltas = vec![Vec::with_capacity(family.len() - 1); d + 1];
    for pair in family.windows(2) {
        for (k, row) in deltas.iter_mut().enumerate() {
            row.push(pair[1].tensors()[k].max_abs_diff(&pair[0].tensors()[k])?);
        }
    }
    let final_deltas: Vec<f64> = deltas.iter().map(|row| *row.last().expect("non-empty")).collect();
    let converged = final_deltas.iter().all(|&x| x < tol);
    Ok(ConvergenceReport {
        deltas,
        final_deltas,
        tol,
        converged,
    })
}
