//! The complex Gaussian distribution with covariance form `B` (`Im B > 0`),
//! its pure-imaginary limit, Green functions, and generating functional.
//!
//! For a projection `π` with rows `φ₁…φₙ`, the rows are factored as
//! `φᵢ = Σⱼ ρᵢⱼ ψⱼ` with linearly independent `ψ`. On the image ℝᵏ of the
//! surjective factor the distribution has density
//!
//! ```text
//! √det(i G⁻¹ / 2π) · exp(−(i/2) sᵀ G⁻¹ s),      G_ab = B(ψ_a, ψ_b),
//! ```
//!
//! whose pair value (second moment) is `C = (i G⁻¹)⁻¹ = −i G`. All higher
//! moments follow from Wick's theorem, and `μ_π` is the pushforward along `ρ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, I};
use crate::model::{restrict_form, BilinearForm, LinearMap, Projection, TestFunction};
use crate::moments::{
    check_convergence, project, pushforward, ConvergenceReport, CylDistribution, MomentFunctional,
    DEFAULT_MAX_DEGREE,
};
use crate::oracle::{self, QuadratureConfig};
use crate::polytensor::{sorted_tuples, wick_pairings, Polynomial, SymTensor, MAX_WICK_ORDER};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Default ε-schedule for the pure-imaginary limit.
pub const DEFAULT_EPS_SCHEDULE: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
/// Growth factor of the precision-matrix slope across the schedule beyond
/// which the regularized family is declared divergent.
pub const DIVERGENCE_GROWTH: f64 = 3.0;
/// Tolerance attached to the raw-family convergence report.
pub const DEFAULT_REPORT_TOL: f64 = 0.1;

/// Complex Gaussian with covariance form `B`, `Im B` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    form: BilinearForm,
    max_degree: usize,
}

impl GaussianSpec {
    pub fn new(form: BilinearForm, max_degree: usize) -> Result<Self> {
        if !form.strictly_positive() {
            return Err(Error::Domain(
                "complex Gaussian needs a positive definite imaginary part".into(),
            ));
        }
        if max_degree > MAX_WICK_ORDER {
            return Err(Error::Resource(format!(
                "truncation degree {max_degree} exceeds the Wick cap {MAX_WICK_ORDER}"
            )));
        }
        Ok(Self { form, max_degree })
    }

    pub fn with_default_degree(form: BilinearForm) -> Result<Self> {
        Self::new(form, DEFAULT_MAX_DEGREE)
    }

    pub fn form(&self) -> &BilinearForm {
        &self.form
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }
}

/// `π = ρ ∘ π₁` with `ρ: ℝᵏ → ℝⁿ` injective and `π₁` given by independent
/// test functions `ψ₁…ψₖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredProjection {
    rho: RMatrix,
    basis: Vec<TestFunction>,
}

impl FactoredProjection {
    pub fn rho(&self) -> &RMatrix {
        &self.rho
    }

    pub fn basis(&self) -> &[TestFunction] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

pub fn factor_projection(pi: &Projection) -> Result<FactoredProjection> {
    let rows = pi.matrix();
    let (rho, psi) = linalg::rank_factor(rows, RANK_TOL);
    let max_row = (0..rows.nrows())
        .map(|i| rows.row(i).norm())
        .fold(0.0, f64::max);
    let residual = (&rho * &psi - rows).amax();
    if residual > RANK_TOL * max_row.max(f64::MIN_POSITIVE) && max_row > 0.0 {
        return Err(Error::NumericalDegeneracy(format!(
            "rank factorization reconstructs rows only to {residual:.3e}"
        )));
    }
    let basis = (0..psi.nrows())
        .map(|j| {
            let coeffs: Vec<f64> = psi.row(j).iter().copied().collect();
            TestFunction::real(pi.space().clone(), &coeffs)
        })
        .collect::<Result<_>>()?;
    Ok(FactoredProjection { rho, basis })
}

/// Continuous branch of `√det M` on matrices with positive definite Hermitian
/// part, normalized by `√det I = 1`.
///
/// A positive definite Hermitian part keeps the numerical range, hence every
/// eigenvalue, in the open right half-plane, where the principal square root
/// is continuous. The product of principal roots of the eigenvalues is
/// therefore continuous on the whole (convex, connected) domain and equals 1
/// at the identity.
pub fn sqrt_det_branch(m: &CMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::shape(format!("{}x{} matrix has no determinant", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let lambda_min = linalg::hermitian_min_eigenvalue(m);
    if lambda_min <= 0.0 || !lambda_min.is_finite() {
        return Err(Error::Domain(format!(
            "Hermitian part is not positive definite (smallest eigenvalue {lambda_min:.3e})"
        )));
    }
    Ok(linalg::complex_eigenvalues(m)
        .into_iter()
        .map(|z| z.sqrt())
        .product())
}

/// Normalized centered Gaussian moments with pair value `pair`, by Wick's
/// theorem: `M_{2m}[j₁…j_{2m}] = Σ_matchings Π pair[j_a, j_b]`, odd moments 0.
pub fn wick_moments(pair: &CMatrix, max_degree: usize) -> Result<MomentFunctional> {
    let k = pair.nrows();
    let mut tensors = Vec::with_capacity(max_degree + 1);
    tensors.push(SymTensor::scalar(k, Complex64::new(1.0, 0.0)));
    for r in 1..=max_degree {
        let mut t = SymTensor::zeros(k, r);
        if r % 2 == 0 {
            let matchings = wick_pairings(r)?;
            for key in sorted_tuples(k, r) {
                let value: Complex64 = matchings
                    .pairings()
                    .iter()
                    .map(|m| m.iter().map(|&(a, b)| pair[(key[a], key[b])]).product::<Complex64>())
                    .sum();
                t.set(&key, value)?;
            }
        }
        tensors.push(t);
    }
    MomentFunctional::new(k, tensors)
}

fn check_imaginary_part_positive(g: &CMatrix, what: &str) -> Result<()> {
    let lambda_min = linalg::sym_min_eigenvalue(&linalg::imag_part(g));
    if lambda_min <= 0.0 {
        return Err(Error::NumericalDegeneracy(format!(
            "{what} has imaginary part with smallest eigenvalue {lambda_min:.3e}"
        )));
    }
    Ok(())
}

/// `μ_π` for the complex Gaussian, through the factorization `π = ρ ∘ π₁`.
pub fn gaussian_project(spec: &GaussianSpec, pi: &Projection) -> Result<MomentFunctional> {
    if pi.space() != spec.form().space() {
        return Err(Error::shape("projection and form live on different model spaces"));
    }
    let factored = factor_projection(pi)?;
    if factored.rank() == 0 {
        return Ok(MomentFunctional::delta(pi.len(), spec.max_degree()));
    }
    let gram = restrict_form(spec.form(), factored.basis())?;
    check_imaginary_part_positive(&gram, "restricted Gram matrix")?;
    let on_image = wick_moments(&(gram * -I), spec.max_degree())?;
    pushforward(&LinearMap::new(factored.rho().clone()), &on_image)
}

/// `μ_π` computed without factoring: Wick's theorem applied directly to the
/// (possibly singular) `n×n` Gram matrix of the projection rows.
pub fn gaussian_project_unfactored(spec: &GaussianSpec, pi: &Projection) -> Result<MomentFunctional> {
    if pi.space() != spec.form().space() {
        return Err(Error::shape("projection and form live on different model spaces"));
    }
    let rows: Vec<TestFunction> = pi.rows().collect();
    let gram = restrict_form(spec.form(), &rows)?;
    wick_moments(&(gram * -I), spec.max_degree())
}

/// `√det(iG⁻¹/2π) · ∫ exp(−(i/2) sᵀG⁻¹s) ds`, which must equal 1. The
/// integral is evaluated by grid quadrature, so this checks the branch of
/// the square root against an independent computation.
pub fn partition_function(gram: &CMatrix, cfg: &QuadratureConfig) -> Result<Complex64> {
    let k = gram.nrows();
    check_imaginary_part_positive(gram, "Gram matrix").map_err(|e| Error::Domain(e.to_string()))?;
    let inv = linalg::inverse(gram).ok_or_else(|| Error::Singular("Gram matrix".into()))?;
    let prefactor = sqrt_det_branch(&(inv * (I / (2.0 * std::f64::consts::PI))))?;
    let one = Polynomial::constant(k, Complex64::new(1.0, 0.0));
    let raw = oracle::raw_integrals(gram, std::slice::from_ref(&one), cfg)?;
    Ok(prefactor * raw[0])
}

/// `F_k = i^k M_k`, the `k`-th Green function in the full model basis.
pub fn green_function(mu: &CylDistribution, k: usize) -> Result<SymTensor> {
    if k > mu.max_degree() {
        return Err(Error::Truncation {
            requested: k,
            max: mu.max_degree(),
        });
    }
    let full = project(mu, &Projection::identity(mu.space().clone()))?;
    Ok(full.tensor(k)?.scale(I.powu(k as u32)))
}

/// Green functions `F₀, …, F_k` from a single full-basis projection.
pub fn green_functions(mu: &CylDistribution, k: usize) -> Result<Vec<SymTensor>> {
    if k > mu.max_degree() {
        return Err(Error::Truncation {
            requested: k,
            max: mu.max_degree(),
        });
    }
    let full = project(mu, &Projection::identity(mu.space().clone()))?;
    Ok(full.tensors()[..=k]
        .iter()
        .enumerate()
        .map(|(r, t)| t.scale(I.powu(r as u32)))
        .collect())
}

/// Truncated Taylor series of the generating functional at `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratingSeries {
    /// `(k, (i^k/k!)·⟨M_k, φ^{⊗k}⟩)` for `k = 0..=D`.
    pub terms: Vec<(usize, Complex64)>,
    pub value: Complex64,
}

/// `Z_D(φ) = Σ_{k≤D} (i^k/k!) ⟨M_k, φ^{⊗k}⟩`.
pub fn generating_functional(
    mu: &CylDistribution,
    phi: &TestFunction,
    degree: usize,
) -> Result<GeneratingSeries> {
    if !phi.is_real() {
        return Err(Error::Domain("generating functional needs a real test function".into()));
    }
    if phi.space() != mu.space() {
        return Err(Error::shape("test function lives on a different model space"));
    }
    if degree > mu.max_degree() {
        return Err(Error::Truncation {
            requested: degree,
            max: mu.max_degree(),
        });
    }
    let full = project(mu, &Projection::identity(mu.space().clone()))?;
    let mut factorial = 1.0;
    let mut terms = Vec::with_capacity(degree + 1);
    for k in 0..=degree {
        if k > 0 {
            factorial *= k as f64;
        }
        let c = I.powu(k as u32) / factorial * full.tensors()[k].contract_power(phi.coeffs())?;
        terms.push((k, c));
    }
    let value = terms.iter().map(|(_, c)| c).sum();
    Ok(GeneratingSeries { terms, value })
}

/// Closed form `exp((i/2) B(φ, φ))` of the Gaussian generating functional.
pub fn closed_form_generating(spec: &GaussianSpec, phi: &TestFunction) -> Result<Complex64> {
    Ok((I * 0.5 * spec.form().eval(phi, phi)?).exp())
}

/// Real symmetric form regularized as `B_real + iε·E` and sent to ε → 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ImaginaryGaussianSpec {
    form_real: BilinearForm,
    regularizer: RMatrix,
    schedule: Vec<f64>,
    order: usize,
    max_degree: usize,
    report_tol: f64,
}

impl ImaginaryGaussianSpec {
    /// Defaults: `E = I`, first-order extrapolation, `D = 8`.
    pub fn new(form_real: BilinearForm, schedule: Vec<f64>) -> Result<Self> {
        let dim = form_real.space().dim();
        let scale = linalg::max_abs(form_real.matrix());
        if form_real.matrix().iter().any(|z| z.im.abs() > 1e-12 * scale.max(1.0)) {
            return Err(Error::Domain("pure-imaginary limit needs a real form".into()));
        }
        let spec = Self {
            form_real,
            regularizer: RMatrix::identity(dim, dim),
            schedule,
            order: 1,
            max_degree: DEFAULT_MAX_DEGREE,
            report_tol: DEFAULT_REPORT_TOL,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_default_schedule(form_real: BilinearForm) -> Result<Self> {
        Self::new(form_real, DEFAULT_EPS_SCHEDULE.to_vec())
    }

    pub fn with_regularizer(mut self, regularizer: RMatrix) -> Result<Self> {
        let dim = self.form_real.space().dim();
        if regularizer.shape() != (dim, dim) {
            return Err(Error::shape("regularizer must match the model dimension"));
        }
        if (&regularizer - regularizer.transpose()).amax() > 1e-12 * regularizer.amax()
            || linalg::sym_min_eigenvalue(&regularizer) <= 0.0
        {
            return Err(Error::Domain("regularizer must be symmetric positive definite".into()));
        }
        self.regularizer = regularizer;
        Ok(self)
    }

    pub fn with_order(mut self, order: usize) -> Result<Self> {
        self.order = order;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Result<Self> {
        if max_degree > MAX_WICK_ORDER {
            return Err(Error::Resource(format!(
                "truncation degree {max_degree} exceeds the Wick cap {MAX_WICK_ORDER}"
            )));
        }
        self.max_degree = max_degree;
        Ok(self)
    }

    pub fn with_report_tol(mut self, tol: f64) -> Self {
        self.report_tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        let s = &self.schedule;
        if s.is_empty() {
            return Err(Error::Invalid("ε-schedule is empty".into()));
        }
        if s.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::Invalid("ε-schedule entries must be positive".into()));
        }
        if s.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Invalid("ε-schedule must be strictly decreasing".into()));
        }
        if s.len() > 1 && s.len() < (self.order + 2).max(3) {
            return Err(Error::InsufficientData(format!(
                "order-{} extrapolation needs at least {} ε values, got {}",
                self.order,
                (self.order + 2).max(3),
                s.len()
            )));
        }
        Ok(())
    }

    pub fn form_real(&self) -> &BilinearForm {
        &self.form_real
    }

    pub fn regularizer(&self) -> &RMatrix {
        &self.regularizer
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The regularized Gaussian at a fixed ε.
    pub fn at(&self, eps: f64) -> Result<GaussianSpec> {
        let b = self.form_real.matrix()
            + self.regularizer.map(|x| Complex64::new(0.0, eps * x));
        let form = BilinearForm::new(self.form_real.space().clone(), b)?;
        GaussianSpec::new(form, self.max_degree)
    }
}

/// Diagnostics of the ε → 0 extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDiagnostics {
    /// Cauchy deltas of the raw regularized family.
    pub convergence: ConvergenceReport,
    /// Per-degree largest residual estimate of the entrywise extrapolation.
    pub extrapolation_residuals: Vec<f64>,
    /// `max |G_ε⁻¹ − G_ε′⁻¹| / |ε − ε′|` for consecutive schedule entries,
    /// where `G_ε` is the Gram matrix on the factored image.
    pub precision_slopes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitResult {
    pub functional: MomentFunctional,
    /// The regularized functional at each ε of the schedule.
    pub samples: Vec<(f64, MomentFunctional)>,
    /// Absent for single-ε passthrough.
    pub diagnostics: Option<LimitDiagnostics>,
}

/// The pure-imaginary Gaussian `μ_π`: regularized moments at every ε of the
/// schedule, extrapolated entrywise to ε = 0.
pub fn imaginary_project(spec: &ImaginaryGaussianSpec, pi: &Projection) -> Result<LimitResult> {
    let schedule = spec.schedule();
    let samples: Vec<(f64, MomentFunctional)> = schedule
        .par_iter()
        .map(|&eps| Ok((eps, gaussian_project(&spec.at(eps)?, pi)?)))
        .collect::<Result<_>>()?;

    if samples.len() == 1 {
        return Ok(LimitResult {
            functional: samples[0].1.clone(),
            samples,
            diagnostics: None,
        });
    }

    let family: Vec<MomentFunctional> = samples.iter().map(|(_, m)| m.clone()).collect();
    let convergence = check_convergence(&family, spec.report_tol)?;

    let factored = factor_projection(pi)?;
    let precisions: Vec<CMatrix> = schedule
        .iter()
        .map(|&eps| {
            let gram = restrict_form(spec.at(eps)?.form(), factored.basis())?;
            linalg::inverse(&gram).ok_or_else(|| Error::Singular("regularized Gram matrix".into()))
        })
        .collect::<Result<_>>()?;
    let precision_slopes: Vec<f64> = precisions
        .windows(2)
        .zip(schedule.windows(2))
        .map(|(p, e)| linalg::max_abs(&(&p[1] - &p[0])) / (e[0] - e[1]))
        .collect();
    if let (Some(&first), Some(&last)) = (precision_slopes.first(), precision_slopes.last()) {
        if precision_slopes.len() >= 2 && last > DIVERGENCE_GROWTH * first && last > 1e-12 {
            return Err(Error::Convergence {
                reason: format!(
                    "regularized precision matrix blows up as ε → 0 (slope grew from {first:.3e} to {last:.3e}); \
                     the real form is singular on the projected subspace"
                ),
                deltas: convergence.final_deltas.clone(),
            });
        }
    }

    let nvars = pi.len();
    let mut tensors = Vec::with_capacity(spec.max_degree() + 1);
    let mut extrapolation_residuals = Vec::with_capacity(spec.max_degree() + 1);
    for k in 0..=spec.max_degree() {
        let mut keys: Vec<&Vec<usize>> = family.iter().flat_map(|m| m.tensors()[k].entries().keys()).collect();
        keys.sort();
        keys.dedup();
        let mut t = SymTensor::zeros(nvars, k);
        let mut worst: f64 = 0.0;
        for key in keys {
            let values: Vec<(f64, Complex64)> = samples
                .iter()
                .map(|(eps, m)| (*eps, m.tensors()[k].get(key)))
                .collect();
            let fit = oracle::extrapolate_eps(&values, spec.order())?;
            worst = worst.max(fit.residual_estimate);
            t.set(key, fit.value)?;
        }
        if k == 0 {
            // Every member is normalized; keep the limit exactly so.
            t = SymTensor::scalar(nvars, Complex64::new(1.0, 0.0));
        }
        tensors.push(t);
        extrapolation_residuals.push(worst);
    }

    Ok(LimitResult {
        functional: MomentFunctional::new(nvars, tensors)?,
        samples,
        diagnostics: Some(LimitDiagnostics {
            convergence,
            extrapolation_residuals,
            precision_slopes,
        }),
    })
}
