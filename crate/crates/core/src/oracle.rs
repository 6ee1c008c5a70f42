//! Brute-force reference values: tensor-grid quadrature of the Gaussian
//! moment integral and polynomial extrapolation in ε.
//!
//! The quadrature evaluates
//!
//! ```text
//! √det(A/2π) · ∫_{ℝᵏ} P(s) exp(−½ sᵀA s) ds,      A = i·G⁻¹,
//! ```
//!
//! directly, with no moment combinatorics. For `Im G` positive definite,
//! `−i·G = Im G − i·Re G` has positive definite Hermitian part, and so does
//! its inverse `A`; since `A` is complex symmetric its Hermitian part is
//! `Re A`, so the integrand decays like `exp(−½ λ_min(Re A) |s|²)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::sqrt_det_branch;
use crate::linalg::{self, CMatrix, I};
use crate::polytensor::Polynomial;

/// Boundary-to-peak ratio above which the box is declared too small.
pub const BOX_DECAY_RATIO: f64 = 1e-10;
/// Largest Lebesgue constant tolerated by [`extrapolate_eps`].
pub const MAX_EXTRAPOLATION_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Odd, so the grid contains the origin.
    pub points_per_axis: usize,
    /// Half-width of the box in units of the slowest decay length.
    pub box_halfwidth_sigmas: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            points_per_axis: 2001,
            box_halfwidth_sigmas: 12.0,
        }
    }
}

impl QuadratureConfig {
    /// Default grid for `k` axes, keeping the point count tractable.
    pub fn for_dim(k: usize) -> Self {
        let points_per_axis = match k {
            0 | 1 => 2001,
            2 => 401,
            _ => 81,
        };
        Self {
            points_per_axis,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis < 3 || self.points_per_axis % 2 == 0 {
            return Err(Error::Invalid(format!(
                "points_per_axis must be odd and >= 3, got {}",
                self.points_per_axis
            )));
        }
        if !(self.box_halfwidth_sigmas > 0.0 && self.box_halfwidth_sigmas.is_finite()) {
            return Err(Error::Invalid("box half-width must be positive".into()));
        }
        Ok(())
    }
}

struct Grid {
    nodes: Vec<f64>,
    step: f64,
}

/// Per-slice partial results, reduced in slice order.
struct Partial {
    sums: Vec<Complex64>,
    peak: Vec<f64>,
    boundary: Vec<f64>,
}

/// Unnormalized integrals `∫ P(s) exp(−(i/2) sᵀG⁻¹s) ds` for several
/// polynomials at once, by the trapezoid rule on a tensor grid.
pub fn raw_integrals(gram: &CMatrix, polys: &[Polynomial], cfg: &QuadratureConfig) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let k = gram.nrows();
    if !gram.is_square() {
        return Err(Error::shape("Gram matrix must be square"));
    }
    if k > 3 {
        return Err(Error::UnsupportedDimension(k));
    }
    if let Some(p) = polys.iter().find(|p| p.nvars() != k) {
        return Err(Error::shape(format!(
            "polynomial in {} vars against a {k}-dimensional integral",
            p.nvars()
        )));
    }
    if k == 0 {
        return Ok(polys.iter().map(|p| p.coeff(&[])).collect());
    }
    let im_min = linalg::sym_min_eigenvalue(&linalg::imag_part(gram));
    if im_min <= 0.0 {
        return Err(Error::Domain(format!(
            "Gram matrix imaginary part is not positive definite (smallest eigenvalue {im_min:.3e})"
        )));
    }
    let inv = linalg::inverse(gram).ok_or_else(|| Error::Singular("Gram matrix".into()))?;
    let exponent = inv * I;
    let decay = linalg::sym_min_eigenvalue(&linalg::real_part(&exponent));
    if decay <= 0.0 {
        return Err(Error::Domain(format!(
            "integrand does not decay (smallest eigenvalue of Re A is {decay:.3e})"
        )));
    }
    let halfwidth = cfg.box_halfwidth_sigmas / decay.sqrt();
    let n = cfg.points_per_axis;
    let step = 2.0 * halfwidth / (n - 1) as f64;
    let grid = Grid {
        nodes: (0..n).map(|i| -halfwidth + i as f64 * step).collect(),
        step,
    };
    let max_deg = polys.iter().map(Polynomial::degree).max().unwrap_or(0);
    // powers[i][e] = x_i^e
    let powers: Vec<Vec<f64>> = grid
        .nodes
        .iter()
        .map(|&x| (0..=max_deg).scan(1.0, |acc, _| {
            let v = *acc;
            *acc *= x;
            Some(v)
        }).collect())
        .collect();
    // Each term as (coefficient, exponents), flattened per polynomial.
    let terms: Vec<Vec<(Complex64, Vec<usize>)>> = polys
        .iter()
        .map(|p| {
            p.terms()
                .iter()
                .map(|(a, c)| (*c, a.iter().map(|&e| e as usize).collect()))
                .collect()
        })
        .collect();

    let a: Vec<Complex64> = exponent.iter().copied().collect();
    let a_at = |r: usize, c: usize| a[r + c * k];
    let inner = if k == 1 { 1 } else { n.pow(k as u32 - 1) };
    let npolys = polys.len();

    let partials: Vec<Partial> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut part = Partial {
                sums: vec![Complex64::default(); npolys],
                peak: vec![0.0; npolys],
                boundary: vec![0.0; npolys],
            };
            let mut idx = vec![0usize; k];
            for flat in 0..inner {
                idx[0] = i0;
                let mut rest = flat;
                for slot in idx.iter_mut().skip(1).rev() {
                    *slot = rest % n;
                    rest /= n;
                }
                let mut quad = Complex64::default();
                for r in 0..k {
                    let xr = grid.nodes[idx[r]];
                    quad += a_at(r, r) * xr * xr;
                    for c in (r + 1)..k {
                        quad += a_at(r, c) * (2.0 * xr * grid.nodes[idx[c]]);
                    }
                }
                let weight = (-0.5 * quad).exp();
                let on_boundary = idx.iter().any(|&j| j == 0 || j == n - 1);
                for (p, poly_terms) in terms.iter().enumerate() {
                    let mut value = Complex64::default();
                    for (c, alpha) in poly_terms {
                        let mut mono = 1.0;
                        for (&e, &j) in alpha.iter().zip(&idx) {
                            mono *= powers[j][e];
                        }
                        value += c * mono;
                    }
                    let f = weight * value;
                    part.sums[p] += f;
                    // squared magnitudes; the ratio test takes the root at the end
                    let mag2 = f.norm_sqr();
                    if mag2 > part.peak[p] {
                        part.peak[p] = mag2;
                    }
                    if on_boundary && mag2 > part.boundary[p] {
                        part.boundary[p] = mag2;
                    }
                }
            }
            part
        })
        .collect();

    let volume = grid.step.powi(k as i32);
    let mut sums = vec![Complex64::default(); npolys];
    let mut peak = vec![0.0f64; npolys];
    let mut boundary = vec![0.0f64; npolys];
    for part in &partials {
        for p in 0..npolys {
            sums[p] += part.sums[p];
            peak[p] = peak[p].max(part.peak[p]);
            boundary[p] = boundary[p].max(part.boundary[p]);
        }
    }
    for p in 0..npolys {
        let ratio = (boundary[p] / peak[p]).sqrt();
        if peak[p] > 0.0 && ratio > BOX_DECAY_RATIO {
            return Err(Error::BoxTooSmall { ratio });
        }
    }
    Ok(sums.into_iter().map(|s| s * volume).collect())
}

/// Normalized moments `√det(iG⁻¹/2π) · ∫ P(s) exp(−(i/2) sᵀG⁻¹s) ds`.
pub fn integrate_moments(gram: &CMatrix, polys: &[Polynomial], cfg: &QuadratureConfig) -> Result<Vec<Complex64>> {
    let raw = raw_integrals(gram, polys, cfg)?;
    if gram.nrows() == 0 {
        return Ok(raw);
    }
    let inv = linalg::inverse(gram).ok_or_else(|| Error::Singular("Gram matrix".into()))?;
    let prefactor = sqrt_det_branch(&(inv * (I / (2.0 * std::f64::consts::PI))))?;
    Ok(raw.into_iter().map(|v| prefactor * v).collect())
}

pub fn integrate_moment(gram: &CMatrix, p: &Polynomial, cfg: &QuadratureConfig) -> Result<Complex64> {
    Ok(integrate_moments(gram, std::slice::from_ref(p), cfg)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub value: Complex64,
    /// Difference from the same-order extrapolation through the next window
    /// of samples.
    pub residual_estimate: f64,
    /// Lebesgue constant `Σ|Lⱼ(0)|` of the interpolation nodes used.
    pub condition: f64,
}

fn neville_at_zero(points: &[(f64, Complex64)]) -> Complex64 {
    let mut p: Vec<Complex64> = points.iter().map(|&(_, v)| v).collect();
    let x: Vec<f64> = points.iter().map(|&(e, _)| e).collect();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let j = i + level;
            p[i] = (p[i] * (-x[j]) - p[i + 1] * (-x[i])) / (x[i] - x[j]);
        }
    }
    p[0]
}

fn lebesgue_at_zero(x: &[f64]) -> f64 {
    (0..x.len())
        .map(|j| {
            x.iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &xm)| (xm / (xm - x[j])).abs())
                .product::<f64>()
        })
        .sum()
}

/// Extrapolates samples `f(ε)` to ε = 0 with a degree-`order` polynomial
/// through the `order + 1` smallest ε (Neville), estimating the residual
/// from the window shifted by one sample.
pub fn extrapolate_eps(values: &[(f64, Complex64)], order: usize) -> Result<Extrapolated> {
    if values.len() < order + 2 {
        return Err(Error::InsufficientData(format!(
            "order-{order} extrapolation needs {} samples, got {}",
            order + 2,
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Extrapolation {
            reason: "repeated ε values".into(),
            condition: f64::INFINITY,
        });
    }
    let window = &sorted[..=order];
    let eps: Vec<f64> = window.iter().map(|&(e, _)| e).collect();
    let condition = lebesgue_at_zero(&eps);
    if !condition.is_finite() || condition > MAX_EXTRAPOLATION_CONDITION {
        return Err(Error::Extrapolation {
            reason: "interpolation nodes too ill-conditioned for extrapolation to 0".into(),
            condition,
        });
    }
    let value = neville_at_zero(window);
    let shifted = neville_at_zero(&sorted[1..=order + 1]);
    Ok(Extrapolated {
        value,
        residual_estimate: (value - shifted).norm(),
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(g: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, g)
    }

    #[test]
    fn standard_normal_moments() {
        let cfg = QuadratureConfig::default();
        let polys: Vec<Polynomial> = ["1", "s1^2", "s1^4"]
            .iter()
            .map(|s| Polynomial::parse(s, Some(1)).unwrap())
            .collect();
        let vals = integrate_moments(&scalar(c(0.0, 1.0)), &polys, &cfg).unwrap();
        assert!((vals[0] - c(1.0, 0.0)).norm() < 1e-8);
        assert!((vals[1] - c(1.0, 0.0)).norm() < 1e-8);
        assert!((vals[2] - c(3.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn oscillatory_second_moment() {
        let cfg = QuadratureConfig::default();
        let p = Polynomial::parse("s1^2", Some(1)).unwrap();
        let v = integrate_moment(&scalar(c(1.0, 0.1)), &p, &cfg).unwrap();
        assert!((v - c(0.1, -1.0)).norm() < 1e-6, "{v}");
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let cfg = QuadratureConfig::default();
        let g4 = CMatrix::identity(4, 4) * I;
        let one = Polynomial::constant(4, c(1.0, 0.0));
        assert_eq!(raw_integrals(&g4, &[one], &cfg), Err(Error::UnsupportedDimension(4)));
        let p = Polynomial::constant(1, c(1.0, 0.0));
        assert!(matches!(
            raw_integrals(&scalar(c(1.0, 0.0)), &[p.clone()], &cfg),
            Err(Error::Domain(_))
        ));
        let tiny = QuadratureConfig {
            box_halfwidth_sigmas: 2.0,
            ..cfg
        };
        assert!(matches!(
            raw_integrals(&scalar(I), &[p.clone()], &tiny),
            Err(Error::BoxTooSmall { .. })
        ));
        let even = QuadratureConfig {
            points_per_axis: 100,
            ..cfg
        };
        assert!(raw_integrals(&scalar(I), &[p], &even).is_err());
    }

    #[test]
    fn extrapolation_examples() {
        let affine: Vec<_> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&e| (e, -I * c(1.0, e)))
            .collect();
        let fit = extrapolate_eps(&affine, 1).unwrap();
        assert!((fit.value - c(0.0, -1.0)).norm() < 1e-15);
        assert!(fit.residual_estimate < 1e-15);

        let constant: Vec<_> = [0.3, 0.2, 0.1].iter().map(|&e| (e, c(2.5, -1.0))).collect();
        assert!((extrapolate_eps(&constant, 1).unwrap().value - c(2.5, -1.0)).norm() < 1e-15);

        let quadratic: Vec<_> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&e| (e, c(e, -e * e)))
            .collect();
        assert!(extrapolate_eps(&quadratic, 2).unwrap().value.norm() < 1e-12);
    }

    #[test]
    fn extrapolation_errors() {
        let two = [(0.2, c(1.0, 0.0)), (0.1, c(1.0, 0.0))];
        assert!(matches!(extrapolate_eps(&two, 1), Err(Error::InsufficientData(_))));
        let repeated = [(0.2, c(1.0, 0.0)), (0.1, c(1.0, 0.0)), (0.1, c(2.0, 0.0))];
        assert!(matches!(extrapolate_eps(&repeated, 1), Err(Error::Extrapolation { .. })));
        let clustered = [(1.0, c(1.0, 0.0)), (1.0 + 1e-10, c(1.0, 0.0)), (2.0, c(1.0, 0.0))];
        assert!(matches!(extrapolate_eps(&clustered, 1), Err(Error::Extrapolation { .. })));
    }
}
