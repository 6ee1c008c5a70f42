use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::LinearMap;

/// Exponent vector `α` of a monomial `s^α = s₁^α₁ ⋯ sₙ^αₙ`.
pub type MultiIndex = Vec<u32>;

/// Sparse multivariate polynomial with complex coefficients.
///
/// Exact zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c).expect("well-formed constant");
        p
    }

    /// The coordinate `s_j` (0-based `j`).
    pub fn var(nvars: usize, j: usize) -> Result<Self> {
        if j >= nvars {
            return Err(Error::shape(format!("variable {j} out of range for {nvars} vars")));
        }
        let mut alpha = vec![0; nvars];
        alpha[j] = 1;
        Self::monomial(alpha, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(alpha: MultiIndex, c: Complex64) -> Result<Self> {
        let mut p = Self::zero(alpha.len());
        p.add_term(alpha, c)?;
        Ok(p)
    }

    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (alpha, c) in terms {
            p.add_term(alpha, c)?;
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|a| total_degree(a)).max().unwrap_or(0)
    }

    pub fn coeff(&self, alpha: &[u32]) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    /// Adds `c · s^α`, dropping the term if the sum becomes exactly zero.
    pub fn add_term(&mut self, alpha: MultiIndex, c: Complex64) -> Result<()> {
        if alpha.len() != self.nvars {
            return Err(Error::shape(format!(
                "multi-index of length {} in a {}-variable polynomial",
                alpha.len(),
                self.nvars
            )));
        }
        if c == Complex64::default() {
            return Ok(());
        }
        let entry = self.terms.entry(alpha).or_default();
        *entry += c;
        if *entry == Complex64::default() {
            self.terms.retain(|_, v| *v != Complex64::default());
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add_term(alpha.clone(), *c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (alpha, v) in &self.terms {
            out.add_term(alpha.clone(), v * c).expect("same shape");
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let ab: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *acc.entry(ab).or_default() += ca * cb;
            }
        }
        acc.retain(|_, v| *v != Complex64::default());
        Ok(Self {
            nvars: self.nvars,
            terms: acc,
        })
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.nvars {
            return Err(Error::shape(format!(
                "evaluation point of length {} for {} vars",
                point.len(),
                self.nvars
            )));
        }
        Ok(self
            .terms
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .iter()
                    .zip(point)
                    .fold(*c, |acc, (&e, x)| acc * x.powu(e))
            })
            .sum())
    }

    fn check_same_vars(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::shape(format!(
                "polynomials in {} and {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }
}

pub(crate) fn total_degree(alpha: &[u32]) -> usize {
    alpha.iter().map(|&e| e as usize).sum()
}

/// `Q(s) = P(λ s)`: precomposition of a polynomial on ℝᵐ with `λ: ℝⁿ → ℝᵐ`.
///
/// The result lives on ℝⁿ and has degree at most `deg P`.
pub fn compose_linear(p: &Polynomial, lambda: &LinearMap) -> Result<Polynomial> {
    let (m, n) = (lambda.nrows(), lambda.ncols());
    if p.nvars() != m {
        return Err(Error::shape(format!(
            "polynomial has {} vars, linear map has {m} outputs",
            p.nvars()
        )));
    }
    // t_j = Σ_i λ_ji s_i
    let linear_forms: Vec<Polynomial> = (0..m)
        .map(|j| {
            let mut form = Polynomial::zero(n);
            for i in 0..n {
                let mut alpha = vec![0; n];
                alpha[i] = 1;
                form.add_term(alpha, Complex64::new(lambda.matrix()[(j, i)], 0.0))
                    .expect("shape fixed above");
            }
            form
        })
        .collect();

    let max_pow = p.degree();
    let mut powers: Vec<Vec<Polynomial>> = Vec::with_capacity(m);
    for form in &linear_forms {
        let mut row = Vec::with_capacity(max_pow + 1);
        row.push(Polynomial::constant(n, Complex64::new(1.0, 0.0)));
        for e in 1..=max_pow {
            let next = row[e - 1].mul(form)?;
            row.push(next);
        }
        powers.push(row);
    }

    let mut out = Polynomial::zero(n);
    for (alpha, c) in p.terms() {
        let mut term = Polynomial::constant(n, *c);
        for (j, &e) in alpha.iter().enumerate() {
            if e > 0 {
                term = term.mul(&powers[j][e as usize])?;
            }
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({},{})", c.re, c.im)
    }
}

/// Renders in the same grammar [`Polynomial::parse`] accepts.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (alpha, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", fmt_coeff(*c))?;
            for (j, &e) in alpha.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*s{}", j + 1)?,
                    _ => write!(f, "*s{}^{}", j + 1, e)?,
                }
            }
        }
        Ok(())
    }
}
