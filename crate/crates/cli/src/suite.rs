//! Randomized self-checks run by `cylfi check`.
//!
//! Every trial draws its instance from a ChaCha stream keyed by
//! `(seed, suite, trial)`, so a single failing trial can be regenerated
//! without replaying the ones before it. Instances are scaled so that all
//! carried moments stay of order one, which makes the absolute tolerances
//! meaningful.

use cylfi::gaussian::{gaussian_project, wick_moments, GaussianSpec};
use cylfi::json::{FormJson, ProjectionJson};
use cylfi::linalg::CMatrix;
use cylfi::model::{BilinearForm, LinearMap, ModelSpace, Projection};
use cylfi::moments::{check_compatibility, pushforward, CylDistribution, MomentFunctional};
use cylfi::oracle::{integrate_moments, QuadratureConfig};
use cylfi::polytensor::{sorted_tuples, Polynomial};
use cylfi::{Complex64, Error};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const COMPAT_TOL: f64 = 1e-10;
pub const FUNCTOR_TOL: f64 = 1e-12;
pub const ORACLE_REL_TOL: f64 = 1e-6;
pub const ORACLE_ABS_TOL: f64 = 1e-8;
/// Largest moment degree compared against quadrature.
pub const ORACLE_MAX_DEGREE: usize = 6;
/// Largest Gram dimension the quadrature oracle supports.
pub const ORACLE_MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_dim: usize,
    pub max_rows: usize,
    pub max_degree: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_dim: 6,
            max_rows: 4,
            max_degree: 6,
        }
    }
}

impl Caps {
    pub fn validate(&self) -> Result<(), Error> {
        if self.max_dim == 0 || self.max_rows == 0 {
            return Err(Error::Invalid("--max-dim and --max-rows must be at least 1".into()));
        }
        if self.max_degree > cylfi::polytensor::MAX_WICK_ORDER {
            return Err(Error::Resource(format!(
                "--max-degree {} exceeds the Wick cap {}",
                self.max_degree,
                cylfi::polytensor::MAX_WICK_ORDER
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Compatibility,
    Functoriality,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Compatibility, Suite::Functoriality, Suite::Oracle];

    fn stream(self) -> u64 {
        match self {
            Suite::Compatibility => 1,
            Suite::Functoriality => 2,
            Suite::Oracle => 3,
        }
    }
}

/// The random generator for one trial of one suite.
pub fn trial_rng(seed: u64, suite: Suite, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    rng.set_stream(suite.stream());
    rng
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, half: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-half..half))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

/// Complex symmetric `X + iY` with `|X| ≤ re_half` entrywise and
/// `Y = im_floor·I + VVᵀ`.
fn random_complex_symmetric(rng: &mut ChaCha8Rng, k: usize, re_half: f64, im_floor: f64) -> CMatrix {
    let x = uniform_matrix(rng, k, k, re_half);
    let v = uniform_matrix(rng, k, k, 0.5 / (k as f64).sqrt());
    let re = (&x + x.transpose()) * 0.5;
    let im = &v * v.transpose() + DMatrix::identity(k, k) * im_floor;
    CMatrix::from_fn(k, k, |r, c| Complex64::new(re[(r, c)], im[(r, c)]))
}

fn form_json(m: &CMatrix) -> FormJson {
    FormJson {
        dim: m.nrows(),
        matrix: (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect(),
    }
}

fn gram_of(json: &FormJson) -> CMatrix {
    CMatrix::from_fn(json.dim, json.dim, |r, c| {
        Complex64::new(json.matrix[r][c][0], json.matrix[r][c][1])
    })
}

/// Negates the second moment, the injected fault of `--sabotage`.
fn sabotage(mu: &mut MomentFunctional) {
    if let Ok(t) = mu.tensor_mut(2) {
        *t = t.scale(Complex64::new(-1.0, 0.0));
    }
}

/// A Gaussian distribution, a projection and a linear map on its image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatInstance {
    pub form: FormJson,
    pub projection: ProjectionJson,
    pub lambda: Vec<Vec<f64>>,
    pub max_degree: usize,
}

pub fn compat_instance(rng: &mut ChaCha8Rng, caps: &Caps) -> CompatInstance {
    let dim = rng.random_range(1..=caps.max_dim);
    let n = rng.random_range(1..=caps.max_rows);
    let m = rng.random_range(1..=caps.max_rows);
    let max_degree = rng.random_range(0..=caps.max_degree);
    let b = random_complex_symmetric(rng, dim, 0.5, 0.5);
    let mut rows = uniform_matrix(rng, n, dim, 1.0 / (dim as f64).sqrt());
    if n >= 2 && rng.random_bool(0.3) {
        // a dependent row exercises the rank-deficient path
        let mix = rng.random_range(-1.0..1.0);
        let dependent = rows.row(0) * mix + rows.row(1) * (1.0 - mix.abs());
        rows.set_row(n - 1, &dependent);
    }
    let lambda = uniform_matrix(rng, m, n, 1.0 / (n as f64).sqrt());
    CompatInstance {
        form: form_json(&b),
        projection: ProjectionJson {
            dim,
            rows: rows_of(&rows),
        },
        lambda: rows_of(&lambda),
        max_degree,
    }
}

pub fn run_compat(inst: &CompatInstance, with_fault: bool) -> Result<f64, Error> {
    let form = BilinearForm::try_from(inst.form.clone())?;
    let space = form.space().clone();
    let mu = CylDistribution::gaussian(GaussianSpec::new(form, inst.max_degree)?);
    let pi = Projection::from_rows(space, &inst.projection.rows)?;
    let lambda = LinearMap::from_rows(&inst.lambda)?;
    if !with_fault {
        return check_compatibility(&mu, &pi, &lambda);
    }
    let composed = cylfi::moments::project(&mu, &pi.then(&lambda)?)?;
    let mut pushed = pushforward(&lambda, &cylfi::moments::project(&mu, &pi)?)?;
    sabotage(&mut pushed);
    composed.max_abs_diff(&pushed)
}

/// A Gaussian moment functional on ℝⁿ and maps `κ: ℝⁿ → ℝᵖ`, `λ: ℝᵖ → ℝᵐ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctorInstance {
    pub gram: FormJson,
    pub max_degree: usize,
    pub kappa: Vec<Vec<f64>>,
    pub lambda: Vec<Vec<f64>>,
}

pub fn functor_instance(rng: &mut ChaCha8Rng, caps: &Caps) -> FunctorInstance {
    let n = rng.random_range(1..=caps.max_rows);
    let p = rng.random_range(1..=caps.max_rows);
    let m = rng.random_range(1..=caps.max_rows);
    let max_degree = rng.random_range(0..=caps.max_degree);
    let g = random_complex_symmetric(rng, n, 0.5, 0.5);
    FunctorInstance {
        gram: form_json(&g),
        max_degree,
        kappa: rows_of(&uniform_matrix(rng, p, n, 1.0 / (n as f64).sqrt())),
        lambda: rows_of(&uniform_matrix(rng, m, p, 1.0 / (p as f64).sqrt())),
    }
}

pub fn run_functor(inst: &FunctorInstance, with_fault: bool) -> Result<f64, Error> {
    let mu = wick_moments(&(gram_of(&inst.gram) * Complex64::new(0.0, -1.0)), inst.max_degree)?;
    let kappa = LinearMap::from_rows(&inst.kappa)?;
    let lambda = LinearMap::from_rows(&inst.lambda)?;
    let direct = pushforward(&lambda.after(&kappa)?, &mu)?;
    let mut stepwise = pushforward(&lambda, &pushforward(&kappa, &mu)?)?;
    if with_fault {
        sabotage(&mut stepwise);
    }
    direct.max_abs_diff(&stepwise)
}

/// A Gram matrix `G` with `Im G ≥ ½·I` on ℝᵏ, `k ≤ 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub gram: FormJson,
    pub max_degree: usize,
}

pub fn oracle_instance(rng: &mut ChaCha8Rng, caps: &Caps) -> OracleInstance {
    let k = rng.random_range(1..=caps.max_rows.min(ORACLE_MAX_DIM));
    let g = random_complex_symmetric(rng, k, 0.5, 0.5);
    OracleInstance {
        gram: form_json(&g),
        max_degree: caps.max_degree.min(ORACLE_MAX_DEGREE),
    }
}

/// Worst agreement between Wick moments and quadrature over every even
/// moment entry up to the instance degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    /// `max |wick − quad| / max(rel·|wick|, abs)`; at most 1 means pass.
    pub score: f64,
    pub entries: usize,
}

pub fn run_oracle(inst: &OracleInstance, with_fault: bool) -> Result<OracleOutcome, Error> {
    let gram = gram_of(&inst.gram);
    let k = gram.nrows();
    let space = ModelSpace::new(k)?;
    let spec = GaussianSpec::new(BilinearForm::new(space.clone(), gram.clone())?, inst.max_degree)?;
    let mut mu = gaussian_project(&spec, &Projection::identity(space))?;
    if with_fault {
        sabotage(&mut mu);
    }
    let mut keys: Vec<(usize, Vec<usize>)> = Vec::new();
    for rank in (0..=inst.max_degree).step_by(2) {
        for key in sorted_tuples(k, rank) {
            keys.push((rank, key));
        }
    }
    let polys: Vec<Polynomial> = keys
        .iter()
        .map(|(_, key)| {
            let mut alpha = vec![0u32; k];
            for &j in key {
                alpha[j] += 1;
            }
            Polynomial::monomial(alpha, Complex64::new(1.0, 0.0))
        })
        .collect::<Result<_, _>>()?;
    let quad = integrate_moments(&gram, &polys, &QuadratureConfig::for_dim(k))?;
    let mut out = OracleOutcome {
        max_abs_err: 0.0,
        max_rel_err: 0.0,
        score: 0.0,
        entries: keys.len(),
    };
    for ((rank, key), q) in keys.iter().zip(quad) {
        let w = mu.tensor(*rank)?.get(key);
        let err = (w - q).norm();
        out.max_abs_err = out.max_abs_err.max(err);
        if w.norm() > 0.0 {
            out.max_rel_err = out.max_rel_err.max(err / w.norm());
        }
        out.score = out.score.max(err / (ORACLE_REL_TOL * w.norm()).max(ORACLE_ABS_TOL));
    }
    Ok(out)
}
