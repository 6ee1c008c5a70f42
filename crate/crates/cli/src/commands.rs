use std::path::{Path, PathBuf};
use std::sync::Arc;

use cylfi::gaussian::{
    generating_functional, green_functions, imaginary_project, GaussianSpec, ImaginaryGaussianSpec,
};
use cylfi::json::{self, pair, MomentFunctionalJson, ProjectionJson, TensorJson};
use cylfi::kernels::{klein_gordon_euclidean, klein_gordon_minkowski, LatticeSpec};
use cylfi::model::{restrict_form, BilinearForm, ModelSpace, Projection, TestFunction};
use cylfi::moments::{evaluate, project, CylDistribution, DistributionKind};
use cylfi::oracle::{integrate_moment, QuadratureConfig};
use cylfi::polytensor::Polynomial;
use cylfi::Complex64;
use serde::Serialize;

use crate::args::{
    CheckArgs, Command, GenfunArgs, GreenArgs, KernelName, LimitArgs, MomentArgs, OracleArgs, SourceArgs,
};
use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_OK};
use crate::manifest::RunManifest;
use crate::output::{
    CheckReport, Failure, GenfunOutput, GreenOutput, LimitOutput, LimitSample, SeriesTerm, SuiteSummary,
};
use crate::suite::{self, Caps, Suite};

/// Failing instances kept per suite in a check report.
pub const MAX_REPORTED_FAILURES: usize = 5;

/// What a command prints and the exit code it asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            exit_code: EXIT_OK,
        }
    }
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Green(a) => cmd_green(a),
        Command::Moment(a) => cmd_moment(a),
        Command::Check(a) => cmd_check(a),
        Command::Limit(a) => cmd_limit(a),
        Command::Genfun(a) => cmd_genfun(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output documents serialize");
    text.push('\n');
    text
}

/// Writes the document to `out` if given, otherwise returns it for stdout.
fn emit(text: String, out: Option<&PathBuf>) -> Result<Outcome, CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            Ok(Outcome::ok(String::new()))
        }
        None => Ok(Outcome::ok(text)),
    }
}

fn parse_poly(text: &str, nvars: usize) -> Result<Polynomial, CliError> {
    Polynomial::parse(text, Some(nvars)).map_err(|source| match source {
        cylfi::Error::Parse { .. } => CliError::Poly {
            input: text.to_string(),
            source,
        },
        other => CliError::Engine(other),
    })
}

fn lattice(src: &SourceArgs) -> Result<LatticeSpec, CliError> {
    Ok(LatticeSpec::new(src.sites, src.spacing, src.mass)?)
}

fn record_source(manifest: RunManifest, src: &SourceArgs) -> RunManifest {
    match (&src.form, src.kernel) {
        (Some(path), _) => manifest.input("form", path.display()),
        (None, Some(kernel)) => manifest
            .input("kernel", kernel.as_str())
            .input("sites", src.sites)
            .input("mass", src.mass)
            .input("spacing", src.spacing),
        (None, None) => manifest,
    }
}

/// A complex form with positive definite imaginary part becomes a Gaussian;
/// a real form becomes the pure-imaginary limit with the default schedule.
fn load_distribution(src: &SourceArgs, degree: usize) -> Result<CylDistribution, CliError> {
    match (&src.form, src.kernel) {
        (Some(path), _) => {
            let form = json::form_from_str(&read(path)?)?;
            distribution_from_form(form, degree)
        }
        (None, Some(KernelName::KgEuclidean)) => {
            let form = klein_gordon_euclidean(&lattice(src)?)?;
            Ok(CylDistribution::gaussian(GaussianSpec::new(form, degree)?))
        }
        (None, Some(KernelName::KgMinkowski)) => {
            let spec = klein_gordon_minkowski(&lattice(src)?)?.with_max_degree(degree)?;
            Ok(CylDistribution::limit_family(spec))
        }
        (None, None) => Err(CliError::Usage("one of --kernel or --form is required".into())),
    }
}

fn distribution_from_form(form: BilinearForm, degree: usize) -> Result<CylDistribution, CliError> {
    if form.strictly_positive() {
        return Ok(CylDistribution::gaussian(GaussianSpec::new(form, degree)?));
    }
    if form.matrix().iter().any(|z| z.im != 0.0) {
        return Err(cylfi::Error::Domain(
            "form is neither real nor has a positive definite imaginary part".into(),
        )
        .into());
    }
    let spec = ImaginaryGaussianSpec::with_default_schedule(form)?.with_max_degree(degree)?;
    Ok(CylDistribution::limit_family(spec))
}

/// Reads a projection and rebinds it to the distribution's model space.
fn load_projection(path: Option<&PathBuf>, space: &Arc<ModelSpace>) -> Result<Projection, CliError> {
    let space = space.clone();
    let Some(path) = path else {
        return Ok(Projection::identity(space));
    };
    let wire: ProjectionJson = serde_json::from_str(&read(path)?)
        .map_err(|e| cylfi::Error::Invalid(format!("bad projection JSON: {e}")))?;
    if wire.dim != space.dim() {
        return Err(cylfi::Error::Shape(format!(
            "projection is over dimension {}, the form over {}",
            wire.dim,
            space.dim()
        ))
        .into());
    }
    Ok(Projection::from_rows(space, &wire.rows)?)
}

fn cmd_green(args: &GreenArgs) -> Result<Outcome, CliError> {
    let degree = args.degree.degree;
    let mu = load_distribution(&args.source, degree)?;
    let tensors = green_functions(&mu, args.order)?;
    let manifest = record_source(RunManifest::start("green"), &args.source)
        .input("order", args.order)
        .input("degree", degree);
    let doc = GreenOutput {
        manifest: manifest.finish(),
        order: args.order,
        max_degree: degree,
        green_functions: tensors.iter().map(TensorJson::from).collect(),
    };
    emit(to_json(&doc), args.out.as_ref())
}

fn cmd_moment(args: &MomentArgs) -> Result<Outcome, CliError> {
    let mu = load_distribution(&args.source, args.degree.degree)?;
    let pi = load_projection(args.proj.as_ref(), mu.space())?;
    let poly = parse_poly(&args.poly, pi.len())?;
    if poly.degree() > mu.max_degree() {
        return Err(cylfi::Error::Truncation {
            requested: poly.degree(),
            max: mu.max_degree(),
        }
        .into());
    }
    let value = evaluate(&project(&mu, &pi)?, &poly)?;
    Ok(Outcome::ok(format!("{}\n", serde_json::to_string(&pair(value)).expect("pair"))))
}

fn cmd_oracle(args: &OracleArgs) -> Result<Outcome, CliError> {
    let form = json::form_from_str(&read(&args.form)?)?;
    let rows: Vec<TestFunction> = load_projection(args.proj.as_ref(), form.space())?.rows().collect();
    let gram = restrict_form(&form, &rows)?;
    let poly = parse_poly(&args.poly, gram.nrows())?;
    let mut cfg = QuadratureConfig::for_dim(gram.nrows());
    if let Some(points) = args.points {
        cfg.points_per_axis = points;
    }
    cfg.box_halfwidth_sigmas = args.sigmas;
    let value = integrate_moment(&gram, &poly, &cfg)?;
    Ok(Outcome::ok(format!("{}\n", serde_json::to_string(&pair(value)).expect("pair"))))
}

fn cmd_genfun(args: &GenfunArgs) -> Result<Outcome, CliError> {
    let degree = args.degree.degree;
    let mu = load_distribution(&args.source, degree)?;
    let phi = TestFunction::real(mu.space().clone(), &args.phi)?;
    let series = generating_functional(&mu, &phi, degree)?;
    let b_phi_phi = match mu.kind() {
        DistributionKind::Gaussian(spec) | DistributionKind::MeasureBacked { embedded: spec, .. } => {
            spec.form().eval(&phi, &phi)?
        }
        DistributionKind::LimitFamily(spec) => spec.form_real().eval(&phi, &phi)?,
    };
    let closed = (Complex64::new(0.0, 0.5) * b_phi_phi).exp();
    let manifest = record_source(RunManifest::start("genfun"), &args.source)
        .input(
            "phi",
            args.phi.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        )
        .input("degree", degree);
    let doc = GenfunOutput {
        manifest: manifest.finish(),
        degree,
        value: pair(series.value),
        closed_form: pair(closed),
        deviation: (series.value - closed).norm(),
        terms: series
            .terms
            .iter()
            .map(|&(k, t)| SeriesTerm { k, term: pair(t) })
            .collect(),
    };
    Ok(Outcome::ok(to_json(&doc)))
}

fn cmd_limit(args: &LimitArgs) -> Result<Outcome, CliError> {
    let degree = args.degree.degree;
    let base = match (&args.source.form, args.source.kernel) {
        (Some(path), _) => ImaginaryGaussianSpec::with_default_schedule(json::form_from_str(&read(path)?)?)?,
        (None, Some(KernelName::KgMinkowski)) => klein_gordon_minkowski(&lattice(&args.source)?)?,
        (None, Some(KernelName::KgEuclidean)) => {
            return Err(CliError::Usage(
                "limit needs a real form: use --kernel kg-minkowski or a real --form".into(),
            ))
        }
        (None, None) => return Err(CliError::Usage("one of --kernel or --form is required".into())),
    };
    let schedule = args.eps.clone().unwrap_or_else(|| base.schedule().to_vec());
    let spec = ImaginaryGaussianSpec::new(base.form_real().clone(), schedule.clone())?
        .with_order(args.order)?
        .with_max_degree(degree)?;
    let mu = CylDistribution::limit_family(spec.clone());
    let pi = load_projection(args.proj.as_ref(), mu.space())?;
    let result = imaginary_project(&spec, &pi)?;

    let mut manifest = record_source(RunManifest::start("limit"), &args.source)
        .input(
            "eps",
            schedule.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        )
        .input("order", args.order)
        .input("degree", degree);
    if let Some(p) = &args.proj {
        manifest = manifest.input("proj", p.display());
    }
    let doc = LimitOutput {
        manifest: manifest.finish(),
        schedule,
        order: args.order,
        samples: result
            .samples
            .iter()
            .map(|(eps, f)| LimitSample {
                eps: *eps,
                functional: MomentFunctionalJson::from(f),
            })
            .collect(),
        functional: MomentFunctionalJson::from(&result.functional),
        diagnostics: result.diagnostics,
    };
    emit(to_json(&doc), args.out.as_ref())
}

struct SuiteRun {
    summary: SuiteSummary,
    failures: Vec<Failure>,
}

fn run_suite(suite: Suite, args: &CheckArgs, caps: &Caps) -> SuiteRun {
    let tolerance = match suite {
        Suite::Compatibility => suite::COMPAT_TOL,
        Suite::Functoriality => suite::FUNCTOR_TOL,
        Suite::Oracle => 1.0,
    };
    let mut max_residual: f64 = 0.0;
    let mut failed = 0u64;
    let mut failures = Vec::new();
    for trial in 0..args.trials {
        let mut rng = suite::trial_rng(args.seed, suite, trial);
        let (instance, outcome) = match suite {
            Suite::Compatibility => {
                let inst = suite::compat_instance(&mut rng, caps);
                (serde_json::to_value(&inst), suite::run_compat(&inst, args.sabotage))
            }
            Suite::Functoriality => {
                let inst = suite::functor_instance(&mut rng, caps);
                (serde_json::to_value(&inst), suite::run_functor(&inst, args.sabotage))
            }
            Suite::Oracle => {
                let inst = suite::oracle_instance(&mut rng, caps);
                (
                    serde_json::to_value(&inst),
                    suite::run_oracle(&inst, args.sabotage).map(|o| o.score),
                )
            }
        };
        let breach = match &outcome {
            Ok(r) => {
                max_residual = max_residual.max(*r);
                !(*r < tolerance)
            }
            Err(_) => true,
        };
        if breach {
            failed += 1;
            if failures.len() < MAX_REPORTED_FAILURES {
                failures.push(Failure {
                    suite,
                    trial,
                    residual: outcome.as_ref().ok().copied(),
                    error: outcome.as_ref().err().map(ToString::to_string),
                    instance: instance.expect("instances serialize"),
                });
            }
        }
    }
    SuiteRun {
        summary: SuiteSummary {
            suite,
            trials: args.trials,
            tolerance,
            max_residual,
            failures: failed,
            passed: failed == 0,
        },
        failures,
    }
}

pub fn cmd_check(args: &CheckArgs) -> Result<Outcome, CliError> {
    let caps = Caps {
        max_dim: args.max_dim,
        max_rows: args.max_rows,
        max_degree: args.max_degree,
    };
    caps.validate()?;
    let manifest = RunManifest::start("check")
        .with_seed(args.seed)
        .input("trials", args.trials)
        .input("max_dim", args.max_dim)
        .input("max_rows", args.max_rows)
        .input("max_degree", args.max_degree)
        .input("sabotage", args.sabotage);
    let runs: Vec<SuiteRun> = Suite::ALL.iter().map(|&s| run_suite(s, args, &caps)).collect();
    let passed = runs.iter().all(|r| r.summary.passed);
    let mut suites = Vec::with_capacity(runs.len());
    let mut failures = Vec::new();
    for run in runs {
        suites.push(run.summary);
        failures.extend(run.failures);
    }
    let report = CheckReport {
        manifest: manifest.finish(),
        seed: args.seed,
        trials: args.trials,
        caps,
        sabotage: args.sabotage,
        suites,
        failures,
        passed,
    };
    let text = to_json(&report);
    if let Some(path) = &args.out {
        std::fs::write(path, &text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
    }
    Ok(Outcome {
        stdout: text,
        exit_code: if passed { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}
