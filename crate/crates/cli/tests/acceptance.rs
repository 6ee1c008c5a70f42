//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; the process exits nonzero
//! if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cylfi::gaussian::{
    gaussian_project, gaussian_project_unfactored, generating_functional, green_functions,
    imaginary_project, partition_function, sqrt_det_branch, GaussianSpec, ImaginaryGaussianSpec,
};
use cylfi::json::{self, MomentFunctionalJson, TensorJson};
use cylfi::kernels::{klein_gordon_minkowski, real_gaussian_measure, LatticeSpec};
use cylfi::linalg::{hermitian_min_eigenvalue, CMatrix};
use cylfi::model::{BilinearForm, ModelSpace, Projection, TestFunction};
use cylfi::moments::{project, CylDistribution, MomentFunctional};
use cylfi::oracle::{integrate_moment, QuadratureConfig};
use cylfi::polytensor::{Polynomial, SymTensor};
use cylfi::Complex64;
use cylfi_cli::output::{CheckReport, GenfunOutput, GreenOutput, LimitOutput};
use cylfi_cli::suite::{self, Caps, Suite};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly(text: &str, nvars: usize) -> Polynomial {
    Polynomial::parse(text, Some(nvars)).expect("literal polynomial")
}

fn scalar_entry(mu: &MomentFunctional, k: usize) -> Complex64 {
    mu.tensors()[k].get(&vec![0; k])
}

fn oracle_convention() -> Verdict {
    let start = Instant::now();
    let gram = CMatrix::from_element(1, 1, c(0.0, 1.0));
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for (text, expected) in [("1", 1.0), ("s1^2", 1.0), ("s1^4", 3.0)] {
        match integrate_moment(&gram, &poly(text, 1), &cfg) {
            Ok(v) => {
                worst = worst.max((v - c(expected, 0.0)).norm());
                values.push(format!("{text}={:.9}", v.re));
            }
            Err(e) => return verdict(false, format!("{text}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-6 && elapsed < Duration::from_secs(5),
        format!("{}; max error {worst:.2e}; {:.2?}", values.join(", "), elapsed),
    )
}

fn wick_vs_oracle() -> Verdict {
    let start = Instant::now();
    let caps = Caps {
        max_dim: 3,
        max_rows: 3,
        max_degree: 6,
    };
    let mut worst_score: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut entries = 0;
    for trial in 0..50 {
        let mut rng = suite::trial_rng(2024, Suite::Oracle, trial);
        let inst = suite::oracle_instance(&mut rng, &caps);
        match suite::run_oracle(&inst, false) {
            Ok(out) => {
                worst_score = worst_score.max(out.score);
                worst_rel = worst_rel.max(out.max_rel_err);
                entries += out.entries;
            }
            Err(e) => return verdict(false, format!("trial {trial}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst_score <= 1.0 && elapsed < Duration::from_secs(180),
        format!(
            "50 instances, {entries} moment entries; worst relative error {worst_rel:.2e}, \
             worst error/tolerance {worst_score:.2e}; {elapsed:.2?}"
        ),
    )
}

fn compatibility_suite() -> Verdict {
    let start = Instant::now();
    let caps = Caps::default();
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let mut rng = suite::trial_rng(7, Suite::Compatibility, trial);
        match suite::run_compat(&suite::compat_instance(&mut rng, &caps), false) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return verdict(false, format!("trial {trial}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-10 && elapsed < Duration::from_secs(60),
        format!("100 instances (N<=6, n<=4, m<=4, D<=6); max residual {worst:.2e}; {elapsed:.2?}"),
    )
}

fn functoriality() -> Verdict {
    let caps = Caps::default();
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let mut rng = suite::trial_rng(7, Suite::Functoriality, trial);
        match suite::run_functor(&suite::functor_instance(&mut rng, &caps), false) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return verdict(false, format!("trial {trial}: {e}")),
        }
    }
    verdict(worst < 1e-12, format!("100 triples; max entrywise deviation {worst:.2e}"))
}

/// A random complex matrix shifted so its Hermitian part has smallest
/// eigenvalue at least `floor`.
fn random_in_domain(rng: &mut ChaCha8Rng, k: usize, floor: f64) -> CMatrix {
    let a = CMatrix::from_fn(k, k, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let shift = floor - hermitian_min_eigenvalue(&a);
    if shift > 0.0 {
        a + CMatrix::identity(k, k) * c(shift, 0.0)
    } else {
        a
    }
}

fn branch_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut notes = Vec::new();
    let mut ok = true;

    let identity_exact = (1..=5).all(|k| sqrt_det_branch(&CMatrix::identity(k, k)) == Ok(c(1.0, 0.0)));
    ok &= identity_exact;
    notes.push(format!("sqrt_det(I)=1 exact: {identity_exact}"));

    let mut worst_square: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(1..=4);
        let floor = rng.random_range(0.05..1.0);
        let m = random_in_domain(&mut rng, k, floor);
        let root = sqrt_det_branch(&m).expect("in domain");
        worst_square = worst_square.max((root * root - m.determinant()).norm());
    }
    ok &= worst_square < 1e-10;
    notes.push(format!("max |root^2 - det| {worst_square:.2e}"));

    // Along each segment the branch must agree with the analytic
    // continuation of √det: at every step, of the two roots of det(M(t))
    // the continued one is the root closer to the previous value.
    let steps = 2000;
    let mut worst_jump: f64 = 0.0;
    for _ in 0..20 {
        let k = rng.random_range(1..=4);
        let a = random_in_domain(&mut rng, k, 0.05);
        let b = random_in_domain(&mut rng, k, 0.05);
        let mut continued = sqrt_det_branch(&a).expect("in domain");
        for step in 1..=steps {
            let t = step as f64 / steps as f64;
            let m = &a * c(1.0 - t, 0.0) + &b * c(t, 0.0);
            let value = sqrt_det_branch(&m).expect("segment stays in the convex domain");
            let root = m.determinant().sqrt();
            continued = if (root - continued).norm() <= (-root - continued).norm() { root } else { -root };
            worst_jump = worst_jump.max((value - continued).norm());
            continued = value;
        }
    }
    ok &= worst_jump < 1e-6;
    notes.push(format!("20 segments, max step-jump {worst_jump:.2e}"));

    let mut worst_z: f64 = 0.0;
    for k in [1, 2] {
        for _ in 0..3 {
            let x = DMatrix::from_fn(k, k, |_, _| rng.random_range(-0.5..0.5));
            let v = DMatrix::from_fn(k, k, |_, _| rng.random_range(-0.5..0.5));
            let re = (&x + x.transpose()) * 0.5;
            let im = &v * v.transpose() + DMatrix::identity(k, k) * 0.5;
            let gram = CMatrix::from_fn(k, k, |r, col| c(re[(r, col)], im[(r, col)]));
            match partition_function(&gram, &QuadratureConfig::for_dim(k)) {
                Ok(z) => worst_z = worst_z.max((z - c(1.0, 0.0)).norm()),
                Err(e) => return verdict(false, format!("partition function k={k}: {e}")),
            }
        }
    }
    ok &= worst_z < 1e-6;
    notes.push(format!("max |Z - 1| for k in {{1,2}} {worst_z:.2e}"));
    verdict(ok, notes.join("; "))
}

fn degenerate_projections() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let dim = rng.random_range(2..=6);
        let rank = rng.random_range(1..dim.min(4));
        let n = rng.random_range(rank + 1..=5);
        let scale = 1.0 / (dim as f64).sqrt();
        let basis = DMatrix::from_fn(rank, dim, |_, _| rng.random_range(-scale..scale));
        let mix = DMatrix::from_fn(n, rank, |_, _| rng.random_range(-0.7..0.7));
        let rows = &mix * &basis;
        let x = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-0.5..0.5));
        let v = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-0.5..0.5) * scale);
        let re = (&x + x.transpose()) * 0.5;
        let im = &v * v.transpose() + DMatrix::identity(dim, dim) * 0.5;
        let space = ModelSpace::new(dim).expect("dim >= 2");
        let form = BilinearForm::new(space.clone(), CMatrix::from_fn(dim, dim, |r, col| c(re[(r, col)], im[(r, col)])))
            .expect("valid form");
        let spec = GaussianSpec::new(form, 6).expect("valid spec");
        let pi = Projection::new(space, rows).expect("valid projection");
        let outcome = gaussian_project(&spec, &pi)
            .and_then(|f| Ok((f, gaussian_project_unfactored(&spec, &pi)?)))
            .and_then(|(f, d)| f.max_abs_diff(&d));
        match outcome {
            Ok(diff) => worst = worst.max(diff),
            Err(e) => return verdict(false, format!("trial {trial}: {e}")),
        }
    }
    verdict(
        worst < 1e-12,
        format!("50 rank-deficient projections; factored vs direct max deviation {worst:.2e}"),
    )
}

fn fresnel_limit() -> Verdict {
    let space = ModelSpace::new(1).expect("dim 1");
    let form = BilinearForm::from_real(space.clone(), &DMatrix::identity(1, 1)).expect("real form");
    let spec = ImaginaryGaussianSpec::new(form, vec![0.2, 0.1, 0.05, 0.025]).expect("schedule");
    let scalar = match imaginary_project(&spec, &Projection::identity(space)) {
        Ok(r) => r.functional,
        Err(e) => return verdict(false, format!("scalar: {e}")),
    };
    let m2 = scalar_entry(&scalar, 2);
    let m4 = scalar_entry(&scalar, 4);
    let e2 = (m2 - c(0.0, -1.0)).norm();
    let e4 = (m4 - c(-3.0, 0.0)).norm();

    let kg = klein_gordon_minkowski(&LatticeSpec::new(2, 1.0, 1.0).expect("lattice")).expect("kernel");
    let kg_space = kg.form_real().space().clone();
    let two_site = match imaginary_project(&kg, &Projection::identity(kg_space)) {
        Ok(r) => r.functional,
        Err(e) => return verdict(false, format!("Klein-Gordon: {e}")),
    };
    let expected = [([0, 0], -0.6), ([0, 1], -0.4), ([1, 1], -0.6)];
    let ekg = expected
        .iter()
        .map(|(idx, im)| (two_site.tensors()[2].get(idx) - c(0.0, *im)).norm())
        .fold(0.0, f64::max);
    verdict(
        e2 < 1e-3 && e4 < 5e-3 && ekg < 1e-3,
        format!(
            "M2={:.6}{:+.6}i (err {e2:.1e}), M4={:.6}{:+.6}i (err {e4:.1e}), two-site M2 err {ekg:.1e}",
            m2.re, m2.im, m4.re, m4.im
        ),
    )
}

fn generating_functional_check() -> Verdict {
    let space = ModelSpace::new(1).expect("dim 1");
    let form = BilinearForm::imaginary(space.clone(), &DMatrix::identity(1, 1)).expect("form");
    let mu = CylDistribution::gaussian(GaussianSpec::new(form, 8).expect("spec"));
    let phi = TestFunction::real(space, &[1.0]).expect("phi");
    let series = match generating_functional(&mu, &phi, 8) {
        Ok(s) => s,
        Err(e) => return verdict(false, e.to_string()),
    };
    let target = (-0.5f64).exp();
    let deviation = (series.value - c(target, 0.0)).norm();

    let greens = green_functions(&mu, 8).expect("within degree");
    let full = project(&mu, &Projection::identity(mu.space().clone())).expect("projection");
    let mut relation = true;
    let mut odd_zero = true;
    for (k, f) in greens.iter().enumerate() {
        let expected = full.tensors()[k].scale(Complex64::i().powu(k as u32));
        relation &= f.max_abs_diff(&expected).map(|d| d == 0.0).unwrap_or(false);
        if k % 2 == 1 {
            odd_zero &= f.is_zero();
        }
    }
    verdict(
        deviation < 1e-4 && relation && odd_zero,
        format!(
            "Z_8 = {:.8}, exp(-1/2) = {target:.8}, |diff| = {deviation:.2e} (needs < 1e-4); \
             F_k = i^k M_k: {relation}; odd F_k exactly zero: {odd_zero}",
            series.value.re
        ),
    )
}

fn measure_embedding() -> Verdict {
    let space = ModelSpace::new(1).expect("dim 1");
    let mu = real_gaussian_measure(space.clone(), &DMatrix::identity(1, 1)).expect("measure");
    let m = match project(&mu, &Projection::identity(space)) {
        Ok(m) => m,
        Err(e) => return verdict(false, e.to_string()),
    };
    let expected = [1.0, 0.0, 1.0, 0.0, 3.0];
    let mut worst_re: f64 = 0.0;
    let mut worst_im: f64 = 0.0;
    for (k, e) in expected.iter().enumerate() {
        let v = scalar_entry(&m, k);
        worst_re = worst_re.max((v.re - e).abs());
        worst_im = worst_im.max(v.im.abs());
    }
    verdict(
        worst_re < 1e-12 && worst_im < 1e-12,
        format!("moments 0..4 max real error {worst_re:.1e}, max |imag| {worst_im:.1e}"),
    )
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cylfi"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Parses `text` as `T`, writes it back and checks the JSON value is unchanged.
fn round_trips<T>(text: &str) -> Result<T, String>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let original: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let parsed: T = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let again = serde_json::to_value(&parsed).map_err(|e| e.to_string())?;
    if again == original {
        Ok(parsed)
    } else {
        Err("re-serialized document differs".into())
    }
}

fn tensor_round_trips(t: &TensorJson, nvars: Option<usize>) -> Result<(), String> {
    let tensor: SymTensor = t.clone().into_tensor(nvars).map_err(|e| e.to_string())?;
    let back = TensorJson {
        nvars: t.nvars,
        ..TensorJson::from(&tensor)
    };
    if &back == t {
        Ok(())
    } else {
        Err("tensor changed on re-serialization".into())
    }
}

fn functional_round_trips(f: &MomentFunctionalJson) -> Result<(), String> {
    let mu = MomentFunctional::try_from(f.clone()).map_err(|e| e.to_string())?;
    if &MomentFunctionalJson::from(&mu) == f {
        Ok(())
    } else {
        Err("moment functional changed on re-serialization".into())
    }
}

fn cli_round_trips(dir: &Path) -> Result<Vec<String>, String> {
    let mut notes = Vec::new();
    let form = dir.join("b.json");
    let real_form = dir.join("b_real.json");
    let proj = dir.join("p.json");
    std::fs::write(&form, r#"{"dim": 2, "matrix": [[[0.2, 1.0], [0.1, 0.3]], [[0.1, 0.3], [-0.1, 0.8]]]}"#)
        .map_err(|e| e.to_string())?;
    std::fs::write(&real_form, r#"{"dim": 1, "matrix": [[[1.0, 0.0]]]}"#).map_err(|e| e.to_string())?;
    std::fs::write(&proj, r#"{"dim": 2, "rows": [[1.0, 0.5], [2.0, 1.0]]}"#).map_err(|e| e.to_string())?;
    let path = |p: &Path| p.to_str().expect("utf-8 temp path").to_string();

    let green_out = dir.join("green.json");
    let (code, _, err) = run_cli(&["green", "--kernel", "kg-euclidean", "--sites", "2", "--mass", "1", "--order", "2", "--out", &path(&green_out)]);
    if code != 0 {
        return Err(format!("green exit {code}: {err}"));
    }
    let green: GreenOutput = round_trips(&std::fs::read_to_string(&green_out).map_err(|e| e.to_string())?)?;
    for t in &green.green_functions {
        tensor_round_trips(t, None)?;
    }
    let f2 = green.green_functions[2].clone().into_tensor(None).map_err(|e| e.to_string())?;
    let f2_err = (f2.get(&[0, 0]) - c(-0.6, 0.0)).norm().max((f2.get(&[0, 1]) - c(-0.4, 0.0)).norm());
    if f2_err > 1e-12 {
        return Err(format!("green F2 off by {f2_err:.2e}"));
    }
    notes.push("green".to_string());

    let limit_out = dir.join("limit.json");
    let (code, _, err) = run_cli(&["limit", "--form", &path(&real_form), "--eps", "0.2,0.1,0.05,0.025", "--out", &path(&limit_out)]);
    if code != 0 {
        return Err(format!("limit exit {code}: {err}"));
    }
    let limit: LimitOutput = round_trips(&std::fs::read_to_string(&limit_out).map_err(|e| e.to_string())?)?;
    functional_round_trips(&limit.functional)?;
    for s in &limit.samples {
        functional_round_trips(&s.functional)?;
    }
    notes.push("limit".to_string());

    let (code, out, err) = run_cli(&["genfun", "--form", &path(&form), "--phi", "1,-0.5", "--degree", "8"]);
    if code != 0 {
        return Err(format!("genfun exit {code}: {err}"));
    }
    round_trips::<GenfunOutput>(&out)?;
    notes.push("genfun".to_string());

    for (name, args) in [
        ("moment", vec!["moment", "--form", &path(&form), "--proj", &path(&proj), "--poly", "s1^2 - (0,1)*s1*s2"]),
        ("oracle", vec!["oracle", "--form", &path(&form), "--poly", "s1^2*s2^2"]),
    ] {
        let (code, out, err) = run_cli(&args);
        if code != 0 {
            return Err(format!("{name} exit {code}: {err}"));
        }
        round_trips::<[f64; 2]>(&out)?;
        notes.push(name.to_string());
    }

    let check_out = dir.join("check.json");
    let (code, _, err) = run_cli(&["check", "--trials", "5", "--out", &path(&check_out)]);
    if code != 0 {
        return Err(format!("check exit {code}: {err}"));
    }
    round_trips::<CheckReport>(&std::fs::read_to_string(&check_out).map_err(|e| e.to_string())?)?;
    notes.push("check".to_string());

    let (code, _, err) = run_cli(&["moment", "--form", &path(&form), "--poly", "s1 + * s2"]);
    let parsed: serde_json::Value = serde_json::from_str(&err).map_err(|e| format!("error JSON: {e}"))?;
    if code != 2 || parsed["error"]["column"] != 6 {
        return Err(format!("parse error path: exit {code}, stderr {err}"));
    }
    notes.push("error JSON".to_string());

    json::form_from_str(&std::fs::read_to_string(&form).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok(notes)
}

fn cli_end_to_end() -> Verdict {
    let start = Instant::now();
    let (default_code, stdout, _) = run_cli(&["check"]);
    let default_ok = default_code == 0 && round_trips::<CheckReport>(&stdout).map(|r| r.passed).unwrap_or(false);
    let (sabotage_code, stdout, _) = run_cli(&["check", "--sabotage"]);
    let sabotage_ok = sabotage_code == 1
        && round_trips::<CheckReport>(&stdout)
            .map(|r| !r.passed && !r.failures.is_empty())
            .unwrap_or(false);
    let dir = tempfile::tempdir().expect("temp dir");
    let trips = cli_round_trips(dir.path());
    let trips_ok = trips.is_ok();
    let trips_note = match trips {
        Ok(names) => format!("round-trips: {}", names.join(", ")),
        Err(e) => format!("round-trip failure: {e}"),
    };
    verdict(
        default_ok && sabotage_ok && trips_ok,
        format!(
            "check exit {default_code}; check --sabotage exit {sabotage_code}; {trips_note}; {:.2?}",
            start.elapsed()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("oracle convention lock", oracle_convention),
        ("Wick vs quadrature oracle", wick_vs_oracle),
        ("compatibility with linear maps", compatibility_suite),
        ("pushforward functoriality", functoriality),
        ("square-root branch", branch_correctness),
        ("degenerate projections", degenerate_projections),
        ("pure-imaginary limit", fresnel_limit),
        ("generating functional", generating_functional_check),
        ("real measure embedding", measure_embedding),
        ("CLI end-to-end", cli_end_to_end),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("acceptance {:>2} {tag} {name}: {}", i + 1, v.detail);
        if !v.passed {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: {} of {} criteria fail: {failed:?}", failed.len(), criteria.len());
        std::process::exit(1);
    }
}
