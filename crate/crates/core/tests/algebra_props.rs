use std::sync::Arc;

use cylfi::gaussian::{gaussian_project, GaussianSpec};
use cylfi::model::{BilinearForm, LinearMap, ModelSpace, Projection};
use cylfi::moments::{check_compatibility, evaluate, project, pushforward, CylDistribution, MomentFunctional};
use cylfi::polytensor::{compose_linear, fourier_poly, poly_from_tensors, Polynomial, SymTensor};
use cylfi::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn polynomial(nvars: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::vec(0..=max_deg, nvars), coeff());
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        let mut p = Polynomial::zero(nvars);
        for (alpha, c) in terms {
            if alpha.iter().sum::<u32>() <= max_deg {
                p.add_term(alpha, c).unwrap();
            }
        }
        p
    })
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.5..1.5f64, rows * cols)
        .prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
}

fn max_coeff_diff(a: &Polynomial, b: &Polynomial) -> f64 {
    let mut keys: Vec<_> = a.terms().keys().chain(b.terms().keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    keys.iter()
        .map(|k| (a.coeff(k) - b.coeff(k)).norm())
        .fold(0.0, f64::max)
}

fn complex_form(space: Arc<ModelSpace>, re: &DMatrix<f64>, im_factor: &DMatrix<f64>) -> BilinearForm {
    let n = space.dim();
    let re_sym = (re + re.transpose()) * 0.5;
    let im = im_factor * im_factor.transpose() + DMatrix::identity(n, n) * 0.5;
    let b = DMatrix::from_fn(n, n, |r, c| Complex64::new(re_sym[(r, c)], im[(r, c)]));
    BilinearForm::new(space, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_round_trip(p in polynomial(3, 5)) {
        let back = poly_from_tensors(&fourier_poly(&p)).unwrap();
        prop_assert!(max_coeff_diff(&p, &back) < 1e-12);
    }

    #[test]
    fn composition_is_functorial(
        p in polynomial(2, 4),
        outer in matrix(2, 3),
        inner in matrix(3, 2),
    ) {
        let lambda = LinearMap::new(outer.clone());
        let kappa = LinearMap::new(inner.clone());
        let stepwise = compose_linear(&compose_linear(&p, &lambda).unwrap(), &kappa).unwrap();
        let direct = compose_linear(&p, &LinearMap::new(&outer * &inner)).unwrap();
        prop_assert!(max_coeff_diff(&stepwise, &direct) < 1e-10);
    }

    #[test]
    fn composition_matches_pointwise(p in polynomial(2, 4), l in matrix(2, 3), x in prop::collection::vec(-1.0..1.0f64, 3)) {
        let q = compose_linear(&p, &LinearMap::new(l.clone())).unwrap();
        let xv = nalgebra::DVector::from_vec(x.clone());
        let y = &l * &xv;
        let at_x: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let at_y: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let diff = (q.eval(&at_x).unwrap() - p.eval(&at_y).unwrap()).norm();
        prop_assert!(diff < 1e-9);
    }

    #[test]
    fn contraction_ignores_argument_order(
        entries in prop::collection::vec(coeff(), 10),
        a in prop::collection::vec(coeff(), 3),
        b in prop::collection::vec(coeff(), 3),
        c in prop::collection::vec(coeff(), 3),
    ) {
        let mut t = SymTensor::zeros(3, 3);
        let keys = [[0,0,0],[0,0,1],[0,0,2],[0,1,1],[0,1,2],[0,2,2],[1,1,1],[1,1,2],[1,2,2],[2,2,2]];
        for (k, v) in keys.iter().zip(&entries) {
            t.set(k, *v).unwrap();
        }
        let abc = t.contract(&[&a, &b, &c]).unwrap();
        let cab = t.contract(&[&c, &a, &b]).unwrap();
        let bca = t.contract(&[&b, &c, &a]).unwrap();
        prop_assert!((abc - cab).norm() < 1e-10);
        prop_assert!((abc - bca).norm() < 1e-10);
        let power = t.contract_power(&a).unwrap();
        prop_assert!((power - t.contract(&[&a, &a, &a]).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn pushforward_is_dual_to_composition(
        re in matrix(3, 3),
        im in matrix(3, 3),
        l in matrix(2, 3),
        p in polynomial(2, 4),
    ) {
        let space = ModelSpace::new(3).unwrap();
        let spec = GaussianSpec::new(complex_form(space.clone(), &re, &im), 4).unwrap();
        let mu = gaussian_project(&spec, &Projection::identity(space)).unwrap();
        let lambda = LinearMap::new(l);
        let pushed = pushforward(&lambda, &mu).unwrap();
        let lhs = evaluate(&pushed, &p).unwrap();
        let rhs = evaluate(&mu, &compose_linear(&p, &lambda).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn pushforward_composes(
        entries in prop::collection::vec(coeff(), 20),
        outer in matrix(2, 3),
        inner in matrix(3, 2),
    ) {
        let mut tensors = vec![SymTensor::scalar(2, Complex64::new(1.0, 0.0))];
        let mut it = entries.into_iter();
        for rank in 1..=4 {
            let mut t = SymTensor::zeros(2, rank);
            for ones in 0..=rank {
                let key: Vec<usize> = (0..rank).map(|j| usize::from(j >= rank - ones)).collect();
                t.set(&key, it.next().unwrap()).unwrap();
            }
            tensors.push(t);
        }
        let mu = MomentFunctional::new(2, tensors).unwrap();
        let kappa = LinearMap::new(inner);
        let lambda = LinearMap::new(outer);
        let stepwise = pushforward(&lambda, &pushforward(&kappa, &mu).unwrap()).unwrap();
        let direct = pushforward(&lambda.after(&kappa).unwrap(), &mu).unwrap();
        prop_assert!(stepwise.max_abs_diff(&direct).unwrap() < 1e-9);
    }

    #[test]
    fn gaussian_family_is_compatible(
        re in matrix(4, 4),
        im in matrix(4, 4),
        rows in matrix(3, 4),
        l in matrix(2, 3),
    ) {
        let space = ModelSpace::new(4).unwrap();
        let spec = GaussianSpec::new(complex_form(space.clone(), &re, &im), 6).unwrap();
        let mu = CylDistribution::gaussian(spec);
        let pi = Projection::new(space, rows).unwrap();
        let lambda = LinearMap::new(l.clone());
        let residual = check_compatibility(&mu, &pi, &lambda).unwrap();
        // Pushing through λ can cancel heavily, so rounding is bounded by the
        // input moments times ‖λ‖_∞^k rather than by the output size.
        let lambda_norm = (0..l.nrows()).map(|r| l.row(r).abs().sum()).fold(0.0, f64::max);
        let scale = project(&mu, &pi)
            .unwrap()
            .tensors()
            .iter()
            .enumerate()
            .map(|(k, t)| t.max_abs() * lambda_norm.powi(k as i32))
            .fold(1.0, f64::max);
        prop_assert!(residual < 1e-14 * scale, "residual {residual} at scale {scale}");
    }
}
