use fibervol::coarse::{build_grid, Measure};
use fibervol::entropy::{
    linear_entropy, linear_entropy_normalized, von_neumann, von_neumann_normalized,
};
use fibervol::linalg::partial_trace_r;
use fibervol::metric::{
    closed_form_volume, integrate_volume, normalized_closed_form, ClosedFormGroup, Integration,
};
use fibervol::scaling::{v_norm_family, v_norm_family_by_pairs};
use fibervol::{ComplexMatrix, DensityOperator, Fiber, UnitaryParameterization};
use proptest::prelude::*;

fn simplex(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..1.0, d).prop_map(|v| {
        let s: f64 = v.iter().sum();
        let mut p: Vec<f64> = v.iter().map(|x| x / s).collect();
        let drift = 1.0 - p.iter().sum::<f64>();
        p[0] += drift;
        p
    })
}

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n)
}

fn in_box(p: &UnitaryParameterization, unit: &[f64]) -> Vec<f64> {
    p.params()
        .iter()
        .zip(unit)
        .map(|(q, u)| q.domain.0 + u * (q.domain.1 - q.domain.0))
        .collect()
}

fn group(n: usize, complex: bool) -> UnitaryParameterization {
    if complex {
        UnitaryParameterization::unitary(n, 0.7).unwrap()
    } else {
        UnitaryParameterization::special_orthogonal(n).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_are_unitary(n in 2usize..=6, complex: bool, unit in angles(36)) {
        let p = group(n, complex);
        let xi = in_box(&p, &unit);
        let u = p.build(&xi).unwrap();
        prop_assert!(u.unitarity_error() < 1e-12);
        // U†∂U is anti-Hermitian for every generator
        for d in p.derivatives(&xi).unwrap() {
            let a = &u.adjoint() * &d;
            let sym = ComplexMatrix::from_fn(n, n, |i, j| a[(i, j)] + a[(j, i)].conj());
            prop_assert!(sym.max_abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_matches_finite_difference(n in 2usize..=6, complex: bool, unit in angles(36)) {
        let p = group(n, complex);
        let xi = in_box(&p, &unit);
        for (k, d) in p.derivatives(&xi).unwrap().iter().enumerate() {
            let fd = p.finite_difference(&xi, k, fibervol::unitary::FD_STEP).unwrap();
            prop_assert!(d.max_abs_diff(&fd) < 5e-9, "k = {k}: {}", d.max_abs_diff(&fd));
        }
    }

    #[test]
    fn fiber_round_trip(d in 2usize..=4, lambda in simplex(4), rot in angles(16), unit in angles(16), complex: bool) {
        let mut spectrum = lambda[..d].to_vec();
        let s: f64 = spectrum.iter().sum();
        spectrum.iter_mut().for_each(|x| *x /= s);
        let basis_p = UnitaryParameterization::unitary(d, 0.0).unwrap();
        let basis = basis_p.build(&in_box(&basis_p, &rot)).unwrap();
        let rho = DensityOperator::from_spectrum(&spectrum).unwrap().rotated(&basis).unwrap();
        let f = Fiber::new(rho.clone(), group(d, complex)).unwrap();
        let xi = in_box(f.param(), &unit);
        let point = f.point(&xi).unwrap();
        prop_assert!((point.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert!(partial_trace_r(&point, d, d).unwrap().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn su2_volume_squared_is_linear_entropy(l1 in 0.0f64..=1.0) {
        let lambda = [l1, 1.0 - l1];
        let v = closed_form_volume(ClosedFormGroup::Su2, &lambda).unwrap();
        prop_assert!((2.0 * v * v - linear_entropy(&lambda).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_are_concave(a in simplex(3), b in simplex(3), t in prop::sample::select(vec![0.25, 0.5, 0.75])) {
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let v = |l: &[f64]| closed_form_volume(ClosedFormGroup::So3, l).unwrap();
        prop_assert!(v(&mix) >= t * v(&a) + (1.0 - t) * v(&b) - 1e-9);

        let (a2, b2) = ([a[0], 1.0 - a[0]], [b[0], 1.0 - b[0]]);
        let m2 = [t * a2[0] + (1.0 - t) * b2[0], t * a2[1] + (1.0 - t) * b2[1]];
        let w = |l: &[f64]| closed_form_volume(ClosedFormGroup::Su2, l).unwrap();
        prop_assert!(w(&m2) >= t * w(&a2) + (1.0 - t) * w(&b2) - 1e-9);
    }

    #[test]
    fn entropies_are_schur_concave(p in simplex(4), t in 0.0f64..1.0) {
        // averaging two entries is a doubly stochastic step toward uniform
        let mut q = p.clone();
        let (x, y) = (p[0], p[1]);
        q[0] = t * x + (1.0 - t) * y;
        q[1] = (1.0 - t) * x + t * y;
        prop_assert!(von_neumann(&q).unwrap() >= von_neumann(&p).unwrap() - 1e-12);
        prop_assert!(linear_entropy(&q).unwrap() >= linear_entropy(&p).unwrap() - 1e-12);
    }

    #[test]
    fn family_matches_pair_product(n in 3usize..=12, s in 0.0f64..1.0) {
        let lo = 1.0 / n as f64;
        let x = lo + (1.0 - lo) * s;
        let a = v_norm_family(n, x).unwrap();
        let b = v_norm_family_by_pairs(n, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn entropies_bounded_by_volume_on_qubits(l1 in 0.0f64..=1.0) {
        let lambda = [l1, 1.0 - l1];
        let v = normalized_closed_form(ClosedFormGroup::Su2, &lambda).unwrap();
        prop_assert!(v >= linear_entropy_normalized(&lambda).unwrap() - 1e-12);
        prop_assert!(v >= von_neumann_normalized(&lambda).unwrap() - 1e-12);
    }
}

#[test]
fn volume_grows_toward_uniform() {
    for (group, d) in [
        (ClosedFormGroup::So3, 3),
        (ClosedFormGroup::Su2, 2),
        (ClosedFormGroup::SoN, 5),
    ] {
        let mut prev = -1.0;
        for i in 0..100 {
            let t = i as f64 / 99.0;
            let lambda: Vec<f64> = (0..d)
                .map(|k| (1.0 - t) * f64::from(k == 0) + t / d as f64)
                .collect();
            let v = closed_form_volume(group, &lambda).unwrap();
            assert!(v >= prev - 1e-15, "{group:?} t = {t}");
            prev = v;
        }
    }
}

#[test]
fn uniform_spectrum_maximizes_volume() {
    let g = build_grid(200).unwrap();
    let best = g
        .cells()
        .iter()
        .max_by(|a, b| {
            Measure::Volume
                .evaluate(&a.lambda)
                .total_cmp(&Measure::Volume.evaluate(&b.lambda))
        })
        .unwrap();
    for x in best.lambda {
        assert!((x - 1.0 / 3.0).abs() < 0.01, "{:?}", best.lambda);
    }
    for cell in g.cells() {
        assert!(Measure::Volume.evaluate(&cell.lambda) <= 1.0 + 1e-12);
    }
    let mut best_q = (0.0, 0.0);
    for i in 0..=1000 {
        let l1 = i as f64 / 1000.0;
        let v = closed_form_volume(ClosedFormGroup::Su2, &[l1, 1.0 - l1]).unwrap();
        if v > best_q.1 {
            best_q = (l1, v);
        }
    }
    assert_eq!(best_q.0, 0.5);
}

#[test]
fn pure_states_have_zero_volume() {
    assert_eq!(
        closed_form_volume(ClosedFormGroup::Su2, &[1.0, 0.0]).unwrap(),
        0.0
    );
    for d in 3..7 {
        let mut p = vec![0.0; d];
        p[0] = 1.0;
        assert_eq!(closed_form_volume(ClosedFormGroup::SoN, &p).unwrap(), 0.0);
    }
    let f = Fiber::new(
        DensityOperator::from_spectrum(&[0.0, 1.0, 0.0]).unwrap(),
        UnitaryParameterization::special_orthogonal(3).unwrap(),
    )
    .unwrap();
    let r = integrate_volume(&f, Integration::Quadrature, 20_000).unwrap();
    assert!(r.normalized < 1e-7);
}

#[test]
fn pair_product_is_not_concave_beyond_so3() {
    let v = |l: &[f64]| closed_form_volume(ClosedFormGroup::SoN, l).unwrap();
    let a = [0.0, 0.0, 0.0, 1.0];
    let b = [0.1, 0.1, 0.1, 0.7];
    let mid = [0.05, 0.05, 0.05, 0.85];
    assert!((v(&mid) - 0.027).abs() < 1e-12);
    assert!((0.5 * (v(&a) + v(&b)) - 0.032).abs() < 1e-12);
}

#[test]
fn rotated_basis_keeps_volume() {
    let param = UnitaryParameterization::special_orthogonal(3).unwrap();
    let spectrum = [0.5, 0.3, 0.2];
    let plain = Fiber::new(
        DensityOperator::from_spectrum(&spectrum).unwrap(),
        param.clone(),
    )
    .unwrap();
    let basis = UnitaryParameterization::unitary(3, 0.0)
        .unwrap()
        .build(&[0.3, 1.1, 0.2, 2.0, 4.0, 0.5, 1.0, 3.0])
        .unwrap();
    let rotated = DensityOperator::from_spectrum(&spectrum)
        .unwrap()
        .rotated(&basis)
        .unwrap();
    let turned = Fiber::new(rotated, param).unwrap();
    let a = integrate_volume(&plain, Integration::Quadrature, 20_000).unwrap();
    let b = integrate_volume(&turned, Integration::Quadrature, 20_000).unwrap();
    assert!(
        (a.normalized - b.normalized).abs() <= (a.estimator_error + b.estimator_error).max(1e-9)
    );
    assert!(
        (normalized_closed_form(ClosedFormGroup::So3, turned.rho().eigenvalues()).unwrap()
            - normalized_closed_form(ClosedFormGroup::So3, &spectrum).unwrap())
        .abs()
            < 1e-12
    );
}
