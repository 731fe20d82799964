use nalgebra::DMatrix;
use proptest::prelude::*;
use yamabe_core::tensor::{
    curvature_with_weyl, frame_max_norm, orthonormal_frame, riemann_ricci_scalar, riemann_symmetry_residual, trace, trace_residual,
    MetricChart, DEFAULT_STEP,
};

/// `g(x) = I + A(x)^T A(x)` with `A` affine-plus-quadratic in `x`.
fn random_chart(n: usize, coeffs: Vec<f64>) -> MetricChart {
    MetricChart::new(vec![(-1.0, 1.0); n], move |x| {
        let mut a = DMatrix::zeros(n, n);
        let mut c = coeffs.iter().cycle();
        for i in 0..n {
            for j in 0..n {
                let mut v = *c.next().unwrap();
                for xk in x {
                    v += c.next().unwrap() * xk + 0.5 * c.next().unwrap() * xk * xk;
                }
                a[(i, j)] = 0.3 * v;
            }
        }
        DMatrix::identity(n, n) + a.transpose() * a
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 17)
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5..0.5f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riemann_symmetries_and_bianchi((n, x) in (3usize..6).prop_flat_map(|n| (Just(n), point(n))), c in coeffs()) {
        let chart = random_chart(n, c);
        let curv = riemann_ricci_scalar(&chart, &x, DEFAULT_STEP).unwrap();
        let scale = curv.riemann.max_abs().max(1.0);
        prop_assert!(riemann_symmetry_residual(&curv.riemann) < 1e-10 * scale);
        prop_assert!((curv.ricci.clone() - curv.ricci.transpose()).amax() < 1e-10 * scale);
        prop_assert!((trace(&curv.ricci, &curv.inverse) - curv.scalar).abs() < 1e-12 * scale);
    }

    #[test]
    fn weyl_is_totally_trace_free((n, x) in (3usize..6).prop_flat_map(|n| (Just(n), point(n))), c in coeffs()) {
        let chart = random_chart(n, c);
        let curv = curvature_with_weyl(&chart, &x, DEFAULT_STEP).unwrap();
        let w = curv.weyl.as_ref().unwrap();
        let scale = curv.riemann.max_abs().max(1.0);
        prop_assert!(trace_residual(w, &curv.inverse) < 1e-10 * scale);
        prop_assert!(riemann_symmetry_residual(w) < 1e-10 * scale);
    }

    #[test]
    fn weyl_vanishes_in_dimension_three(x in point(3), c in coeffs()) {
        let chart = random_chart(3, c);
        let curv = curvature_with_weyl(&chart, &x, DEFAULT_STEP).unwrap();
        let scale = curv.riemann.max_abs().max(1.0);
        prop_assert!(curv.weyl.unwrap().max_abs() < 1e-10 * scale);
    }

    #[test]
    fn frame_is_orthonormal((n, x) in (2usize..6).prop_flat_map(|n| (Just(n), point(n))), c in coeffs()) {
        let chart = random_chart(n, c);
        let g = chart.metric_at(&x).unwrap();
        let f = orthonormal_frame(&g).unwrap();
        prop_assert!((f.transpose() * &g * &f - DMatrix::identity(n, n)).amax() < 1e-12);
        prop_assert!((frame_max_norm(&g, &g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn curvature_is_deterministic(x in point(4), c in coeffs()) {
        let chart = random_chart(4, c);
        let a = curvature_with_weyl(&chart, &x, DEFAULT_STEP).unwrap();
        let b = curvature_with_weyl(&chart, &x, DEFAULT_STEP).unwrap();
        prop_assert_eq!(a.riemann, b.riemann);
        prop_assert_eq!(a.weyl, b.weyl);
    }
}

/// Round sphere of radius `a` in the coordinates `(theta, phi)`: the FD
/// error in `R = 2/a^2` falls by four per halving of `h`.
#[test]
fn sphere_scalar_converges_at_second_order() {
    let a = 1.7;
    let chart = MetricChart::new(vec![(0.3, 2.8), (-1.0, 1.0)], move |x| {
        DMatrix::from_row_slice(2, 2, &[a * a, 0.0, 0.0, (a * x[0].sin()).powi(2)])
    })
    .unwrap();
    let exact = 2.0 / (a * a);
    let err = |h: f64| (riemann_ricci_scalar(&chart, &[0.7, 0.0], h).unwrap().scalar - exact).abs();
    let ratio = err(4e-3) / err(2e-3);
    assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    assert!(err(DEFAULT_STEP) < 10.0 * DEFAULT_STEP * DEFAULT_STEP);
}
