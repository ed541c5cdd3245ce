use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use pauli_core::charvals::{
    derivative_at, gs_index, gs_index_fixed, locate, max_abs, Contour, ContourShape, DerivativeScheme, LocateOptions,
    MatrixFamily, ScalarFamily,
};
use proptest::prelude::*;

const ANALYTIC: DerivativeScheme = DerivativeScheme::Analytic;

fn rect(lo: (f64, f64), hi: (f64, f64)) -> ContourShape {
    ContourShape::Rectangle { lo: C::new(lo.0, lo.1), hi: C::new(hi.0, hi.1) }
}

/// `diag(Π_{j∈row} (k − z_j))`.
fn diagonal_polynomial(rows: Vec<Vec<C>>) -> MatrixFamily<impl Fn(C) -> DMatrix<C> + Sync> {
    let dim = rows.len();
    MatrixFamily::new(dim, move |k| {
        DMatrix::from_fn(dim, dim, |i, j| if i == j { rows[i].iter().fold(C::new(1.0, 0.0), |p, &z| p * (k - z)) } else { C::new(0.0, 0.0) })
    })
}

#[test]
fn index_is_invariant_along_a_homotopy() {
    let shape = ContourShape::Circle { center: C::new(0.0, 0.0), radius: 1.0 };
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let a = C::from_polar(0.6 * t, 2.0 * t);
        let f = MatrixFamily::new(2, move |k: C| {
            let mut m = DMatrix::from_element(2, 2, C::new(0.0, 0.0));
            m[(0, 0)] = k - a;
            m[(0, 1)] = C::new(t, 0.0);
            m[(1, 0)] = C::new(0.0, 0.3 * t);
            m[(1, 1)] = (k - C::new(0.2, -0.1)) * (k - 3.0);
            m
        });
        let e = gs_index(&f, shape, ANALYTIC, 1024).unwrap();
        assert_eq!(e.index, 2, "t={t}: {}", e.value);
    }
}

#[test]
fn poles_count_negatively() {
    let f = ScalarFamily::new(|k: C| (k - 0.1) / ((k + 0.2) * (k - 0.3) * (k - 5.0)));
    let e = gs_index(&f, ContourShape::Circle { center: C::new(0.0, 0.0), radius: 1.0 }, ANALYTIC, 1024).unwrap();
    assert_eq!(e.index, -1);
}

#[test]
fn matrix_index_counts_multiplicity() {
    let f = diagonal_polynomial(vec![
        vec![C::new(0.1, 0.1), C::new(0.1, 0.1)],
        vec![C::new(-0.3, 0.2), C::new(2.0, 0.0)],
        vec![C::new(0.1, 0.1)],
    ]);
    let e = gs_index(&f, rect((-0.5, -0.5), (0.5, 0.5)), ANALYTIC, 1024).unwrap();
    assert_eq!(e.index, 4);
    let expect = C::new(0.1, 0.1) * 3.0 + C::new(-0.3, 0.2);
    assert!((e.first_moment - expect).norm() < 1e-10);
}

#[test]
fn empty_region_has_no_values() {
    let f = ScalarFamily::with_derivative(|k: C| k.exp(), |k: C| k.exp());
    let rep = locate(&f, C::new(-1.0, -1.0), C::new(1.0, 1.0), &LocateOptions::default()).unwrap();
    assert_eq!(rep.total_index, 0);
    assert!(rep.values.is_empty());
    assert_eq!(rep.cells, 1);
}

#[test]
fn locate_separates_a_double_value_from_a_simple_one() {
    let z1 = C::new(0.0123, -0.031);
    let z2 = C::new(-0.047, 0.019);
    let f = ScalarFamily::new(move |k: C| (k - z1) * (k - z1) * (k - z2));
    let opts = LocateOptions { min_size: 1e-6, ..Default::default() };
    let rep = locate(&f, C::new(-0.1, -0.1), C::new(0.1, 0.1), &opts).unwrap();
    assert_eq!(rep.total_index, 3);
    let mut vals = rep.values.clone();
    vals.sort_by_key(|v| v.multiplicity);
    assert_eq!(vals.iter().map(|v| v.multiplicity).collect::<Vec<_>>(), vec![1, 2]);
    assert!((vals[0].k - z2).norm() < 1e-6);
    assert!((vals[1].k - z1).norm() < 1e-6);
}

#[test]
fn central_and_analytic_derivatives_agree() {
    let t = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, 0.1]).map(|x| C::new(x, 0.0));
    let nu2 = 0.25;
    let t2 = t.clone();
    let f = MatrixFamily::new(2, move |k: C| DMatrix::identity(2, 2) - t2.map(|x| x * C::i() * nu2 / k));
    for k in [C::new(0.05, 0.02), C::new(-0.03, 0.1), C::new(0.2, -0.2)] {
        let exact = t.map(|x| x * C::i() * nu2 / (k * k));
        let approx = derivative_at(&f, k, DerivativeScheme::Central { h: 1e-4 * k.norm(), tolerance: 1e-6 }).unwrap();
        assert!(max_abs(&(&approx.value - &exact)) < 1e-8 * max_abs(&exact));
    }
}

#[test]
fn trapezoid_circle_converges_geometrically() {
    let f = ScalarFamily::with_derivative(|k: C| k - 0.7, |_| C::new(1.0, 0.0));
    let mut prev = f64::INFINITY;
    for n in [8, 16, 32, 64] {
        let c = Contour::circle(C::new(0.0, 0.0), 1.0, n).unwrap();
        let r = gs_index_fixed(&f, &c, ANALYTIC).unwrap().residual;
        assert!(r < prev * 0.1 || r < 1e-13, "n={n}: {r}");
        prev = r;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn index_is_additive_over_a_split(
        roots in prop::collection::vec((-0.9f64..0.9, -0.9f64..0.9), 1..5),
        sx in 0.3f64..0.7,
        sy in 0.3f64..0.7,
    ) {
        let (lo, hi) = ((-1.0, -1.0), (1.0, 1.0));
        let (mx, my) = (lo.0 + 2.0 * sx, lo.1 + 2.0 * sy);
        let zs: Vec<C> = roots.iter().map(|&(a, b)| C::new(a, b)).collect();
        prop_assume!(zs.iter().all(|z| (z.re - mx).abs() > 0.02 && (z.im - my).abs() > 0.02));
        let f = diagonal_polynomial(vec![zs.clone()]);
        let whole = gs_index(&f, rect(lo, hi), ANALYTIC, 8192).unwrap().index;
        let parts: i64 = [rect(lo, (mx, my)), rect((mx, lo.1), (hi.0, my)), rect((lo.0, my), (mx, hi.1)), rect((mx, my), hi)]
            .iter()
            .map(|&s| gs_index(&f, s, ANALYTIC, 8192).unwrap().index)
            .sum();
        prop_assert_eq!(whole, zs.len() as i64);
        prop_assert_eq!(parts, whole);
    }
}
