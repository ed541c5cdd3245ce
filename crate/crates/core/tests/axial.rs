use approx::assert_relative_eq;
use num_complex::Complex64 as C;
use pauli_core::axial::{
    axial_coupling, free_resolvent_kernel, k2_constant, rank_one_a, s_kernel, solve_tridiagonal, AxialGrid,
    AxialProfile, KConstants,
};
use proptest::prelude::*;

/// `½⟨(−∂² + κ²)^{-1} e^{−|x|}, e^{−|x|}⟩`, from `g = (e^{−|x|} − e^{−κ|x|}/κ)/(κ² − 1)`.
fn exp_abs_coupling(kappa: f64) -> f64 {
    (kappa + 2.0) / (2.0 * kappa * (kappa + 1.0).powi(2))
}

#[test]
fn exp_abs_coupling_matches_closed_form() {
    let grid = AxialGrid::uniform(28.0, 262_144).unwrap();
    let u = AxialProfile::exp_abs(1.0).unwrap();
    for (b0, q) in [(0.5, 1usize), (1.0, 1), (0.5, 3)] {
        let c = axial_coupling(q, &u, b0, &grid).unwrap();
        let exact = exp_abs_coupling((2.0 * b0 * q as f64).sqrt());
        assert!((c - exact).abs() < 1e-6, "b0={b0} q={q}: {c} vs {exact}");
    }
}

#[test]
fn couplings_scale_quadratically() {
    let grid = AxialGrid::uniform(16.0, 65_536).unwrap();
    let u = AxialProfile::exp_bracket(1.0, 1.0).unwrap();
    let c = C::new(0.6, -1.1);
    let base = KConstants::compute(&u, 1.0, 2, &grid).unwrap();
    let scaled = KConstants::compute(&u.scaled(c), 1.0, 2, &grid).unwrap();
    for (a, b) in base.c.iter().zip(&scaled.c) {
        assert_relative_eq!(a * c.norm_sqr(), *b, max_relative = 1e-12);
    }
    assert!(base.is_decreasing() && base.within_resolvent_bound() && base.k1 < base.k2);
}

#[test]
fn box_k2_is_half() {
    let grid = AxialGrid::uniform(12.0, 1 << 16).unwrap();
    let u = AxialProfile::smoothed_box(1.0, 1e-3).unwrap();
    let k2 = k2_constant(&u, 1.0, &grid).unwrap();
    assert!((k2 - 0.5).abs() < 1e-3, "{k2}");
    let k1 = axial_coupling(1, &u, 1.0, &AxialGrid::uniform(12.0, 1 << 17).unwrap()).unwrap();
    assert!(k1 < k2);
}

#[test]
fn zero_profile_rejected() {
    let grid = AxialGrid::uniform(16.0, 128).unwrap();
    let zero = AxialProfile::custom("zero", |_| C::new(0.0, 0.0), 1.0).unwrap();
    assert!(k2_constant(&zero, 1.0, &grid).is_err());
    assert!(zero.check_grid(&grid).is_err());
}

#[test]
fn resolvent_kernel_matches_grid_solve() {
    let grid = AxialGrid::uniform(16.0, 65_536).unwrap();
    let u = AxialProfile::exp_bracket(1.0, 1.0).unwrap();
    let values: Vec<f64> = u.sample(&grid).iter().map(|v| v.re).collect();
    let (d, o) = grid.kinetic();
    let sw = grid.sqrt_weights();
    let rhs: Vec<f64> = values.iter().zip(&sw).map(|(v, s)| v * s).collect();
    let y = solve_tridiagonal(&d, &o, 1.0, &rhs);
    let z = C::new(-1.0, 0.0);
    for i in (20_000..45_000).step_by(2_500) {
        let x = grid.nodes[i];
        let solved = y[i] / sw[i];
        let kernel: f64 = (0..grid.len())
            .map(|j| grid.weights[j] * free_resolvent_kernel(z, x, grid.nodes[j]).unwrap().re * values[j])
            .sum();
        assert!((solved - kernel).abs() < 1e-6, "x={x}: {solved} vs {kernel}");
    }
}

#[test]
fn kernel_at_minus_one_and_positive_axis() {
    let k = free_resolvent_kernel(C::new(-1.0, 0.0), 0.3, -1.2).unwrap();
    assert!((k - C::new(0.5 * (-1.5f64).exp(), 0.0)).norm() < 1e-15);
    assert!(free_resolvent_kernel(C::new(2.0, 0.0), 0.0, 1.0).is_err());
}

#[test]
fn s_kernel_reassembles_the_resolvent() {
    let eps = 0.5;
    for k in [C::new(0.1, 0.2), C::new(-0.05, 0.3), C::new(0.2, 0.01)] {
        for (x, xp) in [(0.0, 1.0), (-2.5, 0.7), (3.0, 3.0)] {
            let n = free_resolvent_kernel(k * k, x, xp).unwrap();
            let split = C::new(0.0, 0.5) / k + s_kernel(k, x, xp, eps).unwrap();
            assert!((n - split).norm() < 1e-12 * n.norm().max(1.0), "k={k} x={x} x'={xp}");
        }
    }
    let tiny = C::new(1e-9, 1e-9);
    assert!((s_kernel(tiny, 0.0, 2.0, eps).unwrap() - C::new(-1.0, 0.0)).norm() < 1e-6);
    assert_eq!(s_kernel(C::new(0.1, 0.1), 1.0, 1.0, eps).unwrap(), C::new(0.0, 0.0));
}

#[test]
fn rank_one_structure() {
    let grid = AxialGrid::small(10.0, 40, pauli_core::axial::GridMapping::Uniform).unwrap();
    let a = rank_one_a(1.0, &grid);
    let sv = a.clone().singular_values();
    let mut sv: Vec<f64> = sv.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    assert!(sv[1] < 1e-12 * sv[0]);
    let trace: C = (0..grid.len()).map(|i| a[(i, i)]).sum();
    let expect: f64 = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&x, &w)| w * (-2.0 * (1.0 + x * x).sqrt()).exp())
        .sum();
    assert!((trace - C::new(0.0, 0.5 * expect)).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kernel_is_symmetric(re in -3.0f64..-0.01, im in -2.0f64..2.0, x in -5.0f64..5.0, xp in -5.0f64..5.0) {
        let z = C::new(re, im);
        let a = free_resolvent_kernel(z, x, xp).unwrap();
        let b = free_resolvent_kernel(z, xp, x).unwrap();
        prop_assert!((a - b).norm() <= 1e-15 * a.norm());
    }

    #[test]
    fn couplings_decrease_in_level(delta in 0.6f64..1.5, shift in -1.0f64..1.0, b0 in 0.5f64..2.0) {
        let grid = AxialGrid::uniform(24.0, 2048).unwrap();
        let u = AxialProfile::custom("shifted", move |x| C::new((-2.0 * delta * ((1.0 + (x - shift).powi(2)).sqrt() - 1.0)).exp(), 0.0), delta).unwrap();
        let k = KConstants::on_grid(&u.sample(&grid), b0, 5, &grid).unwrap();
        prop_assert!(k.is_decreasing());
        prop_assert!(k.within_resolvent_bound());
        prop_assert!(k.k1 < k.k2);
    }
}
