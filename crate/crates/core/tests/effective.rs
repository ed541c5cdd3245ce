use num_complex::Complex64 as C;
use pauli_core::axial::{AxialGrid, AxialProfile, GridMapping};
use pauli_core::charvals::{gs_index, max_abs, ContourShape, DerivativeScheme, HolomorphicFamily};
use pauli_core::effective::{exceptional_couplings, CouplingScan, EffectiveModel, RemainderOrder};
use pauli_core::landau::{LandauBasisSpec, RadialProfile};
use pauli_core::Error;
use proptest::prelude::*;

fn model(radial: RadialProfile, b0: f64, q_max: usize, n: usize) -> EffectiveModel {
    let basis = LandauBasisSpec::new(b0, q_max, 20, 32).unwrap();
    let grid = AxialGrid::small(10.0, n, GridMapping::Uniform).unwrap();
    EffectiveModel::new(basis, grid, radial, AxialProfile::exp_bracket(1.0, 1.0).unwrap()).unwrap()
}

#[test]
fn flat_radial_profile_reduces_to_axial_constants() {
    let m = model(RadialProfile::constant(1.0).unwrap(), 1.0, 2, 64);
    for l in [0usize, 4, 11] {
        let b = m.block(l).unwrap();
        assert!((b.w_h2inv - m.constants.k1).abs() < 1e-12 * m.constants.k1);
        assert!((b.w_i - 0.5 * m.axial_mass()).abs() < 1e-12);
        assert!((b.toeplitz - 1.0).abs() < 1e-14, "l={l}: {:e}", b.toeplitz - 1.0);
        assert_eq!(b.tail, 0.0);
    }
}

#[test]
fn gaussian_w_i_is_geometric() {
    let b0 = 1.4;
    let m = model(RadialProfile::gaussian(0.5 * b0, 1.0).unwrap(), b0, 3, 64);
    for l in 0..6usize {
        let b = m.block(l).unwrap();
        let expect = 0.5 * m.axial_mass() * 3f64.powi(-(l as i32 + 1));
        assert!((b.w_i - expect).abs() < 1e-12 * expect, "l={l}");
        assert!((b.toeplitz - 0.5f64.powi(l as i32 + 1)).abs() < 1e-12);
    }
}

#[test]
fn sandwiched_between_toeplitz_bounds() {
    let m = model(RadialProfile::power_law(2.0, 1.0).unwrap(), 1.0, 3, 64);
    for b in m.blocks(20).unwrap() {
        assert!(b.w_h2inv - m.constants.k1 * b.toeplitz.powi(2) >= -1e-12);
        assert!(b.w_i / (2.0 * m.basis.b0) - b.w_h2inv >= -1e-12);
    }
}

#[test]
fn t0_is_hermitian_rank_one() {
    let m = model(RadialProfile::power_law(2.0, 1.0).unwrap(), 1.0, 1, 20);
    for l in [0usize, 2] {
        let fam = m.family(l, 0.4, RemainderOrder::Full).unwrap();
        let t0 = &fam.t0;
        assert!(max_abs(&(t0 - t0.adjoint())) < 1e-15 * max_abs(t0));
        let eig = fam.t0_eigenvalues();
        assert!((eig[0] - m.block(l).unwrap().w_h2inv).abs() < 1e-12 * eig[0]);
        assert!(eig[1..].iter().all(|e| e.abs() < 1e-12 * eig[0]));
    }
}

#[test]
fn order_zero_family_has_its_value_on_the_imaginary_axis() {
    let m = model(RadialProfile::power_law(2.0, 1.0).unwrap(), 1.0, 1, 16);
    let nu = 0.5;
    for l in [0usize, 1] {
        let fam = m.family(l, nu, RemainderOrder::Zero).unwrap();
        let expect = C::new(0.0, nu * nu * fam.t0_eigenvalues()[0]);
        let shape = ContourShape::Circle { center: expect, radius: 0.3 * expect.norm() };
        let e = gs_index(&fam, shape, DerivativeScheme::Analytic, 4096).unwrap();
        assert_eq!(e.index, 1);
        assert!((e.centroid().unwrap() - expect).norm() < 1e-10 * expect.norm());
    }
}

#[test]
fn family_refuses_points_outside_its_disk() {
    let m = model(RadialProfile::power_law(2.0, 1.0).unwrap(), 1.0, 1, 16);
    let fam = m.family(0, 0.3, RemainderOrder::Full).unwrap();
    assert!(matches!(fam.eval(C::new(0.0, 0.0)), Err(Error::OutsideDisk { .. })));
    assert!(matches!(fam.eval(C::new(0.95, 0.0)), Err(Error::OutsideDisk { .. })));
    assert!(fam.eval(C::new(0.01, 0.02)).is_ok());
}

#[test]
fn exceptional_couplings_of_a_sector() {
    let m = model(RadialProfile::power_law(2.0, 1.0).unwrap(), 1.0, 1, 12);
    let fam = m.family(0, 0.3, RemainderOrder::One).unwrap();
    let nus = exceptional_couplings(&fam.t0, fam.b_zero());
    assert!(nus.windows(2).all(|w| w[0] <= w[1]));
    assert!(nus.iter().all(|&v| v > 0.0 && v.is_finite()));
    if let Some(&first) = nus.first() {
        assert!(!CouplingScan::new(first, nus.clone(), None).safe);
        assert!(CouplingScan::new(0.5 * first, nus.clone(), None).safe);
    }
}

#[test]
fn truncated_levels_reported() {
    let b0 = 1.0;
    let m = model(RadialProfile::gaussian(0.5 * b0, 1.0).unwrap(), b0, 1, 64);
    assert!(matches!(m.block(80), Err(Error::TruncationTail { l: 80, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn effective_values_scale_quadratically(c in 0.2f64..3.0, l in 0usize..12) {
        let base = model(RadialProfile::power_law(2.0, 1.0).unwrap(), 1.0, 2, 48);
        let scaled = model(RadialProfile::power_law(2.0, 1.0).unwrap().scaled(c), 1.0, 2, 48);
        let (a, b) = (base.block(l).unwrap(), scaled.block(l).unwrap());
        prop_assert!((b.w_h2inv - c * c * a.w_h2inv).abs() <= 1e-12 * b.w_h2inv);
        prop_assert!((b.w_i - c * c * a.w_i).abs() <= 1e-12 * b.w_i);
    }
}
