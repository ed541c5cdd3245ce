//! Fixtures shared by the kernel benchmarks.

use num_complex::Complex64;
use pauli_core::axial::{AxialGrid, AxialProfile, GridMapping};
use pauli_core::effective::{EffectiveModel, RemainderOrder, SectorFamily};
use pauli_core::landau::{LandauBasisSpec, RadialProfile};
use pauli_core::spectra::{assemble_sector, SectorMatrix};

pub fn power_law() -> RadialProfile {
    RadialProfile::power_law(2.0, 1.0).expect("valid profile")
}

pub fn basis(q_max: usize, l_max: usize) -> LandauBasisSpec {
    LandauBasisSpec::new(1.0, q_max, l_max, 32).expect("valid basis")
}

/// One angular-momentum sector on a graded axial grid.
pub fn sector(l: usize, q_max: usize, nodes: usize, nu: f64) -> SectorMatrix {
    let grid = AxialGrid::graded(40.0, nodes, 4.0).expect("valid grid");
    let axial = AxialProfile::exp_bracket(1.0, 1.0).expect("valid profile");
    assemble_sector(l, &basis(q_max, l), &grid, &power_law(), &axial, nu).expect("sector")
}

/// Full-order sector family on a small uniform grid.
pub fn family(l: usize, nodes: usize, nu: f64) -> SectorFamily {
    let grid = AxialGrid::small(14.0, nodes, GridMapping::Uniform).expect("valid grid");
    let axial = AxialProfile::exp_bracket(1.0, 1.0).expect("valid profile");
    let model = EffectiveModel::new(basis(1, l), grid, power_law(), axial).expect("model");
    model.family(l, nu, RemainderOrder::Full).expect("family")
}

/// A point of the punctured disk where the families are evaluated.
pub fn probe_k() -> Complex64 {
    Complex64::new(0.013, 0.031)
}
