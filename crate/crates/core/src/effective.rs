//! Effective transverse operators and the Birman–Schwinger family near
//! `k = 0`.
//!
//! Per angular-momentum sector ℓ the spin-down space is truncated to the
//! levels `m = 0..=q_max` of `H₂` (eigenvalues `2b₀(m+1)`) tensored with the
//! axial grid, written in the eigenbasis of `Ã`. With `Ã = V diag(E) Vᵀ`,
//! `P = Vᵀ diag(𝒰)` and `e_{m,j} = E_j + 2b₀(m+1)`, the weight
//! `w = ℋ₂^{-1/2} U` has blocks `U⊥[m, m'] · diag(e_m^{-1/2}) · P`, and
//!
//! ```text
//! 𝒯_{νV}(k²) = ν² (1 + M(k²)) [ (i/k) T₀ + X₁(k) + X₃(k²) ]
//!            = ν² [ (i/k) T₀ + B(k) ]
//! ```
//!
//! where `T₀ = ½ w(p ⊗ |1⟩⟨1|)w*`, `X₁ = w(p ⊗ s(k))w*` carries the regular
//! part of the free axial resolvent, `X₃` the spin-up levels `m' ≥ 1` and
//! `M(z) = Σ_{i ≥ 1} (z ℋ₂^{-1})^i`.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::axial::{l2_mass, punctured_disk_radius, s_derivative, s_value, AxialGrid, AxialProfile, KConstants};
use crate::charvals::HolomorphicFamily;
use crate::error::{Error, Result};
use crate::landau::{LandauBasisSpec, RadialProfile, SectorElements};

/// Order of the truncated geometric series for `M(z)`.
pub const M_SERIES_ORDER: i32 = 8;
/// Enforced series radius as a fraction of `2b₀`.
pub const M_SERIES_FRACTION: f64 = 0.9;
/// Relative null-space threshold for `Π₀`.
pub const KERNEL_TOLERANCE: f64 = 1e-10;
/// Default relative tolerance of the level-truncation tail certificate.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 0.1;

type C = Complex64;

/// Sector values of the effective operators.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveBlock {
    pub l: usize,
    /// Toeplitz eigenvalue `λ_ℓ`.
    pub toeplitz: f64,
    /// `p₀ W(ℋ₂^{-1}) p₀` in sector ℓ.
    pub w_h2inv: f64,
    /// `p₀ W(I) p₀` in sector ℓ.
    pub w_i: f64,
    /// Bound on the levels beyond `q_max + 1` omitted from `w_h2inv`.
    pub tail: f64,
}

/// Everything shared by the sectors of one separable potential on one grid.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    pub basis: LandauBasisSpec,
    pub grid: AxialGrid,
    pub radial: RadialProfile,
    pub axial: AxialProfile,
    pub u: Vec<C>,
    pub constants: KConstants,
    pub tail_tolerance: f64,
    /// Eigenvalues (ascending) and eigenvectors (columns) of `Ã`, built on
    /// first use by a family.
    spectral: OnceLock<(Vec<f64>, DMatrix<f64>)>,
    mass: f64,
}

impl EffectiveModel {
    pub fn new(basis: LandauBasisSpec, grid: AxialGrid, radial: RadialProfile, axial: AxialProfile) -> Result<Self> {
        let u = axial.sample(&grid);
        let constants = KConstants::on_grid(&u, basis.b0, basis.q_max, &grid)?;
        let mass = l2_mass(&u, &grid);
        Ok(Self {
            basis,
            grid,
            radial,
            axial,
            u,
            constants,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            spectral: OnceLock::new(),
            mass,
        })
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = tol;
        self
    }

    /// Eigen-decomposition of the axial kinetic matrix.
    pub fn axial_modes(&self) -> &(Vec<f64>, DMatrix<f64>) {
        self.spectral.get_or_init(|| self.grid.kinetic_eigen())
    }

    /// `Σ w_i |𝒰_i|²`.
    pub fn axial_mass(&self) -> f64 {
        self.mass
    }

    pub fn elements(&self, l: usize) -> Result<SectorElements> {
        SectorElements::compute(l, &self.radial, self.basis.b0, self.basis.q_max, self.basis.radial_nodes)
    }

    pub fn block(&self, l: usize) -> Result<EffectiveBlock> {
        let el = self.elements(l)?;
        self.block_from(&el)
    }

    pub fn block_from(&self, el: &SectorElements) -> Result<EffectiveBlock> {
        let w_h2inv = build_w_h2inv(el, &self.constants);
        let captured: f64 = (0..el.uperp.nrows()).map(|m| el.uperp[(m, 0)].powi(2)).sum();
        let tail = self.constants.omitted_bound * (el.u_sq - captured).max(0.0);
        if tail > self.tail_tolerance * w_h2inv {
            return Err(Error::TruncationTail { l: el.l, tail, tolerance: self.tail_tolerance * w_h2inv });
        }
        Ok(EffectiveBlock {
            l: el.l,
            toeplitz: el.toeplitz(),
            w_h2inv,
            w_i: build_w_i(el, self.mass),
            tail,
        })
    }

    /// Blocks for `0 ≤ ℓ ≤ l_max`, in ℓ order.
    pub fn blocks(&self, l_max: usize) -> Result<Vec<EffectiveBlock>> {
        (0..=l_max).into_par_iter().map(|l| self.block(l)).collect()
    }

    pub fn family(&self, l: usize, nu: f64, order: RemainderOrder) -> Result<SectorFamily> {
        SectorFamily::new(self, &self.elements(l)?, nu, order)
    }
}

/// `Σ_{q=1}^{q_max+1} c_q U⊥[q−1, 0]²`.
pub fn build_w_h2inv(el: &SectorElements, constants: &KConstants) -> f64 {
    constants.c.iter().enumerate().map(|(m, &c)| c * el.uperp[(m, 0)].powi(2)).sum()
}

/// `½ (Σ w|𝒰|²) ⟨U⊥² φ_{0,ℓ}, φ_{0,ℓ}⟩`.
pub fn build_w_i(el: &SectorElements, axial_mass: f64) -> f64 {
    0.5 * axial_mass * el.u_sq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemainderOrder {
    /// `B ≡ 0`.
    Zero,
    /// `B ≡ B(0)`.
    One,
    Full,
}

/// `F(k) = I + ν² T(ik)/(ik) = I − ν² [(i/k) T₀ + B(k)]` in one sector.
#[derive(Debug, Clone)]
pub struct SectorFamily {
    pub l: usize,
    pub nu: f64,
    pub order: RemainderOrder,
    pub eps: f64,
    b0: f64,
    q_levels: usize,
    n: usize,
    uperp: DMatrix<f64>,
    nodes: Vec<f64>,
    sqrt_w: Vec<f64>,
    energies: Vec<f64>,
    /// `e_{m,j}^{-1/2}`, row-major over `(m, j)`.
    inv_sqrt_e: Vec<f64>,
    p: DMatrix<C>,
    c: DMatrix<C>,
    pub t0: DMatrix<C>,
    b_zero: DMatrix<C>,
}

impl SectorFamily {
    pub fn new(model: &EffectiveModel, el: &SectorElements, nu: f64, order: RemainderOrder) -> Result<Self> {
        let b0 = model.basis.b0;
        let q_levels = model.basis.q_max + 1;
        let grid = &model.grid;
        let n = grid.len();
        let (energies, v) = model.axial_modes();
        let sqrt_w = grid.sqrt_weights();
        // P = Vᵀ diag(𝒰)
        let p = DMatrix::from_fn(n, n, |j, i| model.u[i] * v[(i, j)]);
        let c = DMatrix::from_fn(n, n, |j, jp| (0..n).map(|i| v[(i, j)] * model.u[i] * v[(i, jp)]).sum::<C>());
        let mut inv_sqrt_e = vec![0.0; q_levels * n];
        for m in 0..q_levels {
            for j in 0..n {
                inv_sqrt_e[m * n + j] = (energies[j] + 2.0 * b0 * (m + 1) as f64).powf(-0.5);
            }
        }
        let mut fam = Self {
            l: el.l,
            nu,
            order,
            eps: punctured_disk_radius(model.axial.delta, b0),
            b0,
            q_levels,
            n,
            uperp: el.uperp.clone(),
            nodes: grid.nodes.clone(),
            sqrt_w,
            energies: energies.clone(),
            inv_sqrt_e,
            p,
            c,
            t0: DMatrix::zeros(0, 0),
            b_zero: DMatrix::zeros(0, 0),
        };
        // v_{m} = U⊥[m,0] e_m^{-1/2} P √w
        let psw: Vec<C> = (0..n).map(|j| (0..n).map(|i| fam.p[(j, i)] * fam.sqrt_w[i]).sum()).collect();
        let vec: Vec<C> = (0..q_levels * n)
            .map(|idx| {
                let (m, j) = (idx / n, idx % n);
                fam.uperp[(m, 0)] * fam.inv_sqrt_e[idx] * psw[j]
            })
            .collect();
        let dim = q_levels * n;
        fam.t0 = DMatrix::from_fn(dim, dim, |a, b| 0.5 * vec[a] * vec[b].conj());
        fam.b_zero = fam.x1(C::new(0.0, 0.0), false) + fam.x3(C::new(0.0, 0.0), false);
        Ok(fam)
    }

    pub fn dimension(&self) -> usize {
        self.q_levels * self.n
    }

    pub fn b_zero(&self) -> &DMatrix<C> {
        &self.b_zero
    }

    fn check_k(&self, k: C) -> Result<()> {
        let r = k.norm();
        if r == 0.0 || r >= self.eps {
            return Err(Error::OutsideDisk { modulus: r, radius: self.eps });
        }
        let radius = M_SERIES_FRACTION * 2.0 * self.b0;
        if r * r > radius {
            return Err(Error::SeriesRadius { modulus: r * r, radius });
        }
        Ok(())
    }

    /// Geometric bound on the discarded terms of `M(k²)`.
    pub fn series_remainder(&self, k: C) -> f64 {
        let rho = k.norm_sqr() / (2.0 * self.b0);
        rho.powi(M_SERIES_ORDER + 1) / (1.0 - rho)
    }

    /// Block-structured `Σ_{m,m''} α_{m m''} D_m G D_{m''}` with scalar
    /// weights `α` and a common `N × N` core `G`.
    fn blocks_of(&self, weights: &DMatrix<f64>, core: &DMatrix<C>, out: &mut DMatrix<C>) {
        let n = self.n;
        for m in 0..self.q_levels {
            for mm in 0..self.q_levels {
                let a = weights[(m, mm)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let dj = self.inv_sqrt_e[m * n + j] * a;
                    for jj in 0..n {
                        out[(m * n + j, mm * n + jj)] += dj * self.inv_sqrt_e[mm * n + jj] * core[(j, jj)];
                    }
                }
            }
        }
    }

    /// `X₁(k)`, or `X₁'(k)` when `derivative` is set.
    fn x1(&self, k: C, derivative: bool) -> DMatrix<C> {
        let n = self.n;
        let s = DMatrix::from_fn(n, n, |i, j| {
            let d = (self.nodes[i] - self.nodes[j]).abs();
            let v = if derivative { s_derivative(k, d) } else { s_value(k, d) };
            self.sqrt_w[i] * v * self.sqrt_w[j]
        });
        let g = &self.p * s * self.p.adjoint();
        let weights = DMatrix::from_fn(self.q_levels, self.q_levels, |m, mm| self.uperp[(m, 0)] * self.uperp[(mm, 0)]);
        let dim = self.dimension();
        let mut out = DMatrix::zeros(dim, dim);
        self.blocks_of(&weights, &g, &mut out);
        out
    }

    /// `X₃(k²)`, or its k-derivative.
    fn x3(&self, k: C, derivative: bool) -> DMatrix<C> {
        let n = self.n;
        let z = k * k;
        let dim = self.dimension();
        let mut out = DMatrix::zeros(dim, dim);
        for mp in 1..self.q_levels {
            let shift = 2.0 * self.b0 * mp as f64;
            let r: Vec<C> = self
                .energies
                .iter()
                .map(|&e| {
                    let den = e + shift - z;
                    if derivative {
                        2.0 * k / (den * den)
                    } else {
                        1.0 / den
                    }
                })
                .collect();
            let mut cr = self.c.clone();
            for (jj, rv) in r.iter().enumerate() {
                for j in 0..n {
                    cr[(j, jj)] *= rv;
                }
            }
            let core = cr * self.c.adjoint();
            let weights = DMatrix::from_fn(self.q_levels, self.q_levels, |m, mm| {
                self.uperp[(m, mp)] * self.uperp[(mm, mp)]
            });
            self.blocks_of(&weights, &core, &mut out);
        }
        out
    }

    /// Diagonal of `M(z)` (or `∂_k M`) over the `(m, j)` index.
    fn m_diag(&self, k: C, derivative: bool) -> Vec<C> {
        let z = k * k;
        let mut out = vec![C::new(0.0, 0.0); self.dimension()];
        for (idx, o) in out.iter_mut().enumerate() {
            let e = self.inv_sqrt_e[idx].powi(-2);
            let x = z / e;
            if derivative {
                // ∂_k Σ x^i = 2k/e Σ i x^{i−1}
                let mut pow = C::new(1.0, 0.0);
                let mut acc = C::new(0.0, 0.0);
                for i in 1..=M_SERIES_ORDER {
                    acc += i as f64 * pow;
                    pow *= x;
                }
                *o = 2.0 * k / e * acc;
            } else {
                let mut pow = x;
                let mut acc = C::new(0.0, 0.0);
                for _ in 1..=M_SERIES_ORDER {
                    acc += pow;
                    pow *= x;
                }
                *o = acc;
            }
        }
        out
    }

    fn scale_rows(diag: &[C], m: &DMatrix<C>) -> DMatrix<C> {
        let mut out = m.clone();
        for (i, d) in diag.iter().enumerate() {
            for j in 0..m.ncols() {
                out[(i, j)] *= d;
            }
        }
        out
    }

    /// `A(k) = (i/k)T₀ + X₁(k) + X₃(k²)`.
    fn a_of(&self, k: C) -> DMatrix<C> {
        let i_k = C::i() / k;
        self.t0.map(|t| t * i_k) + self.x1(k, false) + self.x3(k, false)
    }

    /// `B(k)` as used by the configured order.
    pub fn remainder(&self, k: C) -> Result<DMatrix<C>> {
        let dim = self.dimension();
        match self.order {
            RemainderOrder::Zero => Ok(DMatrix::zeros(dim, dim)),
            RemainderOrder::One => Ok(self.b_zero.clone()),
            RemainderOrder::Full => {
                self.check_k(k)?;
                let a = self.a_of(k);
                let m = self.m_diag(k, false);
                Ok(Self::scale_rows(&m, &a) + self.x1(k, false) + self.x3(k, false))
            }
        }
    }

    /// `T(ik) = T₀ − ik B(k)`.
    pub fn t_of(&self, k: C) -> Result<DMatrix<C>> {
        let b = self.remainder(k)?;
        Ok(&self.t0 - b.map(|x| x * C::i() * k))
    }

    /// Spectral-parameter scan of the `T₀` eigenvalues, descending.
    pub fn t0_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.t0)
    }
}

impl HolomorphicFamily for SectorFamily {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn eval(&self, k: C) -> Result<DMatrix<C>> {
        self.check_k(k)?;
        let nu2 = self.nu * self.nu;
        let inner = match self.order {
            RemainderOrder::Zero => self.t0.map(|t| t * C::i() / k),
            RemainderOrder::One => self.t0.map(|t| t * C::i() / k) + &self.b_zero,
            RemainderOrder::Full => {
                let a = self.a_of(k);
                let m = self.m_diag(k, false);
                &a + Self::scale_rows(&m, &a)
            }
        };
        Ok(DMatrix::identity(self.dimension(), self.dimension()) - inner.map(|x| x * nu2))
    }

    fn derivative(&self, k: C) -> Option<Result<DMatrix<C>>> {
        if let Err(e) = self.check_k(k) {
            return Some(Err(e));
        }
        let nu2 = self.nu * self.nu;
        let dt0 = -C::i() / (k * k);
        let inner = match self.order {
            RemainderOrder::Zero | RemainderOrder::One => self.t0.map(|t| t * dt0),
            RemainderOrder::Full => {
                let a = self.a_of(k);
                let da = self.t0.map(|t| t * dt0) + self.x1(k, true) + self.x3(k, true);
                let m = self.m_diag(k, false);
                let dm = self.m_diag(k, true);
                &da + Self::scale_rows(&dm, &a) + Self::scale_rows(&m, &da)
            }
        };
        Some(Ok(inner.map(|x| -x * nu2)))
    }
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &DMatrix<C>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Couplings `ν > 0` at which `I − ν² Π₀ B(0) Π₀` is singular on the
/// kernel of `T(0)`: `ν_n = β_n^{-1/2}` for the positive eigenvalues `β_n`
/// of the compression of `B(0)` to `ker T(0)`. Ascending.
pub fn exceptional_couplings(t0: &DMatrix<C>, b_zero: &DMatrix<C>) -> Vec<f64> {
    let dim = t0.nrows();
    if dim == 0 {
        return Vec::new();
    }
    let eig = t0.clone().symmetric_eigen();
    let norm = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let kernel: Vec<usize> = (0..dim).filter(|&j| eig.eigenvalues[j].abs() <= KERNEL_TOLERANCE * norm).collect();
    if kernel.is_empty() {
        return Vec::new();
    }
    let basis = DMatrix::from_fn(dim, kernel.len(), |i, c| eig.eigenvectors[(i, kernel[c])]);
    let compressed = basis.adjoint() * b_zero * &basis;
    let herm = (&compressed + compressed.adjoint()).map(|x| x * 0.5);
    let bnorm = b_zero.iter().fold(0.0f64, |a, x| a.max(x.norm())).max(f64::MIN_POSITIVE);
    let mut nus: Vec<f64> = herm
        .symmetric_eigenvalues()
        .iter()
        .filter(|&&beta| beta > 1e-14 * bnorm * dim as f64)
        .map(|&beta| beta.powf(-0.5))
        .collect();
    nus.sort_by(|a, b| a.total_cmp(b));
    nus
}

/// A coupling checked against the exceptional set.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingScan {
    pub nu: f64,
    pub exceptional: Vec<f64>,
    pub margin: f64,
    pub distance: f64,
    pub safe: bool,
}

impl CouplingScan {
    /// Margin defaults to a tenth of the smallest spacing in the exceptional
    /// set (or of the smallest element when it has one entry).
    pub fn new(nu: f64, mut exceptional: Vec<f64>, margin: Option<f64>) -> Self {
        exceptional.sort_by(|a, b| a.total_cmp(b));
        let margin = margin.unwrap_or_else(|| {
            let spacing = exceptional.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let spacing = if spacing.is_finite() { spacing } else { exceptional.first().copied().unwrap_or(0.0) };
            0.1 * spacing
        });
        let distance = exceptional.iter().map(|&e| (nu.abs() - e).abs()).fold(f64::INFINITY, f64::min);
        Self { nu, safe: distance > margin, exceptional, margin, distance }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charvals::max_abs;

    fn model() -> EffectiveModel {
        let basis = LandauBasisSpec::new(1.0, 1, 10, 32).unwrap();
        let grid = AxialGrid::small(8.0, 16, crate::axial::GridMapping::Uniform).unwrap();
        let radial = RadialProfile::power_law(2.0, 1.0).unwrap();
        let axial = AxialProfile::exp_bracket(1.0, 1.0).unwrap();
        EffectiveModel::new(basis, grid, radial, axial).unwrap()
    }

    #[test]
    fn t0_top_eigenvalue_is_w_h2inv() {
        let m = model();
        for l in [0usize, 3] {
            let fam = m.family(l, 0.3, RemainderOrder::Full).unwrap();
            let block = m.block(l).unwrap();
            let top = fam.t0_eigenvalues()[0];
            assert!((top - block.w_h2inv).abs() < 1e-12 * block.w_h2inv, "{top} vs {}", block.w_h2inv);
        }
    }

    #[test]
    fn b_zero_is_hermitian() {
        let fam = model().family(1, 0.3, RemainderOrder::One).unwrap();
        let b = fam.b_zero();
        assert!(max_abs(&(b - b.adjoint())) < 1e-12 * max_abs(b));
    }

    #[test]
    fn analytic_derivative_matches_differences() {
        let fam = model().family(0, 0.3, RemainderOrder::Full).unwrap();
        let k = C::new(0.02, 0.05);
        let h = 1e-6;
        let fd = (fam.eval(k + h).unwrap() - fam.eval(k - h).unwrap()) / C::new(2.0 * h, 0.0);
        let an = fam.derivative(k).unwrap().unwrap();
        let err = max_abs(&(fd - &an));
        assert!(err < 1e-6 * max_abs(&an), "{err}");
    }

    #[test]
    fn t_prime_at_zero_is_minus_i_b_zero() {
        let fam = model().family(2, 0.3, RemainderOrder::Full).unwrap();
        let target = fam.b_zero().map(|x| -C::i() * x);
        let mut prev = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let k = C::new(0.0, h);
            let q = (fam.t_of(k).unwrap() - &fam.t0).map(|x| x / k);
            let err = max_abs(&(q - &target));
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-2 * max_abs(&target));
    }

    #[test]
    fn exceptional_set_rules() {
        let pd = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]).map(|x| C::new(x, 0.0));
        let b = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.7]).map(|x| C::new(x, 0.0));
        assert!(exceptional_couplings(&pd, &b).is_empty());
        let mut deficient = pd.clone();
        deficient.row_mut(1).fill(C::new(0.0, 0.0));
        deficient.column_mut(1).fill(C::new(0.0, 0.0));
        let nus = exceptional_couplings(&deficient, &b);
        assert_eq!(nus.len(), 1);
        assert!((nus[0] - 0.7f64.powf(-0.5)).abs() < 1e-12);
        let scan = CouplingScan::new(0.5, vec![1.0, 2.0], None);
        assert!(scan.safe);
        assert!(!CouplingScan::new(1.05, vec![1.0, 2.0], None).safe);
    }
}
