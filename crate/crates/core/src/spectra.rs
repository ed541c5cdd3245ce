//! Direct truncation of the coupled Pauli operator per angular-momentum
//! sector, negative-eigenvalue counts, and the comparison with the
//! effective predictions.
//!
//! A sector matrix is block tridiagonal over the axial nodes. Node `i`
//! carries `2(q_max+1)` unknowns ordered `s(q_max+1) + m` with `s = 0` for
//! spin up (levels `2b₀m`) and `s = 1` for spin down (levels `2b₀(m+1)`).
//! Counting eigenvalues below `σ` uses the block LDL* factorisation and
//! Sylvester's law of inertia, so no eigensolve of the full sector is
//! needed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::axial::{AxialGrid, AxialProfile};
use crate::effective::EffectiveBlock;
use crate::error::{Error, Result};
use crate::landau::{counting, LandauBasisSpec, RadialProfile, SectorElements};

type C = Complex64;

/// Sector truncation of `H(b₀, νV)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMatrix {
    pub l: usize,
    pub b0: f64,
    pub nu: f64,
    pub q_levels: usize,
    /// `⟨φ_{m,ℓ}, U⊥ φ_{m',ℓ}⟩`.
    pub uperp: DMatrix<f64>,
    /// `𝒰` at the axial nodes.
    pub u: Vec<C>,
    /// Diagonal and off-diagonal of `Ã`.
    pub kin_diag: Vec<f64>,
    pub kin_off: Vec<f64>,
}

impl SectorMatrix {
    pub fn new(l: usize, b0: f64, nu: f64, uperp: DMatrix<f64>, u: Vec<C>, grid: &AxialGrid) -> Self {
        let (kin_diag, kin_off) = grid.kinetic();
        Self { l, b0, nu, q_levels: uperp.nrows(), uperp, u, kin_diag, kin_off }
    }

    pub fn local_dim(&self) -> usize {
        2 * self.q_levels
    }

    pub fn nodes(&self) -> usize {
        self.kin_diag.len()
    }

    pub fn dim(&self) -> usize {
        self.local_dim() * self.nodes()
    }

    /// Global index of `(node, spin, level)`.
    pub fn index(&self, node: usize, spin: usize, level: usize) -> usize {
        node * self.local_dim() + spin * self.q_levels + level
    }

    /// Diagonal block of node `i`.
    pub fn node_block(&self, i: usize) -> DMatrix<C> {
        let q = self.q_levels;
        let mut b = DMatrix::zeros(2 * q, 2 * q);
        for s in 0..2 {
            for m in 0..q {
                b[(s * q + m, s * q + m)] = C::new(2.0 * self.b0 * (m + s) as f64 + self.kin_diag[i], 0.0);
            }
        }
        let u = self.u[i];
        for m in 0..q {
            for mp in 0..q {
                let c = self.nu * self.uperp[(m, mp)];
                b[(m, q + mp)] = c * u.conj();
                b[(q + mp, m)] = c * u;
            }
        }
        b
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let n = self.dim();
        let d = self.local_dim();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..self.nodes() {
            h.view_mut((i * d, i * d), (d, d)).copy_from(&self.node_block(i));
            if i + 1 < self.nodes() {
                for a in 0..d {
                    h[(i * d + a, (i + 1) * d + a)] = C::new(self.kin_off[i], 0.0);
                    h[((i + 1) * d + a, i * d + a)] = C::new(self.kin_off[i], 0.0);
                }
            }
        }
        h
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let d = self.local_dim();
        let mut count = 0;
        let mut prev_inv: Option<DMatrix<C>> = None;
        for i in 0..self.nodes() {
            let mut block = self.node_block(i);
            for a in 0..d {
                block[(a, a)] -= sigma;
            }
            if let Some(inv) = prev_inv.as_ref() {
                let a2 = self.kin_off[i - 1] * self.kin_off[i - 1];
                block -= inv.map(|x| x * a2);
            }
            let herm = (&block + block.adjoint()).map(|x| x * 0.5);
            let eig = herm.symmetric_eigen();
            let mut inv_vals = Vec::with_capacity(d);
            for &v in eig.eigenvalues.iter() {
                if v < 0.0 {
                    count += 1;
                }
                let v = if v == 0.0 { f64::MIN_POSITIVE } else { v };
                inv_vals.push(1.0 / v);
            }
            let vecs = &eig.eigenvectors;
            let scaled = DMatrix::from_fn(d, d, |r, c| vecs[(r, c)] * inv_vals[c]);
            prev_inv = Some(scaled * vecs.adjoint());
        }
        count
    }

    /// All eigenvalues, ascending, by a dense Hermitian solve.
    pub fn dense_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.to_dense().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// Eigenvalues in `[lo, hi)` by bisection on the inertia count,
    /// ascending, each to absolute accuracy `tol`.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
        let n_lo = self.count_below(lo);
        let n_hi = self.count_below(hi);
        let mut out = Vec::with_capacity(n_hi - n_lo);
        for j in n_lo..n_hi {
            // smallest σ with count_below(σ) > j
            let (mut a, mut b) = (lo, hi);
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if self.count_below(mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        out
    }

    /// Indices of the spin-up and spin-down unknowns.
    fn spin_indices(&self, spin: usize) -> Vec<usize> {
        (0..self.nodes()).flat_map(|i| (0..self.q_levels).map(move |m| (i, m))).map(|(i, m)| self.index(i, spin, m)).collect()
    }
}

/// Sector matrix from the profiles.
pub fn assemble_sector(
    l: usize,
    basis: &LandauBasisSpec,
    grid: &AxialGrid,
    radial: &RadialProfile,
    axial: &AxialProfile,
    nu: f64,
) -> Result<SectorMatrix> {
    let el = SectorElements::compute(l, radial, basis.b0, basis.q_max, basis.radial_nodes)?;
    Ok(SectorMatrix::new(l, basis.b0, nu, el.uperp, axial.sample(grid), grid))
}

/// Direct and effective counts on a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    /// Thresholds `r`, ascending; eigenvalues are counted below `−r²`.
    pub r: Vec<f64>,
    pub nu: f64,
    pub direct: Vec<usize>,
    pub effective: Vec<usize>,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    /// Direct counts per sector, `per_sector[ℓ][j]`.
    pub per_sector: Vec<Vec<usize>>,
    /// The last retained sector contributes nothing, directly or in the
    /// upper bound, at the smallest threshold.
    pub sectors_converged: bool,
    /// Counts unchanged with one more Landau level, when checked.
    pub levels_converged: Option<bool>,
}

impl CountReport {
    pub fn is_monotone(&self) -> bool {
        [&self.direct, &self.effective, &self.lower, &self.upper].iter().all(|c| c.windows(2).all(|w| w[1] <= w[0]))
    }
}

/// Setup of a direct count.
#[derive(Debug, Clone)]
pub struct DirectSetup {
    pub basis: LandauBasisSpec,
    pub grid: AxialGrid,
    pub radial: RadialProfile,
    pub axial: AxialProfile,
    pub nu: f64,
}

impl DirectSetup {
    fn sector_counts(&self, basis: &LandauBasisSpec, r: &[f64]) -> Result<Vec<Vec<usize>>> {
        let u = self.axial.sample(&self.grid);
        (0..=basis.l_max)
            .into_par_iter()
            .map(|l| {
                let el = SectorElements::compute(l, &self.radial, basis.b0, basis.q_max, basis.radial_nodes)?;
                let m = SectorMatrix::new(l, basis.b0, self.nu, el.uperp, u.clone(), &self.grid);
                Ok(r.iter().map(|&ri| m.count_below(-ri * ri)).collect())
            })
            .collect()
    }
}

/// Sums sector counts of eigenvalues below `−r²` and sets them against the
/// effective blocks (one per sector, same `l_max`).
pub fn negative_counts(
    setup: &DirectSetup,
    blocks: &[EffectiveBlock],
    k1: f64,
    r_grid: &[f64],
    check_levels: bool,
) -> Result<CountReport> {
    if r_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Domain("thresholds must be positive".into()));
    }
    if blocks.len() != setup.basis.l_max + 1 {
        return Err(Error::Domain(format!(
            "need one effective block per sector: {} blocks for l_max = {}",
            blocks.len(),
            setup.basis.l_max
        )));
    }
    let mut r = r_grid.to_vec();
    r.sort_by(|a, b| a.total_cmp(b));
    let per_sector = setup.sector_counts(&setup.basis, &r)?;
    let direct: Vec<usize> = (0..r.len()).map(|j| per_sector.iter().map(|s| s[j]).sum()).collect();
    let nu2 = setup.nu * setup.nu;
    let b0 = setup.basis.b0;
    let scaled = |f: &dyn Fn(&EffectiveBlock) -> f64| -> Vec<f64> { blocks.iter().map(|b| nu2 * f(b)).collect() };
    let eff = scaled(&|b| b.w_h2inv);
    let low = scaled(&|b| k1 * b.toeplitz * b.toeplitz);
    let up = scaled(&|b| b.w_i / (2.0 * b0));
    let effective = r.iter().map(|&ri| counting(&eff, ri)).collect();
    let lower = r.iter().map(|&ri| counting(&low, ri)).collect();
    let upper = r.iter().map(|&ri| counting(&up, ri)).collect();
    let last = per_sector.last().map(|s| s[0]).unwrap_or(0);
    let sectors_converged = last == 0 && up.last().map_or(true, |&u| u <= r[0]);
    let levels_converged = if check_levels {
        let mut more = setup.basis;
        more.q_max += 1;
        let again = setup.sector_counts(&more, &r)?;
        let direct_more: Vec<usize> = (0..r.len()).map(|j| again.iter().map(|s| s[j]).sum()).collect();
        Some(direct_more == direct)
    } else {
        None
    };
    Ok(CountReport {
        r,
        nu: setup.nu,
        direct,
        effective,
        lower,
        upper,
        per_sector,
        sectors_converged,
        levels_converged,
    })
}

/// Finite-dimensional Schur-complement comparison at one spectral point.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurCheck {
    pub z: f64,
    /// Smallest singular value of `H − z`.
    pub sigma_full: f64,
    /// Smallest singular value of `ℋ₁ − z − Ū(ℋ₂ − z)^{-1}U`.
    pub sigma_schur: f64,
    pub det_full: C,
    /// `det(ℋ₂ − z) · det(Schur complement)`.
    pub det_factored: C,
    pub scale: f64,
}

impl SchurCheck {
    /// Both singular values below `tol · scale`, or both above.
    pub fn consistent(&self, tol: f64) -> bool {
        (self.sigma_full < tol * self.scale) == (self.sigma_schur < tol * self.scale)
    }

    pub fn det_relative_error(&self) -> f64 {
        (self.det_full - self.det_factored).norm() / self.det_full.norm().max(f64::MIN_POSITIVE)
    }
}

fn submatrix(h: &DMatrix<C>, rows: &[usize], cols: &[usize]) -> DMatrix<C> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| h[(rows[i], cols[j])])
}

fn smallest_singular(m: DMatrix<C>) -> f64 {
    m.singular_values().iter().fold(f64::INFINITY, |a, &v| a.min(v))
}

/// Compares `H − z` with its Schur complement onto the spin-up block.
pub fn schur_check(z: f64, sector: &SectorMatrix) -> Result<SchurCheck> {
    let h = sector.to_dense();
    let up = sector.spin_indices(0);
    let down = sector.spin_indices(1);
    let h1 = submatrix(&h, &up, &up);
    let h2 = submatrix(&h, &down, &down);
    let ubar = submatrix(&h, &up, &down);
    let u = submatrix(&h, &down, &up);
    let shift = |m: &DMatrix<C>| {
        let mut s = m.clone();
        for i in 0..s.nrows() {
            s[(i, i)] -= z;
        }
        s
    };
    let scale = h.iter().fold(0.0f64, |a, x| a.max(x.norm())).max(1.0);
    let h2z = shift(&h2);
    let gap = h2z.clone().symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    if gap < 1e-10 * scale {
        return Err(Error::SpectrumCollision(format!("z = {z} is within {gap:.3e} of the spin-down spectrum")));
    }
    let lu2 = h2z.clone().lu();
    let solved = lu2.solve(&u).ok_or_else(|| Error::SpectrumCollision(format!("spin-down block singular at z = {z}")))?;
    let schur = shift(&h1) - ubar * solved;
    let hz = shift(&h);
    Ok(SchurCheck {
        z,
        sigma_full: smallest_singular(hz.clone()),
        sigma_schur: smallest_singular(schur.clone()),
        det_full: hz.lu().determinant(),
        det_factored: lu2.determinant() * schur.lu().determinant(),
        scale,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichRow {
    pub r: f64,
    pub lower: usize,
    pub direct: usize,
    pub effective: usize,
    pub upper: usize,
    /// `N_direct / N_effective`, `NaN` when the prediction is zero.
    pub ratio: f64,
    /// `lower(1 − tol) ≤ N_direct ≤ upper(1 + tol)`; `None` when withheld.
    pub within: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub tolerance: f64,
    /// `None` when the radial profile is not a power law.
    pub verdict: Option<bool>,
    pub note: Option<String>,
}

/// Per-threshold comparison `lower ≤ N_direct ≤ upper` within `tol`.
pub fn sandwich_report(report: &CountReport, radial: &RadialProfile, tol: f64) -> SandwichReport {
    let power_law = radial.u0.is_some() && radial.alpha > 0.0;
    let rows: Vec<SandwichRow> = (0..report.r.len())
        .map(|j| {
            let (lo, d, e, up) = (report.lower[j], report.direct[j], report.effective[j], report.upper[j]);
            let within = power_law
                .then(|| lo as f64 * (1.0 - tol) <= d as f64 && d as f64 <= up as f64 * (1.0 + tol));
            SandwichRow {
                r: report.r[j],
                lower: lo,
                direct: d,
                effective: e,
                upper: up,
                ratio: if e > 0 { d as f64 / e as f64 } else { f64::NAN },
                within,
            }
        })
        .collect();
    let verdict = power_law.then(|| rows.iter().all(|r| r.within == Some(true)));
    let note = (!power_law).then(|| {
        Error::PowerLawViolated(format!("{} has no power-law tail; verdict withheld", radial.name())).to_string()
    });
    SandwichReport { rows, tolerance: tol, verdict, note }
}
