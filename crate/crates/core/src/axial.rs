//! The x₃ line: grids, the discretised `−∂₃²`, axial profiles, the free
//! resolvent and its `a/k + b(k)` split, and the coupling constants
//! `c_q`, `K₁`, `K₂`.
//!
//! The grid is cell-centred. Cell `i` spans `[y_i, y_{i+1}]`, its node sits
//! at the image of the cell midpoint in the computational variable and its
//! weight is the cell width, so `Σ w_i = 2 L₃` exactly. The Laplacian is the
//! finite-volume one with Dirichlet walls on the outer faces. Written in the
//! orthonormal coordinates `ũ_i = √w_i u_i` it is a real symmetric
//! tridiagonal matrix `Ã`, which is what every other module consumes.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::symmetric_tridiagonal_eigen;

/// Node floor for grids used in reported constants.
pub const MIN_AXIAL_NODES: usize = 64;
/// Relative change under node doubling accepted for axial constants.
pub const GRID_TOLERANCE: f64 = 1e-8;
/// Required `e^{-2δL₃}` tail bound.
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridMapping {
    Uniform,
    /// `x = scale · sinh(s)`: spacing ≈ `scale` near the origin, geometric
    /// growth far out.
    Sinh { scale: f64 },
}

impl GridMapping {
    fn forward(self, s: f64) -> f64 {
        match self {
            GridMapping::Uniform => s,
            GridMapping::Sinh { scale } => scale * s.sinh(),
        }
    }

    fn extent(self, half_width: f64) -> f64 {
        match self {
            GridMapping::Uniform => half_width,
            GridMapping::Sinh { scale } => (half_width / scale).asinh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxialGrid {
    pub half_width: f64,
    pub mapping: GridMapping,
    /// Cell faces `y_0 = −L₃ < … < y_N = L₃`.
    pub faces: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxialGrid {
    /// Grid with at least [`MIN_AXIAL_NODES`] cells.
    pub fn new(half_width: f64, n: usize, mapping: GridMapping) -> Result<Self> {
        if n < MIN_AXIAL_NODES {
            return Err(Error::Domain(format!("axial node count must be at least {MIN_AXIAL_NODES}, got {n}")));
        }
        Self::small(half_width, n, mapping)
    }

    pub fn uniform(half_width: f64, n: usize) -> Result<Self> {
        Self::new(half_width, n, GridMapping::Uniform)
    }

    pub fn graded(half_width: f64, n: usize, scale: f64) -> Result<Self> {
        Self::new(half_width, n, GridMapping::Sinh { scale })
    }

    /// Same construction without the node floor; for toy truncations and
    /// fast characteristic-value scans.
    pub fn small(half_width: f64, n: usize, mapping: GridMapping) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || n == 0 {
            return Err(Error::Domain(format!("need L3 > 0 and N >= 1, got L3={half_width}, N={n}")));
        }
        if let GridMapping::Sinh { scale } = mapping {
            if !(scale > 0.0) {
                return Err(Error::Domain(format!("grading scale must be positive, got {scale}")));
            }
        }
        let s_max = mapping.extent(half_width);
        let h = 2.0 * s_max / n as f64;
        let mut faces: Vec<f64> = (0..=n).map(|j| mapping.forward(-s_max + h * j as f64)).collect();
        faces[0] = -half_width;
        faces[n] = half_width;
        // Exact mirror symmetry.
        for j in 0..n / 2 {
            let v = 0.5 * (faces[n - j] - faces[j]);
            faces[j] = -v;
            faces[n - j] = v;
        }
        if n % 2 == 0 {
            faces[n / 2] = 0.0;
        }
        let mut nodes: Vec<f64> = (0..n).map(|i| mapping.forward(-s_max + h * (i as f64 + 0.5))).collect();
        for i in 0..n / 2 {
            let v = 0.5 * (nodes[n - 1 - i] - nodes[i]);
            nodes[i] = -v;
            nodes[n - 1 - i] = v;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let weights = faces.windows(2).map(|f| f[1] - f[0]).collect();
        Ok(Self { half_width, mapping, faces, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same mapping with twice the cells (computational step halved).
    pub fn refine(&self) -> Self {
        Self::small(self.half_width, 2 * self.len(), self.mapping).expect("refining a valid grid")
    }

    /// Diagonal and off-diagonal of the symmetrised Dirichlet Laplacian `Ã`.
    pub fn kinetic(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let x = &self.nodes;
        let w = &self.weights;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let left = if i == 0 { x[0] - self.faces[0] } else { x[i] - x[i - 1] };
            let right = if i + 1 == n { self.faces[n] - x[n - 1] } else { x[i + 1] - x[i] };
            diag[i] = (1.0 / left + 1.0 / right) / w[i];
            if i + 1 < n {
                off[i] = -1.0 / ((w[i] * w[i + 1]).sqrt() * right);
            }
        }
        (diag, off)
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of `Ã`.
    pub fn kinetic_eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let (d, o) = self.kinetic();
        let n = self.len();
        let (vals, vecs) = symmetric_tridiagonal_eigen(&d, &o, n);
        (vals, DMatrix::from_row_slice(n, n, &vecs))
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }
}

/// Axial potential factor `𝒰(x₃)`, possibly complex, with decay rate `δ`.
#[derive(Clone)]
pub struct AxialProfile {
    eval: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub delta: f64,
    name: String,
}

impl fmt::Debug for AxialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AxialProfile").field("name", &self.name).field("delta", &self.delta).finish()
    }
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

impl AxialProfile {
    pub fn custom<F>(name: &str, eval: F, delta: f64) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidProfile(format!("decay rate must be positive, got {delta}")));
        }
        Ok(Self { eval: Arc::new(eval), delta, name: name.to_string() })
    }

    /// `amplitude · e^{−2δ(⟨x⟩ − 1)}`.
    pub fn exp_bracket(delta: f64, amplitude: f64) -> Result<Self> {
        Self::custom(
            &format!("exp_bracket(delta={delta}, amplitude={amplitude})"),
            move |x| Complex64::new(amplitude * (-2.0 * delta * (bracket(x) - 1.0)).exp(), 0.0),
            delta,
        )
    }

    /// `e^{−rate |x|}`, decay rate `δ = rate / 2`.
    pub fn exp_abs(rate: f64) -> Result<Self> {
        Self::custom(
            &format!("exp_abs(rate={rate})"),
            move |x| Complex64::new((-rate * x.abs()).exp(), 0.0),
            0.5 * rate,
        )
    }

    /// Smoothed indicator of `[−a, a]` with edge width `s`:
    /// `½[tanh((x+a)/s) − tanh((x−a)/s)]`, decaying like `e^{−2|x|/s}`.
    pub fn smoothed_box(a: f64, s: f64) -> Result<Self> {
        if !(a > 0.0) || !(s > 0.0) {
            return Err(Error::InvalidProfile(format!("box needs a > 0 and s > 0, got a={a}, s={s}")));
        }
        Self::custom(
            &format!("smoothed_box(a={a}, s={s})"),
            move |x| Complex64::new(0.5 * (((x + a) / s).tanh() - ((x - a) / s).tanh()), 0.0),
            1.0 / s,
        )
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let inner = self.eval.clone();
        Self { eval: Arc::new(move |x| c * inner(x)), delta: self.delta, name: format!("({c})*{}", self.name) }
    }

    pub fn conj(&self) -> Self {
        let inner = self.eval.clone();
        Self { eval: Arc::new(move |x| inner(x).conj()), delta: self.delta, name: format!("conj({})", self.name) }
    }

    pub fn sample(&self, grid: &AxialGrid) -> Vec<Complex64> {
        grid.nodes.iter().map(|&x| self.eval(x)).collect()
    }

    /// `max_i |𝒰(x_i)| e^{2δ⟨x_i⟩}` over the grid.
    pub fn envelope_constant(&self, grid: &AxialGrid) -> f64 {
        grid.nodes
            .iter()
            .map(|&x| self.eval(x).norm() * (2.0 * self.delta * bracket(x)).exp())
            .fold(0.0, f64::max)
    }

    /// Tail negligibility and a finite envelope on the grid.
    pub fn check_grid(&self, grid: &AxialGrid) -> Result<()> {
        let tail = (-2.0 * self.delta * grid.half_width).exp();
        if tail >= TAIL_TOLERANCE {
            return Err(Error::Domain(format!(
                "grid half-width {} too small for decay rate {}: e^(-2 delta L3) = {tail:.3e}",
                grid.half_width, self.delta
            )));
        }
        let c = self.envelope_constant(grid);
        if !c.is_finite() {
            return Err(Error::InvalidProfile(format!("{} violates the exponential envelope", self.name)));
        }
        if c == 0.0 {
            return Err(Error::InvalidProfile(format!("{} vanishes on the grid", self.name)));
        }
        Ok(())
    }
}

/// Solves `(tridiag(off, diag, off) + shift) y = rhs` by the Thomas
/// algorithm; the matrix must be positive definite.
pub fn solve_tridiagonal(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut beta = diag[0] + shift;
    y[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = off[i - 1] / beta;
        beta = diag[i] + shift - off[i - 1] * c[i - 1];
        y[i] = (rhs[i] - off[i - 1] * y[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

/// `½⟨(Ã + shift)^{-1} √w 𝒰, √w 𝒰⟩` on one grid, no resolution check.
pub fn resolvent_form(grid: &AxialGrid, values: &[Complex64], shift: f64) -> f64 {
    let (d, o) = grid.kinetic();
    let sw = grid.sqrt_weights();
    let re: Vec<f64> = values.iter().zip(&sw).map(|(u, s)| u.re * s).collect();
    let im: Vec<f64> = values.iter().zip(&sw).map(|(u, s)| u.im * s).collect();
    let yr = solve_tridiagonal(&d, &o, shift, &re);
    let yi = solve_tridiagonal(&d, &o, shift, &im);
    0.5 * (dot(&yr, &re) + dot(&yi, &im))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_field(b0: f64) -> Result<()> {
    if b0 > 0.0 && b0.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("field strength must be positive, got {b0}")))
    }
}

/// `c_q = ½⟨(−∂₃² + 2b₀q)^{-1}𝒰, 𝒰⟩`, evaluated on `grid` and on its
/// refinement; the refined value is returned.
pub fn axial_coupling(q: usize, profile: &AxialProfile, b0: f64, grid: &AxialGrid) -> Result<f64> {
    if q == 0 {
        return Err(Error::Domain("axial coupling needs q >= 1".into()));
    }
    check_field(b0)?;
    let shift = 2.0 * b0 * q as f64;
    let coarse = resolvent_form(grid, &profile.sample(grid), shift);
    let fine_grid = grid.refine();
    let fine = resolvent_form(&fine_grid, &profile.sample(&fine_grid), shift);
    let relative = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if relative > GRID_TOLERANCE {
        return Err(Error::GridResolution { coarse, fine, relative });
    }
    Ok(fine)
}

/// `K₂ = (4b₀)^{-1} Σ w_i |𝒰(x_i)|²`.
pub fn k2_constant(profile: &AxialProfile, b0: f64, grid: &AxialGrid) -> Result<f64> {
    check_field(b0)?;
    let mass = l2_mass(&profile.sample(grid), grid);
    if mass == 0.0 {
        return Err(Error::InvalidProfile("axial profile vanishes identically".into()));
    }
    Ok(mass / (4.0 * b0))
}

/// `Σ w_i |𝒰_i|²`.
pub fn l2_mass(values: &[Complex64], grid: &AxialGrid) -> f64 {
    values.iter().zip(&grid.weights).map(|(u, w)| w * u.norm_sqr()).sum()
}

/// Axial constants for levels `1 ≤ q ≤ q_max + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KConstants {
    /// `c[q − 1] = c_q`.
    pub c: Vec<f64>,
    pub k1: f64,
    pub k2: f64,
    /// Bound `K₂ / (q_max + 2)` on every omitted `c_q`.
    pub omitted_bound: f64,
}

impl KConstants {
    pub fn compute(profile: &AxialProfile, b0: f64, q_max: usize, grid: &AxialGrid) -> Result<Self> {
        let c = (1..=q_max + 1).map(|q| axial_coupling(q, profile, b0, grid)).collect::<Result<Vec<_>>>()?;
        let k2 = k2_constant(profile, b0, &grid.refine())?;
        Ok(Self { k1: c[0], k2, omitted_bound: k2 / (q_max + 2) as f64, c })
    }

    /// Discrete constants on one grid; these are the values the effective
    /// operators built on that grid actually use.
    pub fn on_grid(values: &[Complex64], b0: f64, q_max: usize, grid: &AxialGrid) -> Result<Self> {
        check_field(b0)?;
        let mass = l2_mass(values, grid);
        if mass == 0.0 {
            return Err(Error::InvalidProfile("axial profile vanishes identically".into()));
        }
        let c: Vec<f64> = (1..=q_max + 1).map(|q| resolvent_form(grid, values, 2.0 * b0 * q as f64)).collect();
        let k2 = mass / (4.0 * b0);
        Ok(Self { k1: c[0], k2, omitted_bound: k2 / (q_max + 2) as f64, c })
    }

    pub fn is_decreasing(&self) -> bool {
        self.c.windows(2).all(|w| w[1] < w[0])
    }

    /// `c_q ≤ K₂/q` for every stored level.
    pub fn within_resolvent_bound(&self) -> bool {
        self.c.iter().enumerate().all(|(i, &c)| c <= self.k2 / (i + 1) as f64 * (1.0 + 1e-12))
    }
}

/// Square root with positive imaginary part.
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// Kernel of `(−∂₃² − z)^{-1}`: `i e^{i√z|x−x'|} / (2√z)`.
pub fn free_resolvent_kernel(z: Complex64, x: f64, xp: f64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::Domain(format!("z = {z} lies on the spectrum [0, inf)")));
    }
    let k = sqrt_upper(z);
    let i = Complex64::i();
    Ok(i * (i * k * (x - xp).abs()).exp() / (2.0 * k))
}

/// `φ₁(x) = (eˣ − 1)/x`, entire.
pub fn phi1(x: Complex64) -> Complex64 {
    if x.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..20 {
            term *= x / (n + 1) as f64;
            sum += term;
        }
        sum
    } else {
        (x.exp() - 1.0) / x
    }
}

/// `φ₁'(x) = Σ_{n≥1} n x^{n−1} / (n+1)!`.
pub fn phi1_prime(x: Complex64) -> Complex64 {
    if x.norm() < 0.5 {
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 2.0;
        let mut sum = Complex64::new(0.5, 0.0);
        for n in 2..22 {
            pow *= x;
            fact *= (n + 1) as f64;
            sum += n as f64 * pow / fact;
        }
        sum
    } else {
        let e = x.exp();
        (x * e - e + 1.0) / (x * x)
    }
}

/// `s(k; d) = (1 − e^{ikd}) / (2ik)` as an entire function of `k`.
pub fn s_value(k: Complex64, d: f64) -> Complex64 {
    -0.5 * d * phi1(Complex64::i() * k * d)
}

/// `∂_k s(k; d)`.
pub fn s_derivative(k: Complex64, d: f64) -> Complex64 {
    -0.5 * d * d * Complex64::i() * phi1_prime(Complex64::i() * k * d)
}

/// Punctured-disk radius `ε = 0.9 · min(δ, √(2b₀))`.
pub fn punctured_disk_radius(delta: f64, b0: f64) -> f64 {
    0.9 * delta.min((2.0 * b0).sqrt())
}

/// Holomorphic part `s(k)` of the outgoing free resolvent kernel,
/// `(1 − e^{ik|x−x'|})/(2ik)`; the value at `k = 0` is `−|x−x'|/2`.
pub fn s_kernel(k: Complex64, x: f64, xp: f64, eps: f64) -> Result<Complex64> {
    if k.norm() >= eps {
        return Err(Error::OutsideDisk { modulus: k.norm(), radius: eps });
    }
    Ok(s_value(k, (x - xp).abs()))
}

/// `(i/2) e_−(x_i) e_−(x_j) w_j` with `e_−(x) = e^{−δ⟨x⟩}`.
pub fn rank_one_a(delta: f64, grid: &AxialGrid) -> DMatrix<Complex64> {
    let e: Vec<f64> = grid.nodes.iter().map(|&x| (-delta * bracket(x)).exp()).collect();
    let n = grid.len();
    DMatrix::from_fn(n, n, |i, j| Complex64::new(0.0, 0.5 * e[i] * e[j] * grid.weights[j]))
}

/// `e_−` sampled on the grid.
pub fn weight_minus(delta: f64, grid: &AxialGrid) -> Vec<f64> {
    grid.nodes.iter().map(|&x| (-delta * bracket(x)).exp()).collect()
}

/// `⟨x⟩ = √(1 + x²)`.
pub fn japanese_bracket(x: f64) -> f64 {
    bracket(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Closed form of `c₁` for `𝒰 = e^{−|x|}` and `2b₀ = κ²`:
    // `(1/2π) ∫ 4 / ((1+ξ²)² (ξ²+κ²)) dξ · ½`.
    fn exp_abs_c1_closed_form(kappa: f64) -> f64 {
        // Partial fractions of 4/((1+ξ²)²(ξ²+κ²)) integrated over ℝ, for κ ≠ 1.
        let k2 = kappa * kappa;
        let full = if (kappa - 1.0).abs() < 1e-8 {
            // 4 ∫ (1+ξ²)^{-3} dξ / 2π = 4 · (3π/8) / 2π
            0.75
        } else {
            let a = 1.0 / (k2 - 1.0);
            let pi = std::f64::consts::PI;
            // 4[ a/(1+ξ²)² − a²/(1+ξ²) + a²/(ξ²+κ²) ]
            4.0 * (a * pi / 2.0 - a * a * pi + a * a * pi / kappa) / (2.0 * pi)
        };
        0.5 * full
    }

    #[test]
    fn grid_weights_sum_exactly() {
        for mapping in [GridMapping::Uniform, GridMapping::Sinh { scale: 0.3 }] {
            let g = AxialGrid::new(7.5, 101, mapping).unwrap();
            let total: f64 = g.weights.iter().sum();
            assert!((total - 15.0).abs() < 1e-12);
            for i in 0..g.len() {
                assert_eq!(g.nodes[i], -g.nodes[g.len() - 1 - i]);
            }
        }
        assert!(AxialGrid::uniform(1.0, 10).is_err());
    }

    #[test]
    fn uniform_boundary_diagonal() {
        let g = AxialGrid::uniform(3.2, 64).unwrap();
        let h = 0.1;
        let (d, o) = g.kinetic();
        assert!((d[0] - 3.0 / (h * h)).abs() < 1e-8);
        assert!((d[10] - 2.0 / (h * h)).abs() < 1e-8);
        assert!((o[5] + 1.0 / (h * h)).abs() < 1e-8);
    }

    #[test]
    fn kinetic_is_positive_definite() {
        let g = AxialGrid::graded(50.0, 80, 0.5).unwrap();
        let (vals, _) = g.kinetic_eigen();
        assert!(vals[0] > 0.0);
    }

    #[test]
    fn resolvent_kernel_at_minus_one() {
        let v = free_resolvent_kernel(Complex64::new(-1.0, 0.0), 0.3, -1.2).unwrap();
        assert!((v - Complex64::new(0.5 * (-1.5f64).exp(), 0.0)).norm() < 1e-15);
        assert!(free_resolvent_kernel(Complex64::new(2.0, 0.0), 0.0, 0.0).is_err());
        let z = Complex64::new(0.3, -0.7);
        let a = free_resolvent_kernel(z, 0.1, 2.0).unwrap();
        let b = free_resolvent_kernel(z, 2.0, 0.1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn s_kernel_limits() {
        let eps = 0.5;
        let tiny = Complex64::new(0.0, 1e-9);
        let v = s_kernel(tiny, 0.0, 1.5, eps).unwrap();
        assert!((v + Complex64::new(0.75, 0.0)).norm() < 1e-8);
        assert_eq!(s_kernel(Complex64::new(0.2, 0.1), 0.7, 0.7, eps).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(s_kernel(Complex64::new(0.0, 0.0), 0.0, 2.0, eps).unwrap(), Complex64::new(-1.0, 0.0));
        assert!(s_kernel(Complex64::new(0.6, 0.0), 0.0, 1.0, eps).is_err());
    }

    #[test]
    fn s_kernel_reassembles_resolvent() {
        let i = Complex64::i();
        for k in [Complex64::new(0.01, 0.02), Complex64::new(-0.1, 0.3), Complex64::new(0.0, 0.05)] {
            for d in [0.0, 0.3, 4.0, 25.0] {
                let lhs = 0.5 * i * (i * k * d).exp() / k;
                let rhs = 0.5 * i / k + s_value(k, d);
                assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "k={k} d={d}");
            }
        }
    }

    #[test]
    fn s_derivative_matches_difference() {
        for (k, d) in [(Complex64::new(0.02, 0.01), 3.0), (Complex64::new(0.1, 0.2), 20.0)] {
            let h = 1e-5;
            let fd = (s_value(k + h, d) - s_value(k - h, d)) / (2.0 * h);
            assert!((fd - s_derivative(k, d)).norm() < 1e-7 * (1.0 + fd.norm()));
        }
    }

    #[test]
    fn rank_one_a_properties() {
        let g = AxialGrid::uniform(20.0, 64).unwrap();
        let a = rank_one_a(1.0, &g);
        let sv = a.clone().singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|x, y| y.total_cmp(x));
        assert!(s[1] < 1e-12 * s[0]);
        let e = weight_minus(1.0, &g);
        let tr: f64 = (0..g.len()).map(|i| g.weights[i] * e[i] * e[i]).sum();
        assert!((a.trace() - Complex64::new(0.0, 0.5 * tr)).norm() < 1e-14);
    }

    #[test]
    fn closed_form_c1() {
        assert!((exp_abs_c1_closed_form(1.0) - 0.375).abs() < 1e-15);
        let near = exp_abs_c1_closed_form(1.0 + 1e-6);
        assert!((near - 0.375).abs() < 1e-5);
    }
}
