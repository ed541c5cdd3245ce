//! Constant-field Landau bases and Berezin–Toeplitz spectra on the lowest
//! Landau level.
//!
//! In the symmetric gauge the eigenfunctions of `H₁(b₀)` with eigenvalue
//! `2b₀q` and angular factor `e^{iℓθ}` (ℓ ≥ 0) are
//!
//! ```text
//! φ_{q,ℓ}(r, θ) = f_{q,ℓ}(r) e^{iℓθ},
//! f_{q,ℓ}(r)    = √(b₀/2π) · √(t^ℓ e^{-t} / ℓ!) · L̃_q^ℓ(t),   t = b₀r²/2,
//! ```
//!
//! with `L̃_q^ℓ` the generalised Laguerre polynomial normalised in
//! `L²(t^ℓ e^{-t}/ℓ! dt)`. Every radial integral against `|f_{q,ℓ}|² 2πr dr`
//! therefore becomes an expectation under the Gamma(ℓ+1) law in `t`, which is
//! exactly the weight of the generalised Gauss–Laguerre rule.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{ln_factorial, GaussRule};

/// Relative change between successive node doublings accepted as converged.
pub const RADIAL_TOLERANCE: f64 = 1e-11;
/// Hard cap on the radial node count during adaptive refinement.
pub const MAX_RADIAL_NODES: usize = 1024;
/// Smallest radial node count accepted by [`LandauBasisSpec`].
pub const MIN_RADIAL_NODES: usize = 32;

/// Transverse truncation of the constant-field Landau basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauBasisSpec {
    pub b0: f64,
    pub q_max: usize,
    pub l_max: usize,
    pub radial_nodes: usize,
}

impl LandauBasisSpec {
    pub fn new(b0: f64, q_max: usize, l_max: usize, radial_nodes: usize) -> Result<Self> {
        if !(b0 > 0.0 && b0.is_finite()) {
            return Err(Error::Domain(format!("field strength must be positive, got {b0}")));
        }
        if radial_nodes < MIN_RADIAL_NODES {
            return Err(Error::Domain(format!(
                "radial_nodes must be at least {MIN_RADIAL_NODES}, got {radial_nodes}"
            )));
        }
        Ok(Self { b0, q_max, l_max, radial_nodes })
    }

    /// Retained eigenvalues of `H₁(b₀)`: `2b₀q`, `0 ≤ q ≤ q_max`.
    pub fn spin_up_levels(&self) -> Vec<f64> {
        (0..=self.q_max).map(|q| 2.0 * self.b0 * q as f64).collect()
    }

    /// Retained eigenvalues of `H₂(b₀)`: `2b₀q`, `1 ≤ q ≤ q_max + 1`.
    pub fn spin_down_levels(&self) -> Vec<f64> {
        (1..=self.q_max + 1).map(|q| 2.0 * self.b0 * q as f64).collect()
    }

    /// Admissibility constant; `2b₀` for a constant field.
    pub fn zeta(&self) -> f64 {
        2.0 * self.b0
    }
}

/// Admissibility constant `ζ = 2b₀ e^{-2 osc φ̃}` of a field `b₀ + Δφ̃`.
pub fn zeta(b0: f64, osc_phi: f64) -> Result<f64> {
    if !(b0 > 0.0) || osc_phi < 0.0 {
        return Err(Error::Domain(format!("need b0 > 0 and osc >= 0, got b0={b0}, osc={osc_phi}")));
    }
    Ok(2.0 * b0 * (-2.0 * osc_phi).exp())
}

/// Radial potential factor `U⊥` together with its decay data.
#[derive(Clone)]
pub struct RadialProfile {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Envelope decay exponent `m⊥`; zero only for the constant profile.
    pub alpha: f64,
    /// Amplitude of the `|x|^{-α}` tail, `None` when the profile decays
    /// faster than any power.
    pub u0: Option<f64>,
    /// Envelope constant: `|U⊥(r)| ≤ bound_c (1+r²)^{-α/2}`.
    pub bound_c: f64,
    name: String,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("u0", &self.u0)
            .field("bound_c", &self.bound_c)
            .finish()
    }
}

impl RadialProfile {
    pub fn new<F>(name: &str, eval: F, alpha: f64, u0: Option<f64>, bound_c: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidProfile(format!("decay exponent must be finite and >= 0, got {alpha}")));
        }
        if let Some(u) = u0 {
            if !(u > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "tail amplitude must be positive (the profile must not vanish identically), got {u}"
                )));
            }
        }
        if !(bound_c > 0.0) {
            return Err(Error::InvalidProfile(format!("envelope constant must be positive, got {bound_c}")));
        }
        Ok(Self { eval: Arc::new(eval), alpha, u0, bound_c, name: name.to_string() })
    }

    /// `u0 (1 + r²)^{-α/2}`.
    pub fn power_law(alpha: f64, u0: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidProfile(format!("power-law exponent must be positive, got {alpha}")));
        }
        Self::new(
            &format!("power_law(alpha={alpha}, u0={u0})"),
            move |r| u0 * (1.0 + r * r).powf(-0.5 * alpha),
            alpha,
            Some(u0),
            u0.abs().max(f64::MIN_POSITIVE),
        )
    }

    /// `amplitude · e^{-rate r²}`; recorded with a nominal α = 2 envelope.
    pub fn gaussian(rate: f64, amplitude: f64) -> Result<Self> {
        if !(rate > 0.0) || amplitude == 0.0 {
            return Err(Error::InvalidProfile(format!(
                "gaussian needs rate > 0 and non-zero amplitude, got rate={rate}, amplitude={amplitude}"
            )));
        }
        // sup_r (1 + r²) e^{-rate r²}
        let sup = if rate < 1.0 { (rate - 1.0).exp() / rate } else { 1.0 };
        Self::new(
            &format!("gaussian(rate={rate}, amplitude={amplitude})"),
            move |r| amplitude * (-rate * r * r).exp(),
            2.0,
            None,
            amplitude.abs() * sup,
        )
    }

    /// Constant profile; no decay.
    pub fn constant(c: f64) -> Result<Self> {
        if c == 0.0 {
            return Err(Error::InvalidProfile("constant profile must not vanish".into()));
        }
        Self::new(&format!("constant({c})"), move |_| c, 0.0, None, c.abs())
    }

    /// Piecewise-linear interpolation of `(r, value)` samples, continued
    /// beyond the last sample by `value_last · (r_last / r)^α`.
    pub fn tabulated(r: Vec<f64>, values: Vec<f64>, alpha: f64, u0: Option<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != values.len() {
            return Err(Error::InvalidProfile("tabulated profile needs >= 2 matching samples".into()));
        }
        if r[0] != 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile("tabulated radii must start at 0 and increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("tabulated values must be finite".into()));
        }
        let bound_c = r
            .iter()
            .zip(&values)
            .map(|(&ri, &vi)| vi.abs() * (1.0 + ri * ri).powf(0.5 * alpha))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let (rl, vl) = (*r.last().unwrap(), *values.last().unwrap());
        let eval = move |x: f64| {
            if x >= rl {
                return vl * (rl / x).powf(alpha);
            }
            let i = r.partition_point(|&ri| ri <= x).max(1) - 1;
            let s = (x - r[i]) / (r[i + 1] - r[i]);
            values[i] + s * (values[i + 1] - values[i])
        };
        Self::new("tabulated", eval, alpha, u0, bound_c)
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `c · U⊥`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |r| c * inner(r)),
            alpha: self.alpha,
            u0: self.u0.map(|u| u * c.abs()),
            bound_c: self.bound_c * c.abs(),
            name: format!("{c}*{}", self.name),
        }
    }

    /// Pointwise square, used for `⟨U⊥² φ, φ⟩`.
    pub fn squared(&self) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |r| {
                let v = inner(r);
                v * v
            }),
            alpha: 2.0 * self.alpha,
            u0: self.u0.map(|u| u * u),
            bound_c: self.bound_c * self.bound_c,
            name: format!("({})^2", self.name),
        }
    }

    pub fn is_nonnegative_on(&self, radii: &[f64]) -> bool {
        radii.iter().all(|&r| self.eval(r) >= 0.0)
    }

    /// Checks the value envelope on the sample radii.
    pub fn check_envelope(&self, radii: &[f64]) -> Result<()> {
        for &r in radii {
            let v = self.eval(r);
            if !v.is_finite() {
                return Err(Error::InvalidProfile(format!("non-finite value at r = {r}")));
            }
            let env = self.bound_c * (1.0 + r * r).powf(-0.5 * self.alpha);
            if v.abs() > env * (1.0 + 1e-12) {
                return Err(Error::InvalidProfile(format!(
                    "|U(r)| = {:.3e} exceeds envelope {env:.3e} at r = {r}",
                    v.abs()
                )));
            }
        }
        Ok(())
    }
}

/// Orthonormal Laguerre values `L̃_q^ℓ(t)` for `q = 0..out.len()`, sign
/// matching the classical `L_q^ℓ`.
pub fn laguerre_orthonormal(l: usize, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let a = l as f64;
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = 1.0;
    for k in 0..out.len() - 1 {
        let kf = k as f64;
        let bk = (kf * (kf + a)).sqrt();
        let bk1 = ((kf + 1.0) * (kf + 1.0 + a)).sqrt();
        let next = ((t - (2.0 * kf + a + 1.0)) * cur - bk * prev) / bk1;
        prev = cur;
        cur = next;
        // (-1)^q flips the monic-orthonormal family to the classical sign.
        out[k + 1] = if (k + 1) % 2 == 0 { cur } else { -cur };
    }
}

/// Radial factor of the normalised Landau eigenfunction `φ_{q,ℓ}`.
pub fn landau_radial_function(q: i64, l: i64, b0: f64, r: f64) -> Result<f64> {
    if q < 0 || l < 0 || !(b0 > 0.0) || r < 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!("need q, l >= 0, b0 > 0, r >= 0; got q={q}, l={l}, b0={b0}, r={r}")));
    }
    let (q, l) = (q as usize, l as usize);
    let t = 0.5 * b0 * r * r;
    let amp = if t == 0.0 {
        if l == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (0.5 * (l as f64 * t.ln() - t - ln_factorial(l))).exp()
    };
    let mut poly = vec![0.0; q + 1];
    laguerre_orthonormal(l, t, &mut poly);
    Ok((b0 / (2.0 * PI)).sqrt() * amp * poly[q])
}

/// Adaptive evaluation of `E[g(t)]` under `t^ℓ e^{-t}/ℓ!`, doubling the node
/// count from `start` until successive values agree to [`RADIAL_TOLERANCE`].
fn adaptive_sector_mean<G: Fn(f64) -> f64>(l: usize, start: usize, g: G) -> Result<(f64, usize)> {
    let mut n = start.max(1);
    let mut prev = GaussRule::laguerre(n, l).integrate(&g);
    let mut change = f64::INFINITY;
    while n < MAX_RADIAL_NODES {
        n *= 2;
        let cur = GaussRule::laguerre(n, l).integrate(&g);
        change = (cur - prev).abs() / cur.abs().max(f64::MIN_POSITIVE);
        if change < RADIAL_TOLERANCE || cur == prev {
            return Ok((cur, n));
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence { nodes: n, estimate: change })
}

/// `λ_ℓ = ⟨U⊥ φ_{0,ℓ}, φ_{0,ℓ}⟩`, the ℓ-th eigenvalue of `p₀U⊥p₀` for a
/// radial profile.
pub fn toeplitz_eigenvalue(l: usize, profile: &RadialProfile, b0: f64, radial_nodes: usize) -> Result<f64> {
    if !(b0 > 0.0) {
        return Err(Error::Domain(format!("field strength must be positive, got {b0}")));
    }
    let scale = 2.0 / b0;
    adaptive_sector_mean(l, radial_nodes, |t| profile.eval((scale * t).sqrt())).map(|(v, _)| v)
}

/// Radial matrix elements of `U⊥` between the levels `0..=q_max` of one
/// angular-momentum sector.
#[derive(Debug, Clone)]
pub struct SectorElements {
    pub l: usize,
    /// `uperp[(q', q)] = ⟨φ_{q',ℓ}, U⊥ φ_{q,ℓ}⟩`, real symmetric.
    pub uperp: DMatrix<f64>,
    /// `⟨U⊥² φ_{0,ℓ}, φ_{0,ℓ}⟩ = ‖U⊥ φ_{0,ℓ}‖²`.
    pub u_sq: f64,
    pub nodes_used: usize,
}

impl SectorElements {
    pub fn compute(l: usize, profile: &RadialProfile, b0: f64, q_max: usize, start_nodes: usize) -> Result<Self> {
        if !(b0 > 0.0) {
            return Err(Error::Domain(format!("field strength must be positive, got {b0}")));
        }
        let scale = 2.0 / b0;
        let nq = q_max + 1;
        let build = |n: usize| {
            let rule = GaussRule::laguerre(n, l);
            let mut m = DMatrix::<f64>::zeros(nq, nq);
            let mut u_sq = 0.0;
            let mut poly = vec![0.0; nq];
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let u = profile.eval((scale * t).sqrt());
                laguerre_orthonormal(l, t, &mut poly);
                for a in 0..nq {
                    let wa = w * u * poly[a];
                    for b in a..nq {
                        m[(a, b)] += wa * poly[b];
                    }
                }
                u_sq += w * u * u;
            }
            for a in 0..nq {
                for b in 0..a {
                    m[(a, b)] = m[(b, a)];
                }
            }
            (m, u_sq)
        };
        // Polynomial degree 2 q_max must be resolved exactly.
        let mut n = start_nodes.max(2 * nq);
        let (mut prev, mut prev_sq) = build(n);
        let mut change = f64::INFINITY;
        while n < MAX_RADIAL_NODES {
            n *= 2;
            let (cur, cur_sq) = build(n);
            let scale_m = cur.amax().max(cur_sq.abs()).max(f64::MIN_POSITIVE);
            change = ((&cur - &prev).amax().max((cur_sq - prev_sq).abs())) / scale_m;
            if change < RADIAL_TOLERANCE {
                return Ok(Self { l, uperp: cur, u_sq: cur_sq, nodes_used: n });
            }
            prev = cur;
            prev_sq = cur_sq;
        }
        Err(Error::QuadratureNonConvergence { nodes: n, estimate: change })
    }

    /// Toeplitz eigenvalue `λ_ℓ` (the level-0 diagonal entry).
    pub fn toeplitz(&self) -> f64 {
        self.uperp[(0, 0)]
    }
}

/// Gram matrix `⟨φ_{q,ℓ}, φ_{q',ℓ}⟩_{q,q' ≤ q_max}` under the sector rule.
pub fn gram_matrix(l: usize, b0: f64, q_max: usize, radial_nodes: usize) -> Result<DMatrix<f64>> {
    let one = RadialProfile::constant(1.0)?;
    Ok(SectorElements::compute(l, &one, b0, q_max, radial_nodes)?.uperp)
}

/// General 2D matrix element `⟨φ_{q,ℓ}, F φ_{q2,ℓ2}⟩` for a potential
/// `F(r, θ)`, by a radial Gauss–Laguerre rule times an angular trapezoid.
pub fn matrix_element_2d<F>(
    (q, l): (usize, usize),
    (q2, l2): (usize, usize),
    potential: F,
    b0: f64,
    radial_nodes: usize,
    angular_nodes: usize,
) -> Complex64
where
    F: Fn(f64, f64) -> f64,
{
    let lmin = l.min(l2);
    let dl = l.abs_diff(l2) as f64;
    let norm = (0.5 * (ln_factorial(lmin) - ln_factorial(l.max(l2)))).exp();
    let rule = GaussRule::laguerre(radial_nodes, lmin);
    let mut pa = vec![0.0; q + 1];
    let mut pb = vec![0.0; q2 + 1];
    let m = angular_nodes.max(1);
    let dtheta = 2.0 * PI / m as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let r = (2.0 * t / b0).sqrt();
        laguerre_orthonormal(l, t, &mut pa);
        laguerre_orthonormal(l2, t, &mut pb);
        let radial = w * norm * t.powf(0.5 * dl) * pa[q] * pb[q2];
        let mut ang = Complex64::new(0.0, 0.0);
        for j in 0..m {
            let theta = j as f64 * dtheta;
            let phase = (l2 as f64 - l as f64) * theta;
            ang += Complex64::from_polar(potential(r, theta), phase);
        }
        total += radial * ang / m as f64;
    }
    total
}

/// Eigenvalues `λ_ℓ`, `0 ≤ ℓ ≤ l_max`, of `p₀U⊥p₀` for a radial profile.
#[derive(Debug, Clone)]
pub struct ToeplitzSpectrum {
    pub eigenvalues: Vec<f64>,
    pub basis: LandauBasisSpec,
}

impl ToeplitzSpectrum {
    pub fn compute(profile: &RadialProfile, basis: &LandauBasisSpec) -> Result<Self> {
        let eigenvalues = (0..=basis.l_max)
            .into_par_iter()
            .map(|l| toeplitz_eigenvalue(l, profile, basis.b0, basis.radial_nodes))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { eigenvalues, basis: *basis })
    }

    pub fn count(&self, s: f64) -> usize {
        counting(&self.eigenvalues, s)
    }

    /// Counts restricted to `ℓ ≤ l`.
    pub fn count_prefix(&self, l: usize, s: f64) -> usize {
        counting(&self.eigenvalues[..=l.min(self.eigenvalues.len() - 1)], s)
    }

    /// Rayleigh bound and positivity against the profile's sampled range.
    pub fn within_range(&self, profile: &RadialProfile, radii: &[f64]) -> bool {
        let (lo, hi) = radii
            .iter()
            .map(|&r| profile.eval(r))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let slack = 1e-12 * lo.abs().max(hi.abs());
        self.eigenvalues.iter().all(|&l| l >= lo.min(0.0) - slack && l <= hi + slack)
    }
}

/// `n₊(s, T) = #{eigenvalues > s}`.
pub fn counting(spectrum: &[f64], s: f64) -> usize {
    spectrum.iter().filter(|&&v| v > s).count()
}

/// Thresholds in decreasing order with the matching counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingCurve {
    pub thresholds: Vec<f64>,
    pub counts: Vec<usize>,
}

impl CountingCurve {
    pub fn from_spectrum(spectrum: &[f64], thresholds: &[f64]) -> Result<Self> {
        if thresholds.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Domain("counting thresholds must be positive".into()));
        }
        let mut thresholds = thresholds.to_vec();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let counts = thresholds.iter().map(|&s| counting(spectrum, s)).collect();
        Ok(Self { thresholds, counts })
    }

    pub fn is_monotone(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] <= w[1])
    }
}

/// `C_α = b₀/(4π) ∫_{S¹} u₀^{2/α} dt = (b₀/2) u₀^{2/α}` for constant `u₀`.
pub fn c_alpha(b0: f64, alpha: f64, u0: f64) -> Result<f64> {
    if !(b0 > 0.0) || !(alpha > 0.0) || !(u0 > 0.0) {
        return Err(Error::Domain(format!(
            "need b0 > 0, alpha > 0 and a non-vanishing amplitude u0 > 0; got b0={b0}, alpha={alpha}, u0={u0}"
        )));
    }
    Ok(b0 / (4.0 * PI) * 2.0 * PI * u0.powf(2.0 / alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawRow {
    pub s: f64,
    pub count: usize,
    /// Count with the basis truncated at `l_max / 2`.
    pub count_half: usize,
    /// `n₊(s) s^{2/α}`.
    pub normalized: f64,
    /// `λ_{l_max} < s/10` and the count is stable under `l_max` halving.
    pub trusted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerLawVerdict {
    /// Normalised counts within the tolerance of `C_α` on every row.
    Consistent,
    /// Trusted counts whose normalised ratio leaves the band.
    Deviates,
    /// Log-log slope incompatible with `-2/α` (e.g. logarithmic counting).
    NotPowerLaw,
    /// Counts not converged in the angular-momentum truncation.
    TruncationInsufficient,
}

#[derive(Debug, Clone)]
pub struct PowerLawReport {
    pub rows: Vec<PowerLawRow>,
    pub c_alpha: f64,
    /// Least-squares slope of ln n₊ against ln s.
    pub fitted_exponent: f64,
    pub max_relative_deviation: f64,
    pub verdict: PowerLawVerdict,
}

/// Compares the counting function of a Toeplitz spectrum with `C_α s^{-2/α}`.
pub fn verify_power_law(
    spectrum: &ToeplitzSpectrum,
    alpha: f64,
    u0: f64,
    s_values: &[f64],
    rel_tol: f64,
) -> Result<PowerLawReport> {
    let c = c_alpha(spectrum.basis.b0, alpha, u0)?;
    if s_values.is_empty() || s_values.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Domain("thresholds must be positive and non-empty".into()));
    }
    let l_max = spectrum.eigenvalues.len() - 1;
    let tail = spectrum.eigenvalues[l_max];
    let rows: Vec<PowerLawRow> = s_values
        .iter()
        .map(|&s| {
            let count = spectrum.count(s);
            let count_half = spectrum.count_prefix(l_max / 2, s);
            PowerLawRow {
                s,
                count,
                count_half,
                normalized: count as f64 * s.powf(2.0 / alpha),
                trusted: tail < s / 10.0 && count == count_half,
            }
        })
        .collect();

    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.count > 0).map(|r| (r.s.ln(), (r.count as f64).ln())).collect();
    let fitted_exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    let max_relative_deviation = rows.iter().map(|r| (r.normalized / c - 1.0).abs()).fold(0.0, f64::max);

    let expected = -2.0 / alpha;
    let verdict = if rows.iter().any(|r| !r.trusted) {
        PowerLawVerdict::TruncationInsufficient
    } else if !fitted_exponent.is_finite() || (fitted_exponent - expected).abs() > 0.25 * expected.abs() {
        PowerLawVerdict::NotPowerLaw
    } else if max_relative_deviation <= rel_tol {
        PowerLawVerdict::Consistent
    } else {
        PowerLawVerdict::Deviates
    };
    Ok(PowerLawReport { rows, c_alpha: c, fitted_exponent, max_relative_deviation, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_is_normalised_gaussian() {
        let b0 = 1.3;
        for r in [0.0, 0.4, 1.7, 3.0] {
            let f = landau_radial_function(0, 0, b0, r).unwrap();
            let expect = (b0 / (2.0 * PI)).sqrt() * (-b0 * r * r / 4.0).exp();
            assert!((f - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn radial_function_rejects_negative_inputs() {
        assert!(landau_radial_function(-1, 0, 1.0, 0.0).is_err());
        assert!(landau_radial_function(0, -2, 1.0, 0.0).is_err());
        assert!(landau_radial_function(0, 0, -1.0, 0.0).is_err());
        assert!(landau_radial_function(0, 0, 1.0, -0.1).is_err());
    }

    #[test]
    fn lowest_level_density_peaks_at_classical_radius() {
        let b0 = 0.7;
        for l in [1i64, 4, 9] {
            let peak = (2.0 * l as f64 / b0).sqrt();
            let at = |r: f64| landau_radial_function(0, l, b0, r).unwrap().powi(2);
            assert!(at(peak) > at(peak * 0.99));
            assert!(at(peak) > at(peak * 1.01));
        }
    }

    #[test]
    fn level_spectra() {
        let basis = LandauBasisSpec::new(0.5, 2, 4, 32).unwrap();
        assert_eq!(basis.spin_up_levels(), vec![0.0, 1.0, 2.0]);
        assert_eq!(basis.spin_down_levels(), vec![1.0, 2.0, 3.0]);
        assert!(LandauBasisSpec::new(1.0, 1, 1, 16).is_err());
        assert!(LandauBasisSpec::new(0.0, 1, 1, 32).is_err());
        assert_eq!(zeta(1.5, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn gram_matrix_is_identity() {
        for l in [0usize, 5, 300] {
            let g = gram_matrix(l, 1.0, 6, 32).unwrap();
            let err = (&g - DMatrix::<f64>::identity(7, 7)).amax();
            assert!(err < 1e-9, "l={l} err={err}");
        }
    }

    #[test]
    fn constant_profile_gives_constant_spectrum() {
        let p = RadialProfile::constant(0.37).unwrap();
        for l in [0usize, 3, 50] {
            let v = toeplitz_eigenvalue(l, &p, 2.0, 32).unwrap();
            assert!((v - 0.37).abs() < 1e-14);
        }
    }

    #[test]
    fn counting_examples() {
        let spectrum: Vec<f64> = (0..=40).map(|l| 0.5f64.powi(l + 1)).collect();
        assert_eq!(counting(&spectrum, 0.1), 3);
        assert_eq!(counting(&spectrum, 0.6), 0);
        let curve = CountingCurve::from_spectrum(&spectrum, &[0.01, 0.3, 0.1]).unwrap();
        assert_eq!(curve.thresholds, vec![0.3, 0.1, 0.01]);
        assert!(curve.is_monotone());
    }

    #[test]
    fn c_alpha_values() {
        assert!((c_alpha(1.0, 2.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((c_alpha(2.0, 4.0, 16.0).unwrap() - 4.0).abs() < 1e-14);
        assert!(c_alpha(1.0, 2.0, 0.0).is_err());
        assert!(RadialProfile::power_law(2.0, 0.0).is_err());
    }

    #[test]
    fn envelope_check() {
        let p = RadialProfile::power_law(2.0, 1.5).unwrap();
        let radii: Vec<f64> = (0..200).map(|i| i as f64 * 0.25).collect();
        p.check_envelope(&radii).unwrap();
        let g = RadialProfile::gaussian(0.3, 1.0).unwrap();
        g.check_envelope(&radii).unwrap();
        let bad = RadialProfile::new("bad", |r| 1.0 + r, 1.0, None, 1.0).unwrap();
        assert!(bad.check_envelope(&radii).is_err());
    }

    #[test]
    fn tabulated_profile_interpolates() {
        let r = vec![0.0, 1.0, 2.0];
        let v = vec![1.0, 0.5, 0.2];
        let p = RadialProfile::tabulated(r, v, 2.0, Some(0.8)).unwrap();
        assert!((p.eval(0.5) - 0.75).abs() < 1e-15);
        assert!((p.eval(4.0) - 0.2 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn radial_off_diagonal_angular_elements_vanish() {
        let p = RadialProfile::power_law(2.0, 1.0).unwrap();
        let f = |r: f64, _t: f64| p.eval(r);
        for (l, l2) in [(0usize, 1usize), (2, 5), (7, 3)] {
            let v = matrix_element_2d((0, l), (0, l2), f, 1.0, 64, 64);
            assert!(v.norm() < 1e-12, "({l},{l2}) -> {v}");
        }
        let diag = matrix_element_2d((0, 3), (0, 3), f, 1.0, 128, 16);
        let lam = toeplitz_eigenvalue(3, &p, 1.0, 32).unwrap();
        assert!((diag.re - lam).abs() < 1e-9);
    }
}
