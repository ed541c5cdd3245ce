//! Logarithmic-residue (Gohberg–Sigal) indices of matrix-valued holomorphic
//! families and recursive location of their characteristic values.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

type C = Complex64;

/// Residual to the nearest integer accepted for an index.
pub const INDEX_TOLERANCE: f64 = 1e-6;
/// Default split point of a cell side; off-centre so that cells do not
/// share edges with symmetry axes of the family.
pub const SPLIT_FRACTION: f64 = 0.5 + 0.0123;
/// Initial contour node count.
pub const START_NODES: usize = 64;
/// LU pivot ratio below which a contour node counts as singular.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// A square-matrix-valued function holomorphic near the contours it is
/// integrated over.
pub trait HolomorphicFamily: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, k: C) -> Result<DMatrix<C>>;
    /// Analytic derivative, when the family provides one.
    fn derivative(&self, _k: C) -> Option<Result<DMatrix<C>>> {
        None
    }
}

/// Scalar family from closures.
pub struct ScalarFamily<F> {
    f: F,
    df: Option<Box<dyn Fn(C) -> C + Send + Sync>>,
}

impl<F: Fn(C) -> C + Sync> ScalarFamily<F> {
    pub fn new(f: F) -> Self {
        Self { f, df: None }
    }

    pub fn with_derivative<D: Fn(C) -> C + Send + Sync + 'static>(f: F, df: D) -> Self {
        Self { f, df: Some(Box::new(df)) }
    }
}

impl<F: Fn(C) -> C + Sync> HolomorphicFamily for ScalarFamily<F> {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, k: C) -> Result<DMatrix<C>> {
        Ok(DMatrix::from_element(1, 1, (self.f)(k)))
    }

    fn derivative(&self, k: C) -> Option<Result<DMatrix<C>>> {
        self.df.as_ref().map(|d| Ok(DMatrix::from_element(1, 1, d(k))))
    }
}

/// Matrix family from a closure, derivative by differences.
pub struct MatrixFamily<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(C) -> DMatrix<C> + Sync> MatrixFamily<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(C) -> DMatrix<C> + Sync> HolomorphicFamily for MatrixFamily<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, k: C) -> Result<DMatrix<C>> {
        Ok((self.f)(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourShape {
    Circle { center: C, radius: f64 },
    /// Axis-aligned rectangle with corners `lo` (bottom left) and `hi`.
    Rectangle { lo: C, hi: C },
}

impl ContourShape {
    pub fn contains(&self, k: C) -> bool {
        match *self {
            ContourShape::Circle { center, radius } => (k - center).norm() < radius,
            ContourShape::Rectangle { lo, hi } => k.re > lo.re && k.re < hi.re && k.im > lo.im && k.im < hi.im,
        }
    }

    /// Distance from `k` to the curve.
    pub fn distance(&self, k: C) -> f64 {
        match *self {
            ContourShape::Circle { center, radius } => ((k - center).norm() - radius).abs(),
            ContourShape::Rectangle { lo, hi } => {
                let dx = (k.re - lo.re).min(hi.re - k.re);
                let dy = (k.im - lo.im).min(hi.im - k.im);
                if dx >= 0.0 && dy >= 0.0 {
                    dx.min(dy)
                } else {
                    let ox = (lo.re - k.re).max(k.re - hi.re).max(0.0);
                    let oy = (lo.im - k.im).max(k.im - hi.im).max(0.0);
                    ox.hypot(oy)
                }
            }
        }
    }
}

/// Positively oriented closed contour with quadrature nodes and `dz`
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub shape: ContourShape,
    pub nodes: Vec<C>,
    pub weights: Vec<C>,
}

impl Contour {
    /// Trapezoid rule on a circle, spectrally accurate for periodic
    /// integrands.
    pub fn circle(center: C, radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) || n < 3 {
            return Err(Error::Domain(format!("circle needs radius > 0 and n >= 3, got {radius}, {n}")));
        }
        let (nodes, weights) = (0..n)
            .map(|j| {
                let e = C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
                (center + radius * e, C::i() * radius * e * (2.0 * PI / n as f64))
            })
            .unzip();
        Ok(Self { shape: ContourShape::Circle { center, radius }, nodes, weights })
    }

    /// Gauss–Legendre on each edge, `n / 4` nodes per edge.
    pub fn rectangle(lo: C, hi: C, n: usize) -> Result<Self> {
        if !(hi.re > lo.re && hi.im > lo.im) || n < 4 {
            return Err(Error::Domain(format!("rectangle needs hi > lo componentwise and n >= 4, got {lo}, {hi}")));
        }
        let per_edge = n / 4;
        let rule = GaussRule::legendre(per_edge);
        let corners = [lo, C::new(hi.re, lo.im), hi, C::new(lo.re, hi.im), lo];
        let mut nodes = Vec::with_capacity(4 * per_edge);
        let mut weights = Vec::with_capacity(4 * per_edge);
        for e in 0..4 {
            let (a, b) = (corners[e], corners[e + 1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + half * t);
                weights.push(half * w);
            }
        }
        Ok(Self { shape: ContourShape::Rectangle { lo, hi }, nodes, weights })
    }

    pub fn from_shape(shape: ContourShape, n: usize) -> Result<Self> {
        match shape {
            ContourShape::Circle { center, radius } => Self::circle(center, radius, n),
            ContourShape::Rectangle { lo, hi } => Self::rectangle(lo, hi, n),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeScheme {
    /// Use the family's analytic derivative, falling back to differences.
    Analytic,
    /// Richardson-extrapolated central differences with step `h`; samples
    /// whose extrapolation error exceeds `tolerance` (relative) are rejected.
    Central { h: f64, tolerance: f64 },
}

impl Default for DerivativeScheme {
    fn default() -> Self {
        DerivativeScheme::Analytic
    }
}

/// A derivative sample with its error estimate (zero for analytic ones).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSample {
    pub value: DMatrix<C>,
    pub error: f64,
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

fn central(family: &dyn HolomorphicFamily, k: C, h: f64) -> Result<DMatrix<C>> {
    let hc = C::new(h, 0.0);
    Ok((family.eval(k + hc)? - family.eval(k - hc)?) / (2.0 * hc))
}

/// `F'(k)` under the chosen scheme.
pub fn derivative_at(family: &dyn HolomorphicFamily, k: C, scheme: DerivativeScheme) -> Result<DerivativeSample> {
    let (h, tolerance) = match scheme {
        DerivativeScheme::Analytic => {
            if let Some(d) = family.derivative(k) {
                return Ok(DerivativeSample { value: d?, error: 0.0 });
            }
            (1e-4 * k.norm().max(1e-3), 1e-6)
        }
        DerivativeScheme::Central { h, tolerance } => (h, tolerance),
    };
    let coarse = central(family, k, h)?;
    let fine = central(family, k, 0.5 * h)?;
    let value = (fine.clone() * C::new(4.0, 0.0) - coarse) / C::new(3.0, 0.0);
    let error = max_abs(&(&value - &fine));
    let scale = max_abs(&value).max(f64::MIN_POSITIVE);
    if error > tolerance * scale.max(1.0) {
        return Err(Error::NoisyDerivative { error: error / scale.max(1.0), tolerance });
    }
    Ok(DerivativeSample { value, error })
}

/// Derivative samples at every contour node.
pub fn derivative_samples(
    family: &dyn HolomorphicFamily,
    contour: &Contour,
    scheme: DerivativeScheme,
) -> Result<Vec<DerivativeSample>> {
    contour.nodes.iter().map(|&k| derivative_at(family, k, scheme)).collect()
}

/// Index value on one contour.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEvaluation {
    pub index: i64,
    /// Raw `(1/2πi) Σ w Tr(F^{-1}F')`.
    pub value: C,
    /// Distance of `value` to `index`.
    pub residual: f64,
    /// `(1/2πi) Σ w k Tr(F^{-1}F')`: sum of enclosed characteristic values
    /// minus enclosed poles, counted with multiplicity.
    pub first_moment: C,
    /// Smallest LU pivot ratio seen on the contour.
    pub min_pivot_ratio: f64,
    pub nodes: usize,
}

impl IndexEvaluation {
    /// Mean location of the enclosed characteristic values when no poles
    /// are enclosed.
    pub fn centroid(&self) -> Option<C> {
        (self.index != 0).then(|| self.first_moment / self.index as f64)
    }
}

/// `Tr(F^{-1}F')` at one node by an LU solve, with the pivot ratio.
fn log_derivative_trace(f: DMatrix<C>, df: &DMatrix<C>, k: C) -> Result<(C, f64)> {
    let lu = f.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..u.nrows() {
        let p = u[(i, i)].norm();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(ratio > PIVOT_FLOOR) {
        return Err(Error::NearSingularNode { re: k.re, im: k.im, ratio });
    }
    let x = lu.solve(df).ok_or(Error::NearSingularNode { re: k.re, im: k.im, ratio })?;
    Ok((x.trace(), ratio))
}

/// Index at a fixed node count; no integrality requirement.
pub fn gs_index_fixed(family: &dyn HolomorphicFamily, contour: &Contour, scheme: DerivativeScheme) -> Result<IndexEvaluation> {
    let samples: Vec<(C, f64)> = contour
        .nodes
        .par_iter()
        .map(|&k| {
            let f = family.eval(k)?;
            let df = derivative_at(family, k, scheme)?.value;
            log_derivative_trace(f, &df, k)
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = C::new(0.0, 2.0 * PI);
    let mut value = C::new(0.0, 0.0);
    let mut moment = C::new(0.0, 0.0);
    let mut min_ratio = f64::INFINITY;
    for ((tr, ratio), (&k, &w)) in samples.iter().zip(contour.nodes.iter().zip(&contour.weights)) {
        value += w * tr;
        moment += w * k * tr;
        min_ratio = min_ratio.min(*ratio);
    }
    value /= scale;
    moment /= scale;
    let index = value.re.round() as i64;
    let residual = (value - C::new(index as f64, 0.0)).norm();
    Ok(IndexEvaluation {
        index,
        value,
        residual,
        first_moment: moment,
        min_pivot_ratio: min_ratio,
        nodes: contour.len(),
    })
}

/// Index over `shape`, doubling nodes from [`START_NODES`] until the value
/// is within [`INDEX_TOLERANCE`] of an integer.
pub fn gs_index(family: &dyn HolomorphicFamily, shape: ContourShape, scheme: DerivativeScheme, max_nodes: usize) -> Result<IndexEvaluation> {
    let mut n = START_NODES;
    loop {
        let contour = Contour::from_shape(shape, n)?;
        let eval = gs_index_fixed(family, &contour, scheme)?;
        if eval.residual < INDEX_TOLERANCE {
            return Ok(eval);
        }
        if 2 * n > max_nodes {
            return Err(Error::NonIntegerIndex { value: eval.value.re, residual: eval.residual, nodes: n });
        }
        n *= 2;
    }
}

/// Located characteristic value.
#[derive(Debug, Clone, PartialEq)]
pub struct CharValue {
    pub k: C,
    /// Index of the enclosing cell.
    pub multiplicity: usize,
    pub sector_ok: bool,
    /// Enclosing cell corners.
    pub cell: (C, C),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocateOptions {
    pub max_depth: usize,
    /// Cells whose larger side is below this size are not split further.
    pub min_size: f64,
    /// Stop splitting a cell of index one as soon as its centroid estimate
    /// lies inside it.
    pub resolve_simple: bool,
    pub max_nodes: usize,
    pub scheme: DerivativeScheme,
    /// Jittered retries of a split that lands on a singular boundary.
    pub retries: usize,
}

impl Default for LocateOptions {
    fn default() -> Self {
        Self {
            max_depth: 24,
            min_size: 1e-7,
            resolve_simple: false,
            max_nodes: 1024,
            scheme: DerivativeScheme::Analytic,
            retries: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocateReport {
    pub values: Vec<CharValue>,
    pub total_index: i64,
    /// Number of cell indices evaluated.
    pub cells: usize,
}

/// Recursive quadrisection of the rectangle `[lo, hi]`.
pub fn locate(family: &dyn HolomorphicFamily, lo: C, hi: C, opts: &LocateOptions) -> Result<LocateReport> {
    let shape = ContourShape::Rectangle { lo, hi };
    let top = gs_index(family, shape, opts.scheme, opts.max_nodes)?;
    let mut cells = 1;
    let mut values = Vec::new();
    refine_cell(family, lo, hi, &top, 0, opts, &mut values, &mut cells)?;
    Ok(LocateReport { values, total_index: top.index, cells })
}

fn split_children(lo: C, hi: C, t: f64) -> [(C, C); 4] {
    let mx = lo.re + t * (hi.re - lo.re);
    let my = lo.im + t * (hi.im - lo.im);
    [
        (lo, C::new(mx, my)),
        (C::new(mx, lo.im), C::new(hi.re, my)),
        (C::new(lo.re, my), C::new(mx, hi.im)),
        (C::new(mx, my), hi),
    ]
}

#[allow(clippy::too_many_arguments)]
fn refine_cell(
    family: &dyn HolomorphicFamily,
    lo: C,
    hi: C,
    eval: &IndexEvaluation,
    depth: usize,
    opts: &LocateOptions,
    out: &mut Vec<CharValue>,
    cells: &mut usize,
) -> Result<()> {
    if eval.index == 0 {
        return Ok(());
    }
    let shape = ContourShape::Rectangle { lo, hi };
    let size = (hi.re - lo.re).max(hi.im - lo.im);
    let centroid = eval.centroid().unwrap_or(0.5 * (lo + hi));
    let simple_done = opts.resolve_simple && eval.index == 1 && shape.contains(centroid);
    if depth >= opts.max_depth || size < opts.min_size || simple_done || eval.index < 0 {
        out.push(CharValue {
            k: if shape.contains(centroid) { centroid } else { 0.5 * (lo + hi) },
            multiplicity: eval.index.unsigned_abs() as usize,
            sector_ok: false,
            cell: (lo, hi),
        });
        return Ok(());
    }
    let mut last_err = None;
    for attempt in 0..=opts.retries {
        let t = SPLIT_FRACTION + 0.0371 * attempt as f64 * if attempt % 2 == 0 { 1.0 } else { -1.0 };
        let children = split_children(lo, hi, t);
        let evals: Vec<Result<IndexEvaluation>> = children
            .par_iter()
            .map(|&(a, b)| gs_index(family, ContourShape::Rectangle { lo: a, hi: b }, opts.scheme, opts.max_nodes))
            .collect();
        *cells += 4;
        if let Some(err) = evals.iter().find_map(|e| e.as_ref().err()) {
            match err {
                Error::NearSingularNode { .. } | Error::NonIntegerIndex { .. } => {
                    last_err = Some(err.clone());
                    continue;
                }
                other => return Err(other.clone()),
            }
        }
        let evals: Vec<IndexEvaluation> = evals.into_iter().map(|e| e.unwrap()).collect();
        let sum: i64 = evals.iter().map(|e| e.index).sum();
        if sum != eval.index {
            last_err = Some(Error::IndexAdditivity { parent: eval.index, children: sum });
            continue;
        }
        for (&(a, b), e) in children.iter().zip(&evals) {
            refine_cell(family, a, b, e, depth + 1, opts, out, cells)?;
        }
        return Ok(());
    }
    Err(last_err.expect("at least one attempt"))
}

/// `−ik/ν²` lies in `{x + iy : a ≤ x ≤ b, |y| ≤ αx}`.
pub fn sector_membership(k: C, nu: f64, alpha: f64, a: f64, b: f64) -> bool {
    let nu2 = nu * nu;
    let x = k.im / nu2;
    let y = -k.re / nu2;
    a <= x && x <= b && y.abs() <= alpha * x
}

/// Rectangles of a dyadic tiling covering `r_in < |k| < r_out` and avoiding
/// a neighbourhood of the origin. Each shell is the square of half-width
/// `R` minus the concentric one of half-width `R/2`, cut into eight
/// rectangles: three in each horizontal band (split at `±R/3`) and one in
/// each vertical band. No edge lies on either coordinate axis.
pub fn annulus_tiles(r_in: f64, r_out: f64) -> Vec<(C, C)> {
    let mut tiles = Vec::new();
    let mut big = r_out;
    loop {
        let half = big / 2.0;
        let xs = [-big, -big / 3.0, big / 3.0, big];
        for w in xs.windows(2) {
            tiles.push((C::new(w[0], half), C::new(w[1], big)));
            tiles.push((C::new(w[0], -big), C::new(w[1], -half)));
        }
        tiles.push((C::new(-big, -half), C::new(-half, half)));
        tiles.push((C::new(half, -half), C::new(big, half)));
        big = half;
        if big * std::f64::consts::SQRT_2 <= r_in {
            break;
        }
    }
    tiles
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusReport {
    /// Characteristic values with `r_in < |k| < r_out`.
    pub values: Vec<CharValue>,
    /// Characteristic values in the tiling but outside the annulus.
    pub outside: Vec<CharValue>,
    pub total_index: i64,
    pub cells: usize,
}

/// Characteristic values in the annulus `r_in < |k| < r_out`, which must
/// lie with its covering squares in the disk of radius `eps`.
#[allow(clippy::too_many_arguments)]
pub fn locate_annulus(
    family: &dyn HolomorphicFamily,
    r_in: f64,
    r_out: f64,
    eps: f64,
    nu: f64,
    alpha: f64,
    opts: &LocateOptions,
) -> Result<AnnulusReport> {
    if !(r_in > 0.0 && r_out > r_in) {
        return Err(Error::Domain(format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    if std::f64::consts::SQRT_2 * r_out >= eps {
        return Err(Error::OutsideDisk { modulus: std::f64::consts::SQRT_2 * r_out, radius: eps });
    }
    let mut last_err = None;
    for attempt in 0..=opts.retries {
        // Growing the outer radius keeps the annulus covered.
        let grown = r_out * (1.0 + 0.0173 * attempt as f64);
        if std::f64::consts::SQRT_2 * grown >= eps {
            break;
        }
        match tile_annulus(family, r_in, r_out, grown, nu, alpha, opts) {
            Ok(rep) => return Ok(rep),
            Err(e @ (Error::NearSingularNode { .. } | Error::NonIntegerIndex { .. } | Error::IndexAdditivity { .. })) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::OutsideDisk { modulus: std::f64::consts::SQRT_2 * r_out, radius: eps }))
}

#[allow(clippy::too_many_arguments)]
fn tile_annulus(
    family: &dyn HolomorphicFamily,
    r_in: f64,
    r_out: f64,
    tiling_radius: f64,
    nu: f64,
    alpha: f64,
    opts: &LocateOptions,
) -> Result<AnnulusReport> {
    let mut values = Vec::new();
    let mut outside = Vec::new();
    let mut total_index = 0;
    let mut cells = 0;
    for (lo, hi) in annulus_tiles(r_in, tiling_radius) {
        let report = locate(family, lo, hi, opts)?;
        total_index += report.total_index;
        cells += report.cells;
        for mut v in report.values {
            v.sector_ok = sector_membership(v.k, nu, alpha, 0.0, f64::INFINITY);
            let r = v.k.norm();
            if r > r_in && r < r_out {
                values.push(v);
            } else {
                outside.push(v);
            }
        }
    }
    Ok(AnnulusReport { values, outside, total_index, cells })
}
