//! Gauss rules built with the Golub–Welsch construction.
//!
//! The symmetric tridiagonal eigenproblem is solved with an implicit QL
//! iteration that only accumulates the leading rows of the eigenvector
//! matrix. For a quadrature rule only the first row is needed, which keeps
//! the cost at O(n²) per rule; the Toeplitz counting runs build tens of
//! thousands of rules, one per angular momentum.

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
///
/// `diag` has length n, `off` has length n − 1 (`off[i]` couples i and i+1).
/// Returns the eigenvalues in ascending order together with the first `rows`
/// rows of the orthonormal eigenvector matrix, stored row-major
/// (`vectors[r * n + j]` is component r of eigenvector j).
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64], rows: usize) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1), "off-diagonal length must be n - 1");
    let rows = rows.min(n);
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
    let mut v = vec![0.0; rows * n];
    for r in 0..rows {
        v[r * n + r] = 1.0;
    }
    if n == 0 {
        return (d, v);
    }

    // tql2 (EISPACK / JAMA), restricted to the leading rows of V.
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                debug_assert!(iter < 200, "tridiagonal QL failed to converge");
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in 0..rows {
                        let base = row * n;
                        let hv = v[base + i + 1];
                        v[base + i + 1] = s * v[base + i] + c * hv;
                        v[base + i] = c * v[base + i] - s * hv;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&j| d[j]).collect();
    let mut vectors = vec![0.0; rows * n];
    for row in 0..rows {
        for (jn, &jo) in order.iter().enumerate() {
            vectors[row * n + jn] = v[row * n + jo];
        }
    }
    (values, vectors)
}

/// A Gauss rule: nodes and weights for a fixed weight function.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Rule from a Jacobi matrix with total mass `mass` of the weight.
    fn from_jacobi(diag: &[f64], off: &[f64], mass: f64) -> Self {
        let (nodes, first) = symmetric_tridiagonal_eigen(diag, off, 1);
        let weights = first.iter().map(|v| mass * v * v).collect();
        Self { nodes, weights }
    }

    /// n-point rule for the probability weight t^l e^{-t} / l! on [0, ∞).
    ///
    /// Weights come from the Christoffel function rather than eigenvector
    /// components, so the tiny weights at the ends keep relative accuracy.
    pub fn laguerre(n: usize, l: usize) -> Self {
        assert!(n > 0);
        let a = l as f64;
        let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + a + 1.0).collect();
        let off: Vec<f64> = (1..n).map(|k| (k as f64 * (k as f64 + a)).sqrt()).collect();
        let (nodes, _) = symmetric_tridiagonal_eigen(&diag, &off, 0);
        let mut weights: Vec<f64> = nodes.iter().map(|&t| christoffel(&diag, &off, t)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { nodes, weights }
    }

    /// n-point Gauss–Legendre rule on [-1, 1].
    pub fn legendre(n: usize) -> Self {
        assert!(n > 0);
        let diag = vec![0.0; n];
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        let mut rule = Self::from_jacobi(&diag, &off, 2.0);
        // Symmetrise to remove rounding asymmetry.
        let m = rule.nodes.len();
        for i in 0..m / 2 {
            let j = m - 1 - i;
            let x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
            let w = 0.5 * (rule.weights[i] + rule.weights[j]);
            rule.nodes[i] = -x;
            rule.nodes[j] = x;
            rule.weights[i] = w;
            rule.weights[j] = w;
        }
        if m % 2 == 1 {
            rule.nodes[m / 2] = 0.0;
        }
        rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Fixed-order weighted sum of `f` over the nodes.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `1 / Σ_k p_k(t)²` over the orthonormal polynomials of a unit-mass
/// Jacobi matrix, rescaled on the fly against overflow.
fn christoffel(diag: &[f64], off: &[f64], t: f64) -> f64 {
    const BIG: f64 = 1e150;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for k in 0..off.len() {
        let back = if k > 0 { off[k - 1] * prev } else { 0.0 };
        let next = ((t - diag[k]) * cur - back) / off[k];
        prev = cur;
        cur = next;
        sum += cur * cur;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            sum /= BIG * BIG;
            log_scale += 2.0 * BIG.ln();
        }
    }
    (-(sum.ln() + log_scale)).exp()
}

/// ln(n!) by direct summation; exact enough for the arguments used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let diag = [2.0, -1.0, 3.5, 0.25, 1.0];
        let off = [0.5, -1.5, 0.75, 2.0];
        let (vals, vecs) = symmetric_tridiagonal_eigen(&diag, &off, 5);
        let n = diag.len();
        for j in 0..n {
            for i in 0..n {
                let mut av = diag[i] * vecs[i * n + j];
                if i > 0 {
                    av += off[i - 1] * vecs[(i - 1) * n + j];
                }
                if i + 1 < n {
                    av += off[i] * vecs[(i + 1) * n + j];
                }
                assert!((av - vals[j] * vecs[i * n + j]).abs() < 1e-12);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = GaussRule::legendre(8);
        let x14 = rule.integrate(|x| x.powi(14));
        assert!((x14 - 2.0 / 15.0).abs() < 1e-14);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_moments() {
        // E[t^j] under t^l e^{-t}/l! equals (l+j)!/l!.
        for l in [0usize, 3, 40] {
            let rule = GaussRule::laguerre(12, l);
            for j in 0..8 {
                let exact = (ln_factorial(l + j) - ln_factorial(l)).exp();
                let got = rule.integrate(|t| t.powi(j as i32));
                assert!((got / exact - 1.0).abs() < 1e-12, "l={l} j={j}");
            }
        }
    }
}
