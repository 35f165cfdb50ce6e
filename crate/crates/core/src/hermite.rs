//! Gauss-Hermite rules for the standard normal weight.

/// Nodes and weights such that `sum w_i f(x_i)` approximates `E[f(X)]` for
/// `X ~ N(0, 1)`; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i + 1`), by implicit QL.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    e.resize(n, 0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "QL iteration did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

/// Orthonormal probabilists' Hermite recurrence at `x`: returns
/// `(p_n, p_{n-1}, log_scale)` with both values divided by `exp(log_scale)`.
fn recurrence(n: usize, x: f64) -> (f64, f64, f64) {
    let mut p1 = 1.0_f64;
    let mut p0 = 0.0_f64;
    let mut log_scale = 0.0;
    for k in 0..n {
        let kf = k as f64;
        let next = (x * p1 - kf.sqrt() * p0) / (kf + 1.0).sqrt();
        p0 = p1;
        p1 = next;
        if p1.abs() > 1e150 {
            p1 *= 1e-150;
            p0 *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (p1, p0, log_scale)
}

impl GaussHermite {
    /// Golub-Welsch eigenvalues of the Jacobi matrix as starting points,
    /// polished by Newton on the orthonormal recurrence, which also gives
    /// weights with full relative accuracy in the tails.
    ///
    /// Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Hermite rule needs at least one node");
        let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
        let mut nodes = tridiagonal_eigenvalues(vec![0.0; n], off);
        nodes.sort_by(f64::total_cmp);
        let nf = n as f64;
        let mut weights = vec![0.0; n];
        for i in n / 2..n {
            let mut x = if n % 2 == 1 && i == n / 2 { 0.0 } else { nodes[i] };
            let mut state = recurrence(n, x);
            for _ in 0..20 {
                let (pn, pm, _) = state;
                // p_n' = sqrt(n) p_{n-1} at a root of p_n
                let step = pn / (nf.sqrt() * pm);
                x -= step;
                state = recurrence(n, x);
                if step.abs() <= 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, pm, log_scale) = state;
            // w = 1 / (n p_{n-1}(x)^2)
            let w = (-nf.ln() - 2.0 * (pm.abs().ln() + log_scale)).exp();
            nodes[i] = x;
            weights[i] = w;
            nodes[n - 1 - i] = -x;
            weights[n - 1 - i] = w;
        }
        GaussHermite { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
