//! Small dense linear-algebra kernels used across the crate: symmetric LDL^T
//! factorization, symmetric eigenvalues (cyclic Jacobi), eigenvalues of
//! symmetric tridiagonal matrices (implicit-shift QL), pairwise summation and
//! a log-gamma needed for the Jacobi normalization constants.

use crate::error::{Error, Result};

/// Arithmetic-operation counter for complexity instrumentation. Counts
/// multiplications and divisions; additions ride along for free at the fit
/// accuracy we need.
#[derive(Debug, Default, Clone, Copy)]
pub struct OpCounter {
    pub ops: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self { ops: 0 }
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.ops += n;
    }
}

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }
}

/// Unit-lower LDL^T factorization of a symmetric positive definite matrix,
/// no pivoting. The `pivots` are the diagonal of D; their prefix products are
/// the leading principal minors of the input.
pub struct Ldlt {
    pub n: usize,
    /// Strict lower triangle of L (unit diagonal implicit), row-major.
    pub lower: Vec<f64>,
    pub pivots: Vec<f64>,
}

/// Factor `a` as L D L^T. Fails on a non-positive pivot unless
/// `allow_semidefinite`, in which case factorization stops gracefully and the
/// remaining pivots are reported as they come out (possibly <= 0).
pub fn ldlt(a: &SymMatrix, counter: &mut OpCounter) -> Result<Ldlt> {
    ldlt_impl(a, counter, false)
}

/// LDL^T that keeps going through tiny or negative pivots, for determinant
/// ratios of nearly singular Gram matrices.
pub fn ldlt_lenient(a: &SymMatrix, counter: &mut OpCounter) -> Ldlt {
    ldlt_impl(a, counter, true).expect("lenient ldlt cannot fail")
}

fn ldlt_impl(a: &SymMatrix, counter: &mut OpCounter, lenient: bool) -> Result<Ldlt> {
    let n = a.n;
    let mut f = a.data.clone();
    for j in 0..n {
        let d = f[j * n + j];
        if !lenient && !(d > 0.0) {
            return Err(Error::MeasureDegenerate { depth: j });
        }
        let dinv = if d != 0.0 { 1.0 / d } else { 0.0 };
        for i in (j + 1)..n {
            f[i * n + j] *= dinv;
        }
        for i in (j + 1)..n {
            let lid = f[i * n + j] * d;
            for k in (j + 1)..=i {
                f[i * n + k] -= lid * f[k * n + j];
            }
        }
        counter.add(((n - j) * (n - j)) as u64);
    }
    let mut lower = vec![0.0; n * n];
    let mut pivots = vec![0.0; n];
    for j in 0..n {
        pivots[j] = f[j * n + j];
        for i in (j + 1)..n {
            lower[i * n + j] = f[i * n + j];
        }
    }
    Ok(Ldlt { n, lower, pivots })
}

impl Ldlt {
    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [f64], counter: &mut OpCounter) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lower[i * n + j] * b[j];
            }
            b[i] = s;
        }
        for i in 0..n {
            b[i] /= self.pivots[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.lower[j * n + i] * b[j];
            }
            b[i] = s;
        }
        counter.add((n * n + n) as u64);
    }

    pub fn log_det(&self) -> f64 {
        self.pivots.iter().map(|p| p.abs().ln()).sum()
    }
}

/// Dense inverse through the LDL^T factorization, column by column.
pub fn inverse(a: &SymMatrix, counter: &mut OpCounter) -> Result<SymMatrix> {
    let n = a.n;
    let f = ldlt(a, counter)?;
    let mut inv = SymMatrix::zeros(n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[j] = 1.0;
        f.solve(&mut col, counter);
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    Ok(inv)
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi rotation method.
/// Adequate for the moderate orders used in property checks (n <= a few
/// hundred).
pub fn sym_eigenvalues(a: &SymMatrix) -> Vec<f64> {
    let n = a.n;
    if n == 0 {
        return Vec::new();
    }
    let mut m = a.data.clone();
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[idx(i, j)] * m[idx(i, j)];
            }
        }
        let scale = (0..n).map(|i| m[idx(i, i)].abs()).fold(0.0f64, f64::max).max(1e-300);
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[idx(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[idx(p, p)];
                let aqq = m[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[idx(k, p)];
                    let akq = m[idx(k, q)];
                    m[idx(k, p)] = c * akp - s * akq;
                    m[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[idx(p, k)];
                    let aqk = m[idx(q, k)];
                    m[idx(p, k)] = c * apk - s * aqk;
                    m[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[idx(i, i)]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

/// Eigenvalues of a symmetric tridiagonal matrix (diagonal `d`, off-diagonal
/// `e` with `e[i]` coupling rows i and i+1) by QL iteration with implicit
/// Wilkinson shifts. Returns the eigenvalues in ascending order.
pub fn sym_tridiag_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    assert!(n == 0 || e.len() + 1 == n);
    if n == 0 {
        return Vec::new();
    }
    let mut d = d.to_vec();
    // working copy with a trailing zero like the classical formulation
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            // first negligible off-diagonal at or after l
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
            assert!(iter < 100, "tridiagonal QL failed to converge");
            // implicit shift from the leading 2x2
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
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
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d
}

/// Pairwise (cascade) summation; order-stable to ~1e-16 relative regardless
/// of chunking, as the module contracts require.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

/// ln Gamma(x) for x > 0, Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}
