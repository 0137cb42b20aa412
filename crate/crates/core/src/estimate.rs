//! Spectral estimation: the two-dimensional periodogram for period
//! detection, its deterministic expectation oracle, Fejer-type spectral
//! density estimates, the Christoffel-Darboux kernel statistic, and the
//! ensemble covariance estimator.

use crate::error::{Error, Result};
use crate::hyperconv::Hypergroup;
use crate::measures::BiMeasure;
use crate::sequences::Path;
use num_complex::Complex64;

/// Rectangular evaluation grid with complex values.
#[derive(Debug, Clone)]
pub struct Grid2 {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: `values[i * ys.len() + j]` at `(xs[i], ys[j])`.
    pub values: Vec<Complex64>,
}

impl Grid2 {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.ys.len() + j]
    }

    /// Uniform grid over the dual space.
    pub fn uniform_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        assert!(count >= 2);
        (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
    }
}

/// Normalized kernel statistic t_n(x,y) =
/// (sum_{k<=n} h(k))^{-1} sum_{k<=n} P_k(x) P_k(y) h(k).
pub fn t_statistic(hg: &Hypergroup, n: usize, x: f64, y: f64) -> f64 {
    let sys = hg.sys();
    let h = hg.haar_weights(n);
    let total: f64 = h.iter().sum();
    let rx = sys.eval_row(n, x);
    let ry = sys.eval_row(n, y);
    let mut acc = 0.0;
    for k in 0..=n {
        acc += rx[k] * ry[k] * h[k];
    }
    acc / total
}

/// The same statistic through the Christoffel-Darboux closed form, defined
/// for x != y; cross-checks the plain sum.
pub fn t_statistic_christoffel(hg: &Hypergroup, n: usize, x: f64, y: f64) -> f64 {
    assert!((x - y).abs() > 0.0, "the closed form needs x != y");
    let sys = hg.sys();
    let h = hg.haar_weights(n);
    let total: f64 = h.iter().sum();
    let (a_n, _, _) = sys.recurrence(n);
    let (px_n, px_n1) = sys.eval_pair(n, x);
    let (py_n, py_n1) = sys.eval_pair(n, y);
    sys.a0() * a_n * h[n] * (px_n1 * py_n - px_n * py_n1) / ((x - y) * total)
}

/// Two-dimensional periodogram of a path, evaluated through the exact
/// factorization I_N(x,y) = F(x) conj(F(y)) / (sum h)^2 with
/// F(x) = sum_{k<=N} X_k P_k(x) h(k); O(N * grid) per axis.
pub fn periodogram(hg: &Hypergroup, path: &Path, n: usize, xs: &[f64], ys: &[f64]) -> Result<Grid2> {
    if path.len() < n + 1 {
        return Err(Error::IndexOutOfRange { needed: n, len: path.len() });
    }
    let sys = hg.sys();
    let h = hg.haar_weights(n);
    let total: f64 = h.iter().sum();
    let f_at = |x: f64| -> Complex64 {
        let row = sys.eval_row(n, x);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            acc += path.values[k] * (row[k] * h[k]);
        }
        acc
    };
    let fx: Vec<Complex64> = xs.iter().map(|&x| f_at(x)).collect();
    let fy: Vec<Complex64> = ys.iter().map(|&y| f_at(y)).collect();
    let scale = 1.0 / (total * total);
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for fxi in &fx {
        for fyj in &fy {
            values.push(fxi * fyj.conj() * scale);
        }
    }
    Ok(Grid2 { xs: xs.to_vec(), ys: ys.to_vec(), values })
}

/// Deterministic E I_N over a bimeasure: atoms contribute
/// t_N(xa, x) t_N(ya, y) per unit mass, a diagonal continuous part
/// integrates the same product along the diagonal, and separable terms
/// collapse to P_s(x) P_t(y)/(sum h)^2.
pub fn expected_periodogram(
    hg: &Hypergroup,
    mu2: &BiMeasure,
    n: usize,
    xs: &[f64],
    ys: &[f64],
) -> Result<Grid2> {
    let sys = hg.sys();
    let h = hg.haar_weights(n);
    let total: f64 = h.iter().sum();
    let mut values = vec![Complex64::new(0.0, 0.0); xs.len() * ys.len()];
    // atoms
    for &(ax, ay, w) in &mu2.atoms {
        let tx: Vec<f64> = xs.iter().map(|&x| t_statistic(hg, n, ax, x)).collect();
        let ty: Vec<f64> = ys.iter().map(|&y| t_statistic(hg, n, ay, y)).collect();
        for (i, &txi) in tx.iter().enumerate() {
            for (j, &tyj) in ty.iter().enumerate() {
                values[i * ys.len() + j] += w * txi * tyj;
            }
        }
    }
    // diagonal lift
    if let Some(mu) = &mu2.diagonal {
        let (points, masses) = crate::sequences::atomize(sys, mu);
        for (&p, &m) in points.iter().zip(&masses) {
            if m == 0.0 {
                continue;
            }
            let tx: Vec<f64> = xs.iter().map(|&x| t_statistic(hg, n, p, x)).collect();
            let ty: Vec<f64> = ys.iter().map(|&y| t_statistic(hg, n, p, y)).collect();
            for (i, &txi) in tx.iter().enumerate() {
                for (j, &tyj) in ty.iter().enumerate() {
                    values[i * ys.len() + j] += Complex64::new(m * txi * tyj, 0.0);
                }
            }
        }
    }
    // separable density terms
    for &(s, t, coef) in &mu2.separable {
        if s > n || t > n {
            continue;
        }
        let scale = coef / (total * total) * h[s] * h[t];
        for (i, &x) in xs.iter().enumerate() {
            let px = sys.evaluate(s, x);
            for (j, &y) in ys.iter().enumerate() {
                values[i * ys.len() + j] +=
                    Complex64::new(scale * px * sys.evaluate(t, y), 0.0);
            }
        }
    }
    Ok(Grid2 { xs: xs.to_vec(), ys: ys.to_vec(), values })
}

/// Truncation weights of the density estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorWeights {
    /// a_{N,s} = 1 - s/(N+1).
    Fejer,
    /// a_{N,s} = 1 (raw partial sums).
    Partial,
}

/// Spectral density estimate f-hat(x) = sum_{s<=N} a_{N,s} d-hat(s) P_s(x)
/// h(s) on the grid; negative excursions are reported as-is, never clipped.
pub fn density_estimate(
    hg: &Hypergroup,
    d_hat: &[f64],
    weights: EstimatorWeights,
    n: usize,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if d_hat.len() < n + 1 {
        return Err(Error::IndexOutOfRange { needed: n, len: d_hat.len() });
    }
    let sys = hg.sys();
    let h = hg.haar_weights(n);
    Ok(grid
        .iter()
        .map(|&x| {
            let row = sys.eval_row(n, x);
            (0..=n)
                .map(|s| {
                    let a = match weights {
                        EstimatorWeights::Fejer => 1.0 - s as f64 / (n as f64 + 1.0),
                        EstimatorWeights::Partial => 1.0,
                    };
                    a * d_hat[s] * row[s] * h[s]
                })
                .sum()
        })
        .collect())
}

/// Ensemble covariance estimator: d-hat(k) is the average of X_k conj(X_0)
/// across independent paths; unbiased for E(X_k conj(X_0)).
pub fn ensemble_covariance(paths: &[Path], n_max: usize) -> Result<Vec<Complex64>> {
    if paths.is_empty() {
        return Err(Error::Invalid("ensemble covariance needs at least one path".into()));
    }
    for p in paths {
        if p.len() < n_max + 1 {
            return Err(Error::IndexOutOfRange { needed: n_max, len: p.len() });
        }
    }
    let mut d = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for p in paths {
        let x0 = p.values[0].conj();
        for (k, slot) in d.iter_mut().enumerate() {
            *slot += p.values[k] * x0;
        }
    }
    let m = paths.len() as f64;
    d.iter_mut().for_each(|v| *v /= m);
    Ok(d)
}
