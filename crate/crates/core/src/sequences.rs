//! Simulation of random sequences whose covariance is a target kernel:
//! white noise, finite moving averages, harmonic sequences with correlated
//! amplitudes, averaged classical processes, density-estimation coefficient
//! sequences and radial tree sequences.
//!
//! All generators are deterministic functions of (seed, parameters); equal
//! inputs reproduce byte-identical paths.

use crate::error::{Error, Result};
use crate::hyperconv::Hypergroup;
use crate::linalg::SymMatrix;
use crate::measures::SpectralMeasure;
use crate::polysys::PolynomialSystem;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A simulated sequence X_0..X_N with its generator metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub values: Vec<Complex64>,
    pub seed: u64,
    pub tag: String,
}

impl Path {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Deterministic standard-normal stream: ChaCha8 keyed by the seed with a
/// Box-Muller transform, independent of distribution-crate internals.
pub struct GaussStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    fn uniform(&mut self) -> f64 {
        // (0, 1]: never zero, so the log below is finite
        ((self.rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_gauss(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u = self.uniform();
        let v = self.uniform();
        let r = (-2.0 * u.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * v).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// White noise: independent centered Gaussians with Var Z_n = g(n,n,0)
/// = 1/h(n).
pub fn white_noise(hg: &Hypergroup, n_max: usize, seed: u64) -> Path {
    let mut g = GaussStream::new(seed);
    let lh = hg.haar_log_weights(n_max);
    let values = (0..=n_max)
        .map(|n| Complex64::new(g.next_gauss() * (-0.5 * lh[n]).exp(), 0.0))
        .collect();
    Path { values, seed, tag: "white_noise".into() }
}

/// Finite moving average X_n = sum_{k<=q} a_k h(k) sum_s g(n,k,s) Z_s over
/// the white noise of the same seed.
pub fn ma_sequence(hg: &Hypergroup, coeffs: &[f64], n_max: usize, seed: u64) -> Result<Path> {
    if coeffs.is_empty() {
        return Err(Error::Invalid("moving average needs at least a_0".into()));
    }
    let q = coeffs.len() - 1;
    let z = white_noise(hg, n_max + q, seed);
    let h = hg.haar_weights(q);
    let mut values = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &ak) in coeffs.iter().enumerate() {
            let row = hg.linearize(n, k)?;
            for (s, g) in row.iter() {
                acc += z.values[s] * (ak * h[k] * g);
            }
        }
        values.push(acc);
    }
    Ok(Path { values, seed, tag: format!("ma({})", q) })
}

/// Harmonic sequence X_n = sum_k P_n(x_k) A_k with correlated real Gaussian
/// amplitudes of covariance `cov` (row-major, symmetric PSD).
pub fn harmonic_sequence(
    sys: &PolynomialSystem,
    points: &[f64],
    cov: &SymMatrix,
    n_max: usize,
    seed: u64,
) -> Result<Path> {
    let s = points.len();
    if cov.n != s {
        return Err(Error::Invalid("amplitude covariance must match the atom count".into()));
    }
    // lower Cholesky with PSD clamping for exactly-singular covariances
    let mut chol = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..=i {
            let mut acc = cov.get(i, j);
            for k in 0..j {
                acc -= chol[i * s + k] * chol[j * s + k];
            }
            if i == j {
                if acc < -1e-10 * cov.max_abs().max(1.0) {
                    return Err(Error::Invalid("amplitude covariance not PSD".into()));
                }
                chol[i * s + i] = acc.max(0.0).sqrt();
            } else {
                chol[i * s + j] = if chol[j * s + j] > 0.0 { acc / chol[j * s + j] } else { 0.0 };
            }
        }
    }
    let mut g = GaussStream::new(seed);
    let raw: Vec<f64> = (0..s).map(|_| g.next_gauss()).collect();
    let amps: Vec<f64> =
        (0..s).map(|i| (0..=i).map(|k| chol[i * s + k] * raw[k]).sum()).collect();
    let values = (0..=n_max)
        .map(|n| {
            let v: f64 = points.iter().zip(&amps).map(|(&x, &a)| sys.evaluate(n, x) * a).sum();
            Complex64::new(v, 0.0)
        })
        .collect();
    Ok(Path { values, seed, tag: "harmonic".into() })
}

/// The two-atom harmonic sequence used by the periodogram demonstration:
/// independent unit amplitudes at -1/3 and 1/2 on the first-kind system.
pub fn harmonic_demo(sys: &PolynomialSystem, n_max: usize, seed: u64) -> Path {
    harmonic_sequence(sys, &[-1.0 / 3.0, 0.5], &SymMatrix::identity(2), n_max, seed)
        .expect("demo configuration is valid")
}

/// A two-sided classical path Y_{-n}..Y_n.
#[derive(Debug, Clone)]
pub struct ClassicalPath {
    /// `values[i]` holds Y_{i - half} for i = 0..=2*half.
    pub values: Vec<Complex64>,
    pub half: usize,
}

impl ClassicalPath {
    pub fn get(&self, idx: isize) -> Complex64 {
        self.values[(idx + self.half as isize) as usize]
    }

    /// Classical i.i.d. N(0,1) white noise on -half..=half.
    pub fn white_noise(half: usize, seed: u64) -> Self {
        let mut g = GaussStream::new(seed);
        let values = (0..=2 * half).map(|_| Complex64::new(g.next_gauss(), 0.0)).collect();
        Self { values, half }
    }

    /// Deterministic complex exponential Y_k = e^{i k theta}.
    pub fn exponential(half: usize, theta: f64) -> Self {
        let values = (0..=2 * half)
            .map(|i| {
                let k = i as isize - half as isize;
                Complex64::from_polar(1.0, k as f64 * theta)
            })
            .collect();
        Self { values, half }
    }
}

/// Averaging mode turning a classical two-sided process into a hypergroup
/// stationary sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMode {
    /// X_n = (1/(n+1)) sum_{k=0}^n Y_{n-2k} (second-kind weights).
    ChebU,
    /// U_n = (Y_n + Y_{-n})/2 (real parts; first-kind weights).
    ChebT,
    /// X_n = (Y_{n+1} - Y_{-n})/(2n+1) (stationary increments,
    /// Jacobi(1/2,-1/2) weights).
    JacobiHalfMinusHalf,
}

/// Applies the trigonometric averaging weights of the chosen mode.
pub fn average_classical(y: &ClassicalPath, mode: AverageMode) -> Result<Path> {
    let half = y.half as isize;
    let n_max = match mode {
        AverageMode::ChebU | AverageMode::ChebT => y.half,
        AverageMode::JacobiHalfMinusHalf => y.half.saturating_sub(1),
    };
    let mut values = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max as isize {
        let v = match mode {
            AverageMode::ChebU => {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..=n {
                    acc += y.get(n - 2 * k);
                }
                acc / (n + 1) as f64
            }
            AverageMode::ChebT => (y.get(n) + y.get(-n)) * 0.5,
            AverageMode::JacobiHalfMinusHalf => {
                if n + 1 > half {
                    return Err(Error::IndexOutOfRange {
                        needed: (n + 1) as usize,
                        len: y.half,
                    });
                }
                (y.get(n + 1) - y.get(-n)) / (2 * n + 1) as f64
            }
        };
        values.push(v);
    }
    Ok(Path { values, seed: 0, tag: format!("average({mode:?})") })
}

/// Coefficient sequence C_k = (1/N) sum_j P_k(X_j) of a random orthogonal
/// expansion over the sample batch.
pub fn density_coefficients(samples: &[f64], sys: &PolynomialSystem, k_max: usize) -> Vec<f64> {
    let mut c = vec![0.0; k_max + 1];
    for &x in samples {
        let row = sys.eval_row(k_max, x);
        for (k, slot) in c.iter_mut().enumerate() {
            *slot += row[k];
        }
    }
    let n = samples.len().max(1) as f64;
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Inverse-CDF sampler for a density f against the first-kind measure pi:
/// in the angle variable t the target density is f(cos t)/pi on [0, pi].
pub fn sample_chebyshev_density<F: Fn(f64) -> f64>(
    f: F,
    count: usize,
    seed: u64,
) -> Vec<f64> {
    let grid = 8192usize;
    let mut cdf = Vec::with_capacity(grid + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for i in 0..grid {
        let t = (i as f64 + 0.5) * std::f64::consts::PI / grid as f64;
        acc += f(t.cos()).max(0.0);
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64 * total;
            let mut lo = 0usize;
            let mut hi = grid;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if cdf[mid] < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let frac = if cdf[hi] > cdf[lo] { (u - cdf[lo]) / (cdf[hi] - cdf[lo]) } else { 0.5 };
            let t = (lo as f64 + frac) * std::f64::consts::PI / grid as f64;
            t.cos()
        })
        .collect()
}

/// Truncated process: zero outside the kept index set. The result is
/// harmonizable with the separable density
/// sum_{s,t in A} d(s,t) h(s) h(t) P_s(x) P_t(y) against pi x pi.
pub fn truncate_path(path: &Path, keep: &[usize]) -> Path {
    let values = path
        .values
        .iter()
        .enumerate()
        .map(|(n, &v)| if keep.contains(&n) { v } else { Complex64::new(0.0, 0.0) })
        .collect();
    Path { values, seed: path.seed, tag: format!("truncated({})", path.tag) }
}

/// Radial tree sequence: the spectral measure is atomized on its own
/// quadrature (masses = weights x density, plus the atoms) and realized as
/// a harmonic sequence with independent amplitudes of those variances.
pub fn radial_tree_sequence(
    hg: &Hypergroup,
    mu: &SpectralMeasure,
    n_max: usize,
    seed: u64,
) -> Result<Path> {
    let sys = hg.sys();
    let (points, masses) = atomize(sys, mu);
    let s = points.len();
    let mut cov = SymMatrix::zeros(s);
    for i in 0..s {
        cov.set(i, i, masses[i]);
    }
    let mut p = harmonic_sequence(sys, &points, &cov, n_max, seed)?;
    p.tag = "radial_tree".into();
    Ok(p)
}

/// Spectral atomization: quadrature nodes weighted by the density plus the
/// explicit atoms. The covariance error of the simulation is exactly the
/// quadrature error of int P_n P_m dmu.
pub fn atomize(sys: &PolynomialSystem, mu: &SpectralMeasure) -> (Vec<f64>, Vec<f64>) {
    let mut points = Vec::new();
    let mut masses = Vec::new();
    for &(x, m) in &mu.atoms {
        points.push(x);
        masses.push(m);
    }
    if let Some(f) = &mu.density_pi {
        let rule = crate::measures::GaussRule::for_pi(sys, 2 * mu.n_max() + 32);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            points.push(x);
            masses.push(w * f.eval(sys, x));
        }
    }
    if let Some(f) = &mu.density_dx {
        let (lo, hi) = sys.supp_pi();
        let rule = crate::measures::GaussRule::legendre(lo, hi, 2 * mu.n_max() + 32);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            points.push(x);
            masses.push(w * f.eval(x));
        }
    }
    (points, masses)
}
