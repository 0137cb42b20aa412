//! Spectral measures on the dual space and bimeasures on its square:
//! atoms, densities against pi, quadrature, moments and the
//! Kolmogorov-Szego integral.

use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, sym_tridiag_eigenvalues, SymMatrix};
use crate::polysys::{Family, PolynomialSystem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss rule with respect to the orthogonalization measure pi of a system.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// m-point rule for the system's pi, via the Jacobi matrix of the
    /// x-form recurrence (Golub-Welsch nodes, Christoffel-function weights).
    /// Chebyshev (first kind) gets its closed-form rule.
    pub fn for_pi(sys: &PolynomialSystem, m: usize) -> Self {
        assert!(m >= 1);
        if matches!(sys.family(), Some(Family::ChebyshevFirst)) {
            let nodes: Vec<f64> =
                (0..m).map(|i| ((2 * i + 1) as f64 * PI / (2 * m) as f64).cos()).collect();
            return Self { nodes, weights: vec![1.0 / m as f64; m] };
        }
        let mut diag = Vec::with_capacity(m);
        let mut off = Vec::with_capacity(m.saturating_sub(1));
        for k in 0..m {
            let (_, b, _) = sys.x_recurrence(k);
            diag.push(b);
            if k + 1 < m {
                let (a_k, _, _) = sys.x_recurrence(k);
                let (_, _, c_k1) = sys.x_recurrence(k + 1);
                off.push((a_k * c_k1).sqrt());
            }
        }
        let nodes = sym_tridiag_eigenvalues(&diag, &off);
        // w_i = 1 / sum_k p_k(x_i)^2 with p_k orthonormal, p_0 = 1
        let weights = nodes
            .iter()
            .map(|&x| {
                let mut sum = 0.0;
                let mut pm1 = 0.0f64;
                let mut p = 1.0f64;
                for k in 0..m {
                    sum += p * p;
                    let e_k = {
                        let (a_k, _, _) = sys.x_recurrence(k);
                        let (_, _, c_k1) = sys.x_recurrence(k + 1);
                        (a_k * c_k1).sqrt()
                    };
                    let (_, b_k, _) = sys.x_recurrence(k);
                    let e_km1 = if k == 0 {
                        0.0
                    } else {
                        let (a, _, _) = sys.x_recurrence(k - 1);
                        let (_, _, c) = sys.x_recurrence(k);
                        (a * c).sqrt()
                    };
                    let next = ((x - b_k) * p - e_km1 * pm1) / e_k;
                    pm1 = p;
                    p = next;
                }
                1.0 / sum
            })
            .collect();
        Self { nodes, weights }
    }

    /// m-point Gauss-Legendre rule on [lo, hi], normalized to weight function
    /// dx (weights sum to hi - lo).
    pub fn legendre(lo: f64, hi: f64, m: usize) -> Self {
        let diag = vec![0.0; m];
        let off: Vec<f64> =
            (1..m).map(|k| k as f64 / ((4 * k * k - 1) as f64).sqrt()).collect();
        let nodes01 = sym_tridiag_eigenvalues(&diag, &off);
        // Christoffel weights for the orthonormal Legendre chain on [-1,1]
        // with weight dx/2; rescale to [lo,hi].
        let weights: Vec<f64> = nodes01
            .iter()
            .map(|&x| {
                let mut sum = 0.0;
                let mut pm1 = 0.0f64;
                let mut p = 1.0f64;
                for k in 0..m {
                    sum += p * p;
                    let e_k = (k + 1) as f64 / ((4 * (k + 1) * (k + 1) - 1) as f64).sqrt();
                    let e_km1 = if k == 0 {
                        0.0
                    } else {
                        k as f64 / ((4 * k * k - 1) as f64).sqrt()
                    };
                    let next = (x * p - e_km1 * pm1) / e_k;
                    pm1 = p;
                    p = next;
                }
                1.0 / sum
            })
            .collect();
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Self {
            nodes: nodes01.iter().map(|&x| mid + half * x).collect(),
            weights: weights.iter().map(|&w| w * (hi - lo)).collect(),
        }
    }
}

/// Density against pi, in the shapes the artifact needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityVsPi {
    /// f(x) = c.
    Const { c: f64 },
    /// f(x) = sum_i `params[i]` x^i.
    PolyX { coeffs: Vec<f64> },
    /// f(x) = sum_k `coeffs[k]` P_k(x).
    PolyP { coeffs: Vec<f64> },
    /// f(x) = |sum_k `coeffs[k]` P_k(x)|^2  (moving-average spectral density).
    MaSquared { coeffs: Vec<f64> },
}

impl DensityVsPi {
    pub fn eval(&self, sys: &PolynomialSystem, x: f64) -> f64 {
        match self {
            DensityVsPi::Const { c } => *c,
            DensityVsPi::PolyX { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
            }
            DensityVsPi::PolyP { coeffs } => {
                let row = sys.eval_row(coeffs.len().saturating_sub(1), x);
                coeffs.iter().zip(&row).map(|(c, p)| c * p).sum()
            }
            DensityVsPi::MaSquared { coeffs } => {
                let row = sys.eval_row(coeffs.len().saturating_sub(1), x);
                let s: f64 = coeffs.iter().zip(&row).map(|(c, p)| c * p).sum();
                s * s
            }
        }
    }

    /// Polynomial degree of the density (for quadrature sizing).
    pub fn degree(&self) -> usize {
        match self {
            DensityVsPi::Const { .. } => 0,
            DensityVsPi::PolyX { coeffs } => coeffs.len().saturating_sub(1),
            DensityVsPi::PolyP { coeffs } => coeffs.len().saturating_sub(1),
            DensityVsPi::MaSquared { coeffs } => 2 * coeffs.len().saturating_sub(1),
        }
    }
}

/// Plain Lebesgue density component (polynomial in x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityVsDx {
    pub coeffs: Vec<f64>,
}

impl DensityVsDx {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// A positive measure on the dual space D_s: atoms plus densities against pi
/// and against dx, with the quadrature rules fixed at construction.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub density_pi: Option<DensityVsPi>,
    pub density_dx: Option<DensityVsDx>,
    rule_pi: Option<GaussRule>,
    rule_dx: Option<GaussRule>,
    n_max: usize,
}

impl SpectralMeasure {
    /// General constructor. `n_max` is the highest moment index the measure
    /// is expected to resolve; the quadrature uses 2*n_max + 32 nodes.
    pub fn new(
        sys: &PolynomialSystem,
        atoms: Vec<(f64, f64)>,
        density_pi: Option<DensityVsPi>,
        density_dx: Option<DensityVsDx>,
        n_max: usize,
    ) -> Result<Self> {
        let (lo, hi) = sys.support();
        for &(x, mass) in &atoms {
            if !(mass >= 0.0) || !x.is_finite() {
                return Err(Error::Invalid(format!("atom ({x},{mass}) invalid")));
            }
            if x < lo - 1e-12 || x > hi + 1e-12 {
                return Err(Error::Invalid(format!("atom at {x} outside the dual space")));
            }
        }
        let m = 2 * n_max + 32;
        let rule_pi = density_pi.as_ref().map(|_| GaussRule::for_pi(sys, m));
        let rule_dx = density_dx.as_ref().map(|_| {
            let (plo, phi) = sys.supp_pi();
            GaussRule::legendre(plo, phi, m)
        });
        let measure = Self { atoms, density_pi, density_dx, rule_pi, rule_dx, n_max };
        let mass = measure.total_mass(sys);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Invalid(format!("total mass {mass} must be finite and positive")));
        }
        Ok(measure)
    }

    /// The orthogonalization measure pi itself.
    pub fn plancherel(sys: &PolynomialSystem, n_max: usize) -> Self {
        Self::new(sys, Vec::new(), Some(DensityVsPi::Const { c: 1.0 }), None, n_max)
            .expect("pi is a valid measure")
    }

    /// A single point mass.
    pub fn point_mass(sys: &PolynomialSystem, x: f64, mass: f64, n_max: usize) -> Result<Self> {
        Self::new(sys, vec![(x, mass)], None, None, n_max)
    }

    /// The MA spectral measure |a-hat|^2 pi with absorbed coefficients.
    pub fn ma_squared(sys: &PolynomialSystem, coeffs: &[f64], n_max: usize) -> Result<Self> {
        Self::new(sys, Vec::new(), Some(DensityVsPi::MaSquared { coeffs: coeffs.to_vec() }), None, n_max)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn is_purely_atomic(&self) -> bool {
        self.density_pi.is_none() && self.density_dx.is_none()
    }

    pub fn total_mass(&self, sys: &PolynomialSystem) -> f64 {
        let mut mass: f64 = self.atoms.iter().map(|&(_, m)| m).sum();
        if let (Some(f), Some(rule)) = (&self.density_pi, &self.rule_pi) {
            mass += rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * f.eval(sys, x))
                .sum::<f64>();
        }
        if let (Some(f), Some(rule)) = (&self.density_dx, &self.rule_dx) {
            mass += rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * f.eval(x)).sum::<f64>();
        }
        mass
    }

    /// d(n) = integral of P_n against the measure.
    pub fn moment(&self, sys: &PolynomialSystem, n: usize) -> Result<f64> {
        if n > self.n_max {
            return Err(Error::QuadratureUnderresolved { order: self.n_max, needed: n });
        }
        let mut d: f64 = self.atoms.iter().map(|&(x, m)| m * sys.evaluate(n, x)).sum();
        if let (Some(f), Some(rule)) = (&self.density_pi, &self.rule_pi) {
            d += rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * f.eval(sys, x) * sys.evaluate(n, x))
                .sum::<f64>();
        }
        if let (Some(f), Some(rule)) = (&self.density_dx, &self.rule_dx) {
            d += rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * f.eval(x) * sys.evaluate(n, x))
                .sum::<f64>();
        }
        Ok(d)
    }

    /// d(0) .. d(count-1), evaluating the polynomial rows once per node.
    pub fn moments(&self, sys: &PolynomialSystem, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let n = count - 1;
        if n > self.n_max {
            return Err(Error::QuadratureUnderresolved { order: self.n_max, needed: n });
        }
        let mut d = vec![0.0; count];
        for &(x, m) in &self.atoms {
            let row = sys.eval_row(n, x);
            for k in 0..count {
                d[k] += m * row[k];
            }
        }
        if let (Some(f), Some(rule)) = (&self.density_pi, &self.rule_pi) {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let fw = w * f.eval(sys, x);
                let row = sys.eval_row(n, x);
                for k in 0..count {
                    d[k] += fw * row[k];
                }
            }
        }
        if let (Some(f), Some(rule)) = (&self.density_dx, &self.rule_dx) {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let fw = w * f.eval(x);
                let row = sys.eval_row(n, x);
                for k in 0..count {
                    d[k] += fw * row[k];
                }
            }
        }
        Ok(d)
    }

    /// Integral of P_n P_m against the measure (used by diagonal-lifted
    /// bimeasures).
    pub fn product_moment(&self, sys: &PolynomialSystem, n: usize, m: usize) -> Result<f64> {
        if n + m > 2 * self.n_max + 1 {
            return Err(Error::QuadratureUnderresolved { order: self.n_max, needed: n + m });
        }
        let deg = n.max(m);
        let mut d: f64 = self
            .atoms
            .iter()
            .map(|&(x, mass)| {
                let row = sys.eval_row(deg, x);
                mass * row[n] * row[m]
            })
            .sum();
        if let (Some(f), Some(rule)) = (&self.density_pi, &self.rule_pi) {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let row = sys.eval_row(deg, x);
                d += w * f.eval(sys, x) * row[n] * row[m];
            }
        }
        if let (Some(f), Some(rule)) = (&self.density_dx, &self.rule_dx) {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let row = sys.eval_row(deg, x);
                d += w * f.eval(x) * row[n] * row[m];
            }
        }
        Ok(d)
    }

    /// Lebesgue density mu'(x) of the continuous parts.
    fn lebesgue_density(&self, sys: &PolynomialSystem, x: f64) -> Result<f64> {
        let mut v = 0.0;
        if let Some(f) = &self.density_pi {
            v += f.eval(sys, x) * sys.pi_lebesgue_density(x)?;
        }
        if let Some(f) = &self.density_dx {
            v += f.eval(x);
        }
        Ok(v)
    }

    /// Evaluates the Kolmogorov-Szego integral
    /// `int_{-1}^{1} ln(mu'(x)) / sqrt(1 - x^2) dx` through the x = cos t
    /// substitution on a uniform t-grid. Atoms are excluded by definition
    /// (they belong to the singular part). The flag reports divergence:
    /// truncated value below -1e3, or a vanishing density on more than 1% of
    /// the grid, or no density at all.
    pub fn kolmogorov_szego_integral(&self, sys: &PolynomialSystem) -> Result<(f64, bool)> {
        if self.is_purely_atomic() {
            return Ok((f64::NEG_INFINITY, true));
        }
        let (lo, hi) = sys.support();
        if lo < -1.0 - 1e-9 || hi > 1.0 + 1e-9 {
            return Err(Error::Invalid("Kolmogorov-Szego integral needs D_s within [-1,1]".into()));
        }
        let m = 4001usize;
        let mut vanishing = 0usize;
        let mut acc = 0.0;
        for i in 0..m {
            let t = (i as f64 + 0.5) * PI / m as f64;
            let x = t.cos();
            let v = self.lebesgue_density(sys, x)?;
            if v < 1e-300 {
                vanishing += 1;
            } else {
                acc += v.ln();
            }
        }
        let value = acc * PI / m as f64;
        let diverged = vanishing * 100 > m || value < -1e3;
        let value = if vanishing > 0 { f64::NEG_INFINITY } else { value };
        Ok((value, diverged))
    }
}

/// Complex measure on D_s x D_s for harmonizable kernels: weighted atoms,
/// an optional diagonal lift of a SpectralMeasure, and an optional separable
/// density sum_j coef_j P_s(x) P_t(y) d pi d pi.
#[derive(Debug, Clone)]
pub struct BiMeasure {
    pub atoms: Vec<(f64, f64, Complex64)>,
    pub diagonal: Option<SpectralMeasure>,
    /// (s, t, coef) terms of a density against pi x pi.
    pub separable: Vec<(usize, usize, f64)>,
}

impl BiMeasure {
    /// Atomic bimeasure; hermitian symmetry w(x,y) = conj(w(y,x)) is checked
    /// at construction.
    pub fn from_atoms(atoms: Vec<(f64, f64, Complex64)>) -> Result<Self> {
        let bi = Self { atoms, diagonal: None, separable: Vec::new() };
        bi.check_hermitian()?;
        Ok(bi)
    }

    /// Rank-one atomic measure sum v_i conj(v_j) delta_{(x_i, x_j)}; always
    /// hermitian and positive semidefinite.
    pub fn rank_one(points: &[(f64, Complex64)]) -> Self {
        let mut atoms = Vec::with_capacity(points.len() * points.len());
        for &(x, vx) in points {
            for &(y, vy) in points {
                atoms.push((x, y, vx * vy.conj()));
            }
        }
        Self { atoms, diagonal: None, separable: Vec::new() }
    }

    /// Atoms (x_k, x_l, sigma_kl) from amplitude locations and a hermitian
    /// amplitude covariance in row-major order.
    pub fn from_amplitude_covariance(points: &[f64], cov: &[Complex64]) -> Result<Self> {
        let s = points.len();
        if cov.len() != s * s {
            return Err(Error::Invalid("covariance must be s x s".into()));
        }
        let mut atoms = Vec::with_capacity(s * s);
        for k in 0..s {
            for l in 0..s {
                atoms.push((points[k], points[l], cov[k * s + l]));
            }
        }
        Self::from_atoms(atoms)
    }

    /// Diagonal lift of a positive measure (the stationary case).
    pub fn diagonal_lift(mu: SpectralMeasure) -> Self {
        Self { atoms: Vec::new(), diagonal: Some(mu), separable: Vec::new() }
    }

    /// Separable density against pi x pi given by its (s, t, coef) terms;
    /// hermitian requires coef(s,t) = coef(t,s) for real terms.
    pub fn separable(terms: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(s, t, c) in &terms {
            let sym = terms
                .iter()
                .find(|&&(s2, t2, _)| s2 == t && t2 == s)
                .map(|&(_, _, c2)| c2)
                .unwrap_or(0.0);
            if (c - sym).abs() > 1e-12 * (1.0 + c.abs()) {
                return Err(Error::Invalid(format!(
                    "separable term ({s},{t}) breaks hermitian symmetry"
                )));
            }
        }
        Ok(Self { atoms: Vec::new(), diagonal: None, separable: terms })
    }

    fn check_hermitian(&self) -> Result<()> {
        for &(x, y, w) in &self.atoms {
            let mut mirror = Complex64::new(0.0, 0.0);
            for &(x2, y2, w2) in &self.atoms {
                if (x2 - y).abs() < 1e-14 && (y2 - x).abs() < 1e-14 {
                    mirror += w2;
                }
            }
            if (mirror.conj() - w).norm() > 1e-10 * (1.0 + w.norm()) {
                return Err(Error::Invalid(format!(
                    "hermitian symmetry fails at atom ({x},{y}): {w} vs conj {mirror}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_atomic(&self) -> bool {
        self.diagonal.as_ref().map(|d| d.is_purely_atomic()).unwrap_or(true)
            && self.separable.is_empty()
    }

    /// All atoms, with a diagonal atomic part folded in.
    pub fn all_atoms(&self) -> Result<Vec<(f64, f64, Complex64)>> {
        if !self.is_atomic() {
            return Err(Error::NonAtomicUnsupported);
        }
        let mut atoms = self.atoms.clone();
        if let Some(d) = &self.diagonal {
            for &(x, m) in &d.atoms {
                atoms.push((x, x, Complex64::new(m, 0.0)));
            }
        }
        Ok(atoms)
    }

    /// Positive semidefiniteness of the atom-weight matrix over the distinct
    /// support points (Loeve condition b), within `tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let mut points: Vec<f64> = Vec::new();
        for &(x, y, _) in &self.atoms {
            for v in [x, y] {
                if !points.iter().any(|&p| (p - v).abs() < 1e-13) {
                    points.push(v);
                }
            }
        }
        if points.is_empty() {
            return true;
        }
        let s = points.len();
        // the checked hermitian structure makes the weight matrix symmetric
        // when the weights are real; complex weights are handled through the
        // real embedding [[Re, -Im], [Im, Re]].
        let mut m = SymMatrix::zeros(2 * s);
        for &(x, y, w) in &self.atoms {
            let i = points.iter().position(|&p| (p - x).abs() < 1e-13).unwrap();
            let j = points.iter().position(|&p| (p - y).abs() < 1e-13).unwrap();
            m.set(i, j, m.get(i, j) + w.re);
            m.set(s + i, s + j, m.get(s + i, s + j) + w.re);
            m.set(i, s + j, m.get(i, s + j) - w.im);
            m.set(s + i, j, m.get(s + i, j) + w.im);
        }
        let eig = sym_eigenvalues(&m);
        let scale = eig.iter().fold(1.0f64, |a, &v| a.max(v.abs()));
        eig[0] >= -tol * scale
    }

    /// Total mass of |atoms| (diagnostic).
    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, _, w)| w.norm()).sum()
    }

    /// Bimoment: integral of P_n(x) P_m(y) against the bimeasure.
    pub fn bimoment(&self, sys: &PolynomialSystem, n: usize, m: usize) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(x, y, w) in &self.atoms {
            acc += w * sys.evaluate(n, x) * sys.evaluate(m, y);
        }
        if let Some(d) = &self.diagonal {
            acc += Complex64::new(d.product_moment(sys, n, m)?, 0.0);
        }
        for &(s, t, coef) in &self.separable {
            if s == n && t == m {
                // int P_n P_s dpi = delta / h(n); fold both factors
                let hn = haar_value(sys, n);
                let hm = haar_value(sys, m);
                acc += Complex64::new(coef / (hn * hm), 0.0);
            }
        }
        Ok(acc)
    }
}

fn haar_value(sys: &PolynomialSystem, n: usize) -> f64 {
    let mut h = 1.0;
    for k in 1..=n {
        let (a_prev, _, _) = sys.recurrence(k - 1);
        let (_, _, c_k) = sys.recurrence(k);
        h = if k == 1 { 1.0 / c_k } else { h * a_prev / c_k };
    }
    h
}

/// JSON-facing descriptor for a spectral measure, per the CLI config schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub density: Option<DensityVsPi>,
    #[serde(default)]
    pub density_dx: Option<DensityVsDx>,
    #[serde(default)]
    pub quad: Option<QuadSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomSpec {
    pub x: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadSpec {
    pub n: usize,
}

impl MeasureSpec {
    pub fn build(&self, sys: &PolynomialSystem, n_max: usize) -> Result<SpectralMeasure> {
        let n_max = self.quad.as_ref().map(|q| q.n).unwrap_or(n_max);
        SpectralMeasure::new(
            sys,
            self.atoms.iter().map(|a| (a.x, a.mass)).collect(),
            self.density.clone(),
            self.density_dx.clone(),
            n_max,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::Family;

    fn sys(f: Family) -> PolynomialSystem {
        PolynomialSystem::from_family(f).unwrap()
    }

    #[test]
    fn gauss_rule_integrates_pi_exactly() {
        // orthogonality: int P_n P_m dpi = delta_nm / h(n)
        for f in [
            Family::ChebyshevFirst,
            Family::ChebyshevSecond,
            Family::Jacobi { alpha: 1.0, beta: 0.25 },
            Family::CartierDunau { q: 2 },
            Family::BernsteinSzego { nu: 0.2, kappa: 0.3 },
        ] {
            let s = sys(f);
            let hg = crate::hyperconv::Hypergroup::new(s.clone());
            let rule = GaussRule::for_pi(&s, 48);
            let hw = hg.haar_weights(32);
            for n in (0..=32).step_by(4) {
                for m in (0..=32).step_by(8) {
                    let acc: f64 = rule
                        .nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(&x, &w)| {
                            let row = s.eval_row(n.max(m), x);
                            w * row[n] * row[m]
                        })
                        .sum();
                    let want = if n == m { 1.0 / hw[n] } else { 0.0 };
                    assert!(
                        (acc - want).abs() < 1e-9,
                        "{:?} ({n},{m}): {acc} vs {want}",
                        s
                    );
                }
            }
        }
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = GaussRule::legendre(-1.0, 1.0, 16);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-12);
        // int x^4 dx over [-1,1] = 2/5
        let acc: f64 = rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * x.powi(4)).sum();
        assert!((acc - 0.4).abs() < 1e-12);
    }

    #[test]
    fn moments_of_pi_vanish() {
        let t = sys(Family::ChebyshevFirst);
        let mu = SpectralMeasure::plancherel(&t, 16);
        let d = mu.moments(&t, 17).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-13);
        for k in 1..17 {
            assert!(d[k].abs() < 1e-13, "d({k}) = {}", d[k]);
        }
    }

    #[test]
    fn point_mass_moments_are_point_evaluations() {
        let u = sys(Family::ChebyshevSecond);
        let mu = SpectralMeasure::point_mass(&u, 0.4, 1.0, 10).unwrap();
        for n in 0..=10 {
            assert!((mu.moment(&u, n).unwrap() - u.evaluate(n, 0.4)).abs() < 1e-14);
        }
        assert!(matches!(mu.moment(&u, 11), Err(Error::QuadratureUnderresolved { .. })));
    }

    #[test]
    fn ma1_spectral_moment_matches_quadrature_oracle() {
        // mu = (1+x)^2 pi for the second-kind system; oracle: plain sum over
        // a finer independent rule
        let u = sys(Family::ChebyshevSecond);
        let mu = SpectralMeasure::ma_squared(&u, &[1.0, 1.0], 12).unwrap();
        let fine = GaussRule::for_pi(&u, 200);
        for n in 0..=6 {
            let want: f64 = fine
                .nodes
                .iter()
                .zip(&fine.weights)
                .map(|(&x, &w)| w * (1.0 + x) * (1.0 + x) * u.evaluate(n, x))
                .sum();
            assert!((mu.moment(&u, n).unwrap() - want).abs() < 1e-11);
        }
    }

    #[test]
    fn moment_sequences_are_positive_definite() {
        let t = sys(Family::ChebyshevFirst);
        let hg = crate::hyperconv::Hypergroup::new(t.clone());
        let mu = SpectralMeasure::new(
            &t,
            vec![(0.2, 0.3), (-0.7, 0.1)],
            Some(DensityVsPi::PolyX { coeffs: vec![0.5, 0.25] }),
            None,
            40,
        )
        .unwrap();
        let d = mu.moments(&t, 33).unwrap();
        let (ok, margin) = hg.is_positive_definite(&d, 16, 1e-10).unwrap();
        assert!(ok, "margin {margin}");
    }

    #[test]
    fn ks_integral_chebyshev_pi_closed_form() {
        // int ln(1/(pi sqrt(1-x^2)))/sqrt(1-x^2) dx = pi ln(2/pi)
        let t = sys(Family::ChebyshevFirst);
        let mu = SpectralMeasure::plancherel(&t, 8);
        let (v, diverged) = mu.kolmogorov_szego_integral(&t).unwrap();
        let want = PI * (2.0 / PI).ln();
        assert!(!diverged);
        // the uniform t-grid sees the integrable log singularities at the
        // endpoints, so convergence is O(h ln h)
        assert!((v - want).abs() < 2e-3, "{v} vs {want}");
    }

    #[test]
    fn ks_integral_flags() {
        let t = sys(Family::ChebyshevFirst);
        let atom = SpectralMeasure::point_mass(&t, 0.5, 1.0, 8).unwrap();
        let (v, diverged) = atom.kolmogorov_szego_integral(&t).unwrap();
        assert!(diverged && v == f64::NEG_INFINITY);

        let u = sys(Family::ChebyshevSecond);
        let mu = SpectralMeasure::plancherel(&u, 8);
        let (_, diverged) = mu.kolmogorov_szego_integral(&u).unwrap();
        assert!(!diverged, "Jacobi(1/2,1/2) pi is in the KS class");

        // Cartier-Dunau pi vanishes on a chunk of [-1,1]: diverged
        let cd = sys(Family::CartierDunau { q: 2 });
        let mu = SpectralMeasure::plancherel(&cd, 8);
        let (_, diverged) = mu.kolmogorov_szego_integral(&cd).unwrap();
        assert!(diverged);
    }

    #[test]
    fn lebesgue_density_part_moments() {
        // d mu = dx/2 on [-1,1]: d(0) = 1, d(1) = 0, d(2) = -1/3 for the
        // first-kind system (int (2x^2 - 1)/2 dx = -1/3)
        let t = sys(Family::ChebyshevFirst);
        let mu = SpectralMeasure::new(
            &t,
            vec![],
            None,
            Some(DensityVsDx { coeffs: vec![0.5] }),
            12,
        )
        .unwrap();
        assert!((mu.total_mass(&t) - 1.0).abs() < 1e-12);
        assert!((mu.moment(&t, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(mu.moment(&t, 1).unwrap().abs() < 1e-13);
        assert!((mu.moment(&t, 2).unwrap() + 1.0 / 3.0).abs() < 1e-12);
        // its Lebesgue density is 1/2, so the KS integral is pi ln(1/2)
        let (v, diverged) = mu.kolmogorov_szego_integral(&t).unwrap();
        assert!(!diverged);
        assert!((v - PI * 0.5f64.ln()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn bimeasure_atom_and_hermitian_check() {
        let w = Complex64::new(0.5, 0.25);
        // single off-diagonal atom without its mirror is rejected
        assert!(BiMeasure::from_atoms(vec![(0.2, 0.7, w)]).is_err());
        let bi = BiMeasure::from_atoms(vec![(0.2, 0.7, w), (0.7, 0.2, w.conj())]).unwrap();
        let t = sys(Family::ChebyshevFirst);
        let got = bi.bimoment(&t, 1, 2).unwrap();
        let want = w * t.evaluate(1, 0.2) * t.evaluate(2, 0.7)
            + w.conj() * t.evaluate(1, 0.7) * t.evaluate(2, 0.2);
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn diagonal_lift_matches_translate() {
        let t = sys(Family::ChebyshevFirst);
        let hg = crate::hyperconv::Hypergroup::new(t.clone());
        let mu = SpectralMeasure::new(
            &t,
            vec![(0.3, 0.5)],
            Some(DensityVsPi::PolyX { coeffs: vec![1.0, 0.5] }),
            None,
            30,
        )
        .unwrap();
        let d = mu.moments(&t, 25).unwrap();
        let bi = BiMeasure::diagonal_lift(mu);
        for (n, m) in [(0usize, 0usize), (2, 3), (5, 7), (1, 11)] {
            let got = bi.bimoment(&t, n, m).unwrap().re;
            let want = hg.translate(&d, n, m).unwrap();
            assert!((got - want).abs() < 1e-9, "({n},{m}): {got} vs {want}");
        }
    }

    #[test]
    fn rank_one_product_measure_is_psd() {
        let c = 2.0;
        let bi = BiMeasure::rank_one(&[
            (1.0, Complex64::new(c, 0.0)),
            (-1.0, Complex64::new(1.0, 0.0)),
        ]);
        assert!(bi.is_psd(1e-10));
        // kernel values of the cyclostationary example
        let t = sys(Family::ChebyshevFirst);
        let k11 = bi.bimoment(&t, 1, 1).unwrap().re;
        assert!((k11 - (c - 1.0) * (c - 1.0)).abs() < 1e-12);
        let k01 = bi.bimoment(&t, 0, 1).unwrap().re;
        assert!((k01 - (c - 1.0) * (c + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn separable_truncated_process_bimoments() {
        // truncated stationary process on A: density sum d(s,t) h(s) h(t)
        // P_s P_t gives bimoments 1_{A x A}(n,m) d(n,m)
        let t = sys(Family::ChebyshevFirst);
        let hg = crate::hyperconv::Hypergroup::new(t.clone());
        let mu = SpectralMeasure::new(
            &t,
            vec![],
            Some(DensityVsPi::PolyX { coeffs: vec![1.0, 0.3] }),
            None,
            20,
        )
        .unwrap();
        let d = mu.moments(&t, 17).unwrap();
        let a_set = [1usize, 3, 4];
        let hw = hg.haar_weights(8);
        let mut terms = Vec::new();
        for &s in &a_set {
            for &tt in &a_set {
                let dst = hg.translate(&d, s, tt).unwrap();
                terms.push((s, tt, dst * hw[s] * hw[tt]));
            }
        }
        let bi = BiMeasure::separable(terms).unwrap();
        for n in 0..=6 {
            for m in 0..=6 {
                let got = bi.bimoment(&t, n, m).unwrap().re;
                let want = if a_set.contains(&n) && a_set.contains(&m) {
                    hg.translate(&d, n, m).unwrap()
                } else {
                    0.0
                };
                assert!((got - want).abs() < 1e-10, "({n},{m}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn measure_spec_json_round_trip() {
        let json = r#"{"atoms":[{"x":0.5,"mass":1.0}],"density":{"kind":"const","c":0.5},"quad":{"n":24}}"#;
        let spec: MeasureSpec = serde_json::from_str(json).unwrap();
        let t = sys(Family::ChebyshevFirst);
        let mu = spec.build(&t, 8).unwrap();
        assert_eq!(mu.n_max(), 24);
        assert!((mu.total_mass(&t) - 1.5).abs() < 1e-12);
        let back = serde_json::to_string(&spec).unwrap();
        assert!(back.contains("\"kind\":\"const\""));
    }

    #[test]
    fn invalid_measures_are_rejected() {
        let t = sys(Family::ChebyshevFirst);
        assert!(SpectralMeasure::new(&t, vec![(0.5, -1.0)], None, None, 4).is_err());
        assert!(SpectralMeasure::new(&t, vec![(1.5, 1.0)], None, None, 4).is_err());
        assert!(SpectralMeasure::new(&t, vec![], None, None, 4).is_err()); // zero mass
    }
}
