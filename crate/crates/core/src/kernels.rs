//! Positive-definite kernel construction and classification over a
//! polynomial hypergroup: stationary, T-cyclostationary, harmonizable,
//! M- and H-asymptotically stationary kernels, and the Wiener-type
//! statistics linking Cesaro averages to the discrete spectrum.

use crate::error::{Error, Result};
use crate::hyperconv::Hypergroup;
use crate::linalg::{pairwise_sum, sym_eigenvalues, SymMatrix};
use crate::measures::BiMeasure;
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone)]
enum Backend {
    /// Moment sequence d(k) = K(k,0) of a weakly stationary kernel.
    Stationary(Vec<f64>),
    Harmonizable(BiMeasure),
    /// Explicit hermitian table, row-major (n+1) x (n+1).
    Table { size: usize, values: Vec<Complex64> },
}

/// Covariance provider K(n,m) with one of three backends.
#[derive(Debug, Clone)]
pub struct Kernel {
    hg: Arc<Hypergroup>,
    backend: Backend,
}

/// Wiener-statistic variants of the equivalence theorem: Cesaro averages of
/// |K(k,0)|, of |K(k,0)|^2 and of the full double sum |K(k,l)|^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WienerVariant {
    AbsMean,
    SquareMean,
    DoubleSquareMean,
}

impl Kernel {
    /// Stationary backend; enforces the positive-definite-function bound
    /// |K(n,0)| <= K(0,0) over the supplied moments.
    pub fn stationary(hg: Arc<Hypergroup>, d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::Invalid("empty moment sequence".into()));
        }
        for (k, &v) in d.iter().enumerate() {
            if v.abs() > d[0] + 1e-12 * d[0].abs().max(1.0) {
                return Err(Error::Invalid(format!(
                    "|K({k},0)| = {v} exceeds K(0,0) = {}; not positive definite",
                    d[0]
                )));
            }
        }
        Ok(Self { hg, backend: Backend::Stationary(d) })
    }

    /// Harmonizable backend; the atom-weight matrix must be positive
    /// semidefinite (Loeve condition b).
    pub fn harmonizable(hg: Arc<Hypergroup>, mu2: BiMeasure) -> Result<Self> {
        if !mu2.is_psd(1e-10) {
            return Err(Error::Invalid(
                "bimeasure atom-weight matrix is not positive semidefinite".into(),
            ));
        }
        Ok(Self { hg, backend: Backend::Harmonizable(mu2) })
    }

    /// Harmonizable backend without the positive-semidefiniteness gate, for
    /// second-order diagnostics of indefinite spectral structures.
    pub fn harmonizable_unchecked(hg: Arc<Hypergroup>, mu2: BiMeasure) -> Self {
        Self { hg, backend: Backend::Harmonizable(mu2) }
    }

    /// Explicit hermitian table.
    pub fn table(hg: Arc<Hypergroup>, size: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != size * size {
            return Err(Error::Invalid("table must be square".into()));
        }
        for i in 0..size {
            for j in 0..size {
                if (values[i * size + j] - values[j * size + i].conj()).norm() > 1e-10 {
                    return Err(Error::Invalid(format!("table not hermitian at ({i},{j})")));
                }
            }
        }
        Ok(Self { hg, backend: Backend::Table { size, values } })
    }

    pub fn hypergroup(&self) -> &Hypergroup {
        &self.hg
    }

    /// Largest n such that `check_stationary(n, ..)` is computable on this
    /// backend: a table of size S holds K(k,0) only up to k = S-1, and the
    /// convolution of indices (n,m) reaches k = 2n; moment-backed kernels
    /// are bounded by their moment supply, harmonizable ones are unbounded.
    pub fn max_check_order(&self) -> Option<usize> {
        match &self.backend {
            Backend::Stationary(d) => Some((d.len() - 1) / 2),
            Backend::Harmonizable(_) => None,
            Backend::Table { size, .. } => Some((size - 1) / 2),
        }
    }

    /// Moment sequence of a stationary backend.
    pub fn moments(&self) -> Option<&[f64]> {
        match &self.backend {
            Backend::Stationary(d) => Some(d),
            _ => None,
        }
    }

    /// K(n,m).
    pub fn value(&self, n: usize, m: usize) -> Result<Complex64> {
        match &self.backend {
            Backend::Stationary(d) => Ok(Complex64::new(self.hg.translate(d, n, m)?, 0.0)),
            Backend::Harmonizable(mu2) => mu2.bimoment(self.hg.sys(), n, m),
            Backend::Table { size, values } => {
                if n >= *size || m >= *size {
                    return Err(Error::IndexOutOfRange { needed: n.max(m), len: *size });
                }
                Ok(values[n * size + m])
            }
        }
    }

    /// K(n*t, m) = sum_k g(n,t,k) K(k,m).
    pub fn translated_value(&self, n: usize, t: usize, m: usize) -> Result<Complex64> {
        let row = self.hg.linearize(n, t)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, g) in row.iter() {
            if g != 0.0 {
                acc += self.value(k, m)? * g;
            }
        }
        Ok(acc)
    }

    /// Verifies K(n,m) = sum_k g(n,m,k) K(k,0) for n,m <= N; returns the
    /// verdict, the worst residual, and where it happened.
    pub fn check_stationary(&self, n_max: usize, tol: f64) -> Result<(bool, f64, (usize, usize))> {
        let mut worst = 0.0f64;
        let mut witness = (0, 0);
        for n in 0..=n_max {
            for m in 0..=n_max {
                let direct = self.value(n, m)?;
                let row = self.hg.linearize(n, m)?;
                let mut conv = Complex64::new(0.0, 0.0);
                for (k, g) in row.iter() {
                    conv += self.value(k, 0)? * g;
                }
                let r = (direct - conv).norm();
                if r > worst {
                    worst = r;
                    witness = (n, m);
                }
            }
        }
        Ok((worst <= tol, worst, witness))
    }

    /// Verifies the defining identity K(n*T, m) = K(n, m*T) for n,m <= N.
    /// T = 1 is equivalent to stationarity.
    pub fn check_cyclostationary(&self, t: usize, n_max: usize, tol: f64) -> Result<(bool, f64)> {
        if t < 1 {
            return Err(Error::ParameterOutOfRange("period must be >= 1".into()));
        }
        let mut worst = 0.0f64;
        for n in 0..=n_max {
            for m in 0..=n_max {
                let lhs = self.translated_value(n, t, m)?;
                let rhs = self.translated_value(m, t, n)?.conj();
                worst = worst.max((lhs - rhs).norm());
            }
        }
        Ok((worst <= tol, worst))
    }

    /// Partial M-average (1/sum h) sum_{k<=n} K(k*s, k) h(k); the real part
    /// is reported (hermitian kernels have real averages in the limit).
    pub fn asymptotic_m(&self, s: usize, n: usize) -> Result<f64> {
        let h = self.hg.haar_weights(n);
        let total = pairwise_sum(&h);
        let mut terms = Vec::with_capacity(n + 1);
        for k in 0..=n {
            terms.push(self.translated_value(k, s, k)?.re * h[k]);
        }
        Ok(pairwise_sum(&terms) / total)
    }

    /// Partial H-average (1/sum h) sum_{k<=n} (K(k*s,0) - K(k,s)) h(k),
    /// real part.
    pub fn asymptotic_h(&self, s: usize, n: usize) -> Result<f64> {
        let h = self.hg.haar_weights(n);
        let total = pairwise_sum(&h);
        let mut terms = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let v = self.translated_value(k, s, 0)? - self.value(k, s)?;
            terms.push(v.re * h[k]);
        }
        Ok(pairwise_sum(&terms) / total)
    }

    /// Wiener statistics of a stationary backend at truncation n.
    pub fn wiener_statistic(&self, variant: WienerVariant, n: usize) -> Result<f64> {
        let d = match &self.backend {
            Backend::Stationary(d) => d,
            _ => return Err(Error::Invalid("wiener statistics need a stationary backend".into())),
        };
        if d.len() < n + 1 {
            return Err(Error::IndexOutOfRange { needed: n, len: d.len() });
        }
        let h = self.hg.haar_weights(n);
        let total = pairwise_sum(&h);
        match variant {
            WienerVariant::AbsMean => {
                let terms: Vec<f64> = (0..=n).map(|k| d[k].abs() * h[k]).collect();
                Ok(pairwise_sum(&terms) / total)
            }
            WienerVariant::SquareMean => {
                let terms: Vec<f64> = (0..=n).map(|k| d[k] * d[k] * h[k]).collect();
                Ok(pairwise_sum(&terms) / total)
            }
            WienerVariant::DoubleSquareMean => {
                if d.len() < 2 * n + 1 {
                    return Err(Error::IndexOutOfRange { needed: 2 * n, len: d.len() });
                }
                let mut terms = Vec::with_capacity((n + 1) * (n + 2) / 2);
                for l in 0..=n {
                    self.hg.for_each_row(l, l, |k, row| {
                        let v: f64 = row.iter().map(|(s, g)| g * d[s]).sum();
                        let w = if k == l { 1.0 } else { 2.0 };
                        terms.push(w * v * v * h[k] * h[l]);
                        Ok(())
                    })?;
                }
                Ok(pairwise_sum(&terms) / (total * total))
            }
        }
    }

    /// Smallest eigenvalue check of the raw kernel matrix [K(i,j)] of order
    /// N+1 (positive definiteness as a kernel); complex tables go through
    /// the real embedding.
    pub fn matrix_positive_definite(&self, n_max: usize, tol: f64) -> Result<(bool, f64)> {
        let s = n_max + 1;
        let mut m = SymMatrix::zeros(2 * s);
        for i in 0..s {
            for j in 0..s {
                let v = self.value(i, j)?;
                m.set(i, j, v.re);
                m.set(s + i, s + j, v.re);
                m.set(i, s + j, -v.im);
                m.set(s + i, j, v.im);
            }
        }
        let eig = sym_eigenvalues(&m);
        Ok((eig[0] >= -tol, eig[0]))
    }
}

/// Support criterion for T-cyclostationarity of an atomic bimeasure: every
/// atom (x,y) must satisfy |P_T(x) - P_T(y)| <= tol.
pub fn cyclo_support_test(
    hg: &Hypergroup,
    mu2: &BiMeasure,
    t: usize,
    tol: f64,
) -> Result<bool> {
    let atoms = mu2.all_atoms()?;
    let sys = hg.sys();
    for (x, y, w) in atoms {
        if w.norm() == 0.0 {
            continue;
        }
        if (sys.evaluate(t, x) - sys.evaluate(t, y)).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The four-valued kernel of the cyclostationarity example: (C+1)^2 on
/// even-even, (C-1)^2 on odd-odd, (C-1)(C+1) on mixed indices. It is the
/// product measure (C delta_1 + delta_{-1}) x (C delta_1 + delta_{-1}).
pub fn cyclostationary_example(hg: Arc<Hypergroup>, c: f64) -> Kernel {
    let mu2 = BiMeasure::rank_one(&[
        (1.0, Complex64::new(c, 0.0)),
        (-1.0, Complex64::new(1.0, 0.0)),
    ]);
    Kernel::harmonizable_unchecked(hg, mu2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DensityVsPi, SpectralMeasure};
    use crate::polysys::{Family, PolynomialSystem};

    fn hg(f: Family) -> Arc<Hypergroup> {
        Arc::new(Hypergroup::new(PolynomialSystem::from_family(f).unwrap()))
    }

    #[test]
    fn stationary_point_mass_kernel() {
        let h = hg(Family::ChebyshevFirst);
        let x0 = 0.35;
        let d: Vec<f64> = (0..=20).map(|k| h.sys().evaluate(k, x0)).collect();
        let k = Kernel::stationary(h.clone(), d).unwrap();
        for (n, m) in [(0usize, 0usize), (2, 5), (7, 3)] {
            let got = k.value(n, m).unwrap().re;
            let want = h.sys().evaluate(n, x0) * h.sys().evaluate(m, x0);
            assert!((got - want).abs() < 1e-12);
        }
        let (ok, worst, _) = k.check_stationary(8, 1e-10).unwrap();
        assert!(ok, "worst {worst}");
    }

    #[test]
    fn stationary_bound_is_enforced() {
        let h = hg(Family::ChebyshevFirst);
        assert!(Kernel::stationary(h, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn cyclo_example_values_and_classification() {
        let h = hg(Family::ChebyshevFirst);
        let c = 2.0;
        let k = cyclostationary_example(h.clone(), c);
        assert!((k.value(1, 1).unwrap().re - 1.0).abs() < 1e-12);
        assert!((k.value(2, 4).unwrap().re - 9.0).abs() < 1e-12);
        assert!((k.value(0, 3).unwrap().re - 3.0).abs() < 1e-12);
        // positive definite as a kernel
        let (psd, margin) = k.matrix_positive_definite(8, 1e-10).unwrap();
        assert!(psd, "margin {margin}");
        // 2-cyclostationary, not stationary, not 1-cyclostationary
        let (cyc2, worst2) = k.check_cyclostationary(2, 8, 1e-12).unwrap();
        assert!(cyc2, "worst {worst2}");
        let (st, worst, witness) = k.check_stationary(4, 1e-9).unwrap();
        assert!(!st);
        assert!((worst - 8.0).abs() < 1e-12, "witness {witness:?} residual {worst}");
        let (cyc1, _) = k.check_cyclostationary(1, 8, 1e-9).unwrap();
        assert!(!cyc1);
    }

    #[test]
    fn stationarity_and_one_cyclostationarity_coincide() {
        let h = hg(Family::Jacobi { alpha: 1.0, beta: 0.25 });
        let mu = SpectralMeasure::new(
            h.sys(),
            vec![(0.4, 0.3)],
            Some(DensityVsPi::Const { c: 0.5 }),
            None,
            44,
        )
        .unwrap();
        let d = mu.moments(h.sys(), 41).unwrap();
        let k = Kernel::stationary(h.clone(), d).unwrap();
        for t in 1..=4 {
            let (ok, worst) = k.check_cyclostationary(t, 10, 1e-9).unwrap();
            assert!(ok, "t={t} worst {worst}");
        }
    }

    #[test]
    fn table_backend_from_diagonal_bimeasure_is_stationary() {
        let h = hg(Family::ChebyshevFirst);
        let mu = SpectralMeasure::new(
            h.sys(),
            vec![(0.2, 0.4), (-0.5, 0.6)],
            None,
            None,
            24,
        )
        .unwrap();
        let bi = BiMeasure::diagonal_lift(mu);
        let n = 8usize;
        let mut vals = vec![Complex64::new(0.0, 0.0); (n + 1) * (n + 1)];
        for i in 0..=n {
            for j in 0..=n {
                vals[i * (n + 1) + j] = bi.bimoment(h.sys(), i, j).unwrap();
            }
        }
        let k = Kernel::table(h.clone(), n + 1, vals).unwrap();
        let (ok, worst, _) = k.check_stationary(4, 1e-9).unwrap();
        assert!(ok, "worst {worst}");
    }

    #[test]
    fn cyclo_support_criterion_matches_kernel_check() {
        let h = hg(Family::ChebyshevFirst);
        // product atoms at {-1,1}^2: T_2(1) = T_2(-1) = 1, so T = 2 passes
        let k = cyclostationary_example(h.clone(), 2.0);
        let mu2 = BiMeasure::rank_one(&[
            (1.0, Complex64::new(2.0, 0.0)),
            (-1.0, Complex64::new(1.0, 0.0)),
        ]);
        assert!(cyclo_support_test(&h, &mu2, 2, 1e-9).unwrap());
        assert!(!cyclo_support_test(&h, &mu2, 1, 1e-9).unwrap());
        let (c2, _) = k.check_cyclostationary(2, 8, 1e-9).unwrap();
        let (c1, _) = k.check_cyclostationary(1, 8, 1e-9).unwrap();
        assert!(c2 && !c1);

        // an off-diagonal atom at unrelated points fails every small period
        let bad = BiMeasure::from_atoms(vec![
            (0.3, 0.7, Complex64::new(0.5, 0.0)),
            (0.7, 0.3, Complex64::new(0.5, 0.0)),
        ])
        .unwrap();
        assert!(!cyclo_support_test(&h, &bad, 1, 1e-9).unwrap());
        let kb = Kernel::harmonizable_unchecked(h.clone(), bad);
        let (c1b, _) = kb.check_cyclostationary(1, 8, 1e-9).unwrap();
        assert!(!c1b);

        // diagonal atoms pass every period
        let diag = BiMeasure::from_atoms(vec![
            (0.3, 0.3, Complex64::new(1.0, 0.0)),
            (-0.6, -0.6, Complex64::new(0.5, 0.0)),
        ])
        .unwrap();
        for t in 1..=4 {
            assert!(cyclo_support_test(&h, &diag, t, 1e-9).unwrap());
        }
        // continuous parts are unsupported
        let cont = BiMeasure::diagonal_lift(SpectralMeasure::plancherel(h.sys(), 8));
        assert!(matches!(
            cyclo_support_test(&h, &cont, 2, 1e-9),
            Err(Error::NonAtomicUnsupported)
        ));
    }

    #[test]
    fn five_cyclostationary_support_off_the_diagonal() {
        // atoms on the level set T_5(x) = T_5(y) away from the diagonal:
        // x = cos(t), y = cos(t + 2 pi/5) share the T_5 value, so the kernel
        // is 5-cyclostationary without being stationary
        let h = hg(Family::ChebyshevFirst);
        let t0 = 0.4f64;
        let (x, y) = (t0.cos(), (t0 + 2.0 * std::f64::consts::PI / 5.0).cos());
        let mu2 = BiMeasure::from_atoms(vec![
            (x, x, Complex64::new(1.0, 0.0)),
            (y, y, Complex64::new(1.0, 0.0)),
            (x, y, Complex64::new(0.8, 0.0)),
            (y, x, Complex64::new(0.8, 0.0)),
        ])
        .unwrap();
        assert!(cyclo_support_test(&h, &mu2, 5, 1e-9).unwrap());
        for t in 1..5 {
            assert!(!cyclo_support_test(&h, &mu2, t, 1e-9).unwrap(), "T={t}");
        }
        let k = Kernel::harmonizable(h.clone(), mu2).unwrap();
        let (c5, worst5) = k.check_cyclostationary(5, 8, 1e-10).unwrap();
        assert!(c5, "worst {worst5}");
        let (stat, _, _) = k.check_stationary(6, 1e-9).unwrap();
        assert!(!stat);
        for t in [2usize, 3] {
            let (ct, _) = k.check_cyclostationary(t, 8, 1e-9).unwrap();
            assert!(!ct, "T={t} should fail");
        }
    }

    #[test]
    fn m_average_halves_interior_moments_for_chebyshev() {
        // For the first-kind hypergroup the Cesaro weight of an interior
        // point is lim (sum cos^2(k t) h(k)) / (sum h(k)) = 1/2, so the
        // partial M-averages of an interior measure settle at d(s)/2.
        let h = hg(Family::ChebyshevFirst);
        let mu = SpectralMeasure::new(
            h.sys(),
            vec![(0.3, 0.4)],
            Some(DensityVsPi::Const { c: 0.6 }),
            None,
            600,
        )
        .unwrap();
        let d = mu.moments(h.sys(), 550).unwrap();
        let k = Kernel::stationary(h.clone(), d.clone()).unwrap();
        for s in [0usize, 1, 3] {
            let m256 = k.asymptotic_m(s, 256).unwrap();
            assert!((m256 - 0.5 * d[s]).abs() < 0.02, "s={s}: {m256} vs {}", 0.5 * d[s]);
        }
        // the zeroth partial average is K(0,0) itself
        assert!((k.asymptotic_m(0, 0).unwrap() - d[0]).abs() < 1e-14);
        // endpoint mass keeps full weight: mu({1}) enters undamped
        let mu1 = SpectralMeasure::new(
            h.sys(),
            vec![(1.0, 0.25)],
            Some(DensityVsPi::Const { c: 0.75 }),
            None,
            600,
        )
        .unwrap();
        let d1 = mu1.moments(h.sys(), 550).unwrap();
        let k1 = Kernel::stationary(h.clone(), d1.clone()).unwrap();
        let m = k1.asymptotic_m(2, 256).unwrap();
        // 0.25 (atom, weight 1) + 0.5 * continuous d(2) with d(2)_cont = 0
        assert!((m - (0.25 + 0.5 * (d1[2] - 0.25))).abs() < 0.02, "{m}");
    }

    #[test]
    fn m_average_keeps_unit_atom_mass_for_ultraspherical() {
        // alpha = beta = 1/2: M(s) -> mu({1}) + (-1)^s mu({-1}); here the
        // atom sits at 1 with mass w
        let h = hg(Family::ChebyshevSecond);
        let w = 0.4;
        let mu = SpectralMeasure::new(
            h.sys(),
            vec![(1.0, w)],
            Some(DensityVsPi::Const { c: 0.6 }),
            None,
            1100,
        )
        .unwrap();
        let d = mu.moments(h.sys(), 1050).unwrap();
        let k = Kernel::stationary(h.clone(), d).unwrap();
        for s in [1usize, 2] {
            let ladder: Vec<f64> =
                [128usize, 256, 512].iter().map(|&n| k.asymptotic_m(s, n).unwrap()).collect();
            assert!((ladder[2] - w).abs() < 1e-3, "s={s}: {:?}", ladder);
            assert!((ladder[2] - w).abs() <= (ladder[0] - w).abs() + 1e-9, "s={s}: {:?}", ladder);
        }
    }

    #[test]
    fn h_average_vanishes_identically_for_stationary() {
        let h = hg(Family::ChebyshevFirst);
        let mu = SpectralMeasure::new(
            h.sys(),
            vec![(0.5, 0.3)],
            Some(DensityVsPi::Const { c: 0.5 }),
            None,
            80,
        )
        .unwrap();
        let d = mu.moments(h.sys(), 70).unwrap();
        let k = Kernel::stationary(h.clone(), d).unwrap();
        for s in 0..=3 {
            for n in [4usize, 16, 30] {
                assert!(k.asymptotic_h(s, n).unwrap().abs() < 1e-11, "s={s} n={n}");
            }
        }
    }

    #[test]
    fn h_average_detects_mass_on_the_unit_fiber() {
        // hermitian atom pair (1,y0), (y0,1): the limit is w (1 - P_s(y0))
        let h = hg(Family::ChebyshevFirst);
        let y0 = 0.3;
        let w = 0.8;
        let mu2 = BiMeasure::from_atoms(vec![
            (1.0, y0, Complex64::new(w, 0.0)),
            (y0, 1.0, Complex64::new(w, 0.0)),
        ])
        .unwrap();
        let k = Kernel::harmonizable_unchecked(h.clone(), mu2);
        for s in [1usize, 2] {
            let want = w * (1.0 - h.sys().evaluate(s, y0));
            let ladder: Vec<f64> =
                [64usize, 256, 1024].iter().map(|&n| k.asymptotic_h(s, n).unwrap()).collect();
            // Christoffel-Darboux tails oscillate; the band shrinks
            assert!((ladder[2] - want).abs() < 5e-3, "s={s}: {:?} vs {want}", ladder);
        }
        // no mass on the fiber: limit 0
        let clean = BiMeasure::from_atoms(vec![
            (0.4, 0.4, Complex64::new(1.0, 0.0)),
            (0.2, -0.5, Complex64::new(0.3, 0.0)),
            (-0.5, 0.2, Complex64::new(0.3, 0.0)),
        ])
        .unwrap();
        let k2 = Kernel::harmonizable_unchecked(h.clone(), clean);
        let tail = k2.asymptotic_h(2, 256).unwrap();
        assert!(tail.abs() < 0.02, "{tail}");
    }

    #[test]
    fn wiener_statistics_sandwich_and_limits() {
        let h = hg(Family::ChebyshevFirst);
        // (i) atom-free mu: square mean tends to 0
        let mu = SpectralMeasure::plancherel(h.sys(), 600);
        let d = mu.moments(h.sys(), 560).unwrap();
        let k = Kernel::stationary(h.clone(), d.clone()).unwrap();
        let mut prev = f64::INFINITY;
        for n in [16usize, 64, 256] {
            let c = k.wiener_statistic(WienerVariant::SquareMean, n).unwrap();
            assert!(c < prev);
            prev = c;
        }
        assert!(prev < 0.02);

        // sandwich b^2 <= c <= K(0,0) b at every n
        let mu2 = SpectralMeasure::new(
            h.sys(),
            vec![(0.1, 0.3)],
            Some(DensityVsPi::PolyX { coeffs: vec![0.8, 0.4] }),
            None,
            300,
        )
        .unwrap();
        let d2 = mu2.moments(h.sys(), 280).unwrap();
        let k2 = Kernel::stationary(h.clone(), d2.clone()).unwrap();
        for n in [4usize, 32, 128] {
            let b = k2.wiener_statistic(WienerVariant::AbsMean, n).unwrap();
            let c = k2.wiener_statistic(WienerVariant::SquareMean, n).unwrap();
            assert!(b * b <= c + 1e-12, "n={n}");
            assert!(c <= d2[0] * b + 1e-12, "n={n}");
        }

        // (ii) single interior atom: square mean tends to 1/2
        let x0 = 1f64.cos();
        let datom: Vec<f64> = (0..=513).map(|j| h.sys().evaluate(j, x0)).collect();
        let ka = Kernel::stationary(h.clone(), datom).unwrap();
        let c256 = ka.wiener_statistic(WienerVariant::SquareMean, 256).unwrap();
        assert!((c256 - 0.5).abs() < 0.05, "{c256}");
    }

    #[test]
    fn wiener_double_sum_variant() {
        let h = hg(Family::ChebyshevFirst);
        // zero kernel gives 0
        let k0 = Kernel::stationary(h.clone(), vec![0.0; 40]).unwrap();
        assert_eq!(k0.wiener_statistic(WienerVariant::DoubleSquareMean, 10).unwrap(), 0.0);
        // point mass: d stays away from zero, so the double mean stays up
        let x0 = 0.6;
        let d: Vec<f64> = (0..=80).map(|j| h.sys().evaluate(j, x0)).collect();
        let k = Kernel::stationary(h.clone(), d).unwrap();
        let v = k.wiener_statistic(WienerVariant::DoubleSquareMean, 40).unwrap();
        assert!(v > 0.05, "{v}");
        // atom-free: double mean decays
        let mu = SpectralMeasure::plancherel(h.sys(), 90);
        let dpi = mu.moments(h.sys(), 81).unwrap();
        let kpi = Kernel::stationary(h.clone(), dpi).unwrap();
        let vpi = kpi.wiener_statistic(WienerVariant::DoubleSquareMean, 40).unwrap();
        assert!(vpi < 0.01, "{vpi}");
    }
}
