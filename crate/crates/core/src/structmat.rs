//! Structured Gram matrices [int P_k P_l dmu] over a polynomial system:
//! construction from moments, O(n^2) moment recovery, the fast O(n^2)
//! factorization of the inverse into connection-coefficient triangular
//! factors, solves, and the dense O(n^3) oracle used for validation and
//! benchmarking.
//!
//! Factors are held in a scale-free form: unit-diagonal rows of the
//! triangular factor plus log-space diagonals, so the decomposition stays
//! meaningful at orders where c(k,k) = 1/sigma_k(pi) underflows binary64.

use crate::error::{Error, Result};
use crate::hyperconv::Hypergroup;
use crate::linalg::{ldlt, OpCounter, SymMatrix};

/// Gram matrix of order n+1 with entries d(k,l) = int P_k P_l dmu.
#[derive(Debug, Clone)]
pub struct StructuredMatrix {
    /// n: the matrix is (n+1) x (n+1).
    pub order: usize,
    pub entries: SymMatrix,
    /// The defining moments d(0..2n), when the matrix was built from them.
    pub moments: Option<Vec<f64>>,
}

impl StructuredMatrix {
    /// Builds the matrix from moments d(0..2n) through the structural
    /// identity d(k,l) = sum_s g(k,l,s) d(s). Streaming rows keep the memory
    /// linear in n.
    pub fn build(hg: &Hypergroup, d: &[f64], n: usize) -> Result<Self> {
        if d.len() < 2 * n + 1 {
            return Err(Error::MomentSupply { needed: 2 * n + 1, got: d.len() });
        }
        let mut m = SymMatrix::zeros(n + 1);
        for l in 0..=n {
            hg.for_each_row(l, l, |k, row| {
                let v: f64 = row.iter().map(|(s, g)| g * d[s]).sum();
                m.set(k, l, v);
                m.set(l, k, v);
                Ok(())
            })?;
        }
        Ok(Self { order: n, entries: m, moments: Some(d[..2 * n + 1].to_vec()) })
    }

    /// Wraps an explicit symmetric matrix (no structural guarantee).
    pub fn from_entries(entries: SymMatrix) -> Result<Self> {
        if entries.n == 0 {
            return Err(Error::Invalid("empty matrix".into()));
        }
        Ok(Self { order: entries.n - 1, entries, moments: None })
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries.get(k, l)
    }

    /// Full structural verification d(k,l) = sum_s g(k,l,s) d(s) over every
    /// entry; O(n^3), test/diagnostic use.
    pub fn verify_structure(&self, hg: &Hypergroup, d: &[f64], tol: f64) -> Result<()> {
        let n = self.order;
        let scale = self.entries.max_abs().max(1.0);
        for l in 0..=n {
            hg.for_each_row(l, l, |k, row| {
                let v: f64 = row.iter().map(|(s, g)| g * d[s]).sum();
                let resid = (v - self.get(k, l)).abs();
                if resid > tol * scale {
                    return Err(Error::InconsistentMatrix { row: k, col: l, residual: resid });
                }
                Ok(())
            })?;
        }
        Ok(())
    }
}

/// Recovers the moments d(0..2n) from the matrix entries by the peel-off
/// recursion d(n+k) = [d(n,k) - sum_{s<n+k} g(n,k,s) d(s)] / g(n,k,n+k).
/// O(n^2); consistency is spot-checked on the diagonal and superdiagonal
/// bands (an O(n^2) subset -- full verification is `verify_structure`).
pub fn moments_from_matrix(
    hg: &Hypergroup,
    m: &StructuredMatrix,
    counter: &mut OpCounter,
) -> Result<Vec<f64>> {
    let n = m.order;
    let mut d = vec![0.0; 2 * n + 1];
    for k in 0..=n {
        d[k] = m.get(k, 0); // P_0 = 1
    }
    hg.for_each_row(n, n, |k, row| {
        counter.add(5 * row.weights.len() as u64); // row recursion cost
        if k == 0 {
            return Ok(());
        }
        let g_top = row.get(n + k);
        let mut acc = m.get(n, k);
        for (s, g) in row.iter() {
            if s < n + k {
                acc -= g * d[s];
            }
        }
        counter.add(row.weights.len() as u64 + 1);
        d[n + k] = acc / g_top;
        Ok(())
    })?;
    // spot-check: diagonal and superdiagonal must reproduce from d; the
    // near-diagonal walk keeps this O(n^2) and memoization-free
    let scale = m.entries.max_abs().max(1.0);
    hg.for_each_diagonal_pair(n, |k, row_kk, row_kk1, ops| {
        counter.add(ops);
        let v: f64 = row_kk.iter().map(|(s, g)| g * d[s]).sum();
        counter.add(row_kk.weights.len() as u64);
        let resid = (v - m.get(k, k)).abs();
        if resid > 1e-8 * scale {
            return Err(Error::InconsistentMatrix { row: k, col: k, residual: resid });
        }
        if k < n {
            // (k, k+1) reaches moment index 2k+1 <= 2n - 1
            let v: f64 = row_kk1.iter().map(|(s, g)| g * d[s]).sum();
            counter.add(row_kk1.weights.len() as u64);
            let resid = (v - m.get(k, k + 1)).abs();
            if resid > 1e-8 * scale {
                return Err(Error::InconsistentMatrix { row: k, col: k + 1, residual: resid });
            }
        }
        Ok(())
    })?;
    Ok(d)
}

/// Triangular factorization of the inverse: M^{-1} = L^T D L with L rows
/// c_{phiP}(k, .) and D_k = 1/(sigma_{k,k} c_{phiP}(k,k)), stored scale-free.
#[derive(Debug, Clone)]
pub struct LdlFactors {
    /// `unit_rows[k][l]` = c(k,l)/c(k,k), l = 0..=k.
    pub unit_rows: Vec<Vec<f64>>,
    /// ln c(k,k) = -ln sigma_k(pi).
    pub ln_cdiag: Vec<f64>,
    /// ln sigma_{k,k}.
    pub ln_sigma: Vec<f64>,
}

impl LdlFactors {
    pub fn order(&self) -> usize {
        self.unit_rows.len() - 1
    }

    /// Diagonal of the normalized factorization M^{-1} = Lhat^T Dhat Lhat
    /// with unit-diagonal Lhat: Dhat_k = c(k,k)/sigma_{k,k}.
    pub fn d_hat(&self, k: usize) -> f64 {
        (self.ln_cdiag[k] - self.ln_sigma[k]).exp()
    }

    /// Diagonal of the decomposition with unnormalized rows,
    /// D_k = 1/(sigma_{k,k} c(k,k)).
    pub fn d_raw(&self, k: usize) -> f64 {
        (-(self.ln_sigma[k] + self.ln_cdiag[k])).exp()
    }

    /// Raw factor entry c(k,l); underflows for very deep rows, where the
    /// normalized accessors remain exact.
    pub fn l_raw(&self, k: usize, l: usize) -> f64 {
        if l > k {
            0.0
        } else {
            self.unit_rows[k][l] * self.ln_cdiag[k].exp()
        }
    }

    /// x = M^{-1} b = Lhat^T Dhat Lhat b; two triangular products and a
    /// diagonal scale, O(n^2).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order();
        assert_eq!(b.len(), n + 1);
        let mut y = vec![0.0; n + 1];
        for k in 0..=n {
            y[k] = self.unit_rows[k].iter().zip(b).map(|(l, v)| l * v).sum::<f64>() * self.d_hat(k);
        }
        let mut x = vec![0.0; n + 1];
        for k in 0..=n {
            let yk = y[k];
            for (l, &c) in self.unit_rows[k].iter().enumerate() {
                x[l] += c * yk;
            }
        }
        x
    }

    /// || Lhat^T Dhat Lhat M - I ||_inf; O(n^3), validation use.
    pub fn reconstruct_residual(&self, m: &StructuredMatrix) -> f64 {
        let n = self.order();
        let mut worst = 0.0f64;
        let mut col = vec![0.0; n + 1];
        for j in 0..=n {
            for (i, slot) in col.iter_mut().enumerate() {
                *slot = m.get(i, j);
            }
            let x = self.solve(&col);
            for (i, &v) in x.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
        }
        worst
    }
}

/// The fast three-step factorization: moment recovery, mixed-moment
/// recursion with beta eliminated, connection recursion with alpha and beta
/// eliminated. O(n^2) arithmetic, counted into `counter`.
pub fn ldl_decompose_counted(
    hg: &Hypergroup,
    m: &StructuredMatrix,
    counter: &mut OpCounter,
) -> Result<LdlFactors> {
    let n = m.order;
    let d = moments_from_matrix(hg, m, counter)?;
    levinson_core(hg, &d, n, counter)
}

pub fn ldl_decompose(hg: &Hypergroup, m: &StructuredMatrix) -> Result<LdlFactors> {
    let mut c = OpCounter::new();
    ldl_decompose_counted(hg, m, &mut c)
}

/// Steps two and three of the algorithm on the recovered moments.
fn levinson_core(
    hg: &Hypergroup,
    d: &[f64],
    n: usize,
    counter: &mut OpCounter,
) -> Result<LdlFactors> {
    let sys = hg.sys();
    if d.is_empty() || !(d[0] > 0.0) {
        return Err(Error::Invalid("moments must start with d(0) > 0".into()));
    }
    let len = 2 * n + 1;
    if d.len() < len {
        return Err(Error::MomentSupply { needed: len, got: d.len() });
    }

    // --- second step: row-normalized mixed moments ---------------------
    // rows[k][l-k] = sigma_{k,l}/sigma_{k,k}, diagonal ratios t_k tracked
    // in log-space.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut ln_sigma = Vec::with_capacity(n + 1);
    rows.push(d[..len].iter().map(|&v| v / d[0]).collect());
    ln_sigma.push(d[0].ln());
    for k in 1..=n {
        let l_hi = len - 1 - k;
        let prev = &rows[k - 1];
        let prev2 = if k >= 2 { Some(&rows[k - 2]) } else { None };
        let (a_km1, b_km1, _) = sys.x_recurrence(k - 1);
        let a_km2 = if k >= 2 { sys.x_recurrence(k - 2).0 } else { 0.0 };
        let bracket =
            -b_km1 - a_km1 * prev[1] + a_km2 * prev2.map(|p| p[1]).unwrap_or(0.0);
        let mut rel = Vec::with_capacity(l_hi + 1 - k);
        for l in k..=l_hi {
            let (a_l, b_l, c_l) = sys.x_recurrence(l);
            let up = prev[l + 2 - k];
            let mid = prev[l + 1 - k];
            let down = prev[l - k];
            let back = prev2.map(|p| p[l + 2 - k]).unwrap_or(0.0);
            rel.push(a_l * up + (b_l + bracket) * mid + c_l * down - a_km2 * back);
        }
        counter.add(4 * rel.len() as u64 + 4);
        let t_k = rel[0];
        if !(t_k > 0.0) {
            return Err(Error::MeasureDegenerate { depth: k });
        }
        rows.push(rel.iter().map(|&v| v / t_k).collect());
        ln_sigma.push(ln_sigma[k - 1] + t_k.ln());
    }

    // --- third step: connection rows, unit-normalized ------------------
    let mut unit_rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut ln_cdiag = Vec::with_capacity(n + 1);
    unit_rows.push(vec![1.0]);
    ln_cdiag.push(0.0);
    for k in 0..n {
        let (a_k, b_k, _) = sys.x_recurrence(k);
        let sh_k = rows[k][1];
        let (a_km1, sh_km1) =
            if k >= 1 { (sys.x_recurrence(k - 1).0, rows[k - 1][1]) } else { (0.0, 0.0) };
        let bracket = -b_k - a_k * sh_k + a_km1 * sh_km1;
        let beta_rel = if k >= 1 { (ln_sigma[k] - ln_sigma[k - 1]).exp() } else { 0.0 };
        let cur = &unit_rows[k];
        let prev = if k >= 1 { Some(&unit_rows[k - 1]) } else { None };
        let mut next = vec![0.0; k + 2];
        for (l, slot) in next.iter_mut().enumerate() {
            let b_l = sys.x_recurrence(l).1;
            let a_lm1 = if l >= 1 { sys.x_recurrence(l - 1).0 } else { 0.0 };
            let c_lp1 = sys.x_recurrence(l + 1).2;
            let up = if l >= 1 && l - 1 <= k { cur[l - 1] } else { 0.0 };
            let mid = if l <= k { cur[l] } else { 0.0 };
            let down = if l + 1 <= k { cur[l + 1] } else { 0.0 };
            let back = match prev {
                Some(p) if k >= 1 && l + 1 <= k => p[l],
                _ => 0.0,
            };
            *slot = a_lm1 * up + (b_l + bracket) * mid + c_lp1 * down - beta_rel * back;
        }
        counter.add(4 * next.len() as u64 + 4);
        let diag_rel = next[k + 1];
        if !(diag_rel > 0.0) {
            return Err(Error::MeasureDegenerate { depth: k + 1 });
        }
        ln_cdiag.push(ln_cdiag[k] + diag_rel.ln());
        unit_rows.push(next.iter().map(|&v| v / diag_rel).collect());
    }
    // ln c(k,k) accumulated from the diagonal ratios equals -ln sigma_k(pi)
    Ok(LdlFactors { unit_rows, ln_cdiag, ln_sigma: ln_sigma[..=n].to_vec() })
}

/// Dense O(n^3) oracle: invert through an LDL^T factorization and refactor
/// the inverse in the same L^T D L orientation, returning the normalized
/// unit-diagonal factors for entrywise comparison.
pub struct DenseFactors {
    pub unit_rows: Vec<Vec<f64>>,
    pub d_hat: Vec<f64>,
}

pub fn brute_force_factor(
    m: &StructuredMatrix,
    counter: &mut OpCounter,
) -> Result<DenseFactors> {
    let n = m.order;
    let inv = crate::linalg::inverse(&m.entries, counter)?;
    // reverse-order LDL^T: flip, factor, unflip
    let size = n + 1;
    let mut flipped = SymMatrix::zeros(size);
    for i in 0..size {
        for j in 0..size {
            flipped.set(i, j, inv.get(n - i, n - j));
        }
    }
    let f = ldlt(&flipped, counter)?;
    let mut unit_rows = Vec::with_capacity(size);
    let mut d_hat = vec![0.0; size];
    for k in 0..size {
        // Lhat[k][l] = L_B[n-l][n-k] for l <= k
        let mut row = Vec::with_capacity(k + 1);
        for l in 0..k {
            row.push(f.lower[(n - l) * size + (n - k)]);
        }
        row.push(1.0);
        unit_rows.push(row);
        d_hat[k] = f.pivots[n - k];
    }
    Ok(DenseFactors { unit_rows, d_hat })
}

/// Solve M x = b through the fast factorization. Residuals beyond the
/// conditioning band kappa(M) * 1e-12 * ||b|| are logged with the condition
/// estimate rather than silently accepted (the algorithm has no pivoting to
/// fall back on).
pub fn solve(hg: &Hypergroup, m: &StructuredMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let f = ldl_decompose(hg, m)?;
    let x = f.solve(b);
    let n = m.order;
    let bnorm = b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let mut resid = 0.0f64;
    for i in 0..=n {
        let r: f64 = (0..=n).map(|j| m.get(i, j) * x[j]).sum::<f64>() - b[i];
        resid = resid.max(r.abs());
    }
    // crude condition estimate: ||M||_inf times the largest inverse scale
    let dmax = (0..=n).map(|k| f.d_hat(k)).fold(0.0f64, f64::max);
    let kappa_est = m.entries.max_abs() * dmax * (n + 1) as f64;
    if resid > kappa_est.max(1.0) * 1e-12 * bnorm.max(1e-300) {
        eprintln!(
            "structmat::solve: residual {resid:e} exceeds the conditioning band (kappa estimate {kappa_est:e})"
        );
    }
    Ok(x)
}
