//! Orthogonal-polynomial machinery derived from a spectral measure: the
//! modified Chebyshev recursion for mixed moments and monic recurrence
//! coefficients, connection triangles between systems, and orthonormal
//! leading coefficients.
//!
//! Mixed-moment rows are stored normalized by their diagonal
//! (`sigma_hat(k,l) = sigma_{k,l} / sigma_{k,k}`) with the diagonal itself
//! tracked in log-space, so chains survive depths in the hundreds where the
//! raw values underflow binary64.

use crate::error::{Error, Result};
use crate::measures::SpectralMeasure;
use crate::polysys::PolynomialSystem;

/// Relative scale below which sigma_{k,k} is treated as a Gram collapse.
const DEGENERACY_RATIO_LOG: f64 = -575.6462732485114; // ln(1e-250)

/// Monic orthogonal chain for a measure given through its moments against
/// the system's polynomials.
#[derive(Debug, Clone)]
pub struct MonicChain {
    sys: PolynomialSystem,
    depth: usize,
    /// `rows[k][l - k]` = sigma_{k,l}/sigma_{k,k} for l = k .. moment_count-1-k.
    rows: Vec<Vec<f64>>,
    ln_sigma_kk: Vec<f64>,
    /// t_k = sigma_{k,k} / sigma_{k-1,k-1}; t_0 = sigma_{0,0} = d(0).
    t: Vec<f64>,
    /// ln sigma_k(pi) for k = 0 ..= depth + 1.
    ln_lead: Vec<f64>,
    moment_count: usize,
    truncated_at: Option<usize>,
}

impl MonicChain {
    /// Runs the modified Chebyshev recursion on `d = (d(0), ..., d(L))`.
    /// A supply of 2n+1 moments yields a chain of depth n; shorter supplies
    /// yield shallower chains rather than zero-padding.
    pub fn from_moments(sys: &PolynomialSystem, d: &[f64]) -> Result<Self> {
        if d.is_empty() || !(d[0] > 0.0) {
            return Err(Error::Invalid("moment sequence must start with d(0) > 0".into()));
        }
        let len = d.len();
        let max_depth = (len - 1) / 2;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max_depth + 1);
        let mut ln_sigma_kk = Vec::with_capacity(max_depth + 1);
        let mut t = Vec::with_capacity(max_depth + 1);
        let mut truncated_at = None;

        rows.push(d.iter().map(|&v| v / d[0]).collect());
        ln_sigma_kk.push(d[0].ln());
        t.push(d[0]);

        for k in 1..=max_depth {
            let l_hi = len - 1 - k;
            let prev = &rows[k - 1];
            let prev2: Option<&Vec<f64>> = if k >= 2 { Some(&rows[k - 2]) } else { None };
            // bracket of the printed merged recursion: b_l - b_{k-1}
            //   - a_{k-1} s(k-1,k)/s(k-1,k-1) + a_{k-2} s(k-2,k-1)/s(k-2,k-2)
            let (a_km1, b_km1, _) = sys.x_recurrence(k - 1);
            let shat_km1_k = prev[1];
            let shat_km2_km1 = prev2.map(|p| p[1]).unwrap_or(0.0); // sigma_{-1,l} = 0
            let a_km2 = if k >= 2 { sys.x_recurrence(k - 2).0 } else { 0.0 };
            let bracket_base = -b_km1 - a_km1 * shat_km1_k + a_km2 * shat_km2_km1;

            let mut new_rel = Vec::with_capacity(l_hi + 1 - k);
            for l in k..=l_hi {
                let (a_l, b_l, c_l) = sys.x_recurrence(l);
                let up = prev[l + 2 - k];
                let mid = prev[l + 1 - k];
                let down = prev[l - k];
                let two_back = prev2.map(|p| p[l + 2 - k]).unwrap_or(0.0);
                new_rel.push(a_l * up + (b_l + bracket_base) * mid + c_l * down - a_km2 * two_back);
            }
            // new_rel[l-k] = sigma_{k,l}/sigma_{k-1,k-1}
            let t_k = new_rel[0];
            let ln_prev = ln_sigma_kk[k - 1];
            if !(t_k > 0.0) || ln_prev + t_k.ln() - ln_sigma_kk[0] < DEGENERACY_RATIO_LOG {
                truncated_at = Some(k);
                break;
            }
            rows.push(new_rel.iter().map(|&v| v / t_k).collect());
            ln_sigma_kk.push(ln_prev + t_k.ln());
            t.push(t_k);
        }

        let depth = rows.len() - 1;
        let ln_lead = (0..=depth + 1).map(|k| sys.leading_coefficient_log(k)).collect();
        Ok(Self {
            sys: sys.clone(),
            depth,
            rows,
            ln_sigma_kk,
            t,
            ln_lead,
            moment_count: len,
            truncated_at,
        })
    }

    /// Chain of depth `n` pulled from a measure (2n+1 moments).
    pub fn from_measure(sys: &PolynomialSystem, mu: &SpectralMeasure, n: usize) -> Result<Self> {
        let d = mu.moments(sys, 2 * n + 1)?;
        Self::from_moments(sys, &d)
    }

    pub fn sys(&self) -> &PolynomialSystem {
        &self.sys
    }

    /// Highest k with the norm of phi_k available.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Where the recursion collapsed, if it did before exhausting the moment
    /// supply (supp mu effectively smaller than the requested depth).
    pub fn truncated_at(&self) -> Option<usize> {
        self.truncated_at
    }

    fn ensure_depth(&self, k: usize) -> Result<()> {
        if k > self.depth {
            Err(Error::MeasureDegenerate { depth: self.depth })
        } else {
            Ok(())
        }
    }

    /// sigma_hat_{k,l} = sigma_{k,l} / sigma_{k,k}; zero for l < k.
    pub fn sigma_hat(&self, k: usize, l: usize) -> Result<f64> {
        self.ensure_depth(k)?;
        if l < k {
            return Ok(0.0);
        }
        if l + k > self.moment_count - 1 {
            return Err(Error::MomentSupply { needed: k + l + 1, got: self.moment_count });
        }
        Ok(self.rows[k][l - k])
    }

    /// ln sigma_{k,k}.
    pub fn ln_sigma_kk(&self, k: usize) -> Result<f64> {
        self.ensure_depth(k)?;
        Ok(self.ln_sigma_kk[k])
    }

    /// Monic recurrence coefficient alpha_k.
    pub fn alpha(&self, k: usize) -> Result<f64> {
        let (a_k, b_k, _) = self.sys.x_recurrence(k);
        let sh_k = self.sigma_hat(k, k + 1)?;
        let (a_km1, sh_km1) = if k >= 1 {
            (self.sys.x_recurrence(k - 1).0, self.sigma_hat(k - 1, k)?)
        } else {
            (0.0, 0.0)
        };
        Ok(b_k + a_k * sh_k - a_km1 * sh_km1)
    }

    /// Monic recurrence coefficient beta_k = a_{k-1} sigma_{k,k}/sigma_{k-1,k-1}.
    pub fn beta(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        self.ensure_depth(k)?;
        Ok(self.sys.x_recurrence(k - 1).0 * self.t[k])
    }

    /// ln ||phi_k||^2 = ln sigma_{k,k} - ln sigma_k(pi).
    pub fn ln_norm_sq(&self, k: usize) -> Result<f64> {
        self.ensure_depth(k)?;
        Ok(self.ln_sigma_kk[k] - self.ln_lead[k])
    }

    /// ln rho_k(mu) = -1/2 ln( c_{phiP}(k,k) sigma_{k,k} ).
    pub fn orthonormal_leading_log(&self, k: usize) -> Result<f64> {
        Ok(-0.5 * self.ln_norm_sq(k)?)
    }

    /// ln sigma_k(pi), cached.
    pub fn ln_lead(&self, k: usize) -> f64 {
        self.ln_lead[k]
    }

    /// c_{Pq}(l, k) = sigma_{k,l}/||phi_k||: coefficient of the orthonormal
    /// q_k in the expansion of P_l (m-step prediction needs the top band).
    pub fn c_p_over_q(&self, l: usize, k: usize) -> Result<f64> {
        let sh = self.sigma_hat(k, l)?;
        Ok(sh * (0.5 * (self.ln_sigma_kk(k)? + self.ln_lead[k])).exp())
    }
}

/// Lower-triangular connection coefficients c(k,l) expressing row polynomial
/// k of a source family over a target family, stored as unit-diagonal rows
/// plus the log of the (positive) diagonal.
#[derive(Debug, Clone)]
pub struct ConnectionTriangle {
    /// `rows[k][l]` = c(k,l)/c(k,k) for l = 0..=k.
    pub unit_rows: Vec<Vec<f64>>,
    /// ln c(k,k).
    pub ln_diag: Vec<f64>,
}

impl ConnectionTriangle {
    pub fn order(&self) -> usize {
        self.unit_rows.len() - 1
    }

    /// Raw coefficient c(k,l).
    pub fn value(&self, k: usize, l: usize) -> f64 {
        if l > k {
            return 0.0;
        }
        self.unit_rows[k][l] * self.ln_diag[k].exp()
    }

    /// Row k as raw coefficients c(k,0..=k).
    pub fn row(&self, k: usize) -> Vec<f64> {
        (0..=k).map(|l| self.value(k, l)).collect()
    }

    /// Sum of a raw row; equals 1 when source and target are both
    /// normalized at 1.
    pub fn row_sum(&self, k: usize) -> f64 {
        self.row(k).iter().sum()
    }

    /// Triangular matrix product c_self(k,j) c_other(j,l): chains two
    /// expansions through the intermediate basis.
    pub fn compose(&self, other: &ConnectionTriangle) -> ConnectionTriangle {
        let n = self.order().min(other.order());
        let mut unit_rows = Vec::with_capacity(n + 1);
        let mut ln_diag = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut raw = vec![0.0; k + 1];
            for j in 0..=k {
                let cj = self.unit_rows[k][j] * (self.ln_diag[k] + other.ln_diag[j]).exp();
                for l in 0..=j {
                    raw[l] += cj * other.unit_rows[j][l];
                }
            }
            let diag = raw[k];
            ln_diag.push(diag.abs().ln());
            unit_rows.push(raw.iter().map(|&v| v / diag).collect());
        }
        ConnectionTriangle { unit_rows, ln_diag }
    }
}

/// Connection triangle c_{phiP}(k,l) of the monic chain over the system's
/// polynomials, by the Askey-type recursion with alpha and beta eliminated.
/// Rows reach the chain depth.
pub fn connection_from_measure(chain: &MonicChain) -> Result<ConnectionTriangle> {
    connection_from_measure_rows(chain, chain.depth())
}

/// Same triangle with an explicit row count; `nrows` may exceed the chain
/// depth by one (the row of a collapsing chain is still well defined, which
/// is how exact predictors of finitely supported measures come out).
pub fn connection_from_measure_rows(
    chain: &MonicChain,
    nrows: usize,
) -> Result<ConnectionTriangle> {
    let sys = chain.sys().clone();
    let n = nrows;
    let mut unit_rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut ln_diag = Vec::with_capacity(n + 1);
    unit_rows.push(vec![1.0]); // c(0,0) = 1/P_0, P_0 = 1
    ln_diag.push(0.0);

    for k in 0..n {
        // bracket: b_l - b_k - a_k s(k,k+1)/s(k,k) + a_{k-1} s(k-1,k)/s(k-1,k-1)
        let (a_k, b_k, _) = sys.x_recurrence(k);
        let sh_k = chain.sigma_hat(k, k + 1)?;
        let (a_km1, sh_km1) = if k >= 1 {
            (sys.x_recurrence(k - 1).0, chain.sigma_hat(k - 1, k)?)
        } else {
            (0.0, 0.0)
        };
        let bracket_base = -b_k - a_k * sh_k + a_km1 * sh_km1;
        // beta_k c(k-1,l) in units of c(k,k): the diagonal ratio
        // c(k-1,k-1)/c(k,k) = 1/A_{k-1} cancels the a_{k-1} of beta_k,
        // leaving t_k = sigma_{k,k}/sigma_{k-1,k-1}
        let beta_rel = if k >= 1 {
            (chain.ln_sigma_kk(k)? - chain.ln_sigma_kk(k - 1)?).exp()
        } else {
            0.0
        };
        let _ = a_km1;

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
                Some(p) if k >= 1 && l <= k - 1 => p[l],
                _ => 0.0,
            };
            *slot = a_lm1 * up + (b_l + bracket_base) * mid + c_lp1 * down - beta_rel * back;
        }
        // next[k+1] = c(k+1,k+1)/c(k,k) = A_k
        let diag_rel = next[k + 1];
        ln_diag.push(ln_diag[k] + diag_rel.ln());
        unit_rows.push(next.iter().map(|&v| v / diag_rel).collect());
    }
    Ok(ConnectionTriangle { unit_rows, ln_diag })
}

/// Connection coefficients c_{QP}(n,k) expanding the Q system over the P
/// system, both in hypergroup normalization, by the explicit three-band
/// recursion with the convention c_{QP}(s,t) = 0 for s < t.
pub fn connect_systems(p: &PolynomialSystem, q: &PolynomialSystem, n: usize) -> ConnectionTriangle {
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    raw.push(vec![1.0]);
    if n >= 1 {
        raw.push(vec![(p.b0() - q.b0()) / q.a0(), p.a0() / q.a0()]);
    }
    let at = |row: &[f64], idx: isize| -> f64 {
        if idx < 0 || idx as usize >= row.len() {
            0.0
        } else {
            row[idx as usize]
        }
    };
    for m in 1..n {
        let (qa_m, qb_m, qc_m) = q.recurrence(m);
        let (a0, b0) = (p.a0(), p.b0());
        let (qa0, qb0) = (q.a0(), q.b0());
        let denom = qa0 * qa_m;
        let shift = b0 - qa0 * qb_m - qb0;
        let cur = &raw[m];
        let prev = &raw[m - 1];
        let mut next = vec![0.0; m + 2];
        for (ku, slot) in next.iter_mut().enumerate() {
            let k = ku as isize;
            let v = if ku == 0 {
                let c1 = p.recurrence(1).2;
                shift * at(cur, 0) + a0 * c1 * at(cur, 1) - qa0 * qc_m * at(prev, 0)
            } else if ku == 1 {
                let b1 = p.recurrence(1).1;
                let c2 = p.recurrence(2).2;
                a0 * at(cur, 0)
                    + (a0 * b1 + shift) * at(cur, 1)
                    + a0 * c2 * at(cur, 2)
                    - qa0 * qc_m * at(prev, 1)
            } else {
                let a_km1 = p.recurrence(ku - 1).0;
                let b_k = p.recurrence(ku).1;
                let c_kp1 = p.recurrence(ku + 1).2;
                a0 * a_km1 * at(cur, k - 1)
                    + (a0 * b_k + shift) * at(cur, k)
                    + a0 * c_kp1 * at(cur, k + 1)
                    - qa0 * qc_m * at(prev, k)
            };
            *slot = v / denom;
        }
        raw.push(next);
    }
    let mut unit_rows = Vec::with_capacity(raw.len());
    let mut ln_diag = Vec::with_capacity(raw.len());
    for (k, row) in raw.iter().enumerate() {
        let diag = row[k];
        ln_diag.push(diag.ln());
        unit_rows.push(row.iter().map(|&v| v / diag).collect());
    }
    ConnectionTriangle { unit_rows, ln_diag }
}
