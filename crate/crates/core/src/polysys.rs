//! Orthogonal polynomial systems in hypergroup normalization P_n(1) = 1.
//!
//! Systems are described by the recurrence
//!
//! ```text
//! P_0 = 1,   P_1(x) = (x - b0)/a0,
//! P_1 P_n = a_n P_{n+1} + b_n P_n + c_n P_{n-1}       (n >= 1)
//! ```
//!
//! with a_n, c_n > 0, b_n >= 0, a_n + b_n + c_n = 1 and a0 > 0, a0 + b0 = 1.
//! The equivalent `x P_n` form used by moment recursions is exposed through
//! [`PolynomialSystem::x_recurrence`].

use crate::error::{Error, Result};
use crate::linalg::ln_gamma;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Serializable descriptor of a built-in family, used by the CLI config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    ChebyshevFirst,
    ChebyshevSecond,
    Jacobi { alpha: f64, beta: f64 },
    CartierDunau { q: u32 },
    BernsteinSzego { nu: f64, kappa: f64 },
    /// Haar-weight/asymptotics diagnostics only; not simulation grade.
    AssociatedUltraspherical { alpha: f64, nu: f64 },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::ChebyshevFirst => write!(f, "chebyshev_first"),
            Family::ChebyshevSecond => write!(f, "chebyshev_second"),
            Family::Jacobi { alpha, beta } => write!(f, "jacobi({alpha},{beta})"),
            Family::CartierDunau { q } => write!(f, "cartier_dunau({q})"),
            Family::BernsteinSzego { nu, kappa } => write!(f, "bernstein_szego({nu},{kappa})"),
            Family::AssociatedUltraspherical { alpha, nu } => {
                write!(f, "associated_ultraspherical({alpha},{nu})")
            }
        }
    }
}

type CoeffFn = dyn Fn(usize) -> (f64, f64, f64) + Send + Sync;

#[derive(Clone)]
enum Kind {
    Builtin(Family),
    Custom { coeffs: Arc<CoeffFn> },
}

/// An orthogonal polynomial system with P_n(1) = 1. Immutable after
/// construction; all operations are pure and thread-safe.
#[derive(Clone)]
pub struct PolynomialSystem {
    kind: Kind,
    a0: f64,
    b0: f64,
    /// Dual space D_s (where {P_n(x)} stays bounded by 1).
    support: (f64, f64),
    /// Support of the orthogonalization measure pi (subset of D_s).
    supp_pi: (f64, f64),
    /// Normalization constant of the Bernstein-Szego Lebesgue density.
    bs_norm: Option<f64>,
}

impl fmt::Debug for PolynomialSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Builtin(fam) => write!(f, "PolynomialSystem({fam})"),
            Kind::Custom { .. } => write!(f, "PolynomialSystem(custom)"),
        }
    }
}

fn jacobi_x_form(alpha: f64, beta: f64, n: usize) -> (f64, f64, f64) {
    if n == 0 {
        return (2.0 * (alpha + 1.0) / (alpha + beta + 2.0), (beta - alpha) / (alpha + beta + 2.0), 0.0);
    }
    let n = n as f64;
    let s = alpha + beta;
    let a = 2.0 * (n + s + 1.0) * (n + alpha + 1.0) / ((2.0 * n + s + 1.0) * (2.0 * n + s + 2.0));
    let b = (beta * beta - alpha * alpha) / ((2.0 * n + s) * (2.0 * n + s + 2.0));
    let c = 2.0 * n * (n + beta) / ((2.0 * n + s) * (2.0 * n + s + 1.0));
    (a, b, c)
}

impl PolynomialSystem {
    pub fn from_family(family: Family) -> Result<Self> {
        let (a0, b0, supp_pi, bs_norm) = match &family {
            Family::ChebyshevFirst => (1.0, 0.0, (-1.0, 1.0), None),
            Family::ChebyshevSecond => (1.0, 0.0, (-1.0, 1.0), None),
            Family::Jacobi { alpha, beta } => {
                let (alpha, beta) = (*alpha, *beta);
                if !(alpha >= beta && beta > -1.0 && alpha + beta + 1.0 >= 0.0) {
                    return Err(Error::ParameterOutOfRange(format!(
                        "jacobi requires alpha >= beta > -1 and alpha+beta+1 >= 0, got ({alpha},{beta})"
                    )));
                }
                let (a0, b0, _) = jacobi_x_form(alpha, beta, 0);
                (a0, b0, (-1.0, 1.0), None)
            }
            Family::CartierDunau { q } => {
                if *q < 1 {
                    return Err(Error::ParameterOutOfRange("cartier_dunau requires q >= 1".into()));
                }
                let q = *q as f64;
                let gamma = 2.0 * q.sqrt() / (q + 1.0);
                (1.0, 0.0, (-gamma, gamma), None)
            }
            Family::BernsteinSzego { nu, kappa } => {
                let (nu, kappa) = (*nu, *kappa);
                if !(nu >= 0.0 && kappa >= 0.0 && kappa - 1.0 < nu && nu < 1.0) {
                    return Err(Error::ParameterOutOfRange(format!(
                        "bernstein_szego requires nu,kappa >= 0 and kappa-1 < nu < 1, got ({nu},{kappa})"
                    )));
                }
                let s = nu + kappa + 1.0;
                // c such that c * Int dx/(g(x) sqrt(1-x^2)) = 1, via the
                // arcsine rule: Int f/sqrt(1-x^2) dx = pi * avg over
                // Chebyshev nodes of f.
                let m = 512;
                let mut acc = 0.0;
                for i in 0..m {
                    let x = ((2 * i + 1) as f64 * PI / (2 * m) as f64).cos();
                    acc += 1.0 / bs_weight_poly(nu, kappa, x);
                }
                let c = 1.0 / (PI * acc / m as f64);
                (s / (nu + 1.0), -kappa / (nu + 1.0), (-1.0, 1.0), Some(c))
            }
            Family::AssociatedUltraspherical { alpha, nu } => {
                return Err(Error::NotSimulationGrade(format!(
                    "associated_ultraspherical({alpha},{nu}) exposes Haar diagnostics only"
                )));
            }
        };
        Ok(Self { kind: Kind::Builtin(family), a0, b0, support: (-1.0, 1.0), supp_pi, bs_norm })
    }

    /// User-supplied system: `coeffs(n)` returns (a_n, b_n, c_n) for n >= 1.
    /// Hypergroup validity (g >= 0) is only checked lazily by the convolution
    /// module, up to whatever depth the caller exercises.
    pub fn custom<F>(a0: f64, b0: f64, coeffs: F, support: (f64, f64)) -> Result<Self>
    where
        F: Fn(usize) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        if !(a0 > 0.0) || (a0 + b0 - 1.0).abs() > 1e-12 {
            return Err(Error::ParameterOutOfRange(format!(
                "custom system requires a0 > 0 and a0 + b0 = 1, got ({a0},{b0})"
            )));
        }
        Ok(Self {
            kind: Kind::Custom { coeffs: Arc::new(coeffs) },
            a0,
            b0,
            support,
            supp_pi: support,
            bs_norm: None,
        })
    }

    pub fn family(&self) -> Option<&Family> {
        match &self.kind {
            Kind::Builtin(f) => Some(f),
            Kind::Custom { .. } => None,
        }
    }

    /// Whether the system came from a user-supplied coefficient function
    /// (no hypergroup guarantee) rather than a built-in family.
    pub fn is_custom(&self) -> bool {
        matches!(self.kind, Kind::Custom { .. })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// The dual space D_s as a closed interval.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Support of the orthogonalization measure pi.
    pub fn supp_pi(&self) -> (f64, f64) {
        self.supp_pi
    }

    /// Recurrence coefficients (a_n, b_n, c_n) of `P_1 P_n = a_n P_{n+1} +
    /// b_n P_n + c_n P_{n-1}`. For n = 0 returns (a0, b0, 0).
    pub fn recurrence(&self, n: usize) -> (f64, f64, f64) {
        if n == 0 {
            return (self.a0, self.b0, 0.0);
        }
        match &self.kind {
            Kind::Builtin(Family::ChebyshevFirst) => (0.5, 0.0, 0.5),
            Kind::Builtin(Family::ChebyshevSecond) => {
                let n = n as f64;
                ((n + 2.0) / (2.0 * (n + 1.0)), 0.0, n / (2.0 * (n + 1.0)))
            }
            Kind::Builtin(Family::Jacobi { alpha, beta }) => {
                let (xa, xb, xc) = jacobi_x_form(*alpha, *beta, n);
                (xa / self.a0, (xb - self.b0) / self.a0, xc / self.a0)
            }
            Kind::Builtin(Family::CartierDunau { q }) => {
                let q = *q as f64;
                (q / (q + 1.0), 0.0, 1.0 / (q + 1.0))
            }
            Kind::Builtin(Family::BernsteinSzego { nu, kappa }) => {
                let s = nu + kappa + 1.0;
                match n {
                    1 => (
                        (nu + 1.0) * (nu + 1.0) / (2.0 * s),
                        kappa * (3.0 - nu) / (2.0 * s),
                        (1.0 - nu) * (nu + 1.0 - kappa) / (2.0 * s),
                    ),
                    _ => ((nu + 1.0) / (2.0 * s), kappa / s, (nu + 1.0) / (2.0 * s)),
                }
            }
            Kind::Builtin(Family::AssociatedUltraspherical { .. }) => {
                unreachable!("rejected at construction")
            }
            Kind::Custom { coeffs } => coeffs(n),
        }
    }

    /// Coefficients of `x P_n = A_n P_{n+1} + B_n P_n + C_n P_{n-1}`.
    pub fn x_recurrence(&self, n: usize) -> (f64, f64, f64) {
        if n == 0 {
            return (self.a0, self.b0, 0.0);
        }
        let (a, b, c) = self.recurrence(n);
        (self.a0 * a, self.a0 * b + self.b0, self.a0 * c)
    }

    /// P_n(x) by the forward three-term recurrence.
    pub fn evaluate(&self, n: usize, x: f64) -> f64 {
        self.eval_pair(n, x).0
    }

    /// (P_n(x), P_{n+1}(x)) in one forward pass.
    pub fn eval_pair(&self, n: usize, x: f64) -> (f64, f64) {
        let p1 = (x - self.b0) / self.a0;
        if n == 0 {
            return (1.0, p1);
        }
        let mut prev = 1.0;
        let mut cur = p1;
        for k in 1..=n {
            let (a, b, c) = self.recurrence(k);
            let next = (p1 * cur - b * cur - c * prev) / a;
            prev = cur;
            cur = next;
        }
        (prev, cur)
    }

    /// All of P_0(x) .. P_n(x).
    pub fn eval_row(&self, n: usize, x: f64) -> Vec<f64> {
        let mut row = Vec::with_capacity(n + 1);
        row.push(1.0);
        if n == 0 {
            return row;
        }
        let p1 = (x - self.b0) / self.a0;
        row.push(p1);
        for k in 1..n {
            let (a, b, c) = self.recurrence(k);
            let next = (p1 * row[k] - b * row[k] - c * row[k - 1]) / a;
            row.push(next);
        }
        row
    }

    /// ln sigma_n where P_n(x) = sigma_n x^n + ... ; accumulated in log-space
    /// since sigma_n grows like 2^n.
    pub fn leading_coefficient_log(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let mut ls = -self.a0.ln();
        for k in 1..n {
            let (a, _, _) = self.recurrence(k);
            ls -= (self.a0 * a).ln();
        }
        ls
    }

    /// Lebesgue density of the orthogonalization measure pi at x (zero
    /// outside supp pi). Only available for built-in families; used by the
    /// Kolmogorov-Szego integral.
    pub fn pi_lebesgue_density(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.supp_pi;
        if x <= lo || x >= hi {
            return Ok(0.0);
        }
        match &self.kind {
            Kind::Builtin(Family::ChebyshevFirst) => Ok(1.0 / (PI * (1.0 - x * x).sqrt())),
            Kind::Builtin(Family::ChebyshevSecond) => Ok(2.0 / PI * (1.0 - x * x).sqrt()),
            Kind::Builtin(Family::Jacobi { alpha, beta }) => {
                let lc = ln_gamma(alpha + beta + 2.0)
                    - (alpha + beta + 1.0) * 2f64.ln()
                    - ln_gamma(alpha + 1.0)
                    - ln_gamma(beta + 1.0);
                Ok((lc + alpha * (1.0 - x).ln() + beta * (1.0 + x).ln()).exp())
            }
            Kind::Builtin(Family::CartierDunau { q }) => {
                let q = *q as f64;
                let gamma2 = 4.0 * q / ((q + 1.0) * (q + 1.0));
                Ok((q + 1.0) / (2.0 * PI) * (gamma2 - x * x).sqrt() / (1.0 - x * x))
            }
            Kind::Builtin(Family::BernsteinSzego { nu, kappa }) => {
                let c = self.bs_norm.expect("set at construction");
                Ok(c / (bs_weight_poly(*nu, *kappa, x) * (1.0 - x * x).sqrt()))
            }
            Kind::Builtin(Family::AssociatedUltraspherical { .. }) => {
                unreachable!("rejected at construction")
            }
            Kind::Custom { .. } => {
                Err(Error::Invalid("custom systems carry no pi density formula".into()))
            }
        }
    }
}

/// |nu e^{2it} + kappa e^{it} + 1|^2 expressed in x = cos t.
fn bs_weight_poly(nu: f64, kappa: f64, x: f64) -> f64 {
    4.0 * nu * x * x + 2.0 * kappa * (nu + 1.0) * x + (nu - 1.0) * (nu - 1.0) + kappa * kappa
}

/// Haar weight h(n) of the associated ultraspherical family (diagnostics
/// only; the family has no exact recurrence here). Requires alpha > -1/2,
/// alpha != 0, nu >= 0.
pub fn assoc_ultraspherical_haar_log(alpha: f64, nu: f64, n: usize) -> Result<f64> {
    if !(alpha > -0.5) || alpha == 0.0 || !(nu >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "associated ultraspherical diagnostics need alpha > -1/2, alpha != 0, nu >= 0, got ({alpha},{nu})"
        )));
    }
    let nf = n as f64;
    // ln (x)_{n+1} = ln Gamma(x + n + 1) - ln Gamma(x)
    let ln_poch = |x: f64, m: f64| ln_gamma(x + m) - ln_gamma(x);
    let big = ln_poch(2.0 * alpha + nu, nf + 1.0);
    let small = ln_poch(nu.max(1e-300), nf + 1.0);
    // (2a+nu)_{n+1} - (nu)_{n+1}, in log-space via the ratio
    let diff_log = if nu == 0.0 {
        big
    } else {
        big + (-((small - big).exp())).ln_1p()
    };
    Ok((2.0 * nf + 2.0 * alpha + 2.0 * nu + 1.0).ln()
        - (4.0 * alpha * alpha * (2.0 * alpha + 2.0 * nu + 1.0)).ln()
        - ln_poch(nu + 1.0, nf)
        - ln_poch(2.0 * alpha + nu + 1.0, nf)
        + 2.0 * diff_log)
}

/// Limit of rho_n(pi)/2^n for the associated ultraspherical family; finite
/// and positive, so pi is in the Kolmogorov-Szego class.
pub fn assoc_ultraspherical_rho_limit(alpha: f64, nu: f64) -> Result<f64> {
    if !(alpha > -0.5) || !(nu >= 0.0) {
        return Err(Error::ParameterOutOfRange(
            "associated ultraspherical diagnostics need alpha > -1/2, nu >= 0".into(),
        ));
    }
    Ok((0.5 * (ln_gamma(nu + 1.0) + ln_gamma(nu + 2.0 * alpha + 1.0)
        - ln_gamma(nu + alpha + 1.5)
        - ln_gamma(nu + alpha + 0.5)))
        .exp())
}
