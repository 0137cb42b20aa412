//! Second-order analysis of random sequences indexed by polynomial hypergroups.
//!
//! The crate is organized around a [`polysys::PolynomialSystem`] in hypergroup
//! normalization (`P_n(1) = 1`) and the convolution structure it induces on the
//! index set (module [`hyperconv`]). On top of that sit spectral measures and
//! quadrature ([`measures`]), moment-based orthogonal-polynomial machinery
//! ([`opseq`]), positive-definite kernel classification ([`kernels`]),
//! simulation of random sequences ([`sequences`]), spectral estimation
//! ([`estimate`]), best linear prediction ([`predict`]) and a fast O(n^2)
//! factorization of structured covariance matrices ([`structmat`]).
//!
//! ```
//! use hypergroup_core::{Family, Hypergroup, PolynomialSystem, SpectralMeasure};
//!
//! // the first-kind hypergroup with its orthogonalization measure
//! let sys = PolynomialSystem::from_family(Family::ChebyshevFirst)?;
//! let hg = Hypergroup::new(sys.clone());
//! let mu = SpectralMeasure::plancherel(&sys, 40);
//!
//! // one-step prediction error is constant 1/sqrt(2) for this pair
//! let p = hypergroup_core::predict::one_step(&hg, &mu, 16)?;
//! assert!((p.delta() - 0.5f64.sqrt()).abs() < 1e-10);
//!
//! // and the covariance matrix factors in O(n^2)
//! let d = mu.moments(&sys, 33)?;
//! let m = hypergroup_core::structmat::StructuredMatrix::build(&hg, &d, 16)?;
//! let f = hypergroup_core::structmat::ldl_decompose(&hg, &m)?;
//! assert!(f.reconstruct_residual(&m) < 1e-10);
//! # Ok::<(), hypergroup_core::Error>(())
//! ```

pub mod error;
pub mod estimate;
pub mod hyperconv;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod measures;
pub mod opseq;
pub mod polysys;
pub mod predict;
pub mod sequences;
pub mod structmat;

pub use error::{Error, Result};
pub use hyperconv::Hypergroup;
pub use measures::{BiMeasure, SpectralMeasure};
pub use polysys::{Family, PolynomialSystem};
