//! Equivariant elliptic genera from torus-fixed-point data, the K-theoretic
//! residue map, and the wall-crossing contour integrals `C_n`.
//!
//! Everything numeric is generic over the real scalar `T` (see [`Real`]);
//! coefficients are `Complex<T>`. The `*64` aliases below fix `T = f64`,
//! which is what the verification suites and the CLI use.
//!
//! Modules:
//! - [`qtheta`]: truncated q-series and the theta / Pochhammer factors.
//! - [`weights`]: character-lattice weights, evaluation points, sampling.
//! - [`geom`]: fixed-point models and their localization sums.
//! - [`residue`]: the residue map and `C_n` by three routes, plus checks.
//! - [`parity`]: flag-splitting combinatorics and surface parity arithmetic.

pub mod error;
pub mod geom;
pub mod parity;
pub mod qtheta;
pub mod residue;
pub mod scalar;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Real;

pub type QSeries64 = qtheta::QSeries<f64>;
pub type EvalPoint64 = weights::EvalPoint<f64>;
pub type ChernRootConfig64 = geom::ChernRootConfig<f64>;
pub type SignedRoot64 = geom::SignedRoot<f64>;
pub type IntegrandSpec64 = residue::IntegrandSpec<f64>;
pub type LocalizationValue64 = geom::LocalizationValue<f64>;

pub type QSeries32 = qtheta::QSeries<f32>;
pub type EvalPoint32 = weights::EvalPoint<f32>;
