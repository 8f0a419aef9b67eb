//! Forward modeling and contrast-source reconstruction for 2-D acoustic
//! scattering by an inhomogeneous medium.
//!
//! The library discretizes the Lippmann–Schwinger volume integral equation on
//! a square pixel grid over `[-2,2]²`, synthesizes far-field data, and
//! reconstructs the contrast with four alternating-minimization algorithms:
//! the classic contrast source inversion (CSI), the subspace-based
//! optimization method (SOM), and their iteratively `ℓ1`-regularized
//! counterparts IRCSI and IRSOM. Per-iteration diagnostics verify the descent
//! inequalities and stationarity bounds that the regularized variants obey.

pub mod csi;
pub mod diagnostics;
pub mod error;
pub mod forward;
pub mod grid;
pub mod hankel;
pub mod krylov;
pub mod numeric;
pub mod operators;
pub mod phantoms;
pub mod som;
pub mod svd;

pub use error::{Error, Result};
pub use grid::Grid;
pub use numeric::c64;
