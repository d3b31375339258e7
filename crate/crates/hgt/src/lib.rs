//! Hybrid model-based / data-driven graph transforms for intra-prediction
//! residual coding.
//!
//! The library learns a graph Laplacian whose first `K` eigenvectors are
//! pinned to fixed ADST frequencies while the remaining `N - K` are fitted to
//! an empirical covariance through a constrained graphical-lasso objective.
//! The resulting hybrid transform is evaluated for energy compaction and
//! stability against the fixed 2D DCT and the fully data-driven KLT.
//!
//! Module map:
//! - [`spectral`]: symmetric-matrix algebra and the dense eigensolver.
//! - [`bases`]: DCT / ADST / KLT transform bases and zigzag frequency order.
//! - [`cone`]: projection onto the cone of PSD matrices with prescribed
//!   leading eigenvectors (augmented-Lagrangian proximal gradient).
//! - [`glasso`]: constrained graphical lasso via dual block coordinate
//!   descent alternated with cone projection.
//! - [`pgm`]: binary PGM (P5) parsing and writing.
//! - [`residual`]: DC4 intra-prediction residuals and covariance estimation.
//! - [`eval`]: energy-compaction curves, stability metrics, CSV reports.
//! - [`synth`]: seeded synthetic test images.
//! - [`matcsv`]: plain-text matrix CSV parsing and writing.

pub mod bases;
pub mod cone;
mod error;
pub mod eval;
pub mod glasso;
pub mod matcsv;
pub mod pgm;
pub mod residual;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
