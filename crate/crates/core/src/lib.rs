//! Spectral laboratory for the isotropic elastic wave propagator
//! `e^{it√(−Δ*)}`, `Δ* = μΔ + (λ+μ)∇div`.
//!
//! * [`lame_symbol`]: the symbol, its rotation-field diagonalization, and the
//!   multiplier at a single frequency.
//! * [`spectral_grid`]: periodic grids, unitary transforms, norms, field files.
//! * [`propagator`]: half-wave and cosine propagators on a grid.
//! * [`oracle`]: independent reference computations.
//! * [`maximal_lab`]: the sharpness experiment for the maximal estimate and the
//!   positive-direction checks.

pub mod error;
pub mod lame_symbol;
pub mod maximal_lab;
pub mod oracle;
pub mod propagator;
pub mod smooth;
pub mod spectral_grid;

pub use error::{Error, Result};
pub use lame_symbol::{FrequencyPoint, LameParams, MultiplierSample, Sign};
pub use maximal_lab::{ExperimentReport, QuadratureCounts, SharpnessConfig};
pub use spectral_grid::{SpectralVectorField, TorusGrid, VectorField};
