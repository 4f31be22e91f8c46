//! Numerical laboratory for the bilinear Hilbert transform along non-flat
//! curves: curve diagnostics, the stationary-phase multiplier, the
//! wave-packet decomposition into trilinear forms, square-function and
//! Calderón–Zygmund tooling, and empirical operator-norm scans.

pub mod error;
pub mod holder;
pub mod curve;
pub mod decomposition;
pub mod multiplier;
pub mod normscan;
pub mod quad;
pub mod signal;
pub mod squarefuncs;
pub mod table;

pub use error::{LabError, Result};
pub use curve::{builtin_curve, Curve, CurveDescriptor, Regime};
pub use signal::{Grid, SampledFunction, Spectrum, C64};
