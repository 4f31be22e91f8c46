//! Empirical norm estimates: direct PV evaluation of `H_Γ`, the Hölder
//! triangle, and ensemble sup-ratio scans of `Λ_m⁺`.

mod geometry;
mod pv;
mod scan;

pub use geometry::{triangle_membership, Location, Membership, Side, Vertex};
pub use pv::{bht_direct, hilbert_fft, relative_l2, trilinear_direct, BhtOutput, Operand, PvFlag, PvParams, MAX_HALVINGS};
pub use scan::{
    ensemble_forms, fit_alpha, fit_decay_at_l2_point, scan_edge, scan_table, EdgeScan, Edge, EnsembleForms, EnvelopeCheck, L2Decay, ScanResult,
    ScanSetup, REFERENCE_ALPHA_L2,
};
