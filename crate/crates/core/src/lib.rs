//! Classical steady states, linearised quadrature noise and harmonic
//! entanglement of a driven, doubly resonant second-order nonlinear cavity.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; IO, file formats and threading live in the
//! `harmonic-cli` companion crate.
//!
//! The pipeline for one drive point is
//!
//! 1. [`cavity::steady_states`] finds every classical solution `(α, β)` and
//!    classifies its stability from the drift matrix,
//! 2. [`quadrature::output_correlation`] propagates vacuum noise through the
//!    linearised cavity to the coupler-port output fields,
//! 3. [`entanglement::report`] evaluates the EPR product (raw and optimised
//!    over local symplectic operations) and the product-form inseparability.
//!
//! [`sweep`] orchestrates this over lines, 2-D maps and constant-power polar
//! paths of the drive space.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cavity;
pub mod entanglement;
mod error;
pub mod linalg;
pub mod nelder_mead;
pub mod poly;
pub mod quadrature;
pub mod sweep;
pub mod symplectic;

pub use cavity::{
    classify_stability, critical_amplitudes, drift_matrix, make_drive, steady_states, BranchId,
    CavityParams, CriticalAmplitudes, DrivePoint, Regime, Stability, StabilityClass,
    SteadyStateBranch,
};
pub use entanglement::{
    epr, from_db, inseparability, optimize_epr, report, standard_form, to_db, EntanglementReport,
    EprOptimum, Inseparability, StandardForm,
};
pub use error::{Error, ErrorCode};
pub use quadrature::{
    output_correlation, output_transfer, system_matrix, CorrelationMatrix, OutputTransfer,
    SystemMatrix,
};
pub use symplectic::{apply_local_symplectic, LocalSymplectic, ModeOperation};

pub use num_complex::Complex;

/// Complex amplitude type used throughout.
pub type Complex64 = Complex<f64>;

pub type Result<T, E = Error> = core::result::Result<T, E>;
