//! Weighted sum-rate (WSR) maximization for multi-antenna downlink and
//! interference channels.
//!
//! The crate implements five families of beamforming algorithms on two
//! system models:
//!
//! | family   | MISO broadcast            | MIMO interference          |
//! |----------|---------------------------|----------------------------|
//! | WMMSE    | [`miso::wmmse_step`]      | [`mimo::wmmse_step_mimo`]  |
//! | WSR-FP   | [`miso::fp_step`]         | [`mimo::fp_step_mimo`]     |
//! | WSR-MM   | [`miso::mm_step`]         | [`mimo::mm_step_mimo`]     |
//! | WSR-MM+  | [`miso::mm_plus_step`]    | [`mimo::mm_plus_step_mimo`]|
//! | WSR-FP+  | [`miso::fp_plus_step`]    | [`mimo::fp_plus_step_mimo`]|
//!
//! The first three families solve a regularized least-squares subproblem per
//! iteration and search for the Lagrange multiplier of the power constraint
//! ([`lagrange`]). The "+" families replace that subproblem with an isotropic
//! quadratic minorizer whose maximizer is a scaled projection, i.e. one step
//! of projected gradient ascent ([`calculus`]).
//!
//! [`equivalence`] numerically certifies the identities that tie the families
//! together (iterate-level equality of WMMSE, WSR-FP and WSR-MM, the Woodbury
//! simplification of the MSE weight, the projected-gradient form of WSR-MM+).
//!
//! Rates are in nats throughout.

pub mod calculus;
pub mod equivalence;
pub mod error;
pub mod lagrange;
pub mod linalg;
pub mod mimo;
pub mod miso;
pub mod rng;
pub mod solver;
pub mod system_model;

pub use error::{Result, WsrError};
pub use linalg::{CMat, CVec, C64};
