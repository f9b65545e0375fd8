#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Expurgated pulse-position modulation (EPPM) for dispersive indoor
//! visible-light links.
//!
//! The crate is organised by stage of the link:
//!
//! - [`codes`]: cyclic BIBD codebooks and the difference-set catalog
//! - [`modem`]: bit-to-chip mapping for EPPM, multilevel EPPM, overlapped
//!   EPPM and the PPM/VPPM/OOK/PAM baselines, plus symbol interleaving
//! - [`channel`]: LOS + Gaussian NLOS tap model, LED response, Poisson counts
//! - [`receiver`]: correlation and Poisson ML decision rules
//! - [`interleaver`]: interference matrices, distance metric, the
//!   ideal-interleaver error bound and the permutation optimizer
//! - [`harness`]: Monte Carlo BER sweeps, figure presets, rate tables
//!
//! Chip and symbol indices are 0-based everywhere.

pub mod channel;
pub mod codes;
pub mod error;
pub mod harness;
pub mod interleaver;
pub mod math;
pub mod modem;
pub mod receiver;

pub use codes::{Catalog, Codebook, DesignParams};
pub use error::{Error, Result};
pub use modem::{ChipFrame, ModulationScheme, Permutation, SchemeKind};
