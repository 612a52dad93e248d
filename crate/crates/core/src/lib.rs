//! Unique-word OFDM with frequency-domain pilot tones.
//!
//! The crate builds zero-word-constrained generator matrices, designs
//! minimum-energy pilots, models carrier frequency offset (CFO) including
//! intercarrier interference, estimates the common phase error (CPE) and the
//! CFO from pilot tones, and compares UW-OFDM against CP-OFDM by Monte-Carlo
//! simulation.
//!
//! Modules build on each other bottom-up:
//!
//! * [`numerics`]: dense complex linear algebra and DFT matrices
//! * [`sysmodel`]: system configuration and subcarrier placement matrices
//! * [`genmat`]: data/pilot generator matrices and the generator archive
//! * [`design`]: steepest-descent data generator design and pilot search
//! * [`airlink`]: unique words, channels, CFO matrices, receive models
//! * [`estimator`]: LMMSE, pilot extraction, CPE/CFO estimation, ICI power
//! * [`harness`]: Monte-Carlo experiments and CSV output

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod airlink;
pub mod design;
pub mod error;
pub mod estimator;
pub mod genmat;
pub mod harness;
pub mod numerics;
pub mod sysmodel;

pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector};
pub use sysmodel::{CarrierMaps, Mode, SystemConfig};
