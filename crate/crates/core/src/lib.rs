//! Link-level simulation of delayed bit-interleaved coded modulation (DBICM).
//!
//! The crate covers the full chain: labeled constellations, soft demapping
//! with a-priori information, LDPC construction/encoding/decoding, the
//! delay-line framing of DBICM, and five receiver schedules:
//!
//! - `bicm`: plain BICM, every bit demapped without priors.
//! - `dbicm`: conventional DBICM, delayed-sub-block extrinsics feed the
//!   undelayed sub-blocks once.
//! - `dbicm-wd`: windowed decoding with forward and backward recursions.
//! - `dbicm-id`: iterative detection/decoding over a window with all
//!   co-located extrinsics as priors.
//! - `genie`: demapping with every co-located bit known.
//!
//! The [`harness`] module drives Monte Carlo BER/FER sweeps over Eb/N0.

pub mod constellation;
pub mod demapper;
pub mod error;
pub mod framing;
pub mod harness;
pub mod ldpc;
pub mod schedulers;

pub use constellation::{Constellation, SymbolFrame};
pub use demapper::{DemapMode, NoiseModel, PriorSet};
pub use error::{Error, Result};
pub use framing::{DelayScheme, Interleaver, TransmissionPlan};
pub use ldpc::{DecodeResult, LdpcCode, ParityCheckMatrix};
pub use schedulers::{OpCounters, Scheme};

/// A single hard bit, stored as 0 or 1.
pub type Bit = u8;
