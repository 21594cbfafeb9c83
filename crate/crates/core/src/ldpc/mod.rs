//! LDPC codes: sparse parity-check matrices, alist I/O, PEG construction,
//! systematic encoding, and belief-propagation decoding.

mod code;
mod matrix;
mod peg;

pub use code::{BpAlgorithm, DecodeResult, LdpcCode, LLR_CLIP};
pub use matrix::ParityCheckMatrix;
pub use peg::{peg_construct, peg_construct_capped};

use crate::error::{invalid, Result};

/// Decodes `channel_llrs` with the sum-product algorithm.
pub fn bp_decode(channel_llrs: &[f64], code: &LdpcCode, max_iters: usize) -> Result<DecodeResult> {
    if max_iters == 0 {
        return Err(invalid("BP needs at least one iteration"));
    }
    if channel_llrs.len() != code.n() {
        return Err(crate::error::framing(format!(
            "{} LLRs for a length-{} code",
            channel_llrs.len(),
            code.n()
        )));
    }
    Ok(code.decode(channel_llrs, max_iters, BpAlgorithm::SumProduct))
}

/// Check-regular (dv, dc) PEG code of length `n`.
pub fn regular_peg_code(dv: usize, dc: usize, n: usize, seed: u64) -> Result<LdpcCode> {
    if dc == 0 || dv == 0 || !(n * dv).is_multiple_of(dc) {
        return Err(invalid(format!("n * dv = {} is not divisible by dc = {dc}", n * dv)));
    }
    let h = peg_construct_capped(n, n * dv / dc, &vec![dv; n], Some(dc), seed)?;
    LdpcCode::new(h)
}
