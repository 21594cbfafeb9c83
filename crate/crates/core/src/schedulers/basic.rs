//! Single-pass schedules: BICM, conventional DBICM and the genie bound.

use super::{Receiver, RxOutput, State};
use crate::constellation::SymbolFrame;
use crate::demapper::PriorLlrs;
use crate::error::{invalid, Result};
use crate::Bit;

/// Plain BICM: each frame is demapped once without priors and decoded.
/// Requires an all-zero delay scheme.
pub fn run_bicm(rx: &Receiver<'_>, frames: &[SymbolFrame]) -> Result<RxOutput> {
    let plan = rx.plan();
    if plan.t_max() != 0 {
        return Err(invalid(format!("BICM needs an all-zero delay scheme, got {}", plan.scheme())));
    }
    let mut st = State::new(rx, frames)?;
    let all: Vec<usize> = (0..plan.m()).collect();
    for k in 0..plan.n_codewords() {
        st.sweep(k, &all, &[]);
        st.decode(k);
    }
    Ok(st.finish())
}

/// Conventional DBICM: the undelayed sub-blocks of `c_k` are demapped with
/// the delayed-sub-block extrinsics of `c_{k-1}` as priors, the delayed
/// sub-blocks without priors, and `c_k` is decoded once.
pub fn run_dbicm_conventional(rx: &Receiver<'_>, frames: &[SymbolFrame]) -> Result<RxOutput> {
    let plan = rx.plan();
    if plan.t_max() > 1 {
        return Err(invalid("conventional DBICM decoding supports T_max <= 1"));
    }
    let mut st = State::new(rx, frames)?;
    let undelayed = plan.scheme().undelayed_positions();
    let delayed = plan.scheme().delayed_positions();
    for k in 0..plan.n_codewords() {
        st.sweep(k, &undelayed, &delayed);
        if !delayed.is_empty() {
            st.sweep(k + 1, &delayed, &[]);
        }
        st.decode(k);
    }
    Ok(st.finish())
}

/// Lower bound: every position is demapped with all other co-located bits
/// known (`+inf` for 0, `-inf` for 1), then each codeword is decoded once.
/// `sent` holds the transmitted (interleaved) codewords.
pub fn run_genie_bound(rx: &Receiver<'_>, frames: &[SymbolFrame], sent: &[Vec<Bit>]) -> Result<RxOutput> {
    let plan = rx.plan();
    if sent.len() != plan.n_codewords() || sent.iter().any(|c| c.len() != plan.block_len()) {
        return Err(invalid("genie needs every transmitted codeword"));
    }
    let mut st = State::new(rx, frames)?;
    let (m, n) = (plan.m(), plan.n());
    for f in 0..plan.slots() {
        let known: Vec<Vec<f64>> = (0..m)
            .map(|q| {
                if plan.is_fill(f, q) {
                    return vec![f64::INFINITY; n];
                }
                let k = plan.source_time(f, q) as usize;
                sent[k][q * n..(q + 1) * n]
                    .iter()
                    .map(|&b| if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY })
                    .collect()
            })
            .collect();
        for p in (0..m).filter(|&p| !plan.is_fill(f, p)) {
            let priors: Vec<(usize, PriorLlrs<'_>)> =
                (0..m).filter(|&q| q != p).map(|q| (q, PriorLlrs::Values(&known[q]))).collect();
            st.sweep_with(f, &[p], &priors);
        }
    }
    for k in 0..plan.n_codewords() {
        st.decode(k);
    }
    Ok(st.finish())
}
