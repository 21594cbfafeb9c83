//! Windowed decoding with forward and backward recursions.

use super::{Receiver, RxOutput, State, WindowConfig};
use crate::constellation::SymbolFrame;
use crate::error::{invalid, Result};

/// Windowed DBICM decoding for `T_max <= 1`.
///
/// For each window start `t`, newly entering frames are first demapped
/// without priors (frames `1..W` at `t = 0`, frame `t + W - 1` afterwards).
/// Each iteration then runs
///
/// - forward, `w = 0..W`: decode `c_{t+w-1}` (for `w > 0`), then demap the
///   undelayed positions of frame `t + w` with the delayed-sub-block
///   extrinsics of `c_{t+w-1}` as priors;
/// - backward, `w = W..=1`: demap the delayed positions of frame `t + w`
///   with the undelayed-sub-block extrinsics of `c_{t+w}` as priors, then
///   decode `c_{t+w-1}`.
///
/// Iteration stops once `c_t` decodes to a codeword (all of `c_t..` in the
/// last window) or after `I_max` iterations.
pub fn run_dbicm_windowed(rx: &Receiver<'_>, frames: &[SymbolFrame], cfg: WindowConfig) -> Result<RxOutput> {
    let plan = rx.plan();
    if plan.t_max() > 1 {
        return Err(invalid("windowed decoding supports T_max <= 1"));
    }
    cfg.check(plan)?;
    let mut st = State::new(rx, frames)?;
    let all: Vec<usize> = (0..plan.m()).collect();
    let undelayed = plan.scheme().undelayed_positions();
    let delayed = plan.scheme().delayed_positions();
    let w_size = cfg.window;
    let last_start = plan.n_codewords() - w_size;

    for t in 0..=last_start {
        if t == 0 {
            for w in 1..w_size {
                st.sweep(w, &all, &[]);
            }
        } else {
            st.sweep(t + w_size - 1, &all, &[]);
        }
        for _ in 0..cfg.max_iters {
            for w in 0..w_size {
                if w > 0 {
                    st.decode(t + w - 1);
                }
                st.sweep(t + w, &undelayed, &delayed);
            }
            for w in (1..=w_size).rev() {
                if t + w < plan.slots() {
                    st.sweep(t + w, &delayed, &undelayed);
                }
                st.decode(t + w - 1);
            }
            let done = if t == last_start { st.converged[t..].iter().all(|&c| c) } else { st.converged[t] };
            if done {
                break;
            }
        }
    }
    Ok(st.finish())
}
