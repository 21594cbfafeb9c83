//! Iterative detection and decoding over a sliding window.

use super::{IdConfig, Receiver, RxOutput, State};
use crate::constellation::SymbolFrame;
use crate::error::{invalid, Result};

/// DBICM-ID for `T_max <= 1`.
///
/// Window `t` spans frames `t..t+W` and the codewords lying entirely
/// inside them; the last window extends to the final frame. Each iteration
/// demaps every position of every window frame separately, with the latest
/// extrinsics of all `m - 1` co-located bits as priors (zero before their
/// codeword is first decoded), then decodes every window codeword. The
/// stopping rule matches windowed decoding.
pub fn run_dbicm_id(rx: &Receiver<'_>, frames: &[SymbolFrame], cfg: IdConfig) -> Result<RxOutput> {
    let plan = rx.plan();
    if plan.t_max() > 1 {
        return Err(invalid("DBICM-ID supports T_max <= 1"));
    }
    cfg.check(plan)?;
    let mut st = State::new(rx, frames)?;
    let m = plan.m();
    let others: Vec<Vec<usize>> = (0..m).map(|p| (0..m).filter(|&q| q != p).collect()).collect();
    let w_size = cfg.window;
    let last_start = plan.n_codewords() - w_size;

    for t in 0..=last_start {
        let last = t == last_start;
        let frame_end = if last { plan.slots() } else { t + w_size };
        let codeword_end = if last { plan.n_codewords() } else { t + w_size - plan.t_max() };
        for _ in 0..cfg.max_iters {
            for f in t..frame_end {
                for (p, priors) in others.iter().enumerate() {
                    st.sweep(f, &[p], priors);
                }
            }
            for k in t..codeword_end {
                st.decode(k);
            }
            let done = if last { st.converged[t..].iter().all(|&c| c) } else { st.converged[t] };
            if done {
                break;
            }
        }
    }
    Ok(st.finish())
}
