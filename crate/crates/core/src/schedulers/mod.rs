//! Receiver schedules for BICM and DBICM, with operation counters.
//!
//! Codeword `k` has its undelayed sub-blocks in frame `k` and its delayed
//! sub-blocks in frame `k + 1`. Every schedule stores one LLR slot per
//! (frame, position), overwritten by whichever demapping pass ran last, and
//! one extrinsic vector per codeword, overwritten by its latest decode.
//! Priors from known fill are `+inf`; priors from codewords not yet decoded
//! are left out.

mod basic;
mod id;
mod windowed;

use std::fmt;
use std::str::FromStr;

use crate::constellation::{Constellation, SymbolFrame};
use crate::demapper::{DemapMode, Demapper, NoiseModel, PriorLlrs};
use crate::error::{invalid, Error, Result};
use crate::framing::{Interleaver, TransmissionPlan};
use crate::ldpc::{BpAlgorithm, LdpcCode};
use crate::Bit;

pub use basic::{run_bicm, run_dbicm_conventional, run_genie_bound};
pub use id::run_dbicm_id;
pub use windowed::run_dbicm_windowed;

/// Receiver schedule selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Bicm,
    Dbicm,
    DbicmWindowed,
    DbicmId,
    Genie,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Bicm, Scheme::Dbicm, Scheme::DbicmWindowed, Scheme::DbicmId, Scheme::Genie];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Bicm => "bicm",
            Scheme::Dbicm => "dbicm",
            Scheme::DbicmWindowed => "dbicm-wd",
            Scheme::DbicmId => "dbicm-id",
            Scheme::Genie => "genie",
        }
    }

    /// Runs this schedule. `window` and `iters` are used by the windowed and
    /// ID schedules; `sent` (the transmitted codewords) only by the genie.
    pub fn run(
        self,
        rx: &Receiver<'_>,
        frames: &[SymbolFrame],
        sent: &[Vec<Bit>],
        window: usize,
        iters: usize,
    ) -> Result<RxOutput> {
        match self {
            Scheme::Bicm => run_bicm(rx, frames),
            Scheme::Dbicm => run_dbicm_conventional(rx, frames),
            Scheme::DbicmWindowed => run_dbicm_windowed(rx, frames, WindowConfig::new(window, iters)?),
            Scheme::DbicmId => run_dbicm_id(rx, frames, IdConfig::new(window, iters)?),
            Scheme::Genie => run_genie_bound(rx, frames, sent),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown scheme `{s}` (expected bicm|dbicm|dbicm-wd|dbicm-id|genie)")))
    }
}

/// Windowed decoding parameters: window size `W` and iteration cap `I_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    pub window: usize,
    pub max_iters: usize,
}

impl WindowConfig {
    pub fn new(window: usize, max_iters: usize) -> Result<Self> {
        if max_iters == 0 {
            return Err(invalid("windowed iteration count must be at least 1"));
        }
        Ok(Self { window, max_iters })
    }

    fn check(&self, plan: &TransmissionPlan) -> Result<()> {
        check_window(self.window, plan)
    }
}

/// DBICM-ID parameters: window size `W` and iteration cap `I'_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdConfig {
    pub window: usize,
    pub max_iters: usize,
}

impl IdConfig {
    pub fn new(window: usize, max_iters: usize) -> Result<Self> {
        if max_iters == 0 {
            return Err(invalid("detection-decoding iteration count must be at least 1"));
        }
        Ok(Self { window, max_iters })
    }

    fn check(&self, plan: &TransmissionPlan) -> Result<()> {
        check_window(self.window, plan)
    }
}

fn check_window(window: usize, plan: &TransmissionPlan) -> Result<()> {
    let lo = plan.t_max() + 1;
    let hi = plan.n_codewords();
    if window < lo || window > hi {
        return Err(invalid(format!("window {window} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Detection and decoding work done by a schedule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    /// Demapper sweeps over a whole frame. One sweep evaluates every
    /// constellation point once per symbol and yields LLRs for all target
    /// positions that share its prior set.
    pub demap_passes: u64,
    /// Constellation-point likelihood evaluations.
    pub point_evals: u64,
    /// BP decoder invocations.
    pub decode_calls: u64,
    /// BP iterations summed over all decoder invocations.
    pub bp_iterations: u64,
}

impl OpCounters {
    pub fn add(&mut self, other: &OpCounters) {
        self.demap_passes += other.demap_passes;
        self.point_evals += other.point_evals;
        self.decode_calls += other.decode_calls;
        self.bp_iterations += other.bp_iterations;
    }

    /// `point_evals == demap_passes * n * 2^m`.
    pub fn is_consistent(&self, n: usize, m: usize) -> bool {
        self.point_evals == (self.demap_passes * n as u64) << m
    }
}

/// One step of a schedule, recorded when tracing is enabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// A demapping sweep of `frame` for `targets`; `priors` lists the prior
    /// positions actually used.
    Demap { frame: usize, targets: Vec<usize>, priors: Vec<usize> },
    Decode { codeword: usize },
}

/// Everything a schedule needs besides the received frames.
#[derive(Debug, Clone)]
pub struct Receiver<'a> {
    code: &'a LdpcCode,
    constellation: &'a Constellation,
    plan: &'a TransmissionPlan,
    interleaver: &'a Interleaver,
    noise: NoiseModel,
    mode: DemapMode,
    bp_iters: usize,
    bp_algorithm: BpAlgorithm,
    trace: bool,
}

impl<'a> Receiver<'a> {
    pub fn new(
        code: &'a LdpcCode,
        constellation: &'a Constellation,
        plan: &'a TransmissionPlan,
        interleaver: &'a Interleaver,
        noise: NoiseModel,
    ) -> Result<Self> {
        if constellation.bits_per_symbol() != plan.m() {
            return Err(invalid("constellation order does not match the delay scheme length"));
        }
        if code.n() != plan.block_len() || interleaver.len() != code.n() {
            return Err(invalid("code, interleaver and plan block lengths disagree"));
        }
        Ok(Self {
            code,
            constellation,
            plan,
            interleaver,
            noise,
            mode: DemapMode::Exact,
            bp_iters: 50,
            bp_algorithm: BpAlgorithm::SumProduct,
            trace: false,
        })
    }

    pub fn with_demap_mode(mut self, mode: DemapMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_bp(mut self, iters: usize, algorithm: BpAlgorithm) -> Result<Self> {
        if iters == 0 {
            return Err(invalid("BP iteration budget must be at least 1"));
        }
        self.bp_iters = iters;
        self.bp_algorithm = algorithm;
        Ok(self)
    }

    /// Records a [`TraceEvent`] for every demapping sweep and decode.
    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn plan(&self) -> &TransmissionPlan {
        self.plan
    }

    pub fn code(&self) -> &LdpcCode {
        self.code
    }
}

/// Decoded information blocks and the work spent on them.
#[derive(Debug, Clone, PartialEq)]
pub struct RxOutput {
    pub info: Vec<Vec<Bit>>,
    /// Whether the final decode of each codeword satisfied every check.
    pub converged: Vec<bool>,
    pub counters: OpCounters,
    pub trace: Vec<TraceEvent>,
}

/// Mutable receiver state shared by all schedules.
struct State<'r, 'a> {
    rx: &'r Receiver<'a>,
    demapper: Demapper<'a>,
    frames: &'r [SymbolFrame],
    n: usize,
    /// `llr[frame][position]`: latest demapper output.
    llr: Vec<Vec<Vec<f64>>>,
    /// Latest extrinsic LLRs per codeword, transmitted bit order.
    ext: Vec<Option<Vec<f64>>>,
    info: Vec<Vec<Bit>>,
    converged: Vec<bool>,
    counters: OpCounters,
    trace: Vec<TraceEvent>,
}

impl<'r, 'a> State<'r, 'a> {
    fn new(rx: &'r Receiver<'a>, frames: &'r [SymbolFrame]) -> Result<Self> {
        let plan = rx.plan;
        if frames.len() != plan.slots() {
            return Err(invalid(format!("{} received frames for a {}-slot plan", frames.len(), plan.slots())));
        }
        if let Some(f) = frames.iter().find(|f| f.len() != plan.n()) {
            return Err(invalid(format!("received frame of {} symbols, expected {}", f.len(), plan.n())));
        }
        let c = plan.n_codewords();
        Ok(Self {
            rx,
            demapper: Demapper::new(rx.constellation, rx.noise, rx.mode),
            frames,
            n: plan.n(),
            llr: vec![vec![vec![0.0; plan.n()]; plan.m()]; plan.slots()],
            ext: vec![None; c],
            info: vec![Vec::new(); c],
            converged: vec![false; c],
            counters: OpCounters::default(),
            trace: Vec::new(),
        })
    }

    fn plan(&self) -> &'r TransmissionPlan {
        self.rx.plan
    }

    /// Demaps `frame` for `targets` with priors on `prior_positions` taken
    /// from the latest extrinsics: `+inf` for known fill, left out if the
    /// source codeword is still undecoded. Fill targets are dropped; nothing
    /// happens if no target remains.
    fn sweep(&mut self, frame: usize, targets: &[usize], prior_positions: &[usize]) {
        let plan = self.plan();
        let n = self.n;
        let targets: Vec<usize> = targets.iter().copied().filter(|&i| !plan.is_fill(frame, i)).collect();
        if targets.is_empty() {
            return;
        }
        let ext = &self.ext;
        let priors: Vec<(usize, PriorLlrs<'_>)> = prior_positions
            .iter()
            .filter_map(|&q| {
                if plan.is_fill(frame, q) {
                    return Some((q, PriorLlrs::Constant(f64::INFINITY)));
                }
                let k = plan.source_time(frame, q) as usize;
                ext[k].as_ref().map(|e| (q, PriorLlrs::Values(&e[q * n..(q + 1) * n])))
            })
            .collect();
        run_sweep(&self.demapper, &self.frames[frame].symbols, &targets, &priors, &mut self.llr[frame]);
        let used = priors.iter().map(|(q, _)| *q).collect();
        self.count_sweep(frame, targets, used);
    }

    /// Demaps `frame` for `targets` with externally supplied priors.
    fn sweep_with(&mut self, frame: usize, targets: &[usize], priors: &[(usize, PriorLlrs<'_>)]) {
        if targets.is_empty() {
            return;
        }
        run_sweep(&self.demapper, &self.frames[frame].symbols, targets, priors, &mut self.llr[frame]);
        self.count_sweep(frame, targets.to_vec(), priors.iter().map(|(q, _)| *q).collect());
    }

    fn count_sweep(&mut self, frame: usize, targets: Vec<usize>, priors: Vec<usize>) {
        self.counters.demap_passes += 1;
        self.counters.point_evals += self.demapper.evals_per_pass(self.n);
        if self.rx.trace {
            self.trace.push(TraceEvent::Demap { frame, targets, priors });
        }
    }

    /// Decodes codeword `k` from the current LLR slots and stores its
    /// extrinsics, hard information bits and convergence flag.
    fn decode(&mut self, k: usize) {
        let plan = self.plan();
        let n = self.n;
        let mut channel = Vec::with_capacity(plan.block_len());
        for i in 0..plan.m() {
            channel.extend_from_slice(&self.llr[plan.slot_of(k, i)][i]);
        }
        let rx = self.rx;
        let result = rx.code.decode(&rx.interleaver.deinterleave(&channel), rx.bp_iters, rx.bp_algorithm);
        debug_assert_eq!(result.extrinsic_llrs.len(), n * plan.m());
        self.ext[k] = Some(rx.interleaver.interleave(&result.extrinsic_llrs));
        self.info[k] = rx.code.extract_info(&result.hard_bits);
        self.converged[k] = result.converged;
        self.counters.decode_calls += 1;
        self.counters.bp_iterations += result.iterations_used as u64;
        if rx.trace {
            self.trace.push(TraceEvent::Decode { codeword: k });
        }
    }

    fn finish(self) -> RxOutput {
        RxOutput { info: self.info, converged: self.converged, counters: self.counters, trace: self.trace }
    }
}

fn run_sweep(
    demapper: &Demapper<'_>,
    y: &[num_complex::Complex64],
    targets: &[usize],
    priors: &[(usize, PriorLlrs<'_>)],
    slots: &mut [Vec<f64>],
) {
    let mut outs: Vec<Vec<f64>> = targets.iter().map(|&i| std::mem::take(&mut slots[i])).collect();
    {
        let mut views: Vec<&mut [f64]> = outs.iter_mut().map(Vec::as_mut_slice).collect();
        demapper.demap_frame(y, targets, priors, &mut views);
    }
    for (&i, v) in targets.iter().zip(outs) {
        slots[i] = v;
    }
}
