//! Monte Carlo BER/FER sweeps over an Eb/N0 grid.
//!
//! A trial is one full `T_n`-slot transmission: `T_n - T_max` random
//! information blocks are encoded, framed, mapped, sent over AWGN and
//! decoded by the selected schedule. Frame statistics count codewords.
//! Trials run on a worker pool and are merged in trial order, so the
//! stopping rule and every emitted number are independent of the worker
//! count.

mod channel;
mod csv;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

pub use channel::{awgn, ebn0_to_sigma2, RngPolicy};
pub use csv::{emit_csv, parse_csv, CsvRow, CSV_HEADER};

use crate::constellation::{Constellation, Modulation};
use crate::demapper::{DemapMode, NoiseModel};
use crate::error::{Error, Result};
use crate::framing::{spectral_efficiency, transmit, DelayScheme, Interleaver, TransmissionPlan};
use crate::ldpc::{regular_peg_code, BpAlgorithm, LdpcCode, ParityCheckMatrix};
use crate::schedulers::{OpCounters, Receiver, RxOutput, Scheme};
use crate::Bit;

/// Seed of the PEG construction behind `peg:` code sources.
pub const PEG_SEED: u64 = 0;

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Where the LDPC code comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSource {
    /// `(dv, dc)`-regular PEG code of length `n`.
    Peg { dv: usize, dc: usize, n: usize },
    Alist(PathBuf),
}

impl CodeSource {
    pub fn build(&self) -> Result<LdpcCode> {
        match self {
            CodeSource::Peg { dv, dc, n } => regular_peg_code(*dv, *dc, *n, PEG_SEED),
            CodeSource::Alist(path) => LdpcCode::new(ParityCheckMatrix::from_alist(&std::fs::read_to_string(path)?)?),
        }
    }
}

impl FromStr for CodeSource {
    type Err = Error;

    /// `peg:<dv>,<dc>,<N>` or a path to an alist file.
    fn from_str(s: &str) -> Result<Self> {
        let Some(params) = s.strip_prefix("peg:") else {
            return Ok(CodeSource::Alist(PathBuf::from(s)));
        };
        let v = params
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| config(format!("bad PEG parameters `{params}`")))?;
        match v[..] {
            [dv, dc, n] => Ok(CodeSource::Peg { dv, dc, n }),
            _ => Err(config(format!("expected peg:<dv>,<dc>,<N>, got `{s}`"))),
        }
    }
}

impl fmt::Display for CodeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSource::Peg { dv, dc, n } => write!(f, "peg:{dv},{dc},{n}"),
            CodeSource::Alist(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Parses `start:step:stop` (inclusive) or a single value. Grid points
/// are rounded to 1e-6 dB.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts = s
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| config(format!("bad Eb/N0 grid `{s}`")))?;
    let round = |x: f64| (x * 1e6).round() / 1e6;
    match parts[..] {
        [x] if x.is_finite() => Ok(vec![round(x)]),
        [start, step, stop] if start.is_finite() && stop.is_finite() && step > 0.0 && stop >= start => {
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| round(start + i as f64 * step)).collect())
        }
        _ => Err(config(format!("bad Eb/N0 grid `{s}` (expected start:step:stop with step > 0)"))),
    }
}

/// Full description of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub modulation: Modulation,
    pub delay: DelayScheme,
    pub code: CodeSource,
    pub tn: usize,
    pub window: usize,
    pub iters: usize,
    pub bp_iters: usize,
    pub ebn0_db: Vec<f64>,
    /// Cap on codewords per grid point.
    pub max_frames: u64,
    /// Codeword errors after which a grid point stops.
    pub min_error_frames: u64,
    pub seed: u64,
    pub demap: DemapMode,
    pub workers: usize,
}

impl SimConfig {
    /// Desk-scale defaults for `modulation`: `peg:3,6,1200`, `T_n = 101`,
    /// `W = 3`, five windowed iterations, 50 BP iterations.
    pub fn new(scheme: Scheme, modulation: Modulation, ebn0_db: Vec<f64>) -> Self {
        let delay = if scheme == Scheme::Bicm {
            DelayScheme::zeros(modulation.bits_per_symbol())
        } else {
            modulation.default_delay().parse().expect("built-in delay schemes parse")
        };
        Self {
            scheme,
            modulation,
            delay,
            code: CodeSource::Peg { dv: 3, dc: 6, n: 1200 },
            tn: 101,
            window: 3,
            iters: 5,
            bp_iters: 50,
            ebn0_db,
            max_frames: 100_000,
            min_error_frames: 100,
            seed: 1,
            demap: DemapMode::Exact,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebn0_db.is_empty() {
            return Err(config("Eb/N0 grid is empty"));
        }
        if self.min_error_frames == 0 || self.max_frames == 0 {
            return Err(config("frame limits must be at least 1"));
        }
        if self.workers == 0 || self.bp_iters == 0 || self.iters == 0 {
            return Err(config("workers, iteration counts and BP budget must be at least 1"));
        }
        if self.delay.len() != self.modulation.bits_per_symbol() {
            return Err(config(format!(
                "delay scheme `{}` has {} entries but {} carries {} bits per symbol",
                self.delay,
                self.delay.len(),
                self.modulation,
                self.modulation.bits_per_symbol()
            )));
        }
        if self.tn <= self.delay.t_max() {
            return Err(config(format!("T_n = {} must exceed T_max = {}", self.tn, self.delay.t_max())));
        }
        if self.scheme == Scheme::Bicm && self.delay.t_max() != 0 {
            return Err(config("bicm needs an all-zero delay scheme"));
        }
        Ok(())
    }
}

/// Code, constellation, plan and interleaver shared by every trial.
#[derive(Debug, Clone)]
pub struct Link {
    pub code: LdpcCode,
    pub constellation: Constellation,
    pub plan: TransmissionPlan,
    pub interleaver: Interleaver,
    /// Information bits per channel symbol.
    pub eta: f64,
}

/// What one trial sent and what the receiver returned.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub info: Vec<Vec<Bit>>,
    pub output: RxOutput,
}

impl TrialOutcome {
    pub fn bit_errors(&self) -> u64 {
        self.info
            .iter()
            .zip(&self.output.info)
            .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count() as u64)
            .sum()
    }

    pub fn frame_errors(&self) -> u64 {
        self.info.iter().zip(&self.output.info).filter(|(a, b)| a != b).count() as u64
    }
}

impl Link {
    /// PEG codes are used as constructed; alist codes go through a random
    /// interleaver drawn from the configuration seed.
    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let code = cfg.code.build()?;
        let constellation = cfg.modulation.build()?;
        let plan = TransmissionPlan::new(code.n(), cfg.tn, cfg.delay.clone()).map_err(|e| config(e.to_string()))?;
        let interleaver = match cfg.code {
            CodeSource::Peg { .. } => Interleaver::identity(code.n()),
            CodeSource::Alist(_) => Interleaver::random(code.n(), cfg.seed),
        };
        Self::new(code, constellation, plan, interleaver)
    }

    pub fn new(
        code: LdpcCode,
        constellation: Constellation,
        plan: TransmissionPlan,
        interleaver: Interleaver,
    ) -> Result<Self> {
        let eta = spectral_efficiency(plan.m(), code.rate(), plan.slots(), plan.t_max())?;
        Ok(Self { code, constellation, plan, interleaver, eta })
    }

    /// Runs one transmission drawn from `rng` through `scheme`.
    #[allow(clippy::too_many_arguments)]
    pub fn trial<R: Rng>(
        &self,
        rng: &mut R,
        noise: NoiseModel,
        scheme: Scheme,
        window: usize,
        iters: usize,
        bp_iters: usize,
        demap: DemapMode,
    ) -> Result<TrialOutcome> {
        let info: Vec<Vec<Bit>> = (0..self.plan.n_codewords())
            .map(|_| (0..self.code.k()).map(|_| rng.gen_range(0..2)).collect())
            .collect();
        let tx = transmit(&info, &self.code, &self.constellation, &self.plan, &self.interleaver)?;
        let frames: Vec<_> = tx.frames.iter().map(|f| awgn(f, &noise, rng)).collect();
        let rx = Receiver::new(&self.code, &self.constellation, &self.plan, &self.interleaver, noise)?
            .with_demap_mode(demap)
            .with_bp(bp_iters, BpAlgorithm::SumProduct)?;
        let output = scheme.run(&rx, &frames, &tx.codewords, window, iters)?;
        Ok(TrialOutcome { info, output })
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub modulation: Modulation,
    pub delay: DelayScheme,
    pub n: usize,
    pub k: usize,
    pub tn: usize,
    pub window: usize,
    pub iters: usize,
    pub ebn0_db: f64,
    pub eta: f64,
    /// Codewords decoded.
    pub frames: u64,
    pub bit_errors: u64,
    /// Codewords with at least one information-bit error.
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    /// BP iterations per decoder invocation.
    pub mean_bp_iters: f64,
    pub counters: OpCounters,
    /// The point stopped at `max_frames` before reaching
    /// `min_error_frames`.
    pub truncated: bool,
    pub seed: u64,
}

/// Runs every grid point of `cfg` and returns the records in grid order.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<SweepRecord>> {
    let link = Link::from_config(cfg)?;
    run_sweep_on(cfg, &link)
}

/// [`run_sweep`] with a prebuilt link.
pub fn run_sweep_on(cfg: &SimConfig, link: &Link) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| cfg.ebn0_db.iter().enumerate().map(|(i, &db)| run_point(cfg, link, i, db)).collect())
}

fn run_point(cfg: &SimConfig, link: &Link, point: usize, ebn0_db: f64) -> Result<SweepRecord> {
    let noise = ebn0_to_sigma2(ebn0_db, link.eta)?;
    let policy = RngPolicy::new(cfg.seed);
    let per_trial = link.plan.n_codewords() as u64;
    let batch = (2 * cfg.workers) as u64;

    let (mut frames, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);
    let mut counters = OpCounters::default();
    let mut next_trial = 0u64;
    'outer: loop {
        let outcomes: Vec<Result<TrialOutcome>> = (next_trial..next_trial + batch)
            .into_par_iter()
            .map(|trial| {
                let mut rng = policy.stream(point, trial);
                link.trial(&mut rng, noise, cfg.scheme, cfg.window, cfg.iters, cfg.bp_iters, cfg.demap)
            })
            .collect();
        next_trial += batch;
        for outcome in outcomes {
            let outcome = outcome?;
            frames += per_trial;
            bit_errors += outcome.bit_errors();
            frame_errors += outcome.frame_errors();
            counters.add(&outcome.output.counters);
            if frame_errors >= cfg.min_error_frames || frames >= cfg.max_frames {
                break 'outer;
            }
        }
    }
    let k = link.code.k();
    Ok(SweepRecord {
        scheme: cfg.scheme,
        modulation: cfg.modulation,
        delay: cfg.delay.clone(),
        n: link.code.n(),
        k,
        tn: cfg.tn,
        window: cfg.window,
        iters: cfg.iters,
        ebn0_db,
        eta: link.eta,
        frames,
        bit_errors,
        frame_errors,
        ber: bit_errors as f64 / (frames * k as u64) as f64,
        fer: frame_errors as f64 / frames as f64,
        mean_bp_iters: counters.bp_iterations as f64 / counters.decode_calls.max(1) as f64,
        counters,
        truncated: frame_errors < cfg.min_error_frames,
        seed: cfg.seed,
    })
}
