//! DBICM transmit-side framing: sub-block partitioning, the per-position
//! delay line, known-bit fill at start-up and teardown, and spectral
//! efficiency accounting.
//!
//! A plan of `T_n` slots carries `T_n - T_max` codewords. At slot `t`,
//! label position `i` carries sub-block `i` of codeword `t - T_i`; when that
//! codeword does not exist (before the first or after the last) the
//! position carries all-zero known fill.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constellation::{Constellation, SymbolFrame};
use crate::error::{framing, invalid, Error, Result};
use crate::ldpc::LdpcCode;
use crate::Bit;

/// Per-label-position delays `T = [T_0, ..., T_{m-1}]` in time slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DelayScheme {
    delays: Vec<usize>,
}

impl DelayScheme {
    /// The smallest delay must be zero.
    pub fn new(delays: Vec<usize>) -> Result<Self> {
        match delays.iter().min() {
            None => Err(invalid("delay scheme is empty")),
            Some(&min) if min != 0 => Err(invalid(format!("minimum delay must be 0, got {min}"))),
            Some(_) => Ok(Self { delays }),
        }
    }

    /// All-zero delays: plain BICM.
    pub fn zeros(m: usize) -> Self {
        Self { delays: vec![0; m] }
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    pub fn t_max(&self) -> usize {
        self.delays.iter().copied().max().unwrap_or(0)
    }

    pub fn delay(&self, position: usize) -> usize {
        self.delays[position]
    }

    pub fn is_delayed(&self, position: usize) -> bool {
        self.delays[position] > 0
    }

    pub fn delayed_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_delayed(i)).collect()
    }

    pub fn undelayed_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_delayed(i)).collect()
    }
}

impl FromStr for DelayScheme {
    type Err = Error;

    /// Comma-separated integers, e.g. `0,1,0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let delays = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| invalid(format!("bad delay `{}` in `{s}`", tok.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(delays)
    }
}

impl fmt::Display for DelayScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.delays.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Dimensions of one DBICM transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionPlan {
    slots: usize,
    n: usize,
    scheme: DelayScheme,
}

impl TransmissionPlan {
    /// `block_len` is the codeword length N; `slots` is T_n.
    pub fn new(block_len: usize, slots: usize, scheme: DelayScheme) -> Result<Self> {
        let m = scheme.len();
        if block_len == 0 || !block_len.is_multiple_of(m) {
            return Err(framing(format!("block length {block_len} is not a positive multiple of m = {m}")));
        }
        if slots <= scheme.t_max() {
            return Err(invalid(format!("T_n = {slots} must exceed T_max = {}", scheme.t_max())));
        }
        Ok(Self { slots, n: block_len / m, scheme })
    }

    /// Number of transmitted time slots, T_n.
    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn m(&self) -> usize {
        self.scheme.len()
    }

    /// Sub-block length (symbols per slot).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_len(&self) -> usize {
        self.n * self.m()
    }

    pub fn scheme(&self) -> &DelayScheme {
        &self.scheme
    }

    pub fn t_max(&self) -> usize {
        self.scheme.t_max()
    }

    /// Codewords carried by the plan: `T_n - T_max`.
    pub fn n_codewords(&self) -> usize {
        self.slots - self.t_max()
    }

    /// Codeword whose sub-block `position` is sent in slot `t`.
    pub fn source_time(&self, t: usize, position: usize) -> isize {
        t as isize - self.scheme.delay(position) as isize
    }

    /// True when slot `t`, `position` carries known fill.
    pub fn is_fill(&self, t: usize, position: usize) -> bool {
        let s = self.source_time(t, position);
        s < 0 || s >= self.n_codewords() as isize
    }

    /// Slot in which sub-block `position` of codeword `k` is sent.
    pub fn slot_of(&self, k: usize, position: usize) -> usize {
        k + self.scheme.delay(position)
    }
}

/// Splits a codeword into `m` consecutive sub-blocks of `N / m` bits.
pub fn partition(codeword: &[Bit], m: usize) -> Result<Vec<Vec<Bit>>> {
    if m == 0 || !codeword.len().is_multiple_of(m) {
        return Err(framing(format!("length {} is not divisible by m = {m}", codeword.len())));
    }
    Ok(codeword.chunks(codeword.len() / m).map(<[Bit]>::to_vec).collect())
}

/// One label position of a slot's group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubBlockSlot {
    pub source_time: isize,
    pub bits: Vec<Bit>,
    pub known: bool,
}

/// The `m` sub-blocks mapped together in one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubBlockGroup {
    pub positions: Vec<SubBlockSlot>,
}

impl SubBlockGroup {
    pub fn bit_rows(&self) -> Vec<&[Bit]> {
        self.positions.iter().map(|p| p.bits.as_slice()).collect()
    }
}

/// Sliding buffer of the most recent `T_max + 1` partitioned codewords.
#[derive(Debug, Clone)]
pub struct CodewordStore {
    capacity: usize,
    entries: VecDeque<(usize, Vec<Vec<Bit>>)>,
}

impl CodewordStore {
    pub fn new(plan: &TransmissionPlan) -> Self {
        Self { capacity: plan.t_max() + 1, entries: VecDeque::new() }
    }

    /// Stores the sub-blocks of codeword `time`, evicting the oldest entry
    /// once full.
    pub fn push(&mut self, time: usize, subblocks: Vec<Vec<Bit>>) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((time, subblocks));
    }

    pub fn get(&self, time: usize) -> Option<&[Vec<Bit>]> {
        self.entries.iter().find(|(t, _)| *t == time).map(|(_, s)| s.as_slice())
    }
}

/// Assembles the sub-blocks transmitted in slot `t`.
pub fn group_at(t: usize, plan: &TransmissionPlan, store: &CodewordStore) -> Result<SubBlockGroup> {
    if t >= plan.slots() {
        return Err(framing(format!("slot {t} outside 0..{}", plan.slots())));
    }
    let positions = (0..plan.m())
        .map(|i| {
            let source_time = plan.source_time(t, i);
            if plan.is_fill(t, i) {
                return Ok(SubBlockSlot { source_time, bits: vec![0; plan.n()], known: true });
            }
            let blocks = store
                .get(source_time as usize)
                .ok_or_else(|| framing(format!("codeword {source_time} not buffered for slot {t}")))?;
            Ok(SubBlockSlot { source_time, bits: blocks[i].clone(), known: false })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubBlockGroup { positions })
}

/// Information bits per channel symbol: `m R (T_n - T_max) / T_n`.
pub fn spectral_efficiency(m: usize, rate: f64, t_n: usize, t_max: usize) -> Result<f64> {
    if t_n <= t_max {
        return Err(invalid(format!("T_n = {t_n} must exceed T_max = {t_max}")));
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(invalid(format!("code rate {rate} outside (0, 1]")));
    }
    Ok(m as f64 * rate * (t_n - t_max) as f64 / t_n as f64)
}

/// Bit permutation between encoder output and transmitted codeword:
/// `c[i] = v[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn identity(len: usize) -> Self {
        Self { perm: (0..len).collect() }
    }

    /// Uniformly random permutation drawn from `seed`.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<T: Copy>(&self, v: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| v[p]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, c: &[T]) -> Vec<T> {
        let mut v = vec![T::default(); c.len()];
        for (&p, &x) in self.perm.iter().zip(c) {
            v[p] = x;
        }
        v
    }
}

/// Transmitted codewords (after interleaving) and the mapped slots.
#[derive(Debug, Clone)]
pub struct Transmission {
    pub codewords: Vec<Vec<Bit>>,
    pub frames: Vec<SymbolFrame>,
}

/// Encode, interleave, partition, delay and map: one `SymbolFrame` per slot.
pub fn transmit(
    info_blocks: &[Vec<Bit>],
    code: &LdpcCode,
    constellation: &Constellation,
    plan: &TransmissionPlan,
    interleaver: &Interleaver,
) -> Result<Transmission> {
    if info_blocks.len() != plan.n_codewords() {
        return Err(framing(format!(
            "{} information blocks for a plan carrying {} codewords",
            info_blocks.len(),
            plan.n_codewords()
        )));
    }
    if constellation.bits_per_symbol() != plan.m() || code.n() != plan.block_len() || interleaver.len() != code.n()
    {
        return Err(invalid("code, constellation, interleaver and plan dimensions disagree"));
    }
    let mut codewords = Vec::with_capacity(info_blocks.len());
    let mut frames = Vec::with_capacity(plan.slots());
    let mut store = CodewordStore::new(plan);
    for t in 0..plan.slots() {
        if let Some(u) = info_blocks.get(t) {
            let c = interleaver.interleave(&code.encode(u)?);
            store.push(t, partition(&c, plan.m())?);
            codewords.push(c);
        }
        let group = group_at(t, plan, &store)?;
        frames.push(constellation.map_symbols(&group.bit_rows())?);
    }
    Ok(Transmission { codewords, frames })
}

/// [`transmit`], keeping only the symbol frames.
pub fn transmit_stream(
    info_blocks: &[Vec<Bit>],
    code: &LdpcCode,
    constellation: &Constellation,
    plan: &TransmissionPlan,
    interleaver: &Interleaver,
) -> Result<Vec<SymbolFrame>> {
    transmit(info_blocks, code, constellation, plan, interleaver).map(|t| t.frames)
}
