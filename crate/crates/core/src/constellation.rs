//! Labeled signal constellations and the sub-block to symbol mapper.
//!
//! Labels are stored as integers whose most significant bit is label
//! position 0, so the label `0b1001` of a 16-point set reads as the bit
//! string `1001` in position order. Position `i` of every symbol label is
//! fed by sub-block `i`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{framing, invalid, Error, Result};
use crate::Bit;

/// A 2^m-ary complex signal set with a bijective bit labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    bits_per_symbol: usize,
    /// `points[label]` is the point carrying `label`.
    points: Vec<Complex64>,
}

/// The symbols transmitted in one time slot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymbolFrame {
    pub symbols: Vec<Complex64>,
}

impl SymbolFrame {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Code-rate tags for which the DVB-S2 32-APSK ring ratios are tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApskRate {
    R2_3,
    R3_4,
    R4_5,
    R5_6,
    R8_9,
    R9_10,
}

impl ApskRate {
    /// Ring radius ratios (R2/R1, R3/R1) for the 4+12+16 APSK rings.
    ///
    /// DVB-S2 does not list 32-APSK at rate 2/3; that tag reuses the 3/4
    /// entry, the lowest rate the table covers.
    pub fn ring_ratios(self) -> (f64, f64) {
        match self {
            ApskRate::R2_3 | ApskRate::R3_4 => (2.84, 5.27),
            ApskRate::R4_5 => (2.72, 4.87),
            ApskRate::R5_6 => (2.64, 4.64),
            ApskRate::R8_9 => (2.54, 4.33),
            ApskRate::R9_10 => (2.53, 4.30),
        }
    }
}

impl FromStr for ApskRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "2/3" => Ok(ApskRate::R2_3),
            "3/4" => Ok(ApskRate::R3_4),
            "4/5" => Ok(ApskRate::R4_5),
            "5/6" => Ok(ApskRate::R5_6),
            "8/9" => Ok(ApskRate::R8_9),
            "9/10" => Ok(ApskRate::R9_10),
            other => Err(invalid(format!("unsupported 32-APSK code rate `{other}`"))),
        }
    }
}

/// Ring index (0 inner, 1 middle, 2 outer) and phase in units of pi/12 or
/// pi/8, per label, following the DVB-S2 32-APSK bit mapping figure.
const APSK32_LAYOUT: [(u8, f64); 32] = [
    (1, PI / 4.0),
    (1, 5.0 * PI / 12.0),
    (1, -PI / 4.0),
    (1, -5.0 * PI / 12.0),
    (1, 3.0 * PI / 4.0),
    (1, 7.0 * PI / 12.0),
    (1, -3.0 * PI / 4.0),
    (1, -7.0 * PI / 12.0),
    (2, PI / 8.0),
    (2, 3.0 * PI / 8.0),
    (2, -PI / 4.0),
    (2, -PI / 2.0),
    (2, 3.0 * PI / 4.0),
    (2, PI / 2.0),
    (2, -7.0 * PI / 8.0),
    (2, -5.0 * PI / 8.0),
    (1, PI / 12.0),
    (0, PI / 4.0),
    (1, -PI / 12.0),
    (0, -PI / 4.0),
    (1, 11.0 * PI / 12.0),
    (0, 3.0 * PI / 4.0),
    (1, -11.0 * PI / 12.0),
    (0, -3.0 * PI / 4.0),
    (2, 0.0),
    (2, PI / 4.0),
    (2, -PI / 8.0),
    (2, -3.0 * PI / 8.0),
    (2, 7.0 * PI / 8.0),
    (2, 5.0 * PI / 8.0),
    (2, PI),
    (2, -3.0 * PI / 4.0),
];

impl Constellation {
    /// Builds a constellation from points indexed by label, normalizing the
    /// average energy to one.
    pub fn from_points(points: Vec<Complex64>) -> Result<Self> {
        let order = points.len();
        if order < 2 || !order.is_power_of_two() {
            return Err(invalid(format!("constellation order {order} is not a power of two >= 2")));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(invalid("constellation points must be finite"));
        }
        for (a, pa) in points.iter().enumerate() {
            if points[a + 1..].iter().any(|pb| pb == pa) {
                return Err(invalid("constellation points must be distinct"));
            }
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let scale = energy.sqrt().recip();
        Ok(Self {
            bits_per_symbol: order.trailing_zeros() as usize,
            points: points.into_iter().map(|p| p * scale).collect(),
        })
    }

    /// Binary antipodal signaling: bit 0 maps to +1, bit 1 to -1.
    pub fn binary_antipodal() -> Self {
        Self {
            bits_per_symbol: 1,
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        }
    }

    /// Square QAM with a reflected Gray code on each axis.
    ///
    /// Label positions `0..m/2` select the in-phase level (most significant
    /// first) and positions `m/2..m` the quadrature level.
    pub fn gray_qam(m: usize) -> Result<Self> {
        if m < 2 || !m.is_multiple_of(2) || m > 12 {
            return Err(invalid(format!("Gray QAM needs an even m in 2..=12, got {m}")));
        }
        let half = m / 2;
        let levels = 1usize << half;
        let axis = |gray: usize| {
            let mut idx = gray;
            let mut shift = gray >> 1;
            while shift != 0 {
                idx ^= shift;
                shift >>= 1;
            }
            (2 * idx) as f64 - (levels - 1) as f64
        };
        let points = (0..1usize << m)
            .map(|label| {
                let i_bits = label >> half;
                let q_bits = label & (levels - 1);
                Complex64::new(axis(i_bits), axis(q_bits))
            })
            .collect();
        Self::from_points(points)
    }

    /// The DVB-S2 4+12+16 32-APSK constellation for the given code rate.
    pub fn apsk32_dvbs2(rate: ApskRate) -> Result<Self> {
        let (g1, g2) = rate.ring_ratios();
        let radii = [1.0, g1, g2];
        let points = APSK32_LAYOUT
            .iter()
            .map(|&(ring, phase)| Complex64::from_polar(radii[ring as usize], phase))
            .collect();
        Self::from_points(points)
    }

    /// Returns a copy whose label position `i` carries what position
    /// `perm[i]` carried in `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.bits_per_symbol;
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(invalid(format!("{perm:?} is not a permutation of 0..{m}")));
        }
        let mut points = vec![Complex64::default(); self.order()];
        for (new_label, point) in points.iter_mut().enumerate() {
            let old_label = perm.iter().enumerate().fold(0usize, |acc, (i, &p)| {
                acc | (self.label_bit(new_label, i) as usize) << (m - 1 - p)
            });
            *point = self.points[old_label];
        }
        Ok(Self { bits_per_symbol: m, points })
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Bit at label position `pos` of `label`.
    #[inline]
    pub fn label_bit(&self, label: usize, pos: usize) -> Bit {
        ((label >> (self.bits_per_symbol - 1 - pos)) & 1) as Bit
    }

    /// Packs per-position bits into a label.
    pub fn label_of(&self, bits: &[Bit]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (a, pa) in self.points.iter().enumerate() {
            for pb in &self.points[a + 1..] {
                best = best.min((pa - pb).norm());
            }
        }
        best
    }

    /// Maps `m` equal-length sub-block bit sequences onto symbols: symbol `j`
    /// carries the label whose position-`i` bit is bit `j` of sub-block `i`.
    pub fn map_symbols<B: AsRef<[Bit]>>(&self, subblocks: &[B]) -> Result<SymbolFrame> {
        let m = self.bits_per_symbol;
        if subblocks.len() != m {
            return Err(framing(format!("expected {m} sub-blocks, got {}", subblocks.len())));
        }
        let n = subblocks[0].as_ref().len();
        if subblocks.iter().any(|s| s.as_ref().len() != n) {
            return Err(framing("sub-blocks differ in length"));
        }
        let symbols = (0..n)
            .map(|j| {
                let label = subblocks
                    .iter()
                    .fold(0usize, |acc, s| (acc << 1) | (s.as_ref()[j] & 1) as usize);
                self.points[label]
            })
            .collect();
        Ok(SymbolFrame { symbols })
    }

    /// CSV dump with columns `label_bits,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label_bits,re,im\n");
        for (label, p) in self.points.iter().enumerate() {
            let bits: String = (0..self.bits_per_symbol)
                .map(|i| if self.label_bit(label, i) == 1 { '1' } else { '0' })
                .collect();
            out.push_str(&format!("{bits},{:.12},{:.12}\n", p.re, p.im));
        }
        out
    }
}

/// Modulation selector used by the CLI and the sweep configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
    Apsk32,
}

impl Modulation {
    pub fn build(self) -> Result<Constellation> {
        match self {
            Modulation::Qpsk => Constellation::gray_qam(2),
            Modulation::Qam16 => Constellation::gray_qam(4),
            Modulation::Qam64 => Constellation::gray_qam(6),
            Modulation::Apsk32 => Constellation::apsk32_dvbs2(ApskRate::R2_3),
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
            Modulation::Apsk32 => 5,
        }
    }

    /// Delay scheme used with this modulation unless overridden.
    pub fn default_delay(self) -> &'static str {
        match self {
            Modulation::Qpsk => "0,1",
            Modulation::Qam16 => "0,1,0,1",
            Modulation::Qam64 => "0,0,1,0,0,1",
            Modulation::Apsk32 => "0,0,1,0,1",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "qam16",
            Modulation::Qam64 => "qam64",
            Modulation::Apsk32 => "apsk32",
        })
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qpsk" => Ok(Modulation::Qpsk),
            "qam16" => Ok(Modulation::Qam16),
            "qam64" => Ok(Modulation::Qam64),
            "apsk32" => Ok(Modulation::Apsk32),
            other => Err(invalid(format!("unknown modulation `{other}`"))),
        }
    }
}
