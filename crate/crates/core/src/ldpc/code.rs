use super::ParityCheckMatrix;
use crate::error::{framing, invalid, Result};
use crate::Bit;

/// Messages are saturated at this magnitude inside the decoder.
pub const LLR_CLIP: f64 = 38.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BpAlgorithm {
    /// Exact tanh-rule check update.
    #[default]
    SumProduct,
    MinSum,
}

/// Output of one belief-propagation decoder call.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub hard_bits: Vec<Bit>,
    pub posterior_llrs: Vec<f64>,
    /// `posterior_llrs - channel_llrs`, elementwise.
    pub extrinsic_llrs: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

#[derive(Debug, Clone)]
enum Encoder {
    /// Reduced row-echelon rows, one per parity (pivot) column.
    Dense { words: usize, rows: Vec<(usize, Vec<u64>)> },
    /// Information in columns `0..k`, parity in a dual-diagonal staircase.
    Staircase,
}

/// An LDPC code: parity-check matrix, systematic encoder, and the flattened
/// Tanner graph used by the decoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: ParityCheckMatrix,
    encoder: Encoder,
    info_positions: Vec<usize>,
    // Edges grouped by check: check c owns edges check_ptr[c]..check_ptr[c+1].
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    // For variable v, var_edges[var_ptr[v]..var_ptr[v+1]] are its edge ids.
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
}

impl LdpcCode {
    pub fn new(h: ParityCheckMatrix) -> Result<Self> {
        let n = h.n_vars();
        if n == 0 || h.n_checks() == 0 {
            return Err(invalid("code needs at least one variable and one check"));
        }
        let (encoder, info_positions) = match staircase_info_len(&h) {
            Some(k) => (Encoder::Staircase, (0..k).collect()),
            None => dense_encoder(&h),
        };

        let mut check_ptr = Vec::with_capacity(h.n_checks() + 1);
        let mut edge_var = Vec::with_capacity(h.n_edges());
        check_ptr.push(0);
        for row in h.check_lists() {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len());
        }
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, &v) in edge_var.iter().enumerate() {
            per_var[v].push(e);
        }
        let mut var_ptr = Vec::with_capacity(n + 1);
        let mut var_edges = Vec::with_capacity(edge_var.len());
        var_ptr.push(0);
        for edges in per_var {
            var_edges.extend(edges);
            var_ptr.push(var_edges.len());
        }

        Ok(Self { h, encoder, info_positions, check_ptr, edge_var, var_ptr, var_edges })
    }

    pub fn parity_check(&self) -> &ParityCheckMatrix {
        &self.h
    }

    /// Block length N.
    pub fn n(&self) -> usize {
        self.h.n_vars()
    }

    /// Information length K.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Codeword positions carrying the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn extract_info(&self, codeword: &[Bit]) -> Vec<Bit> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }

    pub fn syndrome(&self, bits: &[Bit]) -> Result<Vec<Bit>> {
        self.h.syndrome(bits)
    }

    /// Systematic encoding of `u` (K bits) into an N-bit codeword.
    pub fn encode(&self, u: &[Bit]) -> Result<Vec<Bit>> {
        if u.len() != self.k() {
            return Err(framing(format!("information block has {} bits, code expects {}", u.len(), self.k())));
        }
        let n = self.n();
        match &self.encoder {
            Encoder::Dense { words, rows } => {
                let mut packed = vec![0u64; *words];
                for (&pos, &b) in self.info_positions.iter().zip(u) {
                    packed[pos / 64] |= ((b & 1) as u64) << (pos % 64);
                }
                for (pivot, row) in rows {
                    let parity = row
                        .iter()
                        .zip(&packed)
                        .fold(0u32, |acc, (r, c)| acc ^ (r & c).count_ones())
                        & 1;
                    packed[pivot / 64] |= (parity as u64) << (pivot % 64);
                }
                Ok((0..n).map(|i| ((packed[i / 64] >> (i % 64)) & 1) as Bit).collect())
            }
            Encoder::Staircase => {
                let k = self.k();
                let mut c = vec![0 as Bit; n];
                c[..k].copy_from_slice(u);
                let mut prev = 0;
                for (j, row) in self.h.check_lists().iter().enumerate() {
                    let info = row.iter().filter(|&&v| v < k).fold(0, |acc, &v| acc ^ (u[v] & 1));
                    prev ^= info;
                    c[k + j] = prev;
                }
                Ok(c)
            }
        }
    }

    /// Flooding belief propagation. Stops once the hard decision satisfies
    /// every check (after at least one iteration).
    ///
    /// Channel LLRs are saturated at [`LLR_CLIP`] for message passing; the
    /// posterior is the unsaturated input plus the summed check messages.
    pub fn decode(&self, channel_llrs: &[f64], max_iters: usize, algo: BpAlgorithm) -> DecodeResult {
        let n = self.n();
        assert_eq!(channel_llrs.len(), n, "LLR vector length must equal N");
        let n_edges = self.edge_var.len();
        let input: Vec<f64> = channel_llrs.iter().map(|&l| clip(l)).collect();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| input[v]).collect();
        let mut c2v = vec![0.0; n_edges];
        let mut extrinsic = vec![0.0; n];
        let mut posterior = channel_llrs.to_vec();
        let mut hard = vec![0 as Bit; n];
        let mut scratch = Vec::new();
        let mut converged = false;
        let mut iterations = 0;

        for _ in 0..max_iters {
            iterations += 1;
            for c in 0..self.h.n_checks() {
                let range = self.check_ptr[c]..self.check_ptr[c + 1];
                match algo {
                    BpAlgorithm::SumProduct => tanh_rule(&v2c[range.clone()], &mut c2v[range], &mut scratch),
                    BpAlgorithm::MinSum => min_sum(&v2c[range.clone()], &mut c2v[range]),
                }
            }
            let mut undecided = false;
            for v in 0..n {
                let edges = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
                let sum: f64 = edges.iter().map(|&e| c2v[e]).sum();
                let total = input[v] + sum;
                for &e in edges {
                    v2c[e] = clip(total - c2v[e]);
                }
                extrinsic[v] = sum;
                posterior[v] = channel_llrs[v] + sum;
                hard[v] = (posterior[v] < 0.0) as Bit;
                undecided |= posterior[v] == 0.0;
            }
            if !undecided && self.satisfies_checks(&hard) {
                converged = true;
                break;
            }
        }
        DecodeResult {
            hard_bits: hard,
            posterior_llrs: posterior,
            extrinsic_llrs: extrinsic,
            converged,
            iterations_used: iterations,
        }
    }
}

impl LdpcCode {
    fn satisfies_checks(&self, bits: &[Bit]) -> bool {
        self.check_ptr
            .windows(2)
            .all(|w| self.edge_var[w[0]..w[1]].iter().fold(0, |acc, &v| acc ^ bits[v]) == 0)
    }
}

#[inline]
fn clip(x: f64) -> f64 {
    x.clamp(-LLR_CLIP, LLR_CLIP)
}

/// Sum-product check update: each output is `2 atanh` of the product of
/// `tanh(x/2)` over the other inputs.
fn tanh_rule(incoming: &[f64], outgoing: &mut [f64], scratch: &mut Vec<f64>) {
    let d = incoming.len();
    scratch.clear();
    scratch.extend(incoming.iter().map(|&x| half_tanh(x)));
    // Backward products stored in `outgoing`, forward product carried along.
    let mut acc = 1.0;
    for i in (0..d).rev() {
        outgoing[i] = acc;
        acc *= scratch[i];
    }
    let mut fwd = 1.0;
    for i in 0..d {
        let p = fwd * outgoing[i];
        outgoing[i] = clip(two_atanh(p));
        fwd *= scratch[i];
    }
}

/// `tanh(x / 2)`.
#[inline]
fn half_tanh(x: f64) -> f64 {
    (1.0 - 2.0 / (x.abs().exp() + 1.0)).copysign(x)
}

/// `2 atanh(p)`, infinite at `|p| = 1`.
#[inline]
fn two_atanh(p: f64) -> f64 {
    let a = p.abs();
    ((1.0 + a) / (1.0 - a)).ln().copysign(p)
}

fn min_sum(incoming: &[f64], outgoing: &mut [f64]) {
    let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, 0);
    let mut sign = 1.0;
    for (i, &x) in incoming.iter().enumerate() {
        let a = x.abs();
        if x < 0.0 {
            sign = -sign;
        }
        if a < min1 {
            min2 = min1;
            min1 = a;
            arg = i;
        } else if a < min2 {
            min2 = a;
        }
    }
    for (i, (out, &x)) in outgoing.iter_mut().zip(incoming).enumerate() {
        let mag = if i == arg { min2 } else { min1 };
        let s = if x < 0.0 { -sign } else { sign };
        *out = clip(s * mag);
    }
}

/// Returns K when columns `K..N` form a dual-diagonal staircase: column
/// `K + j` touches checks `j` and `j + 1`, the last column only check
/// `M - 1`.
fn staircase_info_len(h: &ParityCheckMatrix) -> Option<usize> {
    let (n, m) = (h.n_vars(), h.n_checks());
    if m >= n {
        return None;
    }
    let k = n - m;
    for j in 0..m {
        let col = h.var_neighbors(k + j);
        let ok = if j + 1 < m { col == [j, j + 1] } else { col == [j] };
        if !ok {
            return None;
        }
    }
    Some(k)
}

/// Gaussian elimination over GF(2), scanning columns from the right so
/// that parity lands at the end of the word where possible.
fn dense_encoder(h: &ParityCheckMatrix) -> (Encoder, Vec<usize>) {
    let n = h.n_vars();
    let words = n.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = h
        .check_lists()
        .iter()
        .map(|row| {
            let mut w = vec![0u64; words];
            for &v in row {
                w[v / 64] |= 1 << (v % 64);
            }
            w
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in (0..n).rev() {
        let (word, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][word] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[word] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let info = (0..n).filter(|&i| !is_pivot[i]).collect();
    let rows = pivots.into_iter().zip(rows).collect();
    (Encoder::Dense { words, rows }, info)
}
