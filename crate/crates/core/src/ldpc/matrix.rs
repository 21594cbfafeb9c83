use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::Bit;

/// Sparse binary parity-check matrix kept as mutually consistent check and
/// variable adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    check_adj: Vec<Vec<usize>>,
    var_adj: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-check variable lists (0-based).
    pub fn from_check_lists(n_vars: usize, check_adj: Vec<Vec<usize>>) -> Result<Self> {
        let mut var_adj = vec![Vec::new(); n_vars];
        let mut check_adj = check_adj;
        for (c, row) in check_adj.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("check {c} lists a variable twice")));
            }
            for &v in row.iter() {
                if v >= n_vars {
                    return Err(invalid(format!("check {c} references variable {v} >= {n_vars}")));
                }
                var_adj[v].push(c);
            }
        }
        Ok(Self { check_adj, var_adj })
    }

    /// Builds a matrix from per-variable check lists (0-based).
    pub fn from_var_lists(n_checks: usize, var_adj: Vec<Vec<usize>>) -> Result<Self> {
        let mut check_adj = vec![Vec::new(); n_checks];
        for (v, col) in var_adj.iter().enumerate() {
            for &c in col {
                if c >= n_checks {
                    return Err(invalid(format!("variable {v} references check {c} >= {n_checks}")));
                }
                check_adj[c].push(v);
            }
        }
        Self::from_check_lists(var_adj.len(), check_adj)
    }

    pub fn n_vars(&self) -> usize {
        self.var_adj.len()
    }

    pub fn n_checks(&self) -> usize {
        self.check_adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.check_adj.iter().map(Vec::len).sum()
    }

    pub fn check_neighbors(&self, c: usize) -> &[usize] {
        &self.check_adj[c]
    }

    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_adj[v]
    }

    pub fn check_lists(&self) -> &[Vec<usize>] {
        &self.check_adj
    }

    pub fn var_lists(&self) -> &[Vec<usize>] {
        &self.var_adj
    }

    /// `H c` over GF(2).
    pub fn syndrome(&self, bits: &[Bit]) -> Result<Vec<Bit>> {
        if bits.len() != self.n_vars() {
            return Err(Error::Framing(format!(
                "word has {} bits, matrix has {} columns",
                bits.len(),
                self.n_vars()
            )));
        }
        Ok(self
            .check_adj
            .iter()
            .map(|row| row.iter().fold(0, |acc, &v| acc ^ (bits[v] & 1)))
            .collect())
    }

    /// True when every check is satisfied. `bits` must have `n_vars` entries.
    pub fn is_codeword(&self, bits: &[Bit]) -> bool {
        debug_assert_eq!(bits.len(), self.n_vars());
        self.check_adj
            .iter()
            .all(|row| row.iter().fold(0, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    /// Number of 4-cycles, i.e. pairs of checks sharing two variables,
    /// counted once per unordered pair of shared variables.
    pub fn four_cycle_count(&self) -> usize {
        let mut count = 0;
        let mut shared = vec![0usize; self.n_checks()];
        for (c, row) in self.check_adj.iter().enumerate() {
            for &v in row {
                for &other in &self.var_adj[v] {
                    if other > c {
                        shared[other] += 1;
                    }
                }
            }
            for s in shared.iter_mut() {
                if *s >= 2 {
                    count += *s * (*s - 1) / 2;
                }
                *s = 0;
            }
        }
        count
    }

    pub fn has_four_cycle(&self) -> bool {
        self.four_cycle_count() > 0
    }

    /// Parses a MacKay alist document.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next_line = |what: &str| -> Result<(usize, Vec<usize>)> {
            let (no, line) = lines.next().ok_or_else(|| Error::Parse {
                line: text.lines().count() + 1,
                msg: format!("unexpected end of input, expected {what}"),
            })?;
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Parse {
                        line: no,
                        msg: format!("`{tok}` is not a nonnegative integer"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((no, nums))
        };
        let expect_len = |no: usize, nums: &[usize], len: usize, what: &str| -> Result<()> {
            if nums.len() != len {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("expected {len} {what}, found {}", nums.len()),
                });
            }
            Ok(())
        };

        let (no, dims) = next_line("dimensions")?;
        expect_len(no, &dims, 2, "dimensions")?;
        let (n, m) = (dims[0], dims[1]);
        let (no, maxes) = next_line("maximum degrees")?;
        expect_len(no, &maxes, 2, "maximum degrees")?;
        let (no, col_deg) = next_line("column degrees")?;
        expect_len(no, &col_deg, n, "column degrees")?;
        let (no, row_deg) = next_line("row degrees")?;
        expect_len(no, &row_deg, m, "row degrees")?;
        if col_deg.iter().max().copied().unwrap_or(0) != maxes[0]
            || row_deg.iter().max().copied().unwrap_or(0) != maxes[1]
        {
            return Err(Error::Parse {
                line: no,
                msg: "maximum degrees disagree with the degree lists".into(),
            });
        }

        let mut read_lists = |count: usize, degrees: &[usize], bound: usize, what: &str| {
            let mut lists = Vec::with_capacity(count);
            for &deg in degrees.iter().take(count) {
                let (no, nums) = next_line(what)?;
                let (entries, padding) = nums.split_at(nums.iter().position(|&x| x == 0).unwrap_or(nums.len()));
                if padding.iter().any(|&x| x != 0) {
                    return Err(Error::Parse { line: no, msg: "nonzero index after zero padding".into() });
                }
                if entries.len() != deg {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("{what} lists {} entries, header says {deg}", entries.len()),
                    });
                }
                if let Some(&bad) = entries.iter().find(|&&x| x > bound) {
                    return Err(Error::Parse { line: no, msg: format!("index {bad} exceeds {bound}") });
                }
                let mut list: Vec<usize> = entries.iter().map(|&x| x - 1).collect();
                list.sort_unstable();
                if list.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Parse { line: no, msg: "duplicate index".into() });
                }
                lists.push((no, list));
            }
            Ok::<_, Error>(lists)
        };
        let cols = read_lists(n, &col_deg, m, "column")?;
        let rows = read_lists(m, &row_deg, n, "row")?;

        let matrix = Self::from_check_lists(n, rows.iter().map(|(_, r)| r.clone()).collect())
            .map_err(|e| Error::Parse { line: rows.first().map_or(0, |r| r.0), msg: e.to_string() })?;
        for (v, (no, col)) in cols.iter().enumerate() {
            if matrix.var_adj[v] != *col {
                return Err(Error::Parse {
                    line: *no,
                    msg: format!("column {} disagrees with the row lists", v + 1),
                });
            }
        }
        Ok(matrix)
    }

    /// Serializes in MacKay alist format with zero padding.
    pub fn to_alist(&self) -> String {
        let col_max = self.var_adj.iter().map(Vec::len).max().unwrap_or(0);
        let row_max = self.check_adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let join = |it: &mut dyn Iterator<Item = usize>| it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{} {}", self.n_vars(), self.n_checks());
        let _ = writeln!(out, "{col_max} {row_max}");
        let _ = writeln!(out, "{}", join(&mut self.var_adj.iter().map(Vec::len)));
        let _ = writeln!(out, "{}", join(&mut self.check_adj.iter().map(Vec::len)));
        for (lists, width) in [(&self.var_adj, col_max), (&self.check_adj, row_max)] {
            for list in lists {
                let padded = list.iter().map(|&x| x + 1).chain(std::iter::repeat(0)).take(width);
                let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "4 2\n1 2\n1 1 1 1\n2 2\n1\n1\n2\n2\n1 2\n3 4\n";

    #[test]
    fn toy_alist() {
        let h = ParityCheckMatrix::from_alist(TOY).unwrap();
        assert_eq!(h.n_vars(), 4);
        assert_eq!(h.n_checks(), 2);
        assert_eq!(h.check_neighbors(0), &[0, 1]);
        assert_eq!(h.check_neighbors(1), &[2, 3]);
        let again = ParityCheckMatrix::from_alist(&h.to_alist()).unwrap();
        assert_eq!(again, h);
    }

    #[test]
    fn zero_padded_alist() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";
        let h = ParityCheckMatrix::from_alist(text).unwrap();
        assert_eq!(h.var_neighbors(1), &[0, 1]);
        assert_eq!(h.check_neighbors(1), &[1, 2]);
    }

    #[test]
    fn alist_degree_mismatch_reports_line() {
        let bad = "4 2\n1 2\n1 1 1 1\n2 2\n1\n1\n2\n2\n1 2\n3\n";
        match ParityCheckMatrix::from_alist(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_index = "4 2\n1 2\n1 1 1 1\n2 2\n1\n1\n2\n2\n1 2\n3 9\n";
        assert!(matches!(ParityCheckMatrix::from_alist(bad_index), Err(Error::Parse { line: 10, .. })));
        let inconsistent = "4 2\n1 2\n1 1 1 1\n2 2\n1\n2\n2\n2\n1 2\n3 4\n";
        assert!(matches!(ParityCheckMatrix::from_alist(inconsistent), Err(Error::Parse { line: 6, .. })));
        assert!(matches!(ParityCheckMatrix::from_alist("4 x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(ParityCheckMatrix::from_alist("4 2\n1 2\n").is_err());
    }

    #[test]
    fn syndrome_of_single_flip_is_its_column() {
        let h = ParityCheckMatrix::from_check_lists(5, vec![vec![0, 1, 2], vec![2, 3], vec![1, 3, 4]]).unwrap();
        let zero = vec![0u8; 5];
        assert_eq!(h.syndrome(&zero).unwrap(), vec![0, 0, 0]);
        for v in 0..5 {
            let mut w = zero.clone();
            w[v] = 1;
            let s = h.syndrome(&w).unwrap();
            let expected: Vec<u8> = (0..3).map(|c| h.var_neighbors(v).contains(&c) as u8).collect();
            assert_eq!(s, expected);
        }
        assert!(h.syndrome(&[0, 1]).is_err());
    }

    #[test]
    fn syndrome_matches_dense_product() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let h = crate::ldpc::peg_construct(60, 30, &[3; 60], 1).unwrap();
        let mut dense = vec![vec![0u8; 60]; 30];
        for (c, row) in h.check_lists().iter().enumerate() {
            for &v in row {
                dense[c][v] = 1;
            }
        }
        for _ in 0..20 {
            let w: Vec<u8> = (0..60).map(|_| rng.gen_range(0..2)).collect();
            let naive: Vec<u8> = dense
                .iter()
                .map(|row| row.iter().zip(&w).map(|(a, b)| a * b).sum::<u8>() % 2)
                .collect();
            assert_eq!(h.syndrome(&w).unwrap(), naive);
        }
    }

    #[test]
    fn four_cycles_detected() {
        let h = ParityCheckMatrix::from_check_lists(3, vec![vec![0, 1], vec![0, 1, 2]]).unwrap();
        assert_eq!(h.four_cycle_count(), 1);
        let h = ParityCheckMatrix::from_check_lists(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(!h.has_four_cycle());
    }

    #[test]
    fn rejects_duplicate_edges() {
        assert!(ParityCheckMatrix::from_check_lists(3, vec![vec![0, 0]]).is_err());
        assert!(ParityCheckMatrix::from_check_lists(3, vec![vec![3]]).is_err());
    }
}
