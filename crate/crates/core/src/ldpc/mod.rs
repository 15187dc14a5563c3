//! LDPC code handling: sparse parity-check structure, systematic encoding,
//! sum-product decoding, and the bit/symbol soft-information conversions
//! that couple the code graph to the phase graph.

mod alist;
mod decoder;
mod peg;
mod soft;

pub use alist::{parse_alist, write_alist};
pub use decoder::{decode_pass, DecodeOutput};
pub use peg::{peg_construct, PegConfig};
pub use soft::{
    bits_to_symbol_probs, symbol_probs_to_bit_llrs, uniform_priors, SymbolSoftInfo,
};

use std::fmt;

/// Hard clip applied to all LLR magnitudes in the decoder and the soft
/// conversions.
pub const LLR_CLIP: f64 = 50.0;

/// LDPC errors: structural problems found at load/build time, plus
/// per-call shape mismatches.
#[derive(Debug, Clone, PartialEq)]
pub enum LdpcError {
    Parse { line: usize, message: String },
    Structure(String),
    RankDeficient { rank: usize, checks: usize },
    WrongLength { expected: usize, got: usize },
}

impl fmt::Display for LdpcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LdpcError::Parse { line, message } => write!(f, "alist line {line}: {message}"),
            LdpcError::Structure(msg) => write!(f, "invalid code structure: {msg}"),
            LdpcError::RankDeficient { rank, checks } => {
                write!(f, "parity-check matrix rank {rank} < {checks}; code is not encodable")
            }
            LdpcError::WrongLength { expected, got } => {
                write!(f, "expected length {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for LdpcError {}

/// A binary LDPC code with precomputed encoder structure.
///
/// The parity-check matrix is stored as adjacency lists in both directions.
/// At construction, Gauss-Jordan elimination over GF(2) selects one pivot
/// column per check (preferring high column indices so that, for codes with
/// well-conditioned tails, information bits land in the leading columns);
/// encoding then fills the pivot columns by back-substitution. Information
/// bits occupy the non-pivot columns in ascending column order — see
/// [`LdpcCode::info_positions`].
#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    k: usize,
    check_rows: Vec<Vec<u32>>,
    var_cols: Vec<Vec<u32>>,
    info_cols: Vec<u32>,
    pivot_cols: Vec<u32>,
    /// Per pivot, the information-bit support of its eliminated row, packed
    /// as 64-bit blocks over the info-column index space.
    parity_masks: Vec<Vec<u64>>,
}

impl LdpcCode {
    /// Builds a code from its parity-check adjacency (one sorted-or-not list
    /// of variable indices per check row).
    ///
    /// Fails if the matrix is structurally invalid (out-of-range indices,
    /// isolated variables) or rank-deficient.
    pub fn from_check_rows(n: usize, check_rows: Vec<Vec<u32>>) -> Result<Self, LdpcError> {
        let m = check_rows.len();
        if n == 0 || m == 0 || m >= n {
            return Err(LdpcError::Structure(format!(
                "need 0 < checks < variables, got {m} checks, {n} variables"
            )));
        }
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(m);
        for (i, row) in check_rows.into_iter().enumerate() {
            let mut row = row;
            row.sort_unstable();
            row.dedup();
            if row.is_empty() {
                return Err(LdpcError::Structure(format!("check {i} has no variables")));
            }
            if let Some(&bad) = row.iter().find(|&&v| v as usize >= n) {
                return Err(LdpcError::Structure(format!(
                    "check {i} references variable {bad} ≥ n={n}"
                )));
            }
            rows.push(row);
        }
        let mut var_cols: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            for &v in row {
                var_cols[v as usize].push(i as u32);
            }
        }
        if let Some(v) = var_cols.iter().position(|c| c.is_empty()) {
            return Err(LdpcError::Structure(format!("variable {v} has degree 0")));
        }

        let (info_cols, pivot_cols, parity_masks) = build_encoder(n, &rows)?;
        let k = info_cols.len();
        Ok(LdpcCode { n, k, check_rows: rows, var_cols, info_cols, pivot_cols, parity_masks })
    }

    /// Codeword length in bits.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Information length in bits.
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of parity checks.
    #[inline]
    pub fn num_checks(&self) -> usize {
        self.check_rows.len()
    }

    /// Code rate k/n.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Check-to-variable adjacency.
    #[inline]
    pub fn check_rows(&self) -> &[Vec<u32>] {
        &self.check_rows
    }

    /// Variable-to-check adjacency.
    #[inline]
    pub fn var_cols(&self) -> &[Vec<u32>] {
        &self.var_cols
    }

    /// Codeword positions that carry information bits, ascending. The i-th
    /// information bit is placed at `info_positions()[i]`.
    #[inline]
    pub fn info_positions(&self) -> &[u32] {
        &self.info_cols
    }

    /// Systematic encode: places `info` at the information positions and
    /// solves the parity positions so that every check is satisfied.
    pub fn encode(&self, info: &[bool]) -> Result<Vec<bool>, LdpcError> {
        if info.len() != self.k {
            return Err(LdpcError::WrongLength { expected: self.k, got: info.len() });
        }
        let blocks = self.k.div_ceil(64);
        let mut info_bits = vec![0u64; blocks];
        for (i, &b) in info.iter().enumerate() {
            if b {
                info_bits[i / 64] |= 1 << (i % 64);
            }
        }
        let mut cw = vec![false; self.n];
        for (i, &col) in self.info_cols.iter().enumerate() {
            cw[col as usize] = info[i];
        }
        for (mask, &col) in self.parity_masks.iter().zip(&self.pivot_cols) {
            let mut acc = 0u32;
            for (a, b) in mask.iter().zip(&info_bits) {
                acc ^= (a & b).count_ones() & 1;
            }
            cw[col as usize] = acc & 1 == 1;
        }
        debug_assert!(self.syndrome_ok(&cw));
        Ok(cw)
    }

    /// True when `H·bits = 0` over GF(2).
    pub fn syndrome_ok(&self, bits: &[bool]) -> bool {
        self.check_rows
            .iter()
            .all(|row| !row.iter().fold(false, |acc, &v| acc ^ bits[v as usize]))
    }

    /// Extracts the information bits from a codeword.
    pub fn extract_info(&self, codeword: &[bool]) -> Vec<bool> {
        self.info_cols.iter().map(|&c| codeword[c as usize]).collect()
    }
}

/// Gauss-Jordan elimination over GF(2) on the parity-check matrix.
///
/// Pivots are chosen by scanning columns from the highest index down, so a
/// code whose trailing columns are invertible becomes systematic in its
/// leading columns. Returns `(info_cols, pivot_cols, parity_masks)` where
/// `parity_masks[r]` is the information-column support of the fully reduced
/// row owning `pivot_cols[r]`.
fn build_encoder(
    n: usize,
    rows: &[Vec<u32>],
) -> Result<(Vec<u32>, Vec<u32>, Vec<Vec<u64>>), LdpcError> {
    let m = rows.len();
    let blocks = n.div_ceil(64);
    let mut bits: Vec<Vec<u64>> = vec![vec![0u64; blocks]; m];
    for (i, row) in rows.iter().enumerate() {
        for &v in row {
            bits[i][v as usize / 64] |= 1 << (v as usize % 64);
        }
    }
    let get = |r: &[u64], c: usize| -> bool { r[c / 64] >> (c % 64) & 1 == 1 };

    let mut pivot_of_row: Vec<Option<usize>> = vec![None; m];
    let mut pivot_cols: Vec<usize> = Vec::with_capacity(m);
    let mut free_rows: Vec<usize> = (0..m).collect();
    for col in (0..n).rev() {
        if pivot_cols.len() == m {
            break;
        }
        let Some(pos) = free_rows.iter().position(|&r| get(&bits[r], col)) else {
            continue;
        };
        let r = free_rows.swap_remove(pos);
        pivot_of_row[r] = Some(col);
        pivot_cols.push(col);
        // eliminate this column from every other row
        let pivot_row = bits[r].clone();
        for other in 0..m {
            if other != r && get(&bits[other], col) {
                for (dst, src) in bits[other].iter_mut().zip(&pivot_row) {
                    *dst ^= src;
                }
            }
        }
    }
    if pivot_cols.len() < m {
        return Err(LdpcError::RankDeficient { rank: pivot_cols.len(), checks: m });
    }

    let mut is_pivot = vec![false; n];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let info_cols: Vec<u32> = (0..n).filter(|&c| !is_pivot[c]).map(|c| c as u32).collect();
    let col_to_info: Vec<usize> = {
        let mut map = vec![usize::MAX; n];
        for (i, &c) in info_cols.iter().enumerate() {
            map[c as usize] = i;
        }
        map
    };

    let k = info_cols.len();
    let info_blocks = k.div_ceil(64);
    let mut out_pivots: Vec<u32> = Vec::with_capacity(m);
    let mut masks: Vec<Vec<u64>> = Vec::with_capacity(m);
    for r in 0..m {
        let pivot = pivot_of_row[r].expect("full rank established above");
        let mut mask = vec![0u64; info_blocks];
        for &c in info_cols.iter() {
            if get(&bits[r], c as usize) {
                let i = col_to_info[c as usize];
                mask[i / 64] |= 1 << (i % 64);
            }
        }
        out_pivots.push(pivot as u32);
        masks.push(mask);
    }
    Ok((info_cols, out_pivots, masks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Hamming(7,4): classic full-rank toy code.
    pub(crate) fn hamming74() -> LdpcCode {
        LdpcCode::from_check_rows(
            7,
            vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]],
        )
        .unwrap()
    }

    #[test]
    fn hamming_dimensions() {
        let code = hamming74();
        assert_eq!(code.n(), 7);
        assert_eq!(code.k(), 4);
        assert_eq!(code.num_checks(), 3);
        assert!((code.rate() - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn encode_zero_is_zero() {
        let code = hamming74();
        let cw = code.encode(&[false; 4]).unwrap();
        assert!(cw.iter().all(|&b| !b));
    }

    #[test]
    fn encode_satisfies_checks_and_is_systematic() {
        let code = hamming74();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..32 {
            let info: Vec<bool> = (0..4).map(|_| rng.gen()).collect();
            let cw = code.encode(&info).unwrap();
            assert!(code.syndrome_ok(&cw));
            assert_eq!(code.extract_info(&cw), info);
        }
    }

    #[test]
    fn codewords_closed_under_addition() {
        let code = hamming74();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..16 {
            let a: Vec<bool> = (0..4).map(|_| rng.gen()).collect();
            let b: Vec<bool> = (0..4).map(|_| rng.gen()).collect();
            let ca = code.encode(&a).unwrap();
            let cb = code.encode(&b).unwrap();
            let sum: Vec<bool> = ca.iter().zip(&cb).map(|(&x, &y)| x ^ y).collect();
            assert!(code.syndrome_ok(&sum));
        }
    }

    #[test]
    fn rank_deficient_rejected_at_build() {
        // third row is the sum of the first two → rank 2 < 3
        let err = LdpcCode::from_check_rows(4, vec![vec![0, 1], vec![2, 3], vec![0, 1, 2, 3]]);
        assert!(matches!(err, Err(LdpcError::RankDeficient { rank: 2, checks: 3 })));
    }

    #[test]
    fn structural_validation() {
        assert!(LdpcCode::from_check_rows(4, vec![vec![0, 9]]).is_err());
        assert!(LdpcCode::from_check_rows(4, vec![vec![]]).is_err());
        // variable 3 never referenced
        assert!(matches!(
            LdpcCode::from_check_rows(4, vec![vec![0, 1], vec![1, 2]]),
            Err(LdpcError::Structure(_))
        ));
        assert!(LdpcCode::from_check_rows(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).is_err());
    }

    #[test]
    fn encode_wrong_length() {
        let code = hamming74();
        assert!(matches!(
            code.encode(&[true; 3]),
            Err(LdpcError::WrongLength { expected: 4, got: 3 })
        ));
    }
}
