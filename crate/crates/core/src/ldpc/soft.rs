//! Bit/symbol soft-information conversions across the code–phase boundary.
//!
//! Downward (decoder → phase graph): per-symbol prior probabilities over the
//! constellation, built from bit LLRs under the Gray labeling. Upward (phase
//! graph → decoder): per-bit LLRs marginalized from per-symbol posteriors.
//! Pilot symbols carry a point-mass prior and produce no LLRs.

use crate::channel::{gray_encode, FrameConfig};
use crate::ldpc::{LdpcError, LLR_CLIP};
use crate::logspace::{log_sum_exp_slice, softplus};

/// Per-symbol probability table over the constellation, stored as logs.
/// Rows are normalized; pilot rows are a point mass on the pilot symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSoftInfo {
    constellation_size: usize,
    log_probs: Vec<f64>,
}

impl SymbolSoftInfo {
    /// Number of symbols (rows).
    #[inline]
    pub fn num_symbols(&self) -> usize {
        self.log_probs.len() / self.constellation_size
    }

    /// Constellation order M (columns).
    #[inline]
    pub fn constellation_size(&self) -> usize {
        self.constellation_size
    }

    /// Log-probability row for symbol `k`.
    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.constellation_size;
        &self.log_probs[k * m..(k + 1) * m]
    }

    /// Builds a table from complete rows (normalizing each).
    pub fn from_rows(constellation_size: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut log_probs = Vec::with_capacity(rows.len() * constellation_size);
        for mut row in rows {
            debug_assert_eq!(row.len(), constellation_size);
            let lse = log_sum_exp_slice(&row);
            for v in &mut row {
                *v -= lse;
            }
            log_probs.extend(row);
        }
        SymbolSoftInfo { constellation_size, log_probs }
    }
}

/// Uniform data rows plus pilot point masses: the downward message before
/// the decoder has produced any extrinsic information.
pub fn uniform_priors(cfg: &FrameConfig) -> SymbolSoftInfo {
    bits_to_symbol_probs(&vec![0.0; cfg.data_bit_count()], cfg)
        .expect("zero LLR vector always has the right length")
}

/// Converts bit LLRs into per-symbol constellation priors.
///
/// For each data symbol, `P(m) ∝ Π_b P(bit_b = label_b(m))` over its
/// `log2(M)` Gray-label bits; pilot rows are a point mass on the pilot
/// symbol. LLRs are consumed in codeword order, MSB first within a symbol.
pub fn bits_to_symbol_probs(
    bit_llrs: &[f64],
    cfg: &FrameConfig,
) -> Result<SymbolSoftInfo, LdpcError> {
    let expected = cfg.data_bit_count();
    if bit_llrs.len() != expected {
        return Err(LdpcError::WrongLength { expected, got: bit_llrs.len() });
    }
    let m = cfg.modulation_order;
    let q = cfg.bits_per_symbol();
    let mask = cfg.pilot_mask();
    let mut log_probs = Vec::with_capacity(cfg.block_len * m);
    let mut next_bit = 0;
    for k in 0..cfg.block_len {
        if mask[k] {
            for sym in 0..m {
                log_probs.push(if sym == cfg.pilot_symbol_index { 0.0 } else { f64::NEG_INFINITY });
            }
        } else {
            let llrs = &bit_llrs[next_bit..next_bit + q];
            next_bit += q;
            let start = log_probs.len();
            for sym in 0..m {
                let label = gray_encode(sym);
                let mut lp = 0.0;
                for (b, &llr) in llrs.iter().enumerate() {
                    // bit b is the (q-1-b)-th binary digit of the label
                    let bit_is_one = label >> (q - 1 - b) & 1 == 1;
                    // log P(0) = -softplus(-λ), log P(1) = -softplus(λ)
                    lp -= if bit_is_one { softplus(llr) } else { softplus(-llr) };
                }
                log_probs.push(lp);
            }
            let lse = log_sum_exp_slice(&log_probs[start..]);
            for v in &mut log_probs[start..] {
                *v -= lse;
            }
        }
    }
    Ok(SymbolSoftInfo { constellation_size: m, log_probs })
}

/// Marginalizes per-symbol posteriors into bit LLRs, in codeword order.
///
/// For bit `b` of a data symbol: `LLR = ln Σ_{m: label_b=0} P(m) −
/// ln Σ_{m: label_b=1} P(m)`, clipped to ±[`LLR_CLIP`]. Pilot symbols are
/// skipped.
pub fn symbol_probs_to_bit_llrs(posteriors: &SymbolSoftInfo, cfg: &FrameConfig) -> Vec<f64> {
    assert_eq!(posteriors.num_symbols(), cfg.block_len, "posterior table length mismatch");
    assert_eq!(posteriors.constellation_size(), cfg.modulation_order);
    let q = cfg.bits_per_symbol();
    let mask = cfg.pilot_mask();
    let mut llrs = Vec::with_capacity(cfg.data_bit_count());
    let mut zeros: Vec<f64> = Vec::new();
    let mut ones: Vec<f64> = Vec::new();
    for k in 0..cfg.block_len {
        if mask[k] {
            continue;
        }
        let row = posteriors.row(k);
        for b in 0..q {
            zeros.clear();
            ones.clear();
            for (sym, &lp) in row.iter().enumerate() {
                if gray_encode(sym) >> (q - 1 - b) & 1 == 1 {
                    ones.push(lp);
                } else {
                    zeros.push(lp);
                }
            }
            let llr = log_sum_exp_slice(&zeros) - log_sum_exp_slice(&ones);
            llrs.push(if llr.is_nan() { 0.0 } else { llr.clamp(-LLR_CLIP, LLR_CLIP) });
        }
    }
    llrs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn qpsk(block_len: usize, pilot_period: Option<usize>) -> FrameConfig {
        FrameConfig {
            modulation_order: 4,
            block_len,
            pilot_period,
            pilot_symbol_index: 0,
            sigma_delta: 0.1,
            es_n0_db: 4.5,
            seed: 0,
        }
    }

    #[test]
    fn zero_llrs_give_uniform_rows() {
        let cfg = qpsk(5, Some(5));
        let info = bits_to_symbol_probs(&vec![0.0; cfg.data_bit_count()], &cfg).unwrap();
        for k in 1..5 {
            for &lp in info.row(k) {
                assert!((lp - (0.25f64).ln()).abs() < 1e-14);
            }
        }
        // pilot row is a point mass
        assert_eq!(info.row(0)[0], 0.0);
        assert_eq!(info.row(0)[1], f64::NEG_INFINITY);
    }

    #[test]
    fn hard_bit_restricts_support() {
        // first bit pinned to 0: support on the labels 00 and 01
        let cfg = qpsk(1, None);
        let info = bits_to_symbol_probs(&[1e9, 0.0], &cfg).unwrap();
        let row = info.row(0);
        // labels of symbols 0..3 are 00,01,11,10 → symbols 0,1 keep bit0=0
        assert!((row[0] - 0.5f64.ln()).abs() < 1e-9);
        assert!((row[1] - 0.5f64.ln()).abs() < 1e-9);
        assert!(row[2] < -1e8);
        assert!(row[3] < -1e8);
    }

    #[test]
    fn rows_match_enumeration_oracle() {
        let cfg = qpsk(6, Some(3));
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let llrs: Vec<f64> = (0..cfg.data_bit_count()).map(|_| rng.gen::<f64>() * 8.0 - 4.0).collect();
        let info = bits_to_symbol_probs(&llrs, &cfg).unwrap();
        // direct enumeration over labels
        let mask = cfg.pilot_mask();
        let mut next = 0;
        for k in 0..cfg.block_len {
            if mask[k] {
                continue;
            }
            let l0 = llrs[next];
            let l1 = llrs[next + 1];
            next += 2;
            let p = |llr: f64, one: bool| {
                let p1 = 1.0 / (1.0 + llr.exp());
                if one { p1 } else { 1.0 - p1 }
            };
            let mut probs = [0.0; 4];
            let mut total = 0.0;
            for sym in 0..4 {
                let label = gray_encode(sym);
                let v = p(l0, label >> 1 & 1 == 1) * p(l1, label & 1 == 1);
                probs[sym] = v;
                total += v;
            }
            for sym in 0..4 {
                let got = info.row(k)[sym].exp();
                assert!((got - probs[sym] / total).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn llrs_match_enumeration_oracle() {
        let cfg = qpsk(4, None);
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..4).map(|_| (rng.gen::<f64>() * 3.0).ln()).collect())
            .collect();
        let table = SymbolSoftInfo::from_rows(4, rows.clone());
        let llrs = symbol_probs_to_bit_llrs(&table, &cfg);
        for k in 0..4 {
            let lin: Vec<f64> = table.row(k).iter().map(|lp| lp.exp()).collect();
            for b in 0..2 {
                let (mut p0, mut p1) = (0.0, 0.0);
                for sym in 0..4 {
                    if gray_encode(sym) >> (1 - b) & 1 == 1 {
                        p1 += lin[sym];
                    } else {
                        p0 += lin[sym];
                    }
                }
                let want = (p0 / p1).ln();
                assert!((llrs[2 * k + b] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_row_gives_zero_llrs() {
        let cfg = qpsk(2, None);
        let table = SymbolSoftInfo::from_rows(4, vec![vec![0.25f64.ln(); 4]; 2]);
        for llr in symbol_probs_to_bit_llrs(&table, &cfg) {
            assert!(llr.abs() < 1e-14);
        }
    }

    #[test]
    fn point_mass_clips_at_max() {
        let cfg = qpsk(1, None);
        let table = SymbolSoftInfo::from_rows(
            4,
            vec![vec![0.0, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY]],
        );
        let llrs = symbol_probs_to_bit_llrs(&table, &cfg);
        assert_eq!(llrs, vec![LLR_CLIP, LLR_CLIP]);
    }

    #[test]
    fn pilots_contribute_no_llrs() {
        let cfg = qpsk(6, Some(2));
        let table = SymbolSoftInfo::from_rows(4, vec![vec![0.25f64.ln(); 4]; 6]);
        assert_eq!(symbol_probs_to_bit_llrs(&table, &cfg).len(), cfg.data_bit_count());
    }

    #[test]
    fn conversion_roundtrip_recovers_bit_marginals() {
        // product-form rows: down then up recovers the input bit LLRs
        let cfg = qpsk(8, Some(4));
        let mut rng = ChaCha12Rng::seed_from_u64(25);
        let llrs: Vec<f64> = (0..cfg.data_bit_count()).map(|_| rng.gen::<f64>() * 10.0 - 5.0).collect();
        let down = bits_to_symbol_probs(&llrs, &cfg).unwrap();
        let back = symbol_probs_to_bit_llrs(&down, &cfg);
        for (a, b) in llrs.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn wrong_llr_count_rejected() {
        let cfg = qpsk(4, None);
        assert!(bits_to_symbol_probs(&[0.0; 3], &cfg).is_err());
    }
}
