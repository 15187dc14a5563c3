//! Flooding sum-product decoder with tanh-rule check updates.
//!
//! LLR convention throughout: positive means bit 0 is more likely. Messages
//! and totals saturate at [`LLR_CLIP`](super::LLR_CLIP).

use super::{LdpcCode, LLR_CLIP};

/// Product magnitudes are kept away from ±1 so the atanh stays finite;
/// 2·atanh(1 − 1e-15) ≈ 35, still inside the LLR clip.
const TANH_CLAMP: f64 = 1.0 - 1e-15;

/// Result of one decoding pass.
#[derive(Debug, Clone)]
pub struct DecodeOutput {
    /// Extrinsic LLR per bit: total posterior LLR minus the channel input.
    pub extrinsic_llrs: Vec<f64>,
    /// Hard decision per bit (`true` = 1).
    pub hard_bits: Vec<bool>,
    /// Whether the hard decision satisfies every parity check.
    pub syndrome_ok: bool,
    /// Iterations actually executed (0 if the input already decodes).
    pub iterations: usize,
}

/// Runs up to `n_iters` flooding sum-product iterations, exiting early as
/// soon as the hard decision has zero syndrome.
pub fn decode_pass(code: &LdpcCode, channel_llrs: &[f64], n_iters: usize) -> DecodeOutput {
    assert_eq!(channel_llrs.len(), code.n(), "LLR vector length mismatch");
    let n = code.n();
    let rows = code.check_rows();

    // flat edge storage, grouped by check
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    row_ptr.push(0usize);
    for row in rows {
        row_ptr.push(row_ptr.last().unwrap() + row.len());
    }
    let num_edges = *row_ptr.last().unwrap();
    let mut edge_var = Vec::with_capacity(num_edges);
    for row in rows {
        edge_var.extend(row.iter().map(|&v| v as usize));
    }
    let mut var_edges: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (e, &v) in edge_var.iter().enumerate() {
        var_edges[v].push(e as u32);
    }

    let intrinsic: Vec<f64> = channel_llrs.iter().map(|&l| l.clamp(-LLR_CLIP, LLR_CLIP)).collect();
    let mut hard: Vec<bool> = intrinsic.iter().map(|&l| l < 0.0).collect();
    if code.syndrome_ok(&hard) {
        return DecodeOutput {
            extrinsic_llrs: vec![0.0; n],
            hard_bits: hard,
            syndrome_ok: true,
            iterations: 0,
        };
    }

    let mut var_to_check: Vec<f64> = edge_var.iter().map(|&v| intrinsic[v]).collect();
    let mut check_to_var: Vec<f64> = vec![0.0; num_edges];
    let mut totals: Vec<f64> = vec![0.0; n];
    let mut scratch: Vec<f64> = Vec::new();

    for iter in 1..=n_iters {
        // check update: tanh rule with prefix/suffix products per row
        for c in 0..rows.len() {
            let span = row_ptr[c]..row_ptr[c + 1];
            scratch.clear();
            scratch.extend(var_to_check[span.clone()].iter().map(|&q| (0.5 * q).tanh()));
            let d = scratch.len();
            // prefix[i] = Π_{j<i}, suffix built on the fly right-to-left
            let mut prefix = 1.0;
            let mut prefixes = Vec::with_capacity(d);
            for &t in &scratch {
                prefixes.push(prefix);
                prefix *= t;
            }
            let mut suffix = 1.0;
            for i in (0..d).rev() {
                let prod = (prefixes[i] * suffix).clamp(-TANH_CLAMP, TANH_CLAMP);
                check_to_var[span.start + i] = (2.0 * prod.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
                suffix *= scratch[i];
            }
        }

        // variable update
        for v in 0..n {
            let sum_in: f64 = var_edges[v].iter().map(|&e| check_to_var[e as usize]).sum();
            let total = (intrinsic[v] + sum_in).clamp(-LLR_CLIP, LLR_CLIP);
            totals[v] = total;
            hard[v] = total < 0.0;
            for &e in &var_edges[v] {
                var_to_check[e as usize] =
                    (total - check_to_var[e as usize]).clamp(-LLR_CLIP, LLR_CLIP);
            }
        }

        if code.syndrome_ok(&hard) {
            let extrinsic = totals.iter().zip(&intrinsic).map(|(&t, &i)| t - i).collect();
            return DecodeOutput {
                extrinsic_llrs: extrinsic,
                hard_bits: hard,
                syndrome_ok: true,
                iterations: iter,
            };
        }
    }

    let extrinsic = totals.iter().zip(&intrinsic).map(|(&t, &i)| t - i).collect();
    DecodeOutput { extrinsic_llrs: extrinsic, hard_bits: hard, syndrome_ok: false, iterations: n_iters }
}
