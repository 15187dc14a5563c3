//! Forward/backward phase message passing over Tikhonov mixtures, and the
//! joint iteration loop with the LDPC decoder.
//!
//! One recursion step per symbol and direction: expand the incoming mixture
//! against the symbol's constellation prior (each component × constellation
//! point contributes one Tikhonov term, in closed form), blur every component
//! through the Wiener step, then reduce the mixture adaptively. Pilot priors
//! are point masses, so pilots never grow the mixture. The upward symbol
//! posterior combines forward and backward messages with the observation
//! factor, again in closed form.
//!
//! Setting [`DetectorConfig::barb_mode`] caps the canonical model at a single
//! component (`n_max = 1`, `mu = ∞`), which turns the detector into the
//! classic single-Tikhonov tracker used as a baseline.
//!
//! # Operation accounting
//!
//! The recursions are instrumented with an abstract cost model, tallied in
//! [`OpCount`]: one *operation* per component-level update (a parameter sum,
//! weight update, accumulator add, or comparison scan element) and one *LUT
//! access* per transcendental kernel evaluation (`ln I₀`, the moment ratio
//! and its inverse, `exp` inside a log-sum-exp, `arg`). These are the units
//! used by the complexity model in the harness; they deliberately count
//! mixture-level work, not machine instructions.

use crate::channel::{FrameConfig, ReceivedBlock};
use crate::dirstat::{convolve_wrapped_gaussian, log_i0, TikhonovComponent, WrappedGaussianStep};
use crate::ldpc::{
    bits_to_symbol_probs, decode_pass, symbol_probs_to_bit_llrs, LdpcCode, SymbolSoftInfo,
};
use crate::logspace::log_sum_exp_slice;
use crate::mixture::{ReductionConfig, TikhonovMixture};
use num_complex::Complex64;

/// Detector configuration for the mixture algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Mixture reduction parameters (threshold and order cap).
    pub reduction: ReductionConfig,
    /// Outer (detector ↔ decoder) iterations.
    pub n_outer: usize,
    /// LDPC iterations inside each outer iteration.
    pub n_inner_ldpc: usize,
    /// Force the single-component tracker (`n_max = 1`, `mu = ∞`).
    pub barb_mode: bool,
}

impl DetectorConfig {
    /// The reduction actually applied, honoring `barb_mode`.
    pub fn effective_reduction(&self) -> ReductionConfig {
        if self.barb_mode {
            ReductionConfig::collapse_to_one()
        } else {
            self.reduction
        }
    }
}

/// Abstract operation tally; see the module docs for the unit convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub ops: u64,
    pub lut: u64,
}

impl OpCount {
    #[inline]
    fn add(&mut self, ops: u64, lut: u64) {
        self.ops += ops;
        self.lut += lut;
    }

    pub fn merge(&mut self, other: OpCount) {
        self.ops += other.ops;
        self.lut += other.lut;
    }
}

/// Per-frame detector statistics.
#[derive(Debug, Clone, Default)]
pub struct DetectorStats {
    /// Whether the final hard decision satisfies the code.
    pub syndrome_ok: bool,
    /// Outer iterations actually executed.
    pub outer_iterations_run: usize,
    /// Mean mixture order per outer iteration, over both recursion
    /// directions and all symbols.
    pub gamma_per_iter: Vec<f64>,
    /// Forward-direction-only mean order per outer iteration.
    pub gamma_forward_per_iter: Vec<f64>,
    /// Mixture-order histogram per outer iteration; index `o` counts
    /// messages of order `o + 1` over both directions.
    pub order_histogram: Vec<Vec<u64>>,
    /// Abstract operation tally over the whole frame.
    pub op_count: OpCount,
    /// Symbols per iteration (for per-symbol cost normalization).
    pub symbols_per_iteration: usize,
}

/// Expands a phase mixture against one symbol's observation factor.
///
/// For input component `i` and constellation point `m` with prior
/// `P_d(m) > 0`, the output has `z = z_i + r·conj(c_m)/σ²` and log weight
/// `log α_i + log P_d(m) + ln I₀(|z_new|) − ln I₀(|z_i|)`. The output is
/// normalized. Point-mass (pilot) priors keep the input order.
pub fn observation_expand(
    mixture: &TikhonovMixture,
    prior_row: &[f64],
    r: Complex64,
    sigma2: f64,
    constellation: &[Complex64],
    ops: &mut OpCount,
) -> TikhonovMixture {
    debug_assert_eq!(prior_row.len(), constellation.len());
    let base: Vec<Complex64> = constellation
        .iter()
        .map(|c| r * c.conj() / sigma2)
        .collect();
    ops.add(base.len() as u64, 0);

    let n_out_max = mixture.order() * constellation.len();
    let mut comps = Vec::with_capacity(n_out_max);
    let mut log_w = Vec::with_capacity(n_out_max);
    for (comp, &lw) in mixture.components().iter().zip(mixture.log_weights()) {
        let log_i0_in = log_i0(comp.kappa());
        ops.add(0, 1);
        for (m, &lp) in prior_row.iter().enumerate() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let z = comp.z + base[m];
            let weight = lw + lp + log_i0(z.norm()) - log_i0_in;
            ops.add(2, 1);
            comps.push(TikhonovComponent::new(z));
            log_w.push(weight);
        }
    }
    ops.add(log_w.len() as u64, log_w.len() as u64); // normalization log-sum-exp
    TikhonovMixture::new(comps, log_w)
        .expect("expansion emits at least one component per prior row")
        .normalized()
        .expect("expansion weights contain a finite maximum")
}

/// Applies the Wiener blur to every component (weights unchanged).
fn blur(mixture: TikhonovMixture, step: WrappedGaussianStep, ops: &mut OpCount) -> TikhonovMixture {
    let order = mixture.order();
    let log_w = mixture.log_weights().to_vec();
    let comps = mixture
        .components()
        .iter()
        .map(|&c| convolve_wrapped_gaussian(c, step))
        .collect();
    ops.add(order as u64, 0);
    TikhonovMixture::new(comps, log_w).expect("blur preserves shape")
}

/// Reduction cost: argmax scans, KL tests against the lead, and CMVM merges.
fn reduce_counted(
    mixture: TikhonovMixture,
    cfg: &ReductionConfig,
    ops: &mut OpCount,
) -> TikhonovMixture {
    let order_in = mixture.order() as u64;
    let reduced = mixture.reduce(cfg);
    let order_out = reduced.order() as u64;
    // scan + KL per surviving lead (1 op, 1 lut per tested pair, bounded by
    // order_in per cluster), one moment accumulation + ratio LUT per merged
    // member, and an inverse-ratio + arg LUT per emitted cluster
    ops.add(order_out * order_in, order_out * order_in);
    ops.add(order_in, order_in);
    ops.add(0, 2 * order_out);
    reduced
}

/// Forward recursion: message `k` is the phase belief at symbol `k` given
/// symbols `0..k`. `forward[0]` is uniform.
pub fn forward_pass(
    received: &ReceivedBlock,
    priors: &SymbolSoftInfo,
    cfg: &DetectorConfig,
    sigma_delta: f64,
    sigma2: f64,
    ops: &mut OpCount,
) -> (Vec<TikhonovMixture>, Vec<usize>) {
    directed_pass(received, priors, cfg, sigma_delta, sigma2, true, ops)
}

/// Backward recursion, the mirror image: `backward[K−1]` is uniform.
pub fn backward_pass(
    received: &ReceivedBlock,
    priors: &SymbolSoftInfo,
    cfg: &DetectorConfig,
    sigma_delta: f64,
    sigma2: f64,
    ops: &mut OpCount,
) -> (Vec<TikhonovMixture>, Vec<usize>) {
    directed_pass(received, priors, cfg, sigma_delta, sigma2, false, ops)
}

fn directed_pass(
    received: &ReceivedBlock,
    priors: &SymbolSoftInfo,
    cfg: &DetectorConfig,
    sigma_delta: f64,
    sigma2: f64,
    forward: bool,
    ops: &mut OpCount,
) -> (Vec<TikhonovMixture>, Vec<usize>) {
    let block_len = received.samples.len();
    assert_eq!(priors.num_symbols(), block_len, "prior table length mismatch");
    let m = priors.constellation_size();
    let constellation: Vec<Complex64> = (0..m)
        .map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / m as f64))
        .collect();
    let step = WrappedGaussianStep::new(sigma_delta).expect("sigma_delta validated upstream");
    let reduction = cfg.effective_reduction();

    let mut messages: Vec<TikhonovMixture> = Vec::with_capacity(block_len);
    messages.push(TikhonovMixture::uniform());
    let mut orders = Vec::with_capacity(block_len);
    orders.push(1usize);
    for step_idx in 1..block_len {
        let obs_symbol = if forward { step_idx - 1 } else { block_len - step_idx };
        let expanded = observation_expand(
            &messages[step_idx - 1],
            priors.row(obs_symbol),
            received.samples[obs_symbol],
            sigma2,
            &constellation,
            ops,
        );
        let blurred = blur(expanded, step, ops);
        let reduced = reduce_counted(blurred, &reduction, ops);
        orders.push(reduced.order());
        messages.push(reduced);
    }
    if !forward {
        messages.reverse();
        orders.reverse();
    }
    (messages, orders)
}

/// Upward symbol posterior from the two phase messages and the observation.
///
/// `P_u(m) ∝ Σ_{i,j} exp(log α_i^f + log α_j^b + ln I₀(|z_i^f + z_j^b +
/// r·conj(c_m)/σ²|) − ln I₀(|z_i^f|) − ln I₀(|z_j^b|))`. Returns the
/// normalized log row.
pub fn compute_pu(
    forward_msg: &TikhonovMixture,
    backward_msg: &TikhonovMixture,
    r: Complex64,
    sigma2: f64,
    constellation: &[Complex64],
    ops: &mut OpCount,
) -> Vec<f64> {
    let nf = forward_msg.order();
    let nb = backward_msg.order();
    // pair-level constants: z_i^f + z_j^b, log α_i^f + log α_j^b − ln I₀ terms
    let mut pair_z = Vec::with_capacity(nf * nb);
    let mut pair_lw = Vec::with_capacity(nf * nb);
    for (cf, &lwf) in forward_msg.components().iter().zip(forward_msg.log_weights()) {
        let li_f = log_i0(cf.kappa());
        for (cb, &lwb) in backward_msg.components().iter().zip(backward_msg.log_weights()) {
            let li_b = log_i0(cb.kappa());
            pair_z.push(cf.z + cb.z);
            pair_lw.push(lwf + lwb - li_f - li_b);
        }
    }
    ops.add((nf * nb) as u64, (nf + nb) as u64);

    let mut row = Vec::with_capacity(constellation.len());
    let mut terms = Vec::with_capacity(nf * nb);
    for c in constellation {
        let x = r * c.conj() / sigma2;
        terms.clear();
        for (z, lw) in pair_z.iter().zip(&pair_lw) {
            terms.push(lw + log_i0((z + x).norm()));
        }
        ops.add(1 + 2 * terms.len() as u64, 2 * terms.len() as u64);
        row.push(log_sum_exp_slice(&terms));
    }
    let lse = log_sum_exp_slice(&row);
    for v in &mut row {
        *v -= lse;
    }
    row
}

/// Joint phase estimation and LDPC decoding.
///
/// Each outer iteration rebuilds the constellation priors from the decoder's
/// extrinsic LLRs (uniform on the first pass), runs both phase recursions,
/// forms every symbol posterior, converts to bit LLRs, and runs the inner
/// LDPC iterations; it exits early on a zero syndrome. Returns the hard
/// codeword decision and the per-frame statistics.
pub fn joint_decode(
    received: &ReceivedBlock,
    frame: &FrameConfig,
    code: &LdpcCode,
    cfg: &DetectorConfig,
) -> (Vec<bool>, DetectorStats) {
    assert_eq!(received.samples.len(), frame.block_len, "block length mismatch");
    assert_eq!(code.n(), frame.data_bit_count(), "code length vs frame data bits");
    let sigma2 = frame.noise_variance();
    let constellation = frame.constellation();
    let n_max = cfg.effective_reduction().n_max;

    let mut stats = DetectorStats {
        symbols_per_iteration: frame.block_len,
        ..DetectorStats::default()
    };
    let mut decoder_extrinsic = vec![0.0; code.n()];
    let mut hard_bits = vec![false; code.n()];

    for _outer in 0..cfg.n_outer {
        let priors = bits_to_symbol_probs(&decoder_extrinsic, frame)
            .expect("extrinsic vector has codeword length");
        let mut ops = OpCount::default();
        let (fwd, fwd_orders) =
            forward_pass(received, &priors, cfg, frame.sigma_delta, sigma2, &mut ops);
        let (bwd, bwd_orders) =
            backward_pass(received, &priors, cfg, frame.sigma_delta, sigma2, &mut ops);

        let mut hist = vec![0u64; n_max];
        let mut order_sum = 0u64;
        for &o in fwd_orders.iter().chain(&bwd_orders) {
            hist[(o - 1).min(n_max - 1)] += 1;
            order_sum += o as u64;
        }
        stats
            .gamma_per_iter
            .push(order_sum as f64 / (fwd_orders.len() + bwd_orders.len()) as f64);
        stats.gamma_forward_per_iter.push(
            fwd_orders.iter().sum::<usize>() as f64 / fwd_orders.len() as f64,
        );
        stats.order_histogram.push(hist);

        let rows: Vec<Vec<f64>> = (0..frame.block_len)
            .map(|k| {
                compute_pu(&fwd[k], &bwd[k], received.samples[k], sigma2, &constellation, &mut ops)
            })
            .collect();
        let posteriors = SymbolSoftInfo::from_rows(frame.modulation_order, rows);
        let detector_llrs = symbol_probs_to_bit_llrs(&posteriors, frame);

        let decode = decode_pass(code, &detector_llrs, cfg.n_inner_ldpc);
        decoder_extrinsic = decode.extrinsic_llrs;
        hard_bits = decode.hard_bits;
        stats.op_count.merge(ops);
        stats.outer_iterations_run += 1;
        if decode.syndrome_ok {
            stats.syndrome_ok = true;
            break;
        }
    }
    (hard_bits, stats)
}
