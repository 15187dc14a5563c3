//! Quantized discrete-phase detector: exact sum-product message passing on a
//! uniform L-level phase grid.
//!
//! This is both the comparison algorithm (at its operating value `L = 8`)
//! and, at large `L`, the numerical reference the mixture detector is
//! validated against. Messages live in log domain on the grid
//! `θ_l = 2πl/L`; the Wiener step becomes a circular convolution with a
//! sampled wrapped-Gaussian kernel. Convolutions run as direct `O(L²)` sums
//! for small grids and through an FFT above [`FFT_THRESHOLD`]; the two paths
//! agree to machine precision.

use crate::channel::{FrameConfig, ReceivedBlock};
use crate::dirstat::wrapped_gaussian_pdf;
use crate::ldpc::{
    bits_to_symbol_probs, decode_pass, symbol_probs_to_bit_llrs, LdpcCode, SymbolSoftInfo,
};
use crate::logspace::log_sum_exp_slice;
use crate::phase_spa::DetectorStats;
use num_complex::Complex64;
use rustfft::{num_complex::Complex as FftComplex, Fft, FftPlanner};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Grid sizes above this use the FFT convolution path.
pub const FFT_THRESHOLD: usize = 64;

/// Errors from invalid grid parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DpError(pub String);

impl fmt::Display for DpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "discrete-phase detector: {}", self.0)
    }
}

impl std::error::Error for DpError {}

/// Samples the wrapped-Gaussian step density on the grid and normalizes it
/// to sum 1. `sigma_delta = 0` yields the identity (delta) kernel.
pub fn build_transition_kernel(levels: usize, sigma_delta: f64) -> Result<Vec<f64>, DpError> {
    if levels < 2 {
        return Err(DpError(format!("need at least 2 levels, got {levels}")));
    }
    if !(sigma_delta >= 0.0) || !sigma_delta.is_finite() {
        return Err(DpError(format!("sigma_delta {sigma_delta} must be finite and ≥ 0")));
    }
    if sigma_delta == 0.0 {
        let mut kernel = vec![0.0; levels];
        kernel[0] = 1.0;
        return Ok(kernel);
    }
    // evaluate half the grid and mirror: kernel[d] = kernel[L−d] exactly
    let mut kernel = vec![0.0; levels];
    for d in 0..=levels / 2 {
        let v = wrapped_gaussian_pdf(2.0 * PI * d as f64 / levels as f64, sigma_delta)
            .expect("sigma checked above");
        kernel[d] = v;
        if d != 0 && d != levels - d {
            kernel[levels - d] = v;
        }
    }
    let total: f64 = kernel.iter().sum();
    for v in &mut kernel {
        *v /= total;
    }
    Ok(kernel)
}

/// Direct circular convolution `out[l] = Σ_d in[l−d]·kernel[d]`.
pub fn circular_convolve_direct(input: &[f64], kernel: &[f64]) -> Vec<f64> {
    let l = input.len();
    debug_assert_eq!(kernel.len(), l);
    (0..l)
        .map(|i| {
            (0..l)
                .map(|d| input[(i + l - d) % l] * kernel[d])
                .sum()
        })
        .collect()
}

/// Grid detector with precomputed kernel (and its FFT where used).
pub struct DpDetector {
    levels: usize,
    kernel: Vec<f64>,
    fft: Option<FftPair>,
    grid_cos_sin: Vec<(f64, f64)>,
}

struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_spectrum: Vec<FftComplex<f64>>,
}

impl DpDetector {
    pub fn new(levels: usize, sigma_delta: f64) -> Result<Self, DpError> {
        let kernel = build_transition_kernel(levels, sigma_delta)?;
        let fft = if levels > FFT_THRESHOLD && sigma_delta > 0.0 {
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(levels);
            let inverse = planner.plan_fft_inverse(levels);
            let mut spectrum: Vec<FftComplex<f64>> =
                kernel.iter().map(|&v| FftComplex::new(v, 0.0)).collect();
            forward.process(&mut spectrum);
            Some(FftPair { forward, inverse, kernel_spectrum: spectrum })
        } else {
            None
        };
        let grid_cos_sin = (0..levels)
            .map(|l| {
                let theta = 2.0 * PI * l as f64 / levels as f64;
                (theta.cos(), theta.sin())
            })
            .collect();
        Ok(DpDetector { levels, kernel, fft, grid_cos_sin })
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    /// Circular convolution of a (linear-domain) grid message with the step
    /// kernel. Dispatches to the FFT path on large grids.
    fn convolve(&self, input: &[f64]) -> Vec<f64> {
        if let Some(fft) = &self.fft {
            let mut buf: Vec<FftComplex<f64>> =
                input.iter().map(|&v| FftComplex::new(v, 0.0)).collect();
            fft.forward.process(&mut buf);
            for (b, k) in buf.iter_mut().zip(&fft.kernel_spectrum) {
                *b *= k;
            }
            fft.inverse.process(&mut buf);
            let scale = 1.0 / self.levels as f64;
            // FFT round-off can leave tiny negative values; they are noise
            buf.iter().map(|c| (c.re * scale).max(0.0)).collect()
        } else if self.kernel[0] == 1.0 {
            input.to_vec()
        } else {
            circular_convolve_direct(input, &self.kernel)
        }
    }

    /// Log observation factor `Re[r·conj(c_m) e^{-jθ_l}]/σ²` for each grid
    /// point, mixed over the prior row: `log p_d(θ_l)`.
    fn log_pd_row(
        &self,
        r: Complex64,
        prior_row: &[f64],
        constellation: &[Complex64],
        sigma2: f64,
        out: &mut Vec<f64>,
    ) {
        out.clear();
        out.resize(self.levels, f64::NEG_INFINITY);
        let mut terms = Vec::with_capacity(prior_row.len());
        for (l, &(cos_t, sin_t)) in self.grid_cos_sin.iter().enumerate() {
            terms.clear();
            for (m, &lp) in prior_row.iter().enumerate() {
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                let x = r * constellation[m].conj() / sigma2;
                terms.push(lp + x.re * cos_t + x.im * sin_t);
            }
            out[l] = log_sum_exp_slice(&terms);
        }
    }

    /// One recursion direction over the block; returns per-symbol log
    /// messages (normalized on the grid).
    fn pass(
        &self,
        received: &ReceivedBlock,
        priors: &SymbolSoftInfo,
        constellation: &[Complex64],
        sigma2: f64,
        forward: bool,
    ) -> Vec<Vec<f64>> {
        let block_len = received.samples.len();
        let l = self.levels;
        let uniform = vec![-(l as f64).ln(); l];
        let mut messages = Vec::with_capacity(block_len);
        messages.push(uniform);
        let mut pd = Vec::new();
        let mut linear = vec![0.0; l];
        for step in 1..block_len {
            let obs_symbol = if forward { step - 1 } else { block_len - step };
            self.log_pd_row(
                received.samples[obs_symbol],
                priors.row(obs_symbol),
                constellation,
                sigma2,
                &mut pd,
            );
            let prev = &messages[step - 1];
            let mx = prev
                .iter()
                .zip(&pd)
                .map(|(a, b)| a + b)
                .fold(f64::NEG_INFINITY, f64::max);
            for (dst, (a, b)) in linear.iter_mut().zip(prev.iter().zip(&pd)) {
                *dst = (a + b - mx).exp();
            }
            let conv = self.convolve(&linear);
            let mut msg: Vec<f64> = conv.iter().map(|&v| v.max(0.0).ln()).collect();
            let lse = log_sum_exp_slice(&msg);
            for v in &mut msg {
                *v -= lse;
            }
            messages.push(msg);
        }
        if !forward {
            messages.reverse();
        }
        messages
    }

    /// Full forward/backward sweep producing the normalized log posterior
    /// row `P_u` for every symbol.
    pub fn forward_backward(
        &self,
        received: &ReceivedBlock,
        priors: &SymbolSoftInfo,
        sigma2: f64,
    ) -> Vec<Vec<f64>> {
        let m = priors.constellation_size();
        let constellation: Vec<Complex64> = (0..m)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64))
            .collect();
        let fwd = self.pass(received, priors, &constellation, sigma2, true);
        let bwd = self.pass(received, priors, &constellation, sigma2, false);

        let mut rows = Vec::with_capacity(received.samples.len());
        let mut terms = vec![0.0; self.levels];
        for (k, r) in received.samples.iter().enumerate() {
            let mut row = Vec::with_capacity(m);
            for c in &constellation {
                let x = r * c.conj() / sigma2;
                for (l, t) in terms.iter_mut().enumerate() {
                    let (cos_t, sin_t) = self.grid_cos_sin[l];
                    *t = fwd[k][l] + bwd[k][l] + x.re * cos_t + x.im * sin_t;
                }
                row.push(log_sum_exp_slice(&terms));
            }
            let lse = log_sum_exp_slice(&row);
            for v in &mut row {
                *v -= lse;
            }
            rows.push(row);
        }
        rows
    }
}

/// Per-symbol posteriors from the grid detector; convenience wrapper that
/// builds the detector on the fly.
pub fn dp_forward_backward(
    received: &ReceivedBlock,
    priors: &SymbolSoftInfo,
    levels: usize,
    sigma_delta: f64,
    sigma2: f64,
) -> Result<Vec<Vec<f64>>, DpError> {
    Ok(DpDetector::new(levels, sigma_delta)?.forward_backward(received, priors, sigma2))
}

/// Joint decoding with the grid detector: same outer loop as the mixture
/// algorithm, with the grid sweep supplying the symbol posteriors.
pub fn dp_joint_decode(
    received: &ReceivedBlock,
    frame: &FrameConfig,
    code: &LdpcCode,
    levels: usize,
    n_outer: usize,
    n_inner_ldpc: usize,
) -> Result<(Vec<bool>, DetectorStats), DpError> {
    assert_eq!(received.samples.len(), frame.block_len, "block length mismatch");
    assert_eq!(code.n(), frame.data_bit_count(), "code length vs frame data bits");
    let detector = DpDetector::new(levels, frame.sigma_delta)?;
    let sigma2 = frame.noise_variance();

    let mut stats = DetectorStats {
        symbols_per_iteration: frame.block_len,
        ..DetectorStats::default()
    };
    let mut decoder_extrinsic = vec![0.0; code.n()];
    let mut hard_bits = vec![false; code.n()];
    for _ in 0..n_outer {
        let priors = bits_to_symbol_probs(&decoder_extrinsic, frame)
            .expect("extrinsic vector has codeword length");
        let rows = detector.forward_backward(received, &priors, sigma2);
        let posteriors = SymbolSoftInfo::from_rows(frame.modulation_order, rows);
        let detector_llrs = symbol_probs_to_bit_llrs(&posteriors, frame);
        let decode = decode_pass(code, &detector_llrs, n_inner_ldpc);
        decoder_extrinsic = decode.extrinsic_llrs;
        hard_bits = decode.hard_bits;
        stats.outer_iterations_run += 1;
        if decode.syndrome_ok {
            stats.syndrome_ok = true;
            break;
        }
    }
    Ok((hard_bits, stats))
}
