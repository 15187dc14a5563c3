//! MPSK modulation, pilot insertion, Wiener phase-noise paths, and AWGN.
//!
//! Conventions fixed here and relied on everywhere else:
//!
//! * Constellation points are `c_m = e^{j2πm/M}` with unit energy.
//! * The bit label of point `m` is the binary-reflected Gray code of `m`,
//!   read MSB first: for QPSK, `00 → e^{j0}`, `01 → e^{jπ/2}`,
//!   `11 → e^{jπ}`, `10 → e^{j3π/2}`.
//! * SNR is the symbol-energy ratio `Es/N0` with `N0 = 2σ²`, where `σ²` is
//!   the per-component noise variance: `σ² = 1 / (2·10^{Es/N0[dB]/10})`.
//! * Pilot positions are `{0, p, 2p, ...} ∩ [0, K)`; codeword bits fill the
//!   remaining (data) positions in natural order, `log2(M)` bits per symbol.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::fmt;

/// Configuration of one transmitted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    /// Constellation order M (power of two, ≥ 2).
    pub modulation_order: usize,
    /// Block length K in symbols, pilots included.
    pub block_len: usize,
    /// Pilot spacing; `None` disables pilots entirely.
    pub pilot_period: Option<usize>,
    /// Constellation index transmitted at pilot positions.
    pub pilot_symbol_index: usize,
    /// Wiener phase-increment standard deviation, radians/symbol.
    pub sigma_delta: f64,
    /// Symbol-energy to noise-density ratio in dB.
    pub es_n0_db: f64,
    /// Base seed recorded with the frame (substreams are derived by the harness).
    pub seed: u64,
}

/// Channel-layer errors.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    InvalidConfig(String),
    BitCountMismatch { expected: usize, got: usize },
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::InvalidConfig(msg) => write!(f, "invalid frame config: {msg}"),
            ChannelError::BitCountMismatch { expected, got } => {
                write!(f, "expected {expected} data bits, got {got}")
            }
        }
    }
}

impl std::error::Error for ChannelError {}

impl FrameConfig {
    /// Validates the structural invariants.
    pub fn validate(&self) -> Result<(), ChannelError> {
        let m = self.modulation_order;
        if m < 2 || !m.is_power_of_two() {
            return Err(ChannelError::InvalidConfig(format!(
                "modulation order {m} is not a power of two ≥ 2"
            )));
        }
        if self.block_len == 0 {
            return Err(ChannelError::InvalidConfig("block length must be ≥ 1".into()));
        }
        if self.pilot_period == Some(0) {
            return Err(ChannelError::InvalidConfig("pilot period must be positive".into()));
        }
        if self.pilot_symbol_index >= m {
            return Err(ChannelError::InvalidConfig(format!(
                "pilot symbol index {} out of range for M={m}",
                self.pilot_symbol_index
            )));
        }
        if !(self.sigma_delta >= 0.0) || !self.sigma_delta.is_finite() {
            return Err(ChannelError::InvalidConfig(format!(
                "sigma_delta {} must be finite and ≥ 0",
                self.sigma_delta
            )));
        }
        Ok(())
    }

    /// Bits per symbol, `log2(M)`.
    #[inline]
    pub fn bits_per_symbol(&self) -> usize {
        self.modulation_order.trailing_zeros() as usize
    }

    /// `true` at pilot positions.
    pub fn pilot_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.block_len];
        if let Some(p) = self.pilot_period {
            for k in (0..self.block_len).step_by(p) {
                mask[k] = true;
            }
        }
        mask
    }

    /// Number of data (non-pilot) symbol positions.
    pub fn data_symbol_count(&self) -> usize {
        match self.pilot_period {
            Some(p) => self.block_len - self.block_len.div_ceil(p),
            None => self.block_len,
        }
    }

    /// Total data bits carried by the frame.
    pub fn data_bit_count(&self) -> usize {
        self.data_symbol_count() * self.bits_per_symbol()
    }

    /// Per-component AWGN variance `σ²` implied by `es_n0_db` (with `N0 = 2σ²`).
    pub fn noise_variance(&self) -> f64 {
        0.5 * 10f64.powf(-self.es_n0_db / 10.0)
    }

    /// Constellation point `e^{j2πm/M}`.
    #[inline]
    pub fn constellation_point(&self, m: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * m as f64 / self.modulation_order as f64)
    }

    /// All M constellation points in index order.
    pub fn constellation(&self) -> Vec<Complex64> {
        (0..self.modulation_order).map(|m| self.constellation_point(m)).collect()
    }
}

/// One received block: channel samples plus diagnostics.
///
/// `true_phase` exists for instrumentation only; detectors receive `samples`
/// and `pilot_mask` and never read the phase path.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    pub samples: Vec<Complex64>,
    pub true_phase: Vec<f64>,
    pub pilot_mask: Vec<bool>,
}

/// Binary-reflected Gray code of `m`.
#[inline]
pub fn gray_encode(m: usize) -> usize {
    m ^ (m >> 1)
}

/// Inverse of [`gray_encode`].
#[inline]
pub fn gray_decode(label: usize) -> usize {
    let mut m = label;
    let mut shift = 1;
    while (m >> shift) > 0 {
        m ^= m >> shift;
        shift <<= 1;
    }
    m
}

/// Maps data bits onto the frame's symbol sequence.
///
/// Bits are consumed MSB-first in groups of `log2(M)`; each group is a Gray
/// label selecting the constellation point. Pilot positions carry the fixed
/// pilot symbol and consume no bits.
pub fn modulate(bits: &[bool], cfg: &FrameConfig) -> Result<Vec<Complex64>, ChannelError> {
    cfg.validate()?;
    let expected = cfg.data_bit_count();
    if bits.len() != expected {
        return Err(ChannelError::BitCountMismatch { expected, got: bits.len() });
    }
    let q = cfg.bits_per_symbol();
    let mask = cfg.pilot_mask();
    let mut out = Vec::with_capacity(cfg.block_len);
    let mut next_bit = 0;
    for k in 0..cfg.block_len {
        if mask[k] {
            out.push(cfg.constellation_point(cfg.pilot_symbol_index));
        } else {
            let mut label = 0usize;
            for b in 0..q {
                label = (label << 1) | usize::from(bits[next_bit + b]);
            }
            next_bit += q;
            out.push(cfg.constellation_point(gray_decode(label)));
        }
    }
    Ok(out)
}

/// Draws a Wiener phase path: `θ₀ ~ U[0, 2π)`, increments i.i.d.
/// `N(0, σ_Δ²)`. Values are reported wrapped to `[0, 2π)`.
pub fn generate_phase_path<R: Rng + ?Sized>(cfg: &FrameConfig, rng: &mut R) -> Vec<f64> {
    let two_pi = 2.0 * PI;
    let mut theta = rng.gen::<f64>() * two_pi;
    let mut path = Vec::with_capacity(cfg.block_len);
    path.push(theta);
    for _ in 1..cfg.block_len {
        if cfg.sigma_delta > 0.0 {
            let step: f64 = rng.sample(StandardNormal);
            theta = (theta + cfg.sigma_delta * step).rem_euclid(two_pi);
        }
        path.push(theta);
    }
    path
}

/// Applies phase rotation and AWGN: `r_k = c_k e^{jθ_k} + n_k` with `n_k`
/// circularly symmetric complex Gaussian of per-component variance `σ²`.
pub fn apply_channel<R: Rng + ?Sized>(
    symbols: &[Complex64],
    theta_path: &[f64],
    cfg: &FrameConfig,
    rng: &mut R,
) -> ReceivedBlock {
    assert_eq!(symbols.len(), theta_path.len(), "symbol/phase length mismatch");
    let sigma = cfg.noise_variance().sqrt();
    let samples = symbols
        .iter()
        .zip(theta_path)
        .map(|(&c, &theta)| {
            let rotated = c * Complex64::from_polar(1.0, theta);
            let n_re: f64 = rng.sample(StandardNormal);
            let n_im: f64 = rng.sample(StandardNormal);
            rotated + Complex64::new(sigma * n_re, sigma * n_im)
        })
        .collect();
    ReceivedBlock {
        samples,
        true_phase: theta_path.to_vec(),
        pilot_mask: cfg.pilot_mask(),
    }
}
