//! Monte Carlo experiment driver: seeded trial execution across an SNR
//! grid, PER/BER and mixture-order aggregation, and CSV emission.
//!
//! Reproducibility contract: every frame owns an independent RNG stream,
//! `ChaCha12` seeded with the experiment seed and streamed by
//! `(snr_index << 32) | frame_index`. Frames are aggregated in frame-index
//! order with exact integer counters, so results are identical for any
//! thread count, and a whole run is a pure function of `(config, seed)`.

pub mod config;
mod report;

pub use config::parse_config;
pub use report::emit_report;

use crate::channel::{apply_channel, generate_phase_path, modulate, ChannelError, FrameConfig};
use crate::dp_baseline::dp_joint_decode;
use crate::ldpc::{parse_alist, peg_construct, LdpcCode, LdpcError, PegConfig};
use crate::mixture::ReductionConfig;
use crate::phase_spa::{joint_decode, DetectorConfig, DetectorStats, OpCount};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

/// Which detector the experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Adaptive Tikhonov-mixture detector.
    MultiHyp,
    /// Discrete-phase grid detector.
    Dp,
    /// Single-component Tikhonov tracker.
    Barb,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MultiHyp => "multi_hyp",
            Algorithm::Dp => "dp",
            Algorithm::Barb => "barb",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "multi_hyp" => Some(Algorithm::MultiHyp),
            "dp" => Some(Algorithm::Dp),
            "barb" => Some(Algorithm::Barb),
            _ => None,
        }
    }
}

/// Where the LDPC code comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeSource {
    /// Load an alist file from disk.
    AlistFile(PathBuf),
    /// Parse alist text directly (used by tests).
    AlistText(String),
    /// Deterministic seeded construction.
    Generated { n: usize, rate: f64, var_degree: usize, seed: u64 },
}

impl CodeSource {
    pub fn load(&self) -> Result<LdpcCode, HarnessError> {
        match self {
            CodeSource::AlistFile(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    HarnessError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                parse_alist(&text).map_err(HarnessError::Code)
            }
            CodeSource::AlistText(text) => parse_alist(text).map_err(HarnessError::Code),
            CodeSource::Generated { n, rate, var_degree, seed } => {
                let cfg = PegConfig::from_rate(*n, *rate, *var_degree, *seed)
                    .map_err(HarnessError::Code)?;
                peg_construct(&cfg).map_err(HarnessError::Code)
            }
        }
    }

    /// Deterministic one-line description for the metadata echo.
    pub fn describe(&self) -> String {
        match self {
            CodeSource::AlistFile(p) => format!("alist:{}", p.display()),
            CodeSource::AlistText(_) => "alist:<inline>".to_string(),
            CodeSource::Generated { n, rate, var_degree, seed } => {
                format!("generated:n={n},rate={rate},var_degree={var_degree},seed={seed}")
            }
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub code_source: CodeSource,
    pub modulation_order: usize,
    pub pilot_period: Option<usize>,
    pub pilot_symbol_index: usize,
    pub sigma_delta: f64,
    pub snr_grid_db: Vec<f64>,
    pub max_frames: u64,
    pub target_frame_errors: u64,
    pub seed: u64,
    pub dp_levels: usize,
    pub mu: f64,
    pub n_max: usize,
    pub n_outer: usize,
    pub n_inner_ldpc: usize,
    pub threads: usize,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Sensible defaults for everything except algorithm, code and SNR grid.
    pub fn defaults(algorithm: Algorithm, code_source: CodeSource, snr_grid_db: Vec<f64>) -> Self {
        ExperimentConfig {
            algorithm,
            code_source,
            modulation_order: 4,
            pilot_period: Some(60),
            pilot_symbol_index: 0,
            sigma_delta: 0.1,
            snr_grid_db,
            max_frames: 100_000,
            target_frame_errors: 100,
            seed: 1,
            dp_levels: 8,
            mu: 3.5,
            n_max: 20,
            n_outer: 10,
            n_inner_ldpc: 5,
            threads: 1,
            out_dir: None,
        }
    }

    pub fn detector(&self) -> Result<DetectorConfig, HarnessError> {
        Ok(DetectorConfig {
            reduction: ReductionConfig::new(self.mu, self.n_max)
                .map_err(|e| HarnessError::Config(format!("reduction config: {e}")))?,
            n_outer: self.n_outer,
            n_inner_ldpc: self.n_inner_ldpc,
            barb_mode: self.algorithm == Algorithm::Barb,
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.snr_grid_db.is_empty() {
            return Err(HarnessError::Config("snr grid is empty".into()));
        }
        if self.max_frames == 0 {
            return Err(HarnessError::Config("max_frames must be ≥ 1".into()));
        }
        if self.threads == 0 {
            return Err(HarnessError::Config("threads must be ≥ 1".into()));
        }
        if self.n_outer == 0 || self.n_inner_ldpc == 0 {
            return Err(HarnessError::Config("iteration counts must be ≥ 1".into()));
        }
        if self.algorithm == Algorithm::Dp && self.dp_levels < 2 {
            return Err(HarnessError::Config("dp_levels must be ≥ 2".into()));
        }
        self.detector().map(|_| ())
    }

    /// Frame configuration for one SNR point, given the loaded code.
    pub fn frame_for(&self, code: &LdpcCode, es_n0_db: f64) -> Result<FrameConfig, HarnessError> {
        let q = self.modulation_order.trailing_zeros() as usize;
        if self.modulation_order < 2 || !self.modulation_order.is_power_of_two() {
            return Err(HarnessError::Config(format!(
                "modulation order {} is not a power of two",
                self.modulation_order
            )));
        }
        if code.n() % q != 0 {
            return Err(HarnessError::Config(format!(
                "code length {} not divisible by bits/symbol {q}",
                code.n()
            )));
        }
        let data_symbols = code.n() / q;
        let block_len = block_len_for(data_symbols, self.pilot_period).ok_or_else(|| {
            HarnessError::Config("no block length fits the pilot pattern".into())
        })?;
        let cfg = FrameConfig {
            modulation_order: self.modulation_order,
            block_len,
            pilot_period: self.pilot_period,
            pilot_symbol_index: self.pilot_symbol_index,
            sigma_delta: self.sigma_delta,
            es_n0_db,
            seed: self.seed,
        };
        cfg.validate().map_err(HarnessError::Channel)?;
        Ok(cfg)
    }

    /// Canonical `key=value` echo for the report headers, sorted by key.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("algorithm".into(), self.algorithm.name().to_string()),
            ("code".into(), self.code_source.describe()),
            ("dp_levels".into(), self.dp_levels.to_string()),
            ("max_frames".into(), self.max_frames.to_string()),
            ("modulation_order".into(), self.modulation_order.to_string()),
            ("mu".into(), self.mu.to_string()),
            ("n_inner_ldpc".into(), self.n_inner_ldpc.to_string()),
            ("n_max".into(), self.n_max.to_string()),
            ("n_outer".into(), self.n_outer.to_string()),
            (
                "pilot_period".into(),
                self.pilot_period.map_or("none".to_string(), |p| p.to_string()),
            ),
            ("pilot_symbol_index".into(), self.pilot_symbol_index.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("sigma_delta".into(), self.sigma_delta.to_string()),
            (
                "snr_grid_db".into(),
                self.snr_grid_db
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("target_frame_errors".into(), self.target_frame_errors.to_string()),
        ];
        kv.sort();
        kv
    }
}

/// Smallest block length whose non-pilot positions carry exactly
/// `data_symbols` symbols.
fn block_len_for(data_symbols: usize, pilot_period: Option<usize>) -> Option<usize> {
    match pilot_period {
        None => Some(data_symbols),
        Some(p) => {
            let mut k = data_symbols;
            // k − ceil(k/p) grows by 0 or 1 per step, so the first hit wins
            for _ in 0..=2 * data_symbols + p {
                if k - k.div_ceil(p) == data_symbols {
                    return Some(k);
                }
                k += 1;
            }
            None
        }
    }
}

/// Harness-level errors.
#[derive(Debug)]
pub enum HarnessError {
    Config(String),
    Code(LdpcError),
    Channel(ChannelError),
    Io(std::io::Error),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(msg) => write!(f, "configuration error: {msg}"),
            HarnessError::Code(e) => write!(f, "code error: {e}"),
            HarnessError::Channel(e) => write!(f, "channel error: {e}"),
            HarnessError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e)
    }
}

/// Mean-of-means accumulator for γ(i) over frames.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GammaAccum {
    pub sum: f64,
    pub frames: u64,
}

impl GammaAccum {
    pub fn mean(&self) -> f64 {
        if self.frames == 0 {
            f64::NAN
        } else {
            self.sum / self.frames as f64
        }
    }
}

/// Aggregated statistics for one SNR point.
#[derive(Debug, Clone, Default)]
pub struct SnrPointStats {
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub info_bits: u64,
    /// γ per outer iteration (both directions), over frames that executed it.
    pub gamma: Vec<GammaAccum>,
    /// Forward-direction-only γ.
    pub gamma_forward: Vec<GammaAccum>,
    /// Mixture-order histogram per outer iteration; index `o` = order `o+1`.
    pub order_hist: Vec<Vec<u64>>,
    pub ops: OpCount,
    /// Σ over frames of `block_len × outer iterations executed`.
    pub symbol_iterations: u64,
    pub wall_time_s: f64,
}

impl SnrPointStats {
    pub fn per(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.frame_errors as f64 / self.frames as f64
        }
    }

    pub fn ber(&self) -> f64 {
        if self.info_bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.info_bits as f64
        }
    }

    /// Mean counted operations per symbol per outer iteration.
    pub fn ops_per_symbol_iteration(&self) -> (f64, f64) {
        if self.symbol_iterations == 0 {
            (0.0, 0.0)
        } else {
            let d = self.symbol_iterations as f64;
            (self.ops.ops as f64 / d, self.ops.lut as f64 / d)
        }
    }
}

/// Run metadata echoed into every report file.
#[derive(Debug, Clone)]
pub struct RunMetadata {
    pub version: String,
    pub rng: String,
    pub config_echo: Vec<(String, String)>,
}

/// Complete result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct TrialStats {
    pub points: Vec<SnrPointStats>,
    pub metadata: RunMetadata,
}

struct FrameOutcome {
    frame_error: bool,
    bit_errors: u64,
    stats: DetectorStats,
}

/// Runs the whole experiment; emits CSV files when `out_dir` is set.
///
/// Per-frame failures cannot occur by construction (all dimensions are
/// validated up front); configuration and I/O problems abort with an error.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialStats, HarnessError> {
    cfg.validate()?;
    let code = cfg.code_source.load()?;
    let detector = cfg.detector()?;
    // validate the frame geometry once before any work
    cfg.frame_for(&code, cfg.snr_grid_db[0])?;

    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let mut points = Vec::with_capacity(cfg.snr_grid_db.len());
    for (snr_idx, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let frame_cfg = cfg.frame_for(&code, snr_db)?;
        let start = Instant::now();
        let mut point = SnrPointStats { snr_db, ..SnrPointStats::default() };
        let mut next_frame: u64 = 0;
        'point: while point.frames < cfg.max_frames
            && point.frame_errors < cfg.target_frame_errors
        {
            let budget = cfg.max_frames - point.frames;
            let chunk = match &pool {
                None => 1u64,
                Some(_) => (cfg.threads as u64 * 2).min(budget),
            };
            let indices: Vec<u64> = (next_frame..next_frame + chunk).collect();
            next_frame += chunk;
            let run = |frame_idx: u64| {
                run_frame(&code, &frame_cfg, cfg, &detector, snr_idx as u64, frame_idx)
            };
            let outcomes: Vec<FrameOutcome> = match &pool {
                None => indices.iter().map(|&i| run(i)).collect(),
                Some(pool) => pool.install(|| {
                    use rayon::prelude::*;
                    indices.par_iter().map(|&i| run(i)).collect()
                }),
            };
            // aggregate strictly in frame-index order
            for outcome in outcomes {
                aggregate(&mut point, &outcome, code.k() as u64, frame_cfg.block_len as u64);
                if point.frames >= cfg.max_frames
                    || point.frame_errors >= cfg.target_frame_errors
                {
                    break 'point;
                }
            }
        }
        point.wall_time_s = start.elapsed().as_secs_f64();
        points.push(point);
    }

    let stats = TrialStats {
        points,
        metadata: RunMetadata {
            version: format!("{}-{}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            rng: "ChaCha12(seed_from_u64;stream=snr_index<<32|frame_index)".to_string(),
            config_echo: cfg.echo(),
        },
    };
    if let Some(dir) = &cfg.out_dir {
        emit_report(&stats, dir)?;
    }
    Ok(stats)
}

fn aggregate(point: &mut SnrPointStats, outcome: &FrameOutcome, k: u64, block_len: u64) {
    point.frames += 1;
    point.info_bits += k;
    point.bit_errors += outcome.bit_errors;
    if outcome.frame_error {
        point.frame_errors += 1;
    }
    let st = &outcome.stats;
    for (i, &g) in st.gamma_per_iter.iter().enumerate() {
        if point.gamma.len() <= i {
            point.gamma.push(GammaAccum::default());
            point.gamma_forward.push(GammaAccum::default());
        }
        point.gamma[i].sum += g;
        point.gamma[i].frames += 1;
        point.gamma_forward[i].sum += st.gamma_forward_per_iter[i];
        point.gamma_forward[i].frames += 1;
    }
    for (i, hist) in st.order_histogram.iter().enumerate() {
        if point.order_hist.len() <= i {
            point.order_hist.push(vec![0; hist.len()]);
        }
        let acc = &mut point.order_hist[i];
        if acc.len() < hist.len() {
            acc.resize(hist.len(), 0);
        }
        for (a, &h) in acc.iter_mut().zip(hist) {
            *a += h;
        }
    }
    point.ops.merge(st.op_count);
    point.symbol_iterations += block_len * st.outer_iterations_run as u64;
}

fn run_frame(
    code: &LdpcCode,
    frame_cfg: &FrameConfig,
    cfg: &ExperimentConfig,
    detector: &DetectorConfig,
    snr_idx: u64,
    frame_idx: u64,
) -> FrameOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(snr_idx << 32 | (frame_idx & 0xFFFF_FFFF));

    let info: Vec<bool> = (0..code.k()).map(|_| rng.gen()).collect();
    let cw = code.encode(&info).expect("info length matches k");
    let symbols = modulate(&cw, frame_cfg).expect("frame geometry validated");
    let path = generate_phase_path(frame_cfg, &mut rng);
    let rx = apply_channel(&symbols, &path, frame_cfg, &mut rng);

    let (hard, stats) = match cfg.algorithm {
        Algorithm::MultiHyp | Algorithm::Barb => joint_decode(&rx, frame_cfg, code, detector),
        Algorithm::Dp => dp_joint_decode(
            &rx,
            frame_cfg,
            code,
            cfg.dp_levels,
            cfg.n_outer,
            cfg.n_inner_ldpc,
        )
        .expect("dp parameters validated"),
    };
    let decoded = code.extract_info(&hard);
    let bit_errors = decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
    FrameOutcome { frame_error: bit_errors > 0, bit_errors, stats }
}

/// Table-model cost of the mixture detector per code symbol per iteration:
/// `ops = Mγ(11 + 5γ) + M`, `lut = Mγ(6 + γ)`.
pub fn complexity_model(modulation_order: usize, gamma: f64) -> (f64, f64) {
    let m = modulation_order as f64;
    let ops = m * gamma * (11.0 + 5.0 * gamma) + m;
    let lut = m * gamma * (6.0 + gamma);
    (ops, lut)
}

/// Table-model cost of the grid detector per code symbol per iteration:
/// `ops = 13ML + 10QL − 9L − 3M`, `lut = 3ML + 2QL − 3L − M`, with `Q` the
/// kernel-truncation parameter of the reference implementation.
pub fn complexity_model_dp(modulation_order: usize, levels: usize, q: f64) -> (f64, f64) {
    let m = modulation_order as f64;
    let l = levels as f64;
    let ops = 13.0 * m * l + 10.0 * q * l - 9.0 * l - 3.0 * m;
    let lut = 3.0 * m * l + 2.0 * q * l - 3.0 * l - m;
    (ops, lut)
}

/// One-sided 95% Clopper-Pearson upper bound on the error probability after
/// observing `errors` in `frames` trials.
pub fn clopper_pearson_upper95(errors: u64, frames: u64) -> f64 {
    const ALPHA: f64 = 0.05;
    if frames == 0 || errors >= frames {
        return 1.0;
    }
    // bisect on u: P(X ≤ errors; frames, u) = α, computed in log domain
    let log_cdf = |u: f64| -> f64 {
        let (lu, l1u) = (u.ln(), (1.0 - u).ln());
        let n = frames as f64;
        let mut log_binom = 0.0; // ln C(n, 0)
        let mut terms = Vec::with_capacity(errors as usize + 1);
        for i in 0..=errors {
            if i > 0 {
                log_binom += ((n - i as f64 + 1.0) / i as f64).ln();
            }
            terms.push(log_binom + i as f64 * lu + (n - i as f64) * l1u);
        }
        crate::logspace::log_sum_exp_slice(&terms)
    };
    let target = ALPHA.ln();
    let (mut lo, mut hi) = (errors as f64 / frames as f64, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_cdf(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}
