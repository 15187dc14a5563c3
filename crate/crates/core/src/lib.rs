//! Joint iterative LDPC decoding and strong-phase-noise estimation.
//!
//! The receiver tracks a Wiener phase process alongside LDPC belief
//! propagation by representing the continuous phase messages as adaptive
//! Tikhonov mixtures, with a KL-driven mixture reduction step bounding the
//! model order per symbol. A quantized discrete-phase detector and a
//! single-component tracker are included as baselines, plus a seeded Monte
//! Carlo harness for packet-error-rate experiments.

pub mod channel;
pub mod dirstat;
pub mod dp_baseline;
pub mod harness;
pub mod ldpc;
pub mod mixture;
pub mod phase_spa;
pub mod logspace;
