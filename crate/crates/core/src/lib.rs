//! Experimental DCT image codec built around exponential power
//! distribution models of transform coefficients.
//!
//! The crate provides:
//!
//! - [`epd`] — exponential power distribution math: density, CDF, moments,
//!   entropy, MLE, and closed-form/numeric rate-distortion of uniform
//!   quantization;
//! - [`transform`] — orthonormal 8×8 DCT-II, zigzag addressing, color
//!   conversion, and block partitioning;
//! - [`predict`] — linear context models for coefficient centers μ and
//!   widths σ, CCA feature compression, and evaluation metrics;
//! - [`quantizer`] — quantization density functions with distortion- and
//!   rate-distortion-optimal shapes, node generation via inverse CDF, and
//!   finite-N evaluation;
//! - [`sigma_ladder`] — discretization of Σ = σ/q into a ladder of coding
//!   tables plus Golomb / LSB-flush tail codes;
//! - [`coder`] — static-table stream entropy coder with per-symbol table
//!   switching and a raw-bit side channel;
//! - [`codec`] — the end-to-end encoder/decoder and container format;
//! - [`cli`] — implementations behind the `epq` command-line tool.

pub mod cli;
pub mod codec;
pub mod coder;
pub mod predict;
pub mod quantizer;
pub mod epd;
pub mod image_io;
pub mod sigma_ladder;
pub mod special;
pub mod synth;
pub mod transform;
