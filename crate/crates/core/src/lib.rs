//! Offline analytics over tweet archives.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod botmeter;
pub mod dacmap;
pub mod diffusion;
pub mod ingest;
pub mod par;
pub mod pipeline;
pub mod sentiment;
pub mod spamfilter;
