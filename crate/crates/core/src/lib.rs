//! Opinion-unaware video quality assessment.
//!
//! The crate computes three complementary per-video indices and fuses them:
//! a text-prompted semantic affinity index over a frozen contrastive
//! vision-language encoder (with a localized per-region variant), a
//! natural-scene-statistics spatial index, and a perceptual-trajectory
//! temporal index. On top of the zero-shot pipeline it provides a
//! parameter-efficient fine-tuning scheme (learned prompt context, implicit
//! prompt head, linear fusion weights) and a benchmark harness with
//! rank-correlation metrics.

pub mod bench;
pub mod error;
pub mod finetune;
pub mod fusion;
pub mod math;
pub mod media;
pub mod pipeline;
pub mod saqi;
pub mod spatial;
pub mod synth;
pub mod temporal;
pub mod vlm;

pub use error::{Error, Result};
