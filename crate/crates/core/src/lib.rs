//! Multi-stream pseudo-random bit generation with programmable statistics.
//!
//! A single Fibonacci LFSR is shared by any number of output streams. Each
//! stream XORs its own tap sets into an m-bit sample and emits 1 when the
//! sample is strictly greater than a shared, programmable threshold, so the
//! probability of a 1 is `((2^m - 1) - threshold) / 2^m`. The [`stats`]
//! module holds the evaluation tooling (correlation scans, cumulative-count
//! fits).

pub mod bits;
pub mod cli;
pub mod engine;
pub mod factor;
pub mod gf2;
pub mod lfsr;
pub mod manifest;
pub mod stats;
pub mod taps;
pub mod threshold;

pub use bits::BitSeq;
pub use engine::{run, theoretical_p1, Engine, GeneratorConfig, MultiStreamOutput};
pub use gf2::Gf2Poly;
pub use lfsr::{period, Lfsr};
pub use taps::{
    capacity, generate_stream_configs, generate_stream_configs_for, StreamConfig, TapSet,
};
pub use threshold::{ThresholdController, ThresholdSchedule};
