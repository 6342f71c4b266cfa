//! Multi-stream generator: one shared register, one shared threshold
//! controller, and per stream a tap network plus a strict comparator.
//!
//! Per clock the register steps first, every stream samples the same
//! register state and compares against the same threshold (`A > B` emits
//! 1), and only then does the controller advance. The threshold observed at
//! step 0 is therefore the schedule's initial value.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSeq;
use crate::gf2::Gf2Poly;
use crate::lfsr::{default_polynomial, Lfsr, LfsrError};
use crate::taps::{
    check_pairwise, generate_stream_configs_for, StreamConfig, TapError,
    DEFAULT_DECORRELATION_WINDOW,
};
use crate::threshold::{max_threshold, ScheduleError, ThresholdController, ThresholdSchedule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("register: {0}")]
    Lfsr(#[from] LfsrError),
    #[error("taps: {0}")]
    Taps(#[from] TapError),
    #[error("schedule: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("stream {stream} has {got} tap sets but the sample width m is {m}")]
    StreamWidth { stream: usize, got: usize, m: u32 },
    #[error("configuration has no streams")]
    NoStreams,
    #[error("sample count must be at least 1")]
    NoSamples,
}

/// Full description of a generator; serialized as the JSON config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct GeneratorConfig {
    pub polynomial: Gf2Poly,
    pub seed: u64,
    pub m: u32,
    pub streams: Vec<StreamConfig>,
    pub schedule: ThresholdSchedule,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    polynomial: Gf2Poly,
    #[serde(default = "default_seed")]
    seed: u64,
    m: u32,
    streams: Vec<StreamConfig>,
    schedule: ThresholdSchedule,
}

fn default_seed() -> u64 {
    1
}

impl TryFrom<RawConfig> for GeneratorConfig {
    type Error = ConfigError;

    fn try_from(raw: RawConfig) -> Result<Self, Self::Error> {
        let mut streams = raw.streams;
        for (i, s) in streams.iter_mut().enumerate() {
            s.stream_id = i;
        }
        let config = GeneratorConfig {
            polynomial: raw.polynomial,
            seed: raw.seed,
            m: raw.m,
            streams,
            schedule: raw.schedule,
        };
        config.validate()?;
        Ok(config)
    }
}

pub const DEFAULT_M: u32 = 8;
pub const DEFAULT_TAPS_PER_BIT: u32 = 3;
pub const DEFAULT_STREAMS: u32 = 4;
pub const DEFAULT_THRESHOLD: u32 = 127;

impl GeneratorConfig {
    /// 32-stage register, 8-bit samples, 3 taps per bit, 4 streams, seed 1,
    /// fixed threshold 127.
    pub fn default_32() -> Self {
        static STREAMS: OnceLock<Vec<StreamConfig>> = OnceLock::new();
        let poly = default_polynomial();
        let streams = STREAMS
            .get_or_init(|| {
                generate_stream_configs_for(
                    poly,
                    DEFAULT_TAPS_PER_BIT,
                    DEFAULT_M,
                    DEFAULT_STREAMS,
                    DEFAULT_DECORRELATION_WINDOW,
                )
                .expect("default stream allocation is within capacity")
            })
            .clone();
        GeneratorConfig {
            polynomial: poly,
            seed: 1,
            m: DEFAULT_M,
            streams,
            schedule: ThresholdSchedule::Fixed {
                value: DEFAULT_THRESHOLD,
            },
        }
    }

    pub fn with_schedule(mut self, schedule: ThresholdSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        Lfsr::new(self.polynomial, self.seed)?;
        self.schedule.validate(self.m)?;
        if self.streams.is_empty() {
            return Err(ConfigError::NoStreams);
        }
        let degree = self.polynomial.degree();
        for (i, s) in self.streams.iter().enumerate() {
            if s.width() != self.m as usize {
                return Err(ConfigError::StreamWidth {
                    stream: i,
                    got: s.width(),
                    m: self.m,
                });
            }
            s.check_degree(degree)?;
        }
        check_pairwise(
            self.streams
                .iter()
                .enumerate()
                .map(|(i, s)| (i, s.tap_sets())),
        )?;
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Supplies the m-bit comparator inputs, one per stream, for each clock.
pub trait SampleSource {
    /// Advances to the next clock.
    fn step(&mut self);
    /// Sample A for `stream` at the current clock.
    fn sample(&self, stream: &StreamConfig) -> u32;
}

impl SampleSource for Lfsr {
    #[inline]
    fn step(&mut self) {
        Lfsr::step(self);
    }

    #[inline]
    fn sample(&self, stream: &StreamConfig) -> u32 {
        stream.sample_word(self.word())
    }
}

/// Emits `0, 1, ..., 2^m - 1, 0, ...` to every stream, replacing the
/// register so comparator behavior can be checked exhaustively.
#[cfg(any(test, feature = "test-hooks"))]
#[derive(Debug, Clone)]
pub struct ExhaustiveSweep {
    value: u32,
    max: u32,
}

#[cfg(any(test, feature = "test-hooks"))]
impl ExhaustiveSweep {
    pub fn new(m: u32) -> Self {
        let max = max_threshold(m);
        // the first step wraps to 0
        Self { value: max, max }
    }
}

#[cfg(any(test, feature = "test-hooks"))]
impl SampleSource for ExhaustiveSweep {
    fn step(&mut self) {
        self.value = if self.value == self.max {
            0
        } else {
            self.value + 1
        };
    }

    fn sample(&self, _stream: &StreamConfig) -> u32 {
        self.value
    }
}

/// Recorded output of [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiStreamOutput {
    pub bits: Vec<BitSeq>,
    pub thresholds: Vec<u32>,
}

impl MultiStreamOutput {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// `step,threshold` CSV of the threshold trace.
    pub fn threshold_csv(&self) -> String {
        let mut out = String::with_capacity(self.thresholds.len() * 8 + 16);
        out.push_str("step,threshold\n");
        for (i, t) in self.thresholds.iter().enumerate() {
            out.push_str(&format!("{i},{t}\n"));
        }
        out
    }
}

pub struct Engine<S: SampleSource = Lfsr> {
    source: S,
    streams: Vec<StreamConfig>,
    controller: ThresholdController,
}

impl Engine<Lfsr> {
    pub fn new(config: &GeneratorConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let lfsr = Lfsr::new(config.polynomial, config.seed)?;
        Ok(Engine {
            source: lfsr,
            streams: config.streams.clone(),
            controller: ThresholdController::new(config.schedule.clone(), config.m)?,
        })
    }

    pub fn lfsr(&self) -> &Lfsr {
        &self.source
    }
}

impl<S: SampleSource> Engine<S> {
    /// Builds an engine over an arbitrary sample source; only the threshold
    /// schedule is validated.
    pub fn with_source(
        source: S,
        streams: Vec<StreamConfig>,
        schedule: ThresholdSchedule,
        m: u32,
    ) -> Result<Self, ConfigError> {
        Ok(Engine {
            source,
            streams,
            controller: ThresholdController::new(schedule, m)?,
        })
    }

    pub fn stream_count(&self) -> usize {
        self.streams.len()
    }

    pub fn current_threshold(&self) -> u32 {
        self.controller.current_threshold()
    }

    /// Produces one clock of output, writing one bit per stream into `out`,
    /// and returns the threshold that was applied.
    #[inline]
    pub fn next_into(&mut self, out: &mut [bool]) -> u32 {
        self.source.step();
        let threshold = self.controller.current_threshold();
        for (slot, stream) in out.iter_mut().zip(&self.streams) {
            *slot = compare(self.source.sample(stream), threshold);
        }
        self.controller.advance();
        threshold
    }

    pub fn next_sample(&mut self) -> Vec<bool> {
        let mut out = vec![false; self.streams.len()];
        self.next_into(&mut out);
        out
    }

    pub fn run(&mut self, samples: usize) -> MultiStreamOutput {
        let mut bits: Vec<BitSeq> = (0..self.streams.len())
            .map(|_| BitSeq::with_capacity(samples))
            .collect();
        let mut thresholds = Vec::with_capacity(samples);
        let mut scratch = vec![false; self.streams.len()];
        for _ in 0..samples {
            thresholds.push(self.next_into(&mut scratch));
            for (seq, &b) in bits.iter_mut().zip(&scratch) {
                seq.push(b);
            }
        }
        MultiStreamOutput { bits, thresholds }
    }
}

/// Strict comparator: 1 iff the sample exceeds the threshold.
#[inline]
pub fn compare(sample: u32, threshold: u32) -> bool {
    sample > threshold
}

/// Probability of emitting 1 for a uniform m-bit sample:
/// `((2^m - 1) - threshold) / 2^m`.
pub fn theoretical_p1(threshold: u64, m: u32) -> Result<f64, ScheduleError> {
    if !(1..=32).contains(&m) {
        return Err(ScheduleError::WidthOutOfRange(m));
    }
    let max = max_threshold(m) as u64;
    if threshold > max {
        return Err(ScheduleError::ThresholdOutOfRange {
            value: threshold,
            max: max as u32,
        });
    }
    Ok((max - threshold) as f64 / (max + 1) as f64)
}

/// Runs a fresh engine for `samples` clocks.
pub fn run(config: &GeneratorConfig, samples: usize) -> Result<MultiStreamOutput, ConfigError> {
    if samples == 0 {
        return Err(ConfigError::NoSamples);
    }
    Ok(Engine::new(config)?.run(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taps::TapSet;

    fn t(s: &str) -> TapSet {
        s.parse().unwrap()
    }

    #[test]
    fn theoretical_examples() {
        assert_eq!(theoretical_p1(27, 8).unwrap(), 0.890625);
        assert_eq!(theoretical_p1(227, 8).unwrap(), 0.109375);
        assert_eq!(theoretical_p1(255, 8).unwrap(), 0.0);
        assert_eq!(theoretical_p1(127, 8).unwrap(), 0.5);
        assert!(matches!(
            theoretical_p1(256, 8),
            Err(ScheduleError::ThresholdOutOfRange {
                value: 256,
                max: 255
            })
        ));
    }

    #[test]
    fn comparator_boundaries() {
        let config =
            GeneratorConfig::default_32().with_schedule(ThresholdSchedule::Fixed { value: 255 });
        let out = run(&config, 5000).unwrap();
        assert!(out.bits.iter().all(|s| s.count_ones() == 0));

        // B = 0: output is 1 unless A = 0.
        let config =
            GeneratorConfig::default_32().with_schedule(ThresholdSchedule::Fixed { value: 0 });
        let mut engine = Engine::new(&config).unwrap();
        for _ in 0..5000 {
            let bits = engine.next_sample();
            for (stream, bit) in config.streams.iter().zip(bits) {
                let a = stream.sample_word(engine.lfsr().word());
                assert_eq!(bit, a != 0);
            }
        }
    }

    #[test]
    fn exhaustive_sweep_counts() {
        let stream = StreamConfig::new(0, vec![t("{1}")]).unwrap();
        for b in [0u32, 1, 100, 254, 255] {
            let mut e = Engine::with_source(
                ExhaustiveSweep::new(8),
                vec![stream.clone()],
                ThresholdSchedule::Fixed { value: b },
                8,
            )
            .unwrap();
            let out = e.run(256);
            assert_eq!(out.bits[0].count_ones(), 255 - b as u64);
        }
    }

    #[test]
    fn run_shape_and_determinism() {
        let config = GeneratorConfig::default_32();
        let a = run(&config, 1000).unwrap();
        let b = run(&config, 1000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bits.len(), 4);
        assert!(a.bits.iter().all(|s| s.len() == 1000));
        assert_eq!(run(&config, 0), Err(ConfigError::NoSamples));
    }

    #[test]
    fn ramp_goes_silent_at_saturation() {
        let config = GeneratorConfig::default_32()
            .with_schedule(ThresholdSchedule::CounterRamp { initial: 0 });
        let out = run(&config, 2048).unwrap();
        assert_eq!(out.thresholds[0], 0);
        assert_eq!(out.thresholds[255], 255);
        for s in &out.bits {
            assert!((255..2048).all(|i| !s.get(i)));
            assert!(s.count_ones() > 0);
        }
    }

    #[test]
    fn adding_a_stream_leaves_existing_streams_untouched() {
        let base = GeneratorConfig::default_32();
        let mut fewer = base.clone();
        fewer.streams.truncate(2);
        let a = run(&fewer, 3000).unwrap();
        let b = run(&base, 3000).unwrap();
        assert_eq!(a.bits[..], b.bits[..2]);
        assert_eq!(a.thresholds, b.thresholds);
    }

    #[test]
    fn config_validation_names_the_problem() {
        let mut c = GeneratorConfig::default_32();
        c.streams[1] = StreamConfig::new(
            1,
            c.streams[0]
                .tap_sets()
                .iter()
                .map(|s| TapSet::new(s.positions().iter().map(|p| p + 1).collect()).unwrap())
                .collect(),
        )
        .unwrap();
        match c.validate() {
            Err(ConfigError::Taps(TapError::ShiftEquivalent {
                first_stream,
                second_stream,
                ..
            })) => {
                assert_eq!((first_stream, second_stream), (0, 1));
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut c = GeneratorConfig::default_32();
        c.m = 4;
        c.schedule = ThresholdSchedule::Fixed { value: 3 };
        assert!(matches!(
            c.validate(),
            Err(ConfigError::StreamWidth {
                stream: 0,
                got: 8,
                m: 4
            })
        ));

        let c = GeneratorConfig::default_32().with_seed(0);
        assert_eq!(c.validate(), Err(ConfigError::Lfsr(LfsrError::ZeroSeed)));

        let mut c = GeneratorConfig::default_32();
        c.polynomial = "x^7+x^6+1".parse().unwrap();
        assert!(matches!(
            c.validate(),
            Err(ConfigError::Taps(TapError::TapOutOfRange { degree: 7, .. }))
        ));
    }

    #[test]
    fn json_round_trip_renumbers_streams() {
        let c = GeneratorConfig::default_32();
        let json = c.to_json_pretty();
        let back: GeneratorConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.streams[3].stream_id, 3);
        let bad = json.replace("\"seed\": 1", "\"seed\": 0");
        assert!(serde_json::from_str::<GeneratorConfig>(&bad).is_err());
    }
}
