//! Threshold controller supplying the comparator's m-bit reference value.
//!
//! Three schedules are supported: a fixed value, an up-counter that
//! saturates at all-ones and then holds (its clock is gated off), and a
//! step-and-hold table for arbitrary profiles, including decreasing ones.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("threshold {value} is outside 0..={max}")]
    ThresholdOutOfRange { value: u64, max: u32 },
    #[error("threshold width {0} is outside 1..=32")]
    WidthOutOfRange(u32),
    #[error("custom schedule table is empty")]
    EmptyTable,
    #[error("custom schedule must start at step 0, starts at {0}")]
    TableStart(u64),
    #[error("custom schedule steps must be strictly increasing ({prev} then {next})")]
    TableNotIncreasing { prev: u64, next: u64 },
    #[error("schedule csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ThresholdSchedule {
    Fixed { value: u32 },
    CounterRamp { initial: u32 },
    Custom { table: Vec<(u64, u32)> },
}

/// Largest m-bit value.
pub fn max_threshold(width: u32) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

impl ThresholdSchedule {
    /// Checks every value fits `width` bits and that custom tables are well
    /// formed.
    pub fn validate(&self, width: u32) -> Result<(), ScheduleError> {
        if !(1..=32).contains(&width) {
            return Err(ScheduleError::WidthOutOfRange(width));
        }
        let max = max_threshold(width);
        let in_range = |value: u32| {
            if value > max {
                Err(ScheduleError::ThresholdOutOfRange {
                    value: value as u64,
                    max,
                })
            } else {
                Ok(())
            }
        };
        match self {
            Self::Fixed { value } => in_range(*value),
            Self::CounterRamp { initial } => in_range(*initial),
            Self::Custom { table } => {
                let (first_step, _) = table.first().ok_or(ScheduleError::EmptyTable)?;
                if *first_step != 0 {
                    return Err(ScheduleError::TableStart(*first_step));
                }
                for w in table.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(ScheduleError::TableNotIncreasing {
                            prev: w[0].0,
                            next: w[1].0,
                        });
                    }
                }
                table.iter().try_for_each(|&(_, v)| in_range(v))
            }
        }
    }

    /// Parses the `step,threshold` CSV form of a custom schedule.
    pub fn custom_from_csv(text: &str) -> Result<Self, ScheduleError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == "step,threshold" => {}
            Some((i, _)) => {
                return Err(ScheduleError::Csv {
                    line: i + 1,
                    reason: "expected header \"step,threshold\"".into(),
                })
            }
            None => return Err(ScheduleError::EmptyTable),
        }
        let mut table = Vec::new();
        for (i, line) in lines {
            let bad = |reason: &str| ScheduleError::Csv {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (step, value) = line
                .trim()
                .split_once(',')
                .ok_or_else(|| bad("expected two fields"))?;
            let step = step
                .trim()
                .parse()
                .map_err(|_| bad("step is not an integer"))?;
            let value = value
                .trim()
                .parse()
                .map_err(|_| bad("threshold is not an integer"))?;
            table.push((step, value));
        }
        if table.is_empty() {
            return Err(ScheduleError::EmptyTable);
        }
        Ok(Self::Custom { table })
    }

    /// Inverse of [`ThresholdSchedule::custom_from_csv`]; `None` for the
    /// non-table schedules.
    pub fn to_csv(&self) -> Option<String> {
        let Self::Custom { table } = self else {
            return None;
        };
        let mut out = String::from("step,threshold\n");
        for (step, value) in table {
            let _ = writeln!(out, "{step},{value}");
        }
        Some(out)
    }
}

/// Live controller state, advanced once per generated sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdController {
    schedule: ThresholdSchedule,
    max: u32,
    current: u32,
    saturated: bool,
    step: u64,
    cursor: usize,
}

impl ThresholdController {
    pub fn new(schedule: ThresholdSchedule, width: u32) -> Result<Self, ScheduleError> {
        schedule.validate(width)?;
        let max = max_threshold(width);
        let current = match &schedule {
            ThresholdSchedule::Fixed { value } => *value,
            ThresholdSchedule::CounterRamp { initial } => *initial,
            ThresholdSchedule::Custom { table } => table[0].1,
        };
        let saturated = matches!(schedule, ThresholdSchedule::CounterRamp { .. }) && current == max;
        Ok(Self {
            schedule,
            max,
            current,
            saturated,
            step: 0,
            cursor: 0,
        })
    }

    pub fn schedule(&self) -> &ThresholdSchedule {
        &self.schedule
    }

    #[inline]
    pub fn current_threshold(&self) -> u32 {
        self.current
    }

    /// True once a counter ramp has reached all-ones; never cleared.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn advance(&mut self) {
        self.step += 1;
        match &self.schedule {
            ThresholdSchedule::Fixed { .. } => {}
            ThresholdSchedule::CounterRamp { .. } => {
                if !self.saturated {
                    self.current += 1;
                    self.saturated = self.current == self.max;
                }
            }
            ThresholdSchedule::Custom { table } => {
                while self.cursor + 1 < table.len() && table[self.cursor + 1].0 <= self.step {
                    self.cursor += 1;
                }
                self.current = table[self.cursor].1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(schedule: ThresholdSchedule, width: u32, steps: usize) -> Vec<u32> {
        let mut c = ThresholdController::new(schedule, width).unwrap();
        (0..steps)
            .map(|_| {
                let t = c.current_threshold();
                c.advance();
                t
            })
            .collect()
    }

    #[test]
    fn fixed_holds() {
        assert!(trace(ThresholdSchedule::Fixed { value: 127 }, 8, 50)
            .iter()
            .all(|&t| t == 127));
    }

    #[test]
    fn ramp_examples() {
        assert_eq!(
            trace(ThresholdSchedule::CounterRamp { initial: 0 }, 8, 1),
            vec![0]
        );
        let t = trace(ThresholdSchedule::CounterRamp { initial: 250 }, 8, 11);
        assert_eq!(t[10], 255);
        assert_eq!(t[..6], [250, 251, 252, 253, 254, 255]);

        let mut c =
            ThresholdController::new(ThresholdSchedule::CounterRamp { initial: 254 }, 8).unwrap();
        assert!(!c.is_saturated());
        c.advance();
        assert_eq!(c.current_threshold(), 255);
        assert!(c.is_saturated());
        for _ in 0..1000 {
            c.advance();
            assert_eq!(c.current_threshold(), 255);
            assert!(c.is_saturated());
        }
        let born_saturated =
            ThresholdController::new(ThresholdSchedule::CounterRamp { initial: 255 }, 8).unwrap();
        assert!(born_saturated.is_saturated());
    }

    #[test]
    fn ramp_reaches_max_after_exact_advance_count() {
        for initial in 0..=255u32 {
            let mut c =
                ThresholdController::new(ThresholdSchedule::CounterRamp { initial }, 8).unwrap();
            let mut prev = c.current_threshold();
            let needed = 255 - initial;
            for k in 1..=needed + 20 {
                c.advance();
                let now = c.current_threshold();
                assert!(now >= prev);
                assert_eq!(
                    c.is_saturated(),
                    k >= needed,
                    "initial {initial}, advance {k}"
                );
                if k >= needed {
                    assert_eq!(now, 255);
                } else {
                    assert_eq!(now, initial + k);
                }
                prev = now;
            }
        }
    }

    #[test]
    fn custom_step_and_hold() {
        let s = ThresholdSchedule::Custom {
            table: vec![(0, 10), (5, 200)],
        };
        assert_eq!(trace(s, 8, 7), vec![10, 10, 10, 10, 10, 200, 200]);
        let down = ThresholdSchedule::Custom {
            table: vec![(0, 200), (2, 100), (3, 0)],
        };
        assert_eq!(trace(down, 8, 5), vec![200, 200, 100, 0, 0]);
    }

    #[test]
    fn validation() {
        assert_eq!(
            ThresholdController::new(ThresholdSchedule::Fixed { value: 256 }, 8).unwrap_err(),
            ScheduleError::ThresholdOutOfRange {
                value: 256,
                max: 255
            }
        );
        assert_eq!(
            ThresholdSchedule::Custom { table: vec![] }.validate(8),
            Err(ScheduleError::EmptyTable)
        );
        assert_eq!(
            ThresholdSchedule::Custom {
                table: vec![(1, 3)]
            }
            .validate(8),
            Err(ScheduleError::TableStart(1))
        );
        assert_eq!(
            ThresholdSchedule::Custom {
                table: vec![(0, 3), (4, 1), (4, 2)]
            }
            .validate(8),
            Err(ScheduleError::TableNotIncreasing { prev: 4, next: 4 })
        );
        assert_eq!(
            ThresholdSchedule::Fixed { value: 0 }.validate(0),
            Err(ScheduleError::WidthOutOfRange(0))
        );
    }

    #[test]
    fn csv_form() {
        let s = ThresholdSchedule::custom_from_csv("step,threshold\n0,10\n5,200\n").unwrap();
        assert_eq!(
            s,
            ThresholdSchedule::Custom {
                table: vec![(0, 10), (5, 200)]
            }
        );
        assert_eq!(s.to_csv().unwrap(), "step,threshold\n0,10\n5,200\n");
        assert!(ThresholdSchedule::custom_from_csv("a,b\n0,1\n").is_err());
        assert!(matches!(
            ThresholdSchedule::custom_from_csv("step,threshold\n0,x\n"),
            Err(ScheduleError::Csv { line: 2, .. })
        ));
        assert_eq!(ThresholdSchedule::Fixed { value: 1 }.to_csv(), None);
    }

    #[test]
    fn json_shape() {
        let s: ThresholdSchedule =
            serde_json::from_str(r#"{"type":"counter_ramp","initial":3}"#).unwrap();
        assert_eq!(s, ThresholdSchedule::CounterRamp { initial: 3 });
        let c = ThresholdSchedule::Custom {
            table: vec![(0, 1)],
        };
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"type":"custom","table":[[0,1]]}"#
        );
    }
}
