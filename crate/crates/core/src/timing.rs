//! Measurement policy and the clock abstraction used by the predictor and
//! tuner. Real runs use [`WallClock`]; tests inject scripted timings through
//! the [`Clock`] trait.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::matmul::AlgorithmChoice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    #[default]
    Median,
    Min,
    Mean,
}

impl Aggregator {
    pub fn apply(self, samples: &[f64]) -> f64 {
        assert!(!samples.is_empty(), "no samples to aggregate");
        match self {
            Self::Min => samples.iter().copied().fold(f64::INFINITY, f64::min),
            Self::Mean => samples.iter().sum::<f64>() / samples.len() as f64,
            Self::Median => {
                let mut s = samples.to_vec();
                s.sort_by(f64::total_cmp);
                let mid = s.len() / 2;
                if s.len() % 2 == 1 {
                    s[mid]
                } else {
                    0.5 * (s[mid - 1] + s[mid])
                }
            }
        }
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(Self::Median),
            "min" => Ok(Self::Min),
            "mean" => Ok(Self::Mean),
            _ => Err(Error::usage(format!("unknown aggregator {s:?}"))),
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Median => "median",
            Self::Min => "min",
            Self::Mean => "mean",
        })
    }
}

/// How each measurement is taken. The defaults mirror one-shot timing: no
/// per-measurement warm-up, a single measured run, and one untimed warm-up
/// multiply per (precision, threads) group of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingPolicy {
    pub warmup_runs: usize,
    pub measured_runs: usize,
    pub aggregator: Aggregator,
    pub group_warmups: usize,
}

impl Default for TimingPolicy {
    fn default() -> Self {
        Self {
            warmup_runs: 0,
            measured_runs: 1,
            aggregator: Aggregator::Median,
            group_warmups: 1,
        }
    }
}

impl TimingPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.measured_runs == 0 {
            return Err(Error::usage("measured_runs must be at least 1"));
        }
        Ok(())
    }
}

/// What a measurement is timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Probe {
    /// Blocked multiply of the leading `rows` rows of A by all of B.
    Slice { n_min: usize, rows: usize },
    /// A full multiplication with the given algorithm.
    Full(AlgorithmChoice),
}

pub trait Clock {
    /// Times `run` and returns seconds. Implementations decide how many
    /// times `run` is invoked.
    fn measure(&mut self, probe: Probe, run: &mut dyn FnMut()) -> Result<f64>;
}

/// Rejects zero, negative or non-finite elapsed times.
pub fn check_elapsed(probe: Probe, secs: f64) -> Result<f64> {
    if secs.is_finite() && secs > 0.0 {
        Ok(secs)
    } else {
        Err(Error::Measurement(format!("{probe:?} reported {secs} s")))
    }
}

/// Monotonic wall clock following a [`TimingPolicy`].
#[derive(Debug, Clone, Default)]
pub struct WallClock {
    pub policy: TimingPolicy,
}

impl WallClock {
    pub fn new(policy: TimingPolicy) -> Self {
        Self { policy }
    }
}

impl Clock for WallClock {
    fn measure(&mut self, probe: Probe, run: &mut dyn FnMut()) -> Result<f64> {
        self.policy.validate()?;
        for _ in 0..self.policy.warmup_runs {
            run();
        }
        let samples: Vec<f64> = (0..self.policy.measured_runs)
            .map(|_| {
                let start = Instant::now();
                run();
                start.elapsed().as_secs_f64()
            })
            .collect();
        check_elapsed(probe, self.policy.aggregator.apply(&samples))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregators() {
        let s = [3.0, 1.0, 2.0, 10.0];
        assert_eq!(Aggregator::Median.apply(&s), 2.5);
        assert_eq!(Aggregator::Median.apply(&s[..3]), 2.0);
        assert_eq!(Aggregator::Min.apply(&s), 1.0);
        assert_eq!(Aggregator::Mean.apply(&s), 4.0);
        assert_eq!("min".parse::<Aggregator>().unwrap(), Aggregator::Min);
        assert!("max".parse::<Aggregator>().is_err());
    }

    #[test]
    fn wall_clock_runs_policy() {
        let mut calls = 0;
        let mut clock = WallClock::new(TimingPolicy {
            warmup_runs: 2,
            measured_runs: 3,
            ..TimingPolicy::default()
        });
        let probe = Probe::Full(AlgorithmChoice::Simple);
        let t = clock
            .measure(probe, &mut || {
                calls += 1;
                std::thread::sleep(std::time::Duration::from_millis(1));
            })
            .unwrap();
        assert_eq!(calls, 5);
        assert!(t >= 1e-3);
    }

    #[test]
    fn anomalies_are_rejected() {
        let probe = Probe::Slice { n_min: 8, rows: 16 };
        assert!(matches!(
            check_elapsed(probe, 0.0),
            Err(Error::Measurement(_))
        ));
        assert!(check_elapsed(probe, -1.0).is_err());
        assert!(check_elapsed(probe, f64::NAN).is_err());
        assert_eq!(check_elapsed(probe, 0.5).unwrap(), 0.5);
        let mut clock = WallClock::new(TimingPolicy {
            measured_runs: 0,
            ..TimingPolicy::default()
        });
        assert!(clock.measure(probe, &mut || {}).is_err());
    }
}
