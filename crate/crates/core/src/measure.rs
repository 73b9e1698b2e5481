//! Measurement records and the runner abstraction.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::space::{Configuration, ParamSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum InvalidReason {
    StaticRule,
    LaunchFailure,
    CompileFailure,
}

impl InvalidReason {
    /// The `status` column value used in sample files.
    pub fn status(self) -> &'static str {
        match self {
            InvalidReason::StaticRule => "invalid-static",
            InvalidReason::LaunchFailure => "invalid-launch",
            InvalidReason::CompileFailure => "invalid-compile",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "kebab-case"))]
pub enum Outcome {
    /// Execution time in seconds, strictly positive.
    Valid {
        #[cfg_attr(feature = "serde", serde(rename = "time_seconds"))]
        time: f64,
    },
    Invalid {
        reason: InvalidReason,
    },
}

impl Outcome {
    pub fn valid(time: f64) -> Result<Self> {
        if time > 0.0 && time.is_finite() {
            Ok(Outcome::Valid { time })
        } else {
            Err(Error::InvalidArgument(alloc::format!("execution time must be positive and finite, got {time}")))
        }
    }

    pub fn time(&self) -> Option<f64> {
        match *self {
            Outcome::Valid { time } => Some(time),
            Outcome::Invalid { .. } => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, Outcome::Valid { .. })
    }

    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Valid { .. } => "valid",
            Outcome::Invalid { reason } => reason.status(),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Valid { time } => write!(f, "{time} s"),
            Outcome::Invalid { reason } => f.write_str(reason.status()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub config: Configuration,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub outcome: Outcome,
    pub repetitions: u32,
    /// Seconds since the Unix epoch, when the runner records wall-clock time.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub timestamp: Option<u64>,
}

impl Sample {
    pub fn new(config: Configuration, outcome: Outcome, repetitions: u32) -> Self {
        Self { config, outcome, repetitions, timestamp: None }
    }

    /// Record for a configuration rejected by a static rule; it was never run.
    pub fn static_invalid(config: Configuration) -> Self {
        Self::new(config, Outcome::Invalid { reason: InvalidReason::StaticRule }, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleSet {
    pub space_name: String,
    pub runner_id: String,
    pub samples: Vec<Sample>,
}

impl SampleSet {
    pub fn new(space_name: impl Into<String>, runner_id: impl Into<String>) -> Self {
        Self { space_name: space_name.into(), runner_id: runner_id.into(), samples: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(configuration, time)` for every valid sample, in order.
    pub fn valid(&self) -> impl Iterator<Item = (&Configuration, f64)> + '_ {
        self.samples.iter().filter_map(|s| s.outcome.time().map(|t| (&s.config, t)))
    }

    pub fn valid_count(&self) -> usize {
        self.samples.iter().filter(|s| s.outcome.is_valid()).count()
    }

    /// Checks that every sample belongs to `space`.
    pub fn check_space(&self, space: &ParamSpace) -> Result<()> {
        if self.space_name != space.name() {
            return Err(Error::Mismatch(alloc::format!(
                "sample set is for space `{}`, not `{}`",
                self.space_name,
                space.name()
            )));
        }
        for s in &self.samples {
            space.positions_of(&s.config)?;
        }
        Ok(())
    }

    /// The valid sample with the smallest time; ties go to the earliest.
    pub fn best(&self) -> Option<(&Configuration, f64)> {
        self.valid().fold(None, |best, (c, t)| match best {
            Some((_, bt)) if bt <= t => best,
            _ => Some((c, t)),
        })
    }
}

/// Something that can time a configuration.
///
/// Runners are invoked sequentially; implementations need not be thread-safe.
pub trait Runner {
    /// Identifier recorded in sample sets and reports.
    fn id(&self) -> &str;

    /// Measures `config` `repetitions` times. A valid outcome carries the
    /// minimum time over the repetitions. Transport failures are errors,
    /// distinct from invalid outcomes.
    fn measure(&mut self, config: &Configuration, repetitions: u32) -> Result<Sample>;
}

impl<R: Runner + ?Sized> Runner for &mut R {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn measure(&mut self, config: &Configuration, repetitions: u32) -> Result<Sample> {
        (**self).measure(config, repetitions)
    }
}

impl<R: Runner + ?Sized> Runner for alloc::boxed::Box<R> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn measure(&mut self, config: &Configuration, repetitions: u32) -> Result<Sample> {
        (**self).measure(config, repetitions)
    }
}

/// Measures a configuration, checking the repetition count first.
pub fn measure<R: Runner + ?Sized>(runner: &mut R, config: &Configuration, repetitions: u32) -> Result<Sample> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    runner.measure(config, repetitions)
}

/// Measures `config` unless `space` rejects it statically, in which case the
/// runner is never invoked.
pub fn measure_checked<R: Runner + ?Sized>(
    runner: &mut R,
    space: &ParamSpace,
    config: &Configuration,
    repetitions: u32,
) -> Result<Sample> {
    if !space.is_statically_valid(config) {
        return Ok(Sample::static_invalid(config.clone()));
    }
    measure(runner, config, repetitions)
}
