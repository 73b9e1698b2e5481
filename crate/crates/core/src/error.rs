use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::tuner::TuningReport;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed parameter space or rule definition.
    InvalidSpace(String),
    UnknownSpace(String),
    IndexOutOfRange { index: u64, cardinality: u64 },
    /// More distinct configurations were requested than the space holds.
    SampleTooLarge { requested: u64, cardinality: u64 },
    /// A configuration or feature vector does not belong to the space or model it was used with.
    Mismatch(String),
    InvalidSurrogate(String),
    /// The configuration cannot run on the surrogate device.
    InvalidConfiguration,
    InvalidArgument(String),
    Runner(String),
    EmptyTrainingSet,
    InsufficientData { needed: usize, available: usize },
    Divergence { epoch: usize },
    /// Every stage-two candidate failed to run. Carries the report gathered so far.
    AllCandidatesInvalid(Box<TuningReport>),
    /// No valid configuration exists among those searched.
    NoValidConfiguration,
    Model(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpace(msg) => write!(f, "invalid parameter space: {msg}"),
            Error::UnknownSpace(name) => write!(f, "unknown parameter space `{name}`"),
            Error::IndexOutOfRange { index, cardinality } => {
                write!(f, "configuration index {index} out of range (cardinality {cardinality})")
            }
            Error::SampleTooLarge { requested, cardinality } => write!(
                f,
                "cannot draw {requested} distinct configurations from a space of {cardinality}"
            ),
            Error::Mismatch(msg) => write!(f, "mismatch: {msg}"),
            Error::InvalidSurrogate(msg) => write!(f, "invalid surrogate: {msg}"),
            Error::InvalidConfiguration => write!(f, "configuration is invalid on this device"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Runner(msg) => write!(f, "runner error: {msg}"),
            Error::EmptyTrainingSet => write!(f, "no valid samples to train on"),
            Error::InsufficientData { needed, available } => write!(
                f,
                "insufficient data: need at least {needed} valid samples, have {available}"
            ),
            Error::Divergence { epoch } => write!(f, "training diverged at epoch {epoch}"),
            Error::AllCandidatesInvalid(report) => write!(
                f,
                "all {} stage-two candidates were invalid",
                report.stage2.samples.len()
            ),
            Error::NoValidConfiguration => write!(f, "no valid configuration found"),
            Error::Model(msg) => write!(f, "model error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
