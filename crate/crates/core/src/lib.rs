//! Model-driven auto-tuning over finite tuning-parameter spaces.
//!
//! A small random sample of configurations is measured, a bagged ensemble of
//! single-hidden-layer networks learns the logarithm of execution time, the
//! ensemble scores the whole space and the best-predicted candidates are
//! measured to pick the winner.
//!
//! The crate is `no_std` (it needs `alloc`). Enable `parallel` to train
//! ensemble members and score spaces on a rayon pool, and `serde` to derive
//! (de)serialization for the public data types.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

mod error;
pub mod eval;
pub mod measure;
pub mod model;
pub mod seed;
pub mod space;
pub mod surrogate;
pub mod tuner;

pub use error::{Error, Result};
pub use measure::{InvalidReason, Outcome, Runner, Sample, SampleSet};
pub use model::{Encoder, Ensemble, Network, TrainConfig};
pub use space::{builtin_space, Configuration, ParamDef, ParamSpace, RuleKind, ValidityRule};
pub use surrogate::{Surrogate, SurrogateProfile, SurrogateSpec, SurrogateTerm};
pub use tuner::{autotune, exhaustive_search, top_m_predicted, TunerConfig, TuningReport};
