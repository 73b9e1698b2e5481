//! File formats, an external-command runner and the command-line front end
//! for [`annotune_core`].
//!
//! * [`samples`]: sample CSV files, with resumable appends.
//! * [`model_file`]: ensemble JSON files.
//! * [`files`]: space and surrogate JSON, bundled definitions.
//! * [`external`]: times configurations by running a shell command.
//! * [`manifest`]: JSON run manifests.
//! * [`tables`]: CSV output of the evaluation harnesses.

pub mod cli;
mod error;
pub mod external;
pub mod files;
pub mod manifest;
pub mod model_file;
pub mod samples;
pub mod tables;

pub use error::{Error, Result};
