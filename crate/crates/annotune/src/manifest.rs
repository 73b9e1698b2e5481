//! Run manifests: one JSON file holding every setting of a run. Command-line
//! flags override manifest fields. Paths are taken relative to the working
//! directory.

use std::path::{Path, PathBuf};

use annotune_core::model::DEFAULT_BAG_SIZE;
use annotune_core::{ParamSpace, Runner, TrainConfig, TunerConfig};
use serde::{Deserialize, Serialize};

use crate::external::{ExternalRunner, DEFAULT_INVALID_EXIT_CODE};
use crate::files::{load_space, load_surrogate, read_json};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Built-in space name or space JSON path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    /// Bundled surrogate name or surrogate spec path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<String>,
    /// External command template.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invalid_exit_code: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Fields set in `flags` win over fields set here.
    pub fn overridden_by(self, flags: RunManifest) -> Self {
        Self {
            space: flags.space.or(self.space),
            surrogate: flags.surrogate.or(self.surrogate),
            command: flags.command.or(self.command),
            invalid_exit_code: flags.invalid_exit_code.or(self.invalid_exit_code),
            n: flags.n.or(self.n),
            m: flags.m.or(self.m),
            k: flags.k.or(self.k),
            seed: flags.seed.or(self.seed),
            epochs: flags.epochs.or(self.epochs),
            lr: flags.lr.or(self.lr),
            repetitions: flags.repetitions.or(self.repetitions),
            out: flags.out.or(self.out),
            jobs: flags.jobs.or(self.jobs),
        }
    }

    pub fn space(&self) -> Result<ParamSpace> {
        load_space(self.space.as_deref().ok_or_else(|| Error::Usage("no space given (--space)".into()))?)
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| Error::Usage("no output directory given (--out)".into()))
    }

    /// The single runner named by `surrogate` or `command`.
    pub fn runner(&self, space: &ParamSpace) -> Result<Box<dyn Runner>> {
        match (&self.surrogate, &self.command) {
            (Some(s), None) => Ok(Box::new(load_surrogate(s, space)?)),
            (None, Some(c)) => Ok(Box::new(ExternalRunner::new(
                c,
                space,
                self.invalid_exit_code.unwrap_or(DEFAULT_INVALID_EXIT_CODE),
            )?)),
            (None, None) => Err(Error::Usage("no runner given (--surrogate or --command)".into())),
            (Some(_), Some(_)) => Err(Error::Usage("give either --surrogate or --command, not both".into())),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions.unwrap_or(1)
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(DEFAULT_BAG_SIZE)
    }

    pub fn train_config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            learning_rate: self.lr.unwrap_or(d.learning_rate),
            seed: self.seed(),
            ..d
        }
    }

    pub fn tuner_config(&self) -> TunerConfig {
        let d = TunerConfig::default();
        TunerConfig {
            n_train: self.n.unwrap_or(d.n_train),
            m_candidates: self.m.unwrap_or(d.m_candidates),
            k_bag: self.k(),
            seed: self.seed(),
            train: self.train_config(),
            repetitions: self.repetitions(),
            ..d
        }
    }
}
