//! JSON model files.
//!
//! Floats are written in the shortest form that parses back to the same
//! `f64`, so a saved ensemble predicts bit-identically after loading.

use std::fs;
use std::path::Path;

use annotune_core::model::{EncodedParam, HIDDEN_UNITS};
use annotune_core::{Encoder, Ensemble, Network};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub space_name: String,
    pub k: usize,
    pub input_dim: usize,
    pub encoder: Vec<EncodedParam>,
    pub members: Vec<MemberFile>,
}

/// Inverse of the per-network target standardization: `ln t = mean + std * y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetTransform {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberFile {
    pub target_transform: TargetTransform,
    /// One row of `input_dim` weights per hidden unit.
    pub weights_hidden: Vec<Vec<f64>>,
    pub biases_hidden: Vec<f64>,
    pub weights_out: Vec<f64>,
    pub bias_out: f64,
}

impl ModelFile {
    pub fn from_ensemble(ensemble: &Ensemble) -> Self {
        let d = ensemble.input_dim();
        let members = ensemble
            .networks()
            .iter()
            .map(|n| MemberFile {
                target_transform: TargetTransform { mean: n.target_mean(), std: n.target_std() },
                weights_hidden: n.w_hidden().chunks(d.max(1)).map(<[f64]>::to_vec).collect(),
                biases_hidden: n.b_hidden().to_vec(),
                weights_out: n.w_out().to_vec(),
                bias_out: n.b_out(),
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            space_name: ensemble.space_name().to_string(),
            k: ensemble.k(),
            input_dim: d,
            encoder: ensemble.encoder().params().to_vec(),
            members,
        }
    }

    pub fn into_ensemble(self) -> annotune_core::Result<Ensemble> {
        use annotune_core::Error as E;
        if self.schema_version != SCHEMA_VERSION {
            return Err(E::Model(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.k != self.members.len() {
            return Err(E::Model(format!("k is {} but the file has {} members", self.k, self.members.len())));
        }
        let encoder = Encoder::from_params(self.encoder)?;
        if encoder.input_dim() != self.input_dim {
            return Err(E::Model(format!("input_dim is {} but the encoder has {}", self.input_dim, encoder.input_dim())));
        }
        let networks = self
            .members
            .into_iter()
            .map(|m| {
                if m.weights_hidden.len() != HIDDEN_UNITS || m.weights_hidden.iter().any(|r| r.len() != self.input_dim) {
                    return Err(E::Model(format!("weights_hidden must be {HIDDEN_UNITS} rows of {}", self.input_dim)));
                }
                Network::from_parts(
                    self.input_dim,
                    m.weights_hidden.concat(),
                    m.biases_hidden,
                    m.weights_out,
                    m.bias_out,
                    m.target_transform.mean,
                    m.target_transform.std,
                )
            })
            .collect::<annotune_core::Result<Vec<_>>>()?;
        Ensemble::from_parts(self.space_name, encoder, networks)
    }
}

pub fn to_json(ensemble: &Ensemble) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile::from_ensemble(ensemble)).expect("model serializes");
    s.push('\n');
    s
}

pub fn save_model(path: &Path, ensemble: &Ensemble) -> Result<()> {
    fs::write(path, to_json(ensemble)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Ensemble> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })?;
    Ok(file.into_ensemble()?)
}
