//! Finite tuning-parameter spaces.
//!
//! A [`ParamSpace`] is an ordered list of integer-valued parameters plus a set
//! of declarative validity rules. Configurations are indexed in mixed radix
//! with the last parameter varying fastest, so the whole space can be walked,
//! sampled or scored without ever being materialized.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::seed::RandomOrder;
use crate::{Error, Result};

/// One tuning parameter and its admissible settings, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamDef {
    pub name: String,
    pub values: Vec<i64>,
}

impl ParamDef {
    pub fn new(name: impl Into<String>, values: impl Into<Vec<i64>>) -> Self {
        Self { name: name.into(), values: values.into() }
    }

    /// A `{0, 1}` on/off parameter.
    pub fn flag(name: impl Into<String>) -> Self {
        Self::new(name, [0, 1])
    }

    pub fn position(&self, value: i64) -> Option<usize> {
        self.values.iter().position(|&v| v == value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RuleKind {
    /// `prod(coef_i * value_i) <= bound`; coefficients default to 1.
    MaxProduct,
    /// `sum(coef_i * value_i) <= bound`; coefficients default to 1.
    MaxWeightedSum,
    /// Invalid when every operand equals its listed coefficient. `bound` is unused.
    ForbiddenCombination,
}

/// A static constraint over named parameters. A configuration violating any
/// rule of its space is invalid without being run.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidityRule {
    pub kind: RuleKind,
    pub operands: Vec<String>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub coefficients: Option<Vec<i64>>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub bound: i64,
}

impl ValidityRule {
    pub fn max_product(operands: &[&str], bound: i64) -> Self {
        Self {
            kind: RuleKind::MaxProduct,
            operands: operands.iter().map(|&s| s.to_owned()).collect(),
            coefficients: None,
            bound,
        }
    }

    pub fn max_weighted_sum(operands: &[&str], coefficients: &[i64], bound: i64) -> Self {
        Self {
            kind: RuleKind::MaxWeightedSum,
            operands: operands.iter().map(|&s| s.to_owned()).collect(),
            coefficients: Some(coefficients.to_vec()),
            bound,
        }
    }

    pub fn forbidden(operands: &[&str], values: &[i64]) -> Self {
        Self {
            kind: RuleKind::ForbiddenCombination,
            operands: operands.iter().map(|&s| s.to_owned()).collect(),
            coefficients: Some(values.to_vec()),
            bound: 0,
        }
    }

    pub fn with_coefficients(mut self, coefficients: &[i64]) -> Self {
        self.coefficients = Some(coefficients.to_vec());
        self
    }

    /// Resolves operand names against `params`.
    pub(crate) fn resolve(&self, params: &[ParamDef]) -> Result<ResolvedRule> {
        if self.operands.is_empty() {
            return Err(Error::InvalidSpace("rule without operands".into()));
        }
        let mut operands = Vec::with_capacity(self.operands.len());
        for name in &self.operands {
            let idx = params
                .iter()
                .position(|p| &p.name == name)
                .ok_or_else(|| Error::InvalidSpace(format!("rule references unknown parameter `{name}`")))?;
            operands.push(idx);
        }
        let coefficients = match (&self.coefficients, self.kind) {
            (Some(c), _) if c.len() != operands.len() => {
                return Err(Error::InvalidSpace(format!(
                    "rule has {} operands but {} coefficients",
                    operands.len(),
                    c.len()
                )))
            }
            (Some(c), _) => c.clone(),
            (None, RuleKind::ForbiddenCombination) => {
                return Err(Error::InvalidSpace("forbidden-combination rule needs coefficients".into()))
            }
            (None, _) => vec![1; operands.len()],
        };
        Ok(ResolvedRule { kind: self.kind, operands, coefficients, bound: self.bound })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ResolvedRule {
    kind: RuleKind,
    operands: Vec<usize>,
    coefficients: Vec<i64>,
    bound: i64,
}

impl ResolvedRule {
    /// `value(i)` returns the value of parameter `i`.
    pub(crate) fn allows(&self, value: impl Fn(usize) -> i64) -> bool {
        let terms = self.operands.iter().zip(&self.coefficients);
        match self.kind {
            RuleKind::MaxProduct => {
                let mut prod: i128 = 1;
                for (&p, &c) in terms {
                    prod = prod.saturating_mul(i128::from(c) * i128::from(value(p)));
                }
                prod <= i128::from(self.bound)
            }
            RuleKind::MaxWeightedSum => {
                let sum: i128 = terms.map(|(&p, &c)| i128::from(c) * i128::from(value(p))).sum();
                sum <= i128::from(self.bound)
            }
            RuleKind::ForbiddenCombination => !terms.into_iter().all(|(&p, &c)| value(p) == c),
        }
    }
}

/// One value per parameter, aligned with the owning space's parameter order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Configuration(Vec<i64>);

impl Configuration {
    pub fn new(values: impl Into<Vec<i64>>) -> Self {
        Self(values.into())
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<i64> {
        self.0
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Serialized form of a space; validated into a [`ParamSpace`].
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpaceDef {
    pub name: String,
    pub params: Vec<ParamDef>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub rules: Vec<ValidityRule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "SpaceDef", into = "SpaceDef"))]
pub struct ParamSpace {
    name: String,
    params: Vec<ParamDef>,
    rules: Vec<ValidityRule>,
    resolved: Vec<ResolvedRule>,
    cardinality: u64,
}

impl TryFrom<SpaceDef> for ParamSpace {
    type Error = Error;

    fn try_from(def: SpaceDef) -> Result<Self> {
        ParamSpace::new(def.name, def.params, def.rules)
    }
}

impl From<ParamSpace> for SpaceDef {
    fn from(space: ParamSpace) -> Self {
        SpaceDef { name: space.name, params: space.params, rules: space.rules }
    }
}

impl ParamSpace {
    pub fn new(name: impl Into<String>, params: Vec<ParamDef>, rules: Vec<ValidityRule>) -> Result<Self> {
        let name = name.into();
        let mut cardinality: u64 = 1;
        for (i, p) in params.iter().enumerate() {
            if p.values.is_empty() {
                return Err(Error::InvalidSpace(format!("parameter `{}` has no values", p.name)));
            }
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::InvalidSpace(format!("duplicate parameter `{}`", p.name)));
            }
            for (j, v) in p.values.iter().enumerate() {
                if p.values[..j].contains(v) {
                    return Err(Error::InvalidSpace(format!(
                        "parameter `{}` lists value {v} twice",
                        p.name
                    )));
                }
            }
            cardinality = cardinality
                .checked_mul(p.values.len() as u64)
                .ok_or_else(|| Error::InvalidSpace("cardinality overflows u64".into()))?;
        }
        let resolved = rules.iter().map(|r| r.resolve(&params)).collect::<Result<Vec<_>>>()?;
        Ok(Self { name, params, rules, resolved, cardinality })
    }

    /// Returns a copy of this space with `extra` rules appended.
    pub fn with_rules(&self, extra: impl IntoIterator<Item = ValidityRule>) -> Result<Self> {
        let mut rules = self.rules.clone();
        rules.extend(extra);
        Self::new(self.name.clone(), self.params.clone(), rules)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[ParamDef] {
        &self.params
    }

    pub fn rules(&self) -> &[ValidityRule] {
        &self.rules
    }

    /// Number of parameters.
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// Product of the value-list lengths; 1 for a space without parameters.
    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    /// Decodes `index` into per-parameter value positions.
    pub fn positions_at(&self, index: u64, positions: &mut [usize]) -> Result<()> {
        if index >= self.cardinality {
            return Err(Error::IndexOutOfRange { index, cardinality: self.cardinality });
        }
        if positions.len() != self.params.len() {
            return Err(Error::Mismatch(format!(
                "position buffer has length {}, space has {} parameters",
                positions.len(),
                self.params.len()
            )));
        }
        let mut rest = index;
        for (slot, p) in positions.iter_mut().zip(&self.params).rev() {
            let radix = p.values.len() as u64;
            *slot = (rest % radix) as usize;
            rest /= radix;
        }
        Ok(())
    }

    pub fn config_at_index(&self, index: u64) -> Result<Configuration> {
        let mut positions = vec![0; self.params.len()];
        self.positions_at(index, &mut positions)?;
        Ok(self.config_from_positions(&positions))
    }

    pub fn config_from_positions(&self, positions: &[usize]) -> Configuration {
        Configuration(self.params.iter().zip(positions).map(|(p, &i)| p.values[i]).collect())
    }

    pub fn positions_of(&self, config: &Configuration) -> Result<Vec<usize>> {
        if config.0.len() != self.params.len() {
            return Err(Error::Mismatch(format!(
                "configuration has {} values, space `{}` has {} parameters",
                config.0.len(),
                self.name,
                self.params.len()
            )));
        }
        self.params
            .iter()
            .zip(&config.0)
            .map(|(p, &v)| {
                p.position(v).ok_or_else(|| {
                    Error::Mismatch(format!("value {v} is not admissible for parameter `{}`", p.name))
                })
            })
            .collect()
    }

    pub fn index_of_config(&self, config: &Configuration) -> Result<u64> {
        let positions = self.positions_of(config)?;
        Ok(self
            .params
            .iter()
            .zip(positions)
            .fold(0u64, |acc, (p, pos)| acc * p.values.len() as u64 + pos as u64))
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        self.positions_of(config).is_ok()
    }

    /// True iff no rule is violated. Foreign configurations are never valid.
    pub fn is_statically_valid(&self, config: &Configuration) -> bool {
        self.contains(config) && self.resolved.iter().all(|r| r.allows(|p| config.0[p]))
    }

    pub fn positions_valid(&self, positions: &[usize]) -> bool {
        self.resolved
            .iter()
            .all(|r| r.allows(|p| self.params[p].values[positions[p]]))
    }

    /// `n` distinct configuration indices drawn uniformly without replacement.
    pub fn sample_indices(&self, n: u64, seed: u64) -> Result<Vec<u64>> {
        if n > self.cardinality {
            return Err(Error::SampleTooLarge { requested: n, cardinality: self.cardinality });
        }
        Ok(RandomOrder::new(self.cardinality, seed).take(n as usize).collect())
    }

    /// `n` distinct configurations drawn uniformly without replacement.
    /// Identical `(space, n, seed)` always yield the same list.
    pub fn sample_random(&self, n: u64, seed: u64) -> Result<Vec<Configuration>> {
        let mut positions = vec![0; self.params.len()];
        self.sample_indices(n, seed)?
            .into_iter()
            .map(|i| {
                self.positions_at(i, &mut positions)?;
                Ok(self.config_from_positions(&positions))
            })
            .collect()
    }

    /// `name=value` pairs, for messages.
    pub fn describe(&self, config: &Configuration) -> String {
        let mut out = String::new();
        for (i, (p, v)) in self.params.iter().zip(&config.0).enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{}={v}", p.name));
        }
        out
    }
}

/// Resource limits of the reference device class used by the built-in spaces
/// and bundled surrogates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeviceLimits {
    pub max_work_group: i64,
    pub max_local_mem_bytes: i64,
}

impl Default for DeviceLimits {
    fn default() -> Self {
        Self { max_work_group: 1024, max_local_mem_bytes: 49152 }
    }
}

impl DeviceLimits {
    /// `wg_x * wg_y <= max_work_group`.
    pub fn work_group_rule(&self) -> ValidityRule {
        ValidityRule::max_product(&["wg_x", "wg_y"], self.max_work_group)
    }

    /// Local-memory tile budget: a 4-byte element per output pixel of the
    /// work-group tile, charged only when `flag` is set.
    pub fn local_memory_rule(&self, flag: &str) -> ValidityRule {
        ValidityRule::max_product(&[flag, "wg_x", "ppt_x", "wg_y", "ppt_y"], self.max_local_mem_bytes)
            .with_coefficients(&[4, 1, 1, 1, 1])
    }
}

pub const BUILTIN_SPACES: [&str; 3] = ["convolution", "raycasting", "stereo"];

const POW2_TO_128: [i64; 8] = [1, 2, 4, 8, 16, 32, 64, 128];

fn common_params() -> Vec<ParamDef> {
    ["wg_x", "wg_y", "ppt_x", "ppt_y"]
        .into_iter()
        .map(|n| ParamDef::new(n, POW2_TO_128))
        .collect()
}

/// The three benchmark spaces: work-group size and pixels per thread in x/y
/// shared by all, plus benchmark-specific memory-placement flags and unroll
/// factors. Each carries the default work-group size limit as a static rule.
pub fn builtin_space(name: &str) -> Result<ParamSpace> {
    let mut params = common_params();
    match name {
        "convolution" => {
            for flag in ["image", "local", "padding", "interleaved", "unroll"] {
                params.push(ParamDef::flag(flag));
            }
        }
        "raycasting" => {
            for flag in ["image_data", "image_tf", "local_tf", "constant_tf", "interleaved"] {
                params.push(ParamDef::flag(flag));
            }
            params.push(ParamDef::new("unroll", [1, 2, 4, 8, 16]));
        }
        "stereo" => {
            for flag in ["image_left", "image_right", "local_left", "local_right"] {
                params.push(ParamDef::flag(flag));
            }
            params.push(ParamDef::new("unroll_disparity", [1, 2, 4, 8]));
            params.push(ParamDef::new("unroll_diff_x", [1, 2, 4]));
            params.push(ParamDef::new("unroll_diff_y", [1, 2, 4]));
        }
        other => return Err(Error::UnknownSpace(other.into())),
    }
    ParamSpace::new(name, params, vec![DeviceLimits::default().work_group_rule()])
}
