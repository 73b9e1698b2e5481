//! Deterministic synthetic device surrogates.
//!
//! A surrogate's noise-free time is `base_time` times the product of every
//! matching single-parameter and parameter-pair factor. Measurements add
//! multiplicative log-normal noise whose draws depend only on the surrogate
//! seed and the configuration index, so measuring is a pure function of
//! `(configuration, repetitions)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::measure::{InvalidReason, Outcome, Runner, Sample};
use crate::seed::{derive_seed, rng};
use crate::space::{Configuration, DeviceLimits, ParamSpace, ResolvedRule, ValidityRule};
use crate::{Error, Result};

/// A multiplicative effect that applies when every listed parameter takes
/// the corresponding `values` entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurrogateTerm {
    pub params: Vec<String>,
    #[cfg_attr(feature = "serde", serde(rename = "match"))]
    pub values: Vec<i64>,
    pub factor: f64,
}

impl SurrogateTerm {
    pub fn single(param: &str, value: i64, factor: f64) -> Self {
        Self { params: vec![param.into()], values: vec![value], factor }
    }

    pub fn pair(params: [&str; 2], values: [i64; 2], factor: f64) -> Self {
        Self { params: vec![params[0].into(), params[1].into()], values: values.to_vec(), factor }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurrogateSpec {
    pub base_time: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub terms: Vec<SurrogateTerm>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub noise_cv: f64,
    /// Configurations violating these fail at launch.
    #[cfg_attr(feature = "serde", serde(default))]
    pub invalid_rules: Vec<ValidityRule>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

impl SurrogateSpec {
    pub fn constant(base_time: f64) -> Self {
        Self { base_time, terms: Vec::new(), noise_cv: 0.0, invalid_rules: Vec::new(), seed: 0 }
    }
}

#[derive(Debug, Clone)]
struct PairTable {
    first: usize,
    second: usize,
    stride: usize,
    factors: Vec<f64>,
}

/// A [`SurrogateSpec`] bound to a parameter space.
#[derive(Debug, Clone)]
pub struct Surrogate {
    id: String,
    spec: SurrogateSpec,
    space: ParamSpace,
    single: Vec<Vec<f64>>,
    pairs: Vec<PairTable>,
    rules: Vec<ResolvedRule>,
    sigma: f64,
}

impl Surrogate {
    pub fn new(spec: SurrogateSpec, space: &ParamSpace) -> Result<Self> {
        if !(spec.base_time > 0.0 && spec.base_time.is_finite()) {
            return Err(Error::InvalidSurrogate(format!("base_time must be positive, got {}", spec.base_time)));
        }
        if !(spec.noise_cv >= 0.0 && spec.noise_cv.is_finite()) {
            return Err(Error::InvalidSurrogate(format!("noise_cv must be >= 0, got {}", spec.noise_cv)));
        }
        let params = space.params();
        let mut single: Vec<Vec<f64>> = params.iter().map(|p| vec![1.0; p.values.len()]).collect();
        let mut pairs: Vec<PairTable> = Vec::new();
        for term in &spec.terms {
            if !(term.factor > 0.0 && term.factor.is_finite()) {
                return Err(Error::InvalidSurrogate(format!("term factor must be positive, got {}", term.factor)));
            }
            if term.params.len() != term.values.len() || term.params.is_empty() || term.params.len() > 2 {
                return Err(Error::InvalidSurrogate(
                    "a term names one or two parameters with one match value each".into(),
                ));
            }
            let mut at = Vec::with_capacity(2);
            for (name, &value) in term.params.iter().zip(&term.values) {
                let p = space
                    .param_index(name)
                    .ok_or_else(|| Error::InvalidSurrogate(format!("term references unknown parameter `{name}`")))?;
                let pos = params[p].position(value).ok_or_else(|| {
                    Error::InvalidSurrogate(format!("term value {value} is not admissible for `{name}`"))
                })?;
                at.push((p, pos));
            }
            match at[..] {
                [(p, pos)] => single[p][pos] *= term.factor,
                [(p, _), (q, _)] if p == q => {
                    return Err(Error::InvalidSurrogate(format!("pair term repeats parameter `{}`", params[p].name)))
                }
                [a, b] => {
                    let ((first, i), (second, j)) = if a.0 < b.0 { (a, b) } else { (b, a) };
                    let stride = params[second].values.len();
                    let table = match pairs.iter_mut().position(|t| t.first == first && t.second == second) {
                        Some(t) => &mut pairs[t],
                        None => {
                            pairs.push(PairTable {
                                first,
                                second,
                                stride,
                                factors: vec![1.0; params[first].values.len() * stride],
                            });
                            pairs.last_mut().unwrap()
                        }
                    };
                    table.factors[i * stride + j] *= term.factor;
                }
                _ => unreachable!(),
            }
        }
        let rules = spec.invalid_rules.iter().map(|r| r.resolve(params)).collect::<Result<Vec<_>>>()?;
        let sigma = libm::sqrt(libm::log1p(spec.noise_cv * spec.noise_cv));
        Ok(Self { id: String::from("surrogate"), spec, space: space.clone(), single, pairs, rules, sigma })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn spec(&self) -> &SurrogateSpec {
        &self.spec
    }

    pub fn space(&self) -> &ParamSpace {
        &self.space
    }

    /// Whether `positions` trips one of the launch-failure rules.
    pub fn fails_at(&self, positions: &[usize]) -> bool {
        let params = self.space.params();
        !self.rules.iter().all(|r| r.allows(|p| params[p].values[positions[p]]))
    }

    /// Noise-free time, or `None` when the configuration fails to launch.
    pub fn true_time_at(&self, positions: &[usize]) -> Option<f64> {
        if self.fails_at(positions) {
            return None;
        }
        let mut t = self.spec.base_time;
        for (table, &pos) in self.single.iter().zip(positions) {
            t *= table[pos];
        }
        for pair in &self.pairs {
            t *= pair.factors[positions[pair.first] * pair.stride + positions[pair.second]];
        }
        Some(t)
    }

    /// Noise-free execution time of `config`.
    pub fn true_time(&self, config: &Configuration) -> Result<f64> {
        let positions = self.space.positions_of(config)?;
        self.true_time_at(&positions).ok_or(Error::InvalidConfiguration)
    }

    /// Minimum over `repetitions` noisy draws for the configuration at `index`.
    fn noisy_time(&self, true_time: f64, index: u64, repetitions: u32) -> f64 {
        if self.sigma == 0.0 {
            return true_time;
        }
        let mut rng = rng(derive_seed(self.spec.seed, index));
        (0..repetitions)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                true_time * libm::exp(self.sigma * z)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Exhaustive noise-free optimum over configurations that pass both the
    /// space's static rules and the launch rules. Ties go to the lowest index.
    pub fn true_optimum(&self) -> Option<(u64, f64)> {
        let mut positions = vec![0; self.space.len()];
        let mut best: Option<(u64, f64)> = None;
        for i in 0..self.space.cardinality() {
            self.space.positions_at(i, &mut positions).ok()?;
            if !self.space.positions_valid(&positions) {
                continue;
            }
            if let Some(t) = self.true_time_at(&positions) {
                if best.is_none_or(|(_, bt)| t < bt) {
                    best = Some((i, t));
                }
            }
        }
        best
    }
}

/// Noise-free time of `config` under `spec`.
pub fn surrogate_true_time(spec: &SurrogateSpec, space: &ParamSpace, config: &Configuration) -> Result<f64> {
    Surrogate::new(spec.clone(), space)?.true_time(config)
}

impl Runner for Surrogate {
    fn id(&self) -> &str {
        &self.id
    }

    fn measure(&mut self, config: &Configuration, repetitions: u32) -> Result<Sample> {
        if repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        let positions = self.space.positions_of(config)?;
        match self.true_time_at(&positions) {
            None => Ok(Sample::new(config.clone(), Outcome::Invalid { reason: InvalidReason::LaunchFailure }, 1)),
            Some(t) => {
                let index = self.space.index_of_config(config)?;
                let time = self.noisy_time(t, index, repetitions);
                Ok(Sample::new(config.clone(), Outcome::Valid { time }, repetitions))
            }
        }
    }
}

/// The bundled device profiles.
///
/// `cpu-like` prefers tiny work-groups with many pixels per thread and is hit
/// hard by image memory without local memory. `gpu-a` wants at least 128
/// work-items per group, wide groups and little work per thread. `gpu-b`
/// wants 256-item groups 64 wide, more work per thread, and local memory
/// without image memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurrogateProfile {
    CpuLike,
    GpuA,
    GpuB,
}

struct Roles {
    memory_pairs: &'static [(&'static str, &'static str)],
    padding: Option<&'static str>,
    interleaved: Option<&'static str>,
    unroll_flags: &'static [&'static str],
    unroll_factors: &'static [&'static str],
    constant: Option<&'static str>,
}

fn roles(space: &ParamSpace) -> Roles {
    let has = |n: &'static str| space.param_index(n).map(|_| n);
    let memory_pairs: &'static [(&str, &str)] = match space.name() {
        "stereo" => &[("image_left", "local_left"), ("image_right", "local_right")],
        "raycasting" => &[("image_tf", "local_tf")],
        _ => &[("image", "local")],
    };
    let unroll_factors: &'static [&str] = match space.name() {
        "stereo" => &["unroll_disparity", "unroll_diff_x", "unroll_diff_y"],
        "raycasting" => &["unroll"],
        _ => &[],
    };
    Roles {
        memory_pairs,
        padding: has("padding"),
        interleaved: has("interleaved"),
        unroll_flags: if space.name() == "convolution" { &["unroll"] } else { &[] },
        unroll_factors,
        constant: has("constant_tf"),
    }
}

struct Builder<'a> {
    space: &'a ParamSpace,
    terms: Vec<SurrogateTerm>,
}

impl Builder<'_> {
    fn values(&self, name: &str) -> Option<&[i64]> {
        self.space.param_index(name).map(|i| self.space.params()[i].values.as_slice())
    }

    /// Adds `exp(f(value))` for every value of `name`.
    fn single(&mut self, name: &str, f: impl Fn(i64) -> f64) {
        let Some(values) = self.values(name).map(<[i64]>::to_vec) else { return };
        for v in values {
            let lf = f(v);
            if lf != 0.0 {
                self.terms.push(SurrogateTerm::single(name, v, libm::exp(lf)));
            }
        }
    }

    /// Adds `exp(f(a, b))` for every value pair of `(first, second)`.
    fn pair(&mut self, first: &str, second: &str, f: impl Fn(i64, i64) -> f64) {
        let (Some(xs), Some(ys)) = (self.values(first).map(<[i64]>::to_vec), self.values(second).map(<[i64]>::to_vec))
        else {
            return;
        };
        for &x in &xs {
            for &y in &ys {
                let lf = f(x, y);
                if lf != 0.0 {
                    self.terms.push(SurrogateTerm::pair([first, second], [x, y], libm::exp(lf)));
                }
            }
        }
    }

    fn flag_pair(&mut self, first: &str, second: &str, table: [[f64; 2]; 2]) {
        self.pair(first, second, |a, b| libm::log(table[a as usize][b as usize]));
    }

    fn flag(&mut self, name: &str, on: f64) {
        self.single(name, |v| if v == 1 { libm::log(on) } else { 0.0 });
    }
}

/// Position of a power-of-two setting on its value list.
fn pos(v: i64) -> f64 {
    libm::log2(v as f64)
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

impl SurrogateProfile {
    pub const ALL: [SurrogateProfile; 3] = [SurrogateProfile::CpuLike, SurrogateProfile::GpuA, SurrogateProfile::GpuB];

    pub fn name(self) -> &'static str {
        match self {
            SurrogateProfile::CpuLike => "cpu-like",
            SurrogateProfile::GpuA => "gpu-a",
            SurrogateProfile::GpuB => "gpu-b",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Default noise coefficient of variation of the bundled profiles.
    pub const NOISE_CV: f64 = 0.05;

    fn seed(self) -> u64 {
        match self {
            SurrogateProfile::CpuLike => 0xC0DE_0001,
            SurrogateProfile::GpuA => 0xC0DE_00A0,
            SurrogateProfile::GpuB => 0xC0DE_00B0,
        }
    }

    /// Surrogate definition for `space`. Terms are generated for the
    /// parameters the space actually has, so reduced spaces work too.
    pub fn spec_for(self, space: &ParamSpace) -> SurrogateSpec {
        let roles = roles(space);
        let mut b = Builder { space, terms: Vec::new() };
        let limits = DeviceLimits::default();
        let base_time;
        match self {
            SurrogateProfile::GpuA => {
                base_time = 2.0e-3;
                b.pair("wg_x", "wg_y", |x, y| {
                    let t = pos(x) + pos(y);
                    0.30 * relu(7.0 - t) + 0.10 * relu(t - 8.0) + 0.12 * relu(4.0 - pos(x))
                });
                b.pair("ppt_x", "ppt_y", |x, y| {
                    let w = pos(x) + pos(y);
                    0.25 * libm::fabs(w - 2.0) + 0.15 * relu(pos(x) - 3.0)
                });
                b.pair("wg_x", "ppt_x", |w, p| 0.35 * relu(pos(w) + pos(p) - 10.0));
                b.pair("wg_y", "ppt_y", |w, p| 0.35 * relu(pos(w) + pos(p) - 10.0));
                for &(image, local) in roles.memory_pairs {
                    b.flag_pair(image, local, [[1.0, 0.78], [0.82, 0.74]]);
                    b.pair(local, "wg_x", |l, w| if l == 1 && pos(w) <= 2.0 { libm::log(1.25) } else { 0.0 });
                }
                if let Some(padding) = roles.padding {
                    b.flag_pair(padding, roles.memory_pairs[0].1, [[1.0, 1.0], [1.03, 0.92]]);
                }
                if let Some(il) = roles.interleaved {
                    b.pair(il, "ppt_x", |i, p| match (i, p >= 2) {
                        (1, true) => libm::log(0.88),
                        (1, false) => libm::log(1.06),
                        _ => 0.0,
                    });
                }
                for &u in roles.unroll_flags {
                    b.flag(u, 0.94);
                }
                for &u in roles.unroll_factors {
                    b.single(u, |v| -0.06 * pos(v).min(2.0) + 0.04 * relu(pos(v) - 2.0));
                }
                if let Some(c) = roles.constant {
                    b.flag(c, 0.9);
                }
            }
            SurrogateProfile::GpuB => {
                base_time = 3.0e-3;
                b.pair("wg_x", "wg_y", |x, y| {
                    let t = pos(x) + pos(y);
                    0.35 * relu(8.0 - t) + 0.20 * relu(t - 8.0) + 0.15 * libm::fabs(pos(x) - 6.0)
                });
                b.pair("ppt_x", "ppt_y", |x, y| {
                    let w = pos(x) + pos(y);
                    0.22 * libm::fabs(w - 4.0) + 0.10 * relu(pos(y) - 4.0)
                });
                b.pair("wg_x", "ppt_x", |w, p| 0.35 * relu(pos(w) + pos(p) - 10.0));
                b.pair("wg_y", "ppt_y", |w, p| 0.35 * relu(pos(w) + pos(p) - 10.0));
                for &(image, local) in roles.memory_pairs {
                    b.flag_pair(image, local, [[1.0, 0.72], [1.15, 0.80]]);
                }
                if let Some(padding) = roles.padding {
                    b.flag_pair(padding, roles.memory_pairs[0].1, [[1.0, 1.0], [1.0, 0.86]]);
                }
                if let Some(il) = roles.interleaved {
                    b.pair(il, "ppt_y", |i, p| match (i, p >= 4) {
                        (1, true) => libm::log(0.9),
                        (1, false) => libm::log(1.04),
                        _ => 0.0,
                    });
                }
                for &u in roles.unroll_flags {
                    b.flag(u, 1.06);
                }
                for &u in roles.unroll_factors {
                    b.single(u, |v| -0.04 * pos(v).min(3.0) + 0.06 * relu(pos(v) - 3.0));
                }
                if let Some(c) = roles.constant {
                    b.flag(c, 0.85);
                }
            }
            SurrogateProfile::CpuLike => {
                base_time = 1.5e-2;
                b.pair("wg_x", "wg_y", |x, y| {
                    let t = pos(x) + pos(y);
                    0.06 * t + 0.30 * relu(t - 6.0)
                });
                b.pair("ppt_x", "ppt_y", |x, y| {
                    let w = pos(x) + pos(y);
                    0.12 * libm::fabs(w - 9.0) + 0.25 * relu(w - 11.0)
                });
                b.pair("wg_x", "ppt_x", |w, p| 0.15 * relu(pos(w) + pos(p) - 10.0));
                b.pair("wg_y", "ppt_y", |w, p| 0.15 * relu(pos(w) + pos(p) - 10.0));
                for &(image, local) in roles.memory_pairs {
                    b.flag_pair(image, local, [[1.0, 1.12], [4.0, 1.18]]);
                }
                if let Some(il) = roles.interleaved {
                    b.pair(il, "ppt_x", |i, p| if i == 1 && p >= 8 { libm::log(1.25) } else { 0.0 });
                }
                for &u in roles.unroll_flags {
                    b.flag(u, 0.96);
                }
                for &u in roles.unroll_factors {
                    b.single(u, |v| -0.03 * pos(v).min(2.0));
                }
            }
        }
        let invalid_rules = roles
            .memory_pairs
            .iter()
            .filter(|(_, local)| space.param_index(local).is_some() && space.name() != "raycasting")
            .filter(|_| ["wg_x", "wg_y", "ppt_x", "ppt_y"].iter().all(|n| space.param_index(n).is_some()))
            .map(|&(_, local)| limits.local_memory_rule(local))
            .collect();
        SurrogateSpec { base_time, terms: b.terms, noise_cv: Self::NOISE_CV, invalid_rules, seed: self.seed() }
    }

    pub fn surrogate(self, space: &ParamSpace) -> Result<Surrogate> {
        Ok(Surrogate::new(self.spec_for(space), space)?.with_id(format!("surrogate:{}", self.name())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{builtin_space, ParamDef};

    fn flags() -> ParamSpace {
        ParamSpace::new(
            "flags",
            vec![ParamDef::new("wg_x", [1, 2, 4]), ParamDef::flag("flag"), ParamDef::flag("use_local")],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn constant_surrogate() {
        let space = flags();
        let mut s = Surrogate::new(SurrogateSpec::constant(1.0), &space).unwrap();
        for i in 0..space.cardinality() {
            let c = space.config_at_index(i).unwrap();
            assert_eq!(s.measure(&c, 3).unwrap().outcome, Outcome::Valid { time: 1.0 });
        }
    }

    #[test]
    fn single_factor() {
        let space = flags();
        let mut spec = SurrogateSpec::constant(1.0);
        spec.terms.push(SurrogateTerm::single("flag", 1, 0.5));
        let mut s = Surrogate::new(spec, &space).unwrap();
        let on = Configuration::new([1, 1, 0]);
        let off = Configuration::new([1, 0, 0]);
        assert_eq!(s.measure(&on, 1).unwrap().outcome, Outcome::Valid { time: 0.5 });
        assert_eq!(s.measure(&off, 1).unwrap().outcome, Outcome::Valid { time: 1.0 });
    }

    #[test]
    fn independent_factors_commute() {
        let space = flags();
        let mut spec = SurrogateSpec::constant(3.0);
        spec.terms.push(SurrogateTerm::single("flag", 1, 0.5));
        spec.terms.push(SurrogateTerm::single("use_local", 1, 2.0));
        let t = surrogate_true_time(&spec, &space, &Configuration::new([2, 1, 1])).unwrap();
        assert_eq!(t, 3.0);
    }

    #[test]
    fn pair_term_needs_both() {
        let space = flags();
        let mut spec = SurrogateSpec::constant(1.0);
        spec.terms.push(SurrogateTerm::pair(["wg_x", "use_local"], [1, 1], 4.0));
        let s = Surrogate::new(spec, &space).unwrap();
        assert_eq!(s.true_time(&Configuration::new([1, 0, 1])).unwrap(), 4.0);
        assert_eq!(s.true_time(&Configuration::new([2, 0, 1])).unwrap(), 1.0);
        assert_eq!(s.true_time(&Configuration::new([1, 0, 0])).unwrap(), 1.0);
    }

    #[test]
    fn invalid_rule_is_launch_failure() {
        let space = flags();
        let mut spec = SurrogateSpec::constant(1.0);
        spec.invalid_rules.push(ValidityRule::max_product(&["wg_x", "use_local"], 2));
        let mut s = Surrogate::new(spec.clone(), &space).unwrap();
        let bad = Configuration::new([4, 0, 1]);
        assert_eq!(
            s.measure(&bad, 1).unwrap().outcome,
            Outcome::Invalid { reason: InvalidReason::LaunchFailure }
        );
        assert_eq!(surrogate_true_time(&spec, &space, &bad), Err(Error::InvalidConfiguration));
    }

    #[test]
    fn optimum_matches_brute_force() {
        let space = flags();
        let mut spec = SurrogateSpec::constant(1.0);
        spec.terms.push(SurrogateTerm::single("wg_x", 4, 0.6));
        spec.terms.push(SurrogateTerm::pair(["wg_x", "flag"], [4, 1], 0.5));
        spec.terms.push(SurrogateTerm::single("use_local", 0, 1.2));
        spec.invalid_rules.push(ValidityRule::forbidden(&["wg_x", "flag", "use_local"], &[4, 1, 1]));
        let s = Surrogate::new(spec, &space).unwrap();
        let mut brute: Option<(u64, f64)> = None;
        for i in 0..space.cardinality() {
            if let Ok(t) = s.true_time(&space.config_at_index(i).unwrap()) {
                if brute.is_none_or(|(_, b)| t < b) {
                    brute = Some((i, t));
                }
            }
        }
        assert_eq!(s.true_optimum(), brute);
        assert_eq!(brute.unwrap().0, space.index_of_config(&Configuration::new([4, 1, 0])).unwrap());
    }

    #[test]
    fn rejects_bad_specs() {
        let space = flags();
        let mut spec = SurrogateSpec::constant(1.0);
        spec.terms.push(SurrogateTerm::single("flag", 1, 0.0));
        assert!(Surrogate::new(spec, &space).is_err());
        let mut spec = SurrogateSpec::constant(1.0);
        spec.terms.push(SurrogateTerm::single("nope", 1, 2.0));
        assert!(Surrogate::new(spec, &space).is_err());
        let mut spec = SurrogateSpec::constant(1.0);
        spec.noise_cv = -0.1;
        assert!(Surrogate::new(spec, &space).is_err());
        assert!(Surrogate::new(SurrogateSpec::constant(0.0), &space).is_err());
    }

    #[test]
    fn noisy_measurement_is_pure() {
        let space = builtin_space("convolution").unwrap();
        let mut a = SurrogateProfile::GpuA.surrogate(&space).unwrap();
        let mut b = SurrogateProfile::GpuA.surrogate(&space).unwrap();
        let c = space.config_at_index(12345).unwrap();
        let first = a.measure(&c, 3).unwrap();
        assert_eq!(first, a.measure(&c, 3).unwrap());
        assert_eq!(first, b.measure(&c, 3).unwrap());
        assert_ne!(first.outcome, a.measure(&c, 1).unwrap().outcome);
    }

    #[test]
    fn profiles_differ_in_optimum() {
        let space = builtin_space("convolution").unwrap();
        let optima: Vec<u64> = SurrogateProfile::ALL
            .iter()
            .map(|p| p.surrogate(&space).unwrap().true_optimum().unwrap().0)
            .collect();
        assert_ne!(optima[0], optima[1]);
        assert_ne!(optima[1], optima[2]);
        assert_ne!(optima[0], optima[2]);
    }

    #[test]
    fn profiles_build_for_every_builtin_space() {
        for name in crate::space::BUILTIN_SPACES {
            let space = builtin_space(name).unwrap();
            for p in SurrogateProfile::ALL {
                let s = p.surrogate(&space).unwrap();
                assert!(s.true_time(&space.config_at_index(0).unwrap()).is_ok());
            }
        }
    }
}
