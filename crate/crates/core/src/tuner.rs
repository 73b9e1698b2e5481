//! Two-stage model-driven auto-tuning.
//!
//! Stage one measures `n_train` random configurations and trains a bagged
//! ensemble on the valid ones. The ensemble then scores every statically
//! valid configuration, and stage two measures the `m_candidates` with the
//! lowest predicted time. The best stage-two measurement is returned.

use alloc::boxed::Box;
use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::measure::{measure, measure_checked, Runner, SampleSet};
use crate::model::{train_ensemble, Ensemble, TrainConfig, DEFAULT_BAG_SIZE};
use crate::seed::derive_seed;
use crate::space::{Configuration, ParamSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TunerConfig {
    /// Stage-one sample size.
    pub n_train: usize,
    /// Stage-two candidate count.
    pub m_candidates: usize,
    pub k_bag: usize,
    pub seed: u64,
    /// Training hyperparameters. Its `seed` is replaced by one derived from `seed`.
    pub train: TrainConfig,
    /// Score at most this many configurations (a seeded uniform subset) in stage two.
    pub max_prediction_sweep: Option<u64>,
    pub repetitions: u32,
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            n_train: 2000,
            m_candidates: 200,
            k_bag: DEFAULT_BAG_SIZE,
            seed: 0,
            train: TrainConfig::default(),
            max_prediction_sweep: None,
            repetitions: 1,
        }
    }
}

impl TunerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_bag == 0 || self.m_candidates == 0 || self.repetitions == 0 {
            return Err(Error::InvalidArgument("k, M and repetitions must be at least 1".into()));
        }
        if self.n_train < self.k_bag {
            return Err(Error::InvalidArgument(alloc::format!(
                "N ({}) must be at least k ({})",
                self.n_train,
                self.k_bag
            )));
        }
        self.train.validate()
    }

    /// Seeds actually used by [`autotune`], all derived from `seed`.
    pub fn seeds(&self) -> Seeds {
        Seeds { sample: self.seed, train: derive_seed(self.seed, 1), sweep: derive_seed(self.seed, 2) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Seeds {
    pub sample: u64,
    pub train: u64,
    pub sweep: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TuningReport {
    pub space_name: String,
    pub runner_id: String,
    pub config: TunerConfig,
    pub seeds: Seeds,
    /// Best valid stage-two configuration; `None` only inside
    /// [`Error::AllCandidatesInvalid`].
    pub best_config: Option<Configuration>,
    pub best_time: Option<f64>,
    /// Predicted time of the top-ranked candidate.
    pub predicted_best_time: f64,
    pub stage2_invalid_count: usize,
    pub measurements_total: usize,
    pub stage1: SampleSet,
    pub stage2: SampleSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub index: u64,
    pub config: Configuration,
    /// Predicted time in seconds.
    pub predicted: f64,
}

/// Orders by predicted log-time, then configuration index.
#[derive(Debug, Clone, Copy)]
struct Ranked(f64, u64);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Keeps the `m` smallest entries seen.
struct TopM {
    m: usize,
    heap: BinaryHeap<Ranked>,
}

impl TopM {
    fn new(m: usize) -> Self {
        Self { m, heap: BinaryHeap::with_capacity(m + 1) }
    }

    fn offer(&mut self, item: Ranked) {
        if self.heap.len() < self.m {
            self.heap.push(item);
        } else if let Some(worst) = self.heap.peek() {
            if item < *worst {
                self.heap.pop();
                self.heap.push(item);
            }
        }
    }

    fn merge(mut self, other: TopM) -> TopM {
        for item in other.heap {
            self.offer(item);
        }
        self
    }
}

const SWEEP_CHUNK: usize = 4096;

fn score_chunk(ensemble: &Ensemble, space: &ParamSpace, indices: impl Iterator<Item = u64>, m: usize) -> TopM {
    let mut top = TopM::new(m);
    let mut positions = vec![0; space.len()];
    let mut features = vec![0.0; space.len()];
    for i in indices {
        if space.positions_at(i, &mut positions).is_err() || !space.positions_valid(&positions) {
            continue;
        }
        ensemble.encoder().encode_positions(&positions, &mut features);
        top.offer(Ranked(ensemble.predict_log_unchecked(&features), i));
    }
    top
}

/// The `m` statically valid configurations with the lowest predicted time,
/// ascending, ties broken by index. Scores the whole space, or a seeded
/// uniform subset of `sweep_cap` configurations when the space is larger.
/// Returns fewer than `m` entries when fewer valid configurations are scored.
pub fn top_m_predicted(
    ensemble: &Ensemble,
    space: &ParamSpace,
    m: usize,
    sweep_cap: Option<u64>,
    seed: u64,
) -> Result<Vec<Candidate>> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    if !ensemble.encoder().matches(space) {
        return Err(Error::Mismatch(alloc::format!(
            "model for `{}` does not match space `{}`",
            ensemble.space_name(),
            space.name()
        )));
    }
    let card = space.cardinality();
    let subset = match sweep_cap {
        Some(cap) if cap < card => Some(space.sample_indices(cap, seed)?),
        _ => None,
    };
    let total = subset.as_ref().map_or(card, |s| s.len() as u64);
    let chunks = total.div_ceil(SWEEP_CHUNK as u64);
    let run = |c: u64| {
        let lo = c * SWEEP_CHUNK as u64;
        let hi = (lo + SWEEP_CHUNK as u64).min(total);
        match &subset {
            Some(s) => score_chunk(ensemble, space, s[lo as usize..hi as usize].iter().copied(), m),
            None => score_chunk(ensemble, space, lo..hi, m),
        }
    };
    #[cfg(feature = "parallel")]
    let top = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run).reduce(|| TopM::new(m), TopM::merge)
    };
    #[cfg(not(feature = "parallel"))]
    let top = (0..chunks).map(run).fold(TopM::new(m), TopM::merge);

    let mut ranked = top.heap.into_vec();
    ranked.sort_unstable();
    ranked
        .into_iter()
        .map(|Ranked(log_pred, index)| {
            Ok(Candidate { index, config: space.config_at_index(index)?, predicted: libm::exp(log_pred) })
        })
        .collect()
}

/// Runs the full two-stage pipeline.
///
/// Statically invalid stage-one draws are recorded without being run.
/// Stage-two candidates that fail at run time are counted and skipped; if
/// all of them fail the partial report is returned inside
/// [`Error::AllCandidatesInvalid`].
pub fn autotune<R: Runner + ?Sized>(space: &ParamSpace, runner: &mut R, cfg: &TunerConfig) -> Result<TuningReport> {
    cfg.validate()?;
    let seeds = cfg.seeds();
    let indices = space.sample_indices(cfg.n_train as u64, seeds.sample)?;

    let mut stage1 = SampleSet::new(space.name(), runner.id());
    for i in indices {
        let config = space.config_at_index(i)?;
        stage1.samples.push(measure_checked(runner, space, &config, cfg.repetitions)?);
    }
    let valid = stage1.valid_count();
    if valid < cfg.k_bag {
        return Err(Error::InsufficientData { needed: cfg.k_bag, available: valid });
    }
    let ensemble = train_ensemble(&stage1, space, cfg.k_bag, &cfg.train.with_seed(seeds.train))?;
    let candidates = top_m_predicted(&ensemble, space, cfg.m_candidates, cfg.max_prediction_sweep, seeds.sweep)?;
    let predicted_best_time = candidates.first().map(|c| c.predicted).ok_or(Error::NoValidConfiguration)?;

    let mut stage2 = SampleSet::new(space.name(), runner.id());
    for c in &candidates {
        stage2.samples.push(measure(runner, &c.config, cfg.repetitions)?);
    }
    let stage2_invalid_count = stage2.len() - stage2.valid_count();
    let best = stage2.best().map(|(c, t)| (c.clone(), t));
    let mut report = TuningReport {
        space_name: space.name().into(),
        runner_id: runner.id().into(),
        config: cfg.clone(),
        seeds,
        best_config: None,
        best_time: None,
        predicted_best_time,
        stage2_invalid_count,
        measurements_total: stage1.len() + stage2.len(),
        stage1,
        stage2,
    };
    match best {
        Some((config, time)) => {
            report.best_config = Some(config);
            report.best_time = Some(time);
            Ok(report)
        }
        None => Err(Error::AllCandidatesInvalid(Box::new(report))),
    }
}

/// Measures every configuration once; statically invalid ones are recorded
/// without being run.
pub fn exhaustive_sweep<R: Runner + ?Sized>(space: &ParamSpace, runner: &mut R) -> Result<SampleSet> {
    let mut set = SampleSet::new(space.name(), runner.id());
    let mut positions = vec![0; space.len()];
    for i in 0..space.cardinality() {
        space.positions_at(i, &mut positions)?;
        let config = space.config_from_positions(&positions);
        set.samples.push(measure_checked(runner, space, &config, 1)?);
    }
    Ok(set)
}

/// Best measured configuration over the whole space; ties go to the lowest index.
pub fn exhaustive_search<R: Runner + ?Sized>(space: &ParamSpace, runner: &mut R) -> Result<(Configuration, f64)> {
    let sweep = exhaustive_sweep(space, runner)?;
    sweep.best().map(|(c, t)| (c.clone(), t)).ok_or(Error::NoValidConfiguration)
}
