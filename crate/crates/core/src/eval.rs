//! Experiment harnesses: learning curves, predicted-versus-actual tables,
//! slowdown grids, random-search baselines and cross-runner transfer.
//!
//! Every harness is deterministic for a fixed seed and a deterministic runner.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::measure::{measure_checked, Runner, SampleSet};
use crate::model::{train_ensemble, Ensemble, TrainConfig, DEFAULT_BAG_SIZE};
use crate::seed::{derive_seed, RandomOrder};
use crate::space::{Configuration, ParamSpace};
use crate::tuner::{autotune, exhaustive_search, TunerConfig};
use crate::{Error, Result};

const HOLDOUT_STREAM: u64 = u64::MAX;
const TRAIN_STREAM: u64 = 1;

/// Default number of repeats per learning-curve size.
pub const DEFAULT_REPEATS: usize = 5;
/// Default holdout size for learning curves.
pub const DEFAULT_HOLDOUT: usize = 500;
/// Default number of rows in a scatter export.
pub const DEFAULT_SCATTER_POINTS: usize = 100;

/// Settings shared by the harnesses that train models.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalOptions {
    pub k_bag: usize,
    pub train: TrainConfig,
    pub holdout_size: usize,
    pub repetitions: u32,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { k_bag: DEFAULT_BAG_SIZE, train: TrainConfig::default(), holdout_size: DEFAULT_HOLDOUT, repetitions: 1 }
    }
}

/// Mean of `|predicted - actual| / actual` over `(predicted, actual)` pairs.
/// `None` for an empty input.
pub fn relative_error(pairs: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let (sum, n) = pairs.into_iter().fold((0.0, 0usize), |(s, n), (p, a)| (s + libm::fabs(p - a) / a, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean relative error of `ensemble` over the valid samples of `holdout`.
pub fn mean_relative_error(ensemble: &Ensemble, holdout: &SampleSet) -> Result<f64> {
    check_same_space(ensemble, holdout)?;
    let pairs = holdout.valid().map(|(c, t)| Ok((ensemble.predict(c)?, t))).collect::<Result<Vec<_>>>()?;
    relative_error(pairs).ok_or(Error::InsufficientData { needed: 1, available: 0 })
}

fn check_same_space(ensemble: &Ensemble, samples: &SampleSet) -> Result<()> {
    if ensemble.space_name() != samples.space_name {
        return Err(Error::Mismatch(alloc::format!(
            "model is for space `{}`, samples are for `{}`",
            ensemble.space_name(),
            samples.space_name
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatMre {
    pub repeat: usize,
    /// The training error when this repeat could not produce a model.
    pub mre: core::result::Result<f64, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyPoint {
    pub n_train: usize,
    /// Mean over the successful repeats; `None` when all of them failed.
    pub mre: Option<f64>,
    pub repeats: Vec<RepeatMre>,
}

impl AccuracyPoint {
    pub fn n_repeats(&self) -> usize {
        self.repeats.len()
    }

    pub fn n_failed(&self) -> usize {
        self.repeats.iter().filter(|r| r.mre.is_err()).count()
    }
}

/// Draws `size` valid configurations for the holdout, walking a seeded random
/// order. Returns the holdout and every index it consumed, valid or not.
fn draw_holdout<R: Runner + ?Sized>(
    space: &ParamSpace,
    runner: &mut R,
    size: usize,
    seed: u64,
    repetitions: u32,
) -> Result<(SampleSet, BTreeSet<u64>)> {
    let mut holdout = SampleSet::new(space.name(), runner.id());
    let mut used = BTreeSet::new();
    let mut valid = 0;
    for index in RandomOrder::new(space.cardinality(), seed) {
        if valid == size {
            break;
        }
        used.insert(index);
        let sample = measure_checked(runner, space, &space.config_at_index(index)?, repetitions)?;
        if sample.outcome.is_valid() {
            valid += 1;
            holdout.samples.push(sample);
        }
    }
    if valid < size {
        return Err(Error::InsufficientData { needed: size, available: valid });
    }
    Ok((holdout, used))
}

/// Holdout error as a function of training-set size.
///
/// One holdout of `opts.holdout_size` valid configurations is drawn first and
/// shared by every size. For repeat `r`, configurations are drawn from a
/// random order seeded with `derive_seed(seed, r)` that skips the holdout; a
/// size of `n` trains on the first `n` of them (invalid draws included in the
/// count, as in stage one of tuning). Repeats whose training fails are kept
/// and marked with the error.
pub fn learning_curve<R: Runner + ?Sized>(
    space: &ParamSpace,
    runner: &mut R,
    sizes: &[usize],
    repeats: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<Vec<AccuracyPoint>> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    opts.train.validate()?;
    let largest = sizes.iter().copied().max().unwrap_or(0);
    let (holdout, used) =
        draw_holdout(space, runner, opts.holdout_size, derive_seed(seed, HOLDOUT_STREAM), opts.repetitions)?;
    let supply = space.cardinality() - used.len() as u64;
    if largest as u64 > supply {
        return Err(Error::SampleTooLarge { requested: largest as u64, cardinality: supply });
    }

    let mut points: Vec<AccuracyPoint> =
        sizes.iter().map(|&n_train| AccuracyPoint { n_train, mre: None, repeats: Vec::with_capacity(repeats) }).collect();
    for r in 0..repeats {
        let repeat_seed = derive_seed(seed, r as u64);
        let mut drawn = SampleSet::new(space.name(), runner.id());
        for index in RandomOrder::new(space.cardinality(), repeat_seed).filter(|i| !used.contains(i)).take(largest) {
            drawn.samples.push(measure_checked(runner, space, &space.config_at_index(index)?, opts.repetitions)?);
        }
        let train_cfg = opts.train.with_seed(derive_seed(repeat_seed, TRAIN_STREAM));
        for point in &mut points {
            let subset = SampleSet {
                space_name: drawn.space_name.clone(),
                runner_id: drawn.runner_id.clone(),
                samples: drawn.samples[..point.n_train].to_vec(),
            };
            let mre = match train_ensemble(&subset, space, opts.k_bag, &train_cfg) {
                Ok(ensemble) => Ok(mean_relative_error(&ensemble, &holdout)?),
                Err(e @ (Error::InsufficientData { .. } | Error::EmptyTrainingSet | Error::Divergence { .. })) => Err(e),
                Err(e) => return Err(e),
            };
            point.repeats.push(RepeatMre { repeat: r, mre });
        }
    }
    for point in &mut points {
        let ok: Vec<f64> = point.repeats.iter().filter_map(|r| r.mre.as_ref().ok().copied()).collect();
        point.mre = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
    }
    Ok(points)
}

/// `n_points` `(predicted, actual)` pairs from a seeded subset of the valid
/// holdout samples, in holdout order.
pub fn scatter_export(ensemble: &Ensemble, holdout: &SampleSet, n_points: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    check_same_space(ensemble, holdout)?;
    let valid: Vec<(&Configuration, f64)> = holdout.valid().collect();
    if valid.len() < n_points {
        return Err(Error::InsufficientData { needed: n_points, available: valid.len() });
    }
    let mut picked: Vec<usize> = RandomOrder::new(valid.len() as u64, seed).take(n_points).map(|i| i as usize).collect();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|i| {
            let (config, actual) = valid[i];
            Ok((ensemble.predict(config)?, actual))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlowdownCell {
    pub n_train: usize,
    pub m_candidates: usize,
    /// Mean of `best_time / optimum` over successful runs; `None` when no run
    /// succeeded.
    pub mean_slowdown: Option<f64>,
    /// Per-repeat slowdown, `None` for runs that produced no result.
    pub runs: Vec<Option<f64>>,
}

impl SlowdownCell {
    pub fn n_repeats(&self) -> usize {
        self.runs.len()
    }

    pub fn n_success(&self) -> usize {
        self.runs.iter().filter(|r| r.is_some()).count()
    }

    pub fn n_invalid(&self) -> usize {
        self.runs.iter().filter(|r| r.is_none()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlowdownGrid {
    pub optimum: (Configuration, f64),
    /// Row-major over `n_values` then `m_values`.
    pub cells: Vec<SlowdownCell>,
}

/// Tunes every `(n, m)` pair `repeats` times and reports slowdown against the
/// exhaustive optimum. Repeat `r` uses tuner seed `derive_seed(seed, r)` in
/// every cell. Runs that end with every candidate invalid, too few valid
/// samples or a diverged model count as invalid; other errors abort.
///
/// On a deterministic runner every slowdown is at least 1.
pub fn slowdown_grid<R: Runner + ?Sized>(
    space: &ParamSpace,
    runner: &mut R,
    n_values: &[usize],
    m_values: &[usize],
    repeats: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<SlowdownGrid> {
    let optimum = exhaustive_search(space, runner)?;
    let mut cells = Vec::with_capacity(n_values.len() * m_values.len());
    for &n_train in n_values {
        for &m_candidates in m_values {
            let mut runs = Vec::with_capacity(repeats);
            for r in 0..repeats {
                let cfg = TunerConfig {
                    n_train,
                    m_candidates,
                    k_bag: opts.k_bag,
                    seed: derive_seed(seed, r as u64),
                    train: opts.train.clone(),
                    max_prediction_sweep: None,
                    repetitions: opts.repetitions,
                };
                match autotune(space, runner, &cfg) {
                    Ok(report) => runs.push(report.best_time.map(|t| t / optimum.1)),
                    Err(
                        Error::AllCandidatesInvalid(_)
                        | Error::InsufficientData { .. }
                        | Error::EmptyTrainingSet
                        | Error::NoValidConfiguration
                        | Error::Divergence { .. },
                    ) => runs.push(None),
                    Err(e) => return Err(e),
                }
            }
            let ok: Vec<f64> = runs.iter().flatten().copied().collect();
            let mean_slowdown = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
            cells.push(SlowdownCell { n_train, m_candidates, mean_slowdown, runs });
        }
    }
    Ok(SlowdownGrid { optimum, cells })
}

/// Best valid time among `n_random` distinct seeded random configurations.
pub fn random_baseline<R: Runner + ?Sized>(
    space: &ParamSpace,
    runner: &mut R,
    n_random: u64,
    seed: u64,
    repetitions: u32,
) -> Result<(Configuration, f64)> {
    let mut set = SampleSet::new(space.name(), runner.id());
    for index in space.sample_indices(n_random, seed)? {
        set.samples.push(measure_checked(runner, space, &space.config_at_index(index)?, repetitions)?);
    }
    set.best().map(|(c, t)| (c.clone(), t)).ok_or(Error::NoValidConfiguration)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub runner_ids: Vec<String>,
    /// Exhaustive optimum of each runner.
    pub optima: Vec<(Configuration, f64)>,
    /// `matrix[i][j]`: time of runner `i`'s optimum on runner `j`, relative to
    /// runner `j`'s own optimum. `None` when it cannot run on runner `j`.
    pub matrix: Vec<Vec<Option<f64>>>,
}

/// Cross-runner slowdown of each runner's optimal configuration.
pub fn transfer_report<R: Runner>(space: &ParamSpace, runners: &mut [R]) -> Result<TransferReport> {
    let runner_ids = runners.iter().map(|r| String::from(r.id())).collect();
    let optima = runners.iter_mut().map(|r| exhaustive_search(space, r)).collect::<Result<Vec<_>>>()?;
    let mut matrix = Vec::with_capacity(runners.len());
    for (i, (config, _)) in optima.iter().enumerate() {
        let mut row = Vec::with_capacity(runners.len());
        for (j, runner) in runners.iter_mut().enumerate() {
            if i == j {
                row.push(Some(1.0));
                continue;
            }
            let sample = measure_checked(runner, space, config, 1)?;
            row.push(sample.outcome.time().map(|t| t / optima[j].1));
        }
        matrix.push(row);
    }
    Ok(TransferReport { runner_ids, optima, matrix })
}
