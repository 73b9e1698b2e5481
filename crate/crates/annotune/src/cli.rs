//! The `annotune` command line.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use annotune_core::eval::{
    learning_curve, random_baseline, scatter_export, slowdown_grid, transfer_report, EvalOptions, DEFAULT_HOLDOUT,
    DEFAULT_REPEATS, DEFAULT_SCATTER_POINTS,
};
use annotune_core::measure::measure_checked;
use annotune_core::model::train_ensemble;
use annotune_core::tuner::exhaustive_sweep;
use annotune_core::{autotune, Configuration, ParamSpace, RuleKind, Runner, ValidityRule};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::files::{load_space, load_surrogate, write_json};
use crate::manifest::RunManifest;
use crate::model_file::{load_model, save_model};
use crate::samples::{read_samples, truncate_partial_row, write_samples, SampleWriter};
use crate::tables;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "annotune", version, about = "Model-driven auto-tuning of kernel parameters")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Inspect parameter spaces.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Measure N random configurations into samples.csv.
    Measure {
        #[command(flatten)]
        run: RunArgs,
        /// Append to an existing samples.csv, skipping measured configurations.
        #[arg(long)]
        resume: bool,
    },
    /// Train an ensemble on a sample file into model.json.
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Predict with a saved model into predictions.csv.
    Predict {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        model: PathBuf,
        /// Predict one configuration instead of sweeping every statically valid one.
        #[arg(long)]
        index: Option<u64>,
    },
    /// Run the two-stage tuner and write report.json.
    Tune {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Measure every configuration into oracle.csv and best.json.
    Oracle {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Experiment harnesses.
    #[command(subcommand)]
    Eval(EvalCmd),
}

#[derive(Debug, Subcommand)]
enum SpaceCmd {
    /// Print the parameters and cardinality of a space.
    Info { space: String },
    /// Print the configuration at an index.
    Index {
        index: u64,
        #[arg(long)]
        space: String,
    },
}

#[derive(Debug, Subcommand)]
enum EvalCmd {
    /// Holdout error versus training-set size, into learning_curve.csv.
    Curve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "250,500,1000,2000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        #[arg(long, default_value_t = DEFAULT_HOLDOUT)]
        holdout_size: usize,
    },
    /// Predicted versus actual times on held-out samples, into scatter.csv.
    Scatter {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        model: PathBuf,
        /// Sample file with configurations not used for training.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SCATTER_POINTS)]
        points: usize,
    },
    /// Slowdown against the exhaustive optimum over (N, M), into slowdown_grid.csv.
    Grid {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
        n_values: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "10,50,100,200")]
        m_values: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// Best of N random configurations (default 50000), into baseline.json.
    Baseline {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Cross-runner slowdown of each runner's optimum, into transfer.csv.
    Transfer {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "cpu-like,gpu-a,gpu-b")]
        surrogates: Vec<String>,
    },
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    /// JSON run manifest; flags override its fields.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Built-in space name or space JSON file.
    #[arg(long)]
    space: Option<String>,
    /// Bundled surrogate (cpu-like, gpu-a, gpu-b) or surrogate JSON file.
    #[arg(long)]
    surrogate: Option<String>,
    /// Benchmark command template with {param} placeholders.
    #[arg(long)]
    command: Option<String>,
    /// Exit code with which the command reports an invalid configuration.
    #[arg(long)]
    invalid_exit_code: Option<i32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    repetitions: Option<u32>,
    /// Output directory; nothing is written elsewhere.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for training and prediction.
    #[arg(long)]
    jobs: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunManifest> {
        let flags = RunManifest {
            space: self.space.clone(),
            surrogate: self.surrogate.clone(),
            command: self.command.clone(),
            invalid_exit_code: self.invalid_exit_code,
            n: self.n,
            m: self.m,
            k: self.k,
            seed: self.seed,
            epochs: self.epochs,
            lr: self.lr,
            repetitions: self.repetitions,
            out: self.out.clone(),
            jobs: self.jobs,
        };
        let base = match &self.manifest {
            Some(path) => RunManifest::load(path)?,
            None => RunManifest::default(),
        };
        let manifest = base.overridden_by(flags);
        if let Some(jobs) = manifest.jobs {
            // Only the first call can size the global pool; later calls in the
            // same process keep it.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
        }
        Ok(manifest)
    }
}

/// Resolved manifest plus the output directory, created on demand.
struct Run {
    manifest: RunManifest,
    space: ParamSpace,
    out: PathBuf,
}

impl Run {
    fn new(args: &RunArgs) -> Result<Self> {
        let manifest = args.resolve()?;
        let space = manifest.space()?;
        let out = manifest.out_dir()?.to_path_buf();
        fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        // The echo leaves out settings that cannot change results.
        let echo = RunManifest { out: None, jobs: None, ..manifest.clone() };
        write_json(&out.join("manifest.json"), &echo)?;
        Ok(Self { manifest, space, out })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn runner(&self) -> Result<Box<dyn Runner>> {
        self.manifest.runner(&self.space)
    }

    fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            k_bag: self.manifest.k(),
            train: self.manifest.train_config(),
            repetitions: self.manifest.repetitions(),
            ..EvalOptions::default()
        }
    }
}

#[derive(Serialize)]
struct BestFile<'a> {
    config_index: u64,
    config: &'a Configuration,
    time_seconds: f64,
}

fn best_file<'a>(space: &ParamSpace, config: &'a Configuration, time: f64) -> Result<BestFile<'a>> {
    Ok(BestFile { config_index: space.index_of_config(config)?, config, time_seconds: time })
}

fn describe_rule(rule: &ValidityRule) -> String {
    let coef = |i: usize| rule.coefficients.as_ref().map_or(1, |c| c[i]);
    let term = |i: usize, op: &str| match coef(i) {
        1 => op.to_string(),
        c => format!("{c}*{op}"),
    };
    let terms: Vec<String> = rule.operands.iter().enumerate().map(|(i, op)| term(i, op)).collect();
    match rule.kind {
        RuleKind::MaxProduct => format!("{} <= {}", terms.join(" * "), rule.bound),
        RuleKind::MaxWeightedSum => format!("{} <= {}", terms.join(" + "), rule.bound),
        RuleKind::ForbiddenCombination => {
            let eqs: Vec<String> = rule.operands.iter().enumerate().map(|(i, op)| format!("{op}={}", coef(i))).collect();
            format!("not ({})", eqs.join(", "))
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors go to standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Space(SpaceCmd::Info { space }) => {
            let space = load_space(&space)?;
            println!("space {}", space.name());
            for p in space.params() {
                let values: Vec<String> = p.values.iter().map(i64::to_string).collect();
                println!("  {:<18} {}", p.name, values.join(","));
            }
            for r in space.rules() {
                println!("  rule {}", describe_rule(r));
            }
            println!("cardinality {}", space.cardinality());
            Ok(())
        }
        Cmd::Space(SpaceCmd::Index { index, space }) => {
            let space = load_space(&space)?;
            let config = space.config_at_index(index)?;
            println!("{}", space.describe(&config));
            Ok(())
        }
        Cmd::Measure { run, resume } => cmd_measure(&Run::new(&run)?, resume),
        Cmd::Train { run, samples } => {
            let run = Run::new(&run)?;
            let set = read_samples(&samples, &run.space)?;
            let ensemble = train_ensemble(&set, &run.space, run.manifest.k(), &run.manifest.train_config())?;
            save_model(&run.path("model.json"), &ensemble)?;
            println!("trained {} networks on {} valid samples", ensemble.k(), set.valid_count());
            Ok(())
        }
        Cmd::Predict { run, model, index } => {
            let run = Run::new(&run)?;
            let ensemble = load_model(&model)?;
            if ensemble.space_name() != run.space.name() || !ensemble.encoder().matches(&run.space) {
                return Err(Error::Usage(format!(
                    "model `{}` was trained for space `{}`, not `{}`",
                    model.display(),
                    ensemble.space_name(),
                    run.space.name()
                )));
            }
            let csv = match index {
                Some(i) => tables::predictions_csv(&run.space, &ensemble, [i])?,
                None => {
                    let space = &run.space;
                    let valid = (0..space.cardinality())
                        .filter(|&i| space.config_at_index(i).is_ok_and(|c| space.is_statically_valid(&c)));
                    tables::predictions_csv(space, &ensemble, valid)?
                }
            };
            write_text(&run.path("predictions.csv"), &csv)
        }
        Cmd::Tune { run } => {
            let run = Run::new(&run)?;
            let mut runner = run.runner()?;
            match autotune(&run.space, &mut runner, &run.manifest.tuner_config()) {
                Ok(report) => {
                    write_json(&run.path("report.json"), &report)?;
                    let (config, time) = (report.best_config.as_ref().unwrap(), report.best_time.unwrap());
                    println!(
                        "best {} at {time:e} s after {} measurements",
                        run.space.describe(config),
                        report.measurements_total
                    );
                    Ok(())
                }
                Err(annotune_core::Error::AllCandidatesInvalid(report)) => {
                    write_json(&run.path("report.json"), &*report)?;
                    Err(annotune_core::Error::AllCandidatesInvalid(report).into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Oracle { run } => {
            let run = Run::new(&run)?;
            let mut runner = run.runner()?;
            let sweep = exhaustive_sweep(&run.space, &mut runner)?;
            write_samples(&run.path("oracle.csv"), &run.space, &sweep)?;
            let (config, time) = sweep.best().ok_or(annotune_core::Error::NoValidConfiguration)?;
            write_json(&run.path("best.json"), &best_file(&run.space, config, time)?)?;
            println!("optimum {} at {time:e} s", run.space.describe(config));
            Ok(())
        }
        Cmd::Eval(cmd) => cmd_eval(cmd),
    }
}

fn cmd_measure(run: &Run, resume: bool) -> Result<()> {
    let path = run.path("samples.csv");
    let mut runner = run.runner()?;
    let n = run.manifest.n.ok_or_else(|| Error::Usage("measure needs --n".into()))?;
    let indices = run.space.sample_indices(n as u64, run.manifest.seed())?;
    let (mut writer, done) = if resume && path.exists() {
        truncate_partial_row(&path)?;
        let existing = read_samples(&path, &run.space)?;
        if existing.runner_id != runner.id() {
            return Err(Error::Usage(format!(
                "{} was measured with runner `{}`, not `{}`",
                path.display(),
                existing.runner_id,
                runner.id()
            )));
        }
        let done: HashSet<u64> =
            existing.samples.iter().map(|s| run.space.index_of_config(&s.config)).collect::<annotune_core::Result<_>>()?;
        (SampleWriter::append(&path)?, done)
    } else {
        (SampleWriter::create(&path, &run.space, runner.id())?, HashSet::new())
    };
    let mut measured = 0;
    for i in indices.into_iter().filter(|i| !done.contains(i)) {
        let config = run.space.config_at_index(i)?;
        let sample = measure_checked(&mut runner, &run.space, &config, run.manifest.repetitions())?;
        writer.push(&run.space, &sample)?;
        measured += 1;
    }
    println!("measured {measured} configurations ({} already present)", done.len());
    Ok(())
}

fn cmd_eval(cmd: EvalCmd) -> Result<()> {
    match cmd {
        EvalCmd::Curve { run, sizes, repeats, holdout_size } => {
            let run = Run::new(&run)?;
            let mut runner = run.runner()?;
            let opts = EvalOptions { holdout_size, ..run.eval_options() };
            let points = learning_curve(&run.space, &mut runner, &sizes, repeats, run.manifest.seed(), &opts)?;
            write_text(&run.path("learning_curve.csv"), &tables::learning_curve_csv(&points))?;
            for p in &points {
                match p.mre {
                    Some(mre) => println!("n={} mre={mre:.4} ({} failed)", p.n_train, p.n_failed()),
                    None => println!("n={} all repeats failed", p.n_train),
                }
            }
            Ok(())
        }
        EvalCmd::Scatter { run, model, samples, points } => {
            let run = Run::new(&run)?;
            let ensemble = load_model(&model)?;
            let holdout = read_samples(&samples, &run.space)?;
            let rows = scatter_export(&ensemble, &holdout, points, run.manifest.seed())?;
            write_text(&run.path("scatter.csv"), &tables::scatter_csv(&rows))
        }
        EvalCmd::Grid { run, n_values, m_values, repeats } => {
            let run = Run::new(&run)?;
            let mut runner = run.runner()?;
            let grid = slowdown_grid(
                &run.space,
                &mut runner,
                &n_values,
                &m_values,
                repeats,
                run.manifest.seed(),
                &run.eval_options(),
            )?;
            write_text(&run.path("slowdown_grid.csv"), &tables::slowdown_grid_csv(&grid))
        }
        EvalCmd::Baseline { run } => {
            let run = Run::new(&run)?;
            let mut runner = run.runner()?;
            let n = run.manifest.n.unwrap_or(50_000) as u64;
            let (config, time) =
                random_baseline(&run.space, &mut runner, n, run.manifest.seed(), run.manifest.repetitions())?;
            write_json(&run.path("baseline.json"), &best_file(&run.space, &config, time)?)?;
            println!("best of {n} random: {} at {time:e} s", run.space.describe(&config));
            Ok(())
        }
        EvalCmd::Transfer { run, surrogates } => {
            let run = Run::new(&run)?;
            let mut runners =
                surrogates.iter().map(|s| load_surrogate(s, &run.space)).collect::<Result<Vec<_>>>()?;
            let report = transfer_report(&run.space, &mut runners)?;
            write_text(&run.path("transfer.csv"), &tables::transfer_csv(&report))
        }
    }
}
