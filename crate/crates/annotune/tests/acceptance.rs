//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Set `ACCEPTANCE_ONLY=3,4` to run a subset.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use annotune::model_file::{load_model, save_model};
use annotune::samples::{read_samples, write_samples};
use annotune_core::eval::{learning_curve, slowdown_grid, transfer_report, EvalOptions};
use annotune_core::measure::measure_checked;
use annotune_core::model::{gradient, train_ensemble, Network};
use annotune_core::seed::rng;
use annotune_core::tuner::exhaustive_sweep;
use annotune_core::{
    autotune, builtin_space, exhaustive_search, ParamSpace, SampleSet, Surrogate, SurrogateProfile, SurrogateSpec,
    SurrogateTerm, TrainConfig, TunerConfig,
};
use rand::Rng;

const PROFILES: [SurrogateProfile; 3] = [SurrogateProfile::CpuLike, SurrogateProfile::GpuA, SurrogateProfile::GpuB];

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, detail: String) -> Check {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Subspace of a built-in space keeping only the named parameters.
fn reduced(space: &str, keep: &[&str]) -> ParamSpace {
    let full = builtin_space(space).unwrap();
    let params = full.params().iter().filter(|p| keep.contains(&p.name.as_str())).cloned().collect();
    let rules = full.rules().iter().filter(|r| r.operands.iter().all(|o| keep.contains(&o.as_str()))).cloned().collect();
    ParamSpace::new(space, params, rules).unwrap()
}

fn cardinalities() -> Check {
    let got: Vec<u64> =
        ["convolution", "raycasting", "stereo"].iter().map(|n| builtin_space(n).unwrap().cardinality()).collect();
    let expected: Vec<u64> = ["convolution", "raycasting", "stereo"]
        .iter()
        .map(|n| builtin_space(n).unwrap().params().iter().map(|p| p.values.len() as u64).product())
        .collect();
    ensure(got == [131072, 655360, 2359296] && got == expected, format!("{got:?}"))
}

fn index_bijection() -> Check {
    let small = [
        reduced("convolution", &["wg_x", "wg_y", "ppt_x", "ppt_y"]),
        reduced("convolution", &["wg_x", "wg_y", "ppt_x"]),
        reduced("raycasting", &["image_data", "image_tf", "local_tf", "constant_tf", "interleaved", "unroll"]),
        reduced(
            "stereo",
            &["image_left", "image_right", "local_left", "local_right", "unroll_disparity", "unroll_diff_x", "unroll_diff_y"],
        ),
    ];
    let mut checked = 0u64;
    let mut failures = 0u64;
    for space in &small {
        assert!(space.cardinality() <= 4096);
        for i in 0..space.cardinality() {
            let c = space.config_at_index(i).unwrap();
            failures += u64::from(space.index_of_config(&c).ok() != Some(i));
            checked += 1;
        }
    }
    let stereo = builtin_space("stereo").unwrap();
    let mut r = rng(2);
    for _ in 0..100_000 {
        let i = r.random_range(0..stereo.cardinality());
        let c = stereo.config_at_index(i).unwrap();
        failures += u64::from(stereo.index_of_config(&c).ok() != Some(i));
        checked += 1;
    }
    ensure(failures == 0, format!("{checked} indices, {failures} failures"))
}

fn gradient_check() -> Check {
    let h = 1e-5;
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let dim = r.random_range(1..6);
        let mut net = Network::random(dim, 1.0, &mut r);
        let x: Vec<f64> = (0..dim).map(|_| r.random::<f64>()).collect();
        let target: f64 = r.random_range(-2.0..2.0);
        let analytic = gradient(&net, &x, target).unwrap().flatten();
        let loss = |n: &Network| 0.5 * (n.forward(&x).unwrap() - target).powi(2);
        for (p, &a) in analytic.iter().enumerate() {
            let original = param(&net, p);
            set_param(&mut net, p, original + h);
            let plus = loss(&net);
            set_param(&mut net, p, original - h);
            let minus = loss(&net);
            set_param(&mut net, p, original);
            let numeric = (plus - minus) / (2.0 * h);
            let scale = a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((a - numeric).abs() / scale);
        }
    }
    ensure(worst <= 1e-4, format!("max relative discrepancy {worst:.2e}"))
}

/// Parameter `p` in the order hidden weights, hidden biases, output weights, output bias.
fn param(net: &Network, p: usize) -> f64 {
    let (a, b, c) = (net.w_hidden().len(), net.b_hidden().len(), net.w_out().len());
    match p {
        p if p < a => net.w_hidden()[p],
        p if p < a + b => net.b_hidden()[p - a],
        p if p < a + b + c => net.w_out()[p - a - b],
        _ => net.b_out(),
    }
}

fn set_param(net: &mut Network, p: usize, v: f64) {
    let (a, b, c) = (net.w_hidden().len(), net.b_hidden().len(), net.w_out().len());
    match p {
        p if p < a => net.w_hidden_mut()[p] = v,
        p if p < a + b => net.b_hidden_mut()[p - a] = v,
        p if p < a + b + c => net.w_out_mut()[p - a - b] = v,
        _ => net.set_b_out(v),
    }
}

fn log_trick() -> Check {
    let mut r = rng(4);
    let mut violations = 0;
    let mut premises = 0;
    for _ in 0..10_000 {
        let a = 10f64.powf(r.random_range(-6.0..3.0));
        let b = a * r.random_range(0.2..5.0);
        let eps: f64 = r.random_range(0.0..2.0);
        if (a.ln() - b.ln()).abs() <= eps {
            premises += 1;
            if (a / b).max(b / a) > eps.exp() * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    ensure(violations == 0 && premises > 1000, format!("{premises} pairs met the premise, {violations} violations"))
}

fn degenerate_tuning() -> Check {
    let space = reduced("convolution", &["wg_x", "wg_y", "ppt_x"]);
    let card = space.cardinality();
    if card > 512 {
        return Err(format!("space has {card} configurations"));
    }
    // Noise-free landscape with random single and pair factors, so ties are
    // vanishingly unlikely (and checked below).
    let mut r = rng(5);
    let mut spec = SurrogateSpec::constant(1e-3);
    for p in space.params() {
        for &v in &p.values {
            spec.terms.push(SurrogateTerm::single(&p.name, v, r.random_range(0.5..2.0)));
        }
    }
    for &x in &space.params()[0].values {
        for &y in &space.params()[1].values {
            spec.terms.push(SurrogateTerm::pair(["wg_x", "wg_y"], [x, y], r.random_range(0.5..2.0)));
        }
    }
    let mut sur = Surrogate::new(spec, &space).unwrap();
    let sweep = exhaustive_sweep(&space, &mut sur).unwrap();
    let (best, best_time) = exhaustive_search(&space, &mut sur).unwrap();
    let ties = sweep.valid().filter(|&(_, t)| t == best_time).count();
    if ties != 1 {
        return Err(format!("optimum is not unique ({ties} ties)"));
    }
    let mut matched = 0;
    for seed in 0..5 {
        let cfg = TunerConfig { n_train: card as usize, m_candidates: card as usize, seed, ..TunerConfig::default() };
        let report = autotune(&space, &mut sur, &cfg).unwrap();
        matched += usize::from(report.best_config.as_ref() == Some(&best) && report.best_time == Some(best_time));
    }
    ensure(matched == 5, format!("{matched}/5 seeds returned {} ({card} configurations)", space.describe(&best)))
}

fn tuning_quality() -> Check {
    let space = builtin_space("convolution").unwrap();
    let mut sur = SurrogateProfile::GpuA.surrogate(&space).unwrap();
    let (_, optimum) = sur.true_optimum().unwrap();
    let mut within = 0;
    let mut ratios = Vec::new();
    let mut max_measurements = 0;
    for seed in 0..10 {
        let report = autotune(&space, &mut sur, &TunerConfig { seed, ..TunerConfig::default() }).unwrap();
        let ratio = report.best_time.unwrap() / optimum;
        within += usize::from(ratio <= 1.10);
        ratios.push(format!("{ratio:.3}"));
        max_measurements = max_measurements.max(report.measurements_total);
    }
    ensure(
        within >= 9 && max_measurements <= 2200,
        format!(
            "{within}/10 within 10% of the noise-free optimum, at most {max_measurements} measurements; ratios [{}]",
            ratios.join(", ")
        ),
    )
}

fn budget_monotonicity() -> Check {
    let space = builtin_space("convolution").unwrap();
    let opts = EvalOptions::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for profile in PROFILES {
        let mut sur = profile.surrogate(&space).unwrap();
        let small = slowdown_grid(&space, &mut sur, &[500], &[100], 10, 7, &opts).unwrap();
        let large = slowdown_grid(&space, &mut sur, &[2000], &[200], 10, 7, &opts).unwrap();
        let (s, l) = (small.cells[0].mean_slowdown, large.cells[0].mean_slowdown);
        ok &= matches!((s, l), (Some(s), Some(l)) if l <= s);
        let fmt = |v: Option<f64>| v.map_or("missing".to_string(), |v| format!("{v:.4}"));
        lines.push(format!("{}: 500/100 {} vs 2000/200 {}", profile.name(), fmt(s), fmt(l)));
    }
    ensure(ok, lines.join("; "))
}

fn learning_curves() -> Check {
    let space = builtin_space("convolution").unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for profile in PROFILES {
        let mut sur = profile.surrogate(&space).unwrap();
        let points = learning_curve(&space, &mut sur, &[250, 2000], 5, 11, &EvalOptions::default()).unwrap();
        let (a, b) = (points[0].mre, points[1].mre);
        ok &= matches!((a, b), (Some(a), Some(b)) if b < a);
        lines.push(format!("{}: {:.4} -> {:.4}", profile.name(), a.unwrap_or(f64::NAN), b.unwrap_or(f64::NAN)));
    }
    ensure(ok, lines.join("; "))
}

fn bagging_benefit() -> Check {
    let space = builtin_space("convolution").unwrap();
    let mut sur = SurrogateProfile::GpuA.surrogate(&space).unwrap();
    let mut mre = |k_bag| {
        let opts = EvalOptions { k_bag, ..EvalOptions::default() };
        learning_curve(&space, &mut sur, &[2000], 5, 13, &opts).unwrap()[0].mre.unwrap()
    };
    let (single, bagged) = (mre(1), mre(11));
    ensure(bagged <= 1.05 * single, format!("k=11 {bagged:.4} vs k=1 {single:.4}"))
}

fn transfer() -> Check {
    let space = reduced("convolution", &["wg_x", "wg_y", "ppt_x", "ppt_y", "image", "local"]);
    let mut runners = vec![
        SurrogateProfile::CpuLike.surrogate(&space).unwrap(),
        SurrogateProfile::GpuA.surrogate(&space).unwrap(),
    ];
    let report = transfer_report(&space, &mut runners).unwrap();
    let m = &report.matrix;
    let diagonal = m[0][0] == Some(1.0) && m[1][1] == Some(1.0);
    let worst = [m[0][1], m[1][0]].into_iter().flatten().fold(0.0f64, f64::max);
    ensure(
        diagonal && worst >= 1.5,
        format!("{} configurations, off-diagonal {:?} / {:?}", space.cardinality(), m[0][1], m[1][0]),
    )
}

fn annotune(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_annotune")).args(args).output().unwrap()
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    fs::write(
        &manifest,
        r#"{"space": "convolution", "surrogate": "gpu-b", "n": 400, "m": 40, "k": 5, "seed": 21, "epochs": 150}"#,
    )
    .unwrap();
    let manifest = manifest.to_str().unwrap();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let out = out.to_str().unwrap();
        for cmd in ["measure", "tune"] {
            let o = annotune(&[cmd, "--manifest", manifest, "--out", out]);
            if !o.status.success() {
                return Err(format!("{cmd} failed: {}", String::from_utf8_lossy(&o.stderr)));
            }
        }
        let samples = format!("{out}/samples.csv");
        let o = annotune(&["train", "--manifest", manifest, "--samples", &samples, "--out", out]);
        if !o.status.success() {
            return Err(format!("train failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
    }
    let mut details = Vec::new();
    let mut same = true;
    for file in ["samples.csv", "model.json", "report.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        same &= a == b;
        details.push(format!("{file} {} bytes {}", a.len(), if a == b { "identical" } else { "DIFFERENT" }));
    }
    ensure(same, details.join(", "))
}

fn persistence() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let space = builtin_space("convolution").unwrap();
    let mut sur = SurrogateProfile::CpuLike.surrogate(&space).unwrap();
    let mut set = SampleSet::new(space.name(), "surrogate:cpu-like");
    for i in space.sample_indices(2000, 5).unwrap() {
        set.samples.push(measure_checked(&mut sur, &space, &space.config_at_index(i).unwrap(), 1).unwrap());
    }
    let csv = dir.path().join("samples.csv");
    write_samples(&csv, &space, &set).unwrap();
    let loaded = read_samples(&csv, &space).unwrap();
    let samples_equal = loaded == set
        && loaded.valid().zip(set.valid()).all(|((_, a), (_, b))| a.to_bits() == b.to_bits());

    let ensemble = train_ensemble(&loaded, &space, 11, &TrainConfig { epochs: 100, ..TrainConfig::default() }).unwrap();
    let model = dir.path().join("model.json");
    save_model(&model, &ensemble).unwrap();
    let back = load_model(&model).unwrap();
    let mut identical = 0;
    for i in space.sample_indices(100, 6).unwrap() {
        let c = space.config_at_index(i).unwrap();
        identical += usize::from(back.predict(&c).unwrap().to_bits() == ensemble.predict(&c).unwrap().to_bits());
    }
    ensure(
        samples_equal && identical == 100,
        format!("2000-sample CSV equal: {samples_equal}; {identical}/100 predictions bit-identical"),
    )
}

fn invalid_handling() -> Check {
    let dir = tempfile::tempdir().unwrap();
    // Halving time per step of ppt_x, but the largest ppt_x fails to launch:
    // the model extrapolates the trend straight into the failing region.
    let mut terms = Vec::new();
    for (i, v) in [1, 2, 4, 8, 16, 32, 64, 128].iter().enumerate() {
        terms.push(format!(r#"{{"params": ["ppt_x"], "match": [{v}], "factor": {}}}"#, 0.5f64.powi(i as i32)));
    }
    let spec = format!(
        r#"{{"base_time": 1.0, "terms": [{}], "noise_cv": 0.05, "seed": 3,
            "invalid_rules": [{{"kind": "max-product", "operands": ["ppt_x"], "bound": 64}}]}}"#,
        terms.join(", ")
    );
    let spec_path = dir.path().join("cliff.json");
    fs::write(&spec_path, spec).unwrap();
    let out = dir.path().join("out");
    let o = annotune(&[
        "tune",
        "--space",
        "convolution",
        "--surrogate",
        spec_path.to_str().unwrap(),
        "--seed",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    let code = o.status.code();
    let report: serde_json::Value = match fs::read_to_string(out.join("report.json")) {
        Ok(text) => serde_json::from_str(&text).unwrap(),
        Err(_) => serde_json::Value::Null,
    };
    let stderr = String::from_utf8_lossy(&o.stderr);
    ensure(
        code == Some(4) && report["best_config"].is_null() && report["stage2_invalid_count"] == 200,
        format!("exit code {code:?}, stage-two invalid {}, stderr `{}`", report["stage2_invalid_count"], stderr.trim()),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Check);

fn main() {
    let criteria: [Criterion; 13] = [
        (1, "cardinality exactness", Duration::from_secs(1), cardinalities),
        (2, "index bijection", Duration::from_secs(10), index_bijection),
        (3, "gradient correctness", Duration::from_secs(10), gradient_check),
        (4, "log-trick property", Duration::from_secs(1), log_trick),
        (5, "oracle equivalence, degenerate tuning", Duration::from_secs(30), degenerate_tuning),
        (6, "tuning quality on gpu-a", Duration::from_secs(600), tuning_quality),
        (7, "budget monotonicity", Duration::from_secs(1200), budget_monotonicity),
        (8, "learning-curve shape", Duration::from_secs(900), learning_curves),
        (9, "bagging benefit", Duration::from_secs(600), bagging_benefit),
        (10, "cross-device transfer", Duration::from_secs(120), transfer),
        (11, "determinism", Duration::from_secs(300), determinism),
        (12, "persistence round-trips", Duration::from_secs(60), persistence),
        (13, "invalid-configuration handling", Duration::from_secs(120), invalid_handling),
    ];
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took longer than {budget:?}")),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(status == "FAIL");
        println!("[{status}] {id:>2} {name}: {detail} ({:.1} s)", elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
