//! CSV tables emitted by the evaluation harnesses and by prediction sweeps.
//!
//! Floats are written in Rust's shortest round-trip form. Missing values
//! are empty fields.

use std::fmt::Write as _;

use annotune_core::eval::{AccuracyPoint, SlowdownGrid, TransferReport};
use annotune_core::{Ensemble, ParamSpace};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `n_train,repeat,mre`, one row per repeat; failed repeats have an empty `mre`.
pub fn learning_curve_csv(points: &[AccuracyPoint]) -> String {
    let mut s = String::from("n_train,repeat,mre\n");
    for p in points {
        for r in &p.repeats {
            writeln!(s, "{},{},{}", p.n_train, r.repeat, opt(r.mre.as_ref().ok().copied())).unwrap();
        }
    }
    s
}

pub fn scatter_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("predicted_seconds,actual_seconds\n");
    for (p, a) in rows {
        writeln!(s, "{p},{a}").unwrap();
    }
    s
}

pub fn slowdown_grid_csv(grid: &SlowdownGrid) -> String {
    let mut s = String::from("n_train,m_candidates,mean_slowdown,n_success,n_invalid\n");
    for c in &grid.cells {
        writeln!(s, "{},{},{},{},{}", c.n_train, c.m_candidates, opt(c.mean_slowdown), c.n_success(), c.n_invalid())
            .unwrap();
    }
    s
}

/// Square matrix; row `i`, column `j` is runner `i`'s optimum timed on runner `j`.
pub fn transfer_csv(report: &TransferReport) -> String {
    let mut s = String::from("optimum_of");
    for id in &report.runner_ids {
        write!(s, ",{id}").unwrap();
    }
    s.push('\n');
    for (id, row) in report.runner_ids.iter().zip(&report.matrix) {
        s.push_str(id);
        for v in row {
            write!(s, ",{}", opt(*v)).unwrap();
        }
        s.push('\n');
    }
    s
}

/// `config_index,<params>,predicted_seconds` for the given indices.
pub fn predictions_csv(
    space: &ParamSpace,
    ensemble: &Ensemble,
    indices: impl IntoIterator<Item = u64>,
) -> annotune_core::Result<String> {
    let mut s = String::from("config_index");
    for p in space.params() {
        write!(s, ",{}", p.name).unwrap();
    }
    s.push_str(",predicted_seconds\n");
    for i in indices {
        let config = space.config_at_index(i)?;
        write!(s, "{i}").unwrap();
        for v in config.values() {
            write!(s, ",{v}").unwrap();
        }
        writeln!(s, ",{}", ensemble.predict(&config)?).unwrap();
    }
    Ok(s)
}
