//! Sample CSV files.
//!
//! ```text
//! # space: convolution
//! # runner: surrogate:gpu-a
//! config_index,wg_x,...,status,time_seconds,repetitions
//! 71999,16,8,2,2,1,1,1,1,1,valid,1.1263155200000000e-3,1
//! ```
//!
//! Times carry 17 significant digits, so they read back bit-exactly.
//! `time_seconds` is empty for invalid rows.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use annotune_core::{Configuration, InvalidReason, Outcome, ParamSpace, Sample, SampleSet};

use crate::{Error, Result};

/// Column names, in order, for sample files of `space`.
pub fn header(space: &ParamSpace) -> Vec<String> {
    let mut cols = vec!["config_index".to_string()];
    cols.extend(space.params().iter().map(|p| p.name.clone()));
    cols.extend(["status", "time_seconds", "repetitions"].map(String::from));
    cols
}

fn preamble(space: &ParamSpace, runner_id: &str) -> String {
    format!("# space: {}\n# runner: {}\n{}\n", space.name(), runner_id, header(space).join(","))
}

/// One CSV row, newline included.
pub fn format_row(space: &ParamSpace, sample: &Sample) -> Result<String> {
    let index = space.index_of_config(&sample.config)?;
    let mut row = index.to_string();
    for v in sample.config.values() {
        write!(row, ",{v}").unwrap();
    }
    match sample.outcome {
        Outcome::Valid { time } => write!(row, ",valid,{time:.16e}").unwrap(),
        Outcome::Invalid { reason } => write!(row, ",{},", reason.status()).unwrap(),
    }
    writeln!(row, ",{}", sample.repetitions).unwrap();
    Ok(row)
}

pub fn write_samples(path: &Path, space: &ParamSpace, set: &SampleSet) -> Result<()> {
    if set.space_name != space.name() {
        return Err(Error::Usage(format!("sample set is for space `{}`, not `{}`", set.space_name, space.name())));
    }
    let mut text = preamble(space, &set.runner_id);
    for s in &set.samples {
        text.push_str(&format_row(space, s)?);
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Appends samples one row at a time, flushing after each so an interrupted
/// run leaves a readable file.
#[derive(Debug)]
pub struct SampleWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl SampleWriter {
    /// Creates (or truncates) `path` and writes the header.
    pub fn create(path: &Path, space: &ParamSpace, runner_id: &str) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = Self { path: path.to_path_buf(), out: BufWriter::new(file) };
        w.write_str(&preamble(space, runner_id))?;
        Ok(w)
    }

    /// Opens an existing file for appending rows.
    pub fn append(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn push(&mut self, space: &ParamSpace, sample: &Sample) -> Result<()> {
        let row = format_row(space, sample)?;
        self.write_str(&row)
    }

    fn write_str(&mut self, s: &str) -> Result<()> {
        self.out.write_all(s.as_bytes()).and_then(|_| self.out.flush()).map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads a sample file written for `space`. Every row is validated against
/// the space; errors name the offending line.
pub fn read_samples(path: &Path, space: &ParamSpace) -> Result<SampleSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&text, path, space)
}

pub fn parse_samples(text: &str, path: &Path, space: &ParamSpace) -> Result<SampleSet> {
    let mut set = SampleSet::new(space.name(), "");
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.strip_prefix('#') else { continue };
        let line_no = i as u64 + 1;
        if let Some((key, value)) = comment.split_once(':') {
            match key.trim() {
                "space" if value.trim() != space.name() => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("file is for space `{}`, not `{}`", value.trim(), space.name()),
                    ))
                }
                "runner" => set.runner_id = value.trim().to_string(),
                _ => {}
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let expected = header(space);
    let headers = reader.headers().map_err(|e| csv_error(path, &e))?.clone();
    let header_line = text.lines().position(|l| !l.starts_with('#')).map_or(1, |i| i as u64 + 1);
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::parse(path, header_line, format!("expected header `{}`", expected.join(","))));
    }
    let k = space.len();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::parse(path, line, message);
        let index: u64 = record[0].parse().map_err(|_| bad(format!("bad config_index `{}`", &record[0])))?;
        let values = (1..=k)
            .map(|c| record[c].parse::<i64>().map_err(|_| bad(format!("bad value `{}` for `{}`", &record[c], expected[c]))))
            .collect::<Result<Vec<_>>>()?;
        let config = Configuration::new(values);
        let actual = space.index_of_config(&config).map_err(|e| bad(e.to_string()))?;
        if actual != index {
            return Err(bad(format!("config_index {index} does not match the configuration (index {actual})")));
        }
        let time = &record[k + 2];
        let outcome = match &record[k + 1] {
            "valid" => {
                let t: f64 = time.parse().map_err(|_| bad(format!("bad time `{time}`")))?;
                Outcome::valid(t).map_err(|e| bad(e.to_string()))?
            }
            status => {
                let reason = match status {
                    "invalid-static" => InvalidReason::StaticRule,
                    "invalid-launch" => InvalidReason::LaunchFailure,
                    "invalid-compile" => InvalidReason::CompileFailure,
                    other => return Err(bad(format!("unknown status `{other}`"))),
                };
                if !time.is_empty() {
                    return Err(bad(format!("invalid row has a time `{time}`")));
                }
                Outcome::Invalid { reason }
            }
        };
        let repetitions = record[k + 3].parse().map_err(|_| bad(format!("bad repetitions `{}`", &record[k + 3])))?;
        set.samples.push(Sample::new(config, outcome, repetitions));
    }
    Ok(set)
}

fn csv_error(path: &Path, e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::parse(path, line, e.to_string())
}

/// Drops a trailing partial row left by an interrupted write, so appending
/// can resume cleanly.
pub fn truncate_partial_row(path: &Path) -> Result<()> {
    let text = fs::read(path).map_err(|e| Error::io(path, e))?;
    if text.is_empty() || text.ends_with(b"\n") {
        return Ok(());
    }
    let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let file = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
    file.set_len(keep as u64).map_err(|e| Error::io(path, e))
}
