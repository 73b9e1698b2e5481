//! Runner that times a configuration by running a shell command.
//!
//! The template names parameters in braces, e.g.
//! `./bench --wg {wg_x}x{wg_y} --local {local}`. The command prints the
//! execution time in seconds as the last non-empty line of its standard
//! output. A designated exit code marks the configuration invalid; any other
//! non-zero exit is a runner failure.

use std::process::Command;
use std::time::{SystemTime, UNIX_EPOCH};

use annotune_core::{Configuration, Error, InvalidReason, Outcome, ParamSpace, Result, Runner, Sample};

pub const DEFAULT_INVALID_EXIT_CODE: i32 = 42;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Param(usize),
}

#[derive(Debug, Clone)]
pub struct ExternalRunner {
    id: String,
    pieces: Vec<Piece>,
    invalid_exit_code: i32,
}

impl ExternalRunner {
    /// Fails if the template has an unbalanced brace or names something that
    /// is not a parameter of `space`. `{{` and `}}` stand for literal braces.
    pub fn new(template: &str, space: &ParamSpace, invalid_exit_code: i32) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut text = String::new();
        let mut chars = template.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '{' if chars.peek() == Some(&'{') => {
                    chars.next();
                    text.push('{');
                }
                '}' if chars.peek() == Some(&'}') => {
                    chars.next();
                    text.push('}');
                }
                '{' => {
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some('}') => break,
                            Some(c) => name.push(c),
                            None => return Err(Error::InvalidArgument("unclosed `{` in command template".into())),
                        }
                    }
                    let index = space.param_index(&name).ok_or_else(|| {
                        Error::InvalidArgument(format!("command template names unknown parameter `{{{name}}}`"))
                    })?;
                    if !text.is_empty() {
                        pieces.push(Piece::Text(std::mem::take(&mut text)));
                    }
                    pieces.push(Piece::Param(index));
                }
                '}' => return Err(Error::InvalidArgument("unmatched `}` in command template".into())),
                c => text.push(c),
            }
        }
        if !text.is_empty() {
            pieces.push(Piece::Text(text));
        }
        Ok(Self { id: format!("command:{template}"), pieces, invalid_exit_code })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// The shell command for `config`.
    pub fn command_line(&self, config: &Configuration) -> String {
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Text(t) => t.clone(),
                Piece::Param(i) => config.values()[*i].to_string(),
            })
            .collect()
    }

    fn run_once(&self, line: &str) -> Result<Option<f64>> {
        let out = Command::new("sh")
            .arg("-c")
            .arg(line)
            .output()
            .map_err(|e| Error::Runner(format!("cannot start `{line}`: {e}")))?;
        match out.status.code() {
            Some(0) => {}
            Some(code) if code == self.invalid_exit_code => return Ok(None),
            status => {
                let stderr = String::from_utf8_lossy(&out.stderr);
                return Err(Error::Runner(format!(
                    "`{line}` failed ({}): {}",
                    status.map_or_else(|| "killed by signal".to_string(), |c| format!("exit code {c}")),
                    stderr.trim()
                )));
            }
        }
        let stdout = String::from_utf8_lossy(&out.stdout);
        let last = stdout.lines().map(str::trim).rfind(|l| !l.is_empty()).unwrap_or("");
        let time: f64 =
            last.parse().map_err(|_| Error::Runner(format!("`{line}` printed `{last}`, expected a time in seconds")))?;
        Outcome::valid(time).map_err(|e| Error::Runner(format!("`{line}`: {e}")))?;
        Ok(Some(time))
    }
}

impl Runner for ExternalRunner {
    fn id(&self) -> &str {
        &self.id
    }

    /// Runs the command up to `repetitions` times and keeps the fastest. The
    /// first invalid exit ends the measurement.
    fn measure(&mut self, config: &Configuration, repetitions: u32) -> Result<Sample> {
        if self.pieces.iter().any(|p| matches!(p, Piece::Param(i) if *i >= config.values().len())) {
            return Err(Error::Mismatch(format!("configuration {config} is too short for the command template")));
        }
        let line = self.command_line(config);
        let mut best = f64::INFINITY;
        let mut sample = None;
        for _ in 0..repetitions {
            match self.run_once(&line)? {
                Some(t) => best = best.min(t),
                None => {
                    sample = Some(Sample::new(config.clone(), Outcome::Invalid { reason: InvalidReason::LaunchFailure }, 1));
                    break;
                }
            }
        }
        let mut sample = sample.unwrap_or_else(|| Sample::new(config.clone(), Outcome::Valid { time: best }, repetitions));
        sample.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
        Ok(sample)
    }
}
