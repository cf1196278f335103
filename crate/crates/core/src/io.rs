//! Line-oriented text formats for instances and schedules.
//!
//! ```text
//! MOLD 1
//! m 4
//! n 2
//! table 4 2.5 2 1.5   # one time per machine count
//! powerlaw 16 1       # t(k) = a * k^-beta
//! ```
//!
//! Schedules use `SCHED 1`, `n <int>` and one `<job> <machines> <start>`
//! line per job. `#` starts a comment in both formats.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Instance, ModelError, ProcessingTimeModel, Schedule, ScheduledJob};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of input: {0}")]
    Truncated(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments removed, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = body.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 1, words))
    })
}

fn expect_header<'a>(
    lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    magic: &'static str,
) -> Result<(), ParseError> {
    let (line, words) = lines.next().ok_or(ParseError::Truncated("header"))?;
    if words != [magic, "1"] {
        return Err(syntax(line, format!("expected `{magic} 1`")));
    }
    Ok(())
}

fn keyed<'a, T: std::str::FromStr>(
    lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    key: &'static str,
) -> Result<T, ParseError> {
    let (line, words) = lines.next().ok_or(ParseError::Truncated(key))?;
    match words.as_slice() {
        [k, v] if *k == key => v
            .parse()
            .map_err(|_| syntax(line, format!("`{key}` needs an integer, got `{v}`"))),
        _ => Err(syntax(line, format!("expected `{key} <int>`"))),
    }
}

fn real(line: usize, word: &str) -> Result<f64, ParseError> {
    let v: f64 = word
        .parse()
        .map_err(|_| syntax(line, format!("`{word}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(syntax(line, format!("`{word}` is not finite")))
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, "MOLD")?;
    let m: u64 = keyed(&mut lines, "m")?;
    let n: usize = keyed(&mut lines, "n")?;
    let mut jobs = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let (line, words) = lines.next().ok_or(ParseError::Truncated("job line"))?;
        let job = match words[0] {
            "table" => ProcessingTimeModel::Table(
                words[1..]
                    .iter()
                    .map(|w| real(line, w))
                    .collect::<Result<_, _>>()?,
            ),
            "powerlaw" => {
                if words.len() != 3 {
                    return Err(syntax(line, "expected `powerlaw <a> <beta>`"));
                }
                ProcessingTimeModel::PowerLaw {
                    a: real(line, words[1])?,
                    beta: real(line, words[2])?,
                }
            }
            other => return Err(syntax(line, format!("unknown job kind `{other}`"))),
        };
        jobs.push(job);
    }
    if let Some((line, _)) = lines.next() {
        return Err(syntax(line, "trailing content after the last job"));
    }
    Ok(Instance::new(m, jobs)?)
}

pub fn write_instance(instance: &Instance) -> String {
    let mut out = format!("MOLD 1\nm {}\nn {}\n", instance.m(), instance.n());
    for job in instance.jobs() {
        match job {
            ProcessingTimeModel::Table(times) => {
                out.push_str("table");
                for t in times {
                    let _ = write!(out, " {t}");
                }
                out.push('\n');
            }
            ProcessingTimeModel::PowerLaw { a, beta } => {
                let _ = writeln!(out, "powerlaw {a} {beta}");
            }
        }
    }
    out
}

pub fn parse_schedule(text: &str) -> Result<Schedule, ParseError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, "SCHED")?;
    let n: usize = keyed(&mut lines, "n")?;
    let mut entries = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let (line, words) = lines.next().ok_or(ParseError::Truncated("schedule line"))?;
        let [job, machines, start] = words.as_slice() else {
            return Err(syntax(line, "expected `<job> <machines> <start>`"));
        };
        entries.push(ScheduledJob {
            job: job
                .parse()
                .map_err(|_| syntax(line, format!("bad job id `{job}`")))?,
            machines: machines
                .parse()
                .map_err(|_| syntax(line, format!("bad machine count `{machines}`")))?,
            start: real(line, start)?,
        });
    }
    if let Some((line, _)) = lines.next() {
        return Err(syntax(line, "trailing content after the last entry"));
    }
    Ok(Schedule::new(entries))
}

pub fn write_schedule(schedule: &Schedule) -> String {
    let mut out = format!("SCHED 1\nn {}\n", schedule.len());
    let mut entries = schedule.entries.clone();
    entries.sort_by_key(|e| e.job);
    for e in entries {
        let _ = writeln!(out, "{} {} {}", e.job, e.machines, e.start);
    }
    out
}
