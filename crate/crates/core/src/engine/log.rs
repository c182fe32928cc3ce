//! The per-session `.txt` timing log.
//!
//! ```text
//! pvm: 2023-03-01
//! aanivihje: tone500
//! Pallo 1: 24.38s
//! Pallo 2: 2.72s
//! kokonaisaika: 27.10s
//! ```
//!
//! `aanivihje` is `ei` when no cue played. Times carry two decimals; lines
//! end with `\n`.

use std::fmt::Write as _;

use chrono::NaiveDate;

use super::TrialRecord;
use crate::error::{Error, Result};

pub const NO_CUE: &str = "ei";

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub date: NaiveDate,
    pub cue_sound_id: Option<String>,
    pub times: Vec<f64>,
    pub total: f64,
}

pub fn export_session_log(records: &[TrialRecord], total: f64) -> Result<String> {
    let first = records
        .first()
        .ok_or_else(|| Error::Insufficient("cannot export an empty session log".into()))?;
    let cue = records
        .iter()
        .find_map(|r| r.cue_sound_id.as_deref().filter(|_| r.audio_cue_used));
    Ok(render(
        first.date,
        cue,
        records.iter().map(|r| r.completion),
        total,
    ))
}

/// Export with the total taken as the sum of completion times.
pub fn export_records(records: &[TrialRecord]) -> Result<String> {
    export_session_log(records, records.iter().map(|r| r.completion).sum())
}

fn render(date: NaiveDate, cue: Option<&str>, times: impl Iterator<Item = f64>, total: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pvm: {}", date.format("%Y-%m-%d"));
    let _ = writeln!(out, "aanivihje: {}", cue.unwrap_or(NO_CUE));
    for (i, t) in times.enumerate() {
        let _ = writeln!(out, "Pallo {}: {:.2}s", i + 1, t);
    }
    let _ = writeln!(out, "kokonaisaika: {total:.2}s");
    out
}

impl SessionLog {
    pub fn render(&self) -> String {
        render(self.date, self.cue_sound_id.as_deref(), self.times.iter().copied(), self.total)
    }
}

fn field<'a>(line: &'a str, key: &str, n: usize) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(": "))
        .ok_or_else(|| Error::Parse {
            line: n,
            message: format!("expected `{key}: ...`, got `{line}`"),
        })
}

fn seconds(value: &str, n: usize) -> Result<f64> {
    let bad = || Error::Parse {
        line: n,
        message: format!("bad time `{value}`"),
    };
    let v: f64 = value.strip_suffix('s').ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

pub fn parse_session_log(text: &str) -> Result<SessionLog> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() < 4 {
        return Err(Error::Parse {
            line: lines.len() + 1,
            message: "log needs a date, cue, at least one trial and a total".into(),
        });
    }
    let date_str = field(lines[0], "pvm", 1)?;
    let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|e| Error::Parse {
        line: 1,
        message: format!("bad date `{date_str}`: {e}"),
    })?;
    let cue = field(lines[1], "aanivihje", 2)?;
    let cue_sound_id = (cue != NO_CUE).then(|| cue.to_string());

    let last = lines.len() - 1;
    let mut times = Vec::with_capacity(last - 2);
    for (i, line) in lines[2..last].iter().enumerate() {
        let n = i + 3;
        let expected = format!("Pallo {}", i + 1);
        times.push(seconds(field(line, &expected, n)?, n)?);
    }
    let total = seconds(field(lines[last], "kokonaisaika", last + 1)?, last + 1)?;
    let sum: f64 = times.iter().sum();
    if (sum - total).abs() > 0.01 * times.len() as f64 + 1e-9 {
        return Err(Error::Parse {
            line: last + 1,
            message: format!("total {total:.2} does not match trial sum {sum:.2}"),
        });
    }
    Ok(SessionLog {
        date,
        cue_sound_id,
        times,
        total,
    })
}
