use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trim::trim_worst;
use crate::error::{Error, Result};

/// Completion times for one session, in trial order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTimes {
    pub session_index: u32,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_index: u32,
    pub mean: f64,
    /// Standard error of the mean, `sd / sqrt(n_kept)`.
    pub se: f64,
    pub sd: f64,
    pub n_kept: usize,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Group `(session, time)` rows into sessions ordered by index.
pub fn group_sessions(rows: impl IntoIterator<Item = (u32, f64)>) -> Vec<SessionTimes> {
    let mut map: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (s, t) in rows {
        map.entry(s).or_default().push(t);
    }
    map.into_iter()
        .map(|(session_index, times)| SessionTimes { session_index, times })
        .collect()
}

/// Trim each session, then report mean and standard error. Every index in
/// `1..=expected_sessions` must be present.
pub fn session_summary(
    sessions: &[SessionTimes],
    expected_sessions: u32,
    trim_k: usize,
) -> Result<Vec<SessionSummary>> {
    let missing: Vec<u32> = (1..=expected_sessions)
        .filter(|i| !sessions.iter().any(|s| s.session_index == *i))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingSessions(missing));
    }
    let mut sorted: Vec<&SessionTimes> = sessions.iter().collect();
    sorted.sort_by_key(|s| s.session_index);
    sorted
        .into_iter()
        .map(|s| {
            let kept = trim_worst(&s.times, trim_k).map_err(|_| {
                Error::Insufficient(format!(
                    "session {} has {} trials, need more than {trim_k}",
                    s.session_index,
                    s.times.len()
                ))
            })?;
            let (mean, sd) = mean_sd(&kept);
            Ok(SessionSummary {
                session_index: s.session_index,
                mean,
                se: sd / (kept.len() as f64).sqrt(),
                sd,
                n_kept: kept.len(),
            })
        })
        .collect()
}

/// Pooled within-session standard deviation over the given summaries.
pub fn pooled_sd(summaries: &[SessionSummary]) -> f64 {
    let (num, den) = summaries.iter().fold((0.0, 0.0), |(num, den), s| {
        let df = s.n_kept.saturating_sub(1) as f64;
        (num + df * s.sd * s.sd, den + df)
    });
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}
