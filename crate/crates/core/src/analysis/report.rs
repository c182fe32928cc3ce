use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fit::{fit_all_models, ModelComparison};
use super::loess::loess_at;
use super::summary::{session_summary, SessionSummary, SessionTimes};
use super::trim::trim_worst;
use super::{DEFAULT_ALPHA, DEFAULT_SPAN, DEFAULT_TRIM};
use crate::error::Result;

/// Unit the curve models are fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FitLevel {
    /// One point per session: the (trimmed) session mean.
    #[default]
    SessionMeans,
    /// One point per trial, x = session index.
    Trials,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub alpha: f64,
    pub trim_k: usize,
    pub span: f64,
    pub fit_level: FitLevel,
    /// Trim before fitting and smoothing, not only for the summaries.
    pub trim_before_fit: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            trim_k: DEFAULT_TRIM,
            span: DEFAULT_SPAN,
            fit_level: FitLevel::SessionMeans,
            trim_before_fit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub summaries: Vec<SessionSummary>,
    pub comparison: ModelComparison,
    /// Loess curve evaluated at each session index.
    pub loess: Vec<(f64, f64)>,
}

/// Summaries, five-model comparison and loess trend for a program of sessions
/// numbered `1..=sessions.len()`.
pub fn analyze_sessions(sessions: &[SessionTimes], opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let expected = sessions.iter().map(|s| s.session_index).max().unwrap_or(0);
    let summaries = session_summary(sessions, expected, opts.trim_k)?;

    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut untrimmed_means = Vec::new();
    let mut ordered: Vec<&SessionTimes> = sessions.iter().collect();
    ordered.sort_by_key(|s| s.session_index);
    for s in &ordered {
        let x = s.session_index as f64;
        let kept = if opts.trim_before_fit {
            trim_worst(&s.times, opts.trim_k)?
        } else {
            s.times.clone()
        };
        untrimmed_means.push(s.times.iter().sum::<f64>() / s.times.len() as f64);
        points.extend(kept.into_iter().map(|t| (x, t)));
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = match opts.fit_level {
        FitLevel::SessionMeans => {
            let xs = summaries.iter().map(|s| s.session_index as f64).collect();
            let ys = if opts.trim_before_fit {
                summaries.iter().map(|s| s.mean).collect()
            } else {
                untrimmed_means
            };
            (xs, ys)
        }
        FitLevel::Trials => points.iter().copied().unzip(),
    };
    let comparison = fit_all_models(&xs, &ys, opts.alpha);

    let (px, py): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    let grid: Vec<f64> = summaries.iter().map(|s| s.session_index as f64).collect();
    let smooth = loess_at(&px, &py, opts.span, &grid)?;
    let loess = grid.into_iter().zip(smooth).collect();

    Ok(AnalysisReport {
        summaries,
        comparison,
        loess,
    })
}

impl AnalysisReport {
    /// `model,b0,b1,b2,r_squared,f_stat,p_value,n,k,significant`; skipped
    /// models appear with empty numeric fields.
    pub fn fits_csv(&self) -> String {
        let mut out = String::from("model,b0,b1,b2,r_squared,f_stat,p_value,n,k,significant\n");
        for f in &self.comparison.fits {
            let b = |i: usize| f.coefficients.get(i).map(|v| format!("{v:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6},{},{},{}",
                f.model,
                b(0),
                b(1),
                b(2),
                f.r_squared,
                f.f_stat,
                f.p_value,
                f.n,
                f.k,
                f.p_value < self.comparison.alpha
            );
        }
        for (m, _) in &self.comparison.skipped {
            let _ = writeln!(out, "{m},,,,,,,,,skipped");
        }
        out
    }

    pub fn sessions_csv(&self) -> String {
        let mut out = String::from("session,mean,se,sd,n_kept\n");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{}",
                s.session_index, s.mean, s.se, s.sd, s.n_kept
            );
        }
        out
    }

    pub fn loess_csv(&self) -> String {
        let mut out = String::from("x,loess\n");
        for (x, y) in &self.loess {
            let _ = writeln!(out, "{x},{y:.6}");
        }
        out
    }

    /// Human-readable fit table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:<8} {:>10} {:>8}  coefficients", "model", "R²", "F", "p");
        for f in &self.comparison.fits {
            let coeffs: Vec<String> = f.coefficients.iter().map(|c| format!("{c:.4}")).collect();
            // exact fits give astronomically large F
            let f_text = if f.f_stat < 1e6 { format!("{:.3}", f.f_stat) } else { format!("{:.3e}", f.f_stat) };
            let _ = writeln!(
                out,
                "{:<12} R²={:.3} {:>10} {:>8.4}  [{}]",
                f.model.name(),
                f.r_squared,
                f_text,
                f.p_value,
                coeffs.join(", ")
            );
        }
        for (m, why) in &self.comparison.skipped {
            let _ = writeln!(out, "{:<12} skipped: {why}", m.name());
        }
        match self.comparison.best_significant {
            Some(m) => {
                let _ = writeln!(out, "best significant (p < {}): {m}", self.comparison.alpha);
            }
            None => {
                let _ = writeln!(out, "no model significant at p < {}", self.comparison.alpha);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::CurveModel;

    fn inverse_program() -> Vec<SessionTimes> {
        (1..=12)
            .map(|s| SessionTimes {
                session_index: s,
                times: vec![2.0 + 3.0 / s as f64; 15],
            })
            .collect()
    }

    #[test]
    fn noiseless_inverse_report() {
        let report = analyze_sessions(&inverse_program(), &AnalysisOptions::default()).unwrap();
        assert_eq!(report.summaries.len(), 12);
        assert!(report.summaries.iter().all(|s| s.n_kept == 13));
        assert_eq!(report.comparison.best_significant, Some(CurveModel::Inverse));
        assert!(report.render_text().contains("INVERSE      R²=1.000"));
        assert!(report.fits_csv().lines().any(|l| l.starts_with("INVERSE,2.000000,3.000000,,1.000000")));
        assert_eq!(report.loess.len(), 12);
    }

    #[test]
    fn trial_level_option() {
        let opts = AnalysisOptions {
            fit_level: FitLevel::Trials,
            ..Default::default()
        };
        let report = analyze_sessions(&inverse_program(), &opts).unwrap();
        assert_eq!(report.comparison.get(CurveModel::Linear).unwrap().n, 156);
    }
}
