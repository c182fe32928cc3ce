//! Completion-time analysis: trimming, curve estimation with F-test
//! significance, loess smoothing and per-session summaries.

mod fit;
mod loess;
mod report;
mod stats;
mod summary;
mod trim;

pub use fit::{fit_all_models, fit_curve, CurveFitResult, CurveModel, ModelComparison};
pub use loess::{loess_at, loess_smooth};
pub use report::{analyze_sessions, AnalysisOptions, AnalysisReport, FitLevel};
pub use stats::{f_upper_tail_p, p_from_r_squared};
pub use summary::{group_sessions, pooled_sd, session_summary, SessionSummary, SessionTimes};
pub use trim::trim_worst;

/// Significance level used throughout.
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_TRIM: usize = 2;
pub const DEFAULT_SPAN: f64 = 0.75;
