use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{plan_trial, PatientModelParams, TrialContext, TrialPlan};
use crate::analysis::{group_sessions, SessionTimes};
use crate::engine::{AvatarPose, Engine, EngineView, Phase, PoseSource, SessionConfig, TrialRecord};
use crate::error::{Error, Result};

/// Longest a single simulated trial may run before the session is abandoned.
const TRIAL_TIMEOUT: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledSession {
    pub index: u32,
    pub date: NaiveDate,
    pub audio: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramSchedule {
    /// Date of the familiarization session, if any; sets session 1's gap.
    #[serde(default)]
    pub preparatory_date: Option<NaiveDate>,
    pub trials_per_session: u32,
    pub sessions: Vec<ScheduledSession>,
}

impl ProgramSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_session == 0 {
            return Err(Error::Config("trials_per_session: must be >= 1".into()));
        }
        if self.sessions.is_empty() {
            return Err(Error::Config("schedule has no sessions".into()));
        }
        for (i, s) in self.sessions.iter().enumerate() {
            if s.index != i as u32 + 1 {
                return Err(Error::Config(format!(
                    "sessions[{i}].index: expected {}, got {}",
                    i + 1,
                    s.index
                )));
            }
        }
        if self.sessions.windows(2).any(|w| w[1].date <= w[0].date) {
            return Err(Error::Config("session dates must be strictly increasing".into()));
        }
        if let Some(p) = self.preparatory_date {
            if p > self.sessions[0].date {
                return Err(Error::Config("preparatory_date is after session 1".into()));
            }
        }
        Ok(())
    }

    pub fn gap_days(&self, position: usize) -> f64 {
        let date = self.sessions[position].date;
        let prev = if position == 0 {
            self.preparatory_date
        } else {
            Some(self.sessions[position - 1].date)
        };
        prev.map(|p| (date - p).num_days() as f64).unwrap_or(0.0)
    }

    pub fn first_audio_session(&self) -> Option<u32> {
        self.sessions.iter().find(|s| s.audio).map(|s| s.index)
    }

    /// Days from the first to the last session.
    pub fn span_days(&self) -> i64 {
        match (self.sessions.first(), self.sessions.last()) {
            (Some(a), Some(b)) => (b.date - a.date).num_days(),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub session: u32,
    pub trial: u32,
    pub date: NaiveDate,
    pub azimuth: f64,
    pub elevation: f64,
    pub audio: bool,
    pub completion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub rows: Vec<DatasetRow>,
    /// Engine records per session, in session order.
    pub sessions: Vec<(u32, Vec<TrialRecord>)>,
}

impl SimulatedDataset {
    pub fn session_times(&self) -> Vec<SessionTimes> {
        rows_to_sessions(&self.rows)
    }

    pub fn to_csv(&self) -> Result<String> {
        rows_to_csv(&self.rows)
    }
}

pub fn rows_to_sessions(rows: &[DatasetRow]) -> Vec<SessionTimes> {
    group_sessions(rows.iter().map(|r| (r.session, r.completion)))
}

/// `session,trial,date,azimuth,elevation,audio,completion`, one row per trial.
pub fn rows_to_csv(rows: &[DatasetRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["session", "trial", "date", "azimuth", "elevation", "audio", "completion"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.session.to_string(),
            r.trial.to_string(),
            r.date.format("%Y-%m-%d").to_string(),
            format!("{:.6}", r.azimuth),
            format!("{:.6}", r.elevation),
            r.audio.to_string(),
            format!("{:.6}", r.completion),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<DatasetRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// SplitMix64 step, used to derive independent stream seeds.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Drives the engine as a patient would: looks at the painting to start a
/// trial, waits out its detection latency once the ball appears, then
/// reaches so that the hand enters the grasp zone when the planned
/// movement time has elapsed.
#[derive(Debug, Clone)]
pub struct SimulatedPatient {
    params: PatientModelParams,
    ctx: TrialContext,
    rng: ChaCha8Rng,
    plan: Option<(f64, TrialPlan)>,
    plans: Vec<TrialPlan>,
}

impl SimulatedPatient {
    pub fn new(params: PatientModelParams, ctx: TrialContext, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            ctx,
            rng: ChaCha8Rng::seed_from_u64(seed),
            plan: None,
            plans: Vec::new(),
        })
    }

    /// Plans drawn so far, one per ball.
    pub fn plans(&self) -> &[TrialPlan] {
        &self.plans
    }

    fn resting(&self, view: &EngineView<'_>) -> AvatarPose {
        AvatarPose {
            head_azimuth: 0.0,
            head_elevation: view.config.gaze_center_elevation,
            hand: self.params.hand_rest,
        }
    }
}

impl PoseSource for SimulatedPatient {
    fn pose(&mut self, view: &EngineView<'_>) -> AvatarPose {
        let (Some(center), Some(target)) = (view.ball_center, view.state.target) else {
            self.plan = None;
            return self.resting(view);
        };
        if view.state.phase != Phase::BallActive {
            return self.resting(view);
        }
        if self.plan.is_none() {
            let mut ctx = self.ctx;
            ctx.ball_diameter = view.config.ball_diameter;
            let plan = plan_trial(&self.params, &target, &ctx, &mut self.rng)
                .expect("validated ball diameter");
            self.plans.push(plan);
            self.plan = Some((view.state.phase_entered_at, plan));
        }
        let (spawned, plan) = self.plan.expect("set above");
        let t = view.now - spawned;

        let rest = self.params.hand_rest;
        let seen = t >= plan.detection;
        let head = if seen {
            (target.azimuth, target.elevation)
        } else {
            (0.0, view.config.gaze_center_elevation)
        };
        let progress = if t < plan.onset() {
            0.0
        } else if plan.movement > 0.0 {
            ((t - plan.onset()) / plan.movement).min(1.0)
        } else {
            1.0
        };
        let hand = if progress >= 1.0 {
            center
        } else {
            // stay just outside the grasp zone until the movement completes
            let outer = view.config.ball_diameter / 2.0 * (1.0 + 1e-6) + 1e-9;
            let offset = rest - center;
            let d0 = offset.norm();
            if d0 <= outer {
                rest
            } else {
                let d = outer + (d0 - outer) * (1.0 - progress);
                center + offset * (d / d0)
            }
        };
        AvatarPose {
            head_azimuth: head.0,
            head_elevation: head.1,
            hand,
        }
    }
}

/// Run every scheduled session through the engine with a simulated patient.
pub fn simulate_program(
    params: &PatientModelParams,
    schedule: &ProgramSchedule,
    config: &SessionConfig,
    seed: u64,
) -> Result<SimulatedDataset> {
    params.validate()?;
    schedule.validate()?;
    let first_audio = schedule.first_audio_session();
    let mut rows = Vec::new();
    let mut sessions = Vec::new();
    for (pos, s) in schedule.sessions.iter().enumerate() {
        let session_config = SessionConfig {
            num_trials: schedule.trials_per_session,
            trial_count_mode: crate::engine::TrialCountMode::PerSession,
            audio_cues_enabled: s.audio,
            ..config.clone()
        };
        let ctx = TrialContext {
            session_index: s.index,
            audio_on: s.audio,
            first_audio_session: s.audio && first_audio == Some(s.index),
            gap_days: schedule.gap_days(pos),
            ball_diameter: session_config.ball_diameter,
        };
        let mut engine = Engine::new(session_config, s.date, mix_seed(seed, 2 * s.index as u64))?;
        let mut patient = SimulatedPatient::new(*params, ctx, mix_seed(seed, 2 * s.index as u64 + 1))?;
        while !engine.is_finished() {
            if engine.run_trial(&mut patient, TRIAL_TIMEOUT, |_| {})?.is_none() && !engine.is_finished() {
                return Err(Error::Insufficient(format!(
                    "session {} trial {} did not finish",
                    s.index,
                    engine.trial_index()
                )));
            }
        }
        let records = engine.records().to_vec();
        rows.extend(records.iter().map(|r| DatasetRow {
            session: s.index,
            trial: r.trial_index,
            date: r.date,
            azimuth: r.spawn.azimuth,
            elevation: r.spawn.elevation,
            audio: r.audio_cue_used,
            completion: r.completion,
        }));
        sessions.push((s.index, records));
    }
    Ok(SimulatedDataset { rows, sessions })
}
