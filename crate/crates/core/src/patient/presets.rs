use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::model::PatientModelParams;
use super::program::{ProgramSchedule, ScheduledSession};
use crate::engine::SessionConfig;
use crate::error::{Error, Result};

const PATIENT_A: &str = include_str!("../../fixtures/presets/patient_a.toml");
const PATIENT_B: &str = include_str!("../../fixtures/presets/patient_b.toml");

/// Names accepted by [`Preset::by_name`].
pub const PRESET_NAMES: [&str; 2] = ["patientA", "patientB"];

/// On-disk preset layout: a calendar given as gaps between visits plus the
/// patient parameters and any session setting overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    name: String,
    start_date: NaiveDate,
    #[serde(default = "default_trials")]
    trials_per_session: u32,
    /// First session played with audio cues; omit for none.
    #[serde(default)]
    audio_from_session: Option<u32>,
    /// Days between consecutive sessions; one fewer than the session count.
    gaps_days: Vec<u32>,
    /// Days between a familiarization visit and session 1, if there was one.
    #[serde(default)]
    preparatory_gap_days: Option<u32>,
    #[serde(default)]
    params: PatientModelParams,
    #[serde(default)]
    session: SessionConfig,
}

fn default_trials() -> u32 {
    15
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub params: PatientModelParams,
    pub schedule: ProgramSchedule,
    session: SessionConfig,
}

impl Preset {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(e.to_string()))?;
        let file: PresetFile =
            serde_path_to_error::deserialize(de).map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
        let mut date = file.start_date;
        let mut sessions = Vec::with_capacity(file.gaps_days.len() + 1);
        for i in 0..=file.gaps_days.len() {
            if i > 0 {
                date += chrono::Duration::days(file.gaps_days[i - 1] as i64);
            }
            let index = i as u32 + 1;
            sessions.push(ScheduledSession {
                index,
                date,
                audio: file.audio_from_session.is_some_and(|a| index >= a),
            });
        }
        let schedule = ProgramSchedule {
            preparatory_date: file
                .preparatory_gap_days
                .map(|d| file.start_date - chrono::Duration::days(d as i64)),
            trials_per_session: file.trials_per_session,
            sessions,
        };
        file.params.validate()?;
        schedule.validate()?;
        file.session.validate()?;
        Ok(Self {
            name: file.name,
            params: file.params,
            schedule,
            session: file.session,
        })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "patientA" => Self::from_toml(PATIENT_A),
            "patientB" => Self::from_toml(PATIENT_B),
            other => Err(Error::Config(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    pub fn patient_a() -> Self {
        Self::by_name("patientA").expect("bundled preset parses")
    }

    pub fn patient_b() -> Self {
        Self::by_name("patientB").expect("bundled preset parses")
    }

    /// Session settings the program runs with. Trial count and audio flag
    /// are overridden per session by the schedule.
    pub fn session_config(&self) -> SessionConfig {
        self.session.clone()
    }

    pub fn sessions(&self) -> &[ScheduledSession] {
        &self.schedule.sessions
    }
}
