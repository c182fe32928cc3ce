use serde::{Deserialize, Serialize};

use crate::cue::{CueSpec, DEFAULT_ISI};
use crate::error::{Error, Result};
use crate::geometry::FovConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpawnDirection {
    /// Continuous uniform over the configured left band.
    #[default]
    LeftBand,
    /// Cycle through the four fixed appearance points.
    FixedGrid,
    /// Continuous uniform over a custom azimuth band.
    Custom { min: f64, max: f64 },
}

/// How `num_trials` is read when targets come from the fixed grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrialCountMode {
    #[default]
    PerSession,
    PerLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    #[default]
    Simulated,
    Manual,
}

/// Everything the therapist's menu controls, plus engine timing knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub num_trials: u32,
    pub trial_count_mode: TrialCountMode,
    pub ball_diameter: f64,
    pub bounce_period: f64,
    pub bounce_height: f64,
    pub spawn_direction: SpawnDirection,
    pub audio_cues_enabled: bool,
    pub volume_music: f64,
    pub volume_cue: f64,
    pub cue_duration: f64,
    pub isi: f64,
    pub cue_sound_id: String,
    pub countdown_step: f64,
    pub gaze_dwell: f64,
    pub gaze_tolerance: f64,
    /// Elevation of the painting used as the central gaze point.
    pub gaze_center_elevation: f64,
    pub hand_proximity_pause: f64,
    pub tick: f64,
    pub mode: Mode,
    pub fov: FovConfig,
    /// Menu field only; has no effect.
    pub bluetooth: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            num_trials: 15,
            trial_count_mode: TrialCountMode::PerSession,
            ball_diameter: 0.12,
            bounce_period: 1.19,
            bounce_height: 0.4,
            spawn_direction: SpawnDirection::LeftBand,
            audio_cues_enabled: true,
            volume_music: 0.5,
            volume_cue: 1.0,
            cue_duration: 2.61,
            isi: DEFAULT_ISI,
            cue_sound_id: "tone500".to_string(),
            countdown_step: 1.0,
            gaze_dwell: 0.5,
            gaze_tolerance: 5.0,
            gaze_center_elevation: 10.0,
            hand_proximity_pause: 0.15,
            tick: 0.02,
            mode: Mode::Simulated,
            fov: FovConfig::default(),
            bluetooth: false,
        }
    }
}

fn check(ok: bool, field: &str, msg: impl std::fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{field}: {msg}")))
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.num_trials >= 1, "num_trials", "must be >= 1")?;
        check(
            (0.001..=60.0).contains(&self.bounce_period),
            "bounce_period",
            format_args!("{} outside [0.001, 60]", self.bounce_period),
        )?;
        check(
            self.ball_diameter > 0.0 && self.ball_diameter.is_finite(),
            "ball_diameter",
            "must be > 0",
        )?;
        check(
            self.bounce_height >= 0.0 && self.bounce_height.is_finite(),
            "bounce_height",
            "must be >= 0",
        )?;
        check((0.0..=1.0).contains(&self.volume_music), "volume_music", "outside [0, 1]")?;
        check((0.0..=1.0).contains(&self.volume_cue), "volume_cue", "outside [0, 1]")?;
        check(self.cue_duration > 0.0 && self.cue_duration.is_finite(), "cue_duration", "must be > 0")?;
        check(self.isi >= 0.0 && self.isi.is_finite(), "isi", "must be >= 0")?;
        check(!self.cue_sound_id.trim().is_empty(), "cue_sound_id", "must not be empty")?;
        check(
            self.countdown_step >= 0.0 && self.countdown_step.is_finite(),
            "countdown_step",
            "must be >= 0",
        )?;
        check(self.gaze_dwell >= 0.0 && self.gaze_dwell.is_finite(), "gaze_dwell", "must be >= 0")?;
        check(self.gaze_tolerance > 0.0, "gaze_tolerance", "must be > 0")?;
        check(self.gaze_center_elevation.is_finite(), "gaze_center_elevation", "must be finite")?;
        check(
            self.hand_proximity_pause >= 0.0 && self.hand_proximity_pause.is_finite(),
            "hand_proximity_pause",
            "must be >= 0",
        )?;
        check(self.tick > 0.0 && self.tick.is_finite(), "tick", "must be > 0")?;
        self.fov.validate()?;
        if let SpawnDirection::Custom { .. } = self.spawn_direction {
            self.spawn_fov().validate()?;
        }
        Ok(())
    }

    /// Number of trials the session runs before going idle.
    pub fn total_trials(&self) -> u32 {
        match (self.spawn_direction, self.trial_count_mode) {
            (SpawnDirection::FixedGrid, TrialCountMode::PerLocation) => self.num_trials * 4,
            _ => self.num_trials,
        }
    }

    /// The FOV whose band targets are sampled from.
    pub fn spawn_fov(&self) -> FovConfig {
        match self.spawn_direction {
            SpawnDirection::Custom { min, max } => FovConfig {
                spawn_azimuth_min: min,
                spawn_azimuth_max: max,
                ..self.fov
            },
            _ => self.fov,
        }
    }

    pub fn cue_spec(&self) -> CueSpec {
        CueSpec {
            duration: self.cue_duration,
            volume: self.volume_cue,
            ..CueSpec::default()
        }
    }
}
