use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kinematics::{ball_height, check_grasp, check_proximity_pause, gaze_on_center};
use super::{SessionConfig, SpawnDirection, TrialCountMode};
use crate::cue::{schedule_cue, CueTimeline};
use crate::error::{Error, Result};
use crate::geometry::{fixed_grid_locations, sample_spawn_location, Point3, RoomBounds, TargetLocation};

/// Slack for comparing tick times against scheduled thresholds.
const TIME_EPS: f64 = 1e-9;
const COUNTDOWN_START: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Idle,
    GazeAcquisition,
    Countdown,
    AudioCue,
    IsiWait,
    BallActive,
    Grasped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvatarPose {
    pub head_azimuth: f64,
    pub head_elevation: f64,
    pub hand: Point3,
}

impl AvatarPose {
    pub fn is_finite(&self) -> bool {
        self.head_azimuth.is_finite() && self.head_elevation.is_finite() && self.hand.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u32,
    pub date: NaiveDate,
    pub spawn: TargetLocation,
    pub audio_cue_used: bool,
    pub cue_sound_id: Option<String>,
    /// Cue onset, when a cue played. Kept so completion can be re-anchored.
    pub audio_onset: Option<f64>,
    pub visual_onset: f64,
    pub grasp_time: f64,
    pub completion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialState {
    pub phase: Phase,
    pub phase_entered_at: f64,
    pub countdown_value: u8,
    pub target: Option<TargetLocation>,
    pub timeline: Option<CueTimeline>,
}

impl TrialState {
    fn idle(now: f64) -> Self {
        Self {
            phase: Phase::Idle,
            phase_entered_at: now,
            countdown_value: 0,
            target: None,
            timeline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EngineEvent {
    PhaseChanged { phase: Phase, at: f64 },
    Countdown { value: u8, at: f64 },
    AudioCueStarted { timeline: CueTimeline, azimuth: f64, at: f64 },
    BallSpawned { target: TargetLocation, at: f64 },
    BallPaused { at: f64 },
    BallResumed { at: f64 },
    TrialCompleted { record: TrialRecord },
    SessionFinished { at: f64 },
}

/// Read-only view handed to pose sources each tick.
#[derive(Debug, Clone, Copy)]
pub struct EngineView<'a> {
    pub state: &'a TrialState,
    pub config: &'a SessionConfig,
    pub trial_index: u32,
    pub ball_center: Option<Point3>,
    pub now: f64,
}

/// Supplies the avatar pose for each engine tick.
pub trait PoseSource {
    fn pose(&mut self, view: &EngineView<'_>) -> AvatarPose;
}

/// Single-writer trial state machine for one session.
#[derive(Debug, Clone)]
pub struct Engine {
    config: SessionConfig,
    date: NaiveDate,
    rng: ChaCha8Rng,
    room: RoomBounds,
    state: TrialState,
    trial_index: u32,
    completed: u32,
    last_now: f64,
    ticks: u64,
    gaze_since: Option<f64>,
    upcoming: Option<TargetLocation>,
    active_since: f64,
    paused_accum: f64,
    pause_started: Option<f64>,
    records: Vec<TrialRecord>,
}

impl Engine {
    pub fn new(config: SessionConfig, date: NaiveDate, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            date,
            rng: ChaCha8Rng::seed_from_u64(seed),
            room: RoomBounds::default(),
            state: TrialState::idle(0.0),
            trial_index: 0,
            completed: 0,
            last_now: 0.0,
            ticks: 0,
            gaze_since: None,
            upcoming: None,
            active_since: 0.0,
            paused_accum: 0.0,
            pause_started: None,
            records: Vec::new(),
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn state(&self) -> &TrialState {
        &self.state
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn now(&self) -> f64 {
        self.last_now
    }

    pub fn trial_index(&self) -> u32 {
        self.trial_index
    }

    /// True once every trial has been grasped and the engine returned to idle.
    pub fn is_finished(&self) -> bool {
        self.completed >= self.config.total_trials() && self.state.phase == Phase::Idle
    }

    /// Leave `Idle` and wait for the patient to look at the central point.
    pub fn start(&mut self) -> Vec<EngineEvent> {
        if self.state.phase != Phase::Idle || self.completed >= self.config.total_trials() {
            return Vec::new();
        }
        let mut events = Vec::new();
        self.begin_trial(self.last_now, &mut events);
        events
    }

    /// Current ball centre, accounting for bounce and pause. `None` unless a ball is out.
    pub fn ball_center(&self, now: f64) -> Option<Point3> {
        if self.state.phase != Phase::BallActive {
            return None;
        }
        let target = self.state.target?;
        let effective_now = self.pause_started.unwrap_or(now);
        let h = ball_height(
            effective_now - self.active_since,
            &self.config,
            self.paused_accum,
        );
        Some(self.room.clamp(target.position + Point3::new(0.0, h, 0.0)))
    }

    /// Advance the machine to `now` given the current pose. Several
    /// transitions may fire in one call if their thresholds have passed.
    pub fn advance(&mut self, pose: &AvatarPose, now: f64) -> Result<Vec<EngineEvent>> {
        if now < self.last_now || !now.is_finite() {
            return Err(Error::TimeRegression {
                now,
                last: self.last_now,
            });
        }
        if !pose.is_finite() {
            return Err(Error::Domain("non-finite avatar pose".into()));
        }
        self.last_now = now;
        let mut events = Vec::new();
        // Each pass either transitions or breaks; phases are finite so this terminates.
        loop {
            let before = self.state.phase;
            self.step_phase(pose, now, &mut events)?;
            if self.state.phase == before {
                break;
            }
            if matches!(self.state.phase, Phase::Grasped | Phase::Idle | Phase::BallActive) {
                // these need a fresh pose/tick before moving on
                break;
            }
        }
        Ok(events)
    }

    /// One fixed-size tick, pulling the pose from `source`.
    pub fn tick<P: PoseSource + ?Sized>(&mut self, source: &mut P) -> Result<Vec<EngineEvent>> {
        self.ticks += 1;
        let now = (self.ticks as f64 * self.config.tick).max(self.last_now);
        let view = EngineView {
            state: &self.state,
            config: &self.config,
            trial_index: self.trial_index,
            ball_center: self.ball_center(now),
            now,
        };
        let pose = source.pose(&view);
        self.advance(&pose, now)
    }

    /// Tick until the current trial is grasped, giving up after `timeout`
    /// seconds of session time.
    pub fn run_trial<P: PoseSource + ?Sized>(
        &mut self,
        source: &mut P,
        timeout: f64,
        mut on_event: impl FnMut(&EngineEvent),
    ) -> Result<Option<TrialRecord>> {
        let start = self.last_now;
        if self.state.phase == Phase::Idle {
            for e in self.start() {
                on_event(&e);
            }
        }
        while self.last_now - start < timeout {
            if self.state.phase == Phase::Idle {
                return Ok(None);
            }
            for e in self.tick(source)? {
                on_event(&e);
                if let EngineEvent::TrialCompleted { record } = e {
                    return Ok(Some(record));
                }
            }
        }
        Ok(None)
    }

    fn enter(&mut self, phase: Phase, at: f64, events: &mut Vec<EngineEvent>) {
        self.state.phase = phase;
        self.state.phase_entered_at = at;
        events.push(EngineEvent::PhaseChanged { phase, at });
    }

    fn begin_trial(&mut self, at: f64, events: &mut Vec<EngineEvent>) {
        self.trial_index = self.completed + 1;
        self.state.target = None;
        self.state.timeline = None;
        self.state.countdown_value = 0;
        self.gaze_since = None;
        self.upcoming = None;
        self.enter(Phase::GazeAcquisition, at, events);
    }

    fn next_target(&mut self) -> Result<TargetLocation> {
        let fov = self.config.spawn_fov();
        match self.config.spawn_direction {
            SpawnDirection::FixedGrid => {
                let grid = fixed_grid_locations(&fov)?;
                let i = (self.trial_index - 1) as usize;
                let slot = match self.config.trial_count_mode {
                    TrialCountMode::PerSession => i % grid.len(),
                    TrialCountMode::PerLocation => (i / self.config.num_trials as usize).min(grid.len() - 1),
                };
                Ok(grid[slot])
            }
            SpawnDirection::LeftBand | SpawnDirection::Custom { .. } => {
                sample_spawn_location(&mut self.rng, &fov)
            }
        }
    }

    fn spawn(&mut self, now: f64, events: &mut Vec<EngineEvent>) {
        let target = self.upcoming.take().expect("target chosen at countdown end");
        self.state.target = Some(target);
        self.active_since = now;
        self.paused_accum = 0.0;
        self.pause_started = None;
        self.enter(Phase::BallActive, now, events);
        events.push(EngineEvent::BallSpawned { target, at: now });
    }

    fn step_phase(&mut self, pose: &AvatarPose, now: f64, events: &mut Vec<EngineEvent>) -> Result<()> {
        match self.state.phase {
            Phase::Idle => {}
            Phase::GazeAcquisition => {
                if gaze_on_center(pose, &self.config) {
                    let since = *self.gaze_since.get_or_insert(now);
                    if now - since + TIME_EPS >= self.config.gaze_dwell {
                        self.enter(Phase::Countdown, now, events);
                        self.state.countdown_value = COUNTDOWN_START;
                        events.push(EngineEvent::Countdown {
                            value: COUNTDOWN_START,
                            at: now,
                        });
                    }
                } else {
                    self.gaze_since = None;
                }
            }
            Phase::Countdown => {
                let step = self.config.countdown_step;
                let entered = self.state.phase_entered_at;
                let end = entered + step * (COUNTDOWN_START as f64 + 1.0);
                let elapsed_steps = if step > 0.0 {
                    ((now - entered + TIME_EPS) / step).floor() as i64
                } else {
                    i64::MAX
                };
                let value = (COUNTDOWN_START as i64 - elapsed_steps).max(0) as u8;
                if value < self.state.countdown_value {
                    for v in (value..self.state.countdown_value).rev() {
                        events.push(EngineEvent::Countdown { value: v, at: now });
                    }
                    self.state.countdown_value = value;
                }
                if now + TIME_EPS >= end {
                    let target = self.next_target()?;
                    self.upcoming = Some(target);
                    if self.config.audio_cues_enabled {
                        let timeline = schedule_cue(end, &self.config.cue_spec(), self.config.isi)?;
                        self.state.timeline = Some(timeline);
                        self.enter(Phase::AudioCue, end, events);
                        events.push(EngineEvent::AudioCueStarted {
                            timeline,
                            azimuth: target.azimuth,
                            at: now,
                        });
                    } else {
                        self.spawn(now, events);
                    }
                }
            }
            Phase::AudioCue => {
                let timeline = self.state.timeline.expect("timeline set with cue");
                if now + TIME_EPS >= timeline.audio_offset {
                    self.enter(Phase::IsiWait, timeline.audio_offset, events);
                }
            }
            Phase::IsiWait => {
                let timeline = self.state.timeline.expect("timeline set with cue");
                if now + TIME_EPS >= timeline.visual_onset {
                    self.spawn(now, events);
                }
            }
            Phase::BallActive => {
                if now <= self.active_since {
                    return Ok(());
                }
                let center = self.ball_center(now).expect("ball active");
                if check_grasp(pose.hand, center, self.config.ball_diameter) {
                    self.grasp(now, events);
                    return Ok(());
                }
                let near = check_proximity_pause(pose.hand, center, &self.config);
                match (near, self.pause_started) {
                    (true, None) => {
                        self.pause_started = Some(now);
                        events.push(EngineEvent::BallPaused { at: now });
                    }
                    (false, Some(started)) => {
                        self.paused_accum += now - started;
                        self.pause_started = None;
                        events.push(EngineEvent::BallResumed { at: now });
                    }
                    _ => {}
                }
            }
            Phase::Grasped => {
                if self.completed < self.config.total_trials() {
                    self.begin_trial(now, events);
                } else {
                    self.state = TrialState::idle(now);
                    events.push(EngineEvent::PhaseChanged {
                        phase: Phase::Idle,
                        at: now,
                    });
                    events.push(EngineEvent::SessionFinished { at: now });
                }
            }
        }
        Ok(())
    }

    fn grasp(&mut self, now: f64, events: &mut Vec<EngineEvent>) {
        let target = self.state.target.expect("ball active");
        let timeline = self.state.timeline;
        let record = TrialRecord {
            trial_index: self.trial_index,
            date: self.date,
            spawn: target,
            audio_cue_used: timeline.is_some(),
            cue_sound_id: timeline.map(|_| self.config.cue_sound_id.clone()),
            audio_onset: timeline.map(|t| t.audio_onset),
            visual_onset: self.active_since,
            grasp_time: now,
            completion: now - self.active_since,
        };
        self.completed += 1;
        self.records.push(record.clone());
        self.enter(Phase::Grasped, now, events);
        events.push(EngineEvent::TrialCompleted { record });
    }
}

/// Replays a recorded pose trace, holding each sample until the next one.
#[derive(Debug, Clone)]
pub struct ScriptedPoses {
    samples: Vec<(f64, AvatarPose)>,
    cursor: usize,
}

impl ScriptedPoses {
    pub fn new(mut samples: Vec<(f64, AvatarPose)>) -> Self {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { samples, cursor: 0 }
    }

    /// Parse `t,head_azimuth,head_elevation,hand_x,hand_y,hand_z` lines.
    /// Blank lines, `#` comments and a header line starting with `t` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if vals.len() != 6 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 6 fields, got {}", vals.len()),
                });
            }
            samples.push((
                vals[0],
                AvatarPose {
                    head_azimuth: vals[1],
                    head_elevation: vals[2],
                    hand: Point3::new(vals[3], vals[4], vals[5]),
                },
            ));
        }
        Ok(Self::new(samples))
    }

    pub fn at(&mut self, t: f64) -> AvatarPose {
        while self.cursor + 1 < self.samples.len() && self.samples[self.cursor + 1].0 <= t + TIME_EPS {
            self.cursor += 1;
        }
        self.samples
            .get(self.cursor)
            .map(|s| s.1)
            .unwrap_or(AvatarPose {
                head_azimuth: 0.0,
                head_elevation: 0.0,
                hand: Point3::ORIGIN,
            })
    }
}

impl PoseSource for ScriptedPoses {
    fn pose(&mut self, view: &EngineView<'_>) -> AvatarPose {
        self.at(view.now)
    }
}
