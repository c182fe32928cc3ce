use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fitts_index_of_difficulty, fitts_movement_time, FittsParams, Point3, TargetLocation};

/// Azimuth (degrees, magnitude) at which the neglect multiplier reaches `1 + neglect_gain`.
pub const NEGLECT_REFERENCE_AZIMUTH: f64 = 15.0;

/// Multipliers applied while an audio cue is in use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueEffect {
    /// Multiplier on mean detection latency.
    pub mean: f64,
    /// Multiplier on the lognormal sigma.
    pub sd: f64,
}

impl Default for CueEffect {
    fn default() -> Self {
        Self { mean: 0.9, sd: 0.7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatientModelParams {
    /// Mean detection latency in session 1 for a target straight ahead.
    pub base_detection: f64,
    /// Extra detection multiplier reached at the contralesional extreme (−15°).
    pub neglect_gain: f64,
    /// Per-session exponential decay rate of detection latency.
    pub learning_rate: f64,
    /// Floor on mean detection latency.
    pub asymptote: f64,
    /// Days over which the inter-session slowdown doubles.
    pub retention_half_life: f64,
    pub retention_cap: f64,
    pub cue_benefit: CueEffect,
    /// Applied to the mean on the first session with audio cues.
    pub cue_adaptation_penalty: f64,
    /// Lognormal sigma of detection latency.
    pub noise_sd: f64,
    pub fitts: FittsParams,
    /// Added for targets left of centre.
    pub motor_initiation_penalty: f64,
    /// Resting hand position, head-relative.
    pub hand_rest: Point3,
}

impl Default for PatientModelParams {
    fn default() -> Self {
        Self {
            base_detection: 1.5,
            neglect_gain: 2.0,
            learning_rate: 0.1,
            asymptote: 0.3,
            retention_half_life: 7.0,
            retention_cap: 2.0,
            cue_benefit: CueEffect::default(),
            cue_adaptation_penalty: 1.8,
            noise_sd: 0.5,
            fitts: FittsParams::default(),
            motor_initiation_penalty: 0.3,
            hand_rest: Point3::new(0.1, -0.35, 0.2),
        }
    }
}

impl PatientModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("base_detection", self.base_detection),
            ("retention_half_life", self.retention_half_life),
            ("cue_benefit.mean", self.cue_benefit.mean),
            ("cue_benefit.sd", self.cue_benefit.sd),
            ("cue_adaptation_penalty", self.cue_adaptation_penalty),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name}: must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("neglect_gain", self.neglect_gain),
            ("learning_rate", self.learning_rate),
            ("asymptote", self.asymptote),
            ("noise_sd", self.noise_sd),
            ("motor_initiation_penalty", self.motor_initiation_penalty),
            ("fitts.slope_b", self.fitts.slope_b),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name}: must be >= 0, got {v}")));
            }
        }
        if !(self.retention_cap >= 1.0) {
            return Err(Error::Config("retention_cap: must be >= 1".into()));
        }
        if !self.hand_rest.is_finite() || !self.fitts.intercept_a.is_finite() {
            return Err(Error::Config("hand_rest and fitts must be finite".into()));
        }
        Ok(())
    }
}

/// Everything about a trial's circumstances the latency model depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialContext {
    pub session_index: u32,
    pub audio_on: bool,
    pub first_audio_session: bool,
    /// Days since the previous session.
    pub gap_days: f64,
    pub ball_diameter: f64,
}

/// Slowdown from time away: doubles every `retention_half_life` days, capped.
pub fn retention_factor(gap_days: f64, params: &PatientModelParams) -> f64 {
    let gap = gap_days.max(0.0);
    2f64.powf(gap / params.retention_half_life).min(params.retention_cap)
}

fn cue_mean_factor(params: &PatientModelParams, ctx: &TrialContext) -> f64 {
    match (ctx.audio_on, ctx.first_audio_session) {
        (false, _) => 1.0,
        (true, true) => params.cue_adaptation_penalty,
        (true, false) => params.cue_benefit.mean,
    }
}

fn noise_sigma(params: &PatientModelParams, ctx: &TrialContext) -> f64 {
    if ctx.audio_on && !ctx.first_audio_session {
        params.noise_sd * params.cue_benefit.sd
    } else {
        params.noise_sd
    }
}

/// Mean detection latency before noise.
pub fn mean_detection_latency(params: &PatientModelParams, azimuth: f64, ctx: &TrialContext) -> f64 {
    let session = ctx.session_index.max(1) as f64;
    let learning = (-params.learning_rate * (session - 1.0)).exp();
    let neglect = 1.0 + params.neglect_gain * azimuth.min(0.0).abs() / NEGLECT_REFERENCE_AZIMUTH;
    let raw = params.base_detection
        * learning
        * neglect
        * retention_factor(ctx.gap_days, params)
        * cue_mean_factor(params, ctx);
    raw.max(params.asymptote)
}

/// Detection latency with multiplicative lognormal noise (median 1).
/// Draws exactly one normal variate from `rng`.
pub fn detection_latency<R: Rng + ?Sized>(
    params: &PatientModelParams,
    azimuth: f64,
    ctx: &TrialContext,
    rng: &mut R,
) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean_detection_latency(params, azimuth, ctx) * (noise_sigma(params, ctx) * z).exp()
}

/// Time to move the hand from rest into the ball.
pub fn reach_time(params: &PatientModelParams, target: &TargetLocation, ball_diameter: f64) -> Result<f64> {
    let distance = params.hand_rest.distance(&target.position);
    let id = fitts_index_of_difficulty(distance, ball_diameter)?;
    Ok(fitts_movement_time(id, &params.fitts))
}

/// Planned timing of one trial, split into the part spent before the hand
/// moves and the movement itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub detection: f64,
    pub initiation_penalty: f64,
    pub movement: f64,
}

impl TrialPlan {
    pub fn onset(&self) -> f64 {
        self.detection + self.initiation_penalty
    }

    pub fn total(&self) -> f64 {
        self.onset() + self.movement
    }
}

pub fn plan_trial<R: Rng + ?Sized>(
    params: &PatientModelParams,
    target: &TargetLocation,
    ctx: &TrialContext,
    rng: &mut R,
) -> Result<TrialPlan> {
    let detection = detection_latency(params, target.azimuth, ctx, rng);
    let initiation_penalty = if target.is_contralesional() {
        params.motor_initiation_penalty
    } else {
        0.0
    };
    let movement = reach_time(params, target, ctx.ball_diameter)?;
    Ok(TrialPlan {
        detection,
        initiation_penalty,
        movement,
    })
}

/// Completion time of one trial: detection, directional initiation delay
/// and Fitts movement time.
pub fn simulate_trial<R: Rng + ?Sized>(
    params: &PatientModelParams,
    target: &TargetLocation,
    ctx: &TrialContext,
    rng: &mut R,
) -> Result<f64> {
    Ok(plan_trial(params, target, ctx, rng)?.total())
}
