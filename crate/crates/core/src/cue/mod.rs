//! Auditory directional cue: synthesis, binaural spatialization, WAV output
//! and the audio → ISI → visual onset schedule.

mod spatial;
mod synth;
mod wav;

pub use spatial::{ild_db, itd_seconds, spatialize};
pub use synth::synthesize_cue;
pub use wav::{read_pcm, write_pcm, WAV_HEADER_LEN};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interstimulus interval between cue offset and ball appearance.
pub const DEFAULT_ISI: f64 = 0.105;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CueSpec {
    pub duration: f64,
    pub center_frequency: f64,
    pub sample_rate: u32,
    /// Peak level in dBFS at full volume.
    pub peak_level: f64,
    pub attack: f64,
    pub release: f64,
    pub volume: f64,
}

impl Default for CueSpec {
    fn default() -> Self {
        Self {
            duration: 2.61,
            center_frequency: 500.0,
            sample_rate: 44_100,
            peak_level: -30.0,
            attack: 0.05,
            release: 0.25,
            volume: 1.0,
        }
    }
}

impl CueSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::Config(format!("cue.duration: must be > 0, got {}", self.duration)));
        }
        if !(self.attack >= 0.0 && self.release >= 0.0) {
            return Err(Error::Config("cue: attack and release must be >= 0".into()));
        }
        if self.attack + self.release > self.duration {
            return Err(Error::Config(format!(
                "cue: attack + release ({}) exceeds duration ({})",
                self.attack + self.release,
                self.duration
            )));
        }
        if !(0.0..=1.0).contains(&self.volume) {
            return Err(Error::Config(format!("cue.volume: {} outside [0, 1]", self.volume)));
        }
        if !(self.center_frequency > 0.0) || !self.peak_level.is_finite() || self.sample_rate == 0 {
            return Err(Error::Config("cue: frequency, level and sample rate must be positive".into()));
        }
        if (self.sample_rate as f64) < 2.0 * self.center_frequency {
            return Err(Error::Aliasing {
                sample_rate: self.sample_rate,
                frequency: self.center_frequency,
            });
        }
        if !(2.0..=3.0).contains(&self.duration) {
            log::warn!("cue duration {} s is outside the 2-3 s band", self.duration);
        }
        Ok(())
    }

    /// Linear peak amplitude after applying volume.
    pub fn peak_amplitude(&self) -> f64 {
        10f64.powf(self.peak_level / 20.0) * self.volume
    }

    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate as f64).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueTimeline {
    pub audio_onset: f64,
    pub audio_offset: f64,
    pub isi: f64,
    pub visual_onset: f64,
}

impl CueTimeline {
    /// Time from cue onset to ball appearance.
    pub fn lead_time(&self) -> f64 {
        self.visual_onset - self.audio_onset
    }
}

/// The ISI is anchored at the cue's offset, so the cue always finishes
/// before the ball appears.
pub fn schedule_cue(trial_visual_request_time: f64, spec: &CueSpec, isi: f64) -> Result<CueTimeline> {
    if !(isi >= 0.0) {
        return Err(Error::Domain(format!("isi must be >= 0, got {isi}")));
    }
    let audio_onset = trial_visual_request_time;
    let audio_offset = audio_onset + spec.duration;
    // Summed as one lead so visual_onset - audio_onset is independent of the onset value.
    let visual_onset = audio_onset + (spec.duration + isi);
    Ok(CueTimeline {
        audio_onset,
        audio_offset,
        isi,
        visual_onset,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StereoBuffer {
    pub sample_rate: u32,
    pub left: Vec<f32>,
    pub right: Vec<f32>,
}

impl StereoBuffer {
    pub fn new(sample_rate: u32, left: Vec<f32>, right: Vec<f32>) -> Result<Self> {
        let buf = Self {
            sample_rate,
            left,
            right,
        };
        buf.validate()?;
        Ok(buf)
    }

    pub fn validate(&self) -> Result<()> {
        if self.left.len() != self.right.len() {
            return Err(Error::Domain(format!(
                "channel lengths differ: {} vs {}",
                self.left.len(),
                self.right.len()
            )));
        }
        let ok = self
            .left
            .iter()
            .chain(&self.right)
            .all(|s| s.is_finite() && (-1.0..=1.0).contains(s));
        if !ok {
            return Err(Error::Domain("sample outside [-1, 1] or non-finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }
}

pub fn rms(samples: &[f32]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (energy(samples) / samples.len() as f64).sqrt()
}

pub fn energy(samples: &[f32]) -> f64 {
    samples.iter().map(|&s| (s as f64) * (s as f64)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadModel {
    pub head_radius: f64,
    pub speed_of_sound: f64,
    pub ild_max: f64,
}

impl Default for HeadModel {
    fn default() -> Self {
        Self {
            head_radius: 0.0875,
            speed_of_sound: 343.0,
            ild_max: 6.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_timeline() {
        let t = schedule_cue(0.0, &CueSpec::default(), DEFAULT_ISI).unwrap();
        assert!((t.visual_onset - 2.715).abs() < 1e-12);
        assert_eq!(t.audio_offset, 2.61);

        let t = schedule_cue(10.0, &CueSpec::default(), DEFAULT_ISI).unwrap();
        assert!((t.audio_offset - 12.61).abs() < 1e-12);
        assert!((t.visual_onset - 12.715).abs() < 1e-12);
    }

    #[test]
    fn zero_duration_zero_isi() {
        let spec = CueSpec {
            duration: 0.0,
            ..Default::default()
        };
        let t = schedule_cue(4.0, &spec, 0.0).unwrap();
        assert_eq!(t.visual_onset, t.audio_onset);
        assert!(schedule_cue(4.0, &spec, -0.1).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CueSpec::default().validate().is_ok());
        let bad = CueSpec {
            attack: 2.0,
            release: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let loud = CueSpec {
            volume: 1.5,
            ..Default::default()
        };
        assert!(loud.validate().is_err());
        let aliased = CueSpec {
            sample_rate: 800,
            ..Default::default()
        };
        assert!(matches!(aliased.validate(), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn buffer_rejects_mismatch() {
        assert!(StereoBuffer::new(44_100, vec![0.0; 3], vec![0.0; 2]).is_err());
        assert!(StereoBuffer::new(44_100, vec![2.0], vec![0.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn lead_time_is_duration_plus_isi(onset in 0f64..1e4, dur in 0f64..5.0, isi in 0f64..1.0) {
            let spec = CueSpec { duration: dur, ..Default::default() };
            let t = schedule_cue(onset, &spec, isi).unwrap();
            // exact up to one rounding of the onset addition
            proptest::prop_assert!((t.lead_time() - (dur + isi)).abs() <= f64::EPSILON * onset.max(1.0) * 2.0);
        }
    }
}
