use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CueSpec, StereoBuffer};
use crate::error::Result;

/// Noise floor relative to the tone, in dB.
const NOISE_FLOOR_DB: f64 = -30.0;
const NOISE_SEED: u64 = 0x5eed_0500;

/// Trapezoidal envelope: linear ramp up over the attack, flat, linear ramp
/// down over the release. Zero at the first and last sample.
fn envelope(i: usize, n: usize, attack: usize, release: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let last = n - 1;
    let up = if attack == 0 { 1.0 } else { i as f64 / attack as f64 };
    let down = if release == 0 {
        1.0
    } else {
        (last - i) as f64 / release as f64
    };
    let mut e = up.min(down).min(1.0);
    if i == 0 || i == last {
        e = 0.0;
    }
    e
}

/// Pink noise via Paul Kellet's economy filter over white noise.
fn pink_noise(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    (0..n)
        .map(|_| {
            let white: f64 = rng.random_range(-1.0..1.0);
            b0 = 0.99765 * b0 + white * 0.0990460;
            b1 = 0.96300 * b1 + white * 0.2965164;
            b2 = 0.57000 * b2 + white * 1.0526913;
            b0 + b1 + b2 + white * 0.1848
        })
        .collect()
}

/// Amplitude-shaped tone burst at the centre frequency over a pink-noise
/// floor, normalized so the absolute peak equals the spec's peak level
/// scaled by volume. Both channels carry the same content.
pub fn synthesize_cue(spec: &CueSpec) -> Result<StereoBuffer> {
    spec.validate()?;
    let n = spec.sample_count();
    let sr = spec.sample_rate as f64;
    let peak = spec.peak_amplitude();
    if peak == 0.0 || n == 0 {
        return StereoBuffer::new(spec.sample_rate, vec![0.0; n], vec![0.0; n]);
    }

    let attack = (spec.attack * sr).round() as usize;
    let release = (spec.release * sr).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(NOISE_SEED);
    let mut noise = pink_noise(n, &mut rng);
    let noise_rms = (noise.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    // tone RMS is 1/sqrt(2)
    let noise_gain = if noise_rms > 0.0 {
        std::f64::consts::FRAC_1_SQRT_2 * 10f64.powf(NOISE_FLOOR_DB / 20.0) / noise_rms
    } else {
        0.0
    };
    noise.iter_mut().for_each(|v| *v *= noise_gain);

    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let tone = (TAU * spec.center_frequency * i as f64 / sr).sin();
            envelope(i, n, attack, release) * (tone + noise[i])
        })
        .collect();

    let max = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if max > 0.0 { peak / max } else { 0.0 };
    let mono: Vec<f32> = raw.iter().map(|v| (v * scale) as f32).collect();
    StereoBuffer::new(spec.sample_rate, mono.clone(), mono)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_length() {
        let buf = synthesize_cue(&CueSpec::default()).unwrap();
        assert_eq!(buf.len(), 115_101);
        assert_eq!(buf.left, buf.right);
    }

    #[test]
    fn muted_is_silent() {
        let spec = CueSpec {
            volume: 0.0,
            ..Default::default()
        };
        let buf = synthesize_cue(&spec).unwrap();
        assert!(buf.left.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn no_clicks_and_peak_level() {
        let spec = CueSpec {
            volume: 0.5,
            ..Default::default()
        };
        let buf = synthesize_cue(&spec).unwrap();
        assert!(buf.left[0].abs() < 1e-3);
        assert!(buf.left[buf.len() - 1].abs() < 1e-3);
        let peak = buf.left.iter().fold(0.0f32, |m, s| m.max(s.abs())) as f64;
        assert!((peak - spec.peak_amplitude()).abs() < 1e-6);
    }

    #[test]
    fn aliasing_rejected() {
        let spec = CueSpec {
            sample_rate: 900,
            ..Default::default()
        };
        assert!(synthesize_cue(&spec).is_err());
    }

    #[test]
    fn deterministic() {
        let a = synthesize_cue(&CueSpec::default()).unwrap();
        let b = synthesize_cue(&CueSpec::default()).unwrap();
        assert_eq!(a, b);
    }
}
