use super::{HeadModel, StereoBuffer};

fn clamp_azimuth(azimuth: f64) -> f64 {
    if azimuth.abs() > 90.0 {
        log::warn!("azimuth {azimuth} outside [-90, 90], clamping");
        azimuth.clamp(-90.0, 90.0)
    } else {
        azimuth
    }
}

/// Woodworth interaural time difference. Carries the sign of the azimuth:
/// a negative value means the left ear leads.
pub fn itd_seconds(azimuth: f64, head: &HeadModel) -> f64 {
    let az = clamp_azimuth(azimuth);
    let theta = az.abs().to_radians();
    let magnitude = head.head_radius / head.speed_of_sound * (theta.sin() + theta);
    magnitude.copysign(az)
}

/// Far-ear attenuation in dB (non-negative).
pub fn ild_db(azimuth: f64, head: &HeadModel) -> f64 {
    let az = clamp_azimuth(azimuth);
    head.ild_max * az.abs().to_radians().sin()
}

/// Delay and attenuate the far-ear channel. The near channel is copied
/// unchanged; both outputs are zero-padded to the same length.
pub fn spatialize(buffer: &StereoBuffer, azimuth: f64, head: &HeadModel) -> StereoBuffer {
    let itd = itd_seconds(azimuth, head);
    if itd == 0.0 {
        return buffer.clone();
    }
    let delay = (itd.abs() * buffer.sample_rate as f64).round() as usize;
    let gain = 10f64.powf(-ild_db(azimuth, head) / 20.0) as f32;

    let (near_src, far_src) = if itd < 0.0 {
        (&buffer.left, &buffer.right)
    } else {
        (&buffer.right, &buffer.left)
    };
    let len = buffer.len() + delay;
    let mut near = Vec::with_capacity(len);
    near.extend_from_slice(near_src);
    near.resize(len, 0.0);
    let mut far = vec![0.0f32; delay];
    far.extend(far_src.iter().map(|s| s * gain));

    let (left, right) = if itd < 0.0 { (near, far) } else { (far, near) };
    StereoBuffer {
        sample_rate: buffer.sample_rate,
        left,
        right,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cue::{energy, rms, synthesize_cue, CueSpec};

    #[test]
    fn itd_examples() {
        let head = HeadModel::default();
        assert_eq!(itd_seconds(0.0, &head), 0.0);
        // 0.0875 / 343 * (sin 15° + 15° in rad)
        let expected = -0.0875 / 343.0 * ((15f64).to_radians().sin() + (15f64).to_radians());
        assert!((itd_seconds(-15.0, &head) - expected).abs() < 1e-15);
        assert!((itd_seconds(-15.0, &head) + 1.328e-4).abs() < 5e-8);
        for az in (-90..=90).step_by(5) {
            let az = az as f64;
            assert_eq!(itd_seconds(-az, &head), -itd_seconds(az, &head));
        }
        assert_eq!(itd_seconds(-120.0, &head), itd_seconds(-90.0, &head));
    }

    #[test]
    fn ild_examples() {
        let head = HeadModel::default();
        assert_eq!(ild_db(0.0, &head), 0.0);
        assert!((ild_db(-90.0, &head) - 6.0).abs() < 1e-12);
        assert!((ild_db(-15.0, &head) - 1.553).abs() < 5e-4);
    }

    #[test]
    fn center_is_identical() {
        let buf = synthesize_cue(&CueSpec::default()).unwrap();
        let out = spatialize(&buf, 0.0, &HeadModel::default());
        assert_eq!(out.left, out.right);
        assert_eq!(out.len(), buf.len());
    }

    #[test]
    fn left_source_delays_right_channel() {
        let head = HeadModel::default();
        let buf = synthesize_cue(&CueSpec::default()).unwrap();
        let out = spatialize(&buf, -15.0, &head);
        assert_eq!(out.left.len(), out.right.len());
        assert_eq!(out.len(), buf.len() + 6);
        assert!(out.right[..6].iter().all(|&s| s == 0.0));
        assert_eq!(&out.left[..buf.len()], &buf.left[..]);
        assert!(rms(&out.left) > rms(&out.right));

        // near energy preserved, far reduced by the ILD factor
        let factor = 10f64.powf(-ild_db(-15.0, &head) / 10.0);
        assert!((energy(&out.left) - energy(&buf.left)).abs() < 1e-9);
        let ratio = energy(&out.right) / energy(&buf.right);
        assert!((ratio - factor).abs() < 1e-5, "{ratio} vs {factor}");
    }

    #[test]
    fn right_source_mirrors() {
        let buf = synthesize_cue(&CueSpec::default()).unwrap();
        let out = spatialize(&buf, 30.0, &HeadModel::default());
        assert!(rms(&out.right) > rms(&out.left));
        assert!(out.left[0] == 0.0);
    }
}
