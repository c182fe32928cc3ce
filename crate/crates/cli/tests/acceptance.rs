//! Acceptance checks. Each criterion prints one PASS/FAIL line with its
//! measured values and runtime; the process fails if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use graspcue::analysis::{
    analyze_sessions, f_upper_tail_p, fit_curve, p_from_r_squared, pooled_sd, trim_worst, AnalysisOptions,
    CurveModel,
};
use graspcue::assessments::{validate_barthel_item, Activity, AssessmentDocument, PATIENT_A_DOC, PATIENT_B_DOC};
use graspcue::batch::{replicate, Execution};
use graspcue::cue::{rms, schedule_cue, spatialize, synthesize_cue, write_pcm, CueSpec, HeadModel, DEFAULT_ISI};
use graspcue::engine::{export_records, parse_session_log, Engine, EngineEvent, SessionConfig, TrialRecord};
use graspcue::geometry::{
    fitts_index_of_difficulty, sample_spawn_location, within_fov, FovConfig, TargetLocation,
};
use graspcue::patient::{simulate_program, PatientModelParams, Preset, SimulatedPatient, TrialContext};

type Check = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn p_value_back_solve() -> Check {
    let (r2, n, k) = (0.343, 12usize, 1usize);
    let f = r2 / (1.0 - r2) * (n - k - 1) as f64 / k as f64;
    let p = f_upper_tail_p(f, k as f64, (n - k - 1) as f64);
    let via_r2 = p_from_r_squared(r2, n, k);
    ensure(
        (0.0435..=0.0465).contains(&p) && (p - via_r2).abs() < 1e-12,
        format!("F={f:.4}, p={p:.5}"),
    )
}

fn trial_bookkeeping() -> Check {
    let preset = Preset::patient_b();
    let ds = simulate_program(&preset.params, &preset.schedule, &preset.session_config(), 1)
        .map_err(|e| e.to_string())?;
    let kept: usize = ds
        .session_times()
        .iter()
        .map(|s| trim_worst(&s.times, 2).map(|v| v.len()))
        .sum::<Result<usize, _>>()
        .map_err(|e| e.to_string())?;
    ensure(
        ds.rows.len() == 180 && ds.sessions.len() == 12 && kept == 156,
        format!("{} trials, {kept} after trimming", ds.rows.len()),
    )
}

fn cue_timing() -> Check {
    let timeline = schedule_cue(10.0, &CueSpec::default(), DEFAULT_ISI).map_err(|e| e.to_string())?;
    let lead = timeline.visual_onset - timeline.audio_onset;

    let config = SessionConfig {
        num_trials: 3,
        audio_cues_enabled: true,
        ..Default::default()
    };
    let tick = config.tick;
    let date = chrono::NaiveDate::from_ymd_opt(2023, 3, 1).unwrap();
    let mut engine = Engine::new(config.clone(), date, 5).map_err(|e| e.to_string())?;
    let ctx = TrialContext {
        session_index: 8,
        audio_on: true,
        first_audio_session: false,
        gap_days: 4.0,
        ball_diameter: config.ball_diameter,
    };
    let mut patient = SimulatedPatient::new(PatientModelParams::default(), ctx, 6).map_err(|e| e.to_string())?;
    let mut cue_at = Vec::new();
    let mut spawn_at = Vec::new();
    while !engine.is_finished() {
        engine
            .run_trial(&mut patient, 600.0, |e| match e {
                EngineEvent::AudioCueStarted { timeline, .. } => cue_at.push(timeline.audio_onset),
                EngineEvent::BallSpawned { at, .. } => spawn_at.push(*at),
                _ => {}
            })
            .map_err(|e| e.to_string())?;
    }
    let worst = cue_at
        .iter()
        .zip(&spawn_at)
        .map(|(a, v)| (v - a - 2.715).abs())
        .fold(0.0, f64::max);
    ensure(
        (lead - 2.715).abs() < 1e-12 && cue_at.len() == 3 && spawn_at.len() == 3 && worst <= tick + 1e-9,
        format!("schedule lead {lead:.6} s, engine max deviation {worst:.4} s over {} trials", spawn_at.len()),
    )
}

fn wav_bytes(buffer: &graspcue::cue::StereoBuffer) -> Result<Vec<u8>, String> {
    let mut bytes = Vec::new();
    write_pcm(buffer, &mut bytes).map_err(|e| e.to_string())?;
    Ok(bytes)
}

fn read_wav(bytes: &[u8]) -> Result<(u32, Vec<f64>, Vec<f64>), String> {
    let mut reader = hound::WavReader::new(bytes).map_err(|e| e.to_string())?;
    let rate = reader.spec().sample_rate;
    let samples: Vec<i16> = reader.samples::<i16>().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let left = samples.iter().step_by(2).map(|s| *s as f64).collect();
    let right = samples.iter().skip(1).step_by(2).map(|s| *s as f64).collect();
    Ok((rate, left, right))
}

fn peak_frequency(signal: &[f64], rate: u32) -> f64 {
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|s| Complex::new(*s, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let half = buf.len() / 2;
    let (bin, _) = buf[1..half]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("non-empty spectrum");
    (bin + 1) as f64 * rate as f64 / buf.len() as f64
}

/// Lag (in samples) by which `b` trails `a`, from the cross-correlation peak.
fn lag_of(a: &[f64], b: &[f64], max_lag: i64) -> i64 {
    (-max_lag..=max_lag)
        .max_by(|x, y| xcorr(a, b, *x).total_cmp(&xcorr(a, b, *y)))
        .expect("non-empty lag range")
}

fn xcorr(a: &[f64], b: &[f64], lag: i64) -> f64 {
    let n = a.len().min(b.len()) as i64;
    (0..n)
        .filter_map(|i| {
            let j = i + lag;
            (0..n).contains(&j).then(|| a[i as usize] * b[j as usize])
        })
        .sum()
}

fn cue_audio() -> Check {
    let spec = CueSpec::default();
    let mono = synthesize_cue(&spec).map_err(|e| e.to_string())?;
    let (rate, left, _) = read_wav(&wav_bytes(&mono)?)?;
    let duration_err = (left.len() as f64 - 2.61 * rate as f64).abs();
    let peak = peak_frequency(&left, rate);

    let spatial = spatialize(&mono, -15.0, &HeadModel::default());
    let (_, l, r) = read_wav(&wav_bytes(&spatial)?)?;
    let lag = lag_of(&l, &r, 20);
    let (rl, rr) = (rms(&spatial.left), rms(&spatial.right));
    ensure(
        rate == 44_100 && duration_err <= 1.0 && (450.0..=550.0).contains(&peak) && (5..=7).contains(&lag) && rl > rr,
        format!(
            "{} frames ({:.4} s), peak {peak:.1} Hz, right trails left by {lag} samples, RMS L {rl:.5} > R {rr:.5}",
            left.len(),
            left.len() as f64 / rate as f64
        ),
    )
}

fn fit_oracle() -> Check {
    let xs: Vec<f64> = (1..=12).map(f64::from).collect();
    type Case = (CurveModel, Vec<f64>, fn(&[f64], f64) -> f64);
    let cases: [Case; 5] = [
        (CurveModel::Linear, vec![7.5, -0.4], |b, x| b[0] + b[1] * x),
        (CurveModel::Logarithmic, vec![9.0, -2.2], |b, x| b[0] + b[1] * x.ln()),
        (CurveModel::Quadratic, vec![10.0, -1.3, 0.07], |b, x| b[0] + b[1] * x + b[2] * x * x),
        (CurveModel::Power, vec![8.0, -0.6], |b, x| b[0] * x.powf(b[1])),
        (CurveModel::Inverse, vec![2.0, 6.5], |b, x| b[0] + b[1] / x),
    ];
    let mut worst = 0.0f64;
    let mut r2_min = 1.0f64;
    for (model, truth, f) in &cases {
        let ys: Vec<f64> = xs.iter().map(|x| f(truth, *x)).collect();
        let fit = fit_curve(*model, &xs, &ys).map_err(|e| e.to_string())?;
        for (got, want) in fit.coefficients.iter().zip(truth) {
            worst = worst.max(((got - want) / want).abs());
        }
        r2_min = r2_min.min(fit.r_squared);
    }

    // closed-form simple regression of ln y on ln x
    let ys: Vec<f64> = xs.iter().map(|x| 8.0 * x.powf(-0.6) * (1.0 + 0.05 * (x * 1.7).sin())).collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs.iter().zip(&ys).map(|(x, y)| (x.ln(), y.ln())).unzip();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let scale = (my - slope * mx).exp();
    let fit = fit_curve(CurveModel::Power, &xs, &ys).map_err(|e| e.to_string())?;
    let power_err = ((fit.coefficients[0] - scale) / scale)
        .abs()
        .max(((fit.coefficients[1] - slope) / slope).abs());
    ensure(
        worst <= 1e-6 && (1.0 - r2_min) <= 1e-9 && power_err <= 1e-9,
        format!("max relative error {worst:.2e}, min R² {r2_min:.12}, POWER vs log-space closed form {power_err:.2e}"),
    )
}

struct Run {
    inverse_significant: bool,
    inverse_top: bool,
    sd_drop: bool,
    spike7: bool,
    any_significant: bool,
}

fn preset_runs(preset: &Preset) -> Result<Vec<Run>, String> {
    let config = preset.session_config();
    let opts = AnalysisOptions::default();
    replicate(1..101, Execution::default(), |seed| {
        let ds = simulate_program(&preset.params, &preset.schedule, &config, seed).map_err(|e| e.to_string())?;
        let report = analyze_sessions(&ds.session_times(), &opts).map_err(|e| e.to_string())?;
        let c = &report.comparison;
        let s = &report.summaries;
        Ok(Run {
            inverse_significant: c.get(CurveModel::Inverse).is_some_and(|f| f.p_value < opts.alpha),
            inverse_top: c.best_r_squared().map(|f| f.model) == Some(CurveModel::Inverse),
            sd_drop: pooled_sd(&s[6..12]) < pooled_sd(&s[0..6]),
            spike7: s[6].mean > s[5].mean,
            any_significant: c.any_significant(),
        })
    })
    .into_iter()
    .collect()
}

fn share(runs: &[Run], f: impl Fn(&Run) -> bool) -> f64 {
    runs.iter().filter(|r| f(r)).count() as f64 / runs.len() as f64
}

fn patient_b() -> Check {
    let runs = preset_runs(&Preset::patient_b())?;
    let sig = share(&runs, |r| r.inverse_significant);
    let top = share(&runs, |r| r.inverse_top);
    let sd = share(&runs, |r| r.sd_drop);
    ensure(
        sig >= 0.70 && top >= 0.60 && sd >= 0.80,
        format!("INVERSE significant {sig:.2}, top R² {top:.2}, SD 7-12 < 1-6 {sd:.2} over {} seeds", runs.len()),
    )
}

fn patient_a() -> Check {
    let runs = preset_runs(&Preset::patient_a())?;
    let spike = share(&runs, |r| r.spike7);
    let none = share(&runs, |r| !r.any_significant);
    ensure(
        spike >= 0.80 && none >= 0.50,
        format!("session 7 > 6 in {spike:.2}, no significant model in {none:.2} over {} seeds", runs.len()),
    )
}

fn barthel() -> Check {
    let total = |doc: &str| -> Result<u32, String> {
        let d = AssessmentDocument::from_toml(doc).map_err(|e| e.to_string())?;
        d.barthel_assessment().map(|a| a.total).map_err(|e| e.to_string())
    };
    let (a, b) = (total(PATIENT_A_DOC)?, total(PATIENT_B_DOC)?);
    let ladders: [(Activity, &[u32]); 10] = [
        (Activity::Dining, &[0, 5, 10]),
        (Activity::Transfer, &[0, 5, 10, 15]),
        (Activity::Grooming, &[0, 5]),
        (Activity::Toilet, &[0, 5, 10]),
        (Activity::Bathing, &[0, 5]),
        (Activity::Mobility, &[0, 5, 10, 15]),
        (Activity::Stairs, &[0, 5, 10]),
        (Activity::Dressing, &[0, 5, 10]),
        (Activity::Bowels, &[0, 5, 10]),
        (Activity::Bladder, &[0, 5, 10]),
    ];
    let mut mismatches = 0;
    for (activity, allowed) in ladders {
        for score in 0..=120 {
            if validate_barthel_item(activity, score).is_ok() != allowed.contains(&score) {
                mismatches += 1;
            }
        }
    }
    ensure(
        a == 70 && b == 95 && mismatches == 0,
        format!("Patient A {a}, Patient B {b}, ladder mismatches {mismatches} of 1210 probes"),
    )
}

fn log_round_trip() -> Check {
    use rand::Rng;
    let date = chrono::NaiveDate::from_ymd_opt(2023, 3, 1).unwrap();
    let target = TargetLocation::new(-7.0, 3.0, 0.61).map_err(|e| e.to_string())?;
    let record = |i: u32, t: f64, cue: bool| TrialRecord {
        trial_index: i,
        date,
        spawn: target,
        audio_cue_used: cue,
        cue_sound_id: cue.then(|| "tone500".to_string()),
        audio_onset: cue.then_some(0.0),
        visual_onset: 2.715,
        grasp_time: 2.715 + t,
        completion: t,
    };
    let fig = export_records(&[record(1, 24.38, true), record(2, 2.72, true)]).map_err(|e| e.to_string())?;
    let expected = "pvm: 2023-03-01\naanivihje: tone500\nPallo 1: 24.38s\nPallo 2: 2.72s\nkokonaisaika: 27.10s\n";

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut failures = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=20);
        let cue = rng.random_bool(0.5);
        let records: Vec<TrialRecord> = (1..=n).map(|i| record(i, rng.random_range(0.5..60.0), cue)).collect();
        let text = export_records(&records).map_err(|e| e.to_string())?;
        let parsed = parse_session_log(&text).map_err(|e| e.to_string())?;
        let same = parsed.date == date
            && parsed.times.len() == records.len()
            && parsed
                .times
                .iter()
                .zip(&records)
                .all(|(p, r)| format!("{p:.2}") == format!("{:.2}", r.completion))
            && parsed.render() == text;
        if !same {
            failures += 1;
        }
    }
    ensure(
        fig == expected && failures == 0,
        format!("Fig-1 lines verbatim: {}, round-trip failures {failures} of 500", fig == expected),
    )
}

fn determinism() -> Check {
    let tmp = std::env::temp_dir().join(format!("graspcue-acceptance-{}", std::process::id()));
    let run = |dir: &Path| -> Result<Vec<(String, Vec<u8>)>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_graspcue"))
            .args(["simulate", "--preset", "patientB", "--seed", "1", "--out"])
            .arg(dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        let mut files = vec![("dataset.csv".to_string(), fs::read(dir.join("dataset.csv")).map_err(|e| e.to_string())?)];
        for entry in fs::read_dir(dir.join("logs")).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            files.push((name, fs::read(&path).map_err(|e| e.to_string())?));
        }
        files.sort();
        Ok(files)
    };
    let a = run(&tmp.join("a"));
    let b = run(&tmp.join("b"));
    let _ = fs::remove_dir_all(&tmp);
    let (a, b) = (a?, b?);
    let bytes: usize = a.iter().map(|(_, v)| v.len()).sum();
    ensure(
        a == b && a.len() == 13,
        format!("{} files, {bytes} bytes, identical: {}", a.len(), a == b),
    )
}

fn geometry() -> Check {
    let fov = FovConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut outside = 0;
    for _ in 0..100_000 {
        let t = sample_spawn_location(&mut rng, &fov).map_err(|e| e.to_string())?;
        let in_band = (-15.0..=0.0).contains(&t.azimuth);
        let in_fov = within_fov(t.azimuth, t.elevation, &fov) && t.azimuth.abs() <= 15.0 && t.elevation.abs() <= 25.0;
        if !(in_band && in_fov) {
            outside += 1;
        }
    }
    let mut violations = 0;
    for d in [0.05, 0.2, 0.45, 0.61, 1.0, 2.5] {
        let widths: Vec<f64> = (1..=200).map(|i| i as f64 * 0.005).collect();
        let ids: Vec<f64> = widths
            .iter()
            .map(|w| fitts_index_of_difficulty(d, *w))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        violations += ids.windows(2).filter(|p| p[1] >= p[0]).count();
    }
    ensure(
        outside == 0 && violations == 0,
        format!("{outside} of 100000 spawns outside, {violations} ID monotonicity violations on 1200 widths"),
    )
}

fn main() {
    let criteria = [
        Criterion { name: "p-value back-solve", limit: Duration::from_secs(1), run: p_value_back_solve },
        Criterion { name: "trial bookkeeping", limit: Duration::from_secs(5), run: trial_bookkeeping },
        Criterion { name: "cue timing", limit: Duration::from_secs(1), run: cue_timing },
        Criterion { name: "cue audio", limit: Duration::from_secs(2), run: cue_audio },
        Criterion { name: "fit oracle", limit: Duration::from_secs(1), run: fit_oracle },
        Criterion { name: "Patient-B behaviour", limit: Duration::from_secs(60), run: patient_b },
        Criterion { name: "Patient-A behaviour", limit: Duration::from_secs(60), run: patient_a },
        Criterion { name: "Barthel", limit: Duration::from_secs(1), run: barthel },
        Criterion { name: "log round-trip", limit: Duration::from_secs(1), run: log_round_trip },
        Criterion { name: "determinism", limit: Duration::from_secs(10), run: determinism },
        Criterion { name: "geometry/Fitts", limit: Duration::from_secs(5), run: geometry },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let (ok, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:<20} {} [{:.3} s, limit {} s{}]",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
