//! Sweep seeds for a preset and report the behavioural rates the presets are
//! tuned against.
//!
//! ```text
//! cargo run --release --example calibrate -- patientB 100
//! ```
//! Parameter overrides may follow as `key=value` pairs using preset field
//! names, e.g. `learning_rate=0.5 noise_sd=0.4`.

use graspcue::analysis::{analyze_sessions, pooled_sd, AnalysisOptions, CurveModel};
use graspcue::batch::{replicate, Execution};
use graspcue::patient::{simulate_program, Preset};

struct Outcome {
    inverse_significant: bool,
    inverse_top: bool,
    any_significant: bool,
    sd_drop: bool,
    spike7: bool,
    last_below_first: bool,
    only_inverse: bool,
    inverse_r2: f64,
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map(String::as_str).unwrap_or("patientB");
    let runs: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let mut preset = Preset::by_name(name).expect("known preset");
    for kv in &args[2.min(args.len())..] {
        let (k, v) = kv.split_once('=').expect("key=value");
        let v: f64 = v.parse().expect("numeric value");
        let p = &mut preset.params;
        match k {
            "base_detection" => p.base_detection = v,
            "neglect_gain" => p.neglect_gain = v,
            "learning_rate" => p.learning_rate = v,
            "asymptote" => p.asymptote = v,
            "retention_half_life" => p.retention_half_life = v,
            "retention_cap" => p.retention_cap = v,
            "cue_adaptation_penalty" => p.cue_adaptation_penalty = v,
            "noise_sd" => p.noise_sd = v,
            "cue_mean" => p.cue_benefit.mean = v,
            "cue_sd" => p.cue_benefit.sd = v,
            "motor_initiation_penalty" => p.motor_initiation_penalty = v,
            other => panic!("unknown parameter {other}"),
        }
    }
    let config = preset.session_config();
    let opts = AnalysisOptions::default();
    let outcomes = replicate(1..runs + 1, Execution::default(), |seed| {
        let ds = simulate_program(&preset.params, &preset.schedule, &config, seed).expect("simulation runs");
        let report = analyze_sessions(&ds.session_times(), &opts).expect("analysis runs");
        let c = &report.comparison;
        let s = &report.summaries;
        Outcome {
            inverse_significant: c.get(CurveModel::Inverse).is_some_and(|f| f.p_value < opts.alpha),
            inverse_top: c.best_r_squared().map(|f| f.model) == Some(CurveModel::Inverse),
            any_significant: c.any_significant(),
            sd_drop: pooled_sd(&s[6..]) < pooled_sd(&s[..6]),
            spike7: s[6].mean > s[5].mean,
            last_below_first: s[11].mean < s[0].mean,
            only_inverse: c.fits.iter().all(|f| (f.model == CurveModel::Inverse) == (f.p_value < opts.alpha)),
            inverse_r2: c.get(CurveModel::Inverse).map_or(f64::NAN, |f| f.r_squared),
        }
    });
    let rate = |f: fn(&Outcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / outcomes.len() as f64;
    println!("preset {name}, {runs} seeds");
    println!("  INVERSE significant     {:.2}", rate(|o| o.inverse_significant));
    println!("  INVERSE top R²          {:.2}", rate(|o| o.inverse_top));
    println!("  any model significant   {:.2}", rate(|o| o.any_significant));
    println!("  pooled SD 7-12 < 1-6    {:.2}", rate(|o| o.sd_drop));
    println!("  session 7 > session 6   {:.2}", rate(|o| o.spike7));
    println!("  session 12 < session 1  {:.2}", rate(|o| o.last_below_first));
    println!("  only INVERSE signif.    {:.2}", rate(|o| o.only_inverse));
    let mut r2: Vec<f64> = outcomes.iter().map(|o| o.inverse_r2).collect();
    r2.sort_by(f64::total_cmp);
    println!("  INVERSE R² median       {:.3}", r2[r2.len() / 2]);
}
