use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand, ValueEnum};

use graspcue::analysis::{analyze_sessions, AnalysisOptions, FitLevel, DEFAULT_ALPHA, DEFAULT_SPAN, DEFAULT_TRIM};
use graspcue::assessments::AssessmentDocument;
use graspcue::cue::{spatialize, synthesize_cue, write_pcm, CueSpec, HeadModel};
use graspcue::engine::{export_records, ScriptedPoses};
use graspcue::patient::{rows_from_csv, rows_to_sessions, simulate_program, Preset, PRESET_NAMES};
use graspcue::service::{self, frame_decode, frame_encode, read_frame, SessionOptions, Transport, PORT_ENV};

const DATASET_FILE: &str = "dataset.csv";
const LOG_DIR: &str = "logs";

#[derive(Parser)]
#[command(name = "graspcue", version, about = "Cued reach-and-grasp task engine, simulator and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a full program for a patient preset.
    Simulate {
        #[arg(long, value_parser = PossibleValuesParser::new(PRESET_NAMES))]
        preset: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory; receives dataset.csv and logs/.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the curve models and summarize a dataset.
    Analyze {
        /// Dataset CSV, or a directory containing dataset.csv.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Slowest trials dropped per session.
        #[arg(long, default_value_t = DEFAULT_TRIM)]
        trim: usize,
        #[arg(long, default_value_t = DEFAULT_SPAN)]
        span: f64,
        #[arg(long, value_enum, default_value_t = Level::SessionMeans)]
        fit_level: Level,
        /// Report directory; receives fits.csv, sessions.csv, loess.csv and report.txt.
        #[arg(long)]
        report: PathBuf,
    },
    /// Write a spatialized cue tone to a WAV file.
    SynthCue {
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        azimuth: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        frequency: Option<f64>,
        #[arg(long)]
        volume: Option<f64>,
    },
    /// Run the session-control service.
    Serve {
        #[arg(long, env = PORT_ENV, default_value_t = service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Accept WebSocket clients instead of raw TCP.
        #[arg(long)]
        websocket: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Patient preset driving SIMULATED sessions.
        #[arg(long, value_parser = PossibleValuesParser::new(PRESET_NAMES))]
        preset: Option<String>,
        /// Pose trace (t,az,el,x,y,z) replayed for MANUAL sessions.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Replay a recorded inbound message log and print the outbound log.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a Barthel assessment document and print its total.
    ScoreBarthel {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    SessionMeans,
    Trials,
}

#[derive(Debug)]
enum Failure {
    Io(PathBuf, std::io::Error),
    Domain(graspcue::Error),
}

impl From<graspcue::Error> for Failure {
    fn from(e: graspcue::Error) -> Self {
        Failure::Domain(e)
    }
}

trait IoContext<T> {
    fn at(self, path: &Path) -> Result<T, Failure>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: &Path) -> Result<T, Failure> {
        self.map_err(|e| Failure::Io(path.to_path_buf(), e))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(1)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { preset, seed, out } => simulate(&preset, seed, &out),
        Command::Analyze {
            input,
            alpha,
            trim,
            span,
            fit_level,
            report,
        } => {
            let opts = AnalysisOptions {
                alpha,
                trim_k: trim,
                span,
                fit_level: match fit_level {
                    Level::SessionMeans => FitLevel::SessionMeans,
                    Level::Trials => FitLevel::Trials,
                },
                ..Default::default()
            };
            analyze(&input, &opts, &report)
        }
        Command::SynthCue {
            azimuth,
            out,
            duration,
            frequency,
            volume,
        } => {
            let defaults = CueSpec::default();
            let spec = CueSpec {
                duration: duration.unwrap_or(defaults.duration),
                center_frequency: frequency.unwrap_or(defaults.center_frequency),
                volume: volume.unwrap_or(defaults.volume),
                ..defaults
            };
            synth_cue(&spec, azimuth, &out)
        }
        Command::Serve {
            port,
            host,
            websocket,
            seed,
            preset,
            script,
        } => serve(&host, port, websocket, seed, preset.as_deref(), script.as_deref()),
        Command::Replay { input, seed, out } => replay(&input, seed, out.as_deref()),
        Command::ScoreBarthel { input } => {
            let text = fs::read_to_string(&input).at(&input)?;
            let assessment = AssessmentDocument::from_toml(&text)?.barthel_assessment()?;
            println!("{}", assessment.total);
            Ok(())
        }
    }
}

fn simulate(preset: &str, seed: u64, out: &Path) -> Result<(), Failure> {
    let preset = Preset::by_name(preset)?;
    let dataset = simulate_program(&preset.params, &preset.schedule, &preset.session_config(), seed)?;
    let logs = out.join(LOG_DIR);
    fs::create_dir_all(&logs).at(&logs)?;
    let csv_path = out.join(DATASET_FILE);
    fs::write(&csv_path, dataset.to_csv()?).at(&csv_path)?;
    for (index, records) in &dataset.sessions {
        let date = records.first().map(|r| r.date.format("%Y-%m-%d").to_string()).unwrap_or_default();
        let path = logs.join(format!("session_{index:02}_{date}.txt"));
        fs::write(&path, export_records(records)?).at(&path)?;
    }
    println!(
        "{} trials in {} sessions -> {}",
        dataset.rows.len(),
        dataset.sessions.len(),
        out.display()
    );
    Ok(())
}

fn analyze(input: &Path, opts: &AnalysisOptions, report_dir: &Path) -> Result<(), Failure> {
    let csv_path = if input.is_dir() { input.join(DATASET_FILE) } else { input.to_path_buf() };
    let text = fs::read_to_string(&csv_path).at(&csv_path)?;
    let rows = rows_from_csv(&text)?;
    let report = analyze_sessions(&rows_to_sessions(&rows), opts)?;
    fs::create_dir_all(report_dir).at(report_dir)?;
    let text = report.render_text();
    for (name, body) in [
        ("fits.csv", report.fits_csv()),
        ("sessions.csv", report.sessions_csv()),
        ("loess.csv", report.loess_csv()),
        ("report.txt", text.clone()),
    ] {
        let path = report_dir.join(name);
        fs::write(&path, body).at(&path)?;
    }
    print!("{text}");
    Ok(())
}

fn synth_cue(spec: &CueSpec, azimuth: f64, out: &Path) -> Result<(), Failure> {
    let mono = synthesize_cue(spec)?;
    let stereo = spatialize(&mono, azimuth, &HeadModel::default());
    let file = fs::File::create(out).at(out)?;
    let mut sink = BufWriter::new(file);
    let bytes = write_pcm(&stereo, &mut sink).map_err(|e| match e {
        graspcue::Error::Io(io) => Failure::Io(out.to_path_buf(), io),
        other => Failure::Domain(other),
    })?;
    sink.flush().at(out)?;
    println!("{bytes} bytes, {:.3} s -> {}", stereo.duration(), out.display());
    Ok(())
}

fn serve(
    host: &str,
    port: u16,
    websocket: bool,
    seed: u64,
    preset: Option<&str>,
    script: Option<&Path>,
) -> Result<(), Failure> {
    let patient = match preset {
        Some(name) => Preset::by_name(name)?.params,
        None => Default::default(),
    };
    let script = match script {
        Some(path) => Some(ScriptedPoses::parse(&fs::read_to_string(path).at(path)?)?),
        None => None,
    };
    let base = SessionOptions {
        seed,
        patient,
        script,
        date: chrono::Local::now().date_naive(),
        ..Default::default()
    };
    let transport = if websocket { Transport::WebSocket } else { Transport::Tcp };
    let addr = format!("{host}:{port}");
    eprintln!("serving on {addr} ({transport:?})");
    service::serve(addr.as_str(), transport, move |id| SessionOptions {
        session_id: id,
        seed: seed.wrapping_add(id),
        ..base.clone()
    })
    .map_err(|e| match e {
        graspcue::Error::Io(io) => Failure::Io(PathBuf::from(addr.clone()), io),
        other => Failure::Domain(other),
    })
}

fn replay(input: &Path, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let file = fs::File::open(input).at(input)?;
    let mut reader = BufReader::new(file);
    let mut inbound = Vec::new();
    while let Some(line) = read_frame(&mut reader)? {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        inbound.push(frame_decode(&line)?);
    }
    let outbound = service::replay(
        SessionOptions {
            seed,
            ..Default::default()
        },
        &inbound,
    )?;
    let mut bytes = Vec::new();
    for m in &outbound {
        bytes.extend(frame_encode(m)?);
    }
    match out {
        Some(path) => fs::write(path, &bytes).at(path)?,
        None => std::io::stdout().lock().write_all(&bytes).at(Path::new("<stdout>"))?,
    }
    Ok(())
}
