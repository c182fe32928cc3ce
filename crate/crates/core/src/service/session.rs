use chrono::NaiveDate;
use serde_json::json;

use super::protocol::{
    frame_decode, ErrorPayload, HelloPayload, MessageType, PoseInput, ProtocolMessage, ServerHello,
    SessionSummaryPayload, StateSnapshot, TrialCompletePayload,
};
use crate::engine::{export_records, Engine, EngineEvent, Mode, Phase, PoseSource, ScriptedPoses, SessionConfig};
use crate::error::{Error, Result};
use crate::patient::{mix_seed, PatientModelParams, SimulatedPatient, TrialContext};

/// Upper bound on outbound state snapshots per second of session time.
pub const MAX_STATE_RATE: f64 = 30.0;
/// Session time a simulated or scripted trial may take before it is abandoned.
const TRIAL_TIMEOUT: f64 = 3600.0;

/// Settings fixed for the lifetime of a connection.
#[derive(Debug, Clone)]
pub struct SessionOptions {
    pub session_id: u64,
    pub seed: u64,
    pub date: NaiveDate,
    /// Patient driving SIMULATED sessions.
    pub patient: PatientModelParams,
    pub patient_context: TrialContext,
    /// Pose trace replayed for MANUAL sessions instead of waiting for
    /// client pose input.
    pub script: Option<ScriptedPoses>,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            session_id: 1,
            seed: 0,
            date: NaiveDate::from_ymd_opt(2023, 1, 9).expect("valid date"),
            patient: PatientModelParams::default(),
            patient_context: TrialContext {
                session_index: 1,
                audio_on: true,
                first_audio_session: false,
                gap_days: 0.0,
                ball_diameter: SessionConfig::default().ball_diameter,
            },
            script: None,
        }
    }
}

/// Server side of one connection: the engine plus protocol bookkeeping.
#[derive(Debug)]
pub struct SessionHandle {
    opts: SessionOptions,
    config: SessionConfig,
    engine: Engine,
    patient: SimulatedPatient,
    script: Option<ScriptedPoses>,
    greeted: bool,
    last_inbound: Option<u64>,
    out_seq: u64,
    armed: bool,
    last_state_at: Option<f64>,
    configurations: u64,
}

impl SessionHandle {
    pub fn new(opts: SessionOptions) -> Result<Self> {
        let config = SessionConfig::default();
        let engine = Engine::new(config.clone(), opts.date, mix_seed(opts.seed, 0))?;
        let patient = Self::make_patient(&opts, &config, 0)?;
        Ok(Self {
            script: opts.script.clone(),
            opts,
            config,
            engine,
            patient,
            greeted: false,
            last_inbound: None,
            out_seq: 0,
            armed: false,
            last_state_at: None,
            configurations: 0,
        })
    }

    fn make_patient(opts: &SessionOptions, config: &SessionConfig, generation: u64) -> Result<SimulatedPatient> {
        let mut ctx = opts.patient_context;
        ctx.audio_on = config.audio_cues_enabled;
        ctx.first_audio_session &= config.audio_cues_enabled;
        ctx.ball_diameter = config.ball_diameter;
        SimulatedPatient::new(opts.patient, ctx, mix_seed(opts.seed, 2 * generation + 1))
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn session_id(&self) -> u64 {
        self.opts.session_id
    }

    /// Every configured trial has been grasped.
    pub fn session_complete(&self) -> bool {
        self.engine.records().len() as u32 >= self.config.total_trials()
    }

    /// A trial has started and not yet been grasped.
    pub fn trial_in_progress(&self) -> bool {
        !matches!(self.engine.state().phase, Phase::Idle | Phase::Grasped) || self.armed
    }

    fn out(&mut self, kind: MessageType, payload: impl serde::Serialize) -> ProtocolMessage {
        self.out_seq += 1;
        ProtocolMessage::new(kind, self.out_seq, payload)
    }

    fn error(&mut self, code: &str, message: impl Into<String>, path: Option<String>, seq: Option<u64>) -> ProtocolMessage {
        self.out(
            MessageType::Error,
            ErrorPayload {
                code: code.into(),
                message: message.into(),
                path,
                in_reply_to: seq,
            },
        )
    }

    /// Decode one inbound frame and handle it; undecodable frames produce
    /// an ERROR and leave the session unchanged.
    pub fn handle_frame(&mut self, bytes: &[u8]) -> Vec<ProtocolMessage> {
        match frame_decode(bytes) {
            Ok(msg) => self.handle_message(msg),
            Err(e) => vec![self.error("bad_frame", e.to_string(), None, None)],
        }
    }

    pub fn handle_message(&mut self, msg: ProtocolMessage) -> Vec<ProtocolMessage> {
        let seq = msg.seq;
        if let Some(last) = self.last_inbound {
            if seq <= last {
                return vec![self.error(
                    "seq",
                    format!("seq {seq} not greater than {last}"),
                    Some("seq".into()),
                    Some(seq),
                )];
            }
        }
        self.last_inbound = Some(seq);

        if !self.greeted && msg.kind != MessageType::Hello {
            return vec![self.error("handshake", "HELLO required first", None, Some(seq))];
        }
        match msg.kind {
            MessageType::Hello => self.on_hello(&msg),
            MessageType::Configure => self.on_configure(&msg),
            MessageType::StartTrial => self.on_start(seq),
            MessageType::StateEvent => self.on_pose(&msg),
            other => {
                let name = serde_json::to_value(other).expect("enum serializes");
                vec![self.error(
                    "unexpected_type",
                    format!("{} is not accepted from clients", name.as_str().unwrap_or("?")),
                    Some("type".into()),
                    Some(seq),
                )]
            }
        }
    }

    fn on_hello(&mut self, msg: &ProtocolMessage) -> Vec<ProtocolMessage> {
        if let Err(e) = msg.payload_as::<HelloPayload>() {
            return vec![self.error("invalid_payload", e.message, Some(e.path), Some(msg.seq))];
        }
        self.greeted = true;
        let hello = ServerHello {
            server: "graspcue".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            session_id: self.opts.session_id,
            mode: self.config.mode,
        };
        vec![self.out(MessageType::Hello, hello)]
    }

    /// Replaces the configuration and starts a fresh session with it.
    fn on_configure(&mut self, msg: &ProtocolMessage) -> Vec<ProtocolMessage> {
        if self.trial_in_progress() {
            return vec![self.error("busy", "a trial is in progress", None, Some(msg.seq))];
        }
        let config: SessionConfig = match msg.payload_as() {
            Ok(c) => c,
            Err(e) => return vec![self.error("invalid_payload", e.message, Some(e.path), Some(msg.seq))],
        };
        if let Err(e) = config.validate() {
            let path = match &e {
                Error::Config(text) => text.split_once(':').map(|(field, _)| field.trim().to_string()),
                _ => None,
            };
            return vec![self.error("invalid_payload", e.to_string(), path, Some(msg.seq))];
        }
        self.configurations += 1;
        let generation = self.configurations;
        let engine = Engine::new(config.clone(), self.opts.date, mix_seed(self.opts.seed, 2 * generation));
        let patient = Self::make_patient(&self.opts, &config, generation);
        match (engine, patient) {
            (Ok(engine), Ok(patient)) => {
                self.engine = engine;
                self.patient = patient;
                self.script = self.opts.script.clone();
                self.config = config;
                self.armed = false;
                self.last_state_at = None;
                let ack = json!({ "config": self.config });
                vec![self.out(MessageType::ConfigAck, ack)]
            }
            (Err(e), _) | (_, Err(e)) => vec![self.error("invalid_payload", e.to_string(), None, Some(msg.seq))],
        }
    }

    fn on_start(&mut self, seq: u64) -> Vec<ProtocolMessage> {
        if self.session_complete() {
            return vec![self.error("finished", "session complete; CONFIGURE to start another", None, Some(seq))];
        }
        if self.trial_in_progress() {
            return vec![self.error("busy", "a trial is in progress", None, Some(seq))];
        }
        let mut out = Vec::new();
        let events = self.engine.start();
        self.push_events(&events, &mut out);
        self.armed = true;
        self.emit_state(&mut out);

        let driven = match (self.config.mode, self.script.is_some()) {
            (Mode::Simulated, _) => true,
            (Mode::Manual, scripted) => scripted,
        };
        if driven {
            let start = self.engine.now();
            while self.armed {
                if self.engine.now() - start > TRIAL_TIMEOUT {
                    self.armed = false;
                    out.push(self.error("timeout", "trial did not complete", None, Some(seq)));
                    break;
                }
                let ticked = match (&mut self.script, self.config.mode) {
                    (Some(script), Mode::Manual) => self.engine.tick(script as &mut dyn PoseSource),
                    _ => self.engine.tick(&mut self.patient),
                };
                match ticked {
                    Ok(events) => self.after_advance(&events, &mut out),
                    Err(e) => {
                        self.armed = false;
                        out.push(self.error("engine", e.to_string(), None, Some(seq)));
                    }
                }
            }
        }
        out
    }

    fn on_pose(&mut self, msg: &ProtocolMessage) -> Vec<ProtocolMessage> {
        if self.config.mode != Mode::Manual || self.script.is_some() {
            return vec![self.error("mode", "pose input is only accepted in MANUAL mode", None, Some(msg.seq))];
        }
        let input: PoseInput = match msg.payload_as() {
            Ok(p) => p,
            Err(e) => return vec![self.error("invalid_payload", e.message, Some(e.path), Some(msg.seq))],
        };
        if !self.armed {
            return Vec::new();
        }
        let mut out = Vec::new();
        match self.engine.advance(&input.pose, input.t) {
            Ok(events) => self.after_advance(&events, &mut out),
            Err(e) => out.push(self.error("engine", e.to_string(), Some("payload.t".into()), Some(msg.seq))),
        }
        out
    }

    fn after_advance(&mut self, events: &[EngineEvent], out: &mut Vec<ProtocolMessage>) {
        self.emit_state(out);
        self.push_events(events, out);
    }

    fn push_events(&mut self, events: &[EngineEvent], out: &mut Vec<ProtocolMessage>) {
        for e in events {
            if let EngineEvent::TrialCompleted { record } = e {
                self.armed = false;
                let payload = TrialCompletePayload { record: record.clone() };
                out.push(self.out(MessageType::TrialComplete, payload));
                if self.session_complete() {
                    let records = self.engine.records();
                    let times: Vec<f64> = records.iter().map(|r| r.completion).collect();
                    let summary = SessionSummaryPayload {
                        total: times.iter().sum(),
                        log: export_records(records).unwrap_or_default(),
                        times,
                    };
                    out.push(self.out(MessageType::SessionSummary, summary));
                }
            }
        }
    }

    fn emit_state(&mut self, out: &mut Vec<ProtocolMessage>) {
        let now = self.engine.now();
        if self
            .last_state_at
            .is_some_and(|last| now - last < 1.0 / MAX_STATE_RATE - 1e-9)
        {
            return;
        }
        self.last_state_at = Some(now);
        let state = self.engine.state();
        let snapshot = StateSnapshot {
            t: now,
            trial_index: self.engine.trial_index(),
            phase: state.phase,
            countdown_value: state.countdown_value,
            ball: self.engine.ball_center(now),
            elapsed: now - state.phase_entered_at,
        };
        out.push(self.out(MessageType::StateEvent, snapshot));
    }
}

/// Feed a recorded inbound log through a fresh session and collect every
/// outbound message.
pub fn replay(opts: SessionOptions, inbound: &[ProtocolMessage]) -> Result<Vec<ProtocolMessage>> {
    let mut handle = SessionHandle::new(opts)?;
    Ok(inbound.iter().flat_map(|m| handle.handle_message(m.clone())).collect())
}
