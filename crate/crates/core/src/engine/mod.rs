//! Trial state machine, ball kinematics, grasp detection and session logs.

mod config;
mod fsm;
pub mod kinematics;
mod log;

pub use config::{Mode, SessionConfig, SpawnDirection, TrialCountMode};
pub use fsm::{
    AvatarPose, Engine, EngineEvent, EngineView, Phase, PoseSource, ScriptedPoses, TrialRecord, TrialState,
};
pub use kinematics::{ball_height, check_grasp, check_proximity_pause, gaze_on_center};
pub use log::{export_records, export_session_log, parse_session_log, SessionLog, NO_CUE};
