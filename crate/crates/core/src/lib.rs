//! Headless engine for a VR ball-grasping task used in visuospatial neglect
//! rehabilitation: spatialized cueing, trial state machine, a simulated
//! patient, completion-time analysis, clinical scoring and a session-control
//! protocol.

pub mod analysis;
pub mod assessments;
pub mod batch;
pub mod cue;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod patient;
pub mod service;

pub use error::{Error, Result};
