//! Simulated neglect patient: a latency model, a pose source that drives the
//! engine with it, and the bundled patient presets.

mod model;
mod presets;
mod program;

pub use model::*;
pub use presets::{Preset, PRESET_NAMES};
pub use program::{
    rows_from_csv, rows_to_csv, rows_to_sessions, simulate_program, DatasetRow, ProgramSchedule,
    ScheduledSession, SimulatedDataset, SimulatedPatient,
};
pub(crate) use program::mix_seed;
