//! Session-control service: a newline-delimited JSON protocol over TCP or
//! WebSocket that drives one engine per connection.

mod protocol;
mod server;
mod session;

pub use protocol::{
    frame_decode, frame_encode, read_frame, ErrorPayload, HelloPayload, MessageType, PayloadError, PoseInput,
    ProtocolMessage, ServerHello, SessionSummaryPayload, StateSnapshot, TrialCompletePayload, MAX_FRAME,
};
pub use server::{default_port, run_tcp, run_ws, serve, serve_listener, Transport, DEFAULT_PORT, PORT_ENV};
pub use session::{replay, SessionHandle, SessionOptions, MAX_STATE_RATE};
