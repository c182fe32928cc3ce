use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{AvatarPose, Phase, TrialRecord};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Largest accepted frame, newline excluded.
pub const MAX_FRAME: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MessageType {
    Hello,
    Configure,
    ConfigAck,
    StartTrial,
    StateEvent,
    TrialComplete,
    SessionSummary,
    Error,
}

impl MessageType {
    pub const ALL: [MessageType; 8] = [
        MessageType::Hello,
        MessageType::Configure,
        MessageType::ConfigAck,
        MessageType::StartTrial,
        MessageType::StateEvent,
        MessageType::TrialComplete,
        MessageType::SessionSummary,
        MessageType::Error,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolMessage {
    #[serde(rename = "type")]
    pub kind: MessageType,
    pub seq: u64,
    #[serde(default)]
    pub payload: Value,
}

impl ProtocolMessage {
    pub fn new(kind: MessageType, seq: u64, payload: impl Serialize) -> Self {
        Self {
            kind,
            seq,
            payload: serde_json::to_value(payload).expect("payload types serialize"),
        }
    }

    /// Decode the payload into `T`, reporting the failing field path.
    pub fn payload_as<T: serde::de::DeserializeOwned>(&self) -> std::result::Result<T, PayloadError> {
        let payload = if self.payload.is_null() {
            Value::Object(Default::default())
        } else {
            self.payload.clone()
        };
        serde_path_to_error::deserialize(payload).map_err(|e| PayloadError {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayloadError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelloPayload {
    #[serde(default)]
    pub client: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerHello {
    pub server: String,
    pub version: String,
    pub session_id: u64,
    pub mode: crate::engine::Mode,
}

/// Outbound engine snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub t: f64,
    pub trial_index: u32,
    pub phase: Phase,
    pub countdown_value: u8,
    pub ball: Option<Point3>,
    /// Seconds since the current phase began.
    pub elapsed: f64,
}

/// Inbound pose sample in manual mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseInput {
    pub t: f64,
    pub pose: AvatarPose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialCompletePayload {
    pub record: TrialRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummaryPayload {
    pub times: Vec<f64>,
    pub total: f64,
    /// The session's `.txt` log.
    pub log: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Seq of the inbound message that caused the error, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_reply_to: Option<u64>,
}

/// One JSON object followed by `\n`. Newlines inside strings are escaped by
/// the encoder, so a frame never spans lines.
pub fn frame_encode(msg: &ProtocolMessage) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec(msg).map_err(|e| Error::Frame(e.to_string()))?;
    if bytes.len() > MAX_FRAME {
        return Err(Error::Frame(format!("frame of {} bytes exceeds {MAX_FRAME}", bytes.len())));
    }
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn frame_decode(bytes: &[u8]) -> Result<ProtocolMessage> {
    let line = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    if line.len() > MAX_FRAME {
        return Err(Error::Frame(format!("frame of {} bytes exceeds {MAX_FRAME}", line.len())));
    }
    if line.contains(&b'\n') {
        return Err(Error::Frame("frame contains a raw newline".into()));
    }
    let text = std::str::from_utf8(line).map_err(|e| Error::Frame(format!("invalid utf-8: {e}")))?;
    serde_json::from_str(text).map_err(|e| Error::Frame(e.to_string()))
}

/// Read one newline-terminated frame. Oversize lines are consumed through
/// their newline and reported as an error so the stream stays aligned.
/// Returns `Ok(None)` at end of stream.
pub fn read_frame<R: BufRead>(reader: &mut R) -> Result<Option<Vec<u8>>> {
    let mut line = Vec::new();
    let mut oversize = false;
    loop {
        let buf = reader.fill_buf()?;
        if buf.is_empty() {
            if line.is_empty() && !oversize {
                return Ok(None);
            }
            break;
        }
        let (chunk, done) = match buf.iter().position(|b| *b == b'\n') {
            Some(i) => (&buf[..=i], true),
            None => (buf, false),
        };
        let used = chunk.len();
        if !oversize {
            line.extend_from_slice(chunk);
            if line.len() > MAX_FRAME + 2 {
                oversize = true;
                line.clear();
            }
        }
        reader.consume(used);
        if done {
            break;
        }
    }
    if oversize {
        return Err(Error::Frame(format!("frame exceeds {MAX_FRAME} bytes")));
    }
    Ok(Some(line))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;
    use std::io::Cursor;

    #[test]
    fn every_type_round_trips() {
        for (i, kind) in MessageType::ALL.into_iter().enumerate() {
            let msg = ProtocolMessage::new(kind, i as u64 + 1, json!({"k": [1, 2.5, "x"]}));
            let bytes = frame_encode(&msg).unwrap();
            assert_eq!(bytes.iter().filter(|b| **b == b'\n').count(), 1);
            assert_eq!(frame_decode(&bytes).unwrap(), msg);
        }
    }

    #[test]
    fn wire_names() {
        let msg = ProtocolMessage::new(MessageType::ConfigAck, 3, json!({}));
        let text = String::from_utf8(frame_encode(&msg).unwrap()).unwrap();
        assert_eq!(text, "{\"type\":\"CONFIG_ACK\",\"seq\":3,\"payload\":{}}\n");
    }

    #[test]
    fn embedded_newline_stays_on_one_line() {
        let msg = ProtocolMessage::new(MessageType::Error, 1, json!({"message": "a\nb"}));
        let bytes = frame_encode(&msg).unwrap();
        assert_eq!(bytes.iter().position(|b| *b == b'\n'), Some(bytes.len() - 1));
        assert_eq!(frame_decode(&bytes).unwrap().payload["message"], "a\nb");
    }

    #[test]
    fn oversize_rejected() {
        let msg = ProtocolMessage::new(MessageType::Hello, 1, json!({"pad": "x".repeat(MAX_FRAME)}));
        assert!(frame_encode(&msg).is_err());
        assert!(frame_decode(&vec![b' '; MAX_FRAME + 1]).is_err());
    }

    #[test]
    fn truncated_frame_then_recovery() {
        let good = frame_encode(&ProtocolMessage::new(MessageType::Hello, 2, json!({}))).unwrap();
        let mut stream = b"{\"type\":\"HELLO\",\"se\n".to_vec();
        stream.extend_from_slice(&good);
        let mut r = Cursor::new(stream);
        let first = read_frame(&mut r).unwrap().unwrap();
        assert!(frame_decode(&first).is_err());
        let second = read_frame(&mut r).unwrap().unwrap();
        assert_eq!(frame_decode(&second).unwrap().seq, 2);
        assert!(read_frame(&mut r).unwrap().is_none());
    }

    #[test]
    fn oversize_line_skipped() {
        let mut stream = vec![b'x'; MAX_FRAME * 2];
        stream.push(b'\n');
        stream.extend_from_slice(&frame_encode(&ProtocolMessage::new(MessageType::Hello, 9, json!({}))).unwrap());
        let mut r = std::io::BufReader::with_capacity(1024, Cursor::new(stream));
        assert!(read_frame(&mut r).is_err());
        let next = read_frame(&mut r).unwrap().unwrap();
        assert_eq!(frame_decode(&next).unwrap().seq, 9);
    }

    #[test]
    fn unknown_type_is_decode_error() {
        assert!(frame_decode(b"{\"type\":\"REBOOT\",\"seq\":1,\"payload\":{}}").is_err());
        assert!(frame_decode(b"not json").is_err());
    }

    #[test]
    fn missing_payload_defaults_to_null() {
        let m = frame_decode(b"{\"type\":\"START_TRIAL\",\"seq\":4}").unwrap();
        assert!(m.payload.is_null());
        let h: HelloPayload = m.payload_as().unwrap();
        assert_eq!(h.client, None);
    }
}
