use std::io::{BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;

use super::protocol::{frame_encode, read_frame, ProtocolMessage};
use super::session::{SessionHandle, SessionOptions};
use crate::error::{Error, Result};

/// Environment variable holding the default listening port.
pub const PORT_ENV: &str = "GRASPCUE_PORT";
pub const DEFAULT_PORT: u16 = 7878;

pub fn default_port() -> u16 {
    std::env::var(PORT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_PORT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transport {
    /// Newline-delimited frames over a raw TCP stream.
    #[default]
    Tcp,
    /// One frame per WebSocket text message, for browser clients.
    WebSocket,
}

/// Accept connections forever, one thread and one session per connection.
/// `options` builds the per-connection session settings from its id.
pub fn serve<A, F>(addr: A, transport: Transport, options: F) -> Result<()>
where
    A: ToSocketAddrs,
    F: Fn(u64) -> SessionOptions + Send + Sync + 'static,
{
    let listener = TcpListener::bind(addr)?;
    serve_listener(listener, transport, options)
}

pub fn serve_listener<F>(listener: TcpListener, transport: Transport, options: F) -> Result<()>
where
    F: Fn(u64) -> SessionOptions + Send + Sync + 'static,
{
    log::info!("listening on {} ({transport:?})", listener.local_addr()?);
    let options = Arc::new(options);
    let next_id = AtomicU64::new(1);
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let id = next_id.fetch_add(1, Ordering::Relaxed);
        let opts = options(id);
        thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            let result = match transport {
                Transport::Tcp => run_tcp(stream, opts),
                Transport::WebSocket => run_ws(stream, opts),
            };
            match result {
                Ok(()) => log::info!("session {id} ({peer:?}) closed"),
                Err(e) => log::warn!("session {id} ({peer:?}) ended: {e}"),
            }
        });
    }
    Ok(())
}

fn write_all(out: &mut impl Write, messages: &[ProtocolMessage]) -> Result<()> {
    for m in messages {
        out.write_all(&frame_encode(m)?)?;
    }
    out.flush()?;
    Ok(())
}

/// Serve one session over a byte stream until the peer closes it.
pub fn run_tcp(stream: TcpStream, opts: SessionOptions) -> Result<()> {
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut handle = SessionHandle::new(opts)?;
    loop {
        let replies = match read_frame(&mut reader) {
            Ok(None) => return Ok(()),
            Ok(Some(line)) if line.iter().all(u8::is_ascii_whitespace) => continue,
            Ok(Some(line)) => handle.handle_frame(&line),
            Err(Error::Frame(msg)) => handle.handle_frame(msg.as_bytes()),
            Err(e) => return Err(e),
        };
        write_all(&mut writer, &replies)?;
    }
}

pub fn run_ws(stream: TcpStream, opts: SessionOptions) -> Result<()> {
    use tungstenite::Message;
    let mut socket = tungstenite::accept(stream).map_err(|e| Error::Frame(e.to_string()))?;
    let mut handle = SessionHandle::new(opts)?;
    loop {
        let incoming = match socket.read() {
            Ok(m) => m,
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(Error::Frame(e.to_string())),
        };
        let replies = match incoming {
            Message::Text(text) => handle.handle_frame(text.as_bytes()),
            Message::Binary(bytes) => handle.handle_frame(&bytes),
            Message::Close(_) => return Ok(()),
            _ => continue,
        };
        for m in replies {
            let mut bytes = frame_encode(&m)?;
            bytes.pop();
            let text = String::from_utf8(bytes).expect("json is utf-8");
            socket
                .send(Message::text(text))
                .map_err(|e| Error::Frame(e.to_string()))?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service::protocol::{frame_decode, MessageType};
    use serde_json::json;
    use std::io::BufRead;

    #[test]
    fn tcp_round_trip_on_loopback() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        thread::spawn(move || serve_listener(listener, Transport::Tcp, |id| SessionOptions {
            session_id: id,
            ..Default::default()
        }));
        let stream = TcpStream::connect(addr).unwrap();
        let mut w = stream.try_clone().unwrap();
        let mut r = BufReader::new(stream);
        let send = |w: &mut TcpStream, kind, seq, payload| {
            w.write_all(&frame_encode(&ProtocolMessage::new(kind, seq, payload)).unwrap()).unwrap();
        };
        send(&mut w, MessageType::Hello, 1, json!({}));
        let mut line = String::new();
        r.read_line(&mut line).unwrap();
        assert_eq!(frame_decode(line.as_bytes()).unwrap().kind, MessageType::Hello);

        w.write_all(b"garbage\n").unwrap();
        line.clear();
        r.read_line(&mut line).unwrap();
        assert_eq!(frame_decode(line.as_bytes()).unwrap().kind, MessageType::Error);

        send(&mut w, MessageType::Configure, 2, json!({"num_trials": 1}));
        line.clear();
        r.read_line(&mut line).unwrap();
        assert_eq!(frame_decode(line.as_bytes()).unwrap().kind, MessageType::ConfigAck);
    }

    #[test]
    fn port_from_environment() {
        // only reads; the variable is not set in the test environment
        if std::env::var(PORT_ENV).is_err() {
            assert_eq!(default_port(), DEFAULT_PORT);
        }
    }
}
