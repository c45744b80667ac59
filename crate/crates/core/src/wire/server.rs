use std::io::{self, BufRead, BufReader, ErrorKind, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use super::{decode_message, encode_message, ErrorCode, WireError, WireInfo, WireMessage, MAX_LINE, PROTOCOL_VERSION};
use crate::env::{EnvError, Environment};

const POLL: Duration = Duration::from_millis(100);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SessionState {
    AwaitingHelloAck,
    Ready,
    EpisodeActive,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionEnd {
    /// The client sent `close`.
    Closed,
    /// The client hung up.
    Disconnected,
    /// The shutdown flag was raised.
    Shutdown,
}

fn env_error(e: EnvError) -> WireError {
    match e {
        EnvError::NotReset | EnvError::EpisodeDone => WireError::new(ErrorCode::BadState, e.to_string()),
        EnvError::InvalidAction { .. } => WireError::new(ErrorCode::BadField, e.to_string()),
        other => WireError::new(ErrorCode::Internal, other.to_string()),
    }
}

struct Session<'a, E: ?Sized> {
    env: &'a mut E,
    state: SessionState,
}

impl<E: Environment + ?Sized> Session<'_, E> {
    fn hello(&mut self) -> WireMessage {
        self.state = SessionState::Ready;
        WireMessage::Hello {
            protocol_version: PROTOCOL_VERSION,
            action_count: self.env.action_count(),
            obs_shape: self.env.observation_shape(),
        }
    }

    fn handle(&mut self, line: &str) -> Option<WireMessage> {
        let result = decode_message(line).and_then(|msg| self.dispatch(msg));
        match result {
            Ok(reply) => reply,
            Err(e) => Some(e.to_message()),
        }
    }

    fn dispatch(&mut self, msg: WireMessage) -> Result<Option<WireMessage>, WireError> {
        match (msg, self.state) {
            (WireMessage::Close, _) => {
                self.state = SessionState::Closed;
                Ok(None)
            }
            (WireMessage::Reset { seed }, SessionState::Ready | SessionState::EpisodeActive) => {
                let obs = self.env.reset(seed).map_err(env_error)?;
                self.state = SessionState::EpisodeActive;
                let info = self.env.info();
                Ok(Some(WireMessage::obs(&obs.data, obs.shape, 0.0, false, WireInfo { cte: info.cte, laps: info.laps })))
            }
            (WireMessage::Step { action }, SessionState::EpisodeActive) => {
                if self.env.is_game_over() {
                    return Err(WireError::new(ErrorCode::BadState, "episode is over; send reset"));
                }
                let r = self.env.step(action).map_err(env_error)?;
                let info = WireInfo { cte: r.info.cte, laps: r.info.laps };
                Ok(Some(WireMessage::obs(&r.observation.data, r.observation.shape, r.reward, r.done, info)))
            }
            (WireMessage::Step { .. }, _) => Err(WireError::new(ErrorCode::BadState, "step before reset")),
            (WireMessage::Reset { .. }, state) => {
                Err(WireError::new(ErrorCode::BadState, format!("reset not allowed in state {state:?}")))
            }
            (other, _) => Err(WireError::new(
                ErrorCode::BadType,
                format!("{} is a server message", serde_json::to_value(&other).unwrap()["type"]),
            )),
        }
    }
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut)
}

/// Run one session over any byte stream: send `hello`, then answer each
/// request line until `close`, end of input, or `shutdown`.
///
/// With a reader that times out, the shutdown flag is polled between reads.
pub fn serve_session<E, R, W>(env: &mut E, reader: R, mut writer: W, shutdown: &AtomicBool) -> io::Result<SessionEnd>
where
    E: Environment + ?Sized,
    R: BufRead,
    W: Write,
{
    let mut session = Session { env, state: SessionState::AwaitingHelloAck };
    let hello = session.hello();
    writer.write_all(encode_message(&hello).as_bytes())?;
    writer.flush()?;

    let mut reader = reader.take(MAX_LINE as u64 + 1);
    let mut buf = Vec::new();
    loop {
        if shutdown.load(Ordering::Relaxed) {
            return Ok(SessionEnd::Shutdown);
        }
        reader.set_limit(MAX_LINE as u64 + 1 - buf.len() as u64);
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) if buf.is_empty() || reader.limit() > 0 => return Ok(SessionEnd::Disconnected),
            Ok(_) => {}
            Err(e) if is_timeout(&e) => continue,
            Err(e) if e.kind() == ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        }
        if buf.last() != Some(&b'\n') {
            if buf.len() > MAX_LINE {
                let err = WireError::new(ErrorCode::BadJson, format!("line longer than {MAX_LINE} bytes"));
                writer.write_all(encode_message(&err.to_message()).as_bytes())?;
                writer.flush()?;
                return Ok(SessionEnd::Disconnected);
            }
            // Timed out mid-line or hit end of input without a newline.
            continue;
        }
        let line = String::from_utf8_lossy(&buf).into_owned();
        buf.clear();
        if line.trim().is_empty() {
            continue;
        }
        match session.handle(&line) {
            Some(reply) => {
                writer.write_all(encode_message(&reply).as_bytes())?;
                writer.flush()?;
            }
            None => return Ok(SessionEnd::Closed),
        }
    }
}

/// TCP front end: one client at a time, sessions run on the calling thread.
pub struct Server {
    listener: TcpListener,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        Ok(Self { listener })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Wait for a client, polling `shutdown`. `None` means shutdown was requested.
    fn accept(&self, shutdown: &AtomicBool) -> io::Result<Option<(TcpStream, SocketAddr)>> {
        loop {
            if shutdown.load(Ordering::Relaxed) {
                return Ok(None);
            }
            match self.listener.accept() {
                Ok(pair) => return Ok(Some(pair)),
                Err(e) if is_timeout(&e) => std::thread::sleep(POLL),
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e),
            }
        }
    }

    /// Serve a single client to completion.
    pub fn serve_one<E: Environment + ?Sized>(&self, env: &mut E, shutdown: &AtomicBool) -> io::Result<SessionEnd> {
        let Some((stream, peer)) = self.accept(shutdown)? else {
            return Ok(SessionEnd::Shutdown);
        };
        log::info!("client {peer} connected");
        stream.set_nonblocking(false)?;
        stream.set_read_timeout(Some(POLL))?;
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        let end = serve_session(env, reader, &stream, shutdown);
        match &end {
            Ok(how) => log::info!("client {peer} session ended: {how:?}"),
            Err(e) => log::warn!("client {peer} session failed: {e}"),
        }
        end
    }

    /// Serve clients one after another until `shutdown` is raised. Client I/O
    /// errors end only that client's session.
    pub fn serve_forever<E: Environment + ?Sized>(&self, env: &mut E, shutdown: &AtomicBool) -> io::Result<()> {
        loop {
            match self.serve_one(env, shutdown) {
                Ok(SessionEnd::Shutdown) => return Ok(()),
                Ok(_) | Err(_) if !shutdown.load(Ordering::Relaxed) => {}
                _ => return Ok(()),
            }
        }
    }
}
