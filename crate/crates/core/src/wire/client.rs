use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};

use super::{decode_message, encode_message, WireMessage, PROTOCOL_VERSION};
use crate::env::{EnvError, Environment, Observation, StepInfo, StepResult};

/// An environment on the far side of a wire connection.
pub struct RemoteEnv {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    action_count: usize,
    obs_shape: [usize; 3],
    info: StepInfo,
    ready: bool,
    done: bool,
}

fn remote(e: impl std::fmt::Display) -> EnvError {
    EnvError::Remote(e.to_string())
}

impl RemoteEnv {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut env = Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
            action_count: 0,
            obs_shape: [0; 3],
            info: StepInfo::default(),
            ready: false,
            done: true,
        };
        match env.receive().map_err(io::Error::other)? {
            WireMessage::Hello { protocol_version: PROTOCOL_VERSION, action_count, obs_shape } => {
                env.action_count = action_count;
                env.obs_shape = obs_shape;
                Ok(env)
            }
            other => Err(io::Error::other(format!("expected hello, got {other:?}"))),
        }
    }

    fn receive(&mut self) -> Result<WireMessage, EnvError> {
        let mut line = String::new();
        if self.reader.read_line(&mut line).map_err(remote)? == 0 {
            return Err(remote("server closed the connection"));
        }
        decode_message(&line).map_err(remote)
    }

    /// Send one request and wait for its reply.
    pub fn request(&mut self, msg: &WireMessage) -> Result<WireMessage, EnvError> {
        self.writer.write_all(encode_message(msg).as_bytes()).map_err(remote)?;
        self.receive()
    }

    pub fn close(mut self) -> io::Result<()> {
        self.writer.write_all(encode_message(&WireMessage::Close).as_bytes())?;
        self.writer.shutdown(std::net::Shutdown::Write)
    }

    fn reply_to_step(&mut self, reply: WireMessage) -> Result<StepResult, EnvError> {
        let frame = reply.frame_bytes();
        match reply {
            WireMessage::Obs { shape, reward, done, info, .. } => {
                self.info.cte = info.cte;
                self.info.laps = info.laps;
                Ok(StepResult { observation: Observation::new(shape, frame.unwrap_or_default()), reward, done, info: self.info })
            }
            WireMessage::Error { code, message } => Err(EnvError::Remote(format!("{code}: {message}"))),
            other => Err(remote(format!("unexpected reply {other:?}"))),
        }
    }
}

impl Environment for RemoteEnv {
    fn action_count(&self) -> usize {
        self.action_count
    }

    fn observation_shape(&self) -> [usize; 3] {
        self.obs_shape
    }

    fn reset(&mut self, seed: Option<u64>) -> Result<Observation, EnvError> {
        let reply = self.request(&WireMessage::Reset { seed })?;
        let r = self.reply_to_step(reply)?;
        self.ready = true;
        self.done = false;
        Ok(r.observation)
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        let reply = self.request(&WireMessage::Step { action })?;
        let r = self.reply_to_step(reply)?;
        self.done = r.done;
        Ok(r)
    }

    fn is_game_over(&self) -> bool {
        !self.ready || self.done
    }

    /// Only `cte` and `laps` travel over the wire; the other fields stay zero.
    fn info(&self) -> StepInfo {
        self.info
    }
}
