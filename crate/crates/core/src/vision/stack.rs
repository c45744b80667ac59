use std::collections::VecDeque;

use super::frame::Frame;
use super::VisionError;

pub const STACK_DEPTH: usize = 4;

/// The four most recent frames, oldest first.
#[derive(Debug, Clone)]
pub struct ObservationStack {
    width: usize,
    height: usize,
    frames: VecDeque<Frame>,
}

impl ObservationStack {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, frames: VecDeque::with_capacity(STACK_DEPTH) }
    }

    /// `(height, width, channels)` of the stacked tensor.
    pub fn shape(&self) -> [usize; 3] {
        [self.height, self.width, STACK_DEPTH]
    }

    /// Push a frame (or refill all slots on `reset`) and return the
    /// interleaved `(h, w, 4)` tensor, channel 0 being the oldest frame.
    pub fn push(&mut self, frame: Frame, reset: bool) -> Result<Vec<u8>, VisionError> {
        if (frame.width, frame.height) != (self.width, self.height) {
            return Err(VisionError::SizeMismatch {
                expected: self.width * self.height,
                actual: frame.width * frame.height,
            });
        }
        if reset || self.frames.is_empty() {
            self.frames.clear();
            for _ in 1..STACK_DEPTH {
                self.frames.push_back(frame.clone());
            }
            self.frames.push_back(frame);
        } else {
            self.frames.pop_front();
            self.frames.push_back(frame);
        }
        Ok(self.tensor())
    }

    pub fn tensor(&self) -> Vec<u8> {
        let n = self.width * self.height;
        let mut out = vec![0u8; n * STACK_DEPTH];
        for (c, f) in self.frames.iter().enumerate() {
            for (i, &p) in f.pixels.iter().enumerate() {
                out[i * STACK_DEPTH + c] = p;
            }
        }
        out
    }
}
