use rand::Rng;

use super::AgentError;
use crate::env::Observation;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action: usize,
    pub reward: f32,
    pub next_state: Observation,
    pub done: bool,
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten once full.
///
/// Consecutive transitions share their observation buffers, so each frame
/// stack is stored once.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    shape: [usize; 3],
    items: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, shape: [usize; 3]) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, shape, items: Vec::with_capacity(capacity.min(1 << 16)), cursor: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) -> Result<(), AgentError> {
        for shape in [t.state.shape, t.next_state.shape] {
            if shape != self.shape {
                return Err(AgentError::ShapeMismatch { expected: self.shape, actual: shape });
            }
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Uniform sampling with replacement.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<&Transition>, AgentError> {
        if self.items.len() < n {
            return Err(AgentError::InsufficientData { size: self.items.len(), requested: n });
        }
        Ok((0..n).map(|_| &self.items[rng.gen_range(0..self.items.len())]).collect())
    }

    /// Stored transitions in insertion order, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity { 0 } else { self.cursor };
        self.items[split..].iter().chain(&self.items[..split])
    }
}
