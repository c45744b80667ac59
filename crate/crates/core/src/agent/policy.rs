use rand::Rng;

use super::replay::Transition;
use super::AgentError;
use crate::par;
use crate::qnet::{bytes_to_input, QParams};

/// Index of the largest value, ties going to the lowest index.
pub fn argmax(q: &[f32]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in q.iter().enumerate() {
        match best {
            Some(b) if v <= q[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Epsilon-greedy choice. One uniform draw decides between exploring and
/// exploiting; exploring costs a second draw for the action.
pub fn select_action<R: Rng>(q: &[f32], epsilon: f64, rng: &mut R) -> Result<usize, AgentError> {
    select_action_with(q.len(), epsilon, rng, || Ok(q.to_vec()))
}

/// Same draws as [`select_action`], but the q-values are only computed when
/// the greedy branch is taken.
pub fn select_action_with<R, F>(actions: usize, epsilon: f64, rng: &mut R, q: F) -> Result<usize, AgentError>
where
    R: Rng,
    F: FnOnce() -> Result<Vec<f32>, AgentError>,
{
    if actions == 0 {
        return Err(AgentError::EmptyQ);
    }
    if rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(0..actions));
    }
    let q = q()?;
    argmax(&q).ok_or(AgentError::EmptyQ)
}

/// Linear decay from `start` to `end` over `decay_steps`, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn at(&self, step: u64) -> f64 {
        if step >= self.decay_steps {
            return self.end;
        }
        self.start + (self.end - self.start) * (step as f64 / self.decay_steps as f64)
    }
}

/// `Σ γᵏ rₖ`, accumulated from the back.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |acc, &r| r + gamma * acc)
}

/// Double-Q bootstrap targets: the online network picks `a* = argmax Q(s′)`,
/// the target network values it. Terminal transitions use the reward alone.
pub fn ddqn_targets(
    batch: &[&Transition],
    online: &QParams,
    target: &QParams,
    gamma: f32,
) -> Result<Vec<f32>, AgentError> {
    let ys = par::map_indexed(batch.len(), |i| {
        let t = batch[i];
        if t.done {
            return Ok(t.reward);
        }
        let x = bytes_to_input::<f32>(&t.next_state.data);
        let q_online = online.forward(&x)?;
        let a = argmax(&q_online).ok_or(AgentError::EmptyQ)?;
        let q_target = target.forward(&x)?;
        if !q_online.iter().all(|v| v.is_finite()) || !q_target[a].is_finite() {
            return Err(AgentError::NonFiniteQ);
        }
        Ok(t.reward + gamma * q_target[a])
    });
    ys.into_iter().collect()
}
