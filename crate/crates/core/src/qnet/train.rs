use super::net::{QParams, Real};
use super::NetError;
use crate::par;

/// Samples per gradient chunk. Fixed so the reduction order never depends on
/// how many threads are available.
const GRAD_CHUNK: usize = 8;

/// Training batch: `states` is `n × input_len`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T = f32> {
    pub states: Vec<T>,
    pub actions: Vec<usize>,
    pub targets: Vec<T>,
}

impl<T: Real> Batch<T> {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    fn validate(&self, params: &QParams<T>) -> Result<(), NetError> {
        let n = self.actions.len();
        if n == 0 || self.targets.len() != n || self.states.len() != n * params.input_len() {
            return Err(NetError::Shape(format!(
                "batch of {n} actions, {} targets, {} state values (input_len {})",
                self.targets.len(),
                self.states.len(),
                params.input_len()
            )));
        }
        let actions = params.output_len();
        if let Some(&a) = self.actions.iter().find(|&&a| a >= actions) {
            return Err(NetError::Shape(format!("action {a} out of range for {actions} outputs")));
        }
        Ok(())
    }

    pub fn state(&self, i: usize, input_len: usize) -> &[T] {
        &self.states[i * input_len..(i + 1) * input_len]
    }
}

/// Mean squared error on the taken actions and its gradient.
///
/// `L = (1/N) Σ (Q(sᵢ)[aᵢ] − yᵢ)²`; only the selected output receives gradient.
pub fn loss_and_grad<T: Real>(params: &QParams<T>, batch: &Batch<T>) -> Result<(T, QParams<T>), NetError> {
    batch.validate(params)?;
    let n = batch.len();
    let input_len = params.input_len();
    let scale = T::from_f64(2.0 / n as f64).unwrap();
    let indices: Vec<usize> = (0..n).collect();
    let partials = par::map_chunks(&indices, GRAD_CHUNK, |chunk| {
        let mut grads = params.zeros_like();
        let mut loss = T::zero();
        for &i in chunk {
            let acts = params.forward_trace(batch.state(i, input_len))?;
            let q = acts.last().unwrap();
            let err = q[batch.actions[i]] - batch.targets[i];
            loss = loss + err * err;
            let mut d_out = vec![T::zero(); q.len()];
            d_out[batch.actions[i]] = scale * err;
            params.backward(&acts, &d_out, &mut grads);
        }
        Ok::<_, NetError>((loss, grads))
    });
    let mut total = T::zero();
    let mut grads = params.zeros_like();
    for part in partials {
        let (loss, g) = part?;
        total = total + loss;
        grads.add_scaled(T::one(), &g);
    }
    Ok((total / T::from_usize(n).unwrap(), grads))
}

pub fn loss<T: Real>(params: &QParams<T>, batch: &Batch<T>) -> Result<T, NetError> {
    batch.validate(params)?;
    let input_len = params.input_len();
    let mut total = T::zero();
    for i in 0..batch.len() {
        let q = params.forward(batch.state(i, input_len))?;
        let err = q[batch.actions[i]] - batch.targets[i];
        total = total + err * err;
    }
    Ok(total / T::from_usize(batch.len()).unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First/second moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T = f32> {
    pub config: AdamConfig,
    pub step: u64,
    pub m: QParams<T>,
    pub v: QParams<T>,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &QParams<T>) -> Self {
        Self {
            config: AdamConfig::default(),
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn apply(&mut self, params: &mut QParams<T>, grads: &QParams<T>, lr: f64) {
        self.step += 1;
        let c = self.config;
        let b1 = T::from_f64(c.beta1).unwrap();
        let b2 = T::from_f64(c.beta2).unwrap();
        let one = T::one();
        let eps = T::from_f64(c.epsilon).unwrap();
        let bias1 = T::from_f64(1.0 - c.beta1.powi(self.step as i32)).unwrap();
        let bias2 = T::from_f64(1.0 - c.beta2.powi(self.step as i32)).unwrap();
        let lr = T::from_f64(lr).unwrap();
        let tensors = params
            .tensors_mut()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut().zip(self.v.tensors_mut()));
        for ((p, g), (m, v)) in tensors {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (one - b1) * gi;
                v[i] = b2 * v[i] + (one - b2) * gi * gi;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

/// One Adam step on the squared-error loss. Returns the pre-update loss.
pub fn train_batch<T: Real>(
    params: &mut QParams<T>,
    batch: &Batch<T>,
    lr: f64,
    opt: &mut AdamState<T>,
) -> Result<T, NetError> {
    let (loss, grads) = loss_and_grad(params, batch)?;
    if !loss.is_finite() {
        return Err(NetError::Divergence(format!("non-finite loss {loss:?}")));
    }
    opt.apply(params, &grads, lr);
    Ok(loss)
}
