use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::arch::{Arch, LayerShape};
use super::NetError;

/// Scalar type the network can run in: `f32` for training, `f64` for gradient checks.
pub trait Real: Float + FromPrimitive + Sum + Default + Debug + Send + Sync + 'static {}
impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub shape: LayerShape,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

/// All weights and biases of a Q-network plus its architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct QParams<T = f32> {
    pub arch: Arch,
    pub layers: Vec<Layer<T>>,
}

/// Post-activation outputs of every layer; `acts[0]` is the input.
pub type Trace<T> = Vec<Vec<T>>;

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    // Eight independent partial sums let the compiler vectorize while the
    // summation order stays fixed.
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail = tail + *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

impl<T: Real> QParams<T> {
    /// He-uniform weights (bound `√(6/fan_in)`), zero biases.
    pub fn init(arch: &Arch, seed: u64) -> Result<Self, NetError> {
        let shapes = arch.resolve()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = shapes
            .into_iter()
            .map(|shape| {
                let bound = (6.0 / shape.fan_in() as f64).sqrt();
                let weights = (0..shape.weight_len())
                    .map(|_| T::from_f64(rng.gen_range(-bound..bound)).unwrap())
                    .collect();
                Layer { shape, weights, bias: vec![T::zero(); shape.bias_len()] }
            })
            .collect();
        Ok(Self { arch: arch.clone(), layers })
    }

    pub fn zeros(arch: &Arch) -> Result<Self, NetError> {
        let layers = arch
            .resolve()?
            .into_iter()
            .map(|shape| Layer {
                shape,
                weights: vec![T::zero(); shape.weight_len()],
                bias: vec![T::zero(); shape.bias_len()],
            })
            .collect();
        Ok(Self { arch: arch.clone(), layers })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            arch: self.arch.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    shape: l.shape,
                    weights: vec![T::zero(); l.weights.len()],
                    bias: vec![T::zero(); l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> QParams<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::from_f64(x.to_f64().unwrap()).unwrap()).collect();
        QParams {
            arch: self.arch.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| Layer { shape: l.shape, weights: conv(&l.weights), bias: conv(&l.bias) })
                .collect(),
        }
    }

    pub fn input_len(&self) -> usize {
        self.arch.input_len()
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map_or(0, |l| l.shape.output_len())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Every parameter tensor in storage order: weights then bias, per layer.
    pub fn tensors(&self) -> impl Iterator<Item = &Vec<T>> {
        self.layers.iter().flat_map(|l| [&l.weights, &l.bias])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Vec<T>> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().all(|t| t.iter().all(|x| x.is_finite()))
    }

    fn check_input(&self, input: &[T]) -> Result<(), NetError> {
        if input.len() != self.input_len() {
            return Err(NetError::Shape(format!(
                "input has {} values, network expects {}",
                input.len(),
                self.input_len()
            )));
        }
        Ok(())
    }

    /// Q-values for one state.
    pub fn forward(&self, input: &[T]) -> Result<Vec<T>, NetError> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        for layer in &self.layers {
            x = layer_forward(layer, &x);
        }
        Ok(x)
    }

    pub fn forward_trace(&self, input: &[T]) -> Result<Trace<T>, NetError> {
        self.check_input(input)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for layer in &self.layers {
            let next = layer_forward(layer, acts.last().unwrap());
            acts.push(next);
        }
        Ok(acts)
    }

    /// Accumulate parameter gradients into `grads` given `d_out = ∂L/∂output`.
    pub fn backward(&self, acts: &Trace<T>, d_out: &[T], grads: &mut QParams<T>) {
        let mut delta = d_out.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let out = &acts[i + 1];
            if layer.shape.relu() {
                for (d, &o) in delta.iter_mut().zip(out) {
                    if o <= T::zero() {
                        *d = T::zero();
                    }
                }
            }
            let need_input_grad = i > 0;
            delta = layer_backward(layer, &acts[i], &delta, &mut grads.layers[i], need_input_grad);
        }
    }

    /// `self += alpha · other`, tensor by tensor.
    pub fn add_scaled(&mut self, alpha: T, other: &QParams<T>) {
        for (a, b) in self.tensors_mut().zip(other.tensors()) {
            axpy(alpha, b, a);
        }
    }
}

fn layer_forward<T: Real>(layer: &Layer<T>, x: &[T]) -> Vec<T> {
    let mut out = match layer.shape {
        LayerShape::Dense { inputs, units, .. } => (0..units)
            .map(|o| layer.bias[o] + dot(&layer.weights[o * inputs..(o + 1) * inputs], x))
            .collect::<Vec<T>>(),
        LayerShape::Conv { in_w, in_c, out_h, out_w, filters, kernel, stride, .. } => {
            let row = kernel * in_c;
            let mut out = vec![T::zero(); out_h * out_w * filters];
            for oy in 0..out_h {
                for ox in 0..out_w {
                    let base = (oy * out_w + ox) * filters;
                    for f in 0..filters {
                        let mut acc = layer.bias[f];
                        for ky in 0..kernel {
                            let src = ((oy * stride + ky) * in_w + ox * stride) * in_c;
                            let w = (f * kernel + ky) * row;
                            acc = acc + dot(&x[src..src + row], &layer.weights[w..w + row]);
                        }
                        out[base + f] = acc;
                    }
                }
            }
            out
        }
    };
    if layer.shape.relu() {
        for v in &mut out {
            if *v < T::zero() {
                *v = T::zero();
            }
        }
    }
    out
}

/// Returns `∂L/∂input` (empty when not requested).
fn layer_backward<T: Real>(layer: &Layer<T>, x: &[T], delta: &[T], grad: &mut Layer<T>, need_input_grad: bool) -> Vec<T> {
    let mut dx = if need_input_grad { vec![T::zero(); x.len()] } else { Vec::new() };
    match layer.shape {
        LayerShape::Dense { inputs, units, .. } => {
            for o in 0..units {
                let d = delta[o];
                if d == T::zero() {
                    continue;
                }
                grad.bias[o] = grad.bias[o] + d;
                axpy(d, x, &mut grad.weights[o * inputs..(o + 1) * inputs]);
                if need_input_grad {
                    axpy(d, &layer.weights[o * inputs..(o + 1) * inputs], &mut dx);
                }
            }
        }
        LayerShape::Conv { in_w, in_c, out_h, out_w, filters, kernel, stride, .. } => {
            let row = kernel * in_c;
            for oy in 0..out_h {
                for ox in 0..out_w {
                    let base = (oy * out_w + ox) * filters;
                    for f in 0..filters {
                        let d = delta[base + f];
                        if d == T::zero() {
                            continue;
                        }
                        grad.bias[f] = grad.bias[f] + d;
                        for ky in 0..kernel {
                            let src = ((oy * stride + ky) * in_w + ox * stride) * in_c;
                            let w = (f * kernel + ky) * row;
                            axpy(d, &x[src..src + row], &mut grad.weights[w..w + row]);
                            if need_input_grad {
                                axpy(d, &layer.weights[w..w + row], &mut dx[src..src + row]);
                            }
                        }
                    }
                }
            }
        }
    }
    dx
}

/// Scale observation bytes to `[0, 1]` network inputs.
pub fn bytes_to_input<T: Real>(bytes: &[u8]) -> Vec<T> {
    let scale = T::from_f64(1.0 / 255.0).unwrap();
    bytes.iter().map(|&b| T::from_u8(b).unwrap() * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnet::arch::LayerSpec;

    fn tiny_arch() -> Arch {
        Arch {
            input: [5, 4, 2],
            layers: vec![
                LayerSpec::Conv { filters: 3, kernel: 2, stride: 1, relu: true },
                LayerSpec::Dense { units: 4, relu: true },
                LayerSpec::Dense { units: 2, relu: false },
            ],
        }
    }

    /// Independent forward oracle: explicit 4-D indexing, no slicing tricks.
    fn oracle_forward(p: &QParams<f64>, input: &[f64]) -> Vec<f64> {
        let [h, w, c] = p.arch.input;
        let mut x = input.to_vec();
        let (mut ch, mut cw, mut cc) = (h, w, c);
        for l in &p.layers {
            let y = match l.shape {
                LayerShape::Conv { filters, kernel, stride, relu, .. } => {
                    let oh = (ch - kernel) / stride + 1;
                    let ow = (cw - kernel) / stride + 1;
                    let mut y = vec![0.0; oh * ow * filters];
                    for oy in 0..oh {
                        for ox in 0..ow {
                            for f in 0..filters {
                                let mut s = l.bias[f];
                                for ky in 0..kernel {
                                    for kx in 0..kernel {
                                        for ic in 0..cc {
                                            let xi = x[((oy * stride + ky) * cw + ox * stride + kx) * cc + ic];
                                            let wi = l.weights[((f * kernel + ky) * kernel + kx) * cc + ic];
                                            s += xi * wi;
                                        }
                                    }
                                }
                                y[(oy * ow + ox) * filters + f] = if relu { s.max(0.0) } else { s };
                            }
                        }
                    }
                    (ch, cw, cc) = (oh, ow, filters);
                    y
                }
                LayerShape::Dense { inputs, units, relu } => {
                    let mut y = vec![0.0; units];
                    for o in 0..units {
                        let mut s = l.bias[o];
                        for j in 0..inputs {
                            s += l.weights[o * inputs + j] * x[j];
                        }
                        y[o] = if relu { s.max(0.0) } else { s };
                    }
                    y
                }
            };
            x = y;
        }
        x
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let arch = Arch::dqn([80, 80, 4], 5);
        let a = QParams::<f32>::init(&arch, 7).unwrap();
        let b = QParams::<f32>::init(&arch, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, QParams::<f32>::init(&arch, 8).unwrap());
        let bound = (6.0f32 / 256.0).sqrt();
        assert!(a.layers[0].weights.iter().all(|w| w.abs() <= bound));
        assert!(a.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        assert_eq!(a.forward(&vec![0.5; 80 * 80 * 4]).unwrap().len(), 5);
    }

    #[test]
    fn zero_params_give_zero_output() {
        let p = QParams::<f32>::zeros(&Arch::dqn([80, 80, 4], 5)).unwrap();
        assert_eq!(p.forward(&vec![0.3; 25600]).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn identity_dense_layer() {
        let arch = Arch { input: [1, 1, 3], layers: vec![LayerSpec::Dense { units: 3, relu: false }] };
        let mut p = QParams::<f32>::zeros(&arch).unwrap();
        for i in 0..3 {
            p.layers[0].weights[i * 3 + i] = 1.0;
        }
        assert_eq!(p.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn matches_hand_rolled_oracle() {
        let p = QParams::<f64>::init(&tiny_arch(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = p.forward(&x).unwrap();
            let want = oracle_forward(&p, &x);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-5, "{g} vs {w}");
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = QParams::<f32>::init(&tiny_arch(), 1).unwrap();
        assert!(matches!(p.forward(&[0.0; 3]), Err(NetError::Shape(_))));
    }

    #[test]
    fn relu_outputs_are_nonnegative() {
        let p = QParams::<f32>::init(&tiny_arch(), 5).unwrap();
        let x: Vec<f32> = (0..40).map(|i| (i as f32 * 0.37).sin()).collect();
        let acts = p.forward_trace(&x).unwrap();
        for (layer, act) in p.layers.iter().zip(&acts[1..]) {
            if layer.shape.relu() {
                assert!(act.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn dot_matches_naive_sum() {
        let a: Vec<f64> = (0..37).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..37).map(|i| 1.0 - i as f64 * 0.1).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-9);
    }
}
