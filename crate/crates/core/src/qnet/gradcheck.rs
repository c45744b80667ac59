use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::net::{QParams, Real};
use super::train::{loss_and_grad, Batch};
use super::NetError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    /// Central-difference step.
    pub step: f64,
    /// Number of parameters compared.
    pub samples: usize,
    pub seed: u64,
}

// With the ReLU masks held fixed the loss is quadratic in any single
// parameter, so central differences carry no truncation error and a coarse
// step only reduces cancellation.
impl GradCheckConfig {
    pub fn for_f32() -> Self {
        Self { step: 1e-3, samples: 100, seed: 0 }
    }

    pub fn for_f64() -> Self {
        Self { step: 1e-3, samples: 100, seed: 0 }
    }
}

fn relu_pattern(params: &QParams<f64>, batch: &Batch<f64>) -> Result<Vec<bool>, NetError> {
    let input_len = params.input_len();
    let mut pattern = Vec::new();
    for i in 0..batch.len() {
        let acts = params.forward_trace(batch.state(i, input_len))?;
        for (layer, act) in params.layers.iter().zip(&acts[1..]) {
            if layer.shape.relu() {
                pattern.extend(act.iter().map(|&v| v > 0.0));
            }
        }
    }
    Ok(pattern)
}

fn batch_f64<T: Real>(batch: &Batch<T>) -> Batch<f64> {
    Batch {
        states: batch.states.iter().map(|x| x.to_f64().unwrap()).collect(),
        actions: batch.actions.clone(),
        targets: batch.targets.iter().map(|x| x.to_f64().unwrap()).collect(),
    }
}

fn flat_get(p: &QParams<f64>, mut idx: usize) -> (usize, usize) {
    for (t, tensor) in p.tensors().enumerate() {
        if idx < tensor.len() {
            return (t, idx);
        }
        idx -= tensor.len();
    }
    unreachable!("parameter index out of range")
}

fn tensor_mut(p: &mut QParams<f64>, t: usize) -> &mut Vec<f64> {
    p.tensors_mut().nth(t).unwrap()
}

/// Maximum relative error between `analytic` and central finite differences
/// of the batch loss over randomly chosen parameters.
///
/// Finite differences are evaluated in 64-bit on a copy of the parameters, so
/// the check measures the backward pass rather than the loss rounding. A
/// perturbation that flips any ReLU is a kink, where the derivative is
/// undefined; such parameters are redrawn.
pub fn grad_check_against<T: Real>(
    params: &QParams<T>,
    batch: &Batch<T>,
    analytic: &QParams<T>,
    cfg: &GradCheckConfig,
) -> Result<f64, NetError> {
    let base = params.cast::<f64>();
    let batch = batch_f64(batch);
    let analytic = analytic.cast::<f64>();
    let base_pattern = relu_pattern(&base, &batch)?;
    let total = base.param_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut probe = base.clone();
    let mut checked = 0;
    let mut attempts = 0;
    let mut worst = 0f64;
    while checked < cfg.samples && attempts < cfg.samples * 20 {
        attempts += 1;
        let (t, i) = flat_get(&base, rng.gen_range(0..total));
        let original = tensor_mut(&mut probe, t)[i];

        tensor_mut(&mut probe, t)[i] = original + cfg.step;
        let plus_kink = relu_pattern(&probe, &batch)? != base_pattern;
        let plus = super::train::loss(&probe, &batch)?;
        tensor_mut(&mut probe, t)[i] = original - cfg.step;
        let minus_kink = relu_pattern(&probe, &batch)? != base_pattern;
        let minus = super::train::loss(&probe, &batch)?;
        tensor_mut(&mut probe, t)[i] = original;
        if plus_kink || minus_kink {
            continue;
        }

        let numeric = (plus - minus) / (2.0 * cfg.step);
        let exact = analytic.tensors().nth(t).unwrap()[i];
        let rel = (exact - numeric).abs() / exact.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
        checked += 1;
    }
    if checked == 0 {
        return Err(NetError::Shape("no kink-free parameters to check".into()));
    }
    Ok(worst)
}

pub fn grad_check<T: Real>(params: &QParams<T>, batch: &Batch<T>, cfg: &GradCheckConfig) -> Result<f64, NetError> {
    let (_, grads) = loss_and_grad(params, batch)?;
    grad_check_against(params, batch, &grads, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnet::arch::{Arch, LayerSpec};

    fn random_batch(rng: &mut ChaCha8Rng, arch: &Arch, actions: usize, n: usize) -> Batch<f64> {
        Batch {
            states: (0..n * arch.input_len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            actions: (0..n).map(|_| rng.gen_range(0..actions)).collect(),
            targets: (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect(),
        }
    }

    fn tiny() -> Arch {
        Arch {
            input: [5, 5, 2],
            layers: vec![
                LayerSpec::Conv { filters: 3, kernel: 3, stride: 1, relu: true },
                LayerSpec::Dense { units: 6, relu: true },
                LayerSpec::Dense { units: 3, relu: false },
            ],
        }
    }

    #[test]
    fn tiny_net_in_f64() {
        let arch = tiny();
        let p = QParams::<f64>::init(&arch, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let batch = random_batch(&mut rng, &arch, 3, 8);
        let err = grad_check(&p, &batch, &GradCheckConfig::for_f64()).unwrap();
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn linear_model_is_exact() {
        let arch = Arch { input: [1, 1, 4], layers: vec![LayerSpec::Dense { units: 2, relu: false }] };
        let p = QParams::<f64>::init(&arch, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let batch = random_batch(&mut rng, &arch, 2, 4);
        let err = grad_check(&p, &batch, &GradCheckConfig::for_f64()).unwrap();
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        let arch = tiny();
        let p = QParams::<f64>::init(&arch, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let batch = random_batch(&mut rng, &arch, 3, 8);
        let (_, mut grads) = loss_and_grad(&p, &batch).unwrap();
        for t in grads.tensors_mut() {
            for g in t.iter_mut() {
                *g *= 1.5;
            }
        }
        let err = grad_check_against(&p, &batch, &grads, &GradCheckConfig::for_f64()).unwrap();
        assert!(err > 1e-2, "{err}");
    }

    #[test]
    fn tiny_net_in_f32() {
        let arch = tiny();
        let p = QParams::<f32>::init(&arch, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = random_batch(&mut rng, &arch, 3, 8);
        let batch = Batch {
            states: b.states.iter().map(|&x| x as f32).collect(),
            actions: b.actions,
            targets: b.targets.iter().map(|&x| x as f32).collect(),
        };
        let err = grad_check(&p, &batch, &GradCheckConfig::for_f32()).unwrap();
        assert!(err <= 1e-3, "{err}");
    }
}
