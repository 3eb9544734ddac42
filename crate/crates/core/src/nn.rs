//! Feedforward Q-network: forward pass, backpropagation, TD-target training
//! with an Adam step, target-network sync and a binary weight file format.
//!
//! Everything is f64 so that identical runs produce bit-identical weights.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of routing actions (the 4 ISL antennas).
pub const NUM_ACTIONS: usize = 4;

const WEIGHT_MAGIC: &[u8; 8] = b"MADRLNET";
const WEIGHT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("input length {got} does not match input_dim {expected}")]
    ShapeMismatch { got: usize, expected: usize },
    #[error("training diverged: non-finite loss at step {step}")]
    NonFiniteLoss { step: u64 },
    #[error("weight file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("weight file corrupt: {0}")]
    BadWeightFile(String),
}

/// Weights and biases of the Q-network. Hidden layers use a rectifier,
/// the output layer is linear with `NUM_ACTIONS` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layer_dims: Vec<usize>,
    /// Per layer, row-major `[out][in]`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpParams {
    /// Symmetric uniform init in +-sqrt(6 / (fan_in + fan_out)).
    pub fn init<R: Rng>(layer_dims: &[usize], rng: &mut R) -> Self {
        assert!(layer_dims.len() >= 2, "need at least input and output dims");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_dims.len() - 1 {
            let (fan_in, fan_out) = (layer_dims[l], layer_dims[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        }
    }

    pub fn zeros(layer_dims: &[usize]) -> Self {
        let weights = (0..layer_dims.len() - 1)
            .map(|l| vec![0.0; layer_dims[l] * layer_dims[l + 1]])
            .collect();
        let biases = (0..layer_dims.len() - 1)
            .map(|l| vec![0.0; layer_dims[l + 1]])
            .collect();
        Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    /// Action values for one observation vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        if input.len() != self.input_dim() {
            return Err(NnError::ShapeMismatch {
                got: input.len(),
                expected: self.input_dim(),
            });
        }
        let mut act = input.to_vec();
        for l in 0..self.num_layers() {
            act = self.layer_forward(l, &act, l + 1 < self.num_layers());
        }
        Ok(act)
    }

    fn layer_forward(&self, l: usize, input: &[f64], relu: bool) -> Vec<f64> {
        let (n_in, _n_out) = (self.layer_dims[l], self.layer_dims[l + 1]);
        let w = &self.weights[l];
        let mut out = self.biases[l].clone();
        for (o, out_v) in out.iter_mut().enumerate() {
            let row = &w[o * n_in..(o + 1) * n_in];
            let mut acc = 0.0;
            for (x, wv) in input.iter().zip(row) {
                acc += x * wv;
            }
            *out_v += acc;
            if relu && *out_v < 0.0 {
                *out_v = 0.0;
            }
        }
        out
    }

    /// Forward pass keeping post-activation values of every layer for
    /// backpropagation. `acts[0]` is the input, `acts.last()` the output.
    fn forward_cached(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        for l in 0..self.num_layers() {
            let next = self.layer_forward(l, acts.last().unwrap(), l + 1 < self.num_layers());
            acts.push(next);
        }
        acts
    }

    /// Exact duplicate, used both for per-agent copies and target syncs.
    pub fn duplicate(&self) -> MlpParams {
        self.clone()
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        let mut buf = Vec::new();
        buf.extend_from_slice(WEIGHT_MAGIC);
        buf.extend_from_slice(&WEIGHT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.num_layers() as u32).to_le_bytes());
        for &d in &self.layer_dims {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for l in 0..self.num_layers() {
            for v in &self.weights[l] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            for v in &self.biases[l] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<MlpParams, NnError> {
        let mut data = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut data)?;
        let mut cur = &data[..];
        let mut take = |n: usize| -> Result<&[u8], NnError> {
            if cur.len() < n {
                return Err(NnError::BadWeightFile("truncated".into()));
            }
            let (head, rest) = cur.split_at(n);
            cur = rest;
            Ok(head)
        };
        let magic = take(8)?;
        if magic != WEIGHT_MAGIC {
            return Err(NnError::BadWeightFile("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != WEIGHT_VERSION {
            return Err(NnError::BadWeightFile(format!(
                "unsupported version {version}"
            )));
        }
        let num_layers = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut layer_dims = Vec::with_capacity(num_layers + 1);
        for _ in 0..num_layers + 1 {
            layer_dims.push(u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize);
        }
        let read_f64s = |n: usize, cur: &mut &[u8]| -> Result<Vec<f64>, NnError> {
            if cur.len() < n * 8 {
                return Err(NnError::BadWeightFile("truncated".into()));
            }
            let (head, rest) = cur.split_at(n * 8);
            *cur = rest;
            Ok(head
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };
        let mut weights = Vec::with_capacity(num_layers);
        let mut biases = Vec::with_capacity(num_layers);
        for l in 0..num_layers {
            weights.push(read_f64s(layer_dims[l] * layer_dims[l + 1], &mut cur)?);
            biases.push(read_f64s(layer_dims[l + 1], &mut cur)?);
        }
        if !cur.is_empty() {
            return Err(NnError::BadWeightFile("trailing bytes".into()));
        }
        Ok(MlpParams {
            layer_dims,
            weights,
            biases,
        })
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub discount: f64,
    pub target_sync_every: u64,
    pub hidden_dims: [usize; 2],
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 64,
            discount: 0.9,
            target_sync_every: 500,
            hidden_dims: [64, 64],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.learning_rate > 0.0) {
            return Err("learning_rate must be > 0".into());
        }
        if self.batch_size == 0 {
            return Err("batch_size must be >= 1".into());
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err("discount must be in (0, 1]".into());
        }
        if self.target_sync_every == 0 {
            return Err("target_sync_every must be >= 1".into());
        }
        Ok(())
    }
}

/// One training sample, already resolved to raw vectors.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    /// Next state observed at the receiving agent; `None` for terminal hops.
    pub next_state: Option<Vec<f64>>,
    /// Feasible actions in the next state.
    pub next_mask: [bool; NUM_ACTIONS],
}

/// TD target y = r + gamma * max over feasible a' of Q_target(s', a');
/// y = r for terminal samples.
pub fn td_targets(
    batch: &[TrainSample],
    target: &MlpParams,
    gamma: f64,
) -> Result<Vec<f64>, NnError> {
    batch
        .iter()
        .map(|s| {
            let bootstrap = match &s.next_state {
                None => 0.0,
                Some(next) => {
                    let q = target.forward(next)?;
                    let best = q
                        .iter()
                        .zip(s.next_mask.iter())
                        .filter(|(_, &m)| m)
                        .map(|(&v, _)| v)
                        .fold(f64::NEG_INFINITY, f64::max);
                    if best.is_finite() {
                        best
                    } else {
                        0.0
                    }
                }
            };
            Ok(s.reward + gamma * bootstrap)
        })
        .collect()
}

/// Adam moment estimates, one slot per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    pub step: u64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        Self {
            m_w: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            step: 0,
        }
    }
}

/// Gradient of the mean squared TD error with respect to all weights and
/// biases. Only the taken action's output carries gradient per sample.
/// Per-layer weight gradients, per-layer bias gradients, and the batch loss.
pub type GradientsAndLoss = (Vec<Vec<f64>>, Vec<Vec<f64>>, f64);

pub fn gradients(
    params: &MlpParams,
    batch: &[TrainSample],
    targets: &[f64],
) -> Result<GradientsAndLoss, NnError> {
    let num_layers = params.num_layers();
    let mut grad_w: Vec<Vec<f64>> = params.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut grad_b: Vec<Vec<f64>> = params.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let mut loss = 0.0;
    let scale = 1.0 / batch.len() as f64;

    for (sample, &y) in batch.iter().zip(targets) {
        let acts = params.forward_cached(&sample.state);
        let out = acts.last().unwrap();
        let err = out[sample.action] - y;
        loss += scale * err * err;

        // Output delta: d loss / d out, nonzero only at the taken action.
        let mut delta = vec![0.0; params.output_dim()];
        delta[sample.action] = 2.0 * scale * err;

        for l in (0..num_layers).rev() {
            let n_in = params.layer_dims[l];
            let input = &acts[l];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                grad_b[l][o] += d;
                let row = &mut grad_w[l][o * n_in..(o + 1) * n_in];
                for (gw, &x) in row.iter_mut().zip(input.iter()) {
                    *gw += d * x;
                }
            }
            if l > 0 {
                // Propagate through the rectifier of the previous layer.
                let mut prev = vec![0.0; n_in];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &params.weights[l][o * n_in..(o + 1) * n_in];
                    for (p, &wv) in prev.iter_mut().zip(row) {
                        *p += d * wv;
                    }
                }
                for (p, &a) in prev.iter_mut().zip(input.iter()) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }
    Ok((grad_w, grad_b, loss))
}

/// One optimizer step on `params` against targets from `target`.
/// Returns the pre-update batch loss.
pub fn train_step(
    params: &mut MlpParams,
    target: &MlpParams,
    adam: &mut AdamState,
    batch: &[TrainSample],
    cfg: &TrainConfig,
) -> Result<f64, NnError> {
    let targets = td_targets(batch, target, cfg.discount)?;
    let (grad_w, grad_b, loss) = gradients(params, batch, &targets)?;
    if !loss.is_finite() {
        return Err(NnError::NonFiniteLoss { step: adam.step });
    }
    adam.step += 1;
    let t = adam.step as f64;
    let corr1 = 1.0 - ADAM_BETA1.powf(t);
    let corr2 = 1.0 - ADAM_BETA2.powf(t);
    let lr = cfg.learning_rate;
    let apply = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..p.len() {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            let mh = m[i] / corr1;
            let vh = v[i] / corr2;
            p[i] -= lr * mh / (vh.sqrt() + ADAM_EPS);
        }
    };
    for l in 0..params.num_layers() {
        apply(
            &mut params.weights[l],
            &grad_w[l],
            &mut adam.m_w[l],
            &mut adam.v_w[l],
        );
        apply(
            &mut params.biases[l],
            &grad_b[l],
            &mut adam.m_b[l],
            &mut adam.v_b[l],
        );
    }
    Ok(loss)
}

/// Exact copy used as the frozen bootstrap target.
pub fn sync_target(params: &MlpParams) -> MlpParams {
    params.duplicate()
}

/// Exact copy handed to an agent at the start of the online phase.
pub fn copy_weights(global: &MlpParams) -> MlpParams {
    global.duplicate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_bias() {
        let mut p = MlpParams::zeros(&[3, 2, 4]);
        p.biases[1] = vec![0.5, -1.0, 2.0, 0.0];
        let out = p.forward(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out, vec![0.5, -1.0, 2.0, 0.0]);
    }

    #[test]
    fn last_layer_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = MlpParams::init(&[3, 5, 4], &mut rng);
        let x = [0.3, -0.2, 0.9];
        let base = p.forward(&x).unwrap();
        let mut scaled = p.clone();
        for v in scaled.weights.last_mut().unwrap() {
            *v *= 2.0;
        }
        for v in scaled.biases.last_mut().unwrap() {
            *v *= 2.0;
        }
        let out = scaled.forward(&x).unwrap();
        for (a, b) in base.iter().zip(&out) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_evaluated_forward() {
        // 2-2-4 network, weights set by hand; expected values computed by
        // manual matrix arithmetic.
        let mut p = MlpParams::zeros(&[2, 2, 4]);
        // Hidden: h0 = relu(1*x0 + 2*x1 + 0.5), h1 = relu(-1*x0 + 1*x1 - 0.25)
        p.weights[0] = vec![1.0, 2.0, -1.0, 1.0];
        p.biases[0] = vec![0.5, -0.25];
        // Output rows: [1,0], [0,1], [1,1], [2,-1], biases 0.1..0.4
        p.weights[1] = vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, -1.0];
        p.biases[1] = vec![0.1, 0.2, 0.3, 0.4];
        let x = [1.0, 0.5];
        // h0 = relu(1 + 1 + 0.5) = 2.5; h1 = relu(-1 + 0.5 - 0.25) = 0
        // out = [2.5+0.1, 0+0.2, 2.5+0.3, 5.0+0.4]
        let out = p.forward(&x).unwrap();
        let expected = [2.6, 0.2, 2.8, 5.4];
        for (a, b) in out.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{out:?}");
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = MlpParams::zeros(&[3, 2, 4]);
        assert!(matches!(
            p.forward(&[1.0, 2.0]),
            Err(NnError::ShapeMismatch {
                got: 2,
                expected: 3
            })
        ));
    }

    fn sample(state: Vec<f64>, action: usize, reward: f64, next: Option<Vec<f64>>) -> TrainSample {
        TrainSample {
            state,
            action,
            reward,
            next_state: next,
            next_mask: [true; 4],
        }
    }

    #[test]
    fn td_target_rules() {
        let target = MlpParams::zeros(&[2, 4]);
        let terminal = sample(vec![0.0, 0.0], 1, 0.3, None);
        assert_eq!(
            td_targets(std::slice::from_ref(&terminal), &target, 0.9).unwrap(),
            vec![0.3]
        );

        let with_next = sample(vec![0.0, 0.0], 0, 0.1, Some(vec![1.0, 1.0]));
        // gamma = 0 ignores the bootstrap.
        assert_eq!(
            td_targets(std::slice::from_ref(&with_next), &target, 0.0).unwrap(),
            vec![0.1]
        );

        // Target net with constant outputs via biases.
        let mut constant = MlpParams::zeros(&[2, 4]);
        constant.biases[0] = vec![1.0, 3.0, 2.0, 0.0];
        let y = td_targets(&[with_next], &constant, 0.9).unwrap();
        assert!((y[0] - (0.1 + 0.9 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn masked_next_actions_excluded() {
        let mut constant = MlpParams::zeros(&[2, 4]);
        constant.biases[0] = vec![1.0, 3.0, 2.0, 0.0];
        let mut s = sample(vec![0.0, 0.0], 0, 0.0, Some(vec![0.0, 0.0]));
        s.next_mask = [true, false, true, false];
        let y = td_targets(&[s], &constant, 1.0).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_when_predictions_match_targets() {
        let mut p = MlpParams::zeros(&[2, 2, 4]);
        p.biases[1] = vec![0.7; 4];
        let batch = vec![sample(vec![0.2, 0.4], 2, 0.7, None)];
        let target = sync_target(&p);
        let targets = td_targets(&batch, &target, 0.9).unwrap();
        let (gw, gb, loss) = gradients(&p, &batch, &targets).unwrap();
        assert_eq!(loss, 0.0);
        assert!(gw.iter().flatten().all(|&g| g == 0.0));
        assert!(gb.iter().flatten().all(|&g| g == 0.0));
    }

    #[test]
    fn loss_decreases_on_repeated_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = MlpParams::init(&[4, 8, 4], &mut rng);
        let target = sync_target(&p);
        let mut adam = AdamState::new(&p);
        let cfg = TrainConfig {
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        let batch = vec![sample(vec![0.1, -0.4, 0.8, 0.3], 1, 1.5, None)];
        let first = train_step(&mut p, &target, &mut adam, &batch, &cfg).unwrap();
        let mut last = first;
        for _ in 0..2000 {
            last = train_step(&mut p, &target, &mut adam, &batch, &cfg).unwrap();
        }
        assert!(last < first / 100.0, "loss {first} -> {last}");
        assert!(last < 1e-3, "final loss {last}");
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        // Central finite differences with step 1e-5 as the independent
        // oracle, on a 6-8-4 network.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..20 {
            let p = MlpParams::init(&[6, 8, 4], &mut rng);
            let target = MlpParams::init(&[6, 8, 4], &mut rng);
            let batch: Vec<TrainSample> = (0..3)
                .map(|_| {
                    let state: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let next: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    TrainSample {
                        state,
                        action: rng.gen_range(0..4),
                        reward: rng.gen_range(-1.0..1.0),
                        next_state: if rng.gen_bool(0.5) { Some(next) } else { None },
                        next_mask: [true; 4],
                    }
                })
                .collect();
            let targets = td_targets(&batch, &target, 0.9).unwrap();
            let (gw, gb, _) = gradients(&p, &batch, &targets).unwrap();

            let loss_at = |p: &MlpParams| -> f64 {
                let mut loss = 0.0;
                for (s, &y) in batch.iter().zip(&targets) {
                    let q = p.forward(&s.state).unwrap();
                    let e = q[s.action] - y;
                    loss += e * e / batch.len() as f64;
                }
                loss
            };
            let h = 1e-5;
            let mut max_rel = 0.0_f64;
            for l in 0..p.num_layers() {
                for (i, &g) in gw[l].iter().enumerate() {
                    let mut plus = p.clone();
                    plus.weights[l][i] += h;
                    let mut minus = p.clone();
                    minus.weights[l][i] -= h;
                    let num = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
                    let denom = num.abs().max(g.abs()).max(1e-6);
                    max_rel = max_rel.max((num - g).abs() / denom);
                }
                for (i, &g) in gb[l].iter().enumerate() {
                    let mut plus = p.clone();
                    plus.biases[l][i] += h;
                    let mut minus = p.clone();
                    minus.biases[l][i] -= h;
                    let num = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
                    let denom = num.abs().max(g.abs()).max(1e-6);
                    max_rel = max_rel.max((num - g).abs() / denom);
                }
            }
            assert!(max_rel < 1e-4, "case {case}: max relative error {max_rel}");
        }
    }

    #[test]
    fn copy_and_sync_semantics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut p = MlpParams::init(&[4, 6, 4], &mut rng);
        let t = sync_target(&p);
        let x = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(p.forward(&x).unwrap(), t.forward(&x).unwrap());
        // Perturb an output bias so the change cannot be masked by a ReLU.
        p.biases[1][0] += 1.0;
        assert_ne!(p.forward(&x).unwrap(), t.forward(&x).unwrap());
        let t2 = sync_target(&t);
        assert_eq!(t, t2);
        let local = copy_weights(&t);
        assert_eq!(local, t);
    }

    #[test]
    fn weight_file_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = MlpParams::init(&[22, 64, 64, 4], &mut rng);
        let f1 = dir.path().join("w1.bin");
        let f2 = dir.path().join("w2.bin");
        p.save(&f1).unwrap();
        let loaded = MlpParams::load(&f1).unwrap();
        assert_eq!(p, loaded);
        loaded.save(&f2).unwrap();
        assert_eq!(std::fs::read(&f1).unwrap(), std::fs::read(&f2).unwrap());
    }

    #[test]
    fn weight_file_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("bad.bin");
        std::fs::write(&f, b"NOTMAGIC").unwrap();
        assert!(MlpParams::load(&f).is_err());
    }
}
