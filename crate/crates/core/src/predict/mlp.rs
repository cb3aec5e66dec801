//! Single-hidden-layer feed-forward classifier trained by backpropagation.
//!
//! Architecture: `tanh` hidden activation, softmax output, cross-entropy
//! loss. The output width is fixed at the six emotion labels. Everything is
//! deterministic given the model seed and the training seed; there is no
//! global RNG anywhere.

use crate::event::EmotionLabel;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Probability over the six emotion labels, in declaration order.
pub type Distribution = [f64; EmotionLabel::COUNT];

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum MlpError {
    #[error("input length {got} does not match model input size {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("non-finite parameter produced during training")]
    NonFinite,
}

/// Weights of one `in → hidden → 6` network. Weight matrices are stored as
/// one row per output neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: [usize; 3],
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
    pub seed: u64,
}

impl MlpModel {
    /// Fresh model with seed-driven uniform init, `U(-1/√fan_in, 1/√fan_in)`,
    /// zero biases.
    pub fn new(input: usize, hidden: usize, seed: u64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = EmotionLabel::COUNT;
        let mut layer = |rows: usize, cols: usize| -> Vec<Vec<f64>> {
            let limit = 1.0 / (cols as f64).sqrt();
            (0..rows)
                .map(|_| (0..cols).map(|_| rng.random_range(-limit..limit)).collect())
                .collect()
        };
        MlpModel {
            layer_sizes: [input, hidden, out],
            w1: layer(hidden, input),
            b1: vec![0.0; hidden],
            w2: layer(out, hidden),
            b2: vec![0.0; out],
            seed,
        }
    }

    /// All-zero parameters; forward of anything is the uniform distribution.
    pub fn zeroed(input: usize, hidden: usize) -> MlpModel {
        MlpModel {
            layer_sizes: [input, hidden, EmotionLabel::COUNT],
            w1: vec![vec![0.0; input]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![vec![0.0; hidden]; EmotionLabel::COUNT],
            b2: vec![0.0; EmotionLabel::COUNT],
            seed: 0,
        }
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    fn check_input(&self, x: &[f64]) -> Result<(), MlpError> {
        if x.len() != self.input_size() {
            return Err(MlpError::DimensionMismatch {
                got: x.len(),
                want: self.input_size(),
            });
        }
        Ok(())
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        self.w1
            .iter()
            .zip(&self.b1)
            .map(|(row, b)| (dot(row, x) + b).tanh())
            .collect()
    }

    /// Softmax distribution over the six labels. Sums to 1 within 1e-9.
    pub fn forward(&self, x: &[f64]) -> Result<Distribution, MlpError> {
        self.check_input(x)?;
        let h = self.hidden_activations(x);
        let logits: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(row, b)| dot(row, &h) + b)
            .collect();
        Ok(softmax(&logits))
    }

    /// Analytic gradient of the per-example cross-entropy loss
    /// `-ln p[label]`, plus the loss itself.
    pub fn backprop(&self, x: &[f64], label: EmotionLabel) -> Result<(Gradients, f64), MlpError> {
        self.check_input(x)?;
        let h = self.hidden_activations(x);
        let logits: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(row, b)| dot(row, &h) + b)
            .collect();
        let p = softmax(&logits);
        let loss = -p[label.index()].max(f64::MIN_POSITIVE).ln();

        // dL/dlogits = p - onehot(label)
        let mut dz2 = p.to_vec();
        dz2[label.index()] -= 1.0;

        let dw2: Vec<Vec<f64>> = dz2
            .iter()
            .map(|&d| h.iter().map(|&hj| d * hj).collect())
            .collect();
        let db2 = dz2.clone();

        // dL/dh = W2ᵀ dz2, then through tanh: dz1 = dh (1 - h²)
        let hidden = self.layer_sizes[1];
        let mut dz1 = vec![0.0; hidden];
        for (j, dj) in dz1.iter_mut().enumerate() {
            let dh: f64 = self.w2.iter().zip(&dz2).map(|(row, &d)| row[j] * d).sum();
            *dj = dh * (1.0 - h[j] * h[j]);
        }
        let dw1: Vec<Vec<f64>> = dz1
            .iter()
            .map(|&d| x.iter().map(|&xi| d * xi).collect())
            .collect();
        let db1 = dz1;

        Ok((
            Gradients {
                w1: dw1,
                b1: db1,
                w2: dw2,
                b2: db2,
            },
            loss,
        ))
    }

    fn is_finite(&self) -> bool {
        let rows = |m: &Vec<Vec<f64>>| m.iter().flatten().all(|v| v.is_finite());
        rows(&self.w1) && rows(&self.w2) && self.b1.iter().chain(&self.b2).all(|v| v.is_finite())
    }
}

/// Gradient of the loss w.r.t. every parameter, same shapes as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeroed_like(m: &MlpModel) -> Gradients {
        Gradients {
            w1: vec![vec![0.0; m.layer_sizes[0]]; m.layer_sizes[1]],
            b1: vec![0.0; m.layer_sizes[1]],
            w2: vec![vec![0.0; m.layer_sizes[1]]; m.layer_sizes[2]],
            b2: vec![0.0; m.layer_sizes[2]],
        }
    }

    fn add(&mut self, other: &Gradients) {
        add_matrix(&mut self.w1, &other.w1, 1.0);
        add_vec(&mut self.b1, &other.b1, 1.0);
        add_matrix(&mut self.w2, &other.w2, 1.0);
        add_vec(&mut self.b2, &other.b2, 1.0);
    }
}

/// Mini-batch gradient descent hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: usize,
    /// Drives the per-epoch shuffle; same seeds, same bits out.
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.03,
            epochs: 200,
            batch_size: 16,
            seed: 0,
        }
    }
}

/// Trains a copy of `model` and returns it with the per-epoch mean loss
/// curve. `epochs = 0` returns the model unchanged with an empty curve.
pub fn train(
    model: &MlpModel,
    dataset: &[(Vec<f64>, EmotionLabel)],
    cfg: &TrainingConfig,
) -> Result<(MlpModel, Vec<f64>), MlpError> {
    if dataset.is_empty() {
        return Err(MlpError::EmptyDataset);
    }
    for (x, _) in dataset {
        model.check_input(x)?;
    }
    let mut m = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs as usize);
    let batch_size = cfg.batch_size.max(1);

    for _ in 0..cfg.epochs {
        shuffle(&mut order, &mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(batch_size) {
            let mut grad = Gradients::zeroed_like(&m);
            let mut batch_loss = 0.0;
            for &i in batch {
                let (x, y) = &dataset[i];
                let (g, loss) = m.backprop(x, *y)?;
                grad.add(&g);
                batch_loss += loss;
            }
            epoch_loss += batch_loss;
            let step = -cfg.learning_rate / batch.len() as f64;
            add_matrix(&mut m.w1, &grad.w1, step);
            add_vec(&mut m.b1, &grad.b1, step);
            add_matrix(&mut m.w2, &grad.w2, step);
            add_vec(&mut m.b2, &grad.b2, step);
        }
        curve.push(epoch_loss / dataset.len() as f64);
        if !m.is_finite() {
            return Err(MlpError::NonFinite);
        }
    }
    Ok((m, curve))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn softmax(logits: &[f64]) -> Distribution {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; EmotionLabel::COUNT];
    let mut sum = 0.0;
    for (o, &z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        sum += *o;
    }
    for o in &mut out {
        *o /= sum;
    }
    out
}

fn add_matrix(dst: &mut [Vec<f64>], src: &[Vec<f64>], scale: f64) {
    for (drow, srow) in dst.iter_mut().zip(src) {
        add_vec(drow, srow, scale);
    }
}

fn add_vec(dst: &mut [f64], src: &[f64], scale: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s * scale;
    }
}

/// Fisher–Yates with the caller's RNG, so shuffles are reproducible.
fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters_give_the_uniform_distribution() {
        let m = MlpModel::zeroed(4, 3);
        let p = m.forward(&[1.0, -2.0, 0.5, 3.0]).unwrap();
        for v in p {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn output_bias_shift_leaves_the_distribution_unchanged() {
        let m = MlpModel::new(3, 4, 11);
        let x = [0.3, -0.7, 1.2];
        let base = m.forward(&x).unwrap();
        let mut shifted = m.clone();
        for b in &mut shifted.b2 {
            *b += 17.5;
        }
        let p = shifted.forward(&x).unwrap();
        for (a, b) in base.iter().zip(&p) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn hand_set_2_2_6_model_matches_the_independent_computation() {
        // Expected values computed independently (softmax over
        // tanh(W1 x + b1) through W2, b2) and frozen here.
        let m = MlpModel {
            layer_sizes: [2, 2, 6],
            w1: vec![vec![0.5, -0.25], vec![0.1, 0.3]],
            b1: vec![0.1, -0.2],
            w2: vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.5],
                vec![0.25, 0.25],
                vec![0.0, 0.0],
                vec![0.5, -0.5],
            ],
            b2: vec![0.0, 0.1, -0.1, 0.0, 0.2, 0.0],
            seed: 0,
        };
        let p = m.forward(&[1.0, 2.0]).unwrap();
        let expected = [
            0.1556607213917192,
            0.24718274925024217,
            0.14538732170298,
            0.16213949894176158,
            0.17208882730103592,
            0.11754088141226124,
        ];
        for (got, want) in p.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
        let (_, loss) = m.backprop(&[1.0, 2.0], EmotionLabel::Angry).unwrap();
        assert!((loss - 1.9283539136750185).abs() < 1e-12);
    }

    #[test]
    fn distribution_sums_to_one() {
        let m = MlpModel::new(5, 8, 3);
        let p = m.forward(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn output_bias_gradient_at_zero_params_is_p_minus_onehot() {
        let m = MlpModel::zeroed(4, 3);
        let (g, _) = m
            .backprop(&[1.0, 0.0, -1.0, 2.0], EmotionLabel::Sad)
            .unwrap();
        for (i, &db) in g.b2.iter().enumerate() {
            let want = 1.0 / 6.0
                - if i == EmotionLabel::Sad.index() {
                    1.0
                } else {
                    0.0
                };
            assert!((db - want).abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        // Independent oracle: perturb one parameter at a time and compare
        // (L(θ+ε) - L(θ-ε)) / 2ε against the analytic value.
        let eps = 1e-5;
        let m = MlpModel::new(5, 8, 42);
        let x: Vec<f64> = (0..5).map(|i| (i as f64) * 0.3 - 0.7).collect();
        let y = EmotionLabel::Fear;
        let (g, _) = m.backprop(&x, y).unwrap();

        let loss_of = |m: &MlpModel| m.backprop(&x, y).unwrap().1;
        let mut worst = 0.0f64;
        let mut check = |analytic: f64,
                         mut plus: MlpModel,
                         mut minus: MlpModel,
                         set: &dyn Fn(&mut MlpModel, f64)| {
            set(&mut plus, eps);
            set(&mut minus, -eps);
            let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * eps);
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / denom);
        };
        for i in 0..8 {
            for j in 0..5 {
                check(g.w1[i][j], m.clone(), m.clone(), &|mm, d| mm.w1[i][j] += d);
            }
            check(g.b1[i], m.clone(), m.clone(), &|mm, d| mm.b1[i] += d);
        }
        for i in 0..6 {
            for j in 0..8 {
                check(g.w2[i][j], m.clone(), m.clone(), &|mm, d| mm.w2[i][j] += d);
            }
            check(g.b2[i], m.clone(), m.clone(), &|mm, d| mm.b2[i] += d);
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn duplicated_example_doubles_the_summed_gradient() {
        // Gradients are per-example; summing a pair equals 2x one example.
        let m = MlpModel::new(3, 4, 5);
        let x = vec![0.5, -0.5, 0.25];
        let (g, _) = m.backprop(&x, EmotionLabel::Happy).unwrap();
        let mut sum = Gradients::zeroed_like(&m);
        sum.add(&g);
        sum.add(&g);
        for (two, one) in sum.b2.iter().zip(&g.b2) {
            assert!((two - 2.0 * one).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_epochs_change_nothing() {
        let m = MlpModel::new(3, 4, 9);
        let data = vec![(vec![0.1, 0.2, 0.3], EmotionLabel::Happy)];
        let (trained, curve) = train(
            &m,
            &data,
            &TrainingConfig {
                epochs: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(trained, m);
        assert!(curve.is_empty());
    }

    #[test]
    fn training_is_deterministic_and_reduces_loss() {
        // Tiny separable two-class problem.
        let mut data = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.05;
            data.push((vec![1.0 + t, 0.0], EmotionLabel::Happy));
            data.push((vec![-1.0 - t, 0.2], EmotionLabel::Sad));
        }
        let m = MlpModel::new(2, 6, 7);
        let cfg = TrainingConfig {
            epochs: 50,
            seed: 3,
            ..Default::default()
        };
        let (a, curve_a) = train(&m, &data, &cfg).unwrap();
        let (b, curve_b) = train(&m, &data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(curve_a, curve_b);
        assert!(curve_a.iter().all(|l| l.is_finite()));
        assert!(curve_a.last().unwrap() < curve_a.first().unwrap());
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let m = MlpModel::new(2, 2, 0);
        assert_eq!(
            train(&m, &[], &TrainingConfig::default()).unwrap_err(),
            MlpError::EmptyDataset
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = MlpModel::new(3, 2, 0);
        assert!(matches!(
            m.forward(&[1.0, 2.0]),
            Err(MlpError::DimensionMismatch { got: 2, want: 3 })
        ));
    }
}
