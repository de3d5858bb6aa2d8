//! Feed-forward multilayer perceptron trained by mini-batch gradient descent.
//!
//! Inputs are z-scored with statistics from the training rows, and so is the
//! target; the network itself works in those standardised units and
//! [`MLPModel::forward`] maps back to raw target units.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::split_indices;
use crate::error::{domain, Error, Result};
use crate::table::LabeledTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Tanh,
    Sigmoid,
    Relu,
    Gaussian,
    Direct,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 5] = [Self::Tanh, Self::Sigmoid, Self::Relu, Self::Gaussian, Self::Direct];

    pub fn apply(self, t: f64) -> f64 {
        match self {
            Self::Tanh => t.tanh(),
            Self::Sigmoid => 1.0 / (1.0 + (-t).exp()),
            Self::Relu => t.max(0.0),
            Self::Gaussian => (-t * t).exp(),
            Self::Direct => t,
        }
    }

    /// Derivative with respect to the pre-activation. ReLU uses 0 at 0.
    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Self::Tanh => 1.0 - t.tanh().powi(2),
            Self::Sigmoid => {
                let s = self.apply(t);
                s * (1.0 - s)
            }
            Self::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Gaussian => -2.0 * t * (-t * t).exp(),
            Self::Direct => 1.0,
        }
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Self::Tanh),
            "sigmoid" => Ok(Self::Sigmoid),
            "relu" => Ok(Self::Relu),
            "gaussian" => Ok(Self::Gaussian),
            "direct" | "linear" | "identity" => Ok(Self::Direct),
            other => domain(format!("unknown activation `{other}`")),
        }
    }
}

pub fn activation(kind: ActivationKind, t: f64) -> f64 {
    kind.apply(t)
}

/// One affine layer followed by an activation. Weights are row-major with
/// one row per output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: ActivationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

impl Standardization {
    fn identity(k: usize) -> Self {
        Self { input_mean: vec![0.0; k], input_std: vec![1.0; k], target_mean: 0.0, target_std: 1.0 }
    }

    fn fit(data: &LabeledTable, rows: &[usize]) -> Self {
        let k = data.n_features();
        let n = rows.len().max(1) as f64;
        let stats = |get: &dyn Fn(usize) -> f64| {
            let mean = rows.iter().map(|&i| get(i)).sum::<f64>() / n;
            let var = rows.iter().map(|&i| (get(i) - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            (mean, if std > 0.0 && std.is_finite() { std } else { 1.0 })
        };
        let mut input_mean = Vec::with_capacity(k);
        let mut input_std = Vec::with_capacity(k);
        for f in 0..k {
            let (m, s) = stats(&|i| data.row(i)[f]);
            input_mean.push(m);
            input_std.push(s);
        }
        let (target_mean, target_std) = stats(&|i| data.targets()[i]);
        Self { input_mean, input_std, target_mean, target_std }
    }

    fn scale_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.input_mean).zip(&self.input_std).map(|((v, m), s)| (v - m) / s).collect()
    }

    fn scale_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MLPModel {
    layer_sizes: Vec<usize>,
    hidden_activation: ActivationKind,
    output_activation: ActivationKind,
    layers: Vec<DenseLayer>,
    standardization: Standardization,
}

impl MLPModel {
    /// Randomly initialised network, weights uniform in `±1/√fan_in`,
    /// biases zero.
    pub fn new(layer_sizes: &[usize], hidden: ActivationKind, output: ActivationKind, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return domain(format!("invalid layer sizes {layer_sizes:?}"));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return domain("the output layer must have exactly one unit");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_layers = layer_sizes.len() - 1;
        let layers = (0..n_layers)
            .map(|l| {
                let (n_in, n_out) = (layer_sizes[l], layer_sizes[l + 1]);
                let bound = 1.0 / (n_in as f64).sqrt();
                let weights = (0..n_in * n_out).map(|_| rng.random_range(-bound..=bound)).collect();
                let act = if l + 1 == n_layers { output } else { hidden };
                DenseLayer { n_in, n_out, weights, biases: vec![0.0; n_out], activation: act }
            })
            .collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            hidden_activation: hidden,
            output_activation: output,
            layers,
            standardization: Standardization::identity(layer_sizes[0]),
        })
    }

    /// The default 5–10–1 sigmoid/linear network.
    pub fn default_for(n_inputs: usize, seed: u64) -> Result<Self> {
        Self::new(&[n_inputs, 10, 1], ActivationKind::Sigmoid, ActivationKind::Direct, seed)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }
    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }
    pub fn hidden_activation(&self) -> ActivationKind {
        self.hidden_activation
    }
    pub fn output_activation(&self) -> ActivationKind {
        self.output_activation
    }
    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }
    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// All weights and biases, layer by layer (weights then biases).
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.biases);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return domain(format!("expected {} parameters, got {}", self.n_params(), p.len()));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&p[off..off + nw]);
            off += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&p[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    /// Prediction in raw target units.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        LabeledTable::check_row(self.n_inputs(), x)?;
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> f64 {
        let s = &self.standardization;
        let out = self.network_output(&s.scale_input(x));
        out * s.target_std + s.target_mean
    }

    /// Output of the network on already standardised inputs.
    fn network_output(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        for l in &self.layers {
            a = (0..l.n_out)
                .map(|o| {
                    let row = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                    let z = row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>() + l.biases[o];
                    l.activation.apply(z)
                })
                .collect();
        }
        a[0]
    }

    /// Mean squared error over `rows` in standardised target units.
    fn loss_on(&self, data: &LabeledTable, rows: &[usize]) -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        let s = &self.standardization;
        rows.iter()
            .map(|&i| (self.network_output(&s.scale_input(data.row(i))) - s.scale_target(data.targets()[i])).powi(2))
            .sum::<f64>()
            / rows.len() as f64
    }

    /// Gradient of [`Self::loss_on`] by backpropagation, flattened like
    /// [`Self::params`].
    fn gradient_on(&self, data: &LabeledTable, rows: &[usize]) -> Vec<f64> {
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> =
            self.layers.iter().map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()])).collect();
        let n = rows.len().max(1) as f64;
        let s = &self.standardization;
        for &i in rows {
            // forward, keeping pre-activations and activations
            let mut acts = vec![s.scale_input(data.row(i))];
            let mut pres = Vec::with_capacity(self.layers.len());
            for l in &self.layers {
                let a = acts.last().unwrap();
                let z: Vec<f64> = (0..l.n_out)
                    .map(|o| {
                        let row = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                        row.iter().zip(a).map(|(w, v)| w * v).sum::<f64>() + l.biases[o]
                    })
                    .collect();
                acts.push(z.iter().map(|&t| l.activation.apply(t)).collect());
                pres.push(z);
            }
            let y_hat = acts.last().unwrap()[0];
            let d_out = 2.0 * (y_hat - s.scale_target(data.targets()[i])) / n;
            let mut delta: Vec<f64> = vec![d_out * self.layers.last().unwrap().activation.derivative(pres.last().unwrap()[0])];
            for li in (0..self.layers.len()).rev() {
                let l = &self.layers[li];
                let a_prev = &acts[li];
                let (gw, gb) = &mut grads[li];
                for o in 0..l.n_out {
                    gb[o] += delta[o];
                    for j in 0..l.n_in {
                        gw[o * l.n_in + j] += delta[o] * a_prev[j];
                    }
                }
                if li > 0 {
                    let prev = &self.layers[li - 1];
                    delta = (0..l.n_in)
                        .map(|j| {
                            let back: f64 = (0..l.n_out).map(|o| l.weights[o * l.n_in + j] * delta[o]).sum();
                            back * prev.activation.derivative(pres[li - 1][j])
                        })
                        .collect();
                }
            }
        }
        let mut flat = Vec::with_capacity(self.n_params());
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        flat
    }

    /// Training loss over every row of `data`.
    pub fn loss(&self, data: &LabeledTable) -> f64 {
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        self.loss_on(data, &rows)
    }

    /// Analytic gradient of [`Self::loss`].
    pub fn loss_gradient(&self, data: &LabeledTable) -> Vec<f64> {
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        self.gradient_on(data, &rows)
    }
}

pub fn forward(model: &MLPModel, x: &[f64]) -> Result<f64> {
    model.forward(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Train, validation and test fractions. Validation and test may be zero.
    pub split_fractions: (f64, f64, f64),
    /// Epochs without validation improvement before stopping; 0 disables.
    pub early_stop_patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 500,
            batch_size: 32,
            seed: 0,
            split_fractions: (0.70, 0.15, 0.15),
            early_stop_patience: 25,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return domain("learning rate must be finite and nonnegative");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return domain("epochs and batch size must be positive");
        }
        let (a, b, c) = self.split_fractions;
        if !(a > 0.0 && b >= 0.0 && c >= 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
            return domain(format!("split fractions {:?} must be nonnegative (train positive) and sum to 1", self.split_fractions));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train: f64,
    pub validation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub model: MLPModel,
    pub history: Vec<EpochLoss>,
    /// Loss on the held-out test rows, in standardised units.
    pub test_loss: Option<f64>,
    pub best_epoch: usize,
}

/// Trains `model` on `data`. Rows are split per `cfg.split_fractions`; the
/// validation part drives early stopping and the best-validation parameters
/// are restored at the end.
pub fn train(model: &MLPModel, data: &LabeledTable, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.is_empty() {
        return domain("cannot train on an empty table");
    }
    if data.n_features() != model.n_inputs() {
        return Err(Error::Dimension { expected: model.n_inputs(), got: data.n_features() });
    }
    let (train_rows, val_rows, test_rows) = split_indices(data.n_rows(), cfg.split_fractions, cfg.seed)?;
    if train_rows.is_empty() {
        return domain("the training split is empty");
    }

    let mut model = model.clone();
    model.standardization = Standardization::fit(data, &train_rows);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6d6c_705f_7472_6169);
    let mut order = train_rows.clone();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, model.params(), 0usize);
    let mut stale = 0usize;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let g = model.gradient_on(data, batch);
            let mut p = model.params();
            for (pi, gi) in p.iter_mut().zip(&g) {
                *pi -= cfg.learning_rate * gi;
            }
            model.set_params(&p)?;
        }
        let train_loss = model.loss_on(data, &train_rows);
        let val_loss = (!val_rows.is_empty()).then(|| model.loss_on(data, &val_rows));
        if !train_loss.is_finite() || val_loss.is_some_and(|v| !v.is_finite()) {
            return Err(Error::Training(format!("loss diverged at epoch {epoch}")));
        }
        history.push(EpochLoss { epoch, train: train_loss, validation: val_loss });

        if let Some(v) = val_loss {
            if v < best.0 {
                best = (v, model.params(), epoch);
                stale = 0;
            } else {
                stale += 1;
                if cfg.early_stop_patience > 0 && stale >= cfg.early_stop_patience {
                    break;
                }
            }
        }
    }

    let best_epoch = if val_rows.is_empty() {
        history.len()
    } else {
        model.set_params(&best.1)?;
        best.2
    };
    let test_loss = (!test_rows.is_empty()).then(|| model.loss_on(data, &test_rows));
    Ok(TrainReport { model, history, test_loss, best_epoch })
}

/// Largest relative gap between backprop and central-difference gradients,
/// `|a - n| / max(|a|, |n|, 1e-6)` over all parameters.
pub fn gradient_check(model: &MLPModel, data: &LabeledTable, epsilon: f64) -> Result<f64> {
    if !(epsilon > 1e-8 && epsilon < 1e-3) {
        return domain(format!("epsilon must lie in (1e-8, 1e-3), got {epsilon}"));
    }
    if data.n_features() != model.n_inputs() {
        return Err(Error::Dimension { expected: model.n_inputs(), got: data.n_features() });
    }
    let analytic = model.loss_gradient(data);
    let base = model.params();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (i, a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[i] = base[i] + epsilon;
        probe.set_params(&p)?;
        let up = probe.loss(data);
        p[i] = base[i] - epsilon;
        probe.set_params(&p)?;
        let down = probe.loss(data);
        let numeric = (up - down) / (2.0 * epsilon);
        let gap = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Network shape and training settings, used to fit an MLP from a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub hidden_sizes: Vec<usize>,
    pub hidden_activation: ActivationKind,
    pub output_activation: ActivationKind,
    pub train: TrainConfig,
}

impl Default for MlpSpec {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![10],
            hidden_activation: ActivationKind::Sigmoid,
            output_activation: ActivationKind::Direct,
            train: TrainConfig::default(),
        }
    }
}

impl MlpSpec {
    pub fn fit(&self, data: &LabeledTable) -> Result<TrainReport> {
        let mut sizes = vec![data.n_features()];
        sizes.extend(&self.hidden_sizes);
        sizes.push(1);
        let model = MLPModel::new(&sizes, self.hidden_activation, self.output_activation, self.train.seed)?;
        train(&model, data, &self.train)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn activation_values() {
        assert_eq!(activation(ActivationKind::Sigmoid, 0.0), 0.5);
        assert_eq!(activation(ActivationKind::Tanh, 0.0), 0.0);
        assert_eq!(activation(ActivationKind::Relu, -3.0), 0.0);
        assert_eq!(activation(ActivationKind::Gaussian, 0.0), 1.0);
        assert_eq!(activation(ActivationKind::Direct, -2.5), -2.5);
        assert_relative_eq!(activation(ActivationKind::Sigmoid, 3f64.ln()), 0.75, max_relative = 1e-15);
    }

    #[test]
    fn derivatives_match_differences() {
        for kind in ActivationKind::ALL {
            for t in [-1.3, -0.2, 0.4, 2.0] {
                let h = 1e-6;
                let fd = (kind.apply(t + h) - kind.apply(t - h)) / (2.0 * h);
                assert!((fd - kind.derivative(t)).abs() < 1e-8, "{kind:?} at {t}");
            }
        }
    }

    fn zeroed(sizes: &[usize], hidden: ActivationKind) -> MLPModel {
        let mut m = MLPModel::new(sizes, hidden, ActivationKind::Direct, 0).unwrap();
        let n = m.n_params();
        m.set_params(&vec![0.0; n]).unwrap();
        m
    }

    #[test]
    fn zero_network_outputs() {
        let m = zeroed(&[3, 4, 1], ActivationKind::Tanh);
        assert_eq!(m.forward(&[1.0, -2.0, 5.0]).unwrap(), 0.0);
        let mut s = zeroed(&[2, 1, 1], ActivationKind::Sigmoid);
        s.layers_mut()[1].weights[0] = 1.0;
        assert_eq!(s.forward(&[3.0, 4.0]).unwrap(), 0.5);
        assert!(s.forward(&[1.0]).is_err());
    }

    #[test]
    fn hand_forward_pass() {
        // 2-3-1 with ReLU hidden units
        let mut m = zeroed(&[2, 3, 1], ActivationKind::Relu);
        m.layers_mut()[0].weights = vec![1.0, 2.0, -1.0, 1.0, 0.0, -2.0];
        m.layers_mut()[0].biases = vec![0.0, 1.0, -1.0];
        m.layers_mut()[1].weights = vec![1.0, -1.0, 2.0];
        m.layers_mut()[1].biases = vec![3.0];
        // x = (1, 2): z = (5, 2, -5) -> relu (5, 2, 0); y = 5 - 2 + 0 + 3 = 6
        assert_eq!(m.forward(&[1.0, 2.0]).unwrap(), 6.0);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] - 0.1 * r[1]).collect();
        let data = LabeledTable::from_rows(rows, y).unwrap();
        let m = MLPModel::new(&[2, 3, 1], ActivationKind::Tanh, ActivationKind::Direct, 4).unwrap();
        let cfg = TrainConfig { learning_rate: 0.0, epochs: 5, early_stop_patience: 0, ..Default::default() };
        let report = train(&m, &data, &cfg).unwrap();
        assert_eq!(report.model.params(), m.params());
        let first = report.history[0].train;
        assert!(report.history.iter().all(|e| e.train == first));
    }

    #[test]
    fn single_point_linear_fit() {
        let data = LabeledTable::from_rows(vec![vec![0.7, -1.2]], vec![3.3]).unwrap();
        let m = MLPModel::new(&[2, 2, 1], ActivationKind::Direct, ActivationKind::Direct, 1).unwrap();
        let cfg = TrainConfig { learning_rate: 0.1, epochs: 400, batch_size: 1, early_stop_patience: 0, ..Default::default() };
        let report = train(&m, &data, &cfg).unwrap();
        assert!(report.history.last().unwrap().train < 1e-10);
        assert!((report.model.forward(&[0.7, -1.2]).unwrap() - 3.3).abs() < 1e-4);
    }

    #[test]
    fn training_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1]).collect();
        let data = LabeledTable::from_rows(rows, y).unwrap();
        let spec = MlpSpec { train: TrainConfig { epochs: 30, seed: 9, ..Default::default() }, ..Default::default() };
        let a = spec.fit(&data).unwrap();
        let b = spec.fit(&data).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn divergence_is_reported() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| i as f64 * 3.0).collect();
        let data = LabeledTable::from_rows(rows, y).unwrap();
        let m = MLPModel::new(&[1, 4, 1], ActivationKind::Direct, ActivationKind::Direct, 2).unwrap();
        let cfg = TrainConfig { learning_rate: 50.0, epochs: 200, early_stop_patience: 0, ..Default::default() };
        match train(&m, &data, &cfg) {
            Err(Error::Training(msg)) => assert!(msg.contains("epoch")),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn gradient_check_linear_and_saddle() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.3 - 1.0, (i % 3) as f64 - 1.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 1.5 * r[0] - 0.5 * r[1] + 0.2).collect();
        let data = LabeledTable::from_rows(rows, y).unwrap();
        let m = MLPModel::new(&[2, 3, 1], ActivationKind::Direct, ActivationKind::Direct, 3).unwrap();
        assert!(gradient_check(&m, &data, 1e-5).unwrap() <= 1e-7);

        // zero weights and zero inputs with zero targets: every gradient vanishes
        let zeros = LabeledTable::from_rows(vec![vec![0.0, 0.0]; 3], vec![0.0; 3]).unwrap();
        let z = zeroed(&[2, 3, 1], ActivationKind::Tanh);
        assert!(z.loss_gradient(&zeros).iter().all(|g| g.abs() < 1e-15));
        assert!(gradient_check(&z, &zeros, 1e-5).unwrap() < 1e-9);
        assert!(gradient_check(&z, &zeros, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig { split_fractions: (0.3, 0.15, 0.3), ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(TrainConfig { epochs: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { split_fractions: (1.0, 0.0, 0.0), ..Default::default() }.validate().is_ok());
    }
}
