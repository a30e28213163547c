//! Fully connected network: sigmoid hidden layers, softmax output, trained by
//! per-sample backpropagation on cross-entropy loss.

use super::ShapeError;
use rand_core::{RngCore, SeedableRng};
use std::fmt::Write as _;

/// SplitMix64 stream; drives weight initialization and epoch shuffles.
#[derive(Debug, Clone)]
pub struct SplitMix64(rand_xoshiro::SplitMix64);

impl SplitMix64 {
    /// The seed is the generator's initial state.
    pub fn new(seed: u64) -> Self {
        Self(rand_xoshiro::SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` by multiply-shift.
    pub fn below(&mut self, n: usize) -> usize {
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b),
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Layer>,
    labels: Vec<String>,
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

fn validate_labels(labels: &[String], classes: usize) -> Result<(), ShapeError> {
    if labels.len() != classes {
        return Err(ShapeError::LabelCount {
            labels: labels.len(),
            classes,
        });
    }
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() || l.chars().any(char::is_whitespace) || l.len() > 255 {
            return Err(ShapeError::BadLabel(l.clone()));
        }
        if labels[..i].contains(l) {
            return Err(ShapeError::BadLabel(l.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class_index: usize,
    pub label: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            seed: 0,
            shuffle: true,
        }
    }
}

/// Fixed-dimension samples with class indices into `labels`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    samples: Vec<(Vec<f64>, usize)>,
    labels: Vec<String>,
}

impl LabeledDataset {
    pub fn new(samples: Vec<(Vec<f64>, usize)>, labels: Vec<String>) -> Result<Self, ShapeError> {
        if let Some((first, _)) = samples.first() {
            let dim = first.len();
            for (x, c) in &samples {
                if x.len() != dim {
                    return Err(ShapeError::Dimension {
                        expected: dim,
                        got: x.len(),
                    });
                }
                if *c >= labels.len() {
                    return Err(ShapeError::ClassIndex(*c));
                }
            }
        }
        Ok(Self { samples, labels })
    }

    pub fn samples(&self) -> &[(Vec<f64>, usize)] {
        &self.samples
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> Option<usize> {
        self.samples.first().map(|(x, _)| x.len())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub struct TrainOutcome {
    pub model: MlpModel,
    /// Mean sample loss for each epoch, measured before each sample's update.
    pub loss_trace: Vec<f64>,
}

impl MlpModel {
    /// Weights uniform in `(-1/sqrt(fan_in), 1/sqrt(fan_in))`, biases zero.
    /// Labels default to `class0`, `class1`, ...
    pub fn init(layer_dims: &[usize], seed: u64) -> Result<Self, ShapeError> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(ShapeError::InvalidDims(layer_dims.to_vec()));
        }
        let mut rng = SplitMix64::new(seed);
        let layers = layer_dims
            .windows(2)
            .map(|d| {
                let bound = 1.0 / (d[0] as f64).sqrt();
                let mut l = Layer::zeros(d[0], d[1]);
                for w in &mut l.weights {
                    *w = (2.0 * rng.next_open01() - 1.0) * bound;
                }
                l
            })
            .collect();
        let classes = *layer_dims.last().expect("checked length");
        Ok(Self {
            layers,
            labels: (0..classes).map(|i| format!("class{i}")).collect(),
        })
    }

    /// Model with every weight and bias zero.
    pub fn zeros(layer_dims: &[usize]) -> Result<Self, ShapeError> {
        let mut m = Self::init(layer_dims, 0)?;
        for l in &mut m.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        Ok(m)
    }

    pub fn from_layers(layers: Vec<Layer>, labels: Vec<String>) -> Result<Self, ShapeError> {
        if layers.is_empty() {
            return Err(ShapeError::InvalidDims(vec![]));
        }
        for (i, l) in layers.iter().enumerate() {
            let bad = l.inputs == 0
                || l.outputs == 0
                || l.weights.len() != l.inputs * l.outputs
                || l.biases.len() != l.outputs
                || (i > 0 && layers[i - 1].outputs != l.inputs)
                || !l.weights.iter().chain(&l.biases).all(|v| v.is_finite());
            if bad {
                return Err(ShapeError::InvalidDims(
                    layers.iter().map(|l| l.inputs).collect(),
                ));
            }
        }
        validate_labels(&labels, layers.last().expect("non-empty").outputs)?;
        Ok(Self { layers, labels })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, ShapeError> {
        validate_labels(&labels, self.output_dim())?;
        self.labels = labels;
        Ok(self)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").outputs
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ShapeError> {
        if x.len() != self.input_dim() {
            return Err(ShapeError::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Activations of every layer, input first; the last entry is the softmax output.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.affine(acts.last().expect("input pushed"), &mut z);
            if i == last {
                softmax_in_place(&mut z);
            } else {
                z.iter_mut().for_each(|v| *v = sigmoid(*v));
            }
            acts.push(z);
        }
        acts
    }

    /// Class probabilities.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, ShapeError> {
        self.check_input(x)?;
        Ok(self.activations(x).pop().expect("output layer"))
    }

    /// Cross-entropy loss `-ln p[class]` and its exact gradient.
    pub fn backprop(&self, x: &[f64], class: usize) -> Result<(Gradients, f64), ShapeError> {
        self.check_input(x)?;
        if class >= self.output_dim() {
            return Err(ShapeError::ClassIndex(class));
        }
        let acts = self.activations(x);
        let probs = acts.last().expect("output layer");
        let loss = -probs[class].max(f64::MIN_POSITIVE).ln();

        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer::zeros(l.inputs, l.outputs))
            .collect();
        // softmax + cross-entropy: dL/dz = p - onehot
        let mut delta: Vec<f64> = probs.clone();
        delta[class] -= 1.0;
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &acts[li];
            let g = &mut grads[li];
            for (o, d) in delta.iter().enumerate() {
                g.biases[o] = *d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (gw, a) in row.iter_mut().zip(input) {
                    *gw = d * a;
                }
            }
            if li > 0 {
                delta = (0..layer.inputs)
                    .map(|i| {
                        let back: f64 = (0..layer.outputs)
                            .map(|o| layer.weights[o * layer.inputs + i] * delta[o])
                            .sum();
                        let a = input[i];
                        back * a * (1.0 - a)
                    })
                    .collect();
            }
        }
        Ok((Gradients { layers: grads }, loss))
    }

    fn step(&mut self, grads: &Gradients, lr: f64) {
        for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
            l.weights
                .iter_mut()
                .zip(&g.weights)
                .for_each(|(w, d)| *w -= lr * d);
            l.biases
                .iter_mut()
                .zip(&g.biases)
                .for_each(|(b, d)| *b -= lr * d);
        }
    }

    /// Per-sample SGD. Deterministic for a given model, dataset and config.
    pub fn train(
        mut self,
        data: &LabeledDataset,
        cfg: &TrainConfig,
    ) -> Result<TrainOutcome, ShapeError> {
        if cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 {
            return Err(ShapeError::LearningRate(cfg.learning_rate));
        }
        if data.is_empty() {
            return Err(ShapeError::EmptyDataset);
        }
        let dim = data.dim().expect("non-empty");
        if dim != self.input_dim() {
            return Err(ShapeError::Dimension {
                expected: self.input_dim(),
                got: dim,
            });
        }
        if let Some(&(_, c)) = data.samples.iter().find(|(_, c)| *c >= self.output_dim()) {
            return Err(ShapeError::ClassIndex(c));
        }
        let mut rng = SplitMix64::new(cfg.seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut trace = Vec::with_capacity(cfg.epochs);
        for _ in 0..cfg.epochs {
            if cfg.shuffle {
                for i in (1..order.len()).rev() {
                    order.swap(i, rng.below(i + 1));
                }
            }
            let mut total = 0.0;
            for &i in &order {
                let (x, c) = &data.samples[i];
                let (g, loss) = self.backprop(x, *c)?;
                total += loss;
                self.step(&g, cfg.learning_rate);
            }
            trace.push(total / data.len() as f64);
        }
        Ok(TrainOutcome {
            model: self,
            loss_trace: trace,
        })
    }

    /// Most probable class; ties go to the lowest index.
    pub fn classify(&self, x: &[f64]) -> Result<Classification, ShapeError> {
        let p = self.forward(x)?;
        let (class_index, confidence) =
            p.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                });
        Ok(Classification {
            class_index,
            label: self.labels[class_index].clone(),
            confidence,
        })
    }

    /// Fraction of samples whose argmax matches the label.
    pub fn accuracy(&self, data: &LabeledDataset) -> Result<f64, ShapeError> {
        if data.is_empty() {
            return Err(ShapeError::EmptyDataset);
        }
        let mut hits = 0usize;
        for (x, c) in &data.samples {
            if self.classify(x)?.class_index == *c {
                hits += 1;
            }
        }
        Ok(hits as f64 / data.len() as f64)
    }

    /// Text serialization: `ARMLP 1`, dims, labels, then one row per unit
    /// (incoming weights followed by the bias).
    pub fn save(&self) -> Vec<u8> {
        let mut s = String::from("ARMLP 1\n");
        let dims: Vec<String> = self.layer_dims().iter().map(ToString::to_string).collect();
        s.push_str(&dims.join(" "));
        s.push('\n');
        s.push_str(&self.labels.join(" "));
        s.push('\n');
        for l in &self.layers {
            for (row, b) in l.weights.chunks_exact(l.inputs).zip(&l.biases) {
                for w in row {
                    let _ = write!(s, "{w:.16e} ");
                }
                let _ = writeln!(s, "{b:.16e}");
            }
        }
        s.into_bytes()
    }

    pub fn load(bytes: &[u8]) -> Result<Self, ShapeError> {
        let text =
            std::str::from_utf8(bytes).map_err(|_| ShapeError::ModelFormat("not UTF-8".into()))?;
        let mut lines = text.lines();
        let fmt = |m: &str| ShapeError::ModelFormat(m.to_string());
        if lines.next().map(str::trim_end) != Some("ARMLP 1") {
            return Err(fmt("missing ARMLP 1 header"));
        }
        let dims: Vec<usize> = lines
            .next()
            .ok_or_else(|| fmt("missing dimension line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| fmt("bad dimension")))
            .collect::<Result<_, _>>()?;
        if dims.len() < 2 || dims.contains(&0) {
            return Err(fmt("need at least two non-zero dimensions"));
        }
        let labels: Vec<String> = lines
            .next()
            .ok_or_else(|| fmt("missing label line"))?
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for d in dims.windows(2) {
            let mut layer = Layer::zeros(d[0], d[1]);
            for o in 0..d[1] {
                let line = lines.next().ok_or_else(|| fmt("too few weight rows"))?;
                let vals: Vec<f64> = line
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| fmt("bad number")))
                    .collect::<Result<_, _>>()?;
                if vals.len() != d[0] + 1 {
                    return Err(fmt("weight row has wrong length"));
                }
                layer.weights[o * d[0]..(o + 1) * d[0]].copy_from_slice(&vals[..d[0]]);
                layer.biases[o] = vals[d[0]];
            }
            layers.push(layer);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(fmt("too many weight rows"));
        }
        Self::from_layers(layers, labels).map_err(|e| ShapeError::ModelFormat(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs for seed 0 as published with the reference implementation
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        let mut r = SplitMix64::new(7);
        for _ in 0..1000 {
            let u = r.next_open01();
            assert!(u > 0.0 && u < 1.0);
            assert!(r.below(5) < 5);
        }
    }

    #[test]
    fn init_deterministic_and_bounded() {
        let a = MlpModel::init(&[70, 16, 5], 9).unwrap();
        assert_eq!(a, MlpModel::init(&[70, 16, 5], 9).unwrap());
        assert_ne!(a, MlpModel::init(&[70, 16, 5], 10).unwrap());
        for l in a.layers() {
            let bound = 1.0 / (l.inputs as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() < bound));
            assert!(l.biases.iter().all(|&b| b == 0.0));
        }
        assert_eq!(a.layer_dims(), vec![70, 16, 5]);
        assert!(MlpModel::init(&[3], 0).is_err());
        assert!(MlpModel::init(&[3, 0, 2], 0).is_err());
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = MlpModel::zeros(&[4, 3, 5]).unwrap();
        let p = m.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(p.iter().all(|v| (v - 0.2).abs() < 1e-15));
        let (g, loss) = m.backprop(&[0.1, 0.2, 0.3, 0.4], 2).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-9);
        let out_bias = &g.layers[1].biases;
        for (i, v) in out_bias.iter().enumerate() {
            let want = 0.2 - if i == 2 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-15);
        }
        let c = MlpModel::zeros(&[2, 2])
            .unwrap()
            .with_labels(vec!["a".into(), "b".into()])
            .unwrap()
            .classify(&[0.3, 0.9])
            .unwrap();
        assert_eq!((c.label.as_str(), c.confidence), ("a", 0.5));
    }

    #[test]
    fn bias_shift_invariance() {
        let mut m = MlpModel::init(&[5, 4, 3], 3).unwrap();
        let x = [0.1, 0.5, 0.9, 0.0, 1.0];
        let p0 = m.forward(&x).unwrap();
        m.layers_mut()[1]
            .biases
            .iter_mut()
            .for_each(|b| *b += 17.25);
        let p1 = m.forward(&x).unwrap();
        for (a, b) in p0.iter().zip(&p1) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((p1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_2_2_2() {
        // hidden: h = sigmoid(W1 x + b1), W1 = [[1,-1],[0.5,2]], b1 = [0, -1]
        // output: z = W2 h + b2, W2 = [[2,0],[-1,1]], b2 = [0.5, 0]
        let layers = vec![
            Layer {
                inputs: 2,
                outputs: 2,
                weights: vec![1.0, -1.0, 0.5, 2.0],
                biases: vec![0.0, -1.0],
            },
            Layer {
                inputs: 2,
                outputs: 2,
                weights: vec![2.0, 0.0, -1.0, 1.0],
                biases: vec![0.5, 0.0],
            },
        ];
        let m = MlpModel::from_layers(layers, vec!["p".into(), "q".into()]).unwrap();
        let x = [1.0, 0.5];
        // h1 = sigmoid(0.5), h2 = sigmoid(0.5 + 1 - 1) = sigmoid(0.5)
        let h = 1.0 / (1.0 + (-0.5f64).exp());
        let z0 = 2.0 * h + 0.5;
        let z1 = -h + h;
        let p0 = 1.0 / (1.0 + (z1 - z0).exp());
        let p = m.forward(&x).unwrap();
        assert!((p[0] - p0).abs() < 1e-9 && (p[1] - (1.0 - p0)).abs() < 1e-9);
    }

    #[test]
    fn saturating_model_picks_class() {
        let mut m = MlpModel::zeros(&[3, 4]).unwrap();
        m.layers_mut()[0].biases[2] = 50.0;
        let c = m.classify(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!((c.class_index, c.label.as_str()), (2, "class2"));
        assert!(c.confidence > 0.99);
    }

    #[test]
    fn dimension_errors() {
        let m = MlpModel::zeros(&[3, 2]).unwrap();
        assert!(matches!(
            m.forward(&[1.0]),
            Err(ShapeError::Dimension {
                expected: 3,
                got: 1
            })
        ));
        assert!(matches!(
            m.backprop(&[1.0, 2.0, 3.0], 2),
            Err(ShapeError::ClassIndex(2))
        ));
        assert!(matches!(m.classify(&[]), Err(ShapeError::Dimension { .. })));
    }

    #[test]
    fn zero_epochs_is_identity() {
        let m = MlpModel::init(&[2, 3, 2], 1).unwrap();
        let data =
            LabeledDataset::new(vec![(vec![0.0, 1.0], 1)], vec!["a".into(), "b".into()]).unwrap();
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let out = m.clone().train(&data, &cfg).unwrap();
        assert_eq!(out.model, m);
        assert!(out.loss_trace.is_empty());
    }

    #[test]
    fn single_sample_loss_decreases() {
        let m = MlpModel::init(&[4, 6, 3], 5).unwrap();
        let data = LabeledDataset::new(
            vec![(vec![0.2, 0.7, 0.1, 0.9], 1)],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.5,
            epochs: 400,
            seed: 1,
            shuffle: true,
        };
        let out = m.train(&data, &cfg).unwrap();
        assert!(out.loss_trace.windows(2).all(|w| w[1] < w[0]));
        assert!(*out.loss_trace.last().unwrap() < 1e-3);
    }

    #[test]
    fn train_errors() {
        let m = MlpModel::init(&[2, 2], 1).unwrap();
        let empty = LabeledDataset::new(vec![], vec!["a".into()]).unwrap();
        assert!(matches!(
            m.clone().train(&empty, &TrainConfig::default()),
            Err(ShapeError::EmptyDataset)
        ));
        let wrong = LabeledDataset::new(vec![(vec![1.0; 3], 0)], vec!["a".into()]).unwrap();
        assert!(matches!(
            m.clone().train(&wrong, &TrainConfig::default()),
            Err(ShapeError::Dimension { .. })
        ));
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        let ok = LabeledDataset::new(vec![(vec![1.0; 2], 0)], vec!["a".into()]).unwrap();
        assert!(matches!(
            m.train(&ok, &cfg),
            Err(ShapeError::LearningRate(_))
        ));
        assert!(
            LabeledDataset::new(vec![(vec![1.0], 0), (vec![1.0, 2.0], 0)], vec!["a".into()])
                .is_err()
        );
        assert!(LabeledDataset::new(vec![(vec![1.0], 3)], vec!["a".into()]).is_err());
    }

    #[test]
    fn save_load_exact() {
        let m = MlpModel::init(&[7, 5, 3], 77)
            .unwrap()
            .with_labels(vec!["x".into(), "y".into(), "z".into()])
            .unwrap();
        let bytes = m.save();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("ARMLP 1\n7 5 3\nx y z\n"));
        assert_eq!(text.lines().count(), 3 + 5 + 3);
        let back = MlpModel::load(&bytes).unwrap();
        assert_eq!(back, m);
        let x = [0.3, 0.1, 0.0, 1.0, 0.5, 0.25, 0.75];
        assert_eq!(back.forward(&x).unwrap(), m.forward(&x).unwrap());
    }

    #[test]
    fn load_rejects_corruption() {
        let m = MlpModel::init(&[3, 2, 2], 1).unwrap();
        let text = String::from_utf8(m.save()).unwrap();
        let bad_dims = text.replacen("3 2 2", "3 x 2", 1);
        assert!(MlpModel::load(bad_dims.as_bytes()).is_err());
        let mut lines: Vec<&str> = text.lines().collect();
        lines.pop();
        assert!(MlpModel::load(lines.join("\n").as_bytes()).is_err());
        let extra = format!("{text}{}\n", lines[3]);
        assert!(MlpModel::load(extra.as_bytes()).is_err());
        assert!(MlpModel::load(b"ARMLP 2\n").is_err());
        let short_row = text.replacen(lines[3], "0.5", 1);
        assert!(MlpModel::load(short_row.as_bytes()).is_err());
        let bad_labels = text.replacen("class0 class1", "only", 1);
        assert!(MlpModel::load(bad_labels.as_bytes()).is_err());
    }
}
