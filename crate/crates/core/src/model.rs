//! Residual temporal convolutional network classifier.
//!
//! Layout: causal stem conv → ReLU, then residual blocks of
//! `conv → ReLU → conv (+ skip) → ReLU`, then global average pooling and a
//! dense head producing logits. The skip path is the identity unless the
//! block changes the channel count, in which case it is a 1×1 conv.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::nn::{
    adam_step, causal_conv1d, causal_conv1d_backward, dense, dense_backward, global_avg_pool, global_avg_pool_backward,
    relu, relu_backward, softmax, softmax_xent, AdamState, ConvParams, DenseParams,
};
use crate::scalar::Real;
use crate::signal::{Window, WindowedDataset};
use crate::tensor::{Matrix, Tensor3};

/// Kernel width, output channels and dilation of one causal conv stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kernel: usize,
    pub channels: usize,
    pub dilation: usize,
}

impl LayerSpec {
    pub const fn new(kernel: usize, channels: usize, dilation: usize) -> Self {
        Self {
            kernel,
            channels,
            dilation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResTcnConfig {
    pub in_channels: usize,
    pub stem: LayerSpec,
    pub blocks: Vec<LayerSpec>,
    pub num_classes: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ResTcnConfig {
    /// Stem K=7/C=32, three K=3/C=32 blocks dilated 1, 2, 4; Adam 1e-3,
    /// batch 32, 30 epochs, seed 42.
    fn default() -> Self {
        Self {
            in_channels: 1,
            stem: LayerSpec::new(7, 32, 1),
            blocks: alloc::vec![
                LayerSpec::new(3, 32, 1),
                LayerSpec::new(3, 32, 2),
                LayerSpec::new(3, 32, 4)
            ],
            num_classes: 4,
            lr: 1e-3,
            batch_size: 32,
            epochs: 30,
            seed: 42,
        }
    }
}

impl ResTcnConfig {
    pub fn new(in_channels: usize, num_classes: usize) -> Self {
        Self {
            in_channels,
            num_classes,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 {
            bail!(Argument, "in_channels must be >= 1");
        }
        if self.blocks.is_empty() {
            bail!(Argument, "a residual TCN needs at least one block");
        }
        for (i, l) in core::iter::once(&self.stem).chain(&self.blocks).enumerate() {
            if l.kernel == 0 || l.channels == 0 || l.dilation == 0 {
                bail!(
                    Argument,
                    "layer {i}: kernel, channels and dilation must be >= 1, got {l:?}"
                );
            }
        }
        if self.num_classes < 2 {
            bail!(Argument, "num_classes must be >= 2, got {}", self.num_classes);
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            bail!(Argument, "learning rate must be positive, got {}", self.lr);
        }
        if self.batch_size == 0 {
            bail!(Argument, "batch_size must be >= 1");
        }
        Ok(())
    }

    /// Number of input samples that can influence one output sample:
    /// `1 + (K_stem - 1)·d_stem + Σ_blocks 2·(K - 1)·d`, since every block
    /// stacks two causal convs with the same dilation.
    pub fn receptive_field(&self) -> usize {
        1 + (self.stem.kernel - 1) * self.stem.dilation
            + self
                .blocks
                .iter()
                .map(|b| 2 * (b.kernel - 1) * b.dilation)
                .sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualBlock<T> {
    pub conv1: ConvParams<T>,
    pub conv2: ConvParams<T>,
    pub skip: Option<ConvParams<T>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    pub final_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResTcnModel<T> {
    pub config: ResTcnConfig,
    pub stem: ConvParams<T>,
    pub blocks: Vec<ResidualBlock<T>>,
    pub head: DenseParams<T>,
    pub meta: TrainingMeta,
}

/// Class decisions plus per-class probabilities (one row per input).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub classes: Vec<usize>,
    pub probabilities: Matrix<T>,
}

struct BlockCache<T> {
    input: Tensor3<T>,
    h1_pre: Tensor3<T>,
    h1: Tensor3<T>,
    sum: Tensor3<T>,
}

struct Cache<T> {
    input: Tensor3<T>,
    stem_pre: Tensor3<T>,
    blocks: Vec<BlockCache<T>>,
    time: usize,
    pooled: Matrix<T>,
}

impl<T: Real> ResTcnModel<T> {
    /// Deterministically initialised from `config.seed`.
    pub fn build(config: ResTcnConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let s = config.stem;
        let stem = ConvParams::he_init(s.channels, config.in_channels, s.kernel, s.dilation, &mut rng)?;
        let mut c_in = s.channels;
        let mut blocks = Vec::with_capacity(config.blocks.len());
        for b in &config.blocks {
            let conv1 = ConvParams::he_init(b.channels, c_in, b.kernel, b.dilation, &mut rng)?;
            let conv2 = ConvParams::he_init(b.channels, b.channels, b.kernel, b.dilation, &mut rng)?;
            let skip = if c_in != b.channels {
                Some(ConvParams::he_init(b.channels, c_in, 1, 1, &mut rng)?)
            } else {
                None
            };
            blocks.push(ResidualBlock { conv1, conv2, skip });
            c_in = b.channels;
        }
        let head = DenseParams::he_init(config.num_classes, c_in, &mut rng)?;
        Ok(Self {
            config,
            stem,
            blocks,
            head,
            meta: TrainingMeta::default(),
        })
    }

    /// Parameter tensors in declaration order: stem, each block
    /// (conv1, conv2, optional skip; weight before bias), then the head.
    pub fn parameters(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = Vec::new();
        out.push(&self.stem.weight);
        out.push(&self.stem.bias);
        for b in &self.blocks {
            out.push(&b.conv1.weight);
            out.push(&b.conv1.bias);
            out.push(&b.conv2.weight);
            out.push(&b.conv2.bias);
            if let Some(s) = &b.skip {
                out.push(&s.weight);
                out.push(&s.bias);
            }
        }
        out.push(&self.head.weight);
        out.push(&self.head.bias);
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        out.push(&mut self.stem.weight);
        out.push(&mut self.stem.bias);
        for b in &mut self.blocks {
            out.push(&mut b.conv1.weight);
            out.push(&mut b.conv1.bias);
            out.push(&mut b.conv2.weight);
            out.push(&mut b.conv2.bias);
            if let Some(s) = &mut b.skip {
                out.push(&mut s.weight);
                out.push(&mut s.bias);
            }
        }
        out.push(&mut self.head.weight);
        out.push(&mut self.head.bias);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }

    fn check_input(&self, x: &Tensor3<T>) -> Result<()> {
        if x.channels() != self.config.in_channels {
            bail!(
                Shape,
                "model expects {} input channels, got {}",
                self.config.in_channels,
                x.channels()
            );
        }
        if x.time() == 0 {
            bail!(Shape, "input has an empty time axis");
        }
        Ok(())
    }

    fn block_forward(b: &ResidualBlock<T>, x: &Tensor3<T>) -> Result<(Tensor3<T>, Tensor3<T>, Tensor3<T>)> {
        let h1_pre = causal_conv1d(x, &b.conv1)?;
        let h1 = relu(&h1_pre);
        let h2 = causal_conv1d(&h1, &b.conv2)?;
        let sum = match &b.skip {
            Some(s) => h2.add(&causal_conv1d(x, s)?)?,
            None => h2.add(x)?,
        };
        Ok((h1_pre, h1, sum))
    }

    /// Activations of the last residual block, before pooling.
    pub fn features(&self, x: &Tensor3<T>) -> Result<Tensor3<T>> {
        self.check_input(x)?;
        let mut h = relu(&causal_conv1d(x, &self.stem)?);
        for b in &self.blocks {
            let (_, _, sum) = Self::block_forward(b, &h)?;
            h = relu(&sum);
        }
        Ok(h)
    }

    pub fn logits(&self, x: &Tensor3<T>) -> Result<Matrix<T>> {
        let h = self.features(x)?;
        dense(&global_avg_pool(&h), &self.head)
    }

    fn forward_cached(&self, x: &Tensor3<T>) -> Result<(Matrix<T>, Cache<T>)> {
        self.check_input(x)?;
        let stem_pre = causal_conv1d(x, &self.stem)?;
        let mut h = relu(&stem_pre);
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let (h1_pre, h1, sum) = Self::block_forward(b, &h)?;
            let out = relu(&sum);
            blocks.push(BlockCache {
                input: h,
                h1_pre,
                h1,
                sum,
            });
            h = out;
        }
        let pooled = global_avg_pool(&h);
        let logits = dense(&pooled, &self.head)?;
        Ok((
            logits,
            Cache {
                input: x.clone(),
                stem_pre,
                blocks,
                time: x.time(),
                pooled,
            },
        ))
    }

    /// Gradients of the loss w.r.t. every parameter tensor, in
    /// [`parameters`](Self::parameters) order.
    fn backward(&self, cache: &Cache<T>, grad_logits: &Matrix<T>) -> Result<Vec<Vec<T>>> {
        let head = dense_backward(&cache.pooled, &self.head, grad_logits)?;
        let mut g = global_avg_pool_backward(&head.input, cache.time)?;
        let mut block_grads: Vec<Vec<Vec<T>>> = Vec::with_capacity(self.blocks.len());
        for (b, c) in self.blocks.iter().zip(&cache.blocks).rev() {
            let g_sum = relu_backward(&c.sum, &g)?;
            let conv2 = causal_conv1d_backward(&c.h1, &b.conv2, &g_sum)?;
            let g_h1 = relu_backward(&c.h1_pre, &conv2.input)?;
            let conv1 = causal_conv1d_backward(&c.input, &b.conv1, &g_h1)?;
            let mut grads = alloc::vec![conv1.weight, conv1.bias, conv2.weight, conv2.bias];
            let g_skip = match &b.skip {
                Some(s) => {
                    let sg = causal_conv1d_backward(&c.input, s, &g_sum)?;
                    grads.push(sg.weight);
                    grads.push(sg.bias);
                    sg.input
                }
                None => g_sum,
            };
            g = conv1.input.add(&g_skip)?;
            block_grads.push(grads);
        }
        let g_stem = relu_backward(&cache.stem_pre, &g)?;
        let stem = causal_conv1d_backward(&cache.input, &self.stem, &g_stem)?;

        let mut out = alloc::vec![stem.weight, stem.bias];
        out.extend(block_grads.into_iter().rev().flatten());
        out.push(head.weight);
        out.push(head.bias);
        Ok(out)
    }

    /// Mean cross-entropy on `(x, labels)` and its parameter gradients.
    pub fn loss_and_gradients(&self, x: &Tensor3<T>, labels: &[usize]) -> Result<(T, Vec<Vec<T>>)> {
        let (logits, cache) = self.forward_cached(x)?;
        let (loss, grad_logits) = softmax_xent(&logits, labels)?;
        let grads = self.backward(&cache, &grad_logits)?;
        Ok((loss, grads))
    }

    /// Argmax of softmax, ties toward the lower class index.
    pub fn predict(&self, x: &Tensor3<T>) -> Result<Prediction<T>> {
        let probabilities = softmax(&self.logits(x)?);
        let classes = (0..probabilities.rows())
            .map(|r| argmax(probabilities.row(r)))
            .collect();
        Ok(Prediction { classes, probabilities })
    }

    /// Predicts the windows of `ds` selected by `ids`, batched by the
    /// configured batch size.
    pub fn predict_windows(&self, ds: &WindowedDataset, ids: &[usize]) -> Result<Prediction<T>> {
        let mut classes = Vec::with_capacity(ids.len());
        let mut probs = Vec::with_capacity(ids.len() * self.config.num_classes);
        for chunk in ids.chunks(self.config.batch_size.max(1)) {
            let p = self.predict(&batch_tensor(ds, chunk)?)?;
            classes.extend(p.classes);
            probs.extend(p.probabilities.into_vec());
        }
        Ok(Prediction {
            classes,
            probabilities: Matrix::from_vec(ids.len(), self.config.num_classes, probs)?,
        })
    }

    /// Trains on every window of `ds`. Returns the mean loss of each epoch.
    pub fn train(&mut self, ds: &WindowedDataset, seed: u64) -> Result<Vec<f64>> {
        let ids: Vec<usize> = (0..ds.len()).collect();
        self.train_subset(ds, &ids, seed)
    }

    /// Mini-batch Adam over the windows selected by `ids`; batch order is
    /// reshuffled each epoch from `seed`.
    pub fn train_subset(&mut self, ds: &WindowedDataset, ids: &[usize], seed: u64) -> Result<Vec<f64>> {
        if ds.num_classes() != self.config.num_classes {
            bail!(
                Argument,
                "dataset has {} classes, model expects {}",
                ds.num_classes(),
                self.config.num_classes
            );
        }
        if ids.is_empty() {
            bail!(Argument, "cannot train on an empty set of windows");
        }
        if let Some(len) = ds.window_len() {
            let rf = self.config.receptive_field();
            if rf > len {
                log::warn!("receptive field {rf} exceeds window length {len}");
            }
        }
        let mut order = ids.to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adam = AdamState::new(self.config.lr)?;
        let mut curve = Vec::with_capacity(self.config.epochs);
        let labels_of = |chunk: &[usize]| chunk.iter().map(|&i| ds.windows()[i].label).collect::<Vec<_>>();

        for _ in 0..self.config.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for chunk in order.chunks(self.config.batch_size) {
                let x = batch_tensor(ds, chunk)?;
                let (loss, grads) = self.loss_and_gradients(&x, &labels_of(chunk))?;
                total += loss.to_f64() * chunk.len() as f64;
                let grad_refs: Vec<&[T]> = grads.iter().map(|g| g.as_slice()).collect();
                adam_step(&mut self.parameters_mut(), &grad_refs, &mut adam)?;
            }
            let epoch_loss = total / order.len() as f64;
            if !epoch_loss.is_finite() {
                bail!(Validation, "training diverged: epoch loss {epoch_loss}");
            }
            curve.push(epoch_loss);
        }
        self.meta.epochs_run += curve.len();
        if let Some(&last) = curve.last() {
            self.meta.final_loss = Some(last);
        }
        Ok(curve)
    }
}

pub(crate) fn argmax<T: Real>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Stacks the selected windows into an `(ids.len(), axes, len)` tensor.
pub fn batch_tensor<T: Real>(ds: &WindowedDataset, ids: &[usize]) -> Result<Tensor3<T>> {
    let windows: Vec<&Window> = ids
        .iter()
        .map(|&i| {
            ds.windows()
                .get(i)
                .ok_or_else(|| crate::Error::Lookup(alloc::format!("window id {i}")))
        })
        .collect::<Result<_>>()?;
    let (axes, len) = match windows.first() {
        Some(w) => (w.axes, w.len()),
        None => (ds.axes().unwrap_or(0), 0),
    };
    let mut data = Vec::with_capacity(ids.len() * axes * len);
    for w in windows {
        if w.axes != axes || w.len() != len {
            bail!(Shape, "window shapes differ within batch");
        }
        data.extend(w.values.iter().map(|&v| T::from_f64(v as f64)));
    }
    Tensor3::from_vec(ids.len(), axes, len, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_receptive_field() {
        // 1 + 6 + 2·(2·1 + 2·2 + 2·4)
        assert_eq!(ResTcnConfig::new(1, 4).receptive_field(), 35);
    }

    #[test]
    fn empty_blocks_rejected() {
        let cfg = ResTcnConfig {
            blocks: Vec::new(),
            ..ResTcnConfig::default()
        };
        assert!(matches!(ResTcnModel::<f32>::build(cfg), Err(crate::Error::Argument(_))));
    }

    #[test]
    fn single_class_rejected() {
        assert!(ResTcnModel::<f32>::build(ResTcnConfig::new(1, 1)).is_err());
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = ResTcnModel::<f32>::build(ResTcnConfig::new(3, 4)).unwrap();
        let b = ResTcnModel::<f32>::build(ResTcnConfig::new(3, 4)).unwrap();
        assert_eq!(a, b);
        let c = ResTcnModel::<f32>::build(ResTcnConfig {
            seed: 7,
            ..ResTcnConfig::new(3, 4)
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn skip_conv_only_on_channel_change() {
        let cfg = ResTcnConfig {
            stem: LayerSpec::new(3, 4, 1),
            blocks: alloc::vec![LayerSpec::new(3, 4, 1), LayerSpec::new(3, 6, 2)],
            ..ResTcnConfig::new(1, 2)
        };
        let m = ResTcnModel::<f64>::build(cfg).unwrap();
        assert!(m.blocks[0].skip.is_none());
        assert!(m.blocks[1].skip.is_some());
        assert_eq!(m.parameters().len(), 2 + 4 + 6 + 2);
    }

    #[test]
    fn argmax_prefers_lower_index_on_ties() {
        assert_eq!(argmax(&[0.25f64, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[0.5f64, 0.5]), 0);
    }

    #[test]
    fn input_channel_mismatch() {
        let m = ResTcnModel::<f64>::build(ResTcnConfig::new(2, 3)).unwrap();
        assert!(matches!(
            m.predict(&Tensor3::zeros(1, 1, 32)),
            Err(crate::Error::Shape(_))
        ));
    }
}
