//! Trainable retrieval head: a two-matrix FFNN with ReLU and inverted dropout,
//! trained with softmax cross-entropy over the in-batch speech-text cosine
//! similarity matrix. Forward and backward passes are hand-written; parameters
//! are stored as f32 and all arithmetic runs in f64 so analytic gradients can
//! be checked against central finite differences.
//!
//! The forward/backward kernels keep explicit index loops so the code lines up
//! with the matrix notation it implements.
#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::util::{fnv1a64, splitmix64};
use crate::vecmath::Embedding;
use crate::{Error, Result};

const STREAM_INIT: u64 = 0x494e_4954_0001;
const STREAM_TRAIN: u64 = 0x5452_4149_4e01;

const CHECKPOINT_MAGIC: &[u8; 4] = b"RENC";
const CHECKPOINT_VERSION: u32 = 1;

/// Parameters of the retrieval encoder head.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderHead {
    dim_in: usize,
    hidden: usize,
    dim_out: usize,
    w1: Vec<f32>, // hidden x dim_in, row-major
    b1: Vec<f32>,
    w2: Vec<f32>, // dim_out x hidden, row-major
    b2: Vec<f32>,
    dropout_rate: f32,
}

/// Gradients of the batch loss with respect to every head parameter.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeros(head: &EncoderHead) -> Self {
        Gradients {
            w1: vec![0.0; head.w1.len()],
            b1: vec![0.0; head.b1.len()],
            w2: vec![0.0; head.w2.len()],
            b2: vec![0.0; head.b2.len()],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .fold(0.0f64, |m, g| m.max(g.abs()))
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub steps: usize,
    pub lr: f64,
    pub momentum: f64,
    pub warmup_steps: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        // Production-scale schedule; desk runs override steps/warmup.
        TrainConfig {
            batch_size: 128,
            steps: 1_500_000,
            lr: 0.001,
            momentum: 0.9,
            warmup_steps: 10_000,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidConfig("batch_size must be >= 2".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be >= 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidConfig("lr must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("momentum must be in [0, 1)".into()));
        }
        if self.warmup_steps > self.steps {
            return Err(Error::InvalidConfig("warmup_steps must be <= steps".into()));
        }
        Ok(())
    }
}

/// Learning rate at step `t` (0-based): linear warmup from 0, then constant.
pub fn lr_at(cfg: &TrainConfig, t: usize) -> f64 {
    if cfg.warmup_steps == 0 {
        cfg.lr
    } else {
        cfg.lr * (t as f64 / cfg.warmup_steps as f64).min(1.0)
    }
}

impl EncoderHead {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim_in: usize,
        hidden: usize,
        dim_out: usize,
        w1: Vec<f32>,
        b1: Vec<f32>,
        w2: Vec<f32>,
        b2: Vec<f32>,
        dropout_rate: f32,
    ) -> Result<Self> {
        if w1.len() != hidden * dim_in
            || b1.len() != hidden
            || w2.len() != dim_out * hidden
            || b2.len() != dim_out
        {
            return Err(Error::InvalidConfig("encoder head shape mismatch".into()));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::InvalidConfig("dropout_rate must be in [0, 1)".into()));
        }
        let all_finite = w1
            .iter()
            .chain(&b1)
            .chain(&w2)
            .chain(&b2)
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::NonFinite("encoder head parameters".into()));
        }
        Ok(EncoderHead {
            dim_in,
            hidden,
            dim_out,
            w1,
            b1,
            w2,
            b2,
            dropout_rate,
        })
    }

    /// Seeded uniform init scaled by 1/sqrt(fan_in).
    pub fn new_random(dim_in: usize, hidden: usize, dropout_rate: f32, seed: u64) -> Self {
        let dim_out = dim_in;
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ STREAM_INIT));
        let mut draw = |n: usize, fan_in: usize| -> Vec<f32> {
            let scale = 1.0 / (fan_in as f64).sqrt();
            (0..n)
                .map(|_| (rng.gen_range(-1.0..1.0f64) * scale) as f32)
                .collect()
        };
        let w1 = draw(hidden * dim_in, dim_in);
        let b1 = vec![0.0; hidden];
        let w2 = draw(dim_out * hidden, hidden);
        let b2 = vec![0.0; dim_out];
        EncoderHead {
            dim_in,
            hidden,
            dim_out,
            w1,
            b1,
            w2,
            b2,
            dropout_rate,
        }
    }

    /// Near-identity init for any hidden width that is an even multiple of
    /// dim_in: w1 stacks k copies of [I; -I] and w2 averages them back, so
    /// relu(x) - relu(-x) reproduces the input exactly and the untrained head
    /// starts at mean-pool retrieval quality. Small seeded noise breaks the
    /// copy symmetry so training can move the copies independently.
    pub fn new_near_identity(dim_in: usize, hidden: usize, dropout_rate: f32, seed: u64) -> Result<Self> {
        if hidden == 0 || !hidden.is_multiple_of(2 * dim_in) {
            return Err(Error::InvalidConfig(format!(
                "near-identity init needs hidden to be a positive multiple of 2 * dim_in; got hidden {hidden}, dim {dim_in}"
            )));
        }
        let copies = hidden / (2 * dim_in);
        let dim_out = dim_in;
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ STREAM_INIT));
        let noise = 0.02 / (dim_in as f64).sqrt();
        let mut jitter = |v: f64| (v + rng.gen_range(-1.0..1.0f64) * noise) as f32;
        let mut w1 = vec![0.0f32; hidden * dim_in];
        let mut w2 = vec![0.0f32; dim_out * hidden];
        let inv_k = 1.0 / copies as f64;
        for c in 0..copies {
            let base = c * 2 * dim_in;
            for i in 0..dim_in {
                for d in 0..dim_in {
                    let eye = if i == d { 1.0 } else { 0.0 };
                    w1[(base + i) * dim_in + d] = jitter(eye);
                    w1[(base + dim_in + i) * dim_in + d] = jitter(-eye);
                }
            }
            for k in 0..dim_out {
                for m in 0..dim_in {
                    let eye = if k == m { inv_k } else { 0.0 };
                    w2[k * hidden + base + m] = jitter(eye);
                    w2[k * hidden + base + dim_in + m] = jitter(-eye);
                }
            }
        }
        Ok(EncoderHead {
            dim_in,
            hidden,
            dim_out,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; dim_out],
            dropout_rate,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Flat parameter access, for finite-difference checks and the optimizer.
    pub fn get_param(&self, i: usize) -> f32 {
        let (w1, b1, w2) = (self.w1.len(), self.b1.len(), self.w2.len());
        if i < w1 {
            self.w1[i]
        } else if i < w1 + b1 {
            self.b1[i - w1]
        } else if i < w1 + b1 + w2 {
            self.w2[i - w1 - b1]
        } else {
            self.b2[i - w1 - b1 - w2]
        }
    }

    pub fn set_param(&mut self, i: usize, v: f32) {
        let (w1, b1, w2) = (self.w1.len(), self.b1.len(), self.w2.len());
        if i < w1 {
            self.w1[i] = v;
        } else if i < w1 + b1 {
            self.b1[i - w1] = v;
        } else if i < w1 + b1 + w2 {
            self.w2[i - w1 - b1] = v;
        } else {
            self.b2[i - w1 - b1 - w2] = v;
        }
    }

    pub fn grad_param(g: &Gradients, i: usize) -> f64 {
        let (w1, b1, w2) = (g.w1.len(), g.b1.len(), g.w2.len());
        if i < w1 {
            g.w1[i]
        } else if i < w1 + b1 {
            g.b1[i - w1]
        } else if i < w1 + b1 + w2 {
            g.w2[i - w1 - b1]
        } else {
            g.b2[i - w1 - b1 - w2]
        }
    }

    fn check_input(&self, pooled: &Embedding) -> Result<()> {
        if pooled.dim() != self.dim_in {
            return Err(Error::DimMismatch {
                left: self.dim_in,
                right: pooled.dim(),
            });
        }
        Ok(())
    }

    /// Dropout mask over hidden units; entries are 0 or 1/(1-rate).
    fn dropout_mask(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let keep = 1.0 - self.dropout_rate as f64;
        (0..self.hidden)
            .map(|_| {
                if rng.gen::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Core forward in f64. Returns (pre-activation, hidden after relu and
    /// dropout, output).
    fn forward_f64(&self, x: &[f64], mask: Option<&[f64]>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut a1 = vec![0.0f64; self.hidden];
        for m in 0..self.hidden {
            let row = &self.w1[m * self.dim_in..(m + 1) * self.dim_in];
            let mut acc = self.b1[m] as f64;
            for (w, xv) in row.iter().zip(x) {
                acc += *w as f64 * xv;
            }
            a1[m] = acc;
        }
        let mut h = vec![0.0f64; self.hidden];
        for m in 0..self.hidden {
            let r = a1[m].max(0.0);
            h[m] = match mask {
                Some(mk) => r * mk[m],
                None => r,
            };
        }
        let mut z = vec![0.0f64; self.dim_out];
        for k in 0..self.dim_out {
            let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
            let mut acc = self.b2[k] as f64;
            for (w, hv) in row.iter().zip(&h) {
                acc += *w as f64 * hv;
            }
            z[k] = acc;
        }
        (a1, h, z)
    }

    /// Inference/training forward. Dropout is applied only when `training` and
    /// draws from `rng`; the inference path never consults the random stream.
    pub fn forward(
        &self,
        pooled: &Embedding,
        training: bool,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<Embedding> {
        self.check_input(pooled)?;
        let x: Vec<f64> = pooled.values().iter().map(|&v| v as f64).collect();
        let mask = if training && self.dropout_rate > 0.0 {
            let rng = rng.ok_or_else(|| {
                Error::InvalidConfig("training forward with dropout requires an rng".into())
            })?;
            Some(self.dropout_mask(rng))
        } else {
            None
        };
        let (_, _, z) = self.forward_f64(&x, mask.as_deref());
        Embedding::new(z.into_iter().map(|v| v as f32).collect())
    }
}

/// Softmax cross-entropy over the rows of a similarity matrix, diagonal as the
/// positive class. Uses max-subtracted log-sum-exp.
pub fn loss_from_similarity(p: &[Vec<f64>]) -> f64 {
    let b = p.len();
    let mut total = 0.0;
    for (i, row) in p.iter().enumerate() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - row[i];
    }
    total / b as f64
}

struct BatchForward {
    xs_t: Vec<Vec<f64>>,
    xs_s: Vec<Vec<f64>>,
    acts_t: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    acts_s: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    masks_t: Vec<Option<Vec<f64>>>,
    masks_s: Vec<Option<Vec<f64>>>,
    norms_t: Vec<f64>,
    norms_s: Vec<f64>,
    p: Vec<Vec<f64>>,
    loss: f64,
}

fn batch_forward(
    head: &EncoderHead,
    batch: &[(Embedding, Embedding)],
    training: bool,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<BatchForward> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("training batch".into()));
    }
    let b = batch.len();
    let mut xs_t = Vec::with_capacity(b);
    let mut xs_s = Vec::with_capacity(b);
    let mut acts_t = Vec::with_capacity(b);
    let mut acts_s = Vec::with_capacity(b);
    let mut masks_t = Vec::with_capacity(b);
    let mut masks_s = Vec::with_capacity(b);
    for (text, speech) in batch {
        head.check_input(text)?;
        head.check_input(speech)?;
        let xt: Vec<f64> = text.values().iter().map(|&v| v as f64).collect();
        let xsp: Vec<f64> = speech.values().iter().map(|&v| v as f64).collect();
        let (mt, ms) = if training && head.dropout_rate > 0.0 {
            let r = rng.as_deref_mut().ok_or_else(|| {
                Error::InvalidConfig("training batch with dropout requires an rng".into())
            })?;
            (Some(head.dropout_mask(r)), Some(head.dropout_mask(r)))
        } else {
            (None, None)
        };
        acts_t.push(head.forward_f64(&xt, mt.as_deref()));
        acts_s.push(head.forward_f64(&xsp, ms.as_deref()));
        xs_t.push(xt);
        xs_s.push(xsp);
        masks_t.push(mt);
        masks_s.push(ms);
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut norms_t = Vec::with_capacity(b);
    let mut norms_s = Vec::with_capacity(b);
    for i in 0..b {
        let nt = norm(&acts_t[i].2);
        if nt == 0.0 {
            return Err(Error::zero_norm(format!("z(text) for batch element {i}")));
        }
        let ns = norm(&acts_s[i].2);
        if ns == 0.0 {
            return Err(Error::zero_norm(format!("z(speech) for batch element {i}")));
        }
        norms_t.push(nt);
        norms_s.push(ns);
    }
    let mut p = vec![vec![0.0f64; b]; b];
    for i in 0..b {
        for j in 0..b {
            let d: f64 = acts_t[i]
                .2
                .iter()
                .zip(&acts_s[j].2)
                .map(|(a, c)| a * c)
                .sum();
            p[i][j] = d / (norms_t[i] * norms_s[j]);
        }
    }
    let loss = loss_from_similarity(&p);
    Ok(BatchForward {
        xs_t,
        xs_s,
        acts_t,
        acts_s,
        masks_t,
        masks_s,
        norms_t,
        norms_s,
        p,
        loss,
    })
}

/// Loss and the (clamped) similarity matrix for one batch.
pub fn batch_loss(
    head: &EncoderHead,
    batch: &[(Embedding, Embedding)],
    training: bool,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let fwd = batch_forward(head, batch, training, rng)?;
    let p = fwd
        .p
        .iter()
        .map(|row| row.iter().map(|v| v.clamp(-1.0, 1.0)).collect())
        .collect();
    Ok((fwd.loss, p))
}

/// Loss plus exact analytic gradients, backpropagated through softmax-CE, the
/// cosine normalization, and the FFNN on both sides of the shared head.
pub fn batch_gradients(
    head: &EncoderHead,
    batch: &[(Embedding, Embedding)],
    training: bool,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Gradients)> {
    let fwd = batch_forward(head, batch, training, rng)?;
    let b = batch.len();
    let dim_out = head.dim_out;

    // dL/dp[i][j] = (softmax_row_i[j] - delta_ij) / B
    let mut dp = vec![vec![0.0f64; b]; b];
    for i in 0..b {
        let row = &fwd.p[i];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        for j in 0..b {
            let q = exps[j] / sum;
            dp[i][j] = (q - if i == j { 1.0 } else { 0.0 }) / b as f64;
        }
    }

    // Cosine backward: accumulate gradients on z(t_i) and z(s_j).
    let mut g_zt = vec![vec![0.0f64; dim_out]; b];
    let mut g_zs = vec![vec![0.0f64; dim_out]; b];
    for i in 0..b {
        let zt = &fwd.acts_t[i].2;
        let nt = fwd.norms_t[i];
        for j in 0..b {
            let g = dp[i][j];
            if g == 0.0 {
                continue;
            }
            let zs = &fwd.acts_s[j].2;
            let ns = fwd.norms_s[j];
            let c = fwd.p[i][j];
            let inv = 1.0 / (nt * ns);
            for k in 0..dim_out {
                g_zt[i][k] += g * (zs[k] * inv - c * zt[k] / (nt * nt));
                g_zs[j][k] += g * (zt[k] * inv - c * zs[k] / (ns * ns));
            }
        }
    }

    // FFNN backward, both sides sharing the parameters.
    let mut grads = Gradients::zeros(head);
    let mut backprop = |x: &[f64],
                        acts: &(Vec<f64>, Vec<f64>, Vec<f64>),
                        mask: &Option<Vec<f64>>,
                        g_z: &[f64]| {
        let (a1, h, _) = acts;
        for k in 0..head.dim_out {
            grads.b2[k] += g_z[k];
            let row = &mut grads.w2[k * head.hidden..(k + 1) * head.hidden];
            for m in 0..head.hidden {
                row[m] += g_z[k] * h[m];
            }
        }
        let mut g_a = vec![0.0f64; head.hidden];
        for m in 0..head.hidden {
            let mut acc = 0.0;
            for k in 0..head.dim_out {
                acc += head.w2[k * head.hidden + m] as f64 * g_z[k];
            }
            let relu_gate = if a1[m] > 0.0 { 1.0 } else { 0.0 };
            let scale = mask.as_ref().map_or(1.0, |mk| mk[m]);
            g_a[m] = acc * relu_gate * scale;
        }
        for m in 0..head.hidden {
            grads.b1[m] += g_a[m];
            let row = &mut grads.w1[m * head.dim_in..(m + 1) * head.dim_in];
            for d in 0..head.dim_in {
                row[d] += g_a[m] * x[d];
            }
        }
    };
    for i in 0..b {
        backprop(&fwd.xs_t[i], &fwd.acts_t[i], &fwd.masks_t[i], &g_zt[i]);
        backprop(&fwd.xs_s[i], &fwd.acts_s[i], &fwd.masks_s[i], &g_zs[i]);
    }
    Ok((fwd.loss, grads))
}

/// Mini-batch gradient descent with classical momentum and linear warmup.
/// Batches are drawn by seeded shuffling each epoch; fully deterministic
/// given `cfg.seed`.
pub fn train(
    head: &EncoderHead,
    dataset: &[(Embedding, Embedding)],
    cfg: &TrainConfig,
) -> Result<(EncoderHead, Vec<f64>)> {
    cfg.validate()?;
    if dataset.len() < cfg.batch_size {
        return Err(Error::InvalidConfig(format!(
            "dataset has {} pairs but batch_size is {}",
            dataset.len(),
            cfg.batch_size
        )));
    }
    let mut head = head.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ STREAM_TRAIN));
    let n_params = head.param_count();
    let mut velocity = vec![0.0f32; n_params];
    let mut losses = Vec::with_capacity(cfg.steps);

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut cursor = order.len(); // force a shuffle before the first batch

    for t in 0..cfg.steps {
        if cursor + cfg.batch_size > order.len() {
            shuffle(&mut order, &mut rng);
            cursor = 0;
        }
        let batch: Vec<(Embedding, Embedding)> = order[cursor..cursor + cfg.batch_size]
            .iter()
            .map(|&i| dataset[i].clone())
            .collect();
        cursor += cfg.batch_size;

        let (loss, grads) = batch_gradients(&head, &batch, true, Some(&mut rng))?;
        if !loss.is_finite() {
            return Err(Error::Diverged { step: t });
        }
        losses.push(loss);

        let lr = lr_at(cfg, t);
        for i in 0..n_params {
            let g = EncoderHead::grad_param(&grads, i);
            let v = cfg.momentum as f32 * velocity[i] - (lr * g) as f32;
            velocity[i] = v;
            head.set_param(i, head.get_param(i) + v);
        }
    }
    Ok((head, losses))
}

/// Central finite differences of the batch loss over every parameter,
/// perturbing the stored f32 values (the denominator is the actually
/// representable delta). Returns the max relative error against the analytic
/// gradients; a verification utility, not part of the training path.
pub fn finite_difference_max_rel_error(
    head: &EncoderHead,
    pairs: &[(Embedding, Embedding)],
    h: f64,
) -> Result<f64> {
    let (_, grads) = batch_gradients(head, pairs, false, None)?;
    let mut max_rel = 0.0f64;
    for i in 0..head.param_count() {
        let orig = head.get_param(i);
        let plus = (orig as f64 + h) as f32;
        let minus = (orig as f64 - h) as f32;
        let mut probe = head.clone();
        probe.set_param(i, plus);
        let (lp, _) = batch_loss(&probe, pairs, false, None)?;
        probe.set_param(i, minus);
        let (lm, _) = batch_loss(&probe, pairs, false, None)?;
        let fd = (lp - lm) / (plus as f64 - minus as f64);
        let analytic = EncoderHead::grad_param(&grads, i);
        let denom = analytic.abs().max(fd.abs()).max(1e-8);
        max_rel = max_rel.max((analytic - fd).abs() / denom);
    }
    Ok(max_rel)
}

fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

// --- checkpoint format: magic, version, dims, dropout, f32 parameter blocks
// (row-major, little-endian), trailing FNV-1a64 checksum ---

impl EncoderHead {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(CHECKPOINT_MAGIC);
        buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.dim_in as u32).to_le_bytes());
        buf.extend_from_slice(&(self.hidden as u32).to_le_bytes());
        buf.extend_from_slice(&(self.dim_out as u32).to_le_bytes());
        buf.extend_from_slice(&self.dropout_rate.to_le_bytes());
        for block in [&self.w1, &self.b1, &self.w2, &self.b2] {
            for v in block.iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let checksum = fnv1a64(&buf);
        buf.extend_from_slice(&checksum.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8], path: &str) -> Result<Self> {
        let corrupt = |reason: &str| Error::CorruptFile {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        if bytes.len() < 4 + 4 + 12 + 4 + 8 {
            return Err(corrupt("file too short"));
        }
        if &bytes[0..4] != CHECKPOINT_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        if fnv1a64(body) != stored {
            return Err(corrupt("checksum mismatch"));
        }
        let mut off = 4;
        let mut read_u32 = |b: &[u8]| {
            let v = u32::from_le_bytes(b[off..off + 4].try_into().unwrap());
            off += 4;
            v
        };
        let version = read_u32(body);
        if version != CHECKPOINT_VERSION {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        let dim_in = read_u32(body) as usize;
        let hidden = read_u32(body) as usize;
        let dim_out = read_u32(body) as usize;
        let dropout_rate = f32::from_le_bytes(body[off..off + 4].try_into().unwrap());
        off += 4;
        let n_params = hidden * dim_in + hidden + dim_out * hidden + dim_out;
        if body.len() != off + n_params * 4 {
            return Err(corrupt("parameter block size mismatch"));
        }
        let mut read_block = |n: usize| -> Vec<f32> {
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push(f32::from_le_bytes(body[off..off + 4].try_into().unwrap()));
                off += 4;
            }
            v
        };
        let w1 = read_block(hidden * dim_in);
        let b1 = read_block(hidden);
        let w2 = read_block(dim_out * hidden);
        let b2 = read_block(dim_out);
        EncoderHead::new(dim_in, hidden, dim_out, w1, b1, w2, b2, dropout_rate)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_bytes(&bytes, &path.display().to_string())
    }
}
