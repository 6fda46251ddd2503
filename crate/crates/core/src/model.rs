//! The two-path network.
//!
//! ```text
//! ids -> embedding (H=max_len x W=embed_dim x 1)
//!     -> shared trunk: for f in {3, 4, 5}: conv f x f (+ReLU) -> 2x2 max-pool      = r_f
//!     -> supervised path:   per branch conv 3x3 (+ReLU) -> 2x2 max-pool -> flatten
//!                           concat -> dropout -> dense -> z   (C logits)
//!     -> unsupervised path: same shape, separate parameters -> z'
//! ```

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Class;
use crate::engine::checkpoint::{read_checkpoint, write_checkpoint};
use crate::engine::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, dropout, dropout_backward,
    embedding_backward_into, embedding_forward, maxpool2d_backward, maxpool2d_forward, softmax,
    Conv2dCache, DenseCache, DropoutMask, MaxPoolCache, Tensor,
};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose, SeededRng};

/// Filter widths of the shared trunk's three branches.
pub const SHARED_WIDTHS: [usize; 3] = [3, 4, 5];
/// Filter width of every path convolution.
pub const PATH_WIDTH: usize = 3;

/// Architecture dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub max_len: usize,
    pub shared_filters: usize,
    pub path_filters: usize,
    pub num_classes: usize,
}

impl ModelConfig {
    pub const DEFAULT_FILTERS: usize = 100;

    pub fn new(vocab_size: usize, embed_dim: usize, max_len: usize) -> Self {
        Self {
            vocab_size,
            embed_dim,
            max_len,
            shared_filters: Self::DEFAULT_FILTERS,
            path_filters: Self::DEFAULT_FILTERS,
            num_classes: Class::COUNT,
        }
    }

    pub fn with_filters(mut self, shared: usize, path: usize) -> Self {
        self.shared_filters = shared;
        self.path_filters = path;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::Config(format!(
                "vocabulary size {} leaves no room for PAD and UNK",
                self.vocab_size
            )));
        }
        for (name, v) in [
            ("embed_dim", self.embed_dim),
            ("max_len", self.max_len),
            ("shared_filters", self.shared_filters),
            ("path_filters", self.path_filters),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.num_classes < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        Ok(())
    }

    /// Spatial size after the trunk's pooling.
    pub fn shared_pooled_dims(&self) -> (usize, usize) {
        (self.max_len.div_ceil(2), self.embed_dim.div_ceil(2))
    }

    /// Spatial size after a path's pooling.
    pub fn path_pooled_dims(&self) -> (usize, usize) {
        let (h, w) = self.shared_pooled_dims();
        (h.div_ceil(2), w.div_ceil(2))
    }

    /// Length of `r_1 (+) r_2 (+) r_3`.
    pub fn concat_dim(&self) -> usize {
        let (h, w) = self.path_pooled_dims();
        SHARED_WIDTHS.len() * h * w * self.path_filters
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl ConvParams {
    fn zeros(width: usize, cin: usize, cout: usize) -> Self {
        Self {
            weights: Tensor::zeros(&[width, width, cin, cout]),
            bias: Tensor::zeros(&[cout]),
        }
    }
}

/// One path: a 3x3 convolution per trunk branch plus the output projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PathParams {
    pub branches: [ConvParams; 3],
    pub proj_w: Tensor,
    pub proj_b: Tensor,
}

impl PathParams {
    fn zeros(cfg: &ModelConfig) -> Self {
        Self {
            branches: std::array::from_fn(|_| ConvParams::zeros(PATH_WIDTH, cfg.shared_filters, cfg.path_filters)),
            proj_w: Tensor::zeros(&[cfg.concat_dim(), cfg.num_classes]),
            proj_b: Tensor::zeros(&[cfg.num_classes]),
        }
    }
}

/// Every trainable tensor of the network. Also used as the gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct TdslParams {
    pub config: ModelConfig,
    pub embedding: Tensor,
    pub shared: [ConvParams; 3],
    pub sup: PathParams,
    pub unsup: PathParams,
}

impl TdslParams {
    /// All-zero parameters of the right shapes.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            embedding: Tensor::zeros(&[config.vocab_size, config.embed_dim]),
            shared: std::array::from_fn(|i| ConvParams::zeros(SHARED_WIDTHS[i], 1, config.shared_filters)),
            sup: PathParams::zeros(&config),
            unsup: PathParams::zeros(&config),
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.config).expect("config was validated at construction")
    }

    /// Checkpoint names in canonical order.
    pub fn names() -> Vec<String> {
        let mut names = vec!["embedding".to_string()];
        for prefix in ["shared", "sup", "unsup"] {
            for w in SHARED_WIDTHS {
                names.push(format!("{prefix}.b{w}.w"));
                names.push(format!("{prefix}.b{w}.b"));
            }
        }
        for prefix in ["sup", "unsup"] {
            names.push(format!("{prefix}.proj.w"));
            names.push(format!("{prefix}.proj.b"));
        }
        names
    }

    /// Tensors in the order of [`TdslParams::names`].
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.embedding];
        for group in [&self.shared, &self.sup.branches, &self.unsup.branches] {
            for c in group {
                out.push(&c.weights);
                out.push(&c.bias);
            }
        }
        out.extend([&self.sup.proj_w, &self.sup.proj_b, &self.unsup.proj_w, &self.unsup.proj_b]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.embedding];
        for group in [&mut self.shared, &mut self.sup.branches, &mut self.unsup.branches] {
            for c in group.iter_mut() {
                out.push(&mut c.weights);
                out.push(&mut c.bias);
            }
        }
        out.extend([
            &mut self.sup.proj_w,
            &mut self.sup.proj_b,
            &mut self.unsup.proj_w,
            &mut self.unsup.proj_b,
        ]);
        out
    }

    pub fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        Self::names().into_iter().zip(self.tensors()).collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn fill(&mut self, value: f64) {
        for t in self.tensors_mut() {
            t.fill(value);
        }
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        write_checkpoint(out, &self.named_tensors())
    }

    /// Reads a checkpoint written by [`TdslParams::save`]. The sequence
    /// length is not recoverable from parameter shapes alone.
    pub fn load<R: Read>(input: R, max_len: usize) -> Result<Self> {
        let entries = read_checkpoint(input)?;
        let find = |name: &str| {
            entries
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter {name}")))
        };
        let emb = find("embedding")?;
        let shared = find("shared.b3.w")?;
        let sup = find("sup.b3.w")?;
        let proj = find("sup.proj.w")?;
        let (&[vocab_size, embed_dim], &[_, _, _, shared_filters], &[_, _, _, path_filters], &[_, num_classes]) =
            (emb.shape(), shared.shape(), sup.shape(), proj.shape())
        else {
            return Err(Error::Checkpoint("unexpected parameter ranks".into()));
        };
        let config = ModelConfig {
            vocab_size,
            embed_dim,
            max_len,
            shared_filters,
            path_filters,
            num_classes,
        };
        let mut params = Self::zeros(config)?;
        if entries.len() != Self::names().len() {
            return Err(Error::Checkpoint(format!(
                "expected {} parameters, found {}",
                Self::names().len(),
                entries.len()
            )));
        }
        for (name, slot) in Self::names().into_iter().zip(params.tensors_mut()) {
            let t = find(&name)?;
            if t.shape() != slot.shape() {
                return Err(Error::Checkpoint(format!(
                    "{name} has shape {:?}, expected {:?} (max_len {max_len})",
                    t.shape(),
                    slot.shape()
                )));
            }
            *slot = t.clone();
        }
        Ok(params)
    }
}

fn glorot<R: Rng>(rng: &mut R, t: &mut Tensor, fan_in: usize, fan_out: usize) {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in t.data_mut() {
        *v = rng.gen_range(-bound..=bound);
    }
}

/// Glorot-uniform conv/dense weights, zero biases, embedding in +-0.05.
pub fn init_params(config: ModelConfig, seed: u64) -> Result<TdslParams> {
    let mut params = TdslParams::zeros(config)?;
    let mut rng = rng::stream(seed, Purpose::Init, 0);
    for v in params.embedding.data_mut() {
        *v = rng.gen_range(-0.05..=0.05);
    }
    let conv_groups = params
        .shared
        .iter_mut()
        .chain(params.sup.branches.iter_mut())
        .chain(params.unsup.branches.iter_mut());
    for conv in conv_groups {
        let &[f, _, cin, cout] = conv.weights.shape() else {
            unreachable!("conv weights are rank 4")
        };
        glorot(&mut rng, &mut conv.weights, f * f * cin, f * f * cout);
    }
    for path in [&mut params.sup, &mut params.unsup] {
        let &[d, c] = path.proj_w.shape() else {
            unreachable!("projection is rank 2")
        };
        glorot(&mut rng, &mut path.proj_w, d, c);
    }
    Ok(params)
}

/// Whether a forward pass is stochastic.
pub enum Mode<'a> {
    Train { rng: &'a mut SeededRng, dropout_rate: f64 },
    Infer,
}

impl Mode<'_> {
    pub fn reborrow(&mut self) -> Mode<'_> {
        match self {
            Mode::Train { rng, dropout_rate } => Mode::Train {
                rng,
                dropout_rate: *dropout_rate,
            },
            Mode::Infer => Mode::Infer,
        }
    }
}

/// Cached state of the shared trunk for one input.
#[derive(Debug)]
pub struct SharedTrace {
    token_ids: Vec<usize>,
    branches: Vec<(Conv2dCache, MaxPoolCache)>,
}

/// Cached state of one path for one input.
#[derive(Debug)]
pub struct PathTrace {
    branches: Vec<(Conv2dCache, MaxPoolCache, Vec<usize>)>,
    mask: DropoutMask,
    dense: DenseCache,
}

/// Everything the backward pass needs; consumed by [`backward`].
#[derive(Debug)]
pub struct ForwardTrace {
    shared: SharedTrace,
    sup: PathTrace,
    unsup: PathTrace,
}

pub struct ForwardOutput {
    pub z: Tensor,
    pub z_prime: Tensor,
    pub trace: ForwardTrace,
}

/// Embedding and the three trunk branches; returns `[r_3, r_4, r_5]`.
pub fn forward_shared(params: &TdslParams, token_ids: &[usize]) -> Result<([Tensor; 3], SharedTrace)> {
    let cfg = &params.config;
    if token_ids.len() != cfg.max_len {
        return Err(Error::shape(format!(
            "expected {} token ids, got {}",
            cfg.max_len,
            token_ids.len()
        )));
    }
    let image = embedding_forward(&params.embedding, token_ids)?.reshape(vec![cfg.max_len, cfg.embed_dim, 1])?;
    let mut feats = Vec::with_capacity(3);
    let mut caches = Vec::with_capacity(3);
    for conv in &params.shared {
        let (act, conv_cache) = conv2d_forward(&image, &conv.weights, &conv.bias)?;
        let (pooled, pool_cache) = maxpool2d_forward(&act)?;
        feats.push(pooled);
        caches.push((conv_cache, pool_cache));
    }
    let feats: [Tensor; 3] = feats.try_into().expect("three branches");
    Ok((
        feats,
        SharedTrace {
            token_ids: token_ids.to_vec(),
            branches: caches,
        },
    ))
}

/// One path over the trunk features; returns C logits.
pub fn forward_path(path: &PathParams, shared_feats: &[Tensor; 3], mode: Mode<'_>) -> Result<(Tensor, PathTrace)> {
    let mut concat = Vec::new();
    let mut branches = Vec::with_capacity(3);
    for (conv, feat) in path.branches.iter().zip(shared_feats) {
        let (act, conv_cache) = conv2d_forward(feat, &conv.weights, &conv.bias)?;
        let (pooled, pool_cache) = maxpool2d_forward(&act)?;
        concat.extend_from_slice(pooled.data());
        branches.push((conv_cache, pool_cache, pooled.shape().to_vec()));
    }
    let concat = Tensor::from_vec(concat);
    let (dropped, mask) = match mode {
        Mode::Train { rng, dropout_rate } => dropout(&concat, dropout_rate, rng, true)?,
        Mode::Infer => (concat.clone(), DropoutMask::ones(concat.len())),
    };
    let (z, dense) = dense_forward(&dropped, &path.proj_w, &path.proj_b)?;
    Ok((z, PathTrace { branches, mask, dense }))
}

/// Trunk plus both paths. In training mode the supervised path draws its
/// dropout mask first, then the unsupervised path.
pub fn forward(params: &TdslParams, token_ids: &[usize], mut mode: Mode<'_>) -> Result<ForwardOutput> {
    let (feats, shared) = forward_shared(params, token_ids)?;
    let (z, sup) = forward_path(&params.sup, &feats, mode.reborrow())?;
    let (z_prime, unsup) = forward_path(&params.unsup, &feats, mode)?;
    Ok(ForwardOutput {
        z,
        z_prime,
        trace: ForwardTrace { shared, sup, unsup },
    })
}

/// Backpropagates through one path; accumulates parameter gradients into
/// `grads` and returns the gradient w.r.t. each trunk feature map.
fn backward_path(
    path: &PathParams,
    trace: &PathTrace,
    grad_z: &Tensor,
    grads: &mut PathParams,
) -> Result<[Tensor; 3]> {
    let dense = dense_backward(&path.proj_w, &trace.dense, grad_z)?;
    let [dw, db] = <[Tensor; 2]>::try_from(dense.param_grads).expect("dense has two params");
    grads.proj_w.add_assign(&dw)?;
    grads.proj_b.add_assign(&db)?;
    let d_concat = dropout_backward(&trace.mask, &dense.input_grad)?.input_grad;

    let mut offset = 0;
    let mut d_feats = Vec::with_capacity(3);
    for ((conv, (conv_cache, pool_cache, pooled_shape)), g) in
        path.branches.iter().zip(&trace.branches).zip(grads.branches.iter_mut())
    {
        let n: usize = pooled_shape.iter().product();
        let chunk = Tensor::new(pooled_shape.clone(), d_concat.data()[offset..offset + n].to_vec())?;
        offset += n;
        let d_act = maxpool2d_backward(pool_cache, &chunk)?.input_grad;
        let lg = conv2d_backward(&conv.weights, conv_cache, &d_act)?;
        g.weights.add_assign(&lg.param_grads[0])?;
        g.bias.add_assign(&lg.param_grads[1])?;
        d_feats.push(lg.input_grad);
    }
    Ok(d_feats.try_into().expect("three branches"))
}

/// Accumulates into `grads` the gradient of a loss whose derivatives w.r.t.
/// the two path outputs are `grad_z` and `grad_z_prime`.
pub fn backward(
    params: &TdslParams,
    trace: ForwardTrace,
    grad_z: &Tensor,
    grad_z_prime: &Tensor,
    grads: &mut TdslParams,
) -> Result<()> {
    if grads.config != params.config {
        return Err(Error::State("gradient buffer was built for another configuration".into()));
    }
    let cfg = params.config;
    let mut d_feats: Option<[Tensor; 3]> = None;
    for (path, path_trace, g, path_grads) in [
        (&params.sup, &trace.sup, grad_z, &mut grads.sup),
        (&params.unsup, &trace.unsup, grad_z_prime, &mut grads.unsup),
    ] {
        if g.data().iter().all(|&v| v == 0.0) {
            continue;
        }
        let d = backward_path(path, path_trace, g, path_grads)?;
        match d_feats.as_mut() {
            None => d_feats = Some(d),
            Some(acc) => {
                for (a, b) in acc.iter_mut().zip(&d) {
                    a.add_assign(b)?;
                }
            }
        }
    }
    let Some(d_feats) = d_feats else {
        return Ok(());
    };

    let mut d_image = Tensor::zeros(&[cfg.max_len, cfg.embed_dim, 1]);
    for (((conv, (conv_cache, pool_cache)), d_feat), g) in params
        .shared
        .iter()
        .zip(&trace.shared.branches)
        .zip(&d_feats)
        .zip(grads.shared.iter_mut())
    {
        let d_act = maxpool2d_backward(pool_cache, d_feat)?.input_grad;
        let lg = conv2d_backward(&conv.weights, conv_cache, &d_act)?;
        g.weights.add_assign(&lg.param_grads[0])?;
        g.bias.add_assign(&lg.param_grads[1])?;
        d_image.add_assign(&lg.input_grad)?;
    }
    let d_embedded = d_image.reshape(vec![cfg.max_len, cfg.embed_dim])?;
    embedding_backward_into(&mut grads.embedding, &trace.shared.token_ids, &d_embedded)
}

/// Argmax over logits; ties go to the lower class index.
pub fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate() {
        if v > logits[best] {
            best = i;
        }
    }
    best
}

/// Inference with the supervised path only.
pub fn predict(params: &TdslParams, token_ids: &[usize]) -> Result<(Class, Vec<f64>)> {
    let (feats, _) = forward_shared(params, token_ids)?;
    let (z, _) = forward_path(&params.sup, &feats, Mode::Infer)?;
    let probs = softmax(z.data());
    let class = Class::from_index(argmax(z.data()))
        .ok_or_else(|| Error::Index(format!("model has {} outputs, only 2 classes exist", z.len())))?;
    Ok((class, probs))
}
