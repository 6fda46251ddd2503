use rand::Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Gradients produced by one layer's backward pass.
///
/// `param_grads` follows the order of the layer's parameters in its forward
/// signature (weights, then bias).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub param_grads: Vec<Tensor>,
    pub input_grad: Tensor,
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

/// Stacks rows `token_ids[i]` of a `V x k` table into an `n x k` matrix.
pub fn embedding_forward(table: &Tensor, token_ids: &[usize]) -> Result<Tensor> {
    let (vocab, dim) = match table.shape() {
        &[v, k] => (v, k),
        s => return Err(Error::shape(format!("embedding table must be V x k, got {s:?}"))),
    };
    if token_ids.is_empty() {
        return Err(Error::shape("empty token sequence"));
    }
    let mut out = Vec::with_capacity(token_ids.len() * dim);
    for (pos, &id) in token_ids.iter().enumerate() {
        if id >= vocab {
            return Err(Error::Index(format!(
                "token id {id} at position {pos} is outside vocabulary of size {vocab}"
            )));
        }
        out.extend_from_slice(&table.data()[id * dim..(id + 1) * dim]);
    }
    Tensor::new(vec![token_ids.len(), dim], out)
}

/// Scatter-adds an `n x k` upstream gradient into the rows of `grad_table`.
pub fn embedding_backward_into(
    grad_table: &mut Tensor,
    token_ids: &[usize],
    upstream: &Tensor,
) -> Result<()> {
    let (vocab, dim) = match grad_table.shape() {
        &[v, k] => (v, k),
        s => return Err(Error::shape(format!("embedding table must be V x k, got {s:?}"))),
    };
    if upstream.len() != token_ids.len() * dim {
        return Err(Error::State(format!(
            "upstream gradient has {} values, expected {} x {dim}",
            upstream.len(),
            token_ids.len()
        )));
    }
    let g = grad_table.data_mut();
    for (pos, &id) in token_ids.iter().enumerate() {
        if id >= vocab {
            return Err(Error::Index(format!(
                "token id {id} at position {pos} is outside vocabulary of size {vocab}"
            )));
        }
        let src = &upstream.data()[pos * dim..(pos + 1) * dim];
        for (dst, s) in g[id * dim..(id + 1) * dim].iter_mut().zip(src) {
            *dst += s;
        }
    }
    Ok(())
}

/// Gradient of the embedding table for one lookup.
pub fn embedding_backward(
    table_shape: &[usize],
    token_ids: &[usize],
    upstream: &Tensor,
) -> Result<Tensor> {
    let mut grad = Tensor::zeros(table_shape);
    embedding_backward_into(&mut grad, token_ids, upstream)?;
    Ok(grad)
}

// ---------------------------------------------------------------------------
// Convolution + ReLU
// ---------------------------------------------------------------------------

/// Zero padding `(before, after)` that keeps the spatial size for a filter
/// of width `f`. Even widths put the extra cell after.
pub fn same_padding(f: usize) -> (usize, usize) {
    let before = (f - 1) / 2;
    (before, f - 1 - before)
}

#[derive(Debug, Clone)]
pub struct Conv2dCache {
    input: Tensor,
    output: Tensor,
    filter_shape: Vec<usize>,
}

fn conv_dims(input: &Tensor, filters: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize, usize, usize)> {
    let (h, w, cin) = input.hwc()?;
    let (f, cout) = match filters.shape() {
        &[f1, f2, c_in, c_out] if f1 == f2 => {
            if c_in != cin {
                return Err(Error::shape(format!(
                    "filters expect {c_in} input channels, input has {cin}"
                )));
            }
            (f1, c_out)
        }
        s => return Err(Error::shape(format!("filters must be f x f x Cin x Cout, got {s:?}"))),
    };
    if bias.shape() != [cout] {
        return Err(Error::shape(format!(
            "bias shape {:?} does not match {cout} output channels",
            bias.shape()
        )));
    }
    Ok((h, w, cin, f, cout))
}

/// "Same" zero-padded cross-correlation followed by ReLU.
///
/// Output `[y, x, co] = relu(bias[co] + sum_{dy, dx, ci} in[y+dy-p, x+dx-p, ci] * w[dy, dx, ci, co])`
/// with `p` the leading pad from [`same_padding`].
pub fn conv2d_forward(input: &Tensor, filters: &Tensor, bias: &Tensor) -> Result<(Tensor, Conv2dCache)> {
    let (h, w, cin, f, cout) = conv_dims(input, filters, bias)?;
    let (pad, _) = same_padding(f);
    let x = input.data();
    let wt = filters.data();
    let mut out = vec![0.0; h * w * cout];

    for y in 0..h {
        for xo in 0..w {
            let o = &mut out[(y * w + xo) * cout..(y * w + xo + 1) * cout];
            o.copy_from_slice(bias.data());
            for dy in 0..f {
                let Some(iy) = (y + dy).checked_sub(pad).filter(|&v| v < h) else {
                    continue;
                };
                for dx in 0..f {
                    let Some(ix) = (xo + dx).checked_sub(pad).filter(|&v| v < w) else {
                        continue;
                    };
                    let inp = &x[(iy * w + ix) * cin..(iy * w + ix + 1) * cin];
                    for (ci, &v) in inp.iter().enumerate() {
                        if v == 0.0 {
                            continue;
                        }
                        let base = ((dy * f + dx) * cin + ci) * cout;
                        for (acc, &wv) in o.iter_mut().zip(&wt[base..base + cout]) {
                            *acc += v * wv;
                        }
                    }
                }
            }
            for v in o.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
    }

    let output = Tensor::new(vec![h, w, cout], out)?;
    let cache = Conv2dCache {
        input: input.clone(),
        output: output.clone(),
        filter_shape: filters.shape().to_vec(),
    };
    Ok((output, cache))
}

/// Gradients of [`conv2d_forward`] w.r.t. filters, bias and input.
pub fn conv2d_backward(filters: &Tensor, cache: &Conv2dCache, upstream: &Tensor) -> Result<LayerGrad> {
    if filters.shape() != cache.filter_shape.as_slice() {
        return Err(Error::State(format!(
            "cache was built for filters {:?}, got {:?}",
            cache.filter_shape,
            filters.shape()
        )));
    }
    if upstream.shape() != cache.output.shape() {
        return Err(Error::State(format!(
            "upstream gradient {:?} does not match cached output {:?}",
            upstream.shape(),
            cache.output.shape()
        )));
    }
    let (h, w, cin) = cache.input.hwc()?;
    let f = filters.shape()[0];
    let cout = filters.shape()[3];
    let (pad, _) = same_padding(f);

    // ReLU gate
    let gpre: Vec<f64> = upstream
        .data()
        .iter()
        .zip(cache.output.data())
        .map(|(&g, &o)| if o > 0.0 { g } else { 0.0 })
        .collect();

    let x = cache.input.data();
    let wt = filters.data();
    let mut dw = vec![0.0; wt.len()];
    let mut db = vec![0.0; cout];
    let mut dx = vec![0.0; x.len()];

    for y in 0..h {
        for xo in 0..w {
            let g = &gpre[(y * w + xo) * cout..(y * w + xo + 1) * cout];
            if g.iter().all(|&v| v == 0.0) {
                continue;
            }
            for (b, &gv) in db.iter_mut().zip(g) {
                *b += gv;
            }
            for dy in 0..f {
                let Some(iy) = (y + dy).checked_sub(pad).filter(|&v| v < h) else {
                    continue;
                };
                for dxi in 0..f {
                    let Some(ix) = (xo + dxi).checked_sub(pad).filter(|&v| v < w) else {
                        continue;
                    };
                    let in_off = (iy * w + ix) * cin;
                    for ci in 0..cin {
                        let v = x[in_off + ci];
                        let base = ((dy * f + dxi) * cin + ci) * cout;
                        let wrow = &wt[base..base + cout];
                        let dwrow = &mut dw[base..base + cout];
                        let mut s = 0.0;
                        for co in 0..cout {
                            dwrow[co] += v * g[co];
                            s += wrow[co] * g[co];
                        }
                        dx[in_off + ci] += s;
                    }
                }
            }
        }
    }

    Ok(LayerGrad {
        param_grads: vec![
            Tensor::new(filters.shape().to_vec(), dw)?,
            Tensor::new(vec![cout], db)?,
        ],
        input_grad: Tensor::new(cache.input.shape().to_vec(), dx)?,
    })
}

// ---------------------------------------------------------------------------
// 2x2 max pooling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MaxPoolCache {
    input_shape: Vec<usize>,
    /// Flat input index of the winner for every output cell.
    argmax: Vec<usize>,
}

impl MaxPoolCache {
    pub fn argmax(&self) -> &[usize] {
        &self.argmax
    }
}

/// 2x2 stride-2 max pooling; edge windows are truncated so the output is
/// `ceil(H/2) x ceil(W/2) x C`. Ties go to the first cell in row-major order.
pub fn maxpool2d_forward(input: &Tensor) -> Result<(Tensor, MaxPoolCache)> {
    let (h, w, c) = input.hwc()?;
    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
    let x = input.data();
    let mut out = vec![0.0; oh * ow * c];
    let mut argmax = vec![0; oh * ow * c];
    for oy in 0..oh {
        for ox in 0..ow {
            for ch in 0..c {
                let mut best_idx = ((2 * oy) * w + 2 * ox) * c + ch;
                let mut best = x[best_idx];
                for y in 2 * oy..(2 * oy + 2).min(h) {
                    for xi in 2 * ox..(2 * ox + 2).min(w) {
                        let idx = (y * w + xi) * c + ch;
                        if x[idx] > best {
                            best = x[idx];
                            best_idx = idx;
                        }
                    }
                }
                let o = (oy * ow + ox) * c + ch;
                out[o] = best;
                argmax[o] = best_idx;
            }
        }
    }
    let cache = MaxPoolCache {
        input_shape: input.shape().to_vec(),
        argmax,
    };
    Ok((Tensor::new(vec![oh, ow, c], out)?, cache))
}

/// Routes each upstream value to the input cell that won its window.
pub fn maxpool2d_backward(cache: &MaxPoolCache, upstream: &Tensor) -> Result<LayerGrad> {
    if upstream.len() != cache.argmax.len() {
        return Err(Error::State(format!(
            "upstream gradient has {} values, pooling produced {}",
            upstream.len(),
            cache.argmax.len()
        )));
    }
    let mut dx = Tensor::zeros(&cache.input_shape);
    let d = dx.data_mut();
    for (&idx, &g) in cache.argmax.iter().zip(upstream.data()) {
        d[idx] += g;
    }
    Ok(LayerGrad {
        param_grads: Vec::new(),
        input_grad: dx,
    })
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

/// Per-element multiplier applied by [`dropout`]: `0` for dropped elements,
/// `1 / (1 - rate)` for survivors.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    scale: Vec<f64>,
}

impl DropoutMask {
    pub fn ones(len: usize) -> Self {
        Self { scale: vec![1.0; len] }
    }

    pub fn values(&self) -> &[f64] {
        &self.scale
    }
}

/// Inverted dropout. With `training == false` the input is returned as is.
pub fn dropout<R: Rng + ?Sized>(
    input: &Tensor,
    rate: f64,
    rng: &mut R,
    training: bool,
) -> Result<(Tensor, DropoutMask)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!("dropout rate {rate} outside [0, 1)")));
    }
    if !training || rate == 0.0 {
        return Ok((input.clone(), DropoutMask::ones(input.len())));
    }
    let keep = 1.0 / (1.0 - rate);
    let scale: Vec<f64> = (0..input.len())
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    let out = input.data().iter().zip(&scale).map(|(v, s)| v * s).collect();
    Ok((Tensor::new(input.shape().to_vec(), out)?, DropoutMask { scale }))
}

pub fn dropout_backward(mask: &DropoutMask, upstream: &Tensor) -> Result<LayerGrad> {
    if upstream.len() != mask.scale.len() {
        return Err(Error::State(format!(
            "upstream gradient has {} values, mask has {}",
            upstream.len(),
            mask.scale.len()
        )));
    }
    let dx = upstream.data().iter().zip(&mask.scale).map(|(g, s)| g * s).collect();
    Ok(LayerGrad {
        param_grads: Vec::new(),
        input_grad: Tensor::new(upstream.shape().to_vec(), dx)?,
    })
}

// ---------------------------------------------------------------------------
// Dense projection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DenseCache {
    input: Tensor,
}

/// `input^T . weights + bias` for a flat input of length `d` and `d x C` weights.
pub fn dense_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<(Tensor, DenseCache)> {
    let (d, c) = match weights.shape() {
        &[d, c] => (d, c),
        s => return Err(Error::shape(format!("dense weights must be d x C, got {s:?}"))),
    };
    if input.len() != d {
        return Err(Error::shape(format!(
            "dense input has {} values, weights expect {d}",
            input.len()
        )));
    }
    if bias.shape() != [c] {
        return Err(Error::shape(format!("dense bias {:?}, expected [{c}]", bias.shape())));
    }
    let w = weights.data();
    let mut out = bias.data().to_vec();
    for (i, &x) in input.data().iter().enumerate() {
        for (o, &wv) in out.iter_mut().zip(&w[i * c..(i + 1) * c]) {
            *o += x * wv;
        }
    }
    Ok((
        Tensor::new(vec![c], out)?,
        DenseCache {
            input: input.clone(),
        },
    ))
}

pub fn dense_backward(weights: &Tensor, cache: &DenseCache, upstream: &Tensor) -> Result<LayerGrad> {
    let (d, c) = match weights.shape() {
        &[d, c] => (d, c),
        s => return Err(Error::shape(format!("dense weights must be d x C, got {s:?}"))),
    };
    if cache.input.len() != d || upstream.len() != c {
        return Err(Error::State(format!(
            "cache/upstream ({}, {}) do not match weights {d} x {c}",
            cache.input.len(),
            upstream.len()
        )));
    }
    let w = weights.data();
    let g = upstream.data();
    let mut dw = vec![0.0; d * c];
    let mut dx = vec![0.0; d];
    for (i, &x) in cache.input.data().iter().enumerate() {
        let row = &w[i * c..(i + 1) * c];
        let drow = &mut dw[i * c..(i + 1) * c];
        let mut s = 0.0;
        for k in 0..c {
            drow[k] = x * g[k];
            s += row[k] * g[k];
        }
        dx[i] = s;
    }
    Ok(LayerGrad {
        param_grads: vec![Tensor::new(vec![d, c], dw)?, upstream.clone()],
        input_grad: Tensor::new(cache.input.shape().to_vec(), dx)?,
    })
}
