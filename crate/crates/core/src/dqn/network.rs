//! Q-network: two valid convolutions over the occupancy grid, auxiliary
//! inputs concatenated after flattening, two ReLU dense layers, and a
//! linear head with one output per action. Forward and backward passes are
//! written out by hand; gradients are plain parameter-shaped tensors.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoder::StateTensor;
use crate::error::{Error, Result};

/// Number of discrete actions the head scores.
pub const NUM_ACTIONS: usize = 3;

/// Network shape. Everything downstream (caches, checkpoints, parameter
/// layouts) derives from these numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetDims {
    pub grid_h: usize,
    pub grid_w: usize,
    pub aux_len: usize,
    pub conv1_out: usize,
    pub conv1_kh: usize,
    pub conv1_kw: usize,
    pub conv2_out: usize,
    pub conv2_kh: usize,
    pub conv2_kw: usize,
    pub dense1: usize,
    pub dense2: usize,
    pub actions: usize,
}

impl Default for NetDims {
    fn default() -> Self {
        NetDims {
            grid_h: crate::encoder::GRID_ROWS,
            grid_w: crate::encoder::GRID_COLS,
            aux_len: crate::encoder::AUX_LEN,
            conv1_out: 16,
            conv1_kh: 3,
            conv1_kw: 3,
            conv2_out: 32,
            conv2_kh: 3,
            conv2_kw: 1,
            dense1: 128,
            dense2: 64,
            actions: NUM_ACTIONS,
        }
    }
}

impl NetDims {
    /// First conv output height.
    pub fn h1(&self) -> usize {
        self.grid_h - self.conv1_kh + 1
    }

    /// First conv output width.
    pub fn w1(&self) -> usize {
        self.grid_w - self.conv1_kw + 1
    }

    /// Second conv output height.
    pub fn h2(&self) -> usize {
        self.h1() - self.conv2_kh + 1
    }

    /// Second conv output width.
    pub fn w2(&self) -> usize {
        self.w1() - self.conv2_kw + 1
    }

    /// Flattened second conv size.
    pub fn flat(&self) -> usize {
        self.conv2_out * self.h2() * self.w2()
    }

    /// Dense input size: flattened conv plus auxiliary scalars.
    pub fn concat(&self) -> usize {
        self.flat() + self.aux_len
    }

    pub fn param_count(&self) -> usize {
        let c1 = self.conv1_out * self.conv1_kh * self.conv1_kw + self.conv1_out;
        let c2 = self.conv2_out * self.conv1_out * self.conv2_kh * self.conv2_kw + self.conv2_out;
        let d1 = self.dense1 * self.concat() + self.dense1;
        let d2 = self.dense2 * self.dense1 + self.dense2;
        let head = self.actions * self.dense2 + self.actions;
        c1 + c2 + d1 + d2 + head
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.grid_h,
            self.grid_w,
            self.aux_len,
            self.conv1_out,
            self.conv1_kh,
            self.conv1_kw,
            self.conv2_out,
            self.conv2_kh,
            self.conv2_kw,
            self.dense1,
            self.dense2,
            self.actions,
        ];
        if positive.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig("network dims must be positive".into()));
        }
        if self.conv1_kh > self.grid_h || self.conv1_kw > self.grid_w {
            return Err(Error::InvalidConfig(
                "first conv kernel exceeds the grid".into(),
            ));
        }
        if self.conv2_kh > self.h1() || self.conv2_kw > self.w1() {
            return Err(Error::InvalidConfig(
                "second conv kernel exceeds the first conv output".into(),
            ));
        }
        if self.actions != NUM_ACTIONS {
            return Err(Error::InvalidConfig(format!(
                "the action head is fixed at {NUM_ACTIONS} outputs"
            )));
        }
        Ok(())
    }
}

/// All learnable tensors. Gradients and Adam accumulators reuse this shape.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub conv1_w: Vec<f64>,
    pub conv1_b: Vec<f64>,
    pub conv2_w: Vec<f64>,
    pub conv2_b: Vec<f64>,
    pub dense1_w: Vec<f64>,
    pub dense1_b: Vec<f64>,
    pub dense2_w: Vec<f64>,
    pub dense2_b: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: Vec<f64>,
}

impl NetworkParams {
    pub fn zeros(dims: &NetDims) -> NetworkParams {
        NetworkParams {
            conv1_w: vec![0.0; dims.conv1_out * dims.conv1_kh * dims.conv1_kw],
            conv1_b: vec![0.0; dims.conv1_out],
            conv2_w: vec![0.0; dims.conv2_out * dims.conv1_out * dims.conv2_kh * dims.conv2_kw],
            conv2_b: vec![0.0; dims.conv2_out],
            dense1_w: vec![0.0; dims.dense1 * dims.concat()],
            dense1_b: vec![0.0; dims.dense1],
            dense2_w: vec![0.0; dims.dense2 * dims.dense1],
            dense2_b: vec![0.0; dims.dense2],
            head_w: vec![0.0; dims.actions * dims.dense2],
            head_b: vec![0.0; dims.actions],
        }
    }

    /// He-uniform init: each weight tensor is drawn from
    /// `U(-sqrt(6/fan_in), sqrt(6/fan_in))`, biases start at zero. The draw
    /// order is fixed, so a seed fully determines the parameters.
    pub fn he_init(dims: &NetDims, seed: u64) -> NetworkParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Self::zeros(dims);
        let fan_ins = [
            dims.conv1_kh * dims.conv1_kw,
            dims.conv1_out * dims.conv2_kh * dims.conv2_kw,
            dims.concat(),
            dims.dense1,
            dims.dense2,
        ];
        let weights = [
            &mut params.conv1_w,
            &mut params.conv2_w,
            &mut params.dense1_w,
            &mut params.dense2_w,
            &mut params.head_w,
        ];
        for (tensor, fan_in) in weights.into_iter().zip(fan_ins) {
            let limit = (6.0 / fan_in as f64).sqrt();
            for w in tensor.iter_mut() {
                *w = rng.random_range(-limit..limit);
            }
        }
        params
    }

    /// Tensors in a fixed serialization order.
    pub fn tensors(&self) -> [(&'static str, &Vec<f64>); 10] {
        [
            ("conv1_w", &self.conv1_w),
            ("conv1_b", &self.conv1_b),
            ("conv2_w", &self.conv2_w),
            ("conv2_b", &self.conv2_b),
            ("dense1_w", &self.dense1_w),
            ("dense1_b", &self.dense1_b),
            ("dense2_w", &self.dense2_w),
            ("dense2_b", &self.dense2_b),
            ("head_w", &self.head_w),
            ("head_b", &self.head_b),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Vec<f64>); 10] {
        let NetworkParams {
            conv1_w,
            conv1_b,
            conv2_w,
            conv2_b,
            dense1_w,
            dense1_b,
            dense2_w,
            dense2_b,
            head_w,
            head_b,
        } = self;
        [
            ("conv1_w", conv1_w),
            ("conv1_b", conv1_b),
            ("conv2_w", conv2_w),
            ("conv2_b", conv2_b),
            ("dense1_w", dense1_w),
            ("dense1_b", dense1_b),
            ("dense2_w", dense2_w),
            ("dense2_b", dense2_b),
            ("head_w", head_w),
            ("head_b", head_b),
        ]
    }

    pub fn value_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Quantizes every value through `f32`, matching what a checkpoint
    /// round-trip does to the parameters.
    pub fn quantized_f32(&self) -> NetworkParams {
        let mut out = self.clone();
        for (_, tensor) in out.tensors_mut() {
            for v in tensor.iter_mut() {
                *v = *v as f32 as f64;
            }
        }
        out
    }
}

/// Intermediate activations kept for the backward pass.
pub struct ForwardCache {
    conv1_pre: Vec<f64>,
    conv1_post: Vec<f64>,
    conv2_pre: Vec<f64>,
    /// ReLU-activated flattened conv output with aux appended.
    concat: Vec<f64>,
    d1_pre: Vec<f64>,
    d1_post: Vec<f64>,
    d2_pre: Vec<f64>,
    d2_post: Vec<f64>,
}

fn conv_forward(
    input: &[f64],
    in_c: usize,
    in_h: usize,
    in_w: usize,
    weights: &[f64],
    bias: &[f64],
    out_c: usize,
    kh: usize,
    kw: usize,
    out: &mut [f64],
) {
    let oh = in_h - kh + 1;
    let ow = in_w - kw + 1;
    debug_assert_eq!(out.len(), out_c * oh * ow);
    for oc in 0..out_c {
        for y in 0..oh {
            for x in 0..ow {
                let mut acc = bias[oc];
                for ic in 0..in_c {
                    let w_base = (oc * in_c + ic) * kh * kw;
                    let in_base = ic * in_h * in_w;
                    for ky in 0..kh {
                        let w_row = w_base + ky * kw;
                        let in_row = in_base + (y + ky) * in_w + x;
                        for kx in 0..kw {
                            acc += weights[w_row + kx] * input[in_row + kx];
                        }
                    }
                }
                out[(oc * oh + y) * ow + x] = acc;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn conv_backward(
    dout: &[f64],
    input: &[f64],
    weights: &[f64],
    in_c: usize,
    in_h: usize,
    in_w: usize,
    out_c: usize,
    kh: usize,
    kw: usize,
    dweights: &mut [f64],
    dbias: &mut [f64],
    mut dinput: Option<&mut [f64]>,
) {
    let oh = in_h - kh + 1;
    let ow = in_w - kw + 1;
    for oc in 0..out_c {
        for y in 0..oh {
            for x in 0..ow {
                let g = dout[(oc * oh + y) * ow + x];
                if g == 0.0 {
                    continue;
                }
                dbias[oc] += g;
                for ic in 0..in_c {
                    let w_base = (oc * in_c + ic) * kh * kw;
                    let in_base = ic * in_h * in_w;
                    for ky in 0..kh {
                        let w_row = w_base + ky * kw;
                        let in_row = in_base + (y + ky) * in_w + x;
                        for kx in 0..kw {
                            dweights[w_row + kx] += g * input[in_row + kx];
                            if let Some(di) = dinput.as_deref_mut() {
                                di[in_row + kx] += g * weights[w_row + kx];
                            }
                        }
                    }
                }
            }
        }
    }
}

fn dense_forward(x: &[f64], weights: &[f64], bias: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &weights[i * n..(i + 1) * n];
        let mut acc = bias[i];
        for (w, xv) in row.iter().zip(x) {
            acc += w * xv;
        }
        *o = acc;
    }
}

fn dense_backward(
    dout: &[f64],
    x: &[f64],
    weights: &[f64],
    dweights: &mut [f64],
    dbias: &mut [f64],
    mut dx: Option<&mut [f64]>,
) {
    let n = x.len();
    for (i, &g) in dout.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        dbias[i] += g;
        let drow = &mut dweights[i * n..(i + 1) * n];
        for (dw, xv) in drow.iter_mut().zip(x) {
            *dw += g * xv;
        }
        if let Some(dx) = dx.as_deref_mut() {
            let row = &weights[i * n..(i + 1) * n];
            for (dxv, w) in dx.iter_mut().zip(row) {
                *dxv += g * w;
            }
        }
    }
}

fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Zeroes gradient entries where the pre-activation was not positive.
fn relu_mask(d: &mut [f64], pre: &[f64]) {
    for (dv, &p) in d.iter_mut().zip(pre) {
        if p <= 0.0 {
            *dv = 0.0;
        }
    }
}

/// Q-values for one encoded state, keeping activations for backprop.
pub fn forward_cached(
    dims: &NetDims,
    params: &NetworkParams,
    state: &StateTensor,
) -> ([f64; NUM_ACTIONS], ForwardCache) {
    debug_assert_eq!(state.grid.len(), dims.grid_h * dims.grid_w);
    debug_assert_eq!(state.aux.len(), dims.aux_len);

    let mut conv1_pre = vec![0.0; dims.conv1_out * dims.h1() * dims.w1()];
    conv_forward(
        &state.grid,
        1,
        dims.grid_h,
        dims.grid_w,
        &params.conv1_w,
        &params.conv1_b,
        dims.conv1_out,
        dims.conv1_kh,
        dims.conv1_kw,
        &mut conv1_pre,
    );
    let conv1_post = relu(&conv1_pre);

    let mut conv2_pre = vec![0.0; dims.flat()];
    conv_forward(
        &conv1_post,
        dims.conv1_out,
        dims.h1(),
        dims.w1(),
        &params.conv2_w,
        &params.conv2_b,
        dims.conv2_out,
        dims.conv2_kh,
        dims.conv2_kw,
        &mut conv2_pre,
    );

    let mut concat = relu(&conv2_pre);
    concat.extend_from_slice(&state.aux);

    let mut d1_pre = vec![0.0; dims.dense1];
    dense_forward(&concat, &params.dense1_w, &params.dense1_b, &mut d1_pre);
    let d1_post = relu(&d1_pre);

    let mut d2_pre = vec![0.0; dims.dense2];
    dense_forward(&d1_post, &params.dense2_w, &params.dense2_b, &mut d2_pre);
    let d2_post = relu(&d2_pre);

    let mut q_vec = vec![0.0; dims.actions];
    dense_forward(&d2_post, &params.head_w, &params.head_b, &mut q_vec);
    let q = [q_vec[0], q_vec[1], q_vec[2]];

    (
        q,
        ForwardCache {
            conv1_pre,
            conv1_post,
            conv2_pre,
            concat,
            d1_pre,
            d1_post,
            d2_pre,
            d2_post,
        },
    )
}

/// Q-values for one encoded state.
pub fn forward(dims: &NetDims, params: &NetworkParams, state: &StateTensor) -> [f64; NUM_ACTIONS] {
    forward_cached(dims, params, state).0
}

/// Accumulates gradients of a scalar loss into `grads`, given the loss
/// gradient with respect to the head outputs.
pub fn backward(
    dims: &NetDims,
    params: &NetworkParams,
    state: &StateTensor,
    cache: &ForwardCache,
    dq: [f64; NUM_ACTIONS],
    grads: &mut NetworkParams,
) {
    let mut dd2_post = vec![0.0; dims.dense2];
    dense_backward(
        &dq,
        &cache.d2_post,
        &params.head_w,
        &mut grads.head_w,
        &mut grads.head_b,
        Some(&mut dd2_post),
    );
    relu_mask(&mut dd2_post, &cache.d2_pre);

    let mut dd1_post = vec![0.0; dims.dense1];
    dense_backward(
        &dd2_post,
        &cache.d1_post,
        &params.dense2_w,
        &mut grads.dense2_w,
        &mut grads.dense2_b,
        Some(&mut dd1_post),
    );
    relu_mask(&mut dd1_post, &cache.d1_pre);

    let mut dconcat = vec![0.0; dims.concat()];
    dense_backward(
        &dd1_post,
        &cache.concat,
        &params.dense1_w,
        &mut grads.dense1_w,
        &mut grads.dense1_b,
        Some(&mut dconcat),
    );

    // Split off the aux tail; only the conv part flows further back.
    let mut dconv2 = dconcat;
    dconv2.truncate(dims.flat());
    relu_mask(&mut dconv2, &cache.conv2_pre);

    let mut dconv1_post = vec![0.0; dims.conv1_out * dims.h1() * dims.w1()];
    conv_backward(
        &dconv2,
        &cache.conv1_post,
        &params.conv2_w,
        dims.conv1_out,
        dims.h1(),
        dims.w1(),
        dims.conv2_out,
        dims.conv2_kh,
        dims.conv2_kw,
        &mut grads.conv2_w,
        &mut grads.conv2_b,
        Some(&mut dconv1_post),
    );
    relu_mask(&mut dconv1_post, &cache.conv1_pre);

    conv_backward(
        &dconv1_post,
        &state.grid,
        &params.conv1_w,
        1,
        dims.grid_h,
        dims.grid_w,
        dims.conv1_out,
        dims.conv1_kh,
        dims.conv1_kw,
        &mut grads.conv1_w,
        &mut grads.conv1_b,
        None,
    );
}

/// One labeled example: the target value for a single action's output.
pub struct BatchSample<'a> {
    pub state: &'a StateTensor,
    pub action: usize,
    pub target: f64,
}

/// Mean squared error over the batch on the selected action outputs, and
/// its gradient with respect to every parameter.
pub fn loss_and_gradients(
    dims: &NetDims,
    params: &NetworkParams,
    batch: &[BatchSample<'_>],
) -> Result<(f64, NetworkParams)> {
    assert!(!batch.is_empty(), "empty batch");
    let mut grads = NetworkParams::zeros(dims);
    let inv_b = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for sample in batch {
        let (q, cache) = forward_cached(dims, params, sample.state);
        let err = q[sample.action] - sample.target;
        loss += err * err * inv_b;
        let mut dq = [0.0; NUM_ACTIONS];
        dq[sample.action] = 2.0 * err * inv_b;
        backward(dims, params, sample.state, &cache, dq, &mut grads);
    }
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss);
    }
    Ok((loss, grads))
}
