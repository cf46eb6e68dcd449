//! Adam optimizer with bias correction, on parameter-shaped accumulators.

use super::network::{NetDims, NetworkParams};

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    /// First-moment accumulators, one per parameter.
    pub m: NetworkParams,
    /// Second-moment accumulators, one per parameter.
    pub v: NetworkParams,
    /// Completed update count.
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(dims: &NetDims) -> AdamState {
        AdamState {
            m: NetworkParams::zeros(dims),
            v: NetworkParams::zeros(dims),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update in place: decayed moment estimates, bias correction, and
/// the usual `lr * m_hat / (sqrt(v_hat) + eps)` step.
pub fn adam_step(params: &mut NetworkParams, grads: &NetworkParams, state: &mut AdamState, lr: f64) {
    state.step += 1;
    let bc1 = 1.0 - state.beta1.powi(state.step.min(i32::MAX as u64) as i32);
    let bc2 = 1.0 - state.beta2.powi(state.step.min(i32::MAX as u64) as i32);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);

    let p_tensors = params.tensors_mut();
    let m_tensors = state.m.tensors_mut();
    let v_tensors = state.v.tensors_mut();
    let g_tensors = grads.tensors();

    for (((p, m), v), g) in p_tensors
        .into_iter()
        .zip(m_tensors)
        .zip(v_tensors)
        .zip(g_tensors)
    {
        debug_assert_eq!(p.0, g.0);
        for (((pv, mv), vv), gv) in p
            .1
            .iter_mut()
            .zip(m.1.iter_mut())
            .zip(v.1.iter_mut())
            .zip(g.1)
        {
            *mv = b1 * *mv + (1.0 - b1) * gv;
            *vv = b2 * *vv + (1.0 - b2) * gv * gv;
            let m_hat = *mv / bc1;
            let v_hat = *vv / bc2;
            *pv -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> NetDims {
        NetDims {
            grid_h: 6,
            grid_w: 3,
            aux_len: 3,
            conv1_out: 2,
            conv1_kh: 3,
            conv1_kw: 3,
            conv2_out: 2,
            conv2_kh: 3,
            conv2_kw: 1,
            dense1: 4,
            dense2: 4,
            actions: 3,
        }
    }

    #[test]
    fn first_step_moves_each_parameter_by_about_the_learning_rate() {
        // With zeroed moments, bias correction makes the first update
        // lr * g / (|g| + eps), i.e. a signed step of magnitude ~lr.
        let dims = dims();
        let mut params = NetworkParams::zeros(&dims);
        let mut grads = NetworkParams::zeros(&dims);
        grads.head_b[0] = 0.5;
        grads.head_b[1] = -3.0;
        grads.dense1_w[7] = 1e-3;
        let mut adam = AdamState::new(&dims);

        adam_step(&mut params, &grads, &mut adam, 1e-2);

        assert!((params.head_b[0] + 1e-2).abs() < 1e-6);
        assert!((params.head_b[1] - 1e-2).abs() < 1e-6);
        assert!((params.dense1_w[7] + 1e-2).abs() < 1e-4);
        // Untouched parameters stay put.
        assert_eq!(params.head_b[2], 0.0);
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn converges_on_a_quadratic() {
        // Minimize (x - 3)^2 embedded in a single bias parameter.
        let dims = dims();
        let mut params = NetworkParams::zeros(&dims);
        let mut adam = AdamState::new(&dims);
        for _ in 0..2000 {
            let x = params.head_b[0];
            let mut grads = NetworkParams::zeros(&dims);
            grads.head_b[0] = 2.0 * (x - 3.0);
            adam_step(&mut params, &grads, &mut adam, 0.05);
        }
        assert!(
            (params.head_b[0] - 3.0).abs() < 1e-3,
            "ended at {}",
            params.head_b[0]
        );
    }

    #[test]
    fn moments_decay_with_the_documented_rates() {
        let dims = dims();
        let mut params = NetworkParams::zeros(&dims);
        let mut adam = AdamState::new(&dims);
        let mut grads = NetworkParams::zeros(&dims);
        grads.head_b[0] = 1.0;
        adam_step(&mut params, &grads, &mut adam, 1e-3);
        adam_step(&mut params, &grads, &mut adam, 1e-3);
        // m after two unit gradients: 0.1 + 0.9*0.1 = 0.19.
        assert!((adam.m.head_b[0] - 0.19).abs() < 1e-12);
        // v: 0.001 + 0.999*0.001.
        assert!((adam.v.head_b[0] - 0.001999).abs() < 1e-12);
        assert_eq!(adam.step, 2);
    }
}
