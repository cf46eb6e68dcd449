//! From-scratch deep Q-learning: network, optimizer, replay, policy,
//! checkpointing, and the learner that wires them together.

pub mod adam;
pub mod checkpoint;
pub mod network;
pub mod policy;
pub mod replay;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::TrainConfig;
use crate::encoder::StateTensor;
use crate::error::Result;
use crate::seeds::{derive_seed, stream};

pub use adam::{adam_step, AdamState};
pub use checkpoint::Checkpoint;
pub use network::{
    forward, loss_and_gradients, BatchSample, NetDims, NetworkParams, NUM_ACTIONS,
};
pub use policy::{argmax, greedy_action, select_action};
pub use replay::{ReplayBuffer, Transition};

/// Online network, target network, optimizer state, replay buffer, and the
/// exploration schedule, advanced one gradient step at a time.
pub struct Learner {
    pub dims: NetDims,
    pub params: NetworkParams,
    pub target: NetworkParams,
    pub adam: AdamState,
    pub replay: ReplayBuffer,
    pub cfg: TrainConfig,
    pub eps: f64,
    pub grad_steps: u64,
    pub episodes_done: u32,
    rng: ChaCha8Rng,
}

impl Learner {
    /// Fresh learner: He-initialized online network, target synced to it,
    /// empty buffer, exploration at the configured start.
    pub fn new(cfg: TrainConfig, master_seed: u64) -> Learner {
        Learner::with_dims(NetDims::default(), cfg, master_seed)
    }

    /// Same as [`Learner::new`] but with an explicit architecture, for
    /// inputs that are not the standard occupancy grid.
    pub fn with_dims(dims: NetDims, cfg: TrainConfig, master_seed: u64) -> Learner {
        let params = NetworkParams::he_init(&dims, derive_seed(master_seed, stream::WEIGHT_INIT, 0));
        let target = params.clone();
        Learner {
            dims,
            params,
            target,
            adam: AdamState::new(&dims),
            replay: ReplayBuffer::new(cfg.buffer_capacity),
            eps: cfg.eps_start,
            cfg,
            grad_steps: 0,
            episodes_done: 0,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(master_seed, stream::REPLAY, 0)),
        }
    }

    /// Rebuilds a learner from a checkpoint. The replay buffer starts empty
    /// (experiences are not persisted); the sampling stream is reseeded.
    pub fn from_checkpoint(ckpt: Checkpoint, master_seed: u64) -> Learner {
        Learner {
            dims: ckpt.dims,
            params: ckpt.params,
            target: ckpt.target,
            adam: ckpt.adam,
            replay: ReplayBuffer::new(ckpt.train.buffer_capacity),
            eps: ckpt.eps,
            cfg: ckpt.train,
            grad_steps: ckpt.grad_steps,
            episodes_done: ckpt.episodes_done,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(master_seed, stream::REPLAY, 1)),
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            dims: self.dims,
            train: self.cfg.clone(),
            params: self.params.clone(),
            target: self.target.clone(),
            adam: self.adam.clone(),
            eps: self.eps,
            grad_steps: self.grad_steps,
            episodes_done: self.episodes_done,
        }
    }

    pub fn q_values(&self, state: &StateTensor) -> [f64; NUM_ACTIONS] {
        forward(&self.dims, &self.params, state)
    }

    pub fn record(&mut self, t: Transition) {
        self.replay.push(t);
    }

    /// One optimization step, if the buffer already holds a full batch:
    /// sample uniformly, build one-step bootstrapped targets from the
    /// target network (cut at terminals), descend the squared error with
    /// Adam, and periodically copy the online network into the target.
    /// Returns the batch loss, or `None` when the buffer is still filling.
    pub fn train_step(&mut self) -> Result<Option<f64>> {
        if self.replay.len() < self.cfg.batch_size {
            return Ok(None);
        }
        let batch = self.replay.sample(self.cfg.batch_size, &mut self.rng)?;

        let samples: Vec<BatchSample<'_>> = batch
            .iter()
            .map(|t| {
                let target = if t.terminal {
                    t.reward
                } else {
                    let next_q = forward(&self.dims, &self.target, &t.next_state);
                    t.reward + self.cfg.gamma * next_q[argmax(&next_q)]
                };
                BatchSample {
                    state: &t.state,
                    action: t.action.index(),
                    target,
                }
            })
            .collect();

        let (loss, grads) = loss_and_gradients(&self.dims, &self.params, &samples)?;
        drop(samples);
        drop(batch);

        adam_step(&mut self.params, &grads, &mut self.adam, self.cfg.learning_rate);
        self.grad_steps += 1;
        if self.grad_steps % self.cfg.target_sync_every == 0 {
            self.sync_target();
        }
        Ok(Some(loss))
    }

    pub fn sync_target(&mut self) {
        self.target = self.params.clone();
    }

    /// Multiplicative exploration decay with a floor, applied once per
    /// decision.
    pub fn decay_exploration(&mut self) {
        self.eps = (self.eps * self.cfg.eps_decay).max(self.cfg.eps_min);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Action;

    fn state(tag: f64) -> StateTensor {
        let dims = NetDims::default();
        let mut grid = vec![1.0; dims.grid_h * dims.grid_w];
        grid[0] = tag;
        StateTensor {
            grid,
            aux: [0.5, 1.0, 1.0],
        }
    }

    fn transition(tag: f64, reward: f64, terminal: bool) -> Transition {
        Transition {
            state: state(tag),
            action: Action::KeepLane,
            reward,
            next_state: state(tag + 0.25),
            terminal,
        }
    }

    #[test]
    fn train_step_waits_for_a_full_batch() {
        let cfg = TrainConfig {
            batch_size: 4,
            ..TrainConfig::default()
        };
        let mut learner = Learner::new(cfg, 0);
        for k in 0..3 {
            learner.record(transition(k as f64 * 0.1, 0.0, false));
            assert!(learner.train_step().unwrap().is_none());
        }
        learner.record(transition(0.9, 0.0, false));
        assert!(learner.train_step().unwrap().is_some());
        assert_eq!(learner.grad_steps, 1);
    }

    #[test]
    fn target_syncs_on_the_configured_cadence() {
        let cfg = TrainConfig {
            batch_size: 2,
            target_sync_every: 3,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        let mut learner = Learner::new(cfg, 1);
        learner.record(transition(0.0, 1.0, false));
        learner.record(transition(0.5, -1.0, true));

        learner.train_step().unwrap().unwrap();
        assert_ne!(learner.params, learner.target);
        learner.train_step().unwrap().unwrap();
        assert_ne!(learner.params, learner.target);
        learner.train_step().unwrap().unwrap();
        assert_eq!(learner.params, learner.target);
    }

    #[test]
    fn exploration_decays_to_the_floor() {
        let mut learner = Learner::new(TrainConfig::default(), 2);
        assert_eq!(learner.eps, 1.0);
        learner.decay_exploration();
        assert!((learner.eps - 0.99985).abs() < 1e-12);
        for _ in 0..200_000 {
            learner.decay_exploration();
        }
        assert_eq!(learner.eps, 0.03);
    }

    #[test]
    fn terminal_transitions_do_not_bootstrap() {
        // A buffer of identical terminal transitions trains q(s, a) toward
        // exactly r, whatever the next state looks like.
        let cfg = TrainConfig {
            batch_size: 4,
            learning_rate: 1e-2,
            target_sync_every: 10,
            ..TrainConfig::default()
        };
        let mut learner = Learner::new(cfg, 3);
        for _ in 0..4 {
            learner.record(transition(0.3, -7.0, true));
        }
        for _ in 0..300 {
            learner.train_step().unwrap().unwrap();
        }
        let q = learner.q_values(&state(0.3));
        assert!(
            (q[Action::KeepLane.index()] + 7.0).abs() < 0.05,
            "terminal target missed: {q:?}"
        );
    }

    #[test]
    fn checkpoint_round_trip_restores_the_learner() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("learner.bin");
        let cfg = TrainConfig {
            batch_size: 2,
            ..TrainConfig::default()
        };
        let mut learner = Learner::new(cfg, 4);
        learner.record(transition(0.1, 0.5, false));
        learner.record(transition(0.2, -0.5, false));
        for _ in 0..5 {
            learner.train_step().unwrap();
        }
        learner.decay_exploration();

        checkpoint::save(&path, &learner.to_checkpoint()).unwrap();
        let restored = Learner::from_checkpoint(checkpoint::load(&path).unwrap(), 4);

        assert_eq!(restored.eps, learner.eps);
        assert_eq!(restored.grad_steps, 5);
        assert_eq!(restored.params, learner.params.quantized_f32());
        assert_eq!(restored.adam.m, learner.adam.m);
        // Q-values from the restored learner match the quantized weights.
        let s = state(0.7);
        let expected = forward(&learner.dims, &learner.params.quantized_f32(), &s);
        assert_eq!(restored.q_values(&s), expected);
    }
}
