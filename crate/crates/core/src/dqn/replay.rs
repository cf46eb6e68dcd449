//! FIFO experience replay with uniform batch sampling.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::StateTensor;
use crate::error::{Error, Result};
use crate::sim::Action;

/// One decision-level experience.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: StateTensor,
    /// The action the agent chose (before any safety veto).
    pub action: Action,
    pub reward: f64,
    pub next_state: StateTensor,
    /// The episode ended in a collision after this transition.
    pub terminal: bool,
}

/// Bounded FIFO buffer: when full, pushing evicts the oldest transition.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            items: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Uniform sample of `batch` distinct transitions.
    pub fn sample<R: Rng>(&self, batch: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        if self.items.len() < batch {
            return Err(Error::NotEnoughSamples {
                have: self.items.len(),
                need: batch,
            });
        }
        let picks = rand::seq::index::sample(rng, self.items.len(), batch);
        Ok(picks.iter().map(|i| &self.items[i]).collect())
    }
}
