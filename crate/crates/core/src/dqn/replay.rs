use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::space::StateVector;

/// One stored experience `(s, a, r, s')`, with one reward per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: StateVector,
    pub action: usize,
    pub rewards: Vec<f64>,
    pub next_state: StateVector,
    pub terminal: bool,
}

/// Fixed-capacity FIFO experience pool with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    /// Slot the next insertion overwrites once full.
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be at least 1".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Appends `t`, evicting the oldest entry when full.
    pub fn store(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.items.split_at(self.cursor);
        older.iter().chain(newer)
    }

    /// `k` draws, uniform with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        if self.items.len() < k || self.items.is_empty() {
            return Err(Error::BufferTooSmall {
                requested: k,
                available: self.items.len(),
            });
        }
        Ok((0..k)
            .map(|_| &self.items[rng.random_range(0..self.items.len())])
            .collect())
    }

    pub fn sample_seeded(&self, k: usize, seed: u64) -> Result<Vec<&Transition>> {
        self.sample(k, &mut seed::rng(seed, 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParameterSpace;

    fn tagged(tag: f64) -> Transition {
        let space = ParameterSpace::ozonation();
        let s = space.state(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        Transition {
            state: s.clone(),
            action: 40,
            rewards: vec![tag],
            next_state: s,
            terminal: false,
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut buf = ReplayBuffer::new(2).unwrap();
        for tag in [1.0, 2.0, 3.0] {
            buf.store(tagged(tag));
        }
        let tags: Vec<f64> = buf.iter().map(|t| t.rewards[0]).collect();
        assert_eq!(tags, vec![2.0, 3.0]);
        buf.store(tagged(4.0));
        let tags: Vec<f64> = buf.iter().map(|t| t.rewards[0]).collect();
        assert_eq!(tags, vec![3.0, 4.0]);
        assert_eq!(buf.len(), 2);
    }

    #[test]
    fn single_element_sampled_with_replacement() {
        let mut buf = ReplayBuffer::new(10).unwrap();
        buf.store(tagged(7.0));
        let draws = buf.sample(1, &mut seed::rng(0, 0)).unwrap();
        assert_eq!(draws.len(), 1);
        // sampling k larger than the pool is rejected
        assert!(matches!(
            buf.sample_seeded(3, 1),
            Err(Error::BufferTooSmall {
                requested: 3,
                available: 1
            })
        ));
    }

    #[test]
    fn repeated_draws_of_one_element() {
        let mut buf = ReplayBuffer::new(10).unwrap();
        for _ in 0..3 {
            buf.store(tagged(7.0));
        }
        let mut one = ReplayBuffer::new(1).unwrap();
        one.store(tagged(5.0));
        let mut rng = seed::rng(2, 0);
        let draws: Vec<f64> = (0..3)
            .map(|_| one.sample(1, &mut rng).unwrap()[0].rewards[0])
            .collect();
        assert_eq!(draws, vec![5.0; 3]);
    }

    #[test]
    fn uniform_sampling() {
        let mut buf = ReplayBuffer::new(4).unwrap();
        for tag in 0..4 {
            buf.store(tagged(f64::from(tag)));
        }
        let draws = buf.sample_seeded(4, 9).unwrap();
        assert_eq!(draws.len(), 4);
        let mut rng = seed::rng(11, 0);
        let mut counts = [0usize; 4];
        let total = 100_000;
        for _ in 0..total / 4 {
            for t in buf.sample(4, &mut rng).unwrap() {
                counts[t.rewards[0] as usize] += 1;
            }
        }
        for c in counts {
            let f = c as f64 / total as f64;
            assert!((0.24..=0.26).contains(&f), "frequency {f}");
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let mut buf = ReplayBuffer::new(50).unwrap();
        for tag in 0..50 {
            buf.store(tagged(f64::from(tag)));
        }
        let a: Vec<f64> = buf
            .sample_seeded(10, 4)
            .unwrap()
            .iter()
            .map(|t| t.rewards[0])
            .collect();
        let b: Vec<f64> = buf
            .sample_seeded(10, 4)
            .unwrap()
            .iter()
            .map(|t| t.rewards[0])
            .collect();
        assert_eq!(a, b);
    }
}
