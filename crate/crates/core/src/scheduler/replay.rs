use rand::seq::index;
use rand::Rng;

use super::{Action, STATE_DIM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experience {
    pub state: [f64; STATE_DIM],
    pub action: Action,
    pub reward: f64,
    pub next: [f64; STATE_DIM],
    pub terminal: bool,
}

/// Fixed-capacity ring; the write position is `count mod capacity`.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: Vec<Experience>,
    capacity: usize,
    count: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { items: Vec::with_capacity(capacity), capacity, count: 0 }
    }

    pub fn push(&mut self, e: Experience) {
        let slot = self.count % self.capacity;
        if self.items.len() < self.capacity {
            self.items.push(e);
        } else {
            self.items[slot] = e;
        }
        self.count += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total insertions so far.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.items.iter()
    }

    /// `n` distinct stored experiences chosen uniformly.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&Experience> {
        index::sample(rng, self.items.len(), n).into_iter().map(|i| &self.items[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp(r: f64) -> Experience {
        Experience { state: [0.0; 5], action: Action::Silent, reward: r, next: [0.0; 5], terminal: false }
    }

    #[test]
    fn ring_overwrites_oldest() {
        let mut b = ReplayBuffer::new(8);
        for k in 0..8 + 3 {
            b.push(exp(k as f64));
        }
        assert_eq!(b.len(), 8);
        let rewards: Vec<f64> = b.iter().map(|e| e.reward).collect();
        for k in 0..3 {
            assert!(!rewards.contains(&(k as f64)));
        }
        for k in 3..11 {
            assert!(rewards.contains(&(k as f64)));
        }
    }

    #[test]
    fn sample_is_distinct() {
        let mut b = ReplayBuffer::new(50);
        for k in 0..50 {
            b.push(exp(k as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s: Vec<f64> = b.sample(32, &mut rng).iter().map(|e| e.reward).collect();
        s.sort_by(f64::total_cmp);
        s.dedup();
        assert_eq!(s.len(), 32);
    }
}
