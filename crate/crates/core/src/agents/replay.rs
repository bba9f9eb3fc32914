use crate::numerics::RngStream;

/// One stored interaction. States are the normalized network inputs and the
/// action is the raw vector that was executed, before projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Fixed-capacity FIFO replay memory.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: Vec::new(),
            cursor: 0,
        }
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

    /// Stores `t`, evicting the oldest entry when full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Storage slot `i`, in insertion order only until the first eviction.
    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    /// Distinct storage indices chosen uniformly without replacement, or
    /// `None` while fewer than `batch` transitions are stored.
    pub fn sample_indices(&self, batch: usize, rng: &mut RngStream) -> Option<Vec<usize>> {
        let n = self.items.len();
        if batch > n {
            return None;
        }
        // Floyd's algorithm: every batch-subset is equally likely
        let mut chosen: Vec<usize> = Vec::with_capacity(batch);
        for j in n - batch..n {
            let t = rng.below(j + 1);
            if chosen.contains(&t) {
                chosen.push(j);
            } else {
                chosen.push(t);
            }
        }
        Some(chosen)
    }

    pub fn sample(&self, batch: usize, rng: &mut RngStream) -> Option<Vec<&Transition>> {
        self.sample_indices(batch, rng)
            .map(|idx| idx.into_iter().map(|i| &self.items[i]).collect())
    }
}
