//! Replay memories: a circular buffer for reinforcement-learning transitions
//! and reservoirs for the supervised record of best-response behaviour.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Features, LegalMask};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MemoryError {
    #[error("cannot sample from an empty memory")]
    Empty,
}

/// One own-perspective step of an episode. The reward is zero except on the
/// terminal transition, which carries the hand's chip outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Features,
    /// Legal actions at `state`.
    pub legal: LegalMask,
    pub action: u8,
    pub reward: f64,
    /// Next own information state and its legal actions; `None` at the end
    /// of the hand.
    pub next: Option<(Features, LegalMask)>,
}

impl Transition {
    pub fn is_terminal(&self) -> bool {
        self.next.is_none()
    }
}

/// Information state and the action the best-response policy chose there.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviourTuple {
    pub state: Features,
    pub action: u8,
    /// Legal actions at `state`, needed for the masked softmax.
    pub legal: LegalMask,
}

/// Read access shared by all memories.
pub trait Memory<T> {
    fn len(&self) -> usize;
    fn get(&self, index: usize) -> &T;
    fn capacity(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `k` items drawn uniformly with replacement.
pub fn sample_minibatch<'m, T, M: Memory<T> + ?Sized, R: Rng>(
    memory: &'m M,
    k: usize,
    rng: &mut R,
) -> Result<Vec<&'m T>, MemoryError> {
    let n = memory.len();
    if n == 0 {
        return Err(MemoryError::Empty);
    }
    Ok((0..k).map(|_| memory.get(rng.gen_range(0..n))).collect())
}

/// Fixed-capacity FIFO; once full every push evicts the oldest item.
#[derive(Debug, Clone)]
pub struct CircularBuffer<T> {
    capacity: usize,
    items: Vec<T>,
    cursor: usize,
}

impl<T> CircularBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "memory capacity must be positive");
        CircularBuffer { capacity, items: Vec::new(), cursor: 0 }
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.cursor] = item;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        let split = if self.items.len() < self.capacity { 0 } else { self.cursor };
        self.items[split..].iter().chain(self.items[..split].iter())
    }

    pub fn clear(&mut self) {
        self.items.clear();
        self.cursor = 0;
    }
}

impl<T> Memory<T> for CircularBuffer<T> {
    fn len(&self) -> usize {
        self.items.len()
    }

    fn get(&self, index: usize) -> &T {
        &self.items[index]
    }

    fn capacity(&self) -> usize {
        self.capacity
    }
}

/// Uniform reservoir (Vitter's Algorithm R): after `n` pushes each of them
/// is held with probability `min(1, capacity / n)`.
#[derive(Debug, Clone)]
pub struct Reservoir<T> {
    capacity: usize,
    items: Vec<T>,
    seen: u64,
    rng: ChaCha8Rng,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "memory capacity must be positive");
        Reservoir { capacity, items: Vec::new(), seen: 0, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn push(&mut self, item: T) {
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push(item);
            return;
        }
        let j = self.rng.gen_range(0..self.seen);
        if (j as usize) < self.capacity {
            self.items[j as usize] = item;
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }
}

impl<T> Memory<T> for Reservoir<T> {
    fn len(&self) -> usize {
        self.items.len()
    }

    fn get(&self, index: usize) -> &T {
        &self.items[index]
    }

    fn capacity(&self) -> usize {
        self.capacity
    }
}

/// Reservoir biased towards recent items: once full, an item is admitted
/// with probability `max(capacity / n, p_min)` and overwrites a uniformly
/// chosen slot. With `p_min = 0` it is the uniform reservoir.
#[derive(Debug, Clone)]
pub struct ExpReservoir<T> {
    capacity: usize,
    p_min: f64,
    items: Vec<T>,
    seen: u64,
    rng: ChaCha8Rng,
}

impl<T> ExpReservoir<T> {
    pub fn new(capacity: usize, p_min: f64, seed: u64) -> Self {
        assert!(capacity > 0, "memory capacity must be positive");
        assert!((0.0..=1.0).contains(&p_min), "p_min must be a probability");
        ExpReservoir { capacity, p_min, items: Vec::new(), seen: 0, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn push(&mut self, item: T) {
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push(item);
            return;
        }
        let admit = (self.capacity as f64 / self.seen as f64).max(self.p_min);
        if self.rng.gen::<f64>() < admit {
            let slot = self.rng.gen_range(0..self.capacity);
            self.items[slot] = item;
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }
}

impl<T> Memory<T> for ExpReservoir<T> {
    fn len(&self) -> usize {
        self.items.len()
    }

    fn get(&self, index: usize) -> &T {
        &self.items[index]
    }

    fn capacity(&self) -> usize {
        self.capacity
    }
}

/// Which structure backs a replay memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MemoryKind {
    Reservoir,
    Exponential { p_min: f64 },
    SlidingWindow,
}

/// Replay memory of a configurable kind.
#[derive(Debug, Clone)]
pub enum ReplayMemory<T> {
    Reservoir(Reservoir<T>),
    Exponential(ExpReservoir<T>),
    SlidingWindow(CircularBuffer<T>),
}

impl<T> ReplayMemory<T> {
    pub fn new(kind: MemoryKind, capacity: usize, seed: u64) -> Self {
        match kind {
            MemoryKind::Reservoir => ReplayMemory::Reservoir(Reservoir::new(capacity, seed)),
            MemoryKind::Exponential { p_min } => ReplayMemory::Exponential(ExpReservoir::new(capacity, p_min, seed)),
            MemoryKind::SlidingWindow => ReplayMemory::SlidingWindow(CircularBuffer::new(capacity)),
        }
    }

    pub fn push(&mut self, item: T) {
        match self {
            ReplayMemory::Reservoir(m) => m.push(item),
            ReplayMemory::Exponential(m) => m.push(item),
            ReplayMemory::SlidingWindow(m) => m.push(item),
        }
    }
}

impl<T> Memory<T> for ReplayMemory<T> {
    fn len(&self) -> usize {
        match self {
            ReplayMemory::Reservoir(m) => m.len(),
            ReplayMemory::Exponential(m) => m.len(),
            ReplayMemory::SlidingWindow(m) => m.len(),
        }
    }

    fn get(&self, index: usize) -> &T {
        match self {
            ReplayMemory::Reservoir(m) => m.get(index),
            ReplayMemory::Exponential(m) => m.get(index),
            ReplayMemory::SlidingWindow(m) => m.get(index),
        }
    }

    fn capacity(&self) -> usize {
        match self {
            ReplayMemory::Reservoir(m) => m.capacity(),
            ReplayMemory::Exponential(m) => m.capacity(),
            ReplayMemory::SlidingWindow(m) => m.capacity(),
        }
    }
}
