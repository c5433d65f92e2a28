//! Gradient clipping against the median of recently observed update norms.

use std::collections::VecDeque;

/// Sliding window of update norms with an exact median.
#[derive(Debug, Clone)]
pub struct MedianClipper {
    multiplier: f64,
    capacity: usize,
    recent: VecDeque<f64>,
    sorted: Vec<f64>,
}

impl MedianClipper {
    pub fn new(multiplier: f64, capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self { multiplier, capacity, recent: VecDeque::with_capacity(capacity), sorted: Vec::with_capacity(capacity) }
    }

    /// Median of the window; `None` while it is empty.
    pub fn median(&self) -> Option<f64> {
        let n = self.sorted.len();
        match n {
            0 => None,
            _ if n % 2 == 1 => Some(self.sorted[n / 2]),
            _ => Some(0.5 * (self.sorted[n / 2 - 1] + self.sorted[n / 2])),
        }
    }

    /// Decides whether an update of norm `norm` is clipped and returns the
    /// factor to scale it by (1.0 when unchanged). The norm is recorded
    /// after the decision. Zero norms are neither clipped nor recorded.
    pub fn observe(&mut self, norm: f64) -> f64 {
        if norm == 0.0 {
            return 1.0;
        }
        let factor = match self.median() {
            Some(m) if norm > self.multiplier * m => m / norm,
            _ => 1.0,
        };
        self.record(norm);
        factor
    }

    fn record(&mut self, norm: f64) {
        if self.recent.len() == self.capacity {
            let old = self.recent.pop_front().unwrap();
            let pos = self.sorted.partition_point(|&x| x < old);
            self.sorted.remove(pos);
        }
        self.recent.push_back(norm);
        let pos = self.sorted.partition_point(|&x| x < norm);
        self.sorted.insert(pos, norm);
    }
}
