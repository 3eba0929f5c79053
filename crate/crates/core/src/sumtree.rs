//! Complete binary tree of partial sums over a growable array of weights.
//!
//! Internal nodes are always recomputed as `left + right` from their children,
//! so every node value is a function of the current leaves alone. Two trees
//! holding the same leaves therefore agree bit for bit regardless of the
//! order in which updates were applied, which keeps samplers that consume the
//! same random numbers in lock step.

#[derive(Clone, Debug, Default)]
pub struct SumTree {
    /// Heap layout: node `i` has children `2i` and `2i + 1`, leaves start at
    /// `cap`. Index 0 is unused.
    nodes: Vec<f64>,
    cap: usize,
}

impl SumTree {
    pub fn new() -> Self {
        SumTree {
            nodes: vec![0.0; 2],
            cap: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.cap
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0.0
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        if i < self.cap {
            self.nodes[self.cap + i]
        } else {
            0.0
        }
    }

    fn grow(&mut self, min_len: usize) {
        let cap = min_len.next_power_of_two();
        let mut nodes = vec![0.0; 2 * cap];
        nodes[cap..cap + self.cap].copy_from_slice(&self.nodes[self.cap..]);
        for i in (1..cap).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        self.nodes = nodes;
        self.cap = cap;
    }

    pub fn set(&mut self, i: usize, value: f64) {
        if i >= self.cap {
            self.grow(i + 1);
        }
        let mut node = self.cap + i;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf index whose cumulative range contains `target ∈ [0, total)`.
    /// Never returns a zero-weight leaf while the total is positive, even when
    /// rounding pushes `target` past the last positive leaf.
    pub fn find(&self, mut target: f64) -> Option<usize> {
        if self.total() <= 0.0 {
            return None;
        }
        let mut node = 1;
        while node < self.cap {
            let left = self.nodes[2 * node];
            let right = self.nodes[2 * node + 1];
            if (target < left && left > 0.0) || right <= 0.0 {
                node *= 2;
            } else {
                target -= left;
                node = 2 * node + 1;
            }
        }
        Some(node - self.cap)
    }
}
