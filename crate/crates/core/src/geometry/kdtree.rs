//! Exact nearest-neighbor kd-tree for scattered samples.
//!
//! Splits on the axis of largest spread at the median. Queries return the
//! sample minimizing `(distance^2, storage index)` lexicographically, so ties
//! resolve exactly like a brute-force scan in storage order. Subtrees are
//! pruned only when strictly farther than the current best, which keeps
//! tied candidates reachable.

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

pub(crate) struct KdTree {
    dim: usize,
    /// Flat copy of the point coordinates, in storage order.
    coords: Vec<f64>,
    /// Permutation of storage indices owned by the leaves.
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: usize,
}

impl KdTree {
    pub fn build<'a, I>(points: I, dim: usize) -> Self
    where
        I: Iterator<Item = &'a [f64]>,
    {
        let mut coords = Vec::new();
        for p in points {
            debug_assert_eq!(p.len(), dim);
            coords.extend_from_slice(p);
        }
        let n = coords.len() / dim;
        let mut tree = Self {
            dim,
            coords,
            order: (0..n as u32).collect(),
            nodes: Vec::new(),
            root: 0,
        };
        if n > 0 {
            tree.root = tree.split(0, n);
        }
        tree
    }

    fn point(&self, idx: u32) -> &[f64] {
        let i = idx as usize * self.dim;
        &self.coords[i..i + self.dim]
    }

    fn split(&mut self, start: usize, end: usize) -> usize {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return self.nodes.len() - 1;
        }
        // widest-spread axis
        let mut axis = 0;
        let mut best_spread = -1.0;
        for a in 0..self.dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &idx in &self.order[start..end] {
                let c = self.point(idx)[a];
                lo = lo.min(c);
                hi = hi.max(c);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                axis = a;
            }
        }
        let mid = (start + end) / 2;
        {
            let dim = self.dim;
            let coords = &self.coords;
            let key = |idx: &u32| coords[*idx as usize * dim + axis];
            self.order[start..end]
                .select_nth_unstable_by(mid - start, |a, b| key(a).total_cmp(&key(b)));
        }
        let value = self.point(self.order[mid])[axis];
        let left = self.split(start, mid);
        let right = self.split(mid, end);
        self.nodes.push(Node::Split {
            axis,
            value,
            left,
            right,
        });
        self.nodes.len() - 1
    }

    /// Storage index of the nearest point. The tree is never built empty.
    pub fn nearest(&self, q: &[f64]) -> usize {
        debug_assert_eq!(q.len(), self.dim);
        let mut best = (f64::INFINITY, u32::MAX);
        self.search(self.root, q, &mut best);
        best.1 as usize
    }

    fn search(&self, node: usize, q: &[f64], best: &mut (f64, u32)) {
        match &self.nodes[node] {
            Node::Leaf { start, end } => {
                for &idx in &self.order[*start..*end] {
                    let p = self.point(idx);
                    let mut d2 = 0.0;
                    for (a, b) in p.iter().zip(q) {
                        let d = a - b;
                        d2 += d * d;
                    }
                    if (d2, idx) < *best {
                        *best = (d2, idx);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[*axis] - value;
                let (near, far) = if diff < 0.0 {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(near, q, best);
                if diff * diff <= best.0 {
                    self.search(far, q, best);
                }
            }
        }
    }
}
