//! Incremental "am I close to a previous step?" index for walk loops.
//!
//! A hash grid with cell size equal to the query radius: any point within
//! `radius` of a query lies in one of the 3^m neighboring cells. Cell keys
//! are hashed; collisions only add distance checks, never wrong answers.

use std::collections::HashMap;

use crate::vecops;

pub(crate) struct ProximityGuard {
    radius2: f64,
    inv_cell: f64,
    dim: usize,
    cells: HashMap<u64, Vec<u32>>,
    points: Vec<f64>,
}

impl ProximityGuard {
    pub fn new(dim: usize, radius: f64) -> Self {
        assert!(radius > 0.0);
        Self {
            radius2: radius * radius,
            inv_cell: 1.0 / radius,
            dim,
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn cell_hash(&self, p: &[f64], offset: &[i64]) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for (i, &c) in p.iter().enumerate() {
            let k = (c * self.inv_cell).floor() as i64 + offset[i];
            h ^= k as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    pub fn insert(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        let idx = (self.points.len() / self.dim) as u32;
        self.points.extend_from_slice(p);
        let key = self.cell_hash(p, &vec![0; self.dim]);
        self.cells.entry(key).or_default().push(idx);
    }

    /// True if any inserted point lies within `radius` (inclusive) of `q`.
    pub fn any_within(&self, q: &[f64]) -> bool {
        debug_assert_eq!(q.len(), self.dim);
        let mut offset = vec![-1i64; self.dim];
        loop {
            let key = self.cell_hash(q, &offset);
            if let Some(bucket) = self.cells.get(&key) {
                for &idx in bucket {
                    let start = idx as usize * self.dim;
                    let p = &self.points[start..start + self.dim];
                    if vecops::dist2(p, q) <= self.radius2 {
                        return true;
                    }
                }
            }
            // odometer over {-1,0,1}^m
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return false;
                }
                axis -= 1;
                offset[axis] += 1;
                if offset[axis] <= 1 {
                    break;
                }
                offset[axis] = -1;
            }
        }
    }
}
