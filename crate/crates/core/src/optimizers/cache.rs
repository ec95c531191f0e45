use std::collections::HashMap;

use rayon::prelude::*;

use super::problem::{Outcome, Problem};

/// Memo of evaluated vectors keyed by their exact bit pattern. Problems that
/// snap to significant digits make the key equal to the quantised vector.
#[derive(Debug, Default)]
pub struct EvalCache {
    map: HashMap<Vec<u64>, Outcome>,
    pub hits: usize,
    pub misses: usize,
}

fn key(x: &[f64]) -> Vec<u64> {
    // Normalise negative zero so it shares a slot with positive zero.
    x.iter().map(|v| (v + 0.0).to_bits()).collect()
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Evaluates a batch of already repaired vectors. Missing entries are
    /// computed in parallel; the returned order matches the input.
    pub fn evaluate_batch(&mut self, problem: &Problem, xs: &[Vec<f64>]) -> Vec<Outcome> {
        let keys: Vec<Vec<u64>> = xs.iter().map(|x| key(x)).collect();
        let mut todo: Vec<usize> = Vec::new();
        for (i, k) in keys.iter().enumerate() {
            if !self.map.contains_key(k) && !todo.iter().any(|&j| keys[j] == *k) {
                todo.push(i);
            }
        }
        let fresh: Vec<Outcome> = todo.par_iter().map(|&i| problem.evaluate_raw(&xs[i])).collect();
        self.misses += todo.len();
        self.hits += xs.len() - todo.len();
        for (i, o) in todo.into_iter().zip(fresh) {
            self.map.insert(keys[i].clone(), o);
        }
        keys.iter().map(|k| self.map[k].clone()).collect()
    }
}
