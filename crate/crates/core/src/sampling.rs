//! Uniform node-pair sampling split by class agreement. Used by the pairwise
//! metrics that switch from exact all-pairs evaluation to seeded sampling on
//! large graphs.

use rand::Rng;

pub(crate) struct PairSampler {
    /// Eligible nodes grouped by class.
    members: Vec<Vec<usize>>,
    /// All eligible nodes, flattened.
    nodes: Vec<usize>,
    /// Class index of each entry in `nodes`.
    node_classes: Vec<usize>,
    /// Cumulative intra-pair counts per class.
    intra_cumulative: Vec<u64>,
    total_intra: u64,
    total_pairs: u64,
}

impl PairSampler {
    pub fn new(labels: &[usize], num_classes: usize, eligible: impl Fn(usize) -> bool) -> Self {
        let mut members = vec![Vec::new(); num_classes];
        let mut nodes = Vec::new();
        let mut node_classes = Vec::new();
        for (u, &c) in labels.iter().enumerate() {
            if eligible(u) {
                members[c].push(u);
                nodes.push(u);
                node_classes.push(c);
            }
        }
        let mut intra_cumulative = Vec::with_capacity(num_classes);
        let mut total_intra = 0u64;
        for class in &members {
            let n = class.len() as u64;
            total_intra += n * (n - 1) / 2;
            intra_cumulative.push(total_intra);
        }
        let n = nodes.len() as u64;
        let total_pairs = n * (n - 1) / 2;
        Self {
            members,
            nodes,
            node_classes,
            intra_cumulative,
            total_intra,
            total_pairs,
        }
    }

    pub fn has_intra_pairs(&self) -> bool {
        self.total_intra > 0
    }

    pub fn has_inter_pairs(&self) -> bool {
        self.total_pairs > self.total_intra
    }

    /// Uniform draw over same-class pairs: pick the class proportionally to
    /// its pair count, then a distinct index pair inside it.
    pub fn sample_intra<R: Rng>(&self, rng: &mut R) -> (usize, usize) {
        let ticket = rng.random_range(0..self.total_intra);
        let class = self.intra_cumulative.partition_point(|&c| c <= ticket);
        let group = &self.members[class];
        let i = rng.random_range(0..group.len());
        let mut j = rng.random_range(0..group.len() - 1);
        if j >= i {
            j += 1;
        }
        (group[i], group[j])
    }

    /// Uniform draw over different-class pairs by rejection from the uniform
    /// pair distribution.
    pub fn sample_inter<R: Rng>(&self, rng: &mut R) -> Option<(usize, usize)> {
        if !self.has_inter_pairs() {
            return None;
        }
        for _ in 0..10_000 {
            let i = rng.random_range(0..self.nodes.len());
            let mut j = rng.random_range(0..self.nodes.len() - 1);
            if j >= i {
                j += 1;
            }
            if self.node_classes[i] != self.node_classes[j] {
                return Some((self.nodes[i], self.nodes[j]));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn intra_draws_are_same_class_and_inter_differ() {
        let labels = vec![0, 0, 1, 1, 2, 0];
        let sampler = PairSampler::new(&labels, 3, |_| true);
        let mut rng = stream(3, 0);
        for _ in 0..200 {
            let (u, v) = sampler.sample_intra(&mut rng);
            assert_ne!(u, v);
            assert_eq!(labels[u], labels[v]);
            let (a, b) = sampler.sample_inter(&mut rng).unwrap();
            assert_ne!(labels[a], labels[b]);
        }
    }

    #[test]
    fn intra_sampling_is_uniform_over_pairs() {
        // Two classes of sizes 3 and 2: 3 + 1 = 4 intra pairs, each ~1/4.
        let labels = vec![0, 0, 0, 1, 1];
        let sampler = PairSampler::new(&labels, 2, |_| true);
        let mut rng = stream(11, 0);
        let mut counts = std::collections::HashMap::new();
        let draws = 40_000;
        for _ in 0..draws {
            let (u, v) = sampler.sample_intra(&mut rng);
            *counts.entry((u.min(v), u.max(v))).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 4);
        for &count in counts.values() {
            let freq = count as f64 / draws as f64;
            assert!((freq - 0.25).abs() < 0.02, "pair frequency {freq}");
        }
    }
}
