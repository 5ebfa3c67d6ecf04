//! Immutable graph and dataset containers.
//!
//! Graphs are undirected and simple, stored in compressed sparse row form
//! with both arc directions materialized. Construction rejects self-loops
//! and parallel edges; normalization of raw edge lists belongs to the
//! loader, not to this type.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    num_nodes: usize,
    row_offsets: Vec<usize>,
    neighbor_ids: Vec<usize>,
}

impl Graph {
    /// Build from an undirected edge list. Each edge must appear once, in
    /// either orientation; self-loops and duplicates are rejected.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut degrees = vec![0usize; num_nodes];
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidInput(format!(
                    "edge ({u},{v}) out of range for {num_nodes} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at node {u}")));
            }
            degrees[u] += 1;
            degrees[v] += 1;
        }

        let mut row_offsets = Vec::with_capacity(num_nodes + 1);
        row_offsets.push(0);
        for d in &degrees {
            row_offsets.push(row_offsets.last().unwrap() + d);
        }

        let mut neighbor_ids = vec![0usize; 2 * edges.len()];
        let mut cursor = row_offsets[..num_nodes].to_vec();
        for &(u, v) in edges {
            neighbor_ids[cursor[u]] = v;
            cursor[u] += 1;
            neighbor_ids[cursor[v]] = u;
            cursor[v] += 1;
        }

        for u in 0..num_nodes {
            let list = &mut neighbor_ids[row_offsets[u]..row_offsets[u + 1]];
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!(
                    "parallel edge at node {u}"
                )));
            }
        }

        Ok(Self {
            num_nodes,
            row_offsets,
            neighbor_ids,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbor_ids.len() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbor_ids[self.row_offsets[u]..self.row_offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row_offsets[u + 1] - self.row_offsets[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes).map(|u| self.degree(u)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    /// Iterate undirected edges as (u, v) with u < v.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }

    /// y = A x for the (0/1) adjacency.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for u in 0..self.num_nodes {
            y[u] = self.neighbors(u).iter().map(|&v| x[v]).sum();
        }
    }

    /// Largest eigenvalue magnitude of the adjacency via power iteration
    /// from the normalized all-ones vector. Convergence is judged on the
    /// iterate-norm ratio, whose magnitude settles even on bipartite graphs
    /// where the dominant eigenvalue pair is ±ρ.
    pub fn spectral_radius(&self, tol: f64, max_iter: usize) -> Result<f64> {
        if self.num_nodes == 0 {
            return Err(Error::InvalidInput("empty graph".into()));
        }
        if tol <= 0.0 {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if self.neighbor_ids.is_empty() {
            return Ok(0.0);
        }

        let n = self.num_nodes;
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        let mut y = vec![0.0; n];
        let mut previous = 0.0;
        for _ in 0..max_iter {
            self.matvec(&x, &mut y);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(0.0);
            }
            let estimate = norm;
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / norm;
            }
            if (estimate - previous).abs() <= tol * estimate.max(1.0) {
                return Ok(estimate);
            }
            previous = estimate;
        }
        Err(Error::NonConvergence { iterations: max_iter })
    }
}

/// Graph plus node labels and node features.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dataset {
    pub graph: Graph,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub features: Matrix,
}

impl Dataset {
    pub fn new(
        graph: Graph,
        labels: Vec<usize>,
        num_classes: usize,
        features: Matrix,
    ) -> Result<Self> {
        let n = graph.num_nodes();
        if labels.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} labels for {n} nodes",
                labels.len()
            )));
        }
        if num_classes < 2 {
            return Err(Error::InvalidInput("at least 2 classes required".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= num_classes) {
            return Err(Error::InvalidInput(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        if features.rows() != n {
            return Err(Error::InvalidInput(format!(
                "{} feature rows for {n} nodes",
                features.rows()
            )));
        }
        Ok(Self {
            graph,
            labels,
            num_classes,
            features,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for &c in &self.labels {
            counts[c] += 1;
        }
        counts
    }

    pub fn neighbor_distribution(&self) -> NeighborDistribution {
        let n = self.num_nodes();
        let mut rows = Matrix::zeros(n, self.num_classes);
        let mut isolated = vec![false; n];
        for u in 0..n {
            let d = self.graph.degree(u);
            if d == 0 {
                isolated[u] = true;
                continue;
            }
            let row = rows.row_mut(u);
            for &v in self.graph.neighbors(u) {
                row[self.labels[v]] += 1.0;
            }
            for p in row.iter_mut() {
                *p /= d as f64;
            }
        }
        NeighborDistribution { rows, isolated }
    }
}

/// Per-node class distribution of local neighbors. Rows of isolated nodes
/// are all-zero and flagged.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeighborDistribution {
    pub rows: Matrix,
    pub isolated: Vec<bool>,
}
