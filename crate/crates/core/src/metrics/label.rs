//! Label-aspect homophily metrics. Undirected edges are counted once;
//! arc-based sums (degree-weighted fractions) use both directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dataset;

/// Fraction of edges joining same-label endpoints.
pub fn edge_homophily(ds: &Dataset) -> Result<f64> {
    let total = ds.graph.num_edges();
    if total == 0 {
        return Err(Error::EmptyGraph);
    }
    let same = ds
        .graph
        .edges()
        .filter(|&(u, v)| ds.labels[u] == ds.labels[v])
        .count();
    Ok(same as f64 / total as f64)
}

/// Mean over non-isolated nodes of the same-label neighbor fraction.
pub fn node_homophily(ds: &Dataset) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for u in 0..ds.num_nodes() {
        let d = ds.graph.degree(u);
        if d == 0 {
            continue;
        }
        let same = ds
            .graph
            .neighbors(u)
            .iter()
            .filter(|&&v| ds.labels[v] == ds.labels[u])
            .count();
        sum += same as f64 / d as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(sum / count as f64)
}

/// Class-balanced excess of intra-class arc fractions over class share,
/// clamped at zero per class.
pub fn class_homophily(ds: &Dataset) -> Result<f64> {
    let c = ds.num_classes;
    let n = ds.num_nodes();
    let counts = ds.class_counts();
    let mut intra_arcs = vec![0u64; c];
    let mut class_degree = vec![0u64; c];
    for u in 0..n {
        let cu = ds.labels[u];
        class_degree[cu] += ds.graph.degree(u) as u64;
        intra_arcs[cu] += ds
            .graph
            .neighbors(u)
            .iter()
            .filter(|&&v| ds.labels[v] == cu)
            .count() as u64;
    }
    let mut sum = 0.0;
    for class in 0..c {
        if class_degree[class] == 0 {
            continue;
        }
        let fraction = intra_arcs[class] as f64 / class_degree[class] as f64;
        let share = counts[class] as f64 / n as f64;
        sum += (fraction - share).max(0.0);
    }
    Ok(sum / (c - 1) as f64)
}

/// Edge homophily recentred by the degree-weighted chance level.
pub fn adjusted_homophily(ds: &Dataset) -> Result<f64> {
    let h_edge = edge_homophily(ds)?;
    let total_arcs = 2.0 * ds.graph.num_edges() as f64;
    let mut class_degree = vec![0.0f64; ds.num_classes];
    for u in 0..ds.num_nodes() {
        class_degree[ds.labels[u]] += ds.graph.degree(u) as f64;
    }
    let chance: f64 = class_degree
        .iter()
        .map(|&d| (d / total_arcs) * (d / total_arcs))
        .sum();
    let denominator = 1.0 - chance;
    if denominator.abs() < 1e-12 {
        return Err(Error::Degenerate(
            "adjusted homophily undefined: single effective class".into(),
        ));
    }
    Ok((h_edge - chance) / denominator)
}

/// Worst-class margin between intra-class edge density and the largest
/// density toward any other class, mapped to [0,1].
pub fn density_aware_homophily(ds: &Dataset) -> Result<f64> {
    let c = ds.num_classes;
    let counts = ds.class_counts();
    if let Some(class) = counts.iter().position(|&n| n < 2) {
        return Err(Error::Degenerate(format!(
            "density-aware homophily needs >=2 nodes per class; class {class} has {}",
            counts[class]
        )));
    }
    let mut intra = vec![0u64; c];
    let mut inter = vec![vec![0u64; c]; c];
    for (u, v) in ds.graph.edges() {
        let (cu, cv) = (ds.labels[u], ds.labels[v]);
        if cu == cv {
            intra[cu] += 1;
        } else {
            inter[cu][cv] += 1;
            inter[cv][cu] += 1;
        }
    }
    let mut worst = f64::INFINITY;
    for class in 0..c {
        let n_c = counts[class] as f64;
        let density = intra[class] as f64 / (n_c * (n_c - 1.0) / 2.0);
        let max_inter = (0..c)
            .filter(|&other| other != class)
            .map(|other| inter[class][other] as f64 / (n_c * counts[other] as f64))
            .fold(0.0f64, f64::max);
        worst = worst.min(density - max_inter);
    }
    Ok((1.0 + worst) / 2.0)
}

/// Denominator convention for [`two_hop_class_similarity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoHopDenominator {
    /// Size of the 2-hop neighborhood (default; keeps the value in [0,1]).
    NeighborhoodSize,
    /// Literal node degree.
    NodeDegree,
}

/// Mean same-label fraction within the 2-hop neighborhood
/// (union of neighbors' neighbors, excluding the node itself).
pub fn two_hop_class_similarity(ds: &Dataset, denominator: TwoHopDenominator) -> Result<f64> {
    let n = ds.num_nodes();
    let mut stamp = vec![usize::MAX; n];
    let mut members = Vec::new();
    let mut sum = 0.0;
    let mut count = 0usize;
    for u in 0..n {
        members.clear();
        for &v in ds.graph.neighbors(u) {
            for &w in ds.graph.neighbors(v) {
                if w != u && stamp[w] != u {
                    stamp[w] = u;
                    members.push(w);
                }
            }
        }
        if members.is_empty() {
            continue;
        }
        let same = members.iter().filter(|&&w| ds.labels[w] == ds.labels[u]).count();
        let denom = match denominator {
            TwoHopDenominator::NeighborhoodSize => members.len() as f64,
            TwoHopDenominator::NodeDegree => ds.graph.degree(u) as f64,
        };
        sum += same as f64 / denom;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Degenerate(
            "no node has a non-empty 2-hop neighborhood".into(),
        ));
    }
    Ok(sum / count as f64)
}

/// Mean dominant-class fraction within the k-hop neighborhood (nodes at
/// distance <= k, excluding the node itself).
pub fn neighbor_homophily(ds: &Dataset, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    let n = ds.num_nodes();
    let mut stamp = vec![usize::MAX; n];
    let mut frontier = Vec::new();
    let mut next = Vec::new();
    let mut members = Vec::new();
    let mut class_counts = vec![0usize; ds.num_classes];
    let mut sum = 0.0;
    let mut count = 0usize;
    for u in 0..n {
        stamp[u] = u;
        members.clear();
        frontier.clear();
        frontier.push(u);
        for _ in 0..k {
            next.clear();
            for &v in &frontier {
                for &w in ds.graph.neighbors(v) {
                    if stamp[w] != u {
                        stamp[w] = u;
                        members.push(w);
                        next.push(w);
                    }
                }
            }
            std::mem::swap(&mut frontier, &mut next);
        }
        if members.is_empty() {
            continue;
        }
        class_counts.fill(0);
        for &w in &members {
            class_counts[ds.labels[w]] += 1;
        }
        let dominant = *class_counts.iter().max().unwrap();
        sum += dominant as f64 / members.len() as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Degenerate(
            "no node has a non-empty k-hop neighborhood".into(),
        ));
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::matrix::Matrix;

    fn dataset(n: usize, edges: &[(usize, usize)], labels: Vec<usize>, c: usize) -> Dataset {
        let graph = Graph::from_edges(n, edges).unwrap();
        let features = Matrix::zeros(n, 1);
        Dataset::new(graph, labels, c, features).unwrap()
    }

    fn triangle_mixed() -> Dataset {
        dataset(3, &[(0, 1), (0, 2), (1, 2)], vec![0, 0, 1], 2)
    }

    #[test]
    fn edge_homophily_cases() {
        let same = dataset(3, &[(0, 1), (1, 2)], vec![1, 1, 1], 2);
        assert_eq!(edge_homophily(&same).unwrap(), 1.0);

        let bipartite = dataset(
            4,
            &[(0, 2), (0, 3), (1, 2), (1, 3)],
            vec![0, 0, 1, 1],
            2,
        );
        assert_eq!(edge_homophily(&bipartite).unwrap(), 0.0);

        assert!((edge_homophily(&triangle_mixed()).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let empty = dataset(2, &[], vec![0, 1], 2);
        assert!(matches!(edge_homophily(&empty), Err(Error::EmptyGraph)));
    }

    #[test]
    fn node_homophily_cases() {
        let same = dataset(3, &[(0, 1), (1, 2)], vec![1, 1, 1], 2);
        assert_eq!(node_homophily(&same).unwrap(), 1.0);

        assert!((node_homophily(&triangle_mixed()).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let star = dataset(5, &[(0, 1), (0, 2), (0, 3), (0, 4)], vec![0, 1, 1, 1, 1], 2);
        assert_eq!(node_homophily(&star).unwrap(), 0.0);
    }

    #[test]
    fn class_homophily_cases() {
        let two_cliques = dataset(4, &[(0, 1), (2, 3)], vec![0, 0, 1, 1], 2);
        assert_eq!(class_homophily(&two_cliques).unwrap(), 1.0);

        // Each class's intra-arc fraction equals its node share exactly.
        let mixed_cycle = dataset(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], vec![0, 0, 1, 1], 2);
        assert_eq!(class_homophily(&mixed_cycle).unwrap(), 0.0);

        assert_eq!(class_homophily(&triangle_mixed()).unwrap(), 0.0);
    }

    #[test]
    fn adjusted_homophily_cases() {
        let two_triangles = dataset(
            6,
            &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)],
            vec![0, 0, 0, 1, 1, 1],
            2,
        );
        assert!((adjusted_homophily(&two_triangles).unwrap() - 1.0).abs() < 1e-12);

        // Chance-level mixing: value 0 by construction.
        let mixed_cycle = dataset(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], vec![0, 0, 1, 1], 2);
        assert!(adjusted_homophily(&mixed_cycle).unwrap().abs() < 1e-12);

        assert!((adjusted_homophily(&triangle_mixed()).unwrap() - (-0.5)).abs() < 1e-12);

        let single_class = dataset(3, &[(0, 1), (1, 2)], vec![0, 0, 0], 2);
        assert!(matches!(
            adjusted_homophily(&single_class),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn density_aware_homophily_cases() {
        let two_cliques = dataset(
            6,
            &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)],
            vec![0, 0, 0, 1, 1, 1],
            2,
        );
        assert_eq!(density_aware_homophily(&two_cliques).unwrap(), 1.0);

        let bipartite = dataset(
            4,
            &[(0, 2), (0, 3), (1, 2), (1, 3)],
            vec![0, 0, 1, 1],
            2,
        );
        assert_eq!(density_aware_homophily(&bipartite).unwrap(), 0.0);

        assert!(matches!(
            density_aware_homophily(&triangle_mixed()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn two_hop_similarity_cases() {
        let path = dataset(3, &[(0, 1), (1, 2)], vec![0, 1, 0], 2);
        assert_eq!(
            two_hop_class_similarity(&path, TwoHopDenominator::NeighborhoodSize).unwrap(),
            1.0
        );

        let same = dataset(4, &[(0, 1), (1, 2), (2, 3)], vec![0, 0, 0, 0], 2);
        assert_eq!(
            two_hop_class_similarity(&same, TwoHopDenominator::NeighborhoodSize).unwrap(),
            1.0
        );

        let alternating = dataset(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], vec![0, 1, 0, 1], 2);
        assert_eq!(
            two_hop_class_similarity(&alternating, TwoHopDenominator::NeighborhoodSize).unwrap(),
            1.0
        );

        // Triangle: each 2-hop set is the two other nodes.
        let expected = (0.5 + 0.5 + 0.0) / 3.0;
        let value =
            two_hop_class_similarity(&triangle_mixed(), TwoHopDenominator::NeighborhoodSize)
                .unwrap();
        assert!((value - expected).abs() < 1e-15);

        // Literal denominator divides by degree instead.
        let literal =
            two_hop_class_similarity(&triangle_mixed(), TwoHopDenominator::NodeDegree).unwrap();
        assert!((literal - expected).abs() < 1e-15); // degrees equal set sizes here

        let single_edge = dataset(2, &[(0, 1)], vec![0, 1], 2);
        assert!(matches!(
            two_hop_class_similarity(&single_edge, TwoHopDenominator::NeighborhoodSize),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn neighbor_homophily_cases() {
        let same = dataset(3, &[(0, 1), (1, 2)], vec![1, 1, 1], 2);
        assert_eq!(neighbor_homophily(&same, 1).unwrap(), 1.0);
        assert_eq!(neighbor_homophily(&same, 2).unwrap(), 1.0);

        // Every 1-hop neighborhood is a balanced class mix.
        let mixed_cycle = dataset(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], vec![0, 0, 1, 1], 2);
        assert_eq!(neighbor_homophily(&mixed_cycle, 1).unwrap(), 0.5);

        let expected = (0.5 + 0.5 + 1.0) / 3.0;
        assert!((neighbor_homophily(&triangle_mixed(), 1).unwrap() - expected).abs() < 1e-15);

        assert!(neighbor_homophily(&same, 0).is_err());
    }
}
