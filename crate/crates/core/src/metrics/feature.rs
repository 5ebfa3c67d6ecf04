//! Feature-aspect metrics: the diffusion-model feature-homophily estimator
//! and the feature-consistency metrics it is compared against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dataset;
use crate::matrix::{cosine, euclidean_distance, Matrix};
use crate::rng;

/// Graphs up to this size evaluate reference distances against all nodes.
pub const CLASS_CONTROLLED_EXACT_THRESHOLD: usize = 1000;

/// Denominator energies below this are treated as degenerate features.
pub const DEGENERATE_ENERGY: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureFit {
    /// Unclipped least-squares solution.
    pub raw: f64,
    /// Solution clipped to [-1, 1].
    pub clipped: f64,
    /// Denominator energy of the quadratic; below `DEGENERATE_ENERGY`
    /// the feature is degenerate and reports 0.
    pub energy: f64,
    /// Objective value at the clipped solution.
    pub residual: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureHomophilyEstimate {
    /// Mean of clipped per-feature values over non-degenerate features.
    pub h_f: f64,
    pub per_feature: Vec<FeatureFit>,
    pub rho_used: f64,
}

/// Per-feature feature homophily: the h minimizing the intra-class spread
/// of the reconstructed structural-agnostic column
/// x0 = (I - (h/rho) A) x. The objective is quadratic in h, so the solution
/// is closed-form: h = rho * B / E with B and E the intra-class pair sums of
/// dx*da and da^2, folded to O(N) per class via
/// sum_{u,v in c} (z_u - z_v)(w_u - w_v) = 2 n_c sum(zw) - 2 sum(z) sum(w).
pub fn estimate_feature_homophily(ds: &Dataset, rho: f64) -> Result<FeatureHomophilyEstimate> {
    if rho <= 0.0 {
        return Err(Error::InvalidInput("rho must be positive".into()));
    }
    let n = ds.num_nodes();
    let m = ds.features.cols();
    let counts = ds.class_counts();
    if counts.iter().all(|&c| c < 2) {
        return Err(Error::Degenerate("no class has two nodes".into()));
    }

    let members: Vec<Vec<usize>> = (0..ds.num_classes)
        .map(|c| (0..n).filter(|&u| ds.labels[u] == c).collect())
        .collect();

    let mut per_feature = Vec::with_capacity(m);
    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; n];
    for feature in 0..m {
        for u in 0..n {
            x[u] = ds.features.get(u, feature);
        }
        ds.graph.matvec(&x, &mut ax);

        let mut b = 0.0;
        let mut e = 0.0;
        let mut base = 0.0;
        for group in &members {
            if group.len() < 2 {
                continue;
            }
            let count = group.len() as f64;
            let (mut sx, mut sa, mut sxa, mut saa, mut sxx) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &u in group {
                sx += x[u];
                sa += ax[u];
                sxa += x[u] * ax[u];
                saa += ax[u] * ax[u];
                sxx += x[u] * x[u];
            }
            b += 2.0 * (count * sxa - sx * sa);
            e += 2.0 * (count * saa - sa * sa);
            base += 2.0 * (count * sxx - sx * sx);
        }

        if e < DEGENERATE_ENERGY {
            per_feature.push(FeatureFit {
                raw: 0.0,
                clipped: 0.0,
                energy: e,
                residual: base.max(0.0),
                degenerate: true,
            });
            continue;
        }
        let raw = rho * b / e;
        let clipped = raw.clamp(-1.0, 1.0);
        let w = clipped / rho;
        let residual = (base - 2.0 * w * b + w * w * e).max(0.0);
        per_feature.push(FeatureFit {
            raw,
            clipped,
            energy: e,
            residual,
            degenerate: false,
        });
    }

    let valid: Vec<f64> = per_feature
        .iter()
        .filter(|f| !f.degenerate)
        .map(|f| f.clipped)
        .collect();
    if valid.is_empty() {
        return Err(Error::Degenerate("every feature column is degenerate".into()));
    }
    Ok(FeatureHomophilyEstimate {
        h_f: valid.iter().sum::<f64>() / valid.len() as f64,
        per_feature,
        rho_used: rho,
    })
}

/// Mean cosine similarity of feature rows across edges.
pub fn generalized_edge_homophily(ds: &Dataset) -> Result<f64> {
    let total = ds.graph.num_edges();
    if total == 0 {
        return Err(Error::EmptyGraph);
    }
    let sum: f64 = ds
        .graph
        .edges()
        .map(|(u, v)| cosine(ds.features.row(u), ds.features.row(v)))
        .sum();
    Ok(sum / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimilarityMode {
    Cosine,
    Euclidean,
}

/// Mean over non-isolated nodes of the mean neighbor similarity: cosine, or
/// negated Euclidean distance.
pub fn local_similarity(ds: &Dataset, mode: SimilarityMode) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for u in 0..ds.num_nodes() {
        let neighbors = ds.graph.neighbors(u);
        if neighbors.is_empty() {
            continue;
        }
        let local: f64 = neighbors
            .iter()
            .map(|&v| match mode {
                SimilarityMode::Cosine => cosine(ds.features.row(u), ds.features.row(v)),
                SimilarityMode::Euclidean => {
                    -euclidean_distance(ds.features.row(u), ds.features.row(v))
                }
            })
            .sum();
        sum += local / neighbors.len() as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Degenerate("all nodes are isolated".into()));
    }
    Ok(sum / count as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttributeHomophilyReport {
    /// Mean over valid feature columns.
    pub value: f64,
    /// Per-column value; `None` for skipped (zero-sum) columns.
    pub per_feature: Vec<Option<f64>>,
    /// Columns min-shifted to non-negative before evaluation.
    pub shifted_columns: Vec<usize>,
    /// Columns skipped because their shifted sum is zero.
    pub skipped_columns: Vec<usize>,
}

/// Per-feature neighbor-mean weighting: each column is min-shifted to
/// non-negative if needed, zero-sum columns are skipped, and the result is
/// the mean over valid columns. Isolated nodes are excluded.
pub fn attribute_homophily(ds: &Dataset) -> Result<AttributeHomophilyReport> {
    let n = ds.num_nodes();
    let m = ds.features.cols();
    let active: Vec<usize> = (0..n).filter(|&u| ds.graph.degree(u) > 0).collect();
    if active.is_empty() {
        return Err(Error::Degenerate("all nodes are isolated".into()));
    }

    let mut per_feature = vec![None; m];
    let mut shifted_columns = Vec::new();
    let mut skipped_columns = Vec::new();
    let mut column = vec![0.0; n];
    for feature in 0..m {
        for u in 0..n {
            column[u] = ds.features.get(u, feature);
        }
        let min = column.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            for v in &mut column {
                *v -= min;
            }
            shifted_columns.push(feature);
        }
        let total: f64 = active.iter().map(|&u| column[u]).sum();
        if total == 0.0 {
            skipped_columns.push(feature);
            continue;
        }
        let weighted: f64 = active
            .iter()
            .map(|&u| {
                let neighbors = ds.graph.neighbors(u);
                let mean: f64 =
                    neighbors.iter().map(|&v| column[v]).sum::<f64>() / neighbors.len() as f64;
                column[u] * mean
            })
            .sum();
        per_feature[feature] = Some(weighted / total);
    }

    let valid: Vec<f64> = per_feature.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(Error::Degenerate("every feature column is zero-sum".into()));
    }
    Ok(AttributeHomophilyReport {
        value: valid.iter().sum::<f64>() / valid.len() as f64,
        per_feature,
        shifted_columns,
        skipped_columns,
    })
}

/// Class-controlled feature homophily: distances on class-mean-centered
/// features, comparing each neighbor's mean distance to a reference set
/// against its distance to the node itself. Exact (reference = all nodes)
/// up to [`CLASS_CONTROLLED_EXACT_THRESHOLD`] nodes, seeded sampling above.
pub fn class_controlled_feature_homophily(
    ds: &Dataset,
    ref_sample: usize,
    seed: u64,
) -> Result<f64> {
    let n = ds.num_nodes();
    if n <= CLASS_CONTROLLED_EXACT_THRESHOLD {
        let reference: Vec<usize> = (0..n).collect();
        class_controlled_with_reference(ds, &reference)
    } else {
        class_controlled_feature_homophily_sampled(ds, ref_sample, seed)
    }
}

pub fn class_controlled_feature_homophily_sampled(
    ds: &Dataset,
    ref_sample: usize,
    seed: u64,
) -> Result<f64> {
    use rand::seq::SliceRandom;
    let n = ds.num_nodes();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut rng = rng::stream(seed, 0x6366);
    ids.shuffle(&mut rng);
    ids.truncate(ref_sample.min(n));
    ids.sort_unstable();
    class_controlled_with_reference(ds, &ids)
}

fn class_controlled_with_reference(ds: &Dataset, reference: &[usize]) -> Result<f64> {
    let n = ds.num_nodes();
    let m = ds.features.cols();
    let counts = ds.class_counts();
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Degenerate(format!("class {class} is empty")));
    }
    if reference.is_empty() {
        return Err(Error::InvalidInput("empty reference set".into()));
    }

    // Center features on their class means.
    let mut class_means = Matrix::zeros(ds.num_classes, m);
    for u in 0..n {
        let row = ds.features.row(u);
        let acc = class_means.row_mut(ds.labels[u]);
        for j in 0..m {
            acc[j] += row[j];
        }
    }
    for class in 0..ds.num_classes {
        let count = counts[class] as f64;
        for v in class_means.row_mut(class) {
            *v /= count;
        }
    }
    let mut centered = Matrix::zeros(n, m);
    for u in 0..n {
        let mean = class_means.row(ds.labels[u]);
        let row = ds.features.row(u);
        let dst = centered.row_mut(u);
        for j in 0..m {
            dst[j] = row[j] - mean[j];
        }
    }

    let in_reference = {
        let mut mask = vec![false; n];
        for &w in reference {
            mask[w] = true;
        }
        mask
    };
    // Total distance from each node to the reference set.
    let total_distance: Vec<f64> = (0..n)
        .map(|v| {
            reference
                .iter()
                .map(|&w| euclidean_distance(centered.row(v), centered.row(w)))
                .sum()
        })
        .collect();

    let mut sum = 0.0;
    let mut active = 0usize;
    for u in 0..n {
        let neighbors = ds.graph.neighbors(u);
        if neighbors.is_empty() {
            continue;
        }
        let mut node_term = 0.0;
        for &v in neighbors {
            let to_u = euclidean_distance(centered.row(v), centered.row(u));
            let (total, count) = if in_reference[u] {
                (total_distance[v] - to_u, reference.len() - 1)
            } else {
                (total_distance[v], reference.len())
            };
            if count == 0 {
                continue;
            }
            node_term += total / count as f64 - to_u;
        }
        sum += node_term / neighbors.len() as f64;
        active += 1;
    }
    if active == 0 {
        return Err(Error::Degenerate("all nodes are isolated".into()));
    }
    Ok(sum / active as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn dataset(
        n: usize,
        edges: &[(usize, usize)],
        labels: Vec<usize>,
        c: usize,
        features: Matrix,
    ) -> Dataset {
        let graph = Graph::from_edges(n, edges).unwrap();
        Dataset::new(graph, labels, c, features).unwrap()
    }

    #[test]
    fn constant_feature_column_is_degenerate() {
        let features = Matrix::from_rows(&[vec![2.0], vec![2.0], vec![2.0], vec![2.0]]).unwrap();
        let ds = dataset(
            4,
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
            vec![0, 0, 1, 1],
            2,
            features,
        );
        // Regular graph: A x is constant too, so intra-class differences of
        // A x vanish and the column is degenerate.
        let err = estimate_feature_homophily(&ds, 2.0);
        assert!(matches!(err, Err(Error::Degenerate(_))));
    }

    #[test]
    fn scaling_features_leaves_the_estimate_unchanged() {
        let features = Matrix::from_rows(&[
            vec![1.0, 0.3],
            vec![-0.5, 1.2],
            vec![0.2, -0.7],
            vec![2.0, 0.1],
            vec![-1.0, 0.4],
        ])
        .unwrap();
        let edges = [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)];
        let ds = dataset(5, &edges, vec![0, 0, 0, 1, 1], 2, features.clone());
        let base = estimate_feature_homophily(&ds, 2.5).unwrap();

        let scaled = Matrix::from_flat(
            5,
            2,
            features.data().iter().map(|v| v * 7.0).collect(),
        )
        .unwrap();
        let ds_scaled = dataset(5, &edges, vec![0, 0, 0, 1, 1], 2, scaled);
        let rescaled = estimate_feature_homophily(&ds_scaled, 2.5).unwrap();
        for (a, b) in base.per_feature.iter().zip(&rescaled.per_feature) {
            assert!((a.raw - b.raw).abs() < 1e-9);
        }
    }

    #[test]
    fn generalized_edge_homophily_extremes() {
        let same = Matrix::from_rows(&[vec![1.0, 2.0]; 3]).unwrap();
        let ds = dataset(3, &[(0, 1), (1, 2)], vec![0, 0, 1], 2, same);
        assert!((generalized_edge_homophily(&ds).unwrap() - 1.0).abs() < 1e-12);

        let antipodal =
            Matrix::from_rows(&[vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, 1.0]]).unwrap();
        let ds = dataset(3, &[(0, 1), (1, 2)], vec![0, 0, 1], 2, antipodal);
        assert!((generalized_edge_homophily(&ds).unwrap() + 1.0).abs() < 1e-12);

        let empty = dataset(2, &[], vec![0, 1], 2, Matrix::zeros(2, 1));
        assert!(matches!(
            generalized_edge_homophily(&empty),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn local_similarity_identical_rows() {
        let same = Matrix::from_rows(&[vec![1.0, 2.0]; 3]).unwrap();
        let ds = dataset(3, &[(0, 1), (1, 2)], vec![0, 0, 1], 2, same);
        assert!((local_similarity(&ds, SimilarityMode::Cosine).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(local_similarity(&ds, SimilarityMode::Euclidean).unwrap(), 0.0);
    }

    #[test]
    fn local_similarity_euclidean_is_never_positive() {
        let features = Matrix::from_rows(&[vec![0.0], vec![3.0], vec![-1.0]]).unwrap();
        let ds = dataset(3, &[(0, 1), (1, 2)], vec![0, 0, 1], 2, features);
        assert!(local_similarity(&ds, SimilarityMode::Euclidean).unwrap() <= 0.0);
    }

    #[test]
    fn attribute_homophily_constant_column_on_triangle() {
        let features = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let ds = dataset(3, &[(0, 1), (0, 2), (1, 2)], vec![0, 0, 1], 2, features);
        let report = attribute_homophily(&ds).unwrap();
        assert!((report.value - 1.0).abs() < 1e-12);
        assert!(report.shifted_columns.is_empty());
    }

    #[test]
    fn attribute_homophily_one_hot_indicator_on_intra_graph() {
        // Feature = class-0 indicator; every edge is intra-class, so each
        // positive node's neighbor mean is 1.
        let features =
            Matrix::from_rows(&[vec![1.0], vec![1.0], vec![0.0], vec![0.0]]).unwrap();
        let ds = dataset(4, &[(0, 1), (2, 3)], vec![0, 0, 1, 1], 2, features);
        let report = attribute_homophily(&ds).unwrap();
        assert!((report.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn attribute_homophily_records_shift_and_skip() {
        let features = Matrix::from_rows(&[
            vec![-1.0, 0.0],
            vec![2.0, 0.0],
            vec![0.5, 0.0],
        ])
        .unwrap();
        let ds = dataset(3, &[(0, 1), (1, 2)], vec![0, 0, 1], 2, features);
        let report = attribute_homophily(&ds).unwrap();
        assert_eq!(report.shifted_columns, vec![0]);
        assert_eq!(report.skipped_columns, vec![1]);
        assert!(report.per_feature[1].is_none());
    }

    #[test]
    fn class_controlled_vanishes_when_classes_are_tight() {
        let features = Matrix::from_rows(&[
            vec![3.0, 0.0],
            vec![3.0, 0.0],
            vec![-2.0, 1.0],
            vec![-2.0, 1.0],
        ])
        .unwrap();
        let ds = dataset(4, &[(0, 2), (1, 3), (0, 1)], vec![0, 0, 1, 1], 2, features);
        assert!(class_controlled_feature_homophily(&ds, 500, 0).unwrap().abs() < 1e-12);
    }
}
