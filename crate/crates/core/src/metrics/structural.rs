//! Structural-aspect metrics: dispersion of same-class neighbor
//! distributions, label informativeness, neighborhood similarity, and
//! aggregation homophily.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dataset;
use crate::matrix::{cosine, Matrix};
use crate::rng;
use crate::sampling::PairSampler;
use crate::PAIRWISE_EXACT_THRESHOLD;

/// Tie tolerance for aggregation-similarity comparisons. Exact float
/// equality would let summation rounding flip genuine ties.
pub(crate) const AGGREGATION_TIE_EPS: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructuralHomophily {
    pub value: f64,
    /// Per-class values; `None` for classes with fewer than two
    /// non-isolated nodes (skipped).
    pub per_class: Vec<Option<f64>>,
}

/// Structural homophily from neighbor distributions: per class, one minus
/// the RMS per-entry standard deviation scaled by sigma_max = 1/sqrt(C-1),
/// clamped to [0,1]; averaged over qualifying classes.
pub fn structural_homophily(ds: &Dataset) -> Result<StructuralHomophily> {
    let nd = ds.neighbor_distribution();
    structural_homophily_from_rows(&nd.rows, &nd.isolated, &ds.labels, ds.num_classes)
}

/// Same estimator applied to externally supplied distribution rows.
pub fn structural_homophily_from_rows(
    rows: &Matrix,
    isolated: &[bool],
    labels: &[usize],
    num_classes: usize,
) -> Result<StructuralHomophily> {
    if num_classes < 2 {
        return Err(Error::InvalidInput("at least 2 classes required".into()));
    }
    let sigma_max = 1.0 / ((num_classes - 1) as f64).sqrt();
    let mut per_class = vec![None; num_classes];
    for class in 0..num_classes {
        let members: Vec<usize> = (0..labels.len())
            .filter(|&u| labels[u] == class && !isolated[u])
            .collect();
        if members.len() < 2 {
            continue;
        }
        let n = members.len() as f64;
        let mut variance_sum = 0.0;
        for entry in 0..num_classes {
            let mean = members.iter().map(|&u| rows.get(u, entry)).sum::<f64>() / n;
            let ss: f64 = members
                .iter()
                .map(|&u| {
                    let d = rows.get(u, entry) - mean;
                    d * d
                })
                .sum();
            variance_sum += ss / (n - 1.0);
        }
        let sigma = (variance_sum / num_classes as f64).sqrt();
        per_class[class] = Some((1.0 - sigma / sigma_max).clamp(0.0, 1.0));
    }
    let included: Vec<f64> = per_class.iter().flatten().copied().collect();
    if included.is_empty() {
        return Err(Error::Degenerate(
            "no class has two non-isolated nodes".into(),
        ));
    }
    let value = included.iter().sum::<f64>() / included.len() as f64;
    Ok(StructuralHomophily { value, per_class })
}

/// Label informativeness from the edge-endpoint class distribution. The
/// default weights each log term by its cell probability; the literal form
/// sums the bare logs. Zero-probability cells are skipped.
pub fn label_informativeness(ds: &Dataset, literal: bool) -> Result<f64> {
    let total_arcs = 2.0 * ds.graph.num_edges() as f64;
    if ds.graph.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let c = ds.num_classes;
    let mut pair_counts = vec![vec![0u64; c]; c];
    for (u, v) in ds.graph.edges() {
        pair_counts[ds.labels[u]][ds.labels[v]] += 1;
        pair_counts[ds.labels[v]][ds.labels[u]] += 1;
    }
    let mut class_degree = vec![0.0f64; c];
    for u in 0..ds.num_nodes() {
        class_degree[ds.labels[u]] += ds.graph.degree(u) as f64;
    }

    let denominator: f64 = class_degree
        .iter()
        .map(|&d| d / total_arcs)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum();
    if denominator == 0.0 {
        return Err(Error::Degenerate(
            "label informativeness undefined: single class".into(),
        ));
    }

    let mut numerator = 0.0;
    for row in &pair_counts {
        for &count in row {
            if count == 0 {
                continue;
            }
            let p = count as f64 / total_arcs;
            numerator += if literal { p.ln() } else { p * p.ln() };
        }
    }
    Ok(2.0 - numerator / denominator)
}

/// Ratio of expected intra-class to inter-class cosine similarity between
/// neighbor-distribution rows. Exact over all pairs up to
/// [`PAIRWISE_EXACT_THRESHOLD`] nodes, seeded pair sampling above.
pub fn neighborhood_similarity(ds: &Dataset, max_pairs: usize, seed: u64) -> Result<f64> {
    if ds.num_nodes() <= PAIRWISE_EXACT_THRESHOLD {
        neighborhood_similarity_exact(ds)
    } else {
        neighborhood_similarity_sampled(ds, max_pairs, seed)
    }
}

fn ratio(intra_sum: f64, intra_n: u64, inter_sum: f64, inter_n: u64) -> Result<f64> {
    if intra_n == 0 || inter_n == 0 {
        return Err(Error::Degenerate(
            "need at least one intra-class and one inter-class pair".into(),
        ));
    }
    let intra = intra_sum / intra_n as f64;
    let inter = inter_sum / inter_n as f64;
    if inter == 0.0 {
        return Err(Error::Degenerate(
            "inter-class expectation is zero".into(),
        ));
    }
    Ok(intra / inter)
}

pub fn neighborhood_similarity_exact(ds: &Dataset) -> Result<f64> {
    let nd = ds.neighbor_distribution();
    let valid: Vec<usize> = (0..ds.num_nodes()).filter(|&u| !nd.isolated[u]).collect();
    let mut intra = (0.0, 0u64);
    let mut inter = (0.0, 0u64);
    for (i, &u) in valid.iter().enumerate() {
        for &v in &valid[i + 1..] {
            let value = cosine(nd.rows.row(u), nd.rows.row(v));
            if ds.labels[u] == ds.labels[v] {
                intra.0 += value;
                intra.1 += 1;
            } else {
                inter.0 += value;
                inter.1 += 1;
            }
        }
    }
    ratio(intra.0, intra.1, inter.0, inter.1)
}

pub fn neighborhood_similarity_sampled(
    ds: &Dataset,
    max_pairs: usize,
    seed: u64,
) -> Result<f64> {
    let nd = ds.neighbor_distribution();
    let sampler = PairSampler::new(&ds.labels, ds.num_classes, |u| !nd.isolated[u]);
    if !sampler.has_intra_pairs() || !sampler.has_inter_pairs() {
        return Err(Error::Degenerate(
            "need at least one intra-class and one inter-class pair".into(),
        ));
    }
    let mut rng = rng::stream(seed, 0x6e73);
    let mut intra_sum = 0.0;
    for _ in 0..max_pairs {
        let (u, v) = sampler.sample_intra(&mut rng);
        intra_sum += cosine(nd.rows.row(u), nd.rows.row(v));
    }
    let mut inter_sum = 0.0;
    for _ in 0..max_pairs {
        let (u, v) = sampler
            .sample_inter(&mut rng)
            .ok_or_else(|| Error::Degenerate("could not sample an inter-class pair".into()))?;
        inter_sum += cosine(nd.rows.row(u), nd.rows.row(v));
    }
    ratio(intra_sum, max_pairs as u64, inter_sum, max_pairs as u64)
}

/// Fraction of nodes whose mean aggregation similarity (dot product of
/// neighbor-distribution rows) to own-class nodes is at least the mean to
/// other-class nodes. The per-class row sums make each node O(C).
pub fn aggregation_homophily(ds: &Dataset) -> Result<f64> {
    let nd = ds.neighbor_distribution();
    let c = ds.num_classes;
    let n = ds.num_nodes();
    let mut class_sums = Matrix::zeros(c, c);
    let mut class_counts = vec![0usize; c];
    let mut total_sum = vec![0.0; c];
    for u in 0..n {
        let cu = ds.labels[u];
        class_counts[cu] += 1;
        let row = nd.rows.row(u);
        let acc = class_sums.row_mut(cu);
        for j in 0..c {
            acc[j] += row[j];
            total_sum[j] += row[j];
        }
    }

    let mut satisfied = 0usize;
    for u in 0..n {
        let cu = ds.labels[u];
        let row = nd.rows.row(u);
        let intra_count = class_counts[cu];
        let inter_count = n - intra_count;
        if inter_count == 0 {
            satisfied += 1;
            continue;
        }
        let intra_dot: f64 = (0..c).map(|j| row[j] * class_sums.get(cu, j)).sum();
        let inter_dot: f64 = (0..c)
            .map(|j| row[j] * (total_sum[j] - class_sums.get(cu, j)))
            .sum();
        let intra_mean = intra_dot / intra_count as f64;
        let inter_mean = inter_dot / inter_count as f64;
        if intra_mean - inter_mean >= -AGGREGATION_TIE_EPS {
            satisfied += 1;
        }
    }
    Ok(satisfied as f64 / n as f64)
}
