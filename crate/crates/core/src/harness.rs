//! Desk-scale experiment harness: node splits, a nearest-class-centroid
//! classifier over raw or neighbor-aggregated representations, and the
//! homophily sweep driver.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csbm::{self, Csbm3hParams, DiffusionPower};
use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::metrics::feature::estimate_feature_homophily;
use crate::metrics::label::node_homophily;
use crate::metrics::structural::structural_homophily;
use crate::rng;
use crate::trihom::{
    aggregate_representations, empirical_j, j_h_agnostic, j_h_aware, RepresentationMode,
    TriHomPoint,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Seeded uniform shuffle followed by a contiguous cut at the rounded
/// train/val sizes; the remainder is the test part.
pub fn make_split(num_nodes: usize, ratios: (f64, f64, f64), seed: u64) -> Result<Split> {
    let (r_train, r_val, r_test) = ratios;
    if r_train <= 0.0 || r_val <= 0.0 || r_test <= 0.0 {
        return Err(Error::InvalidInput("split ratios must be positive".into()));
    }
    if (r_train + r_val + r_test - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("split ratios must sum to 1".into()));
    }
    let mut ids: Vec<usize> = (0..num_nodes).collect();
    let mut rng = rng::stream(seed, 0x7370);
    ids.shuffle(&mut rng);

    let n_train = (num_nodes as f64 * r_train).round() as usize;
    let n_val = (num_nodes as f64 * r_val).round() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= num_nodes {
        return Err(Error::TooFewNodes);
    }
    let val_end = n_train + n_val;
    Ok(Split {
        train: ids[..n_train].to_vec(),
        val: ids[n_train..val_end].to_vec(),
        test: ids[val_end..].to_vec(),
        seed,
    })
}

/// Nearest-centroid accuracy: per-class means over the train part, scored
/// on the test part (or the validation part when `score_validation`). Ties
/// break toward the lowest class id.
pub fn centroid_classify(
    representations: &Matrix,
    labels: &[usize],
    num_classes: usize,
    split: &Split,
    score_validation: bool,
) -> Result<f64> {
    let m = representations.cols();
    let mut centroids = Matrix::zeros(num_classes, m);
    let mut counts = vec![0usize; num_classes];
    for &u in &split.train {
        counts[labels[u]] += 1;
        let row = representations.row(u);
        let acc = centroids.row_mut(labels[u]);
        for j in 0..m {
            acc[j] += row[j];
        }
    }
    for class in 0..num_classes {
        if counts[class] == 0 {
            return Err(Error::MissingClass(class));
        }
        for value in centroids.row_mut(class) {
            *value /= counts[class] as f64;
        }
    }

    let eval = if score_validation { &split.val } else { &split.test };
    let mut correct = 0usize;
    for &u in eval {
        let row = representations.row(u);
        let mut best = 0usize;
        let mut best_distance = f64::INFINITY;
        for class in 0..num_classes {
            let distance = squared_distance(row, centroids.row(class));
            if distance < best_distance {
                best_distance = distance;
                best = class;
            }
        }
        if best == labels[u] {
            correct += 1;
        }
    }
    Ok(correct as f64 / eval.len() as f64)
}

/// Axes of the (h_L, h_S, h_F) sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepGrid {
    pub h_l: Vec<f64>,
    pub h_s: Vec<f64>,
    pub h_f: Vec<f64>,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.h_l.len() * self.h_s.len() * self.h_f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Generation and evaluation settings shared by every sweep point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepTemplate {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub degree_range: (usize, usize),
    pub feature_dim: usize,
    pub class_means: Matrix,
    pub class_vars: Matrix,
    pub diffusion_power: DiffusionPower,
    pub diffusion_tol: f64,
    pub diffusion_max_terms: usize,
    pub spectral_tol: f64,
    pub spectral_max_iter: usize,
    pub split_ratios: (f64, f64, f64),
    pub score_validation: bool,
    /// Pair budget for sampled distinguishability estimates.
    pub max_pairs: usize,
}

impl SweepTemplate {
    fn params(&self, h_l: f64, h_s: f64, h_f: f64, seed: u64) -> Csbm3hParams {
        Csbm3hParams {
            h_l,
            h_s,
            h_f,
            num_nodes: self.num_nodes,
            num_classes: self.num_classes,
            degree_range: self.degree_range,
            feature_dim: self.feature_dim,
            class_means: self.class_means.clone(),
            class_vars: self.class_vars.clone(),
            seed,
            diffusion_power: self.diffusion_power,
            diffusion_tol: self.diffusion_tol,
            diffusion_max_terms: self.diffusion_max_terms,
            spectral_tol: self.spectral_tol,
            spectral_max_iter: self.spectral_max_iter,
        }
    }
}

/// One generated-graph evaluation. Measured fields are `None` when the
/// underlying estimate was degenerate; `flags` records why.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub h_l_target: f64,
    pub h_s_target: f64,
    pub h_f_target: f64,
    pub seed: u64,
    pub h_l_measured: Option<f64>,
    pub h_s_measured: Option<f64>,
    pub h_f_measured: Option<f64>,
    pub rho: Option<f64>,
    pub j_emp_aware: Option<f64>,
    pub j_emp_agnostic: Option<f64>,
    /// Analytic factors at the measured homophily point.
    pub jh_theory_aware: Option<f64>,
    pub jh_theory_agnostic: Option<f64>,
    /// Analytic factors at the target homophily point.
    pub jh_target_aware: Option<f64>,
    pub jh_target_agnostic: Option<f64>,
    pub acc_aware: Option<f64>,
    pub acc_agnostic: Option<f64>,
    pub flags: Vec<String>,
}

fn evaluate_point(
    template: &SweepTemplate,
    h_l: f64,
    h_s: f64,
    h_f: f64,
    seed: u64,
    point_index: u64,
) -> SweepRecord {
    let base = rng::mix(seed, point_index);
    let mut record = SweepRecord {
        h_l_target: h_l,
        h_s_target: h_s,
        h_f_target: h_f,
        seed,
        h_l_measured: None,
        h_s_measured: None,
        h_f_measured: None,
        rho: None,
        j_emp_aware: None,
        j_emp_agnostic: None,
        jh_theory_aware: None,
        jh_theory_agnostic: None,
        jh_target_aware: None,
        jh_target_agnostic: None,
        acc_aware: None,
        acc_agnostic: None,
        flags: Vec::new(),
    };

    let params = template.params(h_l, h_s, h_f, base);
    let generated = match csbm::generate(&params) {
        Ok(g) => g,
        Err(e) => {
            record.flags.push(format!("generate: {e}"));
            return record;
        }
    };
    let ds = &generated.dataset;
    let rho = generated.rho_used;
    record.rho = Some(rho);

    let mut note = |field: &str, err: Error| {
        record.flags.push(format!("{field}: {err}"));
    };
    match node_homophily(ds) {
        Ok(v) => record.h_l_measured = Some(v),
        Err(e) => note("h_l_measured", e),
    }
    match structural_homophily(ds) {
        Ok(r) => record.h_s_measured = Some(r.value),
        Err(e) => note("h_s_measured", e),
    }
    match estimate_feature_homophily(ds, rho) {
        Ok(e) => record.h_f_measured = Some(e.h_f),
        Err(e) => note("h_f_measured", e),
    }
    match empirical_j(ds, RepresentationMode::Aware, template.max_pairs, rng::mix(base, 2)) {
        Ok(v) => record.j_emp_aware = Some(v),
        Err(e) => note("j_emp_aware", e),
    }
    match empirical_j(
        ds,
        RepresentationMode::Agnostic,
        template.max_pairs,
        rng::mix(base, 3),
    ) {
        Ok(v) => record.j_emp_agnostic = Some(v),
        Err(e) => note("j_emp_agnostic", e),
    }

    if let (Some(l), Some(s), Some(f)) =
        (record.h_l_measured, record.h_s_measured, record.h_f_measured)
    {
        let point = TriHomPoint::clamped(l, s, f, template.num_classes, rho);
        record.jh_theory_aware = Some(j_h_aware(&point));
        record.jh_theory_agnostic = Some(j_h_agnostic(&point));
    }
    let target = TriHomPoint::clamped(h_l, h_s, h_f, template.num_classes, rho);
    record.jh_target_aware = Some(j_h_aware(&target));
    record.jh_target_agnostic = Some(j_h_agnostic(&target));

    match make_split(ds.num_nodes(), template.split_ratios, rng::mix(base, 1)) {
        Ok(split) => {
            let (aggregated, _) = aggregate_representations(ds);
            match centroid_classify(
                &aggregated,
                &ds.labels,
                ds.num_classes,
                &split,
                template.score_validation,
            ) {
                Ok(v) => record.acc_aware = Some(v),
                Err(e) => note("acc_aware", e),
            }
            match centroid_classify(
                &ds.features,
                &ds.labels,
                ds.num_classes,
                &split,
                template.score_validation,
            ) {
                Ok(v) => record.acc_agnostic = Some(v),
                Err(e) => note("acc_agnostic", e),
            }
        }
        Err(e) => note("split", e),
    }
    record
}

/// Evaluate every (h_L, h_S, h_F, seed) tuple. Grid points run in parallel;
/// each owns a PRNG stream derived from (seed, grid index), so the record
/// list is deterministic and ordered by grid index, then seed.
pub fn run_sweep(grid: &SweepGrid, template: &SweepTemplate, seeds: &[u64]) -> Vec<SweepRecord> {
    let mut jobs = Vec::with_capacity(grid.len() * seeds.len());
    let mut point_index = 0u64;
    for &h_l in &grid.h_l {
        for &h_s in &grid.h_s {
            for &h_f in &grid.h_f {
                for &seed in seeds {
                    jobs.push((h_l, h_s, h_f, seed, point_index));
                }
                point_index += 1;
            }
        }
    }
    jobs.into_par_iter()
        .map(|(h_l, h_s, h_f, seed, index)| {
            evaluate_point(template, h_l, h_s, h_f, seed, index)
        })
        .collect()
}
