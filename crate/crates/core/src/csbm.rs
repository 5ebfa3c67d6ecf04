//! Synthetic graph generation with controlled label, structural, and
//! feature homophily, plus the feature-diffusion solver that turns
//! structural-agnostic draws into structural-aware features.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph};
use crate::matrix::Matrix;
use crate::rng;

/// Exponent applied to the diffusion operator (I - omega A)^{-1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffusionPower {
    One,
    Two,
}

impl Default for DiffusionPower {
    fn default() -> Self {
        DiffusionPower::One
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Csbm3hParams {
    pub h_l: f64,
    pub h_s: f64,
    pub h_f: f64,
    pub num_nodes: usize,
    pub num_classes: usize,
    /// Inclusive [d_min, d_max] bounds for per-node target degrees.
    pub degree_range: (usize, usize),
    pub feature_dim: usize,
    /// C x M class means of the structural-agnostic feature draws.
    pub class_means: Matrix,
    /// C x M per-feature variances (diagonal covariances).
    pub class_vars: Matrix,
    pub seed: u64,
    #[serde(default)]
    pub diffusion_power: DiffusionPower,
    #[serde(default = "default_diffusion_tol")]
    pub diffusion_tol: f64,
    #[serde(default = "default_diffusion_max_terms")]
    pub diffusion_max_terms: usize,
    #[serde(default = "default_spectral_tol")]
    pub spectral_tol: f64,
    #[serde(default = "default_spectral_max_iter")]
    pub spectral_max_iter: usize,
}

fn default_diffusion_tol() -> f64 {
    1e-10
}

fn default_diffusion_max_terms() -> usize {
    10_000
}

fn default_spectral_tol() -> f64 {
    1e-8
}

fn default_spectral_max_iter() -> usize {
    10_000
}

impl Csbm3hParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.h_l) {
            return Err(Error::InvalidInput(format!("h_l={} outside [0,1]", self.h_l)));
        }
        if !(0.0..=1.0).contains(&self.h_s) {
            return Err(Error::InvalidInput(format!("h_s={} outside [0,1]", self.h_s)));
        }
        if self.h_f.abs() >= 1.0 {
            return Err(Error::InvalidInput(format!("|h_f|={} must be < 1", self.h_f.abs())));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidInput("num_classes must be >= 2".into()));
        }
        if self.num_nodes < 2 {
            return Err(Error::InvalidInput("num_nodes must be >= 2".into()));
        }
        let (d_min, d_max) = self.degree_range;
        if d_min < 1 || d_min > d_max || d_max >= self.num_nodes {
            return Err(Error::InvalidInput(format!(
                "degree range [{d_min},{d_max}] invalid for {} nodes",
                self.num_nodes
            )));
        }
        let c = self.num_classes;
        let m = self.feature_dim;
        if self.class_means.rows() != c || self.class_means.cols() != m {
            return Err(Error::InvalidInput("class_means must be C x M".into()));
        }
        if self.class_vars.rows() != c || self.class_vars.cols() != m {
            return Err(Error::InvalidInput("class_vars must be C x M".into()));
        }
        if self.class_vars.data().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("class_vars must be non-negative".into()));
        }
        if self.diffusion_tol <= 0.0 || self.spectral_tol <= 0.0 {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Output of [`generate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratedGraph {
    pub dataset: Dataset,
    pub realized_degrees: Vec<usize>,
    /// Diffusion coefficient actually used: h_f / rho_used.
    pub omega: f64,
    pub rho_used: f64,
}

fn base_row(h_l: f64, num_classes: usize, class: usize) -> Vec<f64> {
    let off = (1.0 - h_l) / (num_classes - 1) as f64;
    (0..num_classes)
        .map(|c| if c == class { h_l } else { off })
        .collect()
}

/// Add per-entry sampling noise to a class-probability row, then project
/// back onto a legal distribution (clamp to [0,1], renormalize). A row that
/// clamps to all-zero falls back to uniform.
fn sample_legal_row<R: Rng>(base: &[f64], noise_std: f64, rng: &mut R) -> Vec<f64> {
    let mut row: Vec<f64> = base
        .iter()
        .map(|&p| {
            let noise = if noise_std > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                noise_std * z
            } else {
                0.0
            };
            (p + noise).clamp(0.0, 1.0)
        })
        .collect();
    let sum: f64 = row.iter().sum();
    if sum > 0.0 {
        for p in &mut row {
            *p /= sum;
        }
    } else {
        row.fill(1.0 / base.len() as f64);
    }
    row
}

/// Class-sampling matrix: diagonal h_L, off-diagonal (1-h_L)/(C-1), plus
/// per-entry Gaussian noise with variance (1-h_S)^2/(C-1), rows projected
/// onto legal distributions.
pub fn class_sampling_matrix<R: Rng>(
    h_l: f64,
    h_s: f64,
    num_classes: usize,
    rng: &mut R,
) -> Matrix {
    let noise_std = (1.0 - h_s) / ((num_classes - 1) as f64).sqrt();
    let mut out = Matrix::zeros(num_classes, num_classes);
    for class in 0..num_classes {
        let row = sample_legal_row(&base_row(h_l, num_classes, class), noise_std, rng);
        out.row_mut(class).copy_from_slice(&row);
    }
    out
}

/// Sample labels, target degrees, per-node neighbor distributions, and the
/// adjacency. Returns the graph, labels, and the per-node target rows.
pub fn generate_topology<R: Rng>(
    params: &Csbm3hParams,
    rng: &mut R,
) -> Result<(Graph, Vec<usize>, Matrix)> {
    let n = params.num_nodes;
    let c = params.num_classes;
    let (d_min, d_max) = params.degree_range;

    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    let target_degrees: Vec<usize> = (0..n).map(|_| rng.random_range(d_min..=d_max)).collect();

    let noise_std = (1.0 - params.h_s) / ((c - 1) as f64).sqrt();
    let mut rows = Matrix::zeros(n, c);
    for u in 0..n {
        let row = sample_legal_row(&base_row(params.h_l, c, labels[u]), noise_std, rng);
        rows.row_mut(u).copy_from_slice(&row);
    }

    // Edge probability toward v from u's side: (C/N) sqrt(d_u d_v) D[u][Y_v],
    // bounded to [0,1]; the realized probability averages both sides.
    let scale = c as f64 / n as f64;
    let sqrt_d: Vec<f64> = target_degrees.iter().map(|&d| (d as f64).sqrt()).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        let row_u = rows.row(u);
        for v in (u + 1)..n {
            let p_uv = (scale * sqrt_d[u] * sqrt_d[v] * row_u[labels[v]]).clamp(0.0, 1.0);
            let p_vu = (scale * sqrt_d[v] * sqrt_d[u] * rows.get(v, labels[u])).clamp(0.0, 1.0);
            let p = 0.5 * (p_uv + p_vu);
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    if edges.is_empty() {
        return Err(Error::DegenerateGraph);
    }
    let graph = Graph::from_edges(n, &edges)?;
    Ok((graph, labels, rows))
}

/// Draw each node's structural-agnostic feature row from its class Gaussian
/// with diagonal covariance.
pub fn sample_structural_agnostic_features<R: Rng>(
    labels: &[usize],
    class_means: &Matrix,
    class_vars: &Matrix,
    rng: &mut R,
) -> Matrix {
    let n = labels.len();
    let m = class_means.cols();
    let mut out = Matrix::zeros(n, m);
    for (u, &y) in labels.iter().enumerate() {
        let means = class_means.row(y);
        let vars = class_vars.row(y);
        let row = out.row_mut(u);
        for j in 0..m {
            row[j] = if vars[j] > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                means[j] + vars[j].sqrt() * z
            } else {
                means[j]
            };
        }
    }
    out
}

/// Solve X = (I - omega A)^{-1} X0 by the Neumann series, truncated once the
/// next term's max-norm drops to `tol`. Stopping before adding that term
/// makes the residual ||(I - omega A) X - X0||_inf equal the tested norm, so
/// the tolerance bound holds exactly.
pub fn solve_feature_diffusion(
    graph: &Graph,
    omega: f64,
    x0: &Matrix,
    tol: f64,
    max_terms: usize,
) -> Result<Matrix> {
    let n = graph.num_nodes();
    if x0.rows() != n {
        return Err(Error::InvalidInput(format!(
            "{} feature rows for {n} nodes",
            x0.rows()
        )));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    if omega == 0.0 {
        return Ok(x0.clone());
    }

    let m = x0.cols();
    let mut sum = x0.clone();
    let mut term = x0.clone();
    let mut next = Matrix::zeros(n, m);
    for _ in 0..max_terms {
        for u in 0..n {
            let row = next.row_mut(u);
            row.fill(0.0);
            for &v in graph.neighbors(u) {
                let src = term.row(v);
                for j in 0..m {
                    row[j] += src[j];
                }
            }
            for value in row.iter_mut() {
                *value *= omega;
            }
        }
        if next.max_abs() <= tol {
            return Ok(sum);
        }
        for u in 0..n {
            let dst = sum.row_mut(u);
            let src = next.row(u);
            for j in 0..m {
                dst[j] += src[j];
            }
        }
        std::mem::swap(&mut term, &mut next);
    }
    Err(Error::NonConvergence { iterations: max_terms })
}

/// Full pipeline: topology, spectral radius, omega = h_F / rho, feature
/// draw, diffusion. Deterministic given the params seed.
pub fn generate(params: &Csbm3hParams) -> Result<GeneratedGraph> {
    params.validate()?;
    let mut rng = rng::stream(params.seed, 0);
    let (graph, labels, _rows) = generate_topology(params, &mut rng)?;
    let rho = graph.spectral_radius(params.spectral_tol, params.spectral_max_iter)?;
    let omega = params.h_f / rho;
    let x0 = sample_structural_agnostic_features(
        &labels,
        &params.class_means,
        &params.class_vars,
        &mut rng,
    );
    let passes = match params.diffusion_power {
        DiffusionPower::One => 1,
        DiffusionPower::Two => 2,
    };
    let mut features = x0;
    for _ in 0..passes {
        features = solve_feature_diffusion(
            &graph,
            omega,
            &features,
            params.diffusion_tol,
            params.diffusion_max_terms,
        )?;
    }
    let realized_degrees = graph.degrees();
    let dataset = Dataset::new(graph, labels, params.num_classes, features)?;
    Ok(GeneratedGraph {
        dataset,
        realized_degrees,
        omega,
        rho_used: rho,
    })
}
