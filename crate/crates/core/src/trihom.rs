//! Analytic node-distinguishability factors for graph-aware and
//! graph-agnostic models, their critical points, the empirical
//! distinguishability ratio measured on datasets, and the numerical
//! verifier for the predicted derivative signs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dataset;
use crate::matrix::{squared_distance, Matrix};
use crate::rng;
use crate::sampling::PairSampler;
use crate::PAIRWISE_EXACT_THRESHOLD;

/// Point in homophily space at which the analytic factors are evaluated.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TriHomPoint {
    pub h_l: f64,
    pub h_s: f64,
    pub h_f: f64,
    pub num_classes: usize,
    pub rho: f64,
}

impl TriHomPoint {
    pub fn new(h_l: f64, h_s: f64, h_f: f64, num_classes: usize, rho: f64) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidInput("at least 2 classes required".into()));
        }
        if !(0.0..=1.0).contains(&h_l) || !(0.0..=1.0).contains(&h_s) {
            return Err(Error::InvalidInput("h_l and h_s must lie in [0,1]".into()));
        }
        if h_f.abs() >= 1.0 {
            return Err(Error::InvalidInput("|h_f| must be < 1".into()));
        }
        if rho <= 0.0 {
            return Err(Error::InvalidInput("rho must be positive".into()));
        }
        let point = Self { h_l, h_s, h_f, num_classes, rho };
        if (1.0 - (h_f / rho) * p0(h_l, num_classes)).abs() < 1e-12 {
            return Err(Error::Degenerate("factor denominator vanishes".into()));
        }
        Ok(point)
    }

    /// Clamp measured values into the valid domain. Useful when estimators
    /// return values on the closed boundary.
    pub fn clamped(h_l: f64, h_s: f64, h_f: f64, num_classes: usize, rho: f64) -> Self {
        Self {
            h_l: h_l.clamp(0.0, 1.0),
            h_s: h_s.clamp(0.0, 1.0),
            h_f: h_f.clamp(-1.0 + 1e-9, 1.0 - 1e-9),
            num_classes,
            rho: rho.max(f64::MIN_POSITIVE),
        }
    }
}

/// Diagonal excess of the class-sampling matrix.
fn p0(h_l: f64, num_classes: usize) -> f64 {
    (h_l * num_classes as f64 - 1.0) / (num_classes as f64 - 1.0)
}

/// C * E[p1^2] + p0^2: the homophily-mixing energy appearing in every
/// denominator.
fn mixing_energy(h_l: f64, h_s: f64, num_classes: usize) -> f64 {
    let c = num_classes as f64;
    let off = (1.0 - h_l) / (c - 1.0);
    let noise = (1.0 - h_s) * (1.0 - h_s) / (c - 1.0);
    c * (off * off + noise) + p0(h_l, num_classes) * p0(h_l, num_classes)
}

fn j_agnostic_raw(h_l: f64, h_s: f64, h_f: f64, num_classes: usize, rho: f64) -> f64 {
    let w = h_f / rho;
    let denom = 1.0 - w * p0(h_l, num_classes);
    (1.0 - w * w * mixing_energy(h_l, h_s, num_classes)) / (denom * denom)
}

fn j_aware_raw(h_l: f64, h_s: f64, h_f: f64, num_classes: usize, rho: f64) -> f64 {
    let p = p0(h_l, num_classes);
    (p * p / mixing_energy(h_l, h_s, num_classes))
        * j_agnostic_raw(h_l, h_s, h_f, num_classes, rho)
}

/// Homophily factor of the distinguishability ratio for graph-agnostic
/// models. Equals 1 exactly at h_F = 0.
pub fn j_h_agnostic(p: &TriHomPoint) -> f64 {
    j_agnostic_raw(p.h_l, p.h_s, p.h_f, p.num_classes, p.rho)
}

/// Homophily factor for graph-aware models. Vanishes exactly at h_L = 1/C.
pub fn j_h_aware(p: &TriHomPoint) -> f64 {
    j_aware_raw(p.h_l, p.h_s, p.h_f, p.num_classes, p.rho)
}

/// Large-rho limit of [`j_h_aware`]: p0^2 over the mixing energy.
pub fn j_h_aware_approx(h_l: f64, h_s: f64, num_classes: usize) -> f64 {
    let p = p0(h_l, num_classes);
    p * p / mixing_energy(h_l, h_s, num_classes)
}

/// Class-Gaussian feature specification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianSpec {
    /// C x M class means.
    pub means: Matrix,
    /// C x M per-feature variances.
    pub variances: Matrix,
}

/// Normalized mean-separation term: the ordered-pair average of squared
/// mean distances over 2C(C-1), divided by |sigma^2|/C.
pub fn j_n(spec: &GaussianSpec) -> Result<f64> {
    let c = spec.means.rows();
    if c < 2 {
        return Err(Error::InvalidInput("at least 2 classes required".into()));
    }
    let total_variance: f64 = spec.variances.data().iter().sum();
    if total_variance <= 0.0 {
        return Err(Error::Degenerate("total variance must be positive".into()));
    }
    let mut separation = 0.0;
    for a in 0..c {
        for b in 0..c {
            if a != b {
                separation += squared_distance(spec.means.row(a), spec.means.row(b));
            }
        }
    }
    let c = c as f64;
    Ok(separation / (2.0 * c * (c - 1.0)) / (total_variance / c))
}

/// Distinguishability ratio (1 + J_N * J_h)^{-1}.
pub fn j_total(jn: f64, jh: f64) -> Result<f64> {
    let denom = 1.0 + jn * jh;
    if denom.abs() < 1e-15 {
        return Err(Error::Degenerate("1 + J_N * J_h vanishes".into()));
    }
    Ok(1.0 / denom)
}

/// Feature-homophily value at which the derivative of the factors with
/// respect to h_F changes sign. Deliberately unclipped: values outside
/// (-1,1) mark the single-sign regimes.
pub fn critical_feature_homophily(h_l: f64, h_s: f64, num_classes: usize, rho: f64) -> f64 {
    p0(h_l, num_classes) * rho / mixing_energy(h_l, h_s, num_classes)
}

/// Label-homophily bounds where the critical feature homophily crosses -1
/// (lower) and +1 (upper). A bound is `None` when its discriminant is
/// negative.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LabelBounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

pub fn critical_label_bounds(h_s: f64, num_classes: usize, rho: f64) -> LabelBounds {
    let c = num_classes as f64;
    let noise = c * (c - 1.0) * (1.0 - h_s) * (1.0 - h_s);

    let b_plus = 4.0 * c + c * (c - 1.0) * rho;
    let disc_plus = b_plus * b_plus
        - 4.0 * c * (c + 1.0) * (c + 1.0 + (c - 1.0) * rho + noise);
    let upper = (disc_plus >= 0.0)
        .then(|| (b_plus - disc_plus.sqrt()) / (2.0 * c * (c + 1.0)));

    let b_minus = 4.0 * c - c * (c - 1.0) * rho;
    let disc_minus = b_minus * b_minus
        - 4.0 * c * (c + 1.0) * (c + 1.0 - (c - 1.0) * rho + noise);
    let lower = (disc_minus >= 0.0)
        .then(|| (b_minus + disc_minus.sqrt()) / (2.0 * c * (c + 1.0)));

    LabelBounds { lower, upper }
}

/// Neighbor-mean representations: H_u averages the feature rows of u's
/// neighbors; isolated nodes fall back to their own features and are
/// flagged.
pub fn aggregate_representations(ds: &Dataset) -> (Matrix, Vec<bool>) {
    let n = ds.num_nodes();
    let m = ds.features.cols();
    let mut out = Matrix::zeros(n, m);
    let mut fallback = vec![false; n];
    for u in 0..n {
        let neighbors = ds.graph.neighbors(u);
        let row = out.row_mut(u);
        if neighbors.is_empty() {
            row.copy_from_slice(ds.features.row(u));
            fallback[u] = true;
            continue;
        }
        for &v in neighbors {
            let src = ds.features.row(v);
            for j in 0..m {
                row[j] += src[j];
            }
        }
        for value in row.iter_mut() {
            *value /= neighbors.len() as f64;
        }
    }
    (out, fallback)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepresentationMode {
    /// Neighbor-aggregated representations.
    Aware,
    /// Raw features.
    Agnostic,
}

/// Empirical distinguishability: mean intra-class squared distance over
/// mean inter-class squared distance of the chosen representations. Exact
/// over all pairs up to [`PAIRWISE_EXACT_THRESHOLD`] nodes, seeded pair
/// sampling above.
pub fn empirical_j(
    ds: &Dataset,
    mode: RepresentationMode,
    max_pairs: usize,
    seed: u64,
) -> Result<f64> {
    if ds.num_nodes() <= PAIRWISE_EXACT_THRESHOLD {
        empirical_j_exact(ds, mode)
    } else {
        empirical_j_sampled(ds, mode, max_pairs, seed)
    }
}

fn representations(ds: &Dataset, mode: RepresentationMode) -> Matrix {
    match mode {
        RepresentationMode::Aware => aggregate_representations(ds).0,
        RepresentationMode::Agnostic => ds.features.clone(),
    }
}

fn distance_ratio(intra_sum: f64, intra_n: u64, inter_sum: f64, inter_n: u64) -> Result<f64> {
    if intra_n == 0 || inter_n == 0 {
        return Err(Error::Degenerate(
            "need at least one intra-class and one inter-class pair".into(),
        ));
    }
    let intra = intra_sum / intra_n as f64;
    let inter = inter_sum / inter_n as f64;
    if inter == 0.0 {
        return Err(Error::Degenerate("inter-class distance is zero".into()));
    }
    Ok(intra / inter)
}

pub fn empirical_j_exact(ds: &Dataset, mode: RepresentationMode) -> Result<f64> {
    let reprs = representations(ds, mode);
    let n = ds.num_nodes();
    let mut intra = (0.0, 0u64);
    let mut inter = (0.0, 0u64);
    for u in 0..n {
        for v in (u + 1)..n {
            let d = squared_distance(reprs.row(u), reprs.row(v));
            if ds.labels[u] == ds.labels[v] {
                intra.0 += d;
                intra.1 += 1;
            } else {
                inter.0 += d;
                inter.1 += 1;
            }
        }
    }
    distance_ratio(intra.0, intra.1, inter.0, inter.1)
}

pub fn empirical_j_sampled(
    ds: &Dataset,
    mode: RepresentationMode,
    max_pairs: usize,
    seed: u64,
) -> Result<f64> {
    let reprs = representations(ds, mode);
    let sampler = PairSampler::new(&ds.labels, ds.num_classes, |_| true);
    if !sampler.has_intra_pairs() || !sampler.has_inter_pairs() {
        return Err(Error::Degenerate(
            "need at least one intra-class and one inter-class pair".into(),
        ));
    }
    let salt = match mode {
        RepresentationMode::Aware => 0x6a61,
        RepresentationMode::Agnostic => 0x6a62,
    };
    let mut rng = rng::stream(seed, salt);
    let mut intra_sum = 0.0;
    for _ in 0..max_pairs {
        let (u, v) = sampler.sample_intra(&mut rng);
        intra_sum += squared_distance(reprs.row(u), reprs.row(v));
    }
    let mut inter_sum = 0.0;
    for _ in 0..max_pairs {
        let (u, v) = sampler
            .sample_inter(&mut rng)
            .ok_or_else(|| Error::Degenerate("could not sample an inter-class pair".into()))?;
        inter_sum += squared_distance(reprs.row(u), reprs.row(v));
    }
    distance_ratio(intra_sum, max_pairs as u64, inter_sum, max_pairs as u64)
}

/// Settings for [`verify_theorem_signs`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub num_classes: usize,
    /// Spectral radius used for the exact-form checks.
    pub rho: f64,
    /// Grid step of the 2-D approximate-form suite.
    pub approx_grid_step: f64,
    /// Grid step of the 3-D exact-form suite.
    pub exact_grid_step: f64,
    /// Central finite-difference step.
    pub fd_step: f64,
    /// Half-width of the bands skipped around critical surfaces.
    pub exclusion: f64,
    /// Magnitude below which a finite difference counts as zero.
    pub derivative_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            num_classes: 3,
            rho: 50.0,
            approx_grid_step: 0.01,
            exact_grid_step: 0.05,
            fd_step: 1e-5,
            exclusion: 0.02,
            derivative_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SignViolation {
    pub h_l: f64,
    pub h_s: f64,
    pub h_f: Option<f64>,
    /// Claimed sign: -1, 0 (meaning >= 0), or +1.
    pub expected: i8,
    pub derivative: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignCheck {
    pub name: String,
    pub checked: usize,
    pub skipped: usize,
    pub violations: Vec<SignViolation>,
}

impl SignCheck {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            skipped: 0,
            violations: Vec::new(),
        }
    }

    /// Record one derivative against its claimed sign. `expected` 0 claims
    /// non-negativity.
    fn record(&mut self, point: (f64, f64, Option<f64>), expected: i8, derivative: f64, tol: f64) {
        self.checked += 1;
        let violated = match expected {
            0 => derivative < -tol,
            1 => derivative < -tol,
            -1 => derivative > tol,
            _ => unreachable!(),
        };
        if violated {
            self.violations.push(SignViolation {
                h_l: point.0,
                h_s: point.1,
                h_f: point.2,
                expected,
                derivative,
            });
        }
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn violation_rate(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.violations.len() as f64 / self.checked as f64
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalCrossCheck {
    pub h_s: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// critical_feature_homophily evaluated at the lower bound; -1 expected.
    pub crit_at_lower: Option<f64>,
    /// critical_feature_homophily evaluated at the upper bound; +1 expected.
    pub crit_at_upper: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignReport {
    pub config: VerifyConfig,
    /// Approximate-form derivative in h_L follows sign(h_L - 1/C).
    pub approx_label_aware: SignCheck,
    /// Approximate-form derivative in h_S is non-negative.
    pub approx_structural_aware: SignCheck,
    /// Exact agnostic derivative in h_L follows sign(h_F).
    pub exact_label_agnostic: SignCheck,
    /// Exact derivatives in h_S are non-negative.
    pub exact_structural_aware: SignCheck,
    pub exact_structural_agnostic: SignCheck,
    /// Exact derivatives in h_F follow sign(critical h_F - h_F).
    pub exact_feature_aware: SignCheck,
    pub exact_feature_agnostic: SignCheck,
    pub critical_checks: Vec<CriticalCrossCheck>,
}

impl SignReport {
    /// Violations in the approximate-form suite, the pass/fail gate.
    pub fn approx_violations(&self) -> usize {
        self.approx_label_aware.violations.len() + self.approx_structural_aware.violations.len()
    }
}

fn unit_grid(step: f64) -> Vec<f64> {
    let count = (1.0 / step).round() as usize;
    (0..=count).map(|k| (k as f64 * step).min(1.0)).collect()
}

fn open_symmetric_grid(step: f64) -> Vec<f64> {
    let count = (1.0 / step).round() as usize;
    (1..2 * count).map(|k| -1.0 + k as f64 * step).collect()
}

fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Check the claimed derivative signs of the analytic factors by central
/// finite differences: the approximate forms over an (h_L, h_S) grid and
/// the exact forms over an (h_L, h_S, h_F) grid with exclusion bands around
/// the critical surfaces. The rational formulas extend smoothly past the
/// domain boundaries, so boundary points use ordinary central differences.
pub fn verify_theorem_signs(config: &VerifyConfig) -> SignReport {
    let c = config.num_classes;
    let cf = c as f64;
    let tol = config.derivative_tol;
    let fd = config.fd_step;

    let mut approx_label = SignCheck::new("approx_label_aware");
    let mut approx_structural = SignCheck::new("approx_structural_aware");
    let grid = unit_grid(config.approx_grid_step);
    for &h_l in &grid {
        for &h_s in &grid {
            let d_l = central_difference(|x| j_h_aware_approx(x, h_s, c), h_l, fd);
            if (h_l - 1.0 / cf).abs() < 1e-12 {
                approx_label.skip();
            } else {
                let expected = if h_l > 1.0 / cf { 1 } else { -1 };
                approx_label.record((h_l, h_s, None), expected, d_l, tol);
            }
            let d_s = central_difference(|x| j_h_aware_approx(h_l, x, c), h_s, fd);
            approx_structural.record((h_l, h_s, None), 0, d_s, tol);
        }
    }

    let mut label_agnostic = SignCheck::new("exact_label_agnostic");
    let mut structural_aware = SignCheck::new("exact_structural_aware");
    let mut structural_agnostic = SignCheck::new("exact_structural_agnostic");
    let mut feature_aware = SignCheck::new("exact_feature_aware");
    let mut feature_agnostic = SignCheck::new("exact_feature_agnostic");

    let rho = config.rho;
    let excl = config.exclusion;
    let outer = unit_grid(config.exact_grid_step);
    let inner = open_symmetric_grid(config.exact_grid_step);
    for &h_l in &outer {
        for &h_s in &outer {
            let crit = critical_feature_homophily(h_l, h_s, c, rho);
            let bounds = critical_label_bounds(h_s, c, rho);
            let near_bound = |bound: Option<f64>| {
                bound.is_some_and(|b| (h_l - b).abs() < excl)
            };
            for &h_f in &inner {
                let d_l = central_difference(
                    |x| j_agnostic_raw(x, h_s, h_f, c, rho),
                    h_l,
                    fd,
                );
                if h_f.abs() < excl {
                    label_agnostic.skip();
                } else {
                    let expected = if h_f > 0.0 { 1 } else { -1 };
                    label_agnostic.record((h_l, h_s, Some(h_f)), expected, d_l, tol);
                }

                let d_s_aware = central_difference(
                    |x| j_aware_raw(h_l, x, h_f, c, rho),
                    h_s,
                    fd,
                );
                structural_aware.record((h_l, h_s, Some(h_f)), 0, d_s_aware, tol);
                let d_s_agnostic = central_difference(
                    |x| j_agnostic_raw(h_l, x, h_f, c, rho),
                    h_s,
                    fd,
                );
                structural_agnostic.record((h_l, h_s, Some(h_f)), 0, d_s_agnostic, tol);

                let skip_feature = (h_f - crit).abs() < excl
                    || near_bound(bounds.lower)
                    || near_bound(bounds.upper)
                    || (h_l - 1.0 / cf).abs() < excl;
                if skip_feature {
                    feature_aware.skip();
                    feature_agnostic.skip();
                    continue;
                }
                let expected = if crit > h_f { 1 } else { -1 };
                let d_f_aware = central_difference(
                    |x| j_aware_raw(h_l, h_s, x, c, rho),
                    h_f,
                    fd,
                );
                feature_aware.record((h_l, h_s, Some(h_f)), expected, d_f_aware, tol);
                let d_f_agnostic = central_difference(
                    |x| j_agnostic_raw(h_l, h_s, x, c, rho),
                    h_f,
                    fd,
                );
                feature_agnostic.record((h_l, h_s, Some(h_f)), expected, d_f_agnostic, tol);
            }
        }
    }

    let critical_checks = outer
        .iter()
        .map(|&h_s| {
            let bounds = critical_label_bounds(h_s, c, rho);
            CriticalCrossCheck {
                h_s,
                lower: bounds.lower,
                upper: bounds.upper,
                crit_at_lower: bounds
                    .lower
                    .map(|b| critical_feature_homophily(b, h_s, c, rho)),
                crit_at_upper: bounds
                    .upper
                    .map(|b| critical_feature_homophily(b, h_s, c, rho)),
            }
        })
        .collect();

    SignReport {
        config: *config,
        approx_label_aware: approx_label,
        approx_structural_aware: approx_structural,
        exact_label_agnostic: label_agnostic,
        exact_structural_aware: structural_aware,
        exact_structural_agnostic: structural_agnostic,
        exact_feature_aware: feature_aware,
        exact_feature_agnostic: feature_agnostic,
        critical_checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn point(h_l: f64, h_s: f64, h_f: f64, c: usize, rho: f64) -> TriHomPoint {
        TriHomPoint::new(h_l, h_s, h_f, c, rho).unwrap()
    }

    #[test]
    fn agnostic_factor_is_one_at_zero_feature_homophily() {
        for c in 2..=10 {
            for &rho in &[2.0, 10.0, 100.0] {
                let p = point(0.37, 0.58, 0.0, c, rho);
                assert_eq!(j_h_agnostic(&p), 1.0);
            }
        }
    }

    #[test]
    fn aware_factor_vanishes_at_uniform_label_homophily() {
        for c in 2..=10 {
            let p = point(1.0 / c as f64, 0.4, 0.3, c, 10.0);
            assert_eq!(j_h_aware(&p), 0.0);
        }
    }

    #[test]
    fn pure_homophily_collapses_to_a_rational_function() {
        let rho = 10.0;
        for &h_f in &[-0.7, -0.2, 0.4, 0.9] {
            let p = point(1.0, 1.0, h_f, 3, rho);
            let w = h_f / rho;
            let expected = (1.0 + w) / (1.0 - w);
            assert!((j_h_agnostic(&p) - expected).abs() < 1e-14);
            assert!((j_h_aware(&p) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn aware_prefactor_lies_in_unit_interval() {
        let mut rng = crate::rng::stream(2, 0);
        use rand::Rng;
        for _ in 0..500 {
            let h_l: f64 = rng.random();
            let h_s: f64 = rng.random();
            let h_f: f64 = rng.random::<f64>() * 1.8 - 0.9;
            let c = rng.random_range(2..8);
            let rho = 1.5 + rng.random::<f64>() * 50.0;
            let p = point(h_l, h_s, h_f, c, rho);
            let agnostic = j_h_agnostic(&p);
            let aware = j_h_aware(&p);
            if agnostic.abs() > 1e-12 {
                let prefactor = aware / agnostic;
                assert!((-1e-12..=1.0 + 1e-12).contains(&prefactor), "prefactor {prefactor}");
            }
        }
    }

    #[test]
    fn approx_matches_exact_in_the_large_rho_limit() {
        let (h_l, h_s, h_f, c) = (0.62, 0.31, 0.54, 3);
        let approx = j_h_aware_approx(h_l, h_s, c);
        // Convergence is O(1/rho).
        let coarse = j_h_aware(&point(h_l, h_s, h_f, c, 1e6));
        assert!((approx - coarse).abs() < 1e-5);
        let fine = j_h_aware(&point(h_l, h_s, h_f, c, 1e12));
        assert!((approx - fine).abs() < 1e-9);
    }

    #[test]
    fn approx_endpoints() {
        assert_eq!(j_h_aware_approx(1.0 / 3.0, 0.5, 3), 0.0);
        assert_eq!(j_h_aware_approx(1.0, 1.0, 3), 1.0);
    }

    #[test]
    fn mean_separation_term_examples() {
        let equal = GaussianSpec {
            means: Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap(),
            variances: Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap(),
        };
        assert_eq!(j_n(&equal).unwrap(), 0.0);

        let separated = GaussianSpec {
            means: Matrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap(),
            variances: Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
        };
        assert!((j_n(&separated).unwrap() - 2.0).abs() < 1e-14);

        let scaled = GaussianSpec {
            means: Matrix::from_rows(&[vec![0.0], vec![6.0]]).unwrap(),
            variances: Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
        };
        assert!((j_n(&scaled).unwrap() - 18.0).abs() < 1e-12);

        let degenerate = GaussianSpec {
            means: Matrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap(),
            variances: Matrix::zeros(2, 1),
        };
        assert!(j_n(&degenerate).is_err());
    }

    #[test]
    fn total_ratio_examples() {
        assert_eq!(j_total(2.0, 0.0).unwrap(), 1.0);
        assert_eq!(j_total(0.0, 5.0).unwrap(), 1.0);
        assert!((j_total(2.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(j_total(-1.0, 1.0).is_err());
    }

    #[test]
    fn total_ratio_stays_in_unit_interval_for_nonnegative_inputs() {
        for jn in [0.0, 0.3, 2.0, 100.0] {
            for jh in [0.0, 0.5, 1.0, 7.0] {
                let j = j_total(jn, jh).unwrap();
                assert!(j > 0.0 && j <= 1.0);
            }
        }
    }

    #[test]
    fn critical_feature_homophily_sign_and_zero() {
        assert_eq!(critical_feature_homophily(1.0 / 3.0, 0.7, 3, 10.0), 0.0);
        let mut rng = crate::rng::stream(4, 0);
        use rand::Rng;
        for _ in 0..200 {
            let h_l: f64 = rng.random();
            let h_s: f64 = rng.random();
            let crit = critical_feature_homophily(h_l, h_s, 3, 10.0);
            let reference = h_l - 1.0 / 3.0;
            assert_eq!(crit > 0.0, reference > 0.0, "at h_l={h_l}");
        }
    }

    #[test]
    fn critical_feature_homophily_increases_with_label_homophily() {
        for k in 0..100 {
            let h_l = k as f64 / 100.0;
            let fd = central_difference(
                |x| critical_feature_homophily(x, 0.6, 3, 10.0),
                h_l,
                1e-6,
            );
            assert!(fd > 0.0, "not increasing at h_l={h_l}");
        }
    }

    #[test]
    fn label_bounds_are_ordered_and_consistent() {
        let bounds = critical_label_bounds(1.0, 3, 10.0);
        let lower = bounds.lower.unwrap();
        let upper = bounds.upper.unwrap();
        assert!(0.0 < lower && lower < upper && upper < 1.0);
        assert!((critical_feature_homophily(lower, 1.0, 3, 10.0) + 1.0).abs() < 1e-6);
        assert!((critical_feature_homophily(upper, 1.0, 3, 10.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn aggregation_examples() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let ds = Dataset::new(
            path,
            vec![0, 1, 0],
            2,
            Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap(),
        )
        .unwrap();
        let (h, fallback) = aggregate_representations(&ds);
        assert_eq!(h.row(0), &[1.0]);
        assert_eq!(h.row(1), &[1.0]);
        assert_eq!(h.row(2), &[1.0]);
        assert!(fallback.iter().all(|&f| !f));

        let triangle = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let ds = Dataset::new(
            triangle,
            vec![0, 1, 0],
            2,
            Matrix::from_rows(&[
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ])
            .unwrap(),
        )
        .unwrap();
        let (h, _) = aggregate_representations(&ds);
        assert_eq!(h.row(0), &[0.0, 0.5, 0.5]);
        assert_eq!(h.row(1), &[0.5, 0.0, 0.5]);
        assert_eq!(h.row(2), &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn aggregation_flags_isolated_nodes() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let ds = Dataset::new(
            g,
            vec![0, 1, 0],
            2,
            Matrix::from_rows(&[vec![1.0], vec![2.0], vec![7.0]]).unwrap(),
        )
        .unwrap();
        let (h, fallback) = aggregate_representations(&ds);
        assert_eq!(h.row(2), &[7.0]);
        assert!(fallback[2]);
    }

    #[test]
    fn empirical_j_guards_and_zero_case() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let identical = Dataset::new(
            g.clone(),
            vec![0, 0, 1, 1],
            2,
            Matrix::from_rows(&[vec![1.0]; 4]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            empirical_j(&identical, RepresentationMode::Agnostic, 100, 0),
            Err(Error::Degenerate(_))
        ));

        let one_hot = Dataset::new(
            g,
            vec![0, 0, 1, 1],
            2,
            Matrix::from_rows(&[
                vec![1.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 1.0],
            ])
            .unwrap(),
        )
        .unwrap();
        assert_eq!(
            empirical_j(&one_hot, RepresentationMode::Agnostic, 100, 0).unwrap(),
            0.0
        );
    }

    #[test]
    fn sign_checker_detects_injected_flips() {
        let mut check = SignCheck::new("self_test");
        // A genuinely positive derivative recorded against a negative claim
        // must surface as a violation.
        check.record((0.5, 0.5, None), -1, 0.25, 1e-9);
        assert_eq!(check.violations.len(), 1);
        check.record((0.5, 0.5, None), 1, 0.25, 1e-9);
        assert_eq!(check.violations.len(), 1);
    }

    #[test]
    fn verifier_smoke_on_a_coarse_grid() {
        let config = VerifyConfig {
            approx_grid_step: 0.1,
            exact_grid_step: 0.25,
            ..VerifyConfig::default()
        };
        let report = verify_theorem_signs(&config);
        assert_eq!(report.approx_violations(), 0);
        assert!(report.exact_structural_aware.violations.is_empty());
        assert!(report.exact_structural_agnostic.violations.is_empty());
        assert!(report.exact_label_agnostic.violation_rate() < 0.01);
        assert!(report.exact_feature_aware.violation_rate() < 0.01);
        assert!(report.exact_feature_agnostic.violation_rate() < 0.01);
    }
}
