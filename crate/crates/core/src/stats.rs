//! Correlation analysis between metric columns and performance columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(
            "pearson needs two equal-length series of length >= 2".into(),
        ));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Kendall rank correlation, tau-a form: ties count as neither concordant
/// nor discordant and the denominator stays n(n-1)/2.
pub fn kendall_tau_a(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(
            "kendall needs two equal-length series of length >= 2".into(),
        ));
    }
    let n = x.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            let product = dx * dy;
            if product > 0.0 {
                concordant += 1;
            } else if product < 0.0 {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok((concordant - discordant) as f64 / pairs)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub pearson: Option<f64>,
    pub kendall: Option<f64>,
    /// Rows remaining after pairwise deletion of missing values.
    pub n: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub metrics: Vec<String>,
    pub models: Vec<String>,
    /// cells[i][j]: metric i against model j.
    pub cells: Vec<Vec<CorrelationCell>>,
    /// Mean over models of the metric's rank by |pearson| (descending,
    /// mid-ranks on ties); `None` if the metric was never rankable.
    pub average_rank: Vec<Option<f64>>,
}

/// Correlate every metric column against every performance column. Missing
/// values are dropped pairwise; failed cells carry a note instead of a
/// value.
pub fn correlate_table(
    metrics: &[(String, Vec<Option<f64>>)],
    models: &[(String, Vec<Option<f64>>)],
) -> Result<CorrelationTable> {
    let rows = metrics
        .first()
        .map(|(_, col)| col.len())
        .or_else(|| models.first().map(|(_, col)| col.len()))
        .unwrap_or(0);
    for (name, col) in metrics.iter().chain(models) {
        if col.len() != rows {
            return Err(Error::InvalidInput(format!(
                "column {name} has {} rows, expected {rows}",
                col.len()
            )));
        }
    }

    let mut cells: Vec<Vec<CorrelationCell>> = Vec::with_capacity(metrics.len());
    for (_, metric_col) in metrics {
        let mut row = Vec::with_capacity(models.len());
        for (_, model_col) in models {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (mx, my) in metric_col.iter().zip(model_col) {
                if let (Some(a), Some(b)) = (mx, my) {
                    xs.push(*a);
                    ys.push(*b);
                }
            }
            let cell = match (pearson(&xs, &ys), kendall_tau_a(&xs, &ys)) {
                (Ok(p), Ok(k)) => CorrelationCell {
                    pearson: Some(p),
                    kendall: Some(k),
                    n: xs.len(),
                    note: None,
                },
                (p, k) => CorrelationCell {
                    pearson: p.ok(),
                    kendall: k.ok(),
                    n: xs.len(),
                    note: Some("correlation undefined".into()),
                },
            };
            row.push(cell);
        }
        cells.push(row);
    }

    // Rank metrics per model by |pearson| descending with mid-ranks on
    // ties, then average each metric's rank over the models that ranked it.
    let mut rank_sums = vec![0.0; metrics.len()];
    let mut rank_counts = vec![0usize; metrics.len()];
    for model in 0..models.len() {
        let mut scored: Vec<(usize, f64)> = cells
            .iter()
            .enumerate()
            .filter_map(|(i, row)| row[model].pearson.map(|p| (i, p.abs())))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let mut position = 0;
        while position < scored.len() {
            let mut end = position + 1;
            while end < scored.len() && scored[end].1 == scored[position].1 {
                end += 1;
            }
            let mid_rank = (position + 1 + end) as f64 / 2.0;
            for &(metric, _) in &scored[position..end] {
                rank_sums[metric] += mid_rank;
                rank_counts[metric] += 1;
            }
            position = end;
        }
    }
    let average_rank = rank_sums
        .iter()
        .zip(&rank_counts)
        .map(|(&sum, &count)| (count > 0).then(|| sum / count as f64))
        .collect();

    Ok(CorrelationTable {
        metrics: metrics.iter().map(|(name, _)| name.clone()).collect(),
        models: models.iter().map(|(name, _)| name.clone()).collect(),
        cells,
        average_rank,
    })
}
