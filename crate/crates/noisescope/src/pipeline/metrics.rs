//! Reconstruction-quality metrics comparing a predicted error map
//! against calibration truth: mean percent difference, Spearman rank
//! correlation, worst-component overlap, scale-invariant log-ratio
//! mismatch, and RMSE.

use serde::{Deserialize, Serialize};

use crate::backend::{ErrorMap, ERROR_FLOOR};
use crate::error::{Error, Result};

/// Components counted in a "worst list" unless the graph is smaller.
pub const TOP_K: usize = 10;

/// Metrics over one component class (qubits or couplings), restricted to
/// components masked in by both maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Components that entered every statistic.
    pub n: usize,
    /// Mean of `|pred - truth| / truth`, in percent.
    pub percent_diff: f64,
    /// Spearman rank correlation with average ranks for ties.
    pub spearman: f64,
    /// Size of the worst-component lists compared (min(10, n)).
    pub top_k: usize,
    /// How many components the predicted and true worst lists share.
    pub top_overlap: usize,
    /// Mean of `|ln(pred / truth)|` with predictions floored at 1e-9.
    pub log_mismatch: f64,
    /// Root-mean-square error in raw rate units.
    pub rmse: f64,
}

/// Node and edge reports side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReports {
    pub nodes: EvalReport,
    pub edges: EvalReport,
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the mean 1-based rank.
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks. Two constant inputs
/// correlate perfectly (1); exactly one constant input correlates with
/// nothing (0).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidInput(format!(
            "rank correlation needs two equal nonempty vectors, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    let mut cov = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        va += (x - mean) * (x - mean);
        vb += (y - mean) * (y - mean);
        cov += (x - mean) * (y - mean);
    }
    if va == 0.0 && vb == 0.0 {
        return Ok(1.0);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (va * vb).sqrt())
}

/// Indices of the `k` largest values, worst first; ties broken toward
/// the smaller index.
pub fn worst_components(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Metrics for one component class. `pred` and `truth` align by index;
/// only components masked in by both sides count, truth values there
/// must be positive.
pub fn eval_component(
    pred: &[f64],
    truth: &[f64],
    pred_mask: &[bool],
    truth_mask: &[bool],
) -> Result<EvalReport> {
    if pred.len() != truth.len() || pred.len() != pred_mask.len() || truth.len() != truth_mask.len()
    {
        return Err(Error::InvalidInput(format!(
            "component count mismatch: {} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    let live: Vec<usize> = (0..pred.len()).filter(|&i| pred_mask[i] && truth_mask[i]).collect();
    if live.is_empty() {
        return Err(Error::InvalidInput("no components masked in on both sides".into()));
    }
    let mut p = Vec::with_capacity(live.len());
    let mut t = Vec::with_capacity(live.len());
    for &i in &live {
        if !(truth[i] > 0.0) || !truth[i].is_finite() {
            return Err(Error::InvalidInput(format!(
                "truth component {i} is {} but masked in; positive rates required",
                truth[i]
            )));
        }
        if !pred[i].is_finite() {
            return Err(Error::Numerical(format!("prediction component {i} is {}", pred[i])));
        }
        p.push(pred[i]);
        t.push(truth[i]);
    }
    let n = p.len();
    let nf = n as f64;
    let percent_diff = p
        .iter()
        .zip(&t)
        .map(|(&pi, &ti)| (pi - ti).abs() / ti)
        .sum::<f64>()
        / nf
        * 100.0;
    let log_mismatch = p
        .iter()
        .zip(&t)
        .map(|(&pi, &ti)| (pi.max(ERROR_FLOOR) / ti).ln().abs())
        .sum::<f64>()
        / nf;
    let rmse = (p.iter().zip(&t).map(|(&pi, &ti)| (pi - ti) * (pi - ti)).sum::<f64>() / nf).sqrt();
    let top_k = TOP_K.min(n);
    let wp = worst_components(&p, top_k);
    let wt = worst_components(&t, top_k);
    let top_overlap = wp.iter().filter(|i| wt.contains(i)).count();
    Ok(EvalReport {
        n,
        percent_diff,
        spearman: spearman(&p, &t)?,
        top_k,
        top_overlap,
        log_mismatch,
        rmse,
    })
}

/// Compare a predicted error map against truth over both component
/// classes. Masks of both maps apply; predictions are expected dense.
pub fn evaluate(pred: &ErrorMap, truth: &ErrorMap) -> Result<ComponentReports> {
    if pred.n_nodes() != truth.n_nodes() || pred.n_edges() != truth.n_edges() {
        return Err(Error::InvalidInput(format!(
            "shape mismatch: predicted ({}, {}) vs truth ({}, {})",
            pred.n_nodes(),
            pred.n_edges(),
            truth.n_nodes(),
            truth.n_edges()
        )));
    }
    Ok(ComponentReports {
        nodes: eval_component(pred.y_nodes(), truth.y_nodes(), pred.mask_nodes(), truth.mask_nodes())?,
        edges: eval_component(pred.y_edges(), truth.y_edges(), pred.mask_edges(), truth.mask_edges())?,
    })
}
