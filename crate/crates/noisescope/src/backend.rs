//! Backends: error maps, synthetic calibration sampling, label
//! derivation from calibration tables, and temporal drift.
//!
//! An [`ErrorMap`] carries one error probability per qubit (1-qubit gate
//! error) and one per coupling (2-qubit gate error), in canonical node
//! and edge order, plus masks for entries with no calibration data.
//! Masked-out entries hold `NaN` in memory so any accidental arithmetic
//! on them surfaces immediately; on disk they serialize as `null`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CouplingGraph, TopologySpec};
use crate::seed;

/// Smallest error value any pipeline stage will produce; keeps log-ratio
/// metrics and `-ln(1-p)` path weights finite.
pub const ERROR_FLOOR: f64 = 1e-9;

/// Hard ceiling applied to sampled errors so probabilities stay away
/// from 1 (route weights diverge at p = 1). Never binds under default
/// sampling parameters.
const ERROR_CEIL: f64 = 0.9;

/// Number of blend passes used by the spatial smoother. Each pass mixes
/// every component toward its joint neighborhood mean and re-standardizes,
/// so repeated passes turn independent draws into region-scale structure
/// spanning both qubits and couplings.
const SMOOTHING_PASSES: usize = 10;

// ---------------------------------------------------------------------------
// ErrorMap
// ---------------------------------------------------------------------------

/// Per-qubit and per-coupling error probabilities with coverage masks.
#[derive(Debug, Clone)]
pub struct ErrorMap {
    y_nodes: Vec<f64>,
    y_edges: Vec<f64>,
    mask_nodes: Vec<bool>,
    mask_edges: Vec<bool>,
}

impl PartialEq for ErrorMap {
    /// Equality compares masks plus masked-in values; the masked-out
    /// `NaN` sentinels compare equal to each other.
    fn eq(&self, other: &Self) -> bool {
        let values_eq = |a: &[f64], b: &[f64]| {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(x, y)| x == y || (x.is_nan() && y.is_nan()))
        };
        self.mask_nodes == other.mask_nodes
            && self.mask_edges == other.mask_edges
            && values_eq(&self.y_nodes, &other.y_nodes)
            && values_eq(&self.y_edges, &other.y_edges)
    }
}

impl ErrorMap {
    /// Build and validate. Masked-in entries must be finite and >= 0;
    /// masked-out entries are forced to the `NaN` sentinel regardless of
    /// the value passed in.
    pub fn new(
        mut y_nodes: Vec<f64>,
        mut y_edges: Vec<f64>,
        mask_nodes: Vec<bool>,
        mask_edges: Vec<bool>,
    ) -> Result<Self> {
        if y_nodes.len() != mask_nodes.len() || y_edges.len() != mask_edges.len() {
            return Err(Error::InvalidInput(
                "error-map value and mask lengths disagree".into(),
            ));
        }
        for (y, &m) in y_nodes.iter_mut().zip(&mask_nodes) {
            if m {
                if !y.is_finite() || *y < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "masked-in node error {y} is not finite and non-negative"
                    )));
                }
            } else {
                *y = f64::NAN;
            }
        }
        for (y, &m) in y_edges.iter_mut().zip(&mask_edges) {
            if m {
                if !y.is_finite() || *y < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "masked-in edge error {y} is not finite and non-negative"
                    )));
                }
            } else {
                *y = f64::NAN;
            }
        }
        Ok(ErrorMap { y_nodes, y_edges, mask_nodes, mask_edges })
    }

    /// All-masked-in map (convenience for fully specified errors).
    pub fn dense(y_nodes: Vec<f64>, y_edges: Vec<f64>) -> Result<Self> {
        let mn = vec![true; y_nodes.len()];
        let me = vec![true; y_edges.len()];
        ErrorMap::new(y_nodes, y_edges, mn, me)
    }

    pub fn n_nodes(&self) -> usize {
        self.y_nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.y_edges.len()
    }

    /// Node error values; masked-out slots are `NaN`.
    pub fn y_nodes(&self) -> &[f64] {
        &self.y_nodes
    }

    pub fn y_edges(&self) -> &[f64] {
        &self.y_edges
    }

    pub fn mask_nodes(&self) -> &[bool] {
        &self.mask_nodes
    }

    pub fn mask_edges(&self) -> &[bool] {
        &self.mask_edges
    }

    /// Node error for routing/layout use; only valid on masked-in slots.
    pub fn node_error(&self, v: usize) -> f64 {
        self.y_nodes[v]
    }

    pub fn edge_error(&self, e: usize) -> f64 {
        self.y_edges[e]
    }

    /// Check shape against a coupling graph.
    pub fn check_shape(&self, g: &CouplingGraph) -> Result<()> {
        if self.y_nodes.len() != g.n() || self.y_edges.len() != g.edge_count() {
            return Err(Error::InvalidInput(format!(
                "error map shape ({} nodes, {} edges) does not match graph ({}, {})",
                self.y_nodes.len(),
                self.y_edges.len(),
                g.n(),
                g.edge_count()
            )));
        }
        Ok(())
    }
}

/// On-disk form: masked-out entries become `null` (JSON has no NaN).
#[derive(Serialize, Deserialize)]
struct ErrorMapRepr {
    y_nodes: Vec<Option<f64>>,
    y_edges: Vec<Option<f64>>,
    mask_nodes: Vec<bool>,
    mask_edges: Vec<bool>,
}

impl Serialize for ErrorMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wrap = |ys: &[f64], ms: &[bool]| {
            ys.iter()
                .zip(ms)
                .map(|(&y, &m)| if m { Some(y) } else { None })
                .collect::<Vec<_>>()
        };
        ErrorMapRepr {
            y_nodes: wrap(&self.y_nodes, &self.mask_nodes),
            y_edges: wrap(&self.y_edges, &self.mask_edges),
            mask_nodes: self.mask_nodes.clone(),
            mask_edges: self.mask_edges.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ErrorMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ErrorMapRepr::deserialize(d)?;
        let unwrap = |ys: Vec<Option<f64>>| {
            ys.into_iter().map(|y| y.unwrap_or(f64::NAN)).collect::<Vec<_>>()
        };
        ErrorMap::new(
            unwrap(repr.y_nodes),
            unwrap(repr.y_edges),
            repr.mask_nodes,
            repr.mask_edges,
        )
        .map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Synthetic backend sampling
// ---------------------------------------------------------------------------

/// Parameters of the synthetic error-map sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerCfg {
    /// Median 1-qubit gate error.
    pub median_1q: f64,
    /// Log-space spread of 1-qubit errors.
    pub sigma_1q: f64,
    /// Median 2-qubit gate error.
    pub median_2q: f64,
    /// Log-space spread of 2-qubit errors.
    pub sigma_2q: f64,
    /// Blend weight toward the joint neighborhood mean, in `[0, 1]`.
    /// 0 leaves draws independent; higher values produce broader
    /// correlated weak regions shared by qubits and couplings.
    pub spatial_smoothing: f64,
}

impl Default for SamplerCfg {
    fn default() -> Self {
        SamplerCfg {
            median_1q: 2e-4,
            sigma_1q: 0.6,
            median_2q: 1e-2,
            sigma_2q: 0.6,
            spatial_smoothing: 0.5,
        }
    }
}

impl SamplerCfg {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("median_1q", self.median_1q), ("median_2q", self.median_2q)] {
            if !(v > 0.0 && v <= ERROR_CEIL) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, {ERROR_CEIL}], got {v}"
                )));
            }
        }
        for (name, v) in [("sigma_1q", self.sigma_1q), ("sigma_2q", self.sigma_2q)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.spatial_smoothing) {
            return Err(Error::InvalidInput(format!(
                "spatial_smoothing must lie in [0, 1], got {}",
                self.spatial_smoothing
            )));
        }
        Ok(())
    }
}

/// A synthetic backend: identity, topology, and ground-truth error map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendSpec {
    pub id: String,
    pub topology: TopologySpec,
    pub graph: CouplingGraph,
    pub errors: ErrorMap,
    /// Sampler provenance: seed and parameters used to draw `errors`.
    pub gen_seed: u64,
    pub gen_cfg: SamplerCfg,
}

/// Draw a synthetic error map over `g`.
///
/// Per-component deviations start as independent standard normals, one
/// per qubit and one per coupling. The smoother then repeatedly blends
/// every deviation with the mean over its joint neighborhood (a qubit
/// sees its adjacent qubits and incident couplings; a coupling sees its
/// endpoints and the couplings it shares an endpoint with), weighted by
/// `spatial_smoothing`, re-standardizing each class after every pass.
/// Iterating the blend is what turns pointwise noise into device-scale
/// weak regions that span both qubits and couplings: a single pass would
/// leave deviations almost entirely independent, and qubit errors —
/// which barely influence transpilation next to coupling errors — would
/// be invisible to any downstream estimator.
///
/// Final values are `median * exp(sigma * z)`, clamped to
/// `[ERROR_FLOOR, 0.9]`. All entries are masked in.
pub fn sample_backend(g: &CouplingGraph, seed: u64, cfg: &SamplerCfg) -> Result<ErrorMap> {
    cfg.validate()?;
    let n = g.n();
    let m = g.edge_count();

    let mut rng_nodes = seed::rng(seed, "errmap-nodes", &[]);
    let mut z_nodes: Vec<f64> = (0..n).map(|_| rng_nodes.sample(StandardNormal)).collect();
    let mut rng_edges = seed::rng(seed, "errmap-edges", &[]);
    let mut z_edges: Vec<f64> = (0..m).map(|_| rng_edges.sample(StandardNormal)).collect();

    if cfg.spatial_smoothing > 0.0 {
        smooth_joint_field(g, &mut z_nodes, &mut z_edges, cfg.spatial_smoothing);
    }

    let value = |median: f64, sigma: f64, z: f64| {
        (median * (sigma * z).exp()).clamp(ERROR_FLOOR, ERROR_CEIL)
    };
    let y_nodes: Vec<f64> =
        z_nodes.iter().map(|&z| value(cfg.median_1q, cfg.sigma_1q, z)).collect();
    let y_edges: Vec<f64> =
        z_edges.iter().map(|&z| value(cfg.median_2q, cfg.sigma_2q, z)).collect();
    ErrorMap::dense(y_nodes, y_edges)
}

/// One smoothing pass blends each component toward its joint
/// neighborhood mean; classes are re-standardized after every pass so
/// the final deviations stay zero-mean, unit-variance per class.
fn smooth_joint_field(g: &CouplingGraph, z_nodes: &mut Vec<f64>, z_edges: &mut Vec<f64>, s: f64) {
    let n = g.n();
    let m = g.edge_count();
    for _ in 0..SMOOTHING_PASSES {
        let mut next_nodes = vec![0.0f64; n];
        for v in 0..n {
            let mut acc = 0.0;
            let mut k = 0usize;
            for &u in g.neighbors(v) {
                acc += z_nodes[u];
                k += 1;
            }
            for &e in g.incident_edges(v) {
                acc += z_edges[e];
                k += 1;
            }
            next_nodes[v] = if k == 0 {
                z_nodes[v]
            } else {
                (1.0 - s) * z_nodes[v] + s * acc / k as f64
            };
        }
        let mut next_edges = vec![0.0f64; m];
        for (ke, &(u, v)) in g.edges().iter().enumerate() {
            let mut acc = z_nodes[u] + z_nodes[v];
            let mut k = 2usize;
            for side in [u, v] {
                for &e2 in g.incident_edges(side) {
                    if e2 != ke {
                        acc += z_edges[e2];
                        k += 1;
                    }
                }
            }
            next_edges[ke] = (1.0 - s) * z_edges[ke] + s * acc / k as f64;
        }
        standardize_class(&mut next_nodes);
        standardize_class(&mut next_edges);
        *z_nodes = next_nodes;
        *z_edges = next_edges;
    }
}

/// In-place population z-scoring; degenerate classes are left centered.
fn standardize_class(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for x in xs.iter_mut() {
        *x -= mean;
        if std > 1e-12 {
            *x /= std;
        }
    }
}

// ---------------------------------------------------------------------------
// Calibration tables
// ---------------------------------------------------------------------------

/// One calibration record as a provider would publish it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalRow {
    /// "1q" or "2q".
    pub kind: String,
    /// One qubit for 1q rows; an ordered pair for 2q rows.
    pub operands: Vec<usize>,
    /// Gate name, informational only (e.g. "sx", "cx").
    pub gate: String,
    /// Error probability in `[0, 1]`.
    pub error: f64,
}

/// A published calibration table: plain rows, possibly covering a qubit
/// or coupling more than once (per gate, per direction) or not at all.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub rows: Vec<CalRow>,
}

/// Reduce a calibration table to one label per qubit and per coupling.
///
/// Multiple 1q rows for the same qubit average; 2q rows average over
/// both directions of a coupling. Qubits/couplings with no rows are
/// masked out. Malformed rows are rejected with their row index.
pub fn derive_labels(table: &CalibrationTable, g: &CouplingGraph) -> Result<ErrorMap> {
    let n = g.n();
    let m = g.edge_count();
    let mut node_sum = vec![0.0f64; n];
    let mut node_cnt = vec![0usize; n];
    let mut edge_sum = vec![0.0f64; m];
    let mut edge_cnt = vec![0usize; m];

    for (i, row) in table.rows.iter().enumerate() {
        if !(0.0..=1.0).contains(&row.error) || !row.error.is_finite() {
            return Err(Error::Schema(format!(
                "calibration row {i}: error {} outside [0, 1]",
                row.error
            )));
        }
        match row.kind.as_str() {
            "1q" => {
                let &[q] = &row.operands[..] else {
                    return Err(Error::Schema(format!(
                        "calibration row {i}: 1q row needs exactly one operand"
                    )));
                };
                if q >= n {
                    return Err(Error::Schema(format!(
                        "calibration row {i}: qubit {q} outside 0..{n}"
                    )));
                }
                node_sum[q] += row.error;
                node_cnt[q] += 1;
            }
            "2q" => {
                let &[a, b] = &row.operands[..] else {
                    return Err(Error::Schema(format!(
                        "calibration row {i}: 2q row needs exactly two operands"
                    )));
                };
                let Some(e) = (a != b).then(|| g.edge_id(a, b)).flatten() else {
                    return Err(Error::Schema(format!(
                        "calibration row {i}: ({a}, {b}) is not a coupling of this backend"
                    )));
                };
                edge_sum[e] += row.error;
                edge_cnt[e] += 1;
            }
            other => {
                return Err(Error::Schema(format!(
                    "calibration row {i}: unknown kind {other:?}"
                )));
            }
        }
    }

    let y_nodes: Vec<f64> = (0..n)
        .map(|v| if node_cnt[v] > 0 { node_sum[v] / node_cnt[v] as f64 } else { f64::NAN })
        .collect();
    let y_edges: Vec<f64> = (0..m)
        .map(|e| if edge_cnt[e] > 0 { edge_sum[e] / edge_cnt[e] as f64 } else { f64::NAN })
        .collect();
    let mask_nodes: Vec<bool> = node_cnt.iter().map(|&c| c > 0).collect();
    let mask_edges: Vec<bool> = edge_cnt.iter().map(|&c| c > 0).collect();
    ErrorMap::new(y_nodes, y_edges, mask_nodes, mask_edges)
}

// ---------------------------------------------------------------------------
// Temporal drift
// ---------------------------------------------------------------------------

/// Drift magnitudes: each masked-in entry is perturbed by an independent
/// uniform draw on `[-2*scale, 2*scale]` (mean absolute shift = scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftCfg {
    pub scale_nodes: f64,
    pub scale_edges: f64,
}

impl Default for DriftCfg {
    fn default() -> Self {
        DriftCfg { scale_nodes: 1e-4, scale_edges: 1e-2 }
    }
}

impl DriftCfg {
    pub const OFF: DriftCfg = DriftCfg { scale_nodes: 0.0, scale_edges: 0.0 };

    pub fn is_off(&self) -> bool {
        self.scale_nodes == 0.0 && self.scale_edges == 0.0
    }
}

/// Apply one drift snapshot to an error map.
///
/// Perturbations are drawn fresh from `seed` (drift snapshots never
/// compound), applied only to masked-in entries, and floored at
/// [`ERROR_FLOOR`]. Masks are unchanged. Zero scales reproduce the input
/// exactly.
pub fn apply_drift(errors: &ErrorMap, seed: u64, cfg: &DriftCfg) -> ErrorMap {
    let perturb = |ys: &[f64], ms: &[bool], scale: f64, stream: &str| -> Vec<f64> {
        if scale == 0.0 {
            return ys.to_vec();
        }
        let mut rng = seed::rng(seed, stream, &[]);
        ys.iter()
            .zip(ms)
            .map(|(&y, &m)| {
                if m {
                    let delta: f64 = rng.random_range(-2.0 * scale..=2.0 * scale);
                    (y + delta).max(ERROR_FLOOR)
                } else {
                    y
                }
            })
            .collect()
    };
    let y_nodes = perturb(errors.y_nodes(), errors.mask_nodes(), cfg.scale_nodes, "drift-nodes");
    let y_edges = perturb(errors.y_edges(), errors.mask_edges(), cfg.scale_edges, "drift-edges");
    ErrorMap::new(
        y_nodes,
        y_edges,
        errors.mask_nodes().to_vec(),
        errors.mask_edges().to_vec(),
    )
    .expect("drifted map stays valid")
}
