//! Random logical circuits and circuit pools.
//!
//! Circuits alternate full 1-qubit rotation layers over a random active
//! subset with CX layers drawn as uniformly random matchings of that
//! subset, until a sampled CX budget is spent exactly or a depth cap is
//! hit. Everything is driven by a 64-bit seed, so a pool regenerates
//! byte-identically from `(n_qubits, M, master_seed, pool_index, cfg)`.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Default depth cap, counting both rotation and CX layers.
pub const DEPTH_CAP: usize = 64;

/// One gate. `Rot1q` is a generic 3-angle single-qubit rotation; `Cx` is
/// a controlled-NOT. Operands are logical qubits before transpilation
/// and physical qubits after.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Rot1q { q: usize, angles: [f64; 3] },
    Cx { control: usize, target: usize },
}

impl Gate {
    /// Qubits the gate touches.
    pub fn operands(&self) -> Vec<usize> {
        match *self {
            Gate::Rot1q { q, .. } => vec![q],
            Gate::Cx { control, target } => vec![control, target],
        }
    }
}

// Gates serialize as compact arrays: ["rot1q", q, a0, a1, a2] and
// ["cx", control, target].
impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Gate::Rot1q { q, angles } => {
                let mut seq = s.serialize_seq(Some(5))?;
                seq.serialize_element("rot1q")?;
                seq.serialize_element(&q)?;
                for a in &angles {
                    seq.serialize_element(a)?;
                }
                seq.end()
            }
            Gate::Cx { control, target } => {
                let mut seq = s.serialize_seq(Some(3))?;
                seq.serialize_element("cx")?;
                seq.serialize_element(&control)?;
                seq.serialize_element(&target)?;
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct GateVisitor;
        impl<'de> Visitor<'de> for GateVisitor {
            type Value = Gate;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a gate array like [\"cx\", c, t]")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Gate, A::Error> {
                let kind: String =
                    seq.next_element()?.ok_or_else(|| de::Error::custom("empty gate array"))?;
                match kind.as_str() {
                    "rot1q" => {
                        let q = seq
                            .next_element()?
                            .ok_or_else(|| de::Error::custom("rot1q missing qubit"))?;
                        let mut angles = [0.0f64; 3];
                        for slot in &mut angles {
                            *slot = seq
                                .next_element()?
                                .ok_or_else(|| de::Error::custom("rot1q needs three angles"))?;
                        }
                        Ok(Gate::Rot1q { q, angles })
                    }
                    "cx" => {
                        let control = seq
                            .next_element()?
                            .ok_or_else(|| de::Error::custom("cx missing control"))?;
                        let target = seq
                            .next_element()?
                            .ok_or_else(|| de::Error::custom("cx missing target"))?;
                        Ok(Gate::Cx { control, target })
                    }
                    other => Err(de::Error::custom(format!("unknown gate kind {other:?}"))),
                }
            }
        }
        d.deserialize_seq(GateVisitor)
    }
}

/// Generation parameters for one circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitCfg {
    /// Maximum number of layers (rotation and CX layers both count).
    pub depth_cap: usize,
    /// CX budgets are sampled uniformly from `0..=budget_max`.
    pub budget_max: usize,
}

impl CircuitCfg {
    /// Conventional budget ceiling for a backend with `edge_count`
    /// couplings: twice the coupling count.
    pub fn for_edge_count(edge_count: usize) -> Self {
        CircuitCfg { depth_cap: DEPTH_CAP, budget_max: 2 * edge_count }
    }
}

/// A logical circuit plus the sampled quantities that shaped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub seed: u64,
    /// Sampled active width `w`.
    pub width: usize,
    /// Sampled CX budget (the circuit contains exactly this many CX
    /// gates unless the depth cap or an odd active set limited it).
    pub cx_budget: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cx { .. })).count()
    }

    pub fn rot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Rot1q { .. })).count()
    }

    /// Qubits appearing in at least one gate, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_qubits];
        for g in &self.gates {
            for q in g.operands() {
                seen[q] = true;
            }
        }
        (0..self.n_qubits).filter(|&q| seen[q]).collect()
    }
}

/// A pool of circuits for one backend, regenerable from its header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitPool {
    pub n_qubits: usize,
    pub pool_index: usize,
    pub master_seed: u64,
    pub cfg: CircuitCfg,
    pub circuits: Vec<Circuit>,
}

/// Generate one circuit from a seed.
///
/// Sampling order: active width `w` uniform in `1..=n_qubits`, CX budget
/// uniform in `0..=budget_max`, then a random `w`-subset of qubits,
/// then alternating layers.
pub fn gen_circuit(n_qubits: usize, circuit_seed: u64, cfg: &CircuitCfg) -> Result<Circuit> {
    if n_qubits == 0 {
        return Err(Error::InvalidInput("circuits need at least one qubit".into()));
    }
    if cfg.depth_cap == 0 {
        return Err(Error::InvalidInput("depth cap must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(circuit_seed);
    let width = rng.random_range(1..=n_qubits);
    let cx_budget = rng.random_range(0..=cfg.budget_max);
    let mut active: Vec<usize> = rand::seq::index::sample(&mut rng, n_qubits, width).into_vec();
    active.sort_unstable();

    let gates = build_layers(&active, cx_budget, cfg.depth_cap, &mut rng);
    Ok(Circuit { n_qubits, seed: circuit_seed, width, cx_budget, gates })
}

/// Alternate rotation layers with CX layers drawn as random matchings of
/// the active set; the final matching is truncated so the emitted CX
/// count equals the budget exactly, unless the depth cap lands first.
fn build_layers(
    active: &[usize],
    cx_budget: usize,
    depth_cap: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Gate> {
    let w = active.len();
    let mut gates = Vec::new();
    let mut depth = 0usize;
    let mut emitted = 0usize;
    loop {
        for &q in active {
            let angles = [
                rng.random_range(0.0..TAU),
                rng.random_range(0.0..TAU),
                rng.random_range(0.0..TAU),
            ];
            gates.push(Gate::Rot1q { q, angles });
        }
        depth += 1;
        if depth >= depth_cap || emitted >= cx_budget || w < 2 {
            break;
        }

        let mut shuffled: Vec<usize> = active.to_vec();
        shuffled.shuffle(rng);
        let layer = (w / 2).min(cx_budget - emitted);
        for pair in 0..layer {
            gates.push(Gate::Cx { control: shuffled[2 * pair], target: shuffled[2 * pair + 1] });
        }
        emitted += layer;
        depth += 1;
        if depth >= depth_cap || emitted >= cx_budget {
            break;
        }
    }
    gates
}

/// Generate a pool of `m` circuits. The per-circuit seed is derived from
/// `(master_seed, pool_index, circuit_index)`.
pub fn gen_pool(
    n_qubits: usize,
    m: usize,
    master_seed: u64,
    pool_index: usize,
    cfg: &CircuitCfg,
) -> Result<CircuitPool> {
    if m == 0 {
        return Err(Error::InvalidInput("a pool needs at least one circuit".into()));
    }
    let circuits = (0..m)
        .map(|i| {
            let s = seed::derive(master_seed, "circuit", &[pool_index as u64, i as u64]);
            gen_circuit(n_qubits, s, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CircuitPool { n_qubits, pool_index, master_seed, cfg: *cfg, circuits })
}
