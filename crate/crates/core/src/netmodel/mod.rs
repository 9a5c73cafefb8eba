//! Feeder description, validation and constraint margins.
//!
//! A [`NetworkCase`] is the raw, serializable description of a radial
//! feeder. [`validate_case`] checks it and produces a [`Network`], which adds
//! index maps and the per-node demand matrices every stage builder needs.

mod margins;
mod validate;

use serde::{Deserialize, Serialize};

pub use margins::{constraint_margins, PhiFamily, ViolationReport};
pub use validate::{incidence, validate_case, CaseViolation, Network};

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: NodeId,
    /// Voltage magnitude bounds, pu.
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: u32,
    pub from: NodeId,
    pub to: NodeId,
    pub r: f64,
    pub x: f64,
    pub pf_min: f64,
    pub pf_max: f64,
    pub qf_min: f64,
    pub qf_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Substation,
    Dispatchable,
    Pv,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub node: NodeId,
    pub kind: GeneratorKind,
    /// Active-power cost, $/pu.
    pub cost: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    #[serde(default)]
    pub attackable: bool,
    /// Out-of-service generators are treated as absent.
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub in_service: bool,
    /// Hourly replacement for `p_max` (PV availability).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max_profile: Option<Vec<f64>>,
}

impl Generator {
    pub fn is_substation(&self) -> bool {
        self.kind == GeneratorKind::Substation
    }

    pub fn p_max_at(&self, hour: usize) -> f64 {
        self.p_max_profile
            .as_ref()
            .map_or(self.p_max, |profile| profile[hour])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageUnit {
    pub node: NodeId,
    /// Energy capacity, pu·h.
    pub e_max: f64,
    pub eta_ch: f64,
    pub eta_dis: f64,
    pub p_ch_min: f64,
    pub p_ch_max: f64,
    pub p_dis_min: f64,
    pub p_dis_max: f64,
    /// State-of-charge bounds and initial value, fractions of `e_max`.
    pub soc_min: f64,
    pub soc_max: f64,
    pub soc_init: f64,
    /// Cost of net injected energy, $/pu.
    pub cost: f64,
}

/// Per-node hourly demand, pu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandRow {
    pub node: NodeId,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseValues {
    pub s_mva: f64,
    pub v_kv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkCase {
    pub name: String,
    pub base: BaseValues,
    pub horizon_hours: usize,
    pub nodes: Vec<Node>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub storage: Vec<StorageUnit>,
    pub demand: Vec<DemandRow>,
}

impl NetworkCase {
    /// Takes the generators at `nodes` out of service.
    pub fn with_generators_out_of_service(mut self, nodes: &[NodeId]) -> Self {
        for g in &mut self.generators {
            if nodes.contains(&g.node) && !g.is_substation() {
                g.in_service = false;
            }
        }
        self
    }

    /// Single-hour copy of the case at `hour`.
    pub fn hour_slice(&self, hour: usize) -> NetworkCase {
        let mut case = self.clone();
        case.horizon_hours = 1;
        for g in &mut case.generators {
            if let Some(profile) = &mut g.p_max_profile {
                *profile = vec![profile[hour]];
            }
        }
        for row in &mut case.demand {
            row.p = vec![row.p[hour]];
            row.q = vec![row.q[hour]];
        }
        case
    }
}

/// Power flows and squared voltages over the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    /// Active flow per line per hour, pu.
    pub pf: Vec<Vec<f64>>,
    /// Reactive flow per line per hour, pu.
    pub qf: Vec<Vec<f64>>,
    /// Squared voltage magnitude per node per hour, pu².
    pub v: Vec<Vec<f64>>,
}

impl SystemState {
    pub fn flat(lines: usize, nodes: usize, hours: usize) -> Self {
        SystemState {
            pf: vec![vec![0.0; hours]; lines],
            qf: vec![vec![0.0; hours]; lines],
            v: vec![vec![1.0; hours]; nodes],
        }
    }

    pub fn hours(&self) -> usize {
        self.v.first().map_or(0, Vec::len)
    }

    /// Voltage magnitude (√v) of node index `i` at `hour`.
    pub fn voltage_magnitude(&self, i: usize, hour: usize) -> f64 {
        self.v[i][hour].max(0.0).sqrt()
    }

    /// Appends the hours of `other` after those of `self`.
    pub fn extend(&mut self, other: &SystemState) {
        for (a, b) in self.pf.iter_mut().zip(&other.pf) {
            a.extend_from_slice(b);
        }
        for (a, b) in self.qf.iter_mut().zip(&other.qf) {
            a.extend_from_slice(b);
        }
        for (a, b) in self.v.iter_mut().zip(&other.v) {
            a.extend_from_slice(b);
        }
    }
}
