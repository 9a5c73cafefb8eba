use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::{NetworkCase, NodeId};

/// One failed case invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseViolation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for CaseViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// A validated feeder with precomputed indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub case: NetworkCase,
    node_index: BTreeMap<NodeId, usize>,
    /// Endpoint node indices per line.
    pub line_from: Vec<usize>,
    pub line_to: Vec<usize>,
    /// Index into `case.generators` of the substation.
    pub substation: usize,
    pub substation_node: usize,
    /// In-service generator at each node index.
    pub generator_at: Vec<Option<usize>>,
    pub storage_at: Vec<Option<usize>>,
    /// Demand per node index per hour, pu.
    pub p_demand: Vec<Vec<f64>>,
    pub q_demand: Vec<Vec<f64>>,
    /// Node indices in breadth-first order from the substation.
    pub bfs_order: Vec<usize>,
    /// Line feeding each node (None for the substation node).
    pub parent_line: Vec<Option<usize>>,
}

impl Network {
    pub fn horizon(&self) -> usize {
        self.case.horizon_hours
    }

    pub fn num_nodes(&self) -> usize {
        self.case.nodes.len()
    }

    pub fn num_lines(&self) -> usize {
        self.case.lines.len()
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.node_index.get(&id).copied()
    }

    /// In-service, non-substation generators in case order.
    pub fn dispatchable_generators(&self) -> impl Iterator<Item = usize> + '_ {
        self.case
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.in_service && !g.is_substation())
            .map(|(k, _)| k)
    }

    /// In-service generators the attacker may target.
    pub fn attackable_generators(&self) -> Vec<usize> {
        self.dispatchable_generators()
            .filter(|&k| self.case.generators[k].attackable)
            .collect()
    }

    pub fn generator_node(&self, g: usize) -> usize {
        self.node_index[&self.case.generators[g].node]
    }

    pub fn storage_node(&self, s: usize) -> usize {
        self.node_index[&self.case.storage[s].node]
    }
}

struct Collector(Vec<CaseViolation>);

impl Collector {
    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.0.push(CaseViolation {
            location: location.into(),
            message: message.into(),
        });
    }

    fn finite(&mut self, location: &str, field: &str, x: f64) {
        if !x.is_finite() {
            self.push(location, format!("{field} is not finite"));
        }
    }
}

/// Checks every case invariant, reporting all failures at once.
pub fn validate_case(case: NetworkCase) -> Result<Network, Vec<CaseViolation>> {
    let mut errs = Collector(Vec::new());
    let horizon = case.horizon_hours;
    if horizon == 0 {
        errs.push("case", "horizon_hours must be positive");
    }

    let mut node_index = BTreeMap::new();
    for (i, n) in case.nodes.iter().enumerate() {
        let loc = format!("node {}", n.id);
        if node_index.insert(n.id, i).is_some() {
            errs.push(&loc, "duplicate node id");
        }
        errs.finite(&loc, "v_min", n.v_min);
        errs.finite(&loc, "v_max", n.v_max);
        if !(n.v_min > 0.0 && n.v_min < n.v_max) {
            errs.push(
                &loc,
                format!(
                    "voltage bounds must satisfy 0 < v_min < v_max (got {} and {})",
                    n.v_min, n.v_max
                ),
            );
        }
    }
    if case.nodes.is_empty() {
        errs.push("case", "no nodes");
    }

    let mut line_ids = BTreeSet::new();
    let mut line_from = Vec::with_capacity(case.lines.len());
    let mut line_to = Vec::with_capacity(case.lines.len());
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); case.nodes.len()];
    for (l, line) in case.lines.iter().enumerate() {
        let loc = format!("line {}", line.id);
        if !line_ids.insert(line.id) {
            errs.push(&loc, "duplicate line id");
        }
        for (field, x) in [
            ("r", line.r),
            ("x", line.x),
            ("pf_min", line.pf_min),
            ("pf_max", line.pf_max),
            ("qf_min", line.qf_min),
            ("qf_max", line.qf_max),
        ] {
            errs.finite(&loc, field, x);
        }
        if line.r < 0.0 || line.x < 0.0 {
            errs.push(&loc, "resistance and reactance must be non-negative");
        }
        if line.pf_min > line.pf_max {
            errs.push(&loc, "pf_min exceeds pf_max");
        }
        if line.qf_min > line.qf_max {
            errs.push(&loc, "qf_min exceeds qf_max");
        }
        if line.from == line.to {
            errs.push(&loc, "line connects a node to itself");
        }
        let from = node_index.get(&line.from).copied();
        let to = node_index.get(&line.to).copied();
        if from.is_none() {
            errs.push(&loc, format!("from-node {} does not exist", line.from));
        }
        if to.is_none() {
            errs.push(&loc, format!("to-node {} does not exist", line.to));
        }
        let (f, t) = (from.unwrap_or(usize::MAX), to.unwrap_or(usize::MAX));
        line_from.push(f);
        line_to.push(t);
        if f != usize::MAX && t != usize::MAX && f != t {
            adjacency[f].push((t, l));
            adjacency[t].push((f, l));
        }
    }

    let n_nodes = case.nodes.len();
    let mut generator_at = vec![None; n_nodes];
    let mut substations = Vec::new();
    for (k, g) in case.generators.iter().enumerate() {
        let loc = format!("generator at node {}", g.node);
        for (field, x) in [
            ("cost", g.cost),
            ("p_min", g.p_min),
            ("p_max", g.p_max),
            ("q_min", g.q_min),
            ("q_max", g.q_max),
        ] {
            errs.finite(&loc, field, x);
        }
        if g.p_min > g.p_max {
            errs.push(&loc, "p_min exceeds p_max");
        }
        if g.q_min > g.q_max {
            errs.push(&loc, "q_min exceeds q_max");
        }
        if g.is_substation() {
            if g.attackable {
                errs.push(&loc, "the substation cannot be attackable");
            }
            if g.in_service {
                substations.push(k);
            }
        }
        if let Some(profile) = &g.p_max_profile {
            if profile.len() != horizon {
                errs.push(
                    &loc,
                    format!(
                        "p_max_profile has {} entries for a {horizon}-hour horizon",
                        profile.len()
                    ),
                );
            }
            if profile.iter().any(|&p| !p.is_finite() || p < g.p_min) {
                errs.push(
                    &loc,
                    "p_max_profile values must be finite and at least p_min",
                );
            }
        }
        match node_index.get(&g.node) {
            None => errs.push(&loc, format!("node {} does not exist", g.node)),
            Some(&i) if g.in_service => {
                if generator_at[i].is_some() {
                    errs.push(&loc, "more than one in-service generator at this node");
                }
                generator_at[i] = Some(k);
            }
            Some(_) => {}
        }
    }
    match substations.len() {
        0 => errs.push("generators", "no substation"),
        1 => {}
        _ => errs.push("generators", "multiple substations"),
    }
    let substation = substations.first().copied().unwrap_or(0);
    let substation_node = case
        .generators
        .get(substation)
        .and_then(|g| node_index.get(&g.node).copied())
        .unwrap_or(0);
    if let Some(n) = case.nodes.get(substation_node) {
        if !(n.v_min <= 1.0 && 1.0 <= n.v_max) && !substations.is_empty() {
            errs.push(
                format!("node {}", n.id),
                "the substation node must admit the 1.0 pu reference voltage",
            );
        }
    }

    let mut storage_at = vec![None; n_nodes];
    for (s, u) in case.storage.iter().enumerate() {
        let loc = format!("storage at node {}", u.node);
        for (field, x) in [
            ("e_max", u.e_max),
            ("eta_ch", u.eta_ch),
            ("eta_dis", u.eta_dis),
            ("p_ch_min", u.p_ch_min),
            ("p_ch_max", u.p_ch_max),
            ("p_dis_min", u.p_dis_min),
            ("p_dis_max", u.p_dis_max),
            ("soc_min", u.soc_min),
            ("soc_max", u.soc_max),
            ("soc_init", u.soc_init),
            ("cost", u.cost),
        ] {
            errs.finite(&loc, field, x);
        }
        if u.e_max <= 0.0 {
            errs.push(&loc, "e_max must be positive");
        }
        if !(u.eta_ch > 0.0 && u.eta_ch <= 1.0 && u.eta_dis > 0.0 && u.eta_dis <= 1.0) {
            errs.push(&loc, "efficiencies must lie in (0, 1]");
        }
        if !(0.0 <= u.p_ch_min && u.p_ch_min <= u.p_ch_max) {
            errs.push(&loc, "charge bounds must satisfy 0 <= p_ch_min <= p_ch_max");
        }
        if !(0.0 <= u.p_dis_min && u.p_dis_min <= u.p_dis_max) {
            errs.push(
                &loc,
                "discharge bounds must satisfy 0 <= p_dis_min <= p_dis_max",
            );
        }
        if !(0.0 <= u.soc_min && u.soc_min <= u.soc_max && u.soc_max <= 1.0) {
            errs.push(&loc, "SOC bounds must satisfy 0 <= soc_min <= soc_max <= 1");
        }
        if u.soc_init < u.soc_min || u.soc_init > u.soc_max {
            errs.push(
                &loc,
                format!("soc_init {} lies outside [soc_min, soc_max]", u.soc_init),
            );
        }
        match node_index.get(&u.node) {
            None => errs.push(&loc, format!("node {} does not exist", u.node)),
            Some(&i) => {
                if i == substation_node && !substations.is_empty() {
                    errs.push(&loc, "storage cannot sit at the substation node");
                }
                if storage_at[i].is_some() {
                    errs.push(&loc, "more than one storage unit at this node");
                }
                storage_at[i] = Some(s);
            }
        }
    }

    let mut p_demand = vec![vec![0.0; horizon]; n_nodes];
    let mut q_demand = vec![vec![0.0; horizon]; n_nodes];
    let mut seen = vec![false; n_nodes];
    for row in &case.demand {
        let loc = format!("demand for node {}", row.node);
        let Some(&i) = node_index.get(&row.node) else {
            errs.push(&loc, "node does not exist");
            continue;
        };
        if seen[i] {
            errs.push(&loc, "duplicate demand row");
            continue;
        }
        seen[i] = true;
        if row.p.len() != horizon || row.q.len() != horizon {
            errs.push(
                &loc,
                format!(
                    "expected {horizon} hourly values for p and q (got {} and {})",
                    row.p.len(),
                    row.q.len()
                ),
            );
            continue;
        }
        if row.p.iter().chain(&row.q).any(|x| !x.is_finite()) {
            errs.push(&loc, "values must be finite");
            continue;
        }
        p_demand[i].clone_from(&row.p);
        q_demand[i].clone_from(&row.q);
    }
    for (i, n) in case.nodes.iter().enumerate() {
        if !seen[i] && node_index.get(&n.id) == Some(&i) {
            errs.push(format!("demand for node {}", n.id), "missing demand row");
        }
    }

    // Radiality: n - 1 lines and every node reachable from the substation.
    let mut bfs_order = Vec::with_capacity(n_nodes);
    let mut parent_line = vec![None; n_nodes];
    if n_nodes > 0 {
        if case.lines.len() + 1 != n_nodes {
            errs.push(
                "topology",
                format!(
                    "disconnected/non-radial: {} lines for {} nodes (a radial feeder needs {})",
                    case.lines.len(),
                    n_nodes,
                    n_nodes - 1
                ),
            );
        }
        let root = substation_node.min(n_nodes - 1);
        let mut visited = vec![false; n_nodes];
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(u) = queue.pop_front() {
            bfs_order.push(u);
            for &(w, l) in &adjacency[u] {
                if !visited[w] {
                    visited[w] = true;
                    parent_line[w] = Some(l);
                    queue.push_back(w);
                }
            }
        }
        if bfs_order.len() != n_nodes {
            let unreached: Vec<String> = case
                .nodes
                .iter()
                .enumerate()
                .filter(|&(i, _)| !visited[i])
                .map(|(_, n)| n.id.to_string())
                .collect();
            errs.push(
                "topology",
                format!(
                    "disconnected/non-radial: nodes {} unreachable from the substation",
                    unreached.join(", ")
                ),
            );
        }
    }

    if !errs.0.is_empty() {
        return Err(errs.0);
    }
    Ok(Network {
        case,
        node_index,
        line_from,
        line_to,
        substation,
        substation_node,
        generator_at,
        storage_at,
        p_demand,
        q_demand,
        bfs_order,
        parent_line,
    })
}

/// Line-by-node incidence matrices `(LF, TF)`: `LF[l][i] = 1` iff line `l`
/// leaves node `i`, `TF[l][i] = 1` iff it ends there.
pub fn incidence(net: &Network) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
    let n = net.num_nodes();
    let mut lf = vec![vec![0u8; n]; net.num_lines()];
    let mut tf = vec![vec![0u8; n]; net.num_lines()];
    for l in 0..net.num_lines() {
        lf[l][net.line_from[l]] = 1;
        tf[l][net.line_to[l]] = 1;
    }
    (lf, tf)
}
