//! Small hand-built feeders.

use triopf::netmodel::{
    BaseValues, DemandRow, Generator, GeneratorKind, Line, Node, NodeId, StorageUnit,
};
use triopf::{validate_case, Network, NetworkCase};

pub const CASE33: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/case33.toml");

pub fn case33() -> Network {
    triopf::io::load_case(CASE33).expect("shipped case loads")
}

pub fn node(id: NodeId) -> Node {
    Node {
        id,
        v_min: 0.9,
        v_max: 1.1,
    }
}

pub fn line(id: u32, from: NodeId, to: NodeId, r: f64, x: f64) -> Line {
    Line {
        id,
        from,
        to,
        r,
        x,
        pf_min: -1.5,
        pf_max: 1.5,
        qf_min: -1.5,
        qf_max: 1.5,
    }
}

pub fn substation(node: NodeId) -> Generator {
    Generator {
        node,
        kind: GeneratorKind::Substation,
        cost: 25.0,
        p_min: 0.0,
        p_max: 5.0,
        q_min: -5.0,
        q_max: 5.0,
        attackable: false,
        in_service: true,
        p_max_profile: None,
    }
}

pub fn dg(node: NodeId, cost: f64, p_max: f64, attackable: bool) -> Generator {
    Generator {
        node,
        kind: GeneratorKind::Dispatchable,
        cost,
        p_min: 0.0,
        p_max,
        q_min: -0.5 * p_max,
        q_max: 0.5 * p_max,
        attackable,
        in_service: true,
        p_max_profile: None,
    }
}

pub fn ess(node: NodeId, p_max: f64, e_max: f64) -> StorageUnit {
    StorageUnit {
        node,
        e_max,
        eta_ch: 0.95,
        eta_dis: 0.9,
        p_ch_min: 0.0,
        p_ch_max: p_max,
        p_dis_min: 0.0,
        p_dis_max: p_max,
        soc_min: 0.1,
        soc_max: 1.0,
        soc_init: 0.5,
        cost: 20.0,
    }
}

pub fn demand(node: NodeId, p: Vec<f64>, q: Vec<f64>) -> DemandRow {
    DemandRow { node, p, q }
}

fn base() -> BaseValues {
    BaseValues {
        s_mva: 1.0,
        v_kv: 12.66,
    }
}

pub fn validated(case: NetworkCase) -> Network {
    validate_case(case).unwrap_or_else(|e| panic!("test feeder invalid: {e:?}"))
}

/// Substation at node 1, one line (r = x = 0.01) to node 2.
pub fn two_node(pd: f64, qd: f64) -> NetworkCase {
    NetworkCase {
        name: "two-node".into(),
        base: base(),
        horizon_hours: 1,
        nodes: vec![node(1), node(2)],
        lines: vec![line(1, 1, 2, 0.01, 0.01)],
        generators: vec![substation(1)],
        storage: vec![],
        demand: vec![
            demand(1, vec![0.0], vec![0.0]),
            demand(2, vec![pd], vec![qd]),
        ],
    }
}

/// Two-node feeder whose load of 2.0 pu is served locally by an attackable
/// DG at node 2. The line carries at most 1.5 pu.
pub fn two_node_attacked() -> NetworkCase {
    let mut case = two_node(2.0, 0.0);
    let mut gen = dg(2, 5.0, 2.0, true);
    gen.q_min = 0.0;
    gen.q_max = 0.0;
    case.generators.push(gen);
    case
}

/// Five nodes: 1-2, 2-3, 3-4, 2-5. Substation at 1, attackable DGs at
/// 3, 4 and 5, loads everywhere but the substation.
pub fn five_node(hours: usize) -> NetworkCase {
    let shape = |h: usize| 1.0 - 0.3 * (h % 2) as f64;
    let load = |p: f64, q: f64| -> (Vec<f64>, Vec<f64>) {
        (
            (0..hours).map(|h| p * shape(h)).collect(),
            (0..hours).map(|h| q * shape(h)).collect(),
        )
    };
    let rows = [(2, 0.3, 0.1), (3, 0.5, 0.2), (4, 0.6, 0.25), (5, 0.4, 0.15)];
    let mut demand_rows = vec![demand(1, vec![0.0; hours], vec![0.0; hours])];
    for (n, p, q) in rows {
        let (p, q) = load(p, q);
        demand_rows.push(demand(n, p, q));
    }
    NetworkCase {
        name: "five-node".into(),
        base: base(),
        horizon_hours: hours,
        nodes: (1..=5).map(node).collect(),
        lines: vec![
            line(1, 1, 2, 0.02, 0.015),
            line(2, 2, 3, 0.03, 0.02),
            line(3, 3, 4, 0.04, 0.03),
            line(4, 2, 5, 0.03, 0.025),
        ],
        generators: vec![
            substation(1),
            dg(3, 5.0, 0.6, true),
            dg(4, 10.0, 0.7, true),
            dg(5, 15.0, 0.5, true),
        ],
        storage: vec![],
        demand: demand_rows,
    }
}

/// Five-node feeder with two storage units and a daily load shape.
pub fn storage_toy(hours: usize) -> NetworkCase {
    let mut case = five_node(hours);
    for row in &mut case.demand {
        let (p0, q0) = (row.p[0], row.q[0]);
        for h in 0..hours {
            let f = 0.7
                + 0.5
                    * ((h as f64 - 6.0) * std::f64::consts::PI / 12.0)
                        .sin()
                        .max(0.0);
            row.p[h] = p0 * f;
            row.q[h] = q0 * f;
        }
    }
    case.storage = vec![ess(4, 0.3, 1.0), ess(5, 0.3, 1.0)];
    case
}
