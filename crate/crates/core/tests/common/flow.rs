//! Closed-form linearized DistFlow on a radial feeder, written against the
//! raw case data so it shares no code with the library's model builders.

use std::collections::VecDeque;

use triopf::{NetworkCase, SystemState};

/// Flows and squared voltages from nodal generation (case node order) and
/// the case demand. The substation absorbs the imbalance; its voltage is 1.
pub fn tree_sweep(
    case: &NetworkCase,
    sub_node: u32,
    injection_p: &[Vec<f64>],
    injection_q: &[Vec<f64>],
) -> SystemState {
    let n = case.nodes.len();
    let hours = case.horizon_hours;
    let idx = |id: u32| case.nodes.iter().position(|x| x.id == id).unwrap();
    let root = idx(sub_node);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (l, line) in case.lines.iter().enumerate() {
        adj[idx(line.from)].push(l);
        adj[idx(line.to)].push(l);
    }
    // parent-first order and, per node, the line to its parent
    let mut order = vec![root];
    let mut up: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &l in &adj[u] {
            let (a, b) = (idx(case.lines[l].from), idx(case.lines[l].to));
            let w = if a == u { b } else { a };
            if !seen[w] {
                seen[w] = true;
                up[w] = Some(l);
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    let mut state = SystemState::flat(case.lines.len(), n, hours);
    for t in 0..hours {
        // subtree net withdrawal, children before parents
        let mut sub_p: Vec<f64> = (0..n).map(|i| -injection_p[i][t]).collect();
        let mut sub_q: Vec<f64> = (0..n).map(|i| -injection_q[i][t]).collect();
        for row in &case.demand {
            sub_p[idx(row.node)] += row.p[t];
            sub_q[idx(row.node)] += row.q[t];
        }
        for &w in order.iter().rev() {
            if let Some(l) = up[w] {
                let line = &case.lines[l];
                let parent = if idx(line.from) == w {
                    idx(line.to)
                } else {
                    idx(line.from)
                };
                // flow in the from -> to direction
                let sign = if idx(line.to) == w { 1.0 } else { -1.0 };
                state.pf[l][t] = sign * sub_p[w];
                state.qf[l][t] = sign * sub_q[w];
                sub_p[parent] += sub_p[w];
                sub_q[parent] += sub_q[w];
            }
        }
        for &w in &order {
            match up[w] {
                None => state.v[w][t] = 1.0,
                Some(l) => {
                    let line = &case.lines[l];
                    let drop = 2.0 * (line.r * state.pf[l][t] + line.x * state.qf[l][t]);
                    let from = idx(line.from);
                    let to = idx(line.to);
                    if to == w {
                        state.v[w][t] = state.v[from][t] - drop;
                    } else {
                        state.v[w][t] = state.v[to][t] + drop;
                    }
                }
            }
        }
    }
    state
}

/// Largest |inflow - outflow + injection - demand| over nodes and hours,
/// for active and reactive balances.
pub fn balance_residual(
    case: &NetworkCase,
    state: &SystemState,
    injection_p: &[Vec<f64>],
    injection_q: &[Vec<f64>],
) -> f64 {
    let idx = |id: u32| case.nodes.iter().position(|x| x.id == id).unwrap();
    let mut worst: f64 = 0.0;
    for t in 0..case.horizon_hours {
        let mut net_p = vec![0.0; case.nodes.len()];
        let mut net_q = vec![0.0; case.nodes.len()];
        for (l, line) in case.lines.iter().enumerate() {
            net_p[idx(line.to)] += state.pf[l][t];
            net_p[idx(line.from)] -= state.pf[l][t];
            net_q[idx(line.to)] += state.qf[l][t];
            net_q[idx(line.from)] -= state.qf[l][t];
        }
        for row in &case.demand {
            let i = idx(row.node);
            worst = worst
                .max((net_p[i] + injection_p[i][t] - row.p[t]).abs())
                .max((net_q[i] + injection_q[i][t] - row.q[t]).abs());
        }
    }
    worst
}

/// Largest |v_from - v_to - 2 (r pf + x qf)| over lines and hours.
pub fn voltage_drop_residual(case: &NetworkCase, state: &SystemState) -> f64 {
    let idx = |id: u32| case.nodes.iter().position(|x| x.id == id).unwrap();
    let mut worst: f64 = 0.0;
    for (l, line) in case.lines.iter().enumerate() {
        for t in 0..case.horizon_hours {
            let lhs = state.v[idx(line.from)][t] - state.v[idx(line.to)][t];
            let rhs = 2.0 * (line.r * state.pf[l][t] + line.x * state.qf[l][t]);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// Per node and hour, the injection of whatever generator sits there
/// according to `per_gen` (case-order generator values).
pub fn generator_injection(case: &NetworkCase, per_gen: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; case.horizon_hours]; case.nodes.len()];
    for (g, gen) in case.generators.iter().enumerate() {
        if !gen.in_service {
            continue;
        }
        let i = case.nodes.iter().position(|x| x.id == gen.node).unwrap();
        for t in 0..case.horizon_hours {
            out[i][t] += per_gen[g][t];
        }
    }
    out
}

/// (min, max) over the line families and (min, max) over the node
/// families, computed straight from the case limits.
pub fn margin_extremes(case: &NetworkCase, state: &SystemState) -> ((f64, f64), (f64, f64)) {
    let mut line = (f64::INFINITY, f64::NEG_INFINITY);
    let mut node = (f64::INFINITY, f64::NEG_INFINITY);
    let push = |acc: &mut (f64, f64), x: f64| {
        acc.0 = acc.0.min(x);
        acc.1 = acc.1.max(x);
    };
    for (l, lim) in case.lines.iter().enumerate() {
        for t in 0..case.horizon_hours {
            let (pf, qf) = (state.pf[l][t], state.qf[l][t]);
            for m in [
                pf - lim.pf_max,
                lim.pf_min - pf,
                qf - lim.qf_max,
                lim.qf_min - qf,
            ] {
                push(&mut line, m);
            }
        }
    }
    for (i, n) in case.nodes.iter().enumerate() {
        for t in 0..case.horizon_hours {
            let v = state.v[i][t];
            for m in [v - n.v_max * n.v_max, n.v_min * n.v_min - v] {
                push(&mut node, m);
            }
        }
    }
    (line, node)
}

/// Per-generator outputs after an attack: attacked units keep `1 - y` of
/// their dispatch, the substation takes `sub`.
pub fn attacked_outputs(
    case: &NetworkCase,
    dispatch: &[Vec<f64>],
    fraction: impl Fn(usize, usize) -> f64,
    sub: &[f64],
) -> Vec<Vec<f64>> {
    case.generators
        .iter()
        .enumerate()
        .map(|(g, gen)| {
            (0..case.horizon_hours)
                .map(|t| {
                    if gen.is_substation() {
                        sub[t]
                    } else {
                        dispatch[g][t] * (1.0 - fraction(g, t))
                    }
                })
                .collect()
        })
        .collect()
}

/// Adds `extra[unit][t]` at each storage node.
pub fn add_storage(case: &NetworkCase, injection: &mut [Vec<f64>], extra: &[Vec<f64>]) {
    for (u, unit) in case.storage.iter().enumerate() {
        let i = case.nodes.iter().position(|x| x.id == unit.node).unwrap();
        for t in 0..case.horizon_hours {
            injection[i][t] += extra[u][t];
        }
    }
}
