//! Model fragments shared by the three stages: flow and voltage variables,
//! nodal balances, voltage drops and the margin epigraph rows.

use crate::lp::{LinearProgram, Relation, VarId};
use crate::netmodel::{Network, SystemState};

/// Objective weights on the two epigraph terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermWeights {
    pub line: f64,
    pub node: f64,
}

impl Default for TermWeights {
    fn default() -> Self {
        TermWeights {
            line: 1.0,
            node: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowVars {
    /// `[line][hour]`
    pub pf: Vec<Vec<VarId>>,
    pub qf: Vec<Vec<VarId>>,
    /// `[node][hour]`
    pub v: Vec<Vec<VarId>>,
}

/// Adds pf, qf and v for every hour. With `boxed` the flow and voltage limits
/// become variable bounds; otherwise the variables are free. The substation
/// voltage is fixed at 1.0 either way.
pub(crate) fn add_flow_vars(lp: &mut LinearProgram, net: &Network, boxed: bool) -> FlowVars {
    let hours = net.horizon();
    let bounds = |a: f64, b: f64| {
        if boxed {
            (a, b)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    };
    let mut pf = Vec::with_capacity(net.num_lines());
    let mut qf = Vec::with_capacity(net.num_lines());
    for line in &net.case.lines {
        let (pl, pu) = bounds(line.pf_min, line.pf_max);
        let (ql, qu) = bounds(line.qf_min, line.qf_max);
        pf.push(
            (0..hours)
                .map(|t| lp.add_var(format!("pf[l{},t{t}]", line.id), pl, pu))
                .collect(),
        );
        qf.push(
            (0..hours)
                .map(|t| lp.add_var(format!("qf[l{},t{t}]", line.id), ql, qu))
                .collect(),
        );
    }
    let mut v = Vec::with_capacity(net.num_nodes());
    for (i, node) in net.case.nodes.iter().enumerate() {
        let (vl, vu) = if i == net.substation_node {
            (1.0, 1.0)
        } else {
            bounds(node.v_min * node.v_min, node.v_max * node.v_max)
        };
        v.push(
            (0..hours)
                .map(|t| lp.add_var(format!("v[n{},t{t}]", node.id), vl, vu))
                .collect(),
        );
    }
    FlowVars { pf, qf, v }
}

/// `v_from - v_to - 2 r pf - 2 x qf = 0` on every line and hour.
pub(crate) fn add_voltage_drops(lp: &mut LinearProgram, net: &Network, vars: &FlowVars) {
    for (l, line) in net.case.lines.iter().enumerate() {
        for t in 0..net.horizon() {
            lp.add_constraint(
                format!("vdrop[l{},t{t}]", line.id),
                vec![
                    (vars.v[net.line_from[l]][t], 1.0),
                    (vars.v[net.line_to[l]][t], -1.0),
                    (vars.pf[l][t], -2.0 * line.r),
                    (vars.qf[l][t], -2.0 * line.x),
                ],
                Relation::Eq,
                0.0,
            );
        }
    }
}

/// Injections into one node at one hour: variable terms plus a constant.
#[derive(Debug, Default)]
pub(crate) struct Injection {
    pub p_terms: Vec<(VarId, f64)>,
    pub p_const: f64,
    pub q_terms: Vec<(VarId, f64)>,
    pub q_const: f64,
}

/// Active and reactive balance rows:
/// `inflow - outflow + injection = demand` for every node and hour.
pub(crate) fn add_balances(
    lp: &mut LinearProgram,
    net: &Network,
    vars: &FlowVars,
    mut injection: impl FnMut(usize, usize) -> Injection,
) {
    let mut inflow = vec![Vec::new(); net.num_nodes()];
    let mut outflow = vec![Vec::new(); net.num_nodes()];
    for l in 0..net.num_lines() {
        inflow[net.line_to[l]].push(l);
        outflow[net.line_from[l]].push(l);
    }
    for (i, node) in net.case.nodes.iter().enumerate() {
        for t in 0..net.horizon() {
            let inj = injection(i, t);
            for (flows, mut terms, constant, demand, tag) in [
                (&vars.pf, inj.p_terms, inj.p_const, net.p_demand[i][t], "p"),
                (&vars.qf, inj.q_terms, inj.q_const, net.q_demand[i][t], "q"),
            ] {
                terms.extend(inflow[i].iter().map(|&l| (flows[l][t], 1.0)));
                terms.extend(outflow[i].iter().map(|&l| (flows[l][t], -1.0)));
                lp.add_constraint(
                    format!("{tag}bal[n{},t{t}]", node.id),
                    terms,
                    Relation::Eq,
                    demand - constant,
                );
            }
        }
    }
}

/// Lazy epigraph rows tying `line_term` and `node_term` to every margin.
/// `Relation::Le` gives `term <= phi` (an infimum), `Relation::Ge` gives
/// `term >= phi` (a supremum).
pub(crate) fn add_margin_epigraph(
    lp: &mut LinearProgram,
    net: &Network,
    vars: &FlowVars,
    line_term: VarId,
    node_term: VarId,
    rel: Relation,
) {
    for (l, line) in net.case.lines.iter().enumerate() {
        for t in 0..net.horizon() {
            let (pf, qf) = (vars.pf[l][t], vars.qf[l][t]);
            let rows = [
                (1, pf, -1.0, -line.pf_max),
                (2, pf, 1.0, line.pf_min),
                (3, qf, -1.0, -line.qf_max),
                (4, qf, 1.0, line.qf_min),
            ];
            for (k, x, a, rhs) in rows {
                lp.add_lazy_constraint(
                    format!("phi{k}[l{},t{t}]", line.id),
                    vec![(line_term, 1.0), (x, a)],
                    rel,
                    rhs,
                );
            }
        }
    }
    for (i, node) in net.case.nodes.iter().enumerate() {
        for t in 0..net.horizon() {
            let v = vars.v[i][t];
            let rows = [
                (5, -1.0, -node.v_max * node.v_max),
                (6, 1.0, node.v_min * node.v_min),
            ];
            for (k, a, rhs) in rows {
                lp.add_lazy_constraint(
                    format!("phi{k}[n{},t{t}]", node.id),
                    vec![(node_term, 1.0), (v, a)],
                    rel,
                    rhs,
                );
            }
        }
    }
}

impl FlowVars {
    pub fn state(&self, values: &[f64]) -> SystemState {
        let read = |m: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
            m.iter()
                .map(|row| row.iter().map(|v| values[v.0]).collect())
                .collect()
        };
        SystemState {
            pf: read(&self.pf),
            qf: read(&self.qf),
            v: read(&self.v),
        }
    }
}
