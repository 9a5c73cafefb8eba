//! Base-case economic dispatch over the linearized DistFlow model.

use crate::distflow::{add_balances, add_flow_vars, add_voltage_drops, FlowVars, Injection};
use crate::error::{Error, Result, Stage};
use crate::lp::{solve_lp, LinearProgram, LpSolution, LpStatus, Relation, Sense, VarId};
use crate::netmodel::{Network, SystemState};

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSolution {
    /// Active output per generator (case order) per hour, pu. Zero for
    /// out-of-service units.
    pub p_g: Vec<Vec<f64>>,
    pub q_g: Vec<Vec<f64>>,
    pub state: SystemState,
    pub total_cost: f64,
    /// `cost * p_g` per generator per hour, $.
    pub hourly_cost: Vec<Vec<f64>>,
}

impl DispatchSolution {
    /// Concatenates hour blocks in order.
    pub fn concat(parts: &[DispatchSolution]) -> DispatchSolution {
        let mut out = parts[0].clone();
        for part in &parts[1..] {
            for (a, b) in out.p_g.iter_mut().zip(&part.p_g) {
                a.extend_from_slice(b);
            }
            for (a, b) in out.q_g.iter_mut().zip(&part.q_g) {
                a.extend_from_slice(b);
            }
            for (a, b) in out.hourly_cost.iter_mut().zip(&part.hourly_cost) {
                a.extend_from_slice(b);
            }
            out.state.extend(&part.state);
            out.total_cost += part.total_cost;
        }
        out
    }
}

/// The Stage-1 LP with handles to its variables.
#[derive(Debug, Clone)]
pub struct DispatchModel {
    pub lp: LinearProgram,
    /// `None` for out-of-service generators.
    pub p_g: Vec<Option<Vec<VarId>>>,
    pub q_g: Vec<Option<Vec<VarId>>>,
    pub flows: FlowVars,
}

pub fn build_base_opf(net: &Network) -> DispatchModel {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let hours = net.horizon();
    let mut p_g = Vec::with_capacity(net.case.generators.len());
    let mut q_g = Vec::with_capacity(net.case.generators.len());
    for g in &net.case.generators {
        if !g.in_service {
            p_g.push(None);
            q_g.push(None);
            continue;
        }
        let p: Vec<VarId> = (0..hours)
            .map(|t| lp.add_var(format!("pg[n{},t{t}]", g.node), g.p_min, g.p_max_at(t)))
            .collect();
        for &var in &p {
            lp.set_cost(var, g.cost);
        }
        let q: Vec<VarId> = (0..hours)
            .map(|t| lp.add_var(format!("qg[n{},t{t}]", g.node), g.q_min, g.q_max))
            .collect();
        p_g.push(Some(p));
        q_g.push(Some(q));
    }
    let flows = add_flow_vars(&mut lp, net, true);
    add_balances(&mut lp, net, &flows, |i, t| match net.generator_at[i] {
        Some(g) => Injection {
            p_terms: vec![(p_g[g].as_ref().unwrap()[t], 1.0)],
            q_terms: vec![(q_g[g].as_ref().unwrap()[t], 1.0)],
            ..Injection::default()
        },
        None => Injection::default(),
    });
    add_voltage_drops(&mut lp, net, &flows);
    DispatchModel {
        lp,
        p_g,
        q_g,
        flows,
    }
}

fn solve_dispatch_lp(lp: &LinearProgram) -> Result<LpSolution> {
    let sol = solve_lp(lp).map_err(|source| Error::Solver {
        stage: Stage::Dispatch,
        source,
    })?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::NotSolved {
            stage: Stage::Dispatch,
            status: sol.status,
            hint: Some("demand cannot be served within generation and network limits"),
        });
    }
    Ok(sol)
}

/// Reactive output carries no cost, so the cost optimum leaves it
/// undetermined. Among the cost-optimal dispatches, pick the one that moves
/// the least reactive power over the lines (total |qf|).
fn settle_reactive(model: &DispatchModel, first: &LpSolution) -> LinearProgram {
    let mut lp = model.lp.clone();
    // Hours are decoupled here, so each hour's cost is capped separately.
    let hours = model.flows.v.first().map_or(0, Vec::len);
    for t in 0..hours {
        let mut row = Vec::new();
        let mut cost = 0.0;
        for vars in model.p_g.iter().flatten() {
            let v = vars[t];
            row.push((v, lp.objective[v.0]));
            cost += lp.objective[v.0] * first.value(v);
        }
        lp.add_constraint(format!("cost_cap[t{t}]"), row, Relation::Le, cost);
    }
    for vars in model.p_g.iter().flatten() {
        for &v in vars {
            lp.set_cost(v, 0.0);
        }
    }
    for row in &model.flows.qf {
        for &q in row {
            let a = lp.add_var(
                format!("abs_{}", lp.variables[q.0].name),
                0.0,
                f64::INFINITY,
            );
            lp.set_cost(a, 1.0);
            lp.add_constraint(
                format!("abs_hi_{}", q.0),
                vec![(a, 1.0), (q, -1.0)],
                Relation::Ge,
                0.0,
            );
            lp.add_constraint(
                format!("abs_lo_{}", q.0),
                vec![(a, 1.0), (q, 1.0)],
                Relation::Ge,
                0.0,
            );
        }
    }
    lp
}

/// Minimum-cost dispatch for every hour of the horizon.
pub fn solve_base_opf(net: &Network) -> Result<DispatchSolution> {
    let model = build_base_opf(net);
    let first = solve_dispatch_lp(&model.lp)?;
    let sol = solve_dispatch_lp(&settle_reactive(&model, &first))?;
    let hours = net.horizon();
    let read = |vars: &Option<Vec<VarId>>| match vars {
        Some(v) => v.iter().map(|&x| sol.value(x)).collect(),
        None => vec![0.0; hours],
    };
    let p_g: Vec<Vec<f64>> = model.p_g.iter().map(read).collect();
    let q_g = model.q_g.iter().map(read).collect();
    let hourly_cost: Vec<Vec<f64>> = net
        .case
        .generators
        .iter()
        .zip(&p_g)
        .map(|(g, p)| p.iter().map(|x| g.cost * x).collect())
        .collect();
    Ok(DispatchSolution {
        p_g,
        q_g,
        state: model.flows.state(&sol.values),
        total_cost: hourly_cost.iter().flatten().sum(),
        hourly_cost,
    })
}
