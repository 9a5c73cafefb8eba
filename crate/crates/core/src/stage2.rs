//! Worst-case attack on distributed generators with the dispatch fixed.

use crate::distflow::{
    add_balances, add_flow_vars, add_margin_epigraph, add_voltage_drops, FlowVars, Injection,
    TermWeights,
};
use crate::error::{Error, Result, Stage};
use crate::lp::{
    solve_lp, solve_milp, LinearProgram, LpSolution, LpStatus, Relation, Sense, VarId,
};
use crate::netmodel::{constraint_margins, Network, SystemState, ViolationReport};
use crate::stage1::DispatchSolution;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AttackOptions {
    /// Restrict attack fractions to {0, 1}.
    pub binary_attack: bool,
    pub weights: TermWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackVector {
    /// Case indices of the attackable generators, aligned with `y`.
    pub generators: Vec<usize>,
    /// Attack fraction per attackable generator per hour.
    pub y: Vec<Vec<f64>>,
    pub budget_k: f64,
}

impl AttackVector {
    /// Attack fraction applied to generator `g` (case index) at `hour`.
    pub fn fraction(&self, g: usize, hour: usize) -> f64 {
        self.generators
            .iter()
            .position(|&a| a == g)
            .map_or(0.0, |a| self.y[a][hour])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackAssessment {
    pub attack: AttackVector,
    pub p_sub: Vec<f64>,
    pub q_sub: Vec<f64>,
    pub state: SystemState,
    pub violations: ViolationReport,
    pub objective_value: f64,
    pub inf_line_term: f64,
    pub inf_node_term: f64,
}

#[derive(Debug, Clone)]
pub struct AttackModel {
    pub lp: LinearProgram,
    pub y: Vec<Vec<VarId>>,
    pub p_sub: Vec<VarId>,
    pub q_sub: Vec<VarId>,
    pub flows: FlowVars,
    pub t_line: VarId,
    pub t_node: VarId,
    pub generators: Vec<usize>,
}

pub fn build_attack_model(
    net: &Network,
    dispatch: &DispatchSolution,
    k: f64,
    options: &AttackOptions,
) -> AttackModel {
    let hours = net.horizon();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let attackable = net.attackable_generators();
    let mut y = Vec::with_capacity(attackable.len());
    for &g in &attackable {
        let gen = &net.case.generators[g];
        let row: Vec<VarId> = (0..hours)
            .map(|t| {
                let name = format!("y[n{},t{t}]", gen.node);
                if options.binary_attack {
                    lp.add_binary(name)
                } else {
                    lp.add_var(name, 0.0, 1.0)
                }
            })
            .collect();
        for (t, &var) in row.iter().enumerate() {
            let lost = gen.cost * dispatch.p_g[g][t];
            lp.objective_offset += lost;
            lp.set_cost(var, -lost);
        }
        y.push(row);
    }
    let sub = &net.case.generators[net.substation];
    let p_sub: Vec<VarId> = (0..hours)
        .map(|t| lp.add_var(format!("psub[t{t}]"), sub.p_min, sub.p_max_at(t)))
        .collect();
    let q_sub: Vec<VarId> = (0..hours)
        .map(|t| lp.add_var(format!("qsub[t{t}]"), sub.q_min, sub.q_max))
        .collect();
    for &var in &p_sub {
        lp.set_cost(var, sub.cost);
    }
    let flows = add_flow_vars(&mut lp, net, false);
    let t_line = lp.add_free_var("t_line");
    let t_node = lp.add_free_var("t_node");
    lp.set_cost(t_line, options.weights.line);
    lp.set_cost(t_node, options.weights.node);

    add_balances(&mut lp, net, &flows, |i, t| {
        if i == net.substation_node {
            return Injection {
                p_terms: vec![(p_sub[t], 1.0)],
                q_terms: vec![(q_sub[t], 1.0)],
                ..Injection::default()
            };
        }
        let Some(g) = net.generator_at[i] else {
            return Injection::default();
        };
        let (p, q) = (dispatch.p_g[g][t], dispatch.q_g[g][t]);
        // p (1 - y) = p - p y
        let mut inj = Injection {
            p_const: p,
            q_const: q,
            ..Injection::default()
        };
        if let Some(a) = attackable.iter().position(|&x| x == g) {
            inj.p_terms.push((y[a][t], -p));
            inj.q_terms.push((y[a][t], -q));
        }
        inj
    });
    add_voltage_drops(&mut lp, net, &flows);
    if !attackable.is_empty() {
        for t in 0..hours {
            lp.add_constraint(
                format!("budget[t{t}]"),
                y.iter().map(|row| (row[t], 1.0)).collect(),
                Relation::Le,
                k,
            );
        }
    }
    add_margin_epigraph(&mut lp, net, &flows, t_line, t_node, Relation::Le);
    AttackModel {
        lp,
        y,
        p_sub,
        q_sub,
        flows,
        t_line,
        t_node,
        generators: attackable,
    }
}

pub(crate) fn expect_optimal(
    sol: LpSolution,
    stage: Stage,
    hint: &'static str,
) -> Result<LpSolution> {
    if sol.status == LpStatus::Optimal {
        Ok(sol)
    } else {
        Err(Error::NotSolved {
            stage,
            status: sol.status,
            hint: Some(hint),
        })
    }
}

/// Finds the attack within budget `k` per hour that maximizes cost plus the
/// infimum margin terms.
pub fn assess_worst_attack(
    net: &Network,
    dispatch: &DispatchSolution,
    k: f64,
    options: &AttackOptions,
) -> Result<AttackAssessment> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::Input(format!(
            "attack budget must be a non-negative number, got {k}"
        )));
    }
    let model = build_attack_model(net, dispatch, k, options);
    let solved = if options.binary_attack {
        solve_milp(&model.lp)
    } else {
        solve_lp(&model.lp)
    };
    let sol = solved.map_err(|source| Error::Solver {
        stage: Stage::Attack,
        source,
    })?;
    let sol = expect_optimal(
        sol,
        Stage::Attack,
        "check the substation power box in the case file",
    )?;
    let state = model.flows.state(&sol.values);
    let violations = constraint_margins(net, &state);
    let read = |vars: &[VarId]| vars.iter().map(|&v| sol.value(v)).collect::<Vec<_>>();
    Ok(AttackAssessment {
        attack: AttackVector {
            generators: model.generators.clone(),
            y: model.y.iter().map(|row| read(row)).collect(),
            budget_k: k,
        },
        p_sub: read(&model.p_sub),
        q_sub: read(&model.q_sub),
        state,
        violations,
        objective_value: sol.objective_value,
        inf_line_term: sol.value(model.t_line),
        inf_node_term: sol.value(model.t_node),
    })
}

impl AttackAssessment {
    /// Concatenates hour blocks. Objectives add; the epigraph terms take the
    /// minimum over blocks, as they would over a joint horizon.
    pub fn concat(net: &Network, parts: &[AttackAssessment]) -> AttackAssessment {
        let mut out = parts[0].clone();
        for part in &parts[1..] {
            for (a, b) in out.attack.y.iter_mut().zip(&part.attack.y) {
                a.extend_from_slice(b);
            }
            out.p_sub.extend_from_slice(&part.p_sub);
            out.q_sub.extend_from_slice(&part.q_sub);
            out.state.extend(&part.state);
            out.objective_value += part.objective_value;
            out.inf_line_term = out.inf_line_term.min(part.inf_line_term);
            out.inf_node_term = out.inf_node_term.min(part.inf_node_term);
        }
        out.violations = constraint_margins(net, &out.state);
        out
    }
}
