//! Storage dispatch against a fixed attack.

use crate::distflow::{
    add_balances, add_flow_vars, add_margin_epigraph, add_voltage_drops, FlowVars, Injection,
    TermWeights,
};
use crate::error::{Error, Result, Stage};
use crate::lp::{solve_milp, LinearProgram, Relation, Sense, VarId};
use crate::netmodel::{constraint_margins, Network, SystemState, ViolationReport};
use crate::stage1::DispatchSolution;
use crate::stage2::{expect_optimal, AttackAssessment};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MitigationOptions {
    /// Require every margin to be non-positive instead of penalizing it.
    pub hard_limits: bool,
    pub weights: TermWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MitigationPlan {
    /// Per storage unit (case order) per hour.
    pub p_ch: Vec<Vec<f64>>,
    pub p_dis: Vec<Vec<f64>>,
    pub p_ess: Vec<Vec<f64>>,
    pub beta_ch: Vec<Vec<f64>>,
    pub beta_dis: Vec<Vec<f64>>,
    /// State of charge at the end of each hour, fraction of capacity.
    pub soc: Vec<Vec<f64>>,
    /// Initial state of charge per unit.
    pub soc_init: Vec<f64>,
    pub p_sub: Vec<f64>,
    pub q_sub: Vec<f64>,
    pub state: SystemState,
    pub violations: ViolationReport,
    pub objective_value: f64,
    pub sup_line_term: f64,
    pub sup_node_term: f64,
}

#[derive(Debug, Clone)]
pub struct StorageVars {
    pub p_ch: Vec<VarId>,
    pub p_dis: Vec<VarId>,
    pub p_ess: Vec<VarId>,
    pub beta_ch: Vec<VarId>,
    pub beta_dis: Vec<VarId>,
    pub soc: Vec<VarId>,
}

#[derive(Debug, Clone)]
pub struct MitigationModel {
    pub lp: LinearProgram,
    pub storage: Vec<StorageVars>,
    pub p_sub: Vec<VarId>,
    pub q_sub: Vec<VarId>,
    pub flows: FlowVars,
    pub s_line: VarId,
    pub s_node: VarId,
}

pub fn build_mitigation_model(
    net: &Network,
    dispatch: &DispatchSolution,
    attack: &AttackAssessment,
    options: &MitigationOptions,
) -> MitigationModel {
    let hours = net.horizon();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut storage = Vec::with_capacity(net.case.storage.len());
    for u in &net.case.storage {
        let n = u.node;
        let mut vars = StorageVars {
            p_ch: Vec::new(),
            p_dis: Vec::new(),
            p_ess: Vec::new(),
            beta_ch: Vec::new(),
            beta_dis: Vec::new(),
            soc: Vec::new(),
        };
        for t in 0..hours {
            let p_ch = lp.add_var(format!("pch[n{n},t{t}]"), 0.0, u.p_ch_max);
            let p_dis = lp.add_var(format!("pdis[n{n},t{t}]"), 0.0, u.p_dis_max);
            let p_ess = lp.add_free_var(format!("pess[n{n},t{t}]"));
            let b_ch = lp.add_binary(format!("bch[n{n},t{t}]"));
            let b_dis = lp.add_binary(format!("bdis[n{n},t{t}]"));
            let soc = lp.add_var(format!("soc[n{n},t{t}]"), u.soc_min, u.soc_max);
            lp.set_cost(p_ess, u.cost);
            lp.add_constraint(
                format!("pess_def[n{n},t{t}]"),
                vec![(p_ess, 1.0), (p_dis, -1.0), (p_ch, 1.0)],
                Relation::Eq,
                0.0,
            );
            let gates = [
                ("ch_max", p_ch, b_ch, u.p_ch_max, Relation::Le),
                ("ch_min", p_ch, b_ch, u.p_ch_min, Relation::Ge),
                ("dis_max", p_dis, b_dis, u.p_dis_max, Relation::Le),
                ("dis_min", p_dis, b_dis, u.p_dis_min, Relation::Ge),
            ];
            for (tag, p, b, limit, rel) in gates {
                if rel == Relation::Ge && limit == 0.0 {
                    continue;
                }
                lp.add_constraint(
                    format!("{tag}[n{n},t{t}]"),
                    vec![(p, 1.0), (b, -limit)],
                    rel,
                    0.0,
                );
            }
            lp.add_constraint(
                format!("excl[n{n},t{t}]"),
                vec![(b_ch, 1.0), (b_dis, 1.0)],
                Relation::Le,
                1.0,
            );
            // soc_t - soc_{t-1} - eta_ch p_ch / E + p_dis / (eta_dis E) = 0
            let mut terms = vec![
                (soc, 1.0),
                (p_ch, -u.eta_ch / u.e_max),
                (p_dis, 1.0 / (u.eta_dis * u.e_max)),
            ];
            let rhs = match vars.soc.last() {
                Some(&prev) => {
                    terms.push((prev, -1.0));
                    0.0
                }
                None => u.soc_init,
            };
            lp.add_constraint(format!("soc_bal[n{n},t{t}]"), terms, Relation::Eq, rhs);
            vars.p_ch.push(p_ch);
            vars.p_dis.push(p_dis);
            vars.p_ess.push(p_ess);
            vars.beta_ch.push(b_ch);
            vars.beta_dis.push(b_dis);
            vars.soc.push(soc);
        }
        storage.push(vars);
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
    let cap = if options.hard_limits {
        0.0
    } else {
        f64::INFINITY
    };
    let s_line = lp.add_var("s_line", f64::NEG_INFINITY, cap);
    let s_node = lp.add_var("s_node", f64::NEG_INFINITY, cap);
    lp.set_cost(s_line, options.weights.line);
    lp.set_cost(s_node, options.weights.node);

    add_balances(&mut lp, net, &flows, |i, t| {
        let mut inj = Injection::default();
        if i == net.substation_node {
            inj.p_terms.push((p_sub[t], 1.0));
            inj.q_terms.push((q_sub[t], 1.0));
        } else if let Some(g) = net.generator_at[i] {
            let keep = 1.0 - attack.attack.fraction(g, t);
            inj.p_const = dispatch.p_g[g][t] * keep;
            inj.q_const = dispatch.q_g[g][t] * keep;
        }
        if let Some(s) = net.storage_at[i] {
            // The same net storage injection enters both balances.
            inj.p_terms.push((storage[s].p_ess[t], 1.0));
            inj.q_terms.push((storage[s].p_ess[t], 1.0));
        }
        inj
    });
    add_voltage_drops(&mut lp, net, &flows);
    add_margin_epigraph(&mut lp, net, &flows, s_line, s_node, Relation::Ge);
    MitigationModel {
        lp,
        storage,
        p_sub,
        q_sub,
        flows,
        s_line,
        s_node,
    }
}

/// Schedules storage and substation purchases to minimize cost plus the
/// supremum margin terms under the given attack.
pub fn mitigate_attack(
    net: &Network,
    dispatch: &DispatchSolution,
    attack: &AttackAssessment,
    options: &MitigationOptions,
) -> Result<MitigationPlan> {
    let model = build_mitigation_model(net, dispatch, attack, options);
    let sol = solve_milp(&model.lp).map_err(|source| Error::Solver {
        stage: Stage::Mitigation,
        source,
    })?;
    let hint = if options.hard_limits {
        "the attack cannot be fully mitigated within limits; rerun without --hard-limits"
    } else {
        "check the substation power box in the case file"
    };
    let sol = expect_optimal(sol, Stage::Mitigation, hint)?;
    let state = model.flows.state(&sol.values);
    let violations = constraint_margins(net, &state);
    let read = |vars: &[VarId]| vars.iter().map(|&v| sol.value(v)).collect::<Vec<_>>();
    let per_unit = |f: fn(&StorageVars) -> &Vec<VarId>| {
        model.storage.iter().map(|s| read(f(s))).collect::<Vec<_>>()
    };
    Ok(MitigationPlan {
        p_ch: per_unit(|s| &s.p_ch),
        p_dis: per_unit(|s| &s.p_dis),
        p_ess: per_unit(|s| &s.p_ess),
        beta_ch: per_unit(|s| &s.beta_ch),
        beta_dis: per_unit(|s| &s.beta_dis),
        soc: per_unit(|s| &s.soc),
        soc_init: net.case.storage.iter().map(|u| u.soc_init).collect(),
        p_sub: read(&model.p_sub),
        q_sub: read(&model.q_sub),
        state,
        violations,
        objective_value: sol.objective_value,
        sup_line_term: sol.value(model.s_line),
        sup_node_term: sol.value(model.s_node),
    })
}

impl MitigationPlan {
    /// Concatenates hour blocks. Objectives add; the epigraph terms take the
    /// maximum over blocks.
    pub fn concat(net: &Network, parts: &[MitigationPlan]) -> MitigationPlan {
        let mut out = parts[0].clone();
        for part in &parts[1..] {
            for (dst, src) in [
                (&mut out.p_ch, &part.p_ch),
                (&mut out.p_dis, &part.p_dis),
                (&mut out.p_ess, &part.p_ess),
                (&mut out.beta_ch, &part.beta_ch),
                (&mut out.beta_dis, &part.beta_dis),
                (&mut out.soc, &part.soc),
            ] {
                for (a, b) in dst.iter_mut().zip(src) {
                    a.extend_from_slice(b);
                }
            }
            out.p_sub.extend_from_slice(&part.p_sub);
            out.q_sub.extend_from_slice(&part.q_sub);
            out.state.extend(&part.state);
            out.objective_value += part.objective_value;
            out.sup_line_term = out.sup_line_term.max(part.sup_line_term);
            out.sup_node_term = out.sup_node_term.max(part.sup_node_term);
        }
        out.violations = constraint_margins(net, &out.state);
        out
    }
}
