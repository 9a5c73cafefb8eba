//! Closed-form objectives and invariant measurements shared by the
//! integration tests and the acceptance run.

use triopf::{AttackAssessment, DispatchSolution, MitigationPlan, NetworkCase};

use super::flow::{attacked_outputs, generator_injection, margin_extremes, tree_sweep};

/// Objective of a fixed attack pattern, evaluated in closed form. `None`
/// when the substation cannot cover the deficit.
pub fn attack_value(
    case: &NetworkCase,
    dispatch: &DispatchSolution,
    y: &dyn Fn(usize, usize) -> f64,
) -> Option<f64> {
    let hours = case.horizon_hours;
    let sub_g = case
        .generators
        .iter()
        .position(|g| g.is_substation())
        .unwrap();
    let sub = &case.generators[sub_g];
    let mut p_sub = vec![0.0; hours];
    let mut q_sub = vec![0.0; hours];
    for t in 0..hours {
        let mut p: f64 = case.demand.iter().map(|r| r.p[t]).sum();
        let mut q: f64 = case.demand.iter().map(|r| r.q[t]).sum();
        for (g, gen) in case.generators.iter().enumerate() {
            if g != sub_g && gen.in_service {
                p -= dispatch.p_g[g][t] * (1.0 - y(g, t));
                q -= dispatch.q_g[g][t] * (1.0 - y(g, t));
            }
        }
        if p < sub.p_min - 1e-9
            || p > sub.p_max_at(t) + 1e-9
            || q < sub.q_min - 1e-9
            || q > sub.q_max + 1e-9
        {
            return None;
        }
        p_sub[t] = p;
        q_sub[t] = q;
    }
    let pg = attacked_outputs(case, &dispatch.p_g, y, &p_sub);
    let qg = attacked_outputs(case, &dispatch.q_g, y, &q_sub);
    let state = tree_sweep(
        case,
        sub.node,
        &generator_injection(case, &pg),
        &generator_injection(case, &qg),
    );
    let ((line_min, _), (node_min, _)) = margin_extremes(case, &state);
    let mut value = line_min + node_min;
    for (g, gen) in case.generators.iter().enumerate() {
        if gen.attackable && gen.in_service {
            value += (0..hours).map(|t| gen.cost * pg[g][t]).sum::<f64>();
        }
    }
    value += (0..hours).map(|t| sub.cost * p_sub[t]).sum::<f64>();
    Some(value)
}

/// Largest gap between an assessment's epigraph variables and the true
/// minima of the margin families.
pub fn attack_epigraph_gap(case: &NetworkCase, a: &AttackAssessment) -> f64 {
    let ((line_min, _), (node_min, _)) = margin_extremes(case, &a.state);
    (a.inf_line_term - line_min)
        .abs()
        .max((a.inf_node_term - node_min).abs())
}

/// Same for a plan's supremum terms.
pub fn plan_epigraph_gap(case: &NetworkCase, p: &MitigationPlan) -> f64 {
    let ((_, line_max), (_, node_max)) = margin_extremes(case, &p.state);
    (p.sup_line_term - line_max)
        .abs()
        .max((p.sup_node_term - node_max).abs())
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SocReport {
    /// Largest |soc_t - soc_{t-1} - (eta_ch p_ch - p_dis / eta_dis) / E|.
    pub recursion: f64,
    /// Largest excursion outside [soc_min, soc_max].
    pub outside: f64,
    /// Largest min(p_ch, p_dis) over units and hours.
    pub overlap: f64,
}

impl SocReport {
    pub fn merge(self, o: SocReport) -> SocReport {
        SocReport {
            recursion: self.recursion.max(o.recursion),
            outside: self.outside.max(o.outside),
            overlap: self.overlap.max(o.overlap),
        }
    }

    pub fn holds(&self) -> bool {
        self.recursion <= 1e-7 && self.outside <= 1e-7 && self.overlap <= 1e-7
    }
}

pub fn soc_report(case: &NetworkCase, plan: &MitigationPlan) -> SocReport {
    let mut r = SocReport::default();
    for (u, unit) in case.storage.iter().enumerate() {
        let mut prev = plan.soc_init[u];
        for t in 0..case.horizon_hours {
            let (ch, dis, soc) = (plan.p_ch[u][t], plan.p_dis[u][t], plan.soc[u][t]);
            let step = (unit.eta_ch * ch - dis / unit.eta_dis) / unit.e_max;
            r.recursion = r.recursion.max((soc - prev - step).abs());
            r.outside = r.outside.max(unit.soc_min - soc).max(soc - unit.soc_max);
            r.overlap = r.overlap.max(ch.min(dis));
            prev = soc;
        }
    }
    r
}
