use super::{Network, SystemState};

/// The six signed constraint margins. Positive means the limit is exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PhiFamily {
    /// `pf - pf_max`
    PfUpper = 1,
    /// `pf_min - pf`
    PfLower = 2,
    /// `qf - qf_max`
    QfUpper = 3,
    /// `qf_min - qf`
    QfLower = 4,
    /// `v - v_max²`
    VUpper = 5,
    /// `v_min² - v`
    VLower = 6,
}

impl PhiFamily {
    pub const ALL: [PhiFamily; 6] = [
        PhiFamily::PfUpper,
        PhiFamily::PfLower,
        PhiFamily::QfUpper,
        PhiFamily::QfLower,
        PhiFamily::VUpper,
        PhiFamily::VLower,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_line_family(self) -> bool {
        self.index() <= 4
    }

    pub fn label(self) -> &'static str {
        match self {
            PhiFamily::PfUpper => "phi1_pf_max",
            PhiFamily::PfLower => "phi2_pf_min",
            PhiFamily::QfUpper => "phi3_qf_max",
            PhiFamily::QfLower => "phi4_qf_min",
            PhiFamily::VUpper => "phi5_v_max",
            PhiFamily::VLower => "phi6_v_min",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    /// `phi[k - 1][element][hour]`: lines for k = 1..4, nodes for k = 5, 6.
    pub phi: [Vec<Vec<f64>>; 6],
    pub worst_line_margin: f64,
    pub worst_node_margin: f64,
}

impl ViolationReport {
    pub fn family(&self, k: PhiFamily) -> &[Vec<f64>] {
        &self.phi[k.index() - 1]
    }

    pub fn safest_line_margin(&self) -> f64 {
        self.phi[..4]
            .iter()
            .flatten()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn safest_node_margin(&self) -> f64 {
        self.phi[4..]
            .iter()
            .flatten()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn worst_margin(&self) -> f64 {
        self.worst_line_margin.max(self.worst_node_margin)
    }

    /// Worst line and node margins restricted to one hour.
    pub fn hour_worst(&self, hour: usize) -> (f64, f64) {
        let worst = |fams: &[Vec<Vec<f64>>]| {
            fams.iter()
                .flatten()
                .map(|row| row[hour])
                .fold(f64::NEG_INFINITY, f64::max)
        };
        (worst(&self.phi[..4]), worst(&self.phi[4..]))
    }

    pub fn is_safe(&self, tol: f64) -> bool {
        self.worst_margin() <= tol
    }
}

/// Evaluates the six margin families elementwise for every hour of `state`.
pub fn constraint_margins(net: &Network, state: &SystemState) -> ViolationReport {
    let lines = &net.case.lines;
    let nodes = &net.case.nodes;
    let line_map = |f: &dyn Fn(usize, f64) -> f64, values: &[Vec<f64>]| -> Vec<Vec<f64>> {
        values
            .iter()
            .enumerate()
            .map(|(l, row)| row.iter().map(|&x| f(l, x)).collect())
            .collect()
    };
    let phi1 = line_map(&|l, pf| pf - lines[l].pf_max, &state.pf);
    let phi2 = line_map(&|l, pf| lines[l].pf_min - pf, &state.pf);
    let phi3 = line_map(&|l, qf| qf - lines[l].qf_max, &state.qf);
    let phi4 = line_map(&|l, qf| lines[l].qf_min - qf, &state.qf);
    let phi5 = line_map(&|i, v| v - nodes[i].v_max * nodes[i].v_max, &state.v);
    let phi6 = line_map(&|i, v| nodes[i].v_min * nodes[i].v_min - v, &state.v);
    let max_of = |fams: &[&Vec<Vec<f64>>]| {
        fams.iter()
            .flat_map(|f| f.iter().flatten())
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let worst_line_margin = max_of(&[&phi1, &phi2, &phi3, &phi4]);
    let worst_node_margin = max_of(&[&phi5, &phi6]);
    ViolationReport {
        phi: [phi1, phi2, phi3, phi4, phi5, phi6],
        worst_line_margin,
        worst_node_margin,
    }
}
