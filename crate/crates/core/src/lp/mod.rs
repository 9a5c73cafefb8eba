//! Linear and mixed-binary programming.
//!
//! Models are assembled with [`LinearProgram`] and solved by a dense
//! bounded-variable primal simplex ([`solve_lp`]) or by depth-first
//! branch-and-bound over the binary variables ([`solve_milp`]).
//!
//! Before the simplex runs, a presolve pass removes fixed columns,
//! eliminates free columns through equality rows and splits the model into
//! independent blocks. Constraints flagged `lazy` are withheld from the
//! tableau and separated on demand: they are added back whenever the
//! current optimum violates them. The reported solution always satisfies
//! every constraint of the original model.

mod dump;
mod milp;
mod presolve;
mod simplex;

use std::fmt;

pub use dump::write_lp;
pub use milp::{solve_milp, solve_milp_with, MilpOptions};

/// Primal feasibility tolerance applied to every row and bound.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Binary variables closer than this to 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Absolute optimality gap at which branch-and-bound stops.
pub const MIP_GAP: f64 = 1e-6;
/// Smallest pivot element the simplex will accept.
pub const MIN_PIVOT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub is_binary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    /// Withheld from the initial tableau and separated on violation.
    pub lazy: bool,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate this row (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// A linear program with optional binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    /// Objective coefficient per variable.
    pub objective: Vec<f64>,
    /// Constant added to the objective value.
    pub objective_offset: f64,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            variables: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            is_binary: false,
        });
        self.objective.push(0.0);
        VarId(self.variables.len() - 1)
    }

    pub fn add_free_var(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        let id = self.add_var(name, 0.0, 1.0);
        self.variables[id.0].is_binary = true;
        id
    }

    pub fn set_cost(&mut self, var: VarId, cost: f64) {
        self.objective[var.0] = cost;
    }

    pub fn add_cost(&mut self, var: VarId, cost: f64) {
        self.objective[var.0] += cost;
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> RowId {
        self.push_row(name.into(), terms, relation, rhs, false)
    }

    /// Adds a row that the solver may separate lazily.
    pub fn add_lazy_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> RowId {
        self.push_row(name.into(), terms, relation, rhs, true)
    }

    fn push_row(
        &mut self,
        name: String,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
        lazy: bool,
    ) -> RowId {
        self.constraints.push(Constraint {
            name,
            terms,
            relation,
            rhs,
            lazy,
        });
        RowId(self.constraints.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn has_binaries(&self) -> bool {
        self.variables.iter().any(|v| v.is_binary)
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    /// Largest row or bound violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Checks the structural invariants: references, finiteness, binary boxes.
    pub fn check(&self) -> Result<(), LpError> {
        if self.objective.len() != self.variables.len() {
            return Err(LpError::InvalidModel(format!(
                "{} objective coefficients for {} variables",
                self.objective.len(),
                self.variables.len()
            )));
        }
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(LpError::InvalidModel(format!(
                    "variable {} has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
            if v.is_binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(LpError::InvalidModel(format!(
                    "binary variable {} has bounds outside [0, 1]",
                    v.name
                )));
            }
            if !self.objective[j].is_finite() {
                return Err(LpError::InvalidModel(format!(
                    "objective coefficient of {} is not finite",
                    v.name
                )));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!(
                    "constraint {} has non-finite right-hand side",
                    c.name
                )));
            }
            for &(v, a) in &c.terms {
                if v.0 >= self.variables.len() {
                    return Err(LpError::InvalidModel(format!(
                        "constraint {} references undeclared variable #{}",
                        c.name, v.0
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidModel(format!(
                        "constraint {} has a non-finite coefficient on {}",
                        c.name, self.variables[v.0].name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per variable; empty unless the status is optimal.
    pub values: Vec<f64>,
    /// Objective in the model's own sense; NaN unless optimal.
    pub objective_value: f64,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        LpSolution {
            status,
            values: Vec::new(),
            objective_value: f64::NAN,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("binary variable {0} passed to the LP solver; use solve_milp")]
    BinaryInLp(String),
    #[error("numerical breakdown: pivot {pivot:.3e} on constraint {constraint}")]
    NumericalBreakdown { constraint: String, pivot: f64 },
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
    #[error("branch-and-bound node limit ({limit}) reached")]
    NodeLimit {
        limit: usize,
        incumbent: Option<Box<LpSolution>>,
    },
}

/// Solves a continuous linear program.
///
/// Infeasible and unbounded models are reported through
/// [`LpSolution::status`]; only numerical failures are errors.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    if let Some(v) = lp.variables.iter().find(|v| v.is_binary) {
        return Err(LpError::BinaryInLp(v.name.clone()));
    }
    solve_relaxation(lp)
}

/// Solves `lp` with any binaries relaxed to their boxes.
pub(crate) fn solve_relaxation(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let reduced = match presolve::Presolved::build(lp, sign) {
        presolve::Outcome::Reduced(p) => p,
        presolve::Outcome::Infeasible => {
            return Ok(LpSolution::without_point(LpStatus::Infeasible))
        }
    };
    let mut reduced_values = vec![0.0; reduced.num_cols()];
    for block in reduced.blocks() {
        match simplex::solve_block_lazily(&reduced, &block, &reduced.lower, &reduced.upper)? {
            simplex::BlockResult::Optimal(vals) => {
                for (&col, x) in block.cols.iter().zip(vals) {
                    reduced_values[col] = x;
                }
            }
            simplex::BlockResult::Infeasible => {
                return Ok(LpSolution::without_point(LpStatus::Infeasible))
            }
            simplex::BlockResult::Unbounded => {
                return Ok(LpSolution::without_point(LpStatus::Unbounded))
            }
        }
    }
    let values = reduced.postsolve(&reduced_values);
    let objective_value = lp.evaluate(&values);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective_value,
    })
}
