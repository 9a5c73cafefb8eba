//! Tri-level robust optimal power flow for radial distribution feeders.
//!
//! The pipeline dispatches generation at minimum cost ([`stage1`]), finds
//! the worst-case attack on distributed generators within a budget
//! ([`stage2`]) and schedules energy storage to undo the damage
//! ([`stage3`]). [`orchestrator`] chains the stages over a horizon.

mod distflow;
pub mod error;
pub mod io;
pub mod lp;
pub mod netmodel;
pub mod orchestrator;
pub mod stage1;
pub mod stage2;
pub mod stage3;

pub use distflow::{FlowVars, TermWeights};
pub use error::{Error, Result, Stage};
pub use netmodel::{
    constraint_margins, incidence, validate_case, Network, NetworkCase, PhiFamily, SystemState,
    ViolationReport,
};
pub use orchestrator::{run_scenario, sweep, Mode, ScenarioConfig, ScenarioError, ScenarioResult};
pub use stage1::{solve_base_opf, DispatchSolution};
pub use stage2::{assess_worst_attack, AttackAssessment, AttackOptions, AttackVector};
pub use stage3::{mitigate_attack, MitigationOptions, MitigationPlan};
