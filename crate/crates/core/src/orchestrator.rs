//! Runs dispatch, attack and mitigation in sequence over the horizon.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::distflow::TermWeights;
use crate::error::{Error, Stage};
use crate::netmodel::{constraint_margins, validate_case, Network, ViolationReport};
use crate::stage1::{solve_base_opf, DispatchSolution};
use crate::stage2::{assess_worst_attack, AttackAssessment, AttackOptions};
use crate::stage3::{mitigate_attack, MitigationOptions, MitigationPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Each stage solved once over all hours.
    FullHorizon,
    /// Each hour solved on its own, carrying storage SOC forward.
    Rolling,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::FullHorizon => "full_horizon",
            Mode::Rolling => "rolling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    /// Attack budget per hour.
    pub k: f64,
    pub mode: Mode,
    pub binary_attack: bool,
    pub hard_limits: bool,
    pub weights: TermWeights,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            k: 3.0,
            mode: Mode::FullHorizon,
            binary_attack: false,
            hard_limits: false,
            weights: TermWeights::default(),
        }
    }
}

impl ScenarioConfig {
    fn check(&self) -> Result<(), Error> {
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(Error::Input(format!(
                "k must be a non-negative number, got {}",
                self.k
            )));
        }
        let w = self.weights;
        if !(w.line.is_finite() && w.line >= 0.0 && w.node.is_finite() && w.node >= 0.0) {
            return Err(Error::Input("term weights must be non-negative".into()));
        }
        Ok(())
    }

    fn attack_options(&self) -> AttackOptions {
        AttackOptions {
            binary_attack: self.binary_attack,
            weights: self.weights,
        }
    }

    fn mitigation_options(&self) -> MitigationOptions {
        MitigationOptions {
            hard_limits: self.hard_limits,
            weights: self.weights,
        }
    }
}

/// Worst margins of one stage at one hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourSummary {
    pub hour: usize,
    pub worst_line_margin: f64,
    pub worst_node_margin: f64,
}

pub fn hour_summaries(report: &ViolationReport, hours: usize) -> Vec<HourSummary> {
    (0..hours)
        .map(|hour| {
            let (line, node) = report.hour_worst(hour);
            HourSummary {
                hour,
                worst_line_margin: line,
                worst_node_margin: node,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub dispatch: Duration,
    pub attack: Duration,
    pub mitigation: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.dispatch + self.attack + self.mitigation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub dispatch: DispatchSolution,
    pub attack: AttackAssessment,
    pub mitigation: MitigationPlan,
    /// Per-hour worst margins for stages 1, 2 and 3.
    pub summaries: [Vec<HourSummary>; 3],
    pub timings: StageTimings,
    /// Margins of the Stage-1 state.
    pub dispatch_violations: ViolationReport,
}

impl ScenarioResult {
    pub fn violations(&self, stage: Stage) -> &ViolationReport {
        match stage {
            Stage::Dispatch => &self.dispatch_violations,
            Stage::Attack => &self.attack.violations,
            Stage::Mitigation => &self.mitigation.violations,
        }
    }
}

/// Whatever finished before a stage failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialResult {
    pub dispatch: Option<DispatchSolution>,
    pub attack: Option<AttackAssessment>,
    pub mitigation: Option<MitigationPlan>,
    /// Rolling mode: the hour being solved when the failure occurred.
    pub failed_hour: Option<usize>,
    pub timings: StageTimings,
}

#[derive(Debug)]
pub struct ScenarioError {
    pub error: Error,
    pub partial: Box<PartialResult>,
}

impl ScenarioError {
    pub fn stage(&self) -> Option<Stage> {
        self.error.stage()
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.partial.failed_hour {
            Some(h) => write!(f, "{} (hour {h})", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for ScenarioError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

struct Pipeline {
    dispatch: DispatchSolution,
    attack: AttackAssessment,
    mitigation: MitigationPlan,
}

fn run_stages(
    net: &Network,
    config: &ScenarioConfig,
    partial: &mut PartialResult,
) -> Result<Pipeline, Error> {
    let start = Instant::now();
    let dispatch = solve_base_opf(net);
    partial.timings.dispatch += start.elapsed();
    let dispatch = dispatch?;
    partial.dispatch = Some(dispatch.clone());

    let start = Instant::now();
    let attack = assess_worst_attack(net, &dispatch, config.k, &config.attack_options());
    partial.timings.attack += start.elapsed();
    let attack = attack?;
    partial.attack = Some(attack.clone());

    let start = Instant::now();
    let mitigation = mitigate_attack(net, &dispatch, &attack, &config.mitigation_options());
    partial.timings.mitigation += start.elapsed();
    let mitigation = mitigation?;
    Ok(Pipeline {
        dispatch,
        attack,
        mitigation,
    })
}

/// Runs the three stages on `net` under `config`.
pub fn run_scenario(
    net: &Network,
    config: &ScenarioConfig,
) -> Result<ScenarioResult, ScenarioError> {
    let mut partial = PartialResult::default();
    let fail = |error: Error, partial: PartialResult| ScenarioError {
        error,
        partial: Box::new(partial),
    };
    if let Err(e) = config.check() {
        return Err(fail(e, partial));
    }
    let pipeline = match config.mode {
        Mode::FullHorizon => match run_stages(net, config, &mut partial) {
            Ok(p) => p,
            Err(e) => return Err(fail(e, partial)),
        },
        Mode::Rolling => match run_rolling(net, config, &mut partial) {
            Ok(p) => p,
            Err(e) => return Err(fail(e, partial)),
        },
    };
    let hours = net.horizon();
    let stage1_report = constraint_margins(net, &pipeline.dispatch.state);
    Ok(ScenarioResult {
        config: *config,
        summaries: [
            hour_summaries(&stage1_report, hours),
            hour_summaries(&pipeline.attack.violations, hours),
            hour_summaries(&pipeline.mitigation.violations, hours),
        ],
        dispatch: pipeline.dispatch,
        attack: pipeline.attack,
        mitigation: pipeline.mitigation,
        timings: partial.timings,
        dispatch_violations: stage1_report,
    })
}

fn run_rolling(
    net: &Network,
    config: &ScenarioConfig,
    partial: &mut PartialResult,
) -> Result<Pipeline, Error> {
    let mut soc: Vec<f64> = net.case.storage.iter().map(|u| u.soc_init).collect();
    let mut dispatches = Vec::with_capacity(net.horizon());
    let mut attacks = Vec::with_capacity(net.horizon());
    let mut plans = Vec::with_capacity(net.horizon());
    for hour in 0..net.horizon() {
        let mut case = net.case.hour_slice(hour);
        for (u, s) in case.storage.iter_mut().zip(&soc) {
            // Guard against round-off pushing the carried SOC past its box.
            u.soc_init = s.clamp(u.soc_min, u.soc_max);
        }
        let sub = validate_case(case).map_err(Error::InvalidCase)?;
        let mut step = PartialResult::default();
        let result = run_stages(&sub, config, &mut step);
        partial.timings.dispatch += step.timings.dispatch;
        partial.timings.attack += step.timings.attack;
        partial.timings.mitigation += step.timings.mitigation;
        let pipeline = match result {
            Ok(p) => p,
            Err(e) => {
                dispatches.extend(step.dispatch);
                attacks.extend(step.attack);
                partial.dispatch =
                    (!dispatches.is_empty()).then(|| DispatchSolution::concat(&dispatches));
                partial.attack =
                    (!attacks.is_empty()).then(|| AttackAssessment::concat(net, &attacks));
                partial.mitigation =
                    (!plans.is_empty()).then(|| MitigationPlan::concat(net, &plans));
                partial.failed_hour = Some(hour);
                return Err(e);
            }
        };
        for (s, row) in soc.iter_mut().zip(&pipeline.mitigation.soc) {
            *s = row[0];
        }
        dispatches.push(pipeline.dispatch);
        attacks.push(pipeline.attack);
        plans.push(pipeline.mitigation);
    }
    let mut mitigation = MitigationPlan::concat(net, &plans);
    mitigation.soc_init = net.case.storage.iter().map(|u| u.soc_init).collect();
    Ok(Pipeline {
        dispatch: DispatchSolution::concat(&dispatches),
        attack: AttackAssessment::concat(net, &attacks),
        mitigation,
    })
}

/// Runs one scenario per budget in `ks`, in parallel. Results keep the
/// order of `ks`.
pub fn sweep(
    net: &Network,
    base: &ScenarioConfig,
    ks: &[f64],
) -> Vec<Result<ScenarioResult, ScenarioError>> {
    ks.par_iter()
        .map(|&k| run_scenario(net, &ScenarioConfig { k, ..*base }))
        .collect()
}
