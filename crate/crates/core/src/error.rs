use std::fmt;

use crate::lp::{LpError, LpStatus};
use crate::netmodel::CaseViolation;

/// Pipeline stage, used to tag solver outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Dispatch,
    Attack,
    Mitigation,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Dispatch, Stage::Attack, Stage::Mitigation];

    pub fn number(self) -> u8 {
        match self {
            Stage::Dispatch => 1,
            Stage::Attack => 2,
            Stage::Mitigation => 3,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage{}", self.number())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid case:\n{}", list(.0))]
    InvalidCase(Vec<CaseViolation>),
    #[error("{stage} {status}{}", hint.map(|h| format!(": {h}")).unwrap_or_default())]
    NotSolved {
        stage: Stage,
        status: LpStatus,
        hint: Option<&'static str>,
    },
    #[error("{stage} solver failure: {source}")]
    Solver { stage: Stage, source: LpError },
    #[error("{0}")]
    Input(String),
}

fn list(errs: &[CaseViolation]) -> String {
    errs.iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::NotSolved { stage, .. } | Error::Solver { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
