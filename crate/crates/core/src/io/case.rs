use std::fs;
use std::path::{Path, PathBuf};

use crate::netmodel::{validate_case, CaseViolation, Network, NetworkCase};

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: invalid case:\n{}", .violations.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid {
        path: PathBuf,
        violations: Vec<CaseViolation>,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Parses case text without validating it. `origin` labels diagnostics.
pub fn parse_case(text: &str, origin: &Path) -> Result<NetworkCase, CaseError> {
    toml::from_str(text).map_err(|e: toml::de::Error| {
        let (line, column) = e
            .span()
            .map(|span| line_column(text, span.start))
            .unwrap_or((0, 0));
        CaseError::Parse {
            path: origin.to_path_buf(),
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

/// Reads, parses and validates a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<Network, CaseError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CaseError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let case = parse_case(&text, path)?;
    validate_case(case).map_err(|violations| CaseError::Invalid {
        path: path.to_path_buf(),
        violations,
    })
}

pub fn case_to_toml(case: &NetworkCase) -> String {
    toml::to_string(case).expect("case serialization cannot fail")
}

pub fn save_case(case: &NetworkCase, path: impl AsRef<Path>) -> Result<(), CaseError> {
    let path = path.as_ref();
    fs::write(path, case_to_toml(case)).map_err(|source| CaseError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based() {
        assert_eq!(line_column("ab\ncd", 0), (1, 1));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }

    #[test]
    fn unknown_field_is_rejected_with_position() {
        let err = parse_case("name = \"x\"\nbogus = 1\n", Path::new("c.toml")).unwrap_err();
        let text = err.to_string();
        assert!(text.starts_with("c.toml:"), "{text}");
        assert!(text.contains("bogus"), "{text}");
    }
}
