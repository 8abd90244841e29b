//! Plain suite files: one case per line, whitespace-separated value indices,
//! `#` starts a comment.

use thiserror::Error;

use crate::sut::{CaseError, SutConfig, TestCase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct SuiteFileError {
    pub line: usize,
    pub kind: SuiteLineError,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteLineError {
    #[error("`{0}` is not a value index")]
    NotAnIndex(String),
    #[error(transparent)]
    Case(#[from] CaseError),
}

/// Parses every non-blank line into a test case valid for `config`.
/// Duplicate rows are kept as written.
pub fn parse_suite(text: &str, config: &SutConfig) -> Result<Vec<TestCase>, SuiteFileError> {
    let mut cases = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let values = content
            .split_ascii_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| SuiteFileError {
                    line,
                    kind: SuiteLineError::NotAnIndex(tok.to_string()),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let case = TestCase::new(values, config).map_err(|e| SuiteFileError { line, kind: e.into() })?;
        cases.push(case);
    }
    Ok(cases)
}

/// Value labels per parameter, one line per parameter with whitespace
/// separated names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueLabels(Vec<Vec<String>>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("expected labels for {expected} parameters, found {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("parameter {param}: expected {expected} labels, found {got}")]
    ValueCount { param: usize, expected: usize, got: usize },
}

impl ValueLabels {
    pub fn parse(text: &str, config: &SutConfig) -> Result<Self, LabelError> {
        let rows: Vec<Vec<String>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_ascii_whitespace().map(str::to_string).collect())
            .collect();
        if rows.len() != config.num_params() {
            return Err(LabelError::ParamCount {
                expected: config.num_params(),
                got: rows.len(),
            });
        }
        for (param, (row, &v)) in rows.iter().zip(config.cardinalities()).enumerate() {
            if row.len() != v {
                return Err(LabelError::ValueCount {
                    param,
                    expected: v,
                    got: row.len(),
                });
            }
        }
        Ok(Self(rows))
    }

    pub fn render(&self, case: &TestCase) -> String {
        case.values()
            .iter()
            .enumerate()
            .map(|(p, &v)| self.0[p][v].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}
