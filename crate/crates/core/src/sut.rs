//! System-under-test model: parameter cardinalities, discrete test cases and
//! accumulated test suites.
//!
//! Configurations use the compact `v^p` notation common in the combinatorial
//! testing literature, so `"3^4 2^2"` describes six parameters, four with
//! three values and two with two values.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("malformed segment `{0}`: expected `<values>^<count>`")]
    MalformedSegment(String),
    #[error("segment `{0}`: a parameter needs at least 2 values")]
    TooFewValues(String),
    #[error("segment `{0}`: parameter count must be at least 1")]
    ZeroCount(String),
    #[error("pairwise testing needs at least 2 parameters, got {0}")]
    TooFewParameters(usize),
    #[error("parameter {index} has cardinality {cardinality}; at least 2 values are required")]
    InvalidCardinality { index: usize, cardinality: usize },
    #[error("exhaustive test count overflows a 64-bit integer")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("test case has {got} values but the configuration has {expected} parameters")]
    Arity { expected: usize, got: usize },
    #[error("value {value} at parameter {param} is out of range (cardinality {cardinality})")]
    OutOfRange {
        param: usize,
        value: usize,
        cardinality: usize,
    },
    #[error("test case {0:?} is already in the suite")]
    Duplicate(Vec<usize>),
}

/// Ordered parameter cardinalities of a system under test.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SutConfig {
    cardinalities: Vec<usize>,
}

impl SutConfig {
    pub fn new(cardinalities: Vec<usize>) -> Result<Self, ConfigError> {
        if cardinalities.len() < 2 {
            return Err(ConfigError::TooFewParameters(cardinalities.len()));
        }
        if let Some((index, &cardinality)) = cardinalities.iter().enumerate().find(|(_, &v)| v < 2) {
            return Err(ConfigError::InvalidCardinality { index, cardinality });
        }
        Ok(Self { cardinalities })
    }

    /// `[v; p]`, the uniform configuration `v^p`.
    pub fn uniform(values: usize, params: usize) -> Result<Self, ConfigError> {
        Self::new(vec![values; params])
    }

    /// Parses `segment (sep segment)*` where `segment := INT "^" INT` and the
    /// separator is whitespace or a comma.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cardinalities = Vec::new();
        for segment in text
            .split(|c: char| c.is_ascii_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
        {
            let (values, count) = segment
                .split_once('^')
                .ok_or_else(|| ConfigError::MalformedSegment(segment.to_string()))?;
            let parse_int = |s: &str| {
                if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(ConfigError::MalformedSegment(segment.to_string()));
                }
                s.parse::<usize>()
                    .map_err(|_| ConfigError::MalformedSegment(segment.to_string()))
            };
            let values = parse_int(values)?;
            let count = parse_int(count)?;
            if values < 2 {
                return Err(ConfigError::TooFewValues(segment.to_string()));
            }
            if count == 0 {
                return Err(ConfigError::ZeroCount(segment.to_string()));
            }
            cardinalities.extend(std::iter::repeat_n(values, count));
        }
        Self::new(cardinalities)
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn num_params(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinality(&self, param: usize) -> usize {
        self.cardinalities[param]
    }

    /// Number of test cases in the full cartesian product.
    pub fn exhaustive_size(&self) -> Result<u64, ConfigError> {
        self.cardinalities
            .iter()
            .try_fold(1u64, |acc, &v| acc.checked_mul(v as u64).ok_or(ConfigError::Overflow))
    }

    /// Number of parameter pairs, `p(p-1)/2`.
    pub fn num_pairs(&self) -> usize {
        let p = self.num_params();
        p * (p - 1) / 2
    }

    pub fn check_case(&self, values: &[usize]) -> Result<(), CaseError> {
        if values.len() != self.num_params() {
            return Err(CaseError::Arity {
                expected: self.num_params(),
                got: values.len(),
            });
        }
        for (param, (&value, &cardinality)) in values.iter().zip(&self.cardinalities).enumerate() {
            if value >= cardinality {
                return Err(CaseError::OutOfRange {
                    param,
                    value,
                    cardinality,
                });
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for SutConfig {
    type Error = ConfigError;

    fn try_from(cardinalities: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(cardinalities)
    }
}

impl From<SutConfig> for Vec<usize> {
    fn from(config: SutConfig) -> Self {
        config.cardinalities
    }
}

impl FromStr for SutConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Canonical form: runs of equal adjacent cardinalities collapse into one
/// `v^p` segment, segments separated by a single space.
impl fmt::Display for SutConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut rest = self.cardinalities.as_slice();
        while let Some(&v) = rest.first() {
            let run = rest.iter().take_while(|&&x| x == v).count();
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}^{run}")?;
            first = false;
            rest = &rest[run..];
        }
        Ok(())
    }
}

/// One concrete test: a value index per parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestCase(Vec<usize>);

impl TestCase {
    pub fn new(values: Vec<usize>, config: &SutConfig) -> Result<Self, CaseError> {
        config.check_case(&values)?;
        Ok(Self(values))
    }

    /// Caller guarantees `values` is valid for the configuration in use.
    pub(crate) fn from_raw(values: Vec<usize>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteMetadata {
    pub seed: Option<u64>,
    /// Total GSA iterations spent building the suite.
    pub iterations: u64,
    /// Number of generation cycles (one per accepted case).
    pub cycles: u64,
    #[serde(with = "duration_secs")]
    pub duration: Duration,
}

/// An ordered, duplicate-free list of test cases for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    config: SutConfig,
    cases: Vec<TestCase>,
    pub metadata: SuiteMetadata,
}

impl TestSuite {
    pub fn new(config: SutConfig) -> Self {
        Self {
            config,
            cases: Vec::new(),
            metadata: SuiteMetadata::default(),
        }
    }

    /// Builds a suite from raw rows, validating each against `config`.
    pub fn from_rows(config: SutConfig, rows: Vec<Vec<usize>>) -> Result<Self, CaseError> {
        let mut suite = Self::new(config);
        for row in rows {
            let case = TestCase::new(row, &suite.config)?;
            suite.push(case)?;
        }
        Ok(suite)
    }

    pub fn push(&mut self, case: TestCase) -> Result<(), CaseError> {
        self.config.check_case(case.values())?;
        if self.cases.contains(&case) {
            return Err(CaseError::Duplicate(case.0));
        }
        self.cases.push(case);
        Ok(())
    }

    pub fn config(&self) -> &SutConfig {
        &self.config
    }

    pub fn cases(&self) -> &[TestCase] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// Plain rendering: one case per line, indices separated by spaces.
    pub fn to_plain(&self) -> String {
        let mut out = String::new();
        for case in &self.cases {
            out.push_str(&case.to_string());
            out.push('\n');
        }
        out
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}
