//! Brute-force pairwise coverage oracle.
//!
//! Deliberately naive and self-contained: it enumerates the tuple universe on
//! its own and scans every case for every tuple, sharing nothing with
//! [`crate::tuples`].

use serde::{Deserialize, Serialize};

use crate::sut::{SutConfig, TestCase};

/// An interaction `(param_i = value_a, param_j = value_b)` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairValue {
    pub i: usize,
    pub j: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub total: usize,
    pub covered: usize,
    pub missing: Vec<PairValue>,
    pub complete: bool,
}

impl CoverageReport {
    pub fn percentage(&self) -> f64 {
        if self.total == 0 {
            return 100.0;
        }
        self.covered as f64 / self.total as f64 * 100.0
    }
}

pub fn verify_coverage(cases: &[TestCase], config: &SutConfig) -> CoverageReport {
    let cards = config.cardinalities();
    let mut total = 0;
    let mut missing = Vec::new();
    for i in 0..cards.len() {
        for j in i + 1..cards.len() {
            for a in 0..cards[i] {
                for b in 0..cards[j] {
                    total += 1;
                    let hit = cases.iter().any(|c| {
                        let v = c.values();
                        v[i] == a && v[j] == b
                    });
                    if !hit {
                        missing.push(PairValue { i, j, a, b });
                    }
                }
            }
        }
    }
    CoverageReport {
        total,
        covered: total - missing.len(),
        complete: missing.is_empty(),
        missing,
    }
}

pub fn coverage_percentage(cases: &[TestCase], config: &SutConfig) -> f64 {
    verify_coverage(cases, config).percentage()
}

/// `v_a * v_b` for the two largest cardinalities: each of those value pairs
/// needs a case of its own.
pub fn lower_bound(config: &SutConfig) -> usize {
    let mut top = [0usize; 2];
    for &v in config.cardinalities() {
        if v > top[0] {
            top[1] = top[0];
            top[0] = v;
        } else if v > top[1] {
            top[1] = v;
        }
    }
    top[0] * top[1]
}
