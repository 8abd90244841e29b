//! One-test-at-a-time suite construction driven by gravitational search.
//!
//! Each cycle resets a GSA population, searches for the candidate covering
//! the most still-uncovered tuples, appends the best candidate seen during
//! the cycle to the suite and strikes its tuples from the list. The loop ends
//! when no tuple is left uncovered.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gsa::{GsaError, GsaParams, GsaState, TraceRecord};
use crate::sut::{SuiteMetadata, SutConfig, TestCase, TestSuite};
use crate::tuples::TupleList;

/// Outcome of one generation cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// Fitness evaluation rounds run in this cycle.
    pub iterations: usize,
    /// Tuples newly covered by the accepted case.
    pub weight: usize,
    /// Tuples left uncovered afterwards.
    pub remaining: usize,
    /// The case came from the progress fallback rather than the search.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub suite: TestSuite,
    pub seed: u64,
    pub params: GsaParams,
    pub initial_tuples: usize,
    pub cycles: Vec<CycleRecord>,
    pub total_iterations: u64,
    pub fallback_count: usize,
    /// Objects resampled after numerical blow-up.
    pub resampled: u64,
    #[serde(with = "secs")]
    pub duration: Duration,
    /// Per-cycle convergence traces, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<TraceRecord>>>,
}

impl StrategyReport {
    /// Clears every wall-clock field so that reports from identical inputs
    /// compare equal.
    pub fn strip_timing(&mut self) {
        self.duration = Duration::ZERO;
        self.suite.metadata.duration = Duration::ZERO;
    }

    /// Per-cycle traces as CSV, cycles separated by `# cycle N` comments.
    pub fn trace_csv(&self) -> Option<String> {
        let trace = self.trace.as_ref()?;
        let mut out = String::from(TraceRecord::CSV_HEADER);
        out.push('\n');
        for (cycle, records) in trace.iter().enumerate() {
            out.push_str(&format!("# cycle {cycle}\n"));
            for r in records {
                out.push_str(&r.to_csv_line());
                out.push('\n');
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Gsa(#[from] GsaError),
    #[error("time limit of {limit:?} exceeded after {cases} cases")]
    TimeLimit { limit: Duration, cases: usize },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    pub trace: bool,
    /// Abandon the run once this much wall-clock time has passed; checked
    /// between cycles.
    pub time_limit: Option<Duration>,
}

/// Running argmax over a cycle's candidates; the first maximum wins.
#[derive(Debug, Clone, Default)]
pub struct CycleBest {
    best: Option<(Vec<usize>, usize)>,
}

impl CycleBest {
    pub fn offer(&mut self, values: &[usize], weight: usize) {
        match &mut self.best {
            Some((_, w)) if *w >= weight => {}
            Some((v, w)) => {
                v.clear();
                v.extend_from_slice(values);
                *w = weight;
            }
            None => self.best = Some((values.to_vec(), weight)),
        }
    }

    pub fn weight(&self) -> Option<usize> {
        self.best.as_ref().map(|(_, w)| *w)
    }

    pub fn into_inner(self) -> Option<(TestCase, usize)> {
        self.best.map(|(v, w)| (TestCase::from_raw(v), w))
    }
}

/// Highest-weight candidate, earliest on ties. `None` for an empty history.
pub fn select_best_of_cycle<I>(history: I) -> Option<(TestCase, usize)>
where
    I: IntoIterator<Item = (TestCase, usize)>,
{
    let mut best = CycleBest::default();
    for (case, weight) in history {
        best.offer(case.values(), weight);
    }
    best.into_inner()
}

/// Builds a case around one uncovered tuple chosen at random; the remaining
/// parameters are filled uniformly. The result covers at least that tuple.
///
/// # Panics
///
/// If `itl` is empty.
pub fn progress_fallback<R: Rng + ?Sized>(itl: &TupleList, rng: &mut R) -> TestCase {
    assert!(!itl.is_empty(), "progress fallback needs an uncovered tuple");
    let tuple = itl
        .nth_uncovered(rng.gen_range(0..itl.len()))
        .expect("index below uncovered count");
    let mut values: Vec<usize> = itl
        .config()
        .cardinalities()
        .iter()
        .map(|&v| rng.gen_range(0..v))
        .collect();
    values[tuple.first().param] = tuple.first().value;
    values[tuple.second().param] = tuple.second().value;
    TestCase::from_raw(values)
}

pub fn generate_suite(config: &SutConfig, params: &GsaParams, seed: u64) -> Result<StrategyReport, StrategyError> {
    generate_suite_with(config, params, seed, GenerateOptions::default())
}

pub fn generate_suite_with(
    config: &SutConfig,
    params: &GsaParams,
    seed: u64,
    options: GenerateOptions,
) -> Result<StrategyReport, StrategyError> {
    params.validate()?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut itl = TupleList::generate(config);
    let initial_tuples = itl.len();
    let mut suite = TestSuite::new(config.clone());
    let mut cycles = Vec::new();
    let mut traces = options.trace.then(Vec::new);
    let mut total_iterations = 0u64;
    let mut resampled = 0u64;

    while !itl.is_empty() {
        if let Some(limit) = options.time_limit {
            if start.elapsed() > limit {
                return Err(StrategyError::TimeLimit {
                    limit,
                    cases: suite.len(),
                });
            }
        }
        let ceiling = config.num_pairs().min(itl.len());
        let mut state = GsaState::init(config, params, &mut rng);
        let mut best = CycleBest::default();
        let mut trace = Vec::new();
        let mut iterations = 0;
        loop {
            state.evaluate(config, &mut rng, |values| itl.weight_of(values));
            iterations += 1;
            for obj in &state.objects {
                best.offer(obj.decoded(), obj.fitness as usize);
            }
            if options.trace {
                trace.push(state.trace_record());
            }
            if best.weight() == Some(ceiling) || state.iteration >= params.max_iterations {
                break;
            }
            state.step(params, &mut rng);
        }
        total_iterations += iterations as u64;
        resampled += state.resampled;

        let (case, fallback) = match best.into_inner() {
            Some((case, w)) if w > 0 => (case, false),
            _ => (progress_fallback(&itl, &mut rng), true),
        };
        let weight = itl.remove_covered(&case);
        debug_assert!(weight > 0);
        suite
            .push(case)
            .expect("a case covering new tuples cannot already be in the suite");
        cycles.push(CycleRecord {
            iterations,
            weight,
            remaining: itl.len(),
            fallback,
        });
        if let Some(t) = traces.as_mut() {
            t.push(trace);
        }
    }

    let duration = start.elapsed();
    suite.metadata = SuiteMetadata {
        seed: Some(seed),
        iterations: total_iterations,
        cycles: cycles.len() as u64,
        duration,
    };
    Ok(StrategyReport {
        suite,
        seed,
        params: params.clone(),
        initial_tuples,
        fallback_count: cycles.iter().filter(|c| c.fallback).count(),
        cycles,
        total_iterations,
        resampled,
        duration,
        trace: traces,
    })
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Duration::try_from_secs_f64(f64::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> GsaParams {
        GsaParams {
            population_size: 30,
            max_iterations: 60,
            ..Default::default()
        }
    }

    fn tc(v: &[usize]) -> TestCase {
        TestCase::from_raw(v.to_vec())
    }

    #[test]
    fn best_of_cycle_argmax_with_first_tie() {
        assert_eq!(select_best_of_cycle(vec![(tc(&[1, 0]), 3)]), Some((tc(&[1, 0]), 3)));
        assert_eq!(
            select_best_of_cycle(vec![(tc(&[0, 0]), 7), (tc(&[1, 1]), 9)]),
            Some((tc(&[1, 1]), 9))
        );
        assert_eq!(
            select_best_of_cycle(vec![(tc(&[0, 0]), 9), (tc(&[1, 1]), 9)]),
            Some((tc(&[0, 0]), 9))
        );
        assert_eq!(select_best_of_cycle(Vec::new()), None);
    }

    #[test]
    fn fallback_builds_on_an_uncovered_tuple() {
        let config = SutConfig::uniform(2, 5).unwrap();
        let mut itl = TupleList::generate(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            assert!(itl.weight(&progress_fallback(&itl, &mut rng)) >= 1);
        }
        // Cover everything except ((0,1),(3,0)).
        let mut all = Vec::new();
        for n in 0..32usize {
            all.push((0..5).map(|b| (n >> (4 - b)) & 1).collect::<Vec<_>>());
        }
        for row in all.iter().filter(|r| !(r[0] == 1 && r[3] == 0)) {
            itl.remove_covered(&tc(row));
        }
        assert_eq!(itl.dump(), "0,3,1,0\n");
        for _ in 0..10 {
            let c = progress_fallback(&itl, &mut rng);
            assert_eq!(c.values()[0], 1);
            assert_eq!(c.values()[3], 0);
        }
    }

    #[test]
    #[should_panic(expected = "uncovered tuple")]
    fn fallback_on_empty_list_panics() {
        let config = SutConfig::uniform(2, 2).unwrap();
        let mut itl = TupleList::generate(&config);
        for r in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            itl.remove_covered(&tc(&r));
        }
        progress_fallback(&itl, &mut ChaCha8Rng::seed_from_u64(0));
    }

    #[test]
    fn two_binary_parameters_need_four_cases() {
        let config = SutConfig::uniform(2, 2).unwrap();
        let report = generate_suite(&config, &small_params(), 1).unwrap();
        assert_eq!(report.suite.len(), 4);
        assert!(report.cycles.iter().all(|c| c.weight == 1));
    }

    #[test]
    fn report_invariants() {
        let config = SutConfig::parse("3^4 2^3").unwrap();
        let report = generate_suite(&config, &small_params(), 11).unwrap();
        let total: usize = report.cycles.iter().map(|c| c.weight).sum();
        assert_eq!(total, report.initial_tuples);
        assert!(report.cycles.windows(2).all(|w| w[1].remaining < w[0].remaining));
        assert_eq!(report.cycles.last().unwrap().remaining, 0);
        assert!(report.suite.len() >= 9);
        assert!(report.suite.len() <= report.initial_tuples);
        assert_eq!(report.suite.metadata.seed, Some(11));
        assert_eq!(
            report.total_iterations,
            report.cycles.iter().map(|c| c.iterations as u64).sum::<u64>()
        );
        let mut itl = TupleList::generate(&config);
        for case in report.suite.cases() {
            itl.remove_covered(case);
        }
        assert!(itl.is_empty());
    }

    #[test]
    fn same_seed_same_suite() {
        let config = SutConfig::uniform(3, 5).unwrap();
        let a = generate_suite(&config, &small_params(), 3).unwrap();
        let b = generate_suite(&config, &small_params(), 3).unwrap();
        assert_eq!(a.suite.cases(), b.suite.cases());
        assert_eq!(a.cycles, b.cycles);
    }

    #[test]
    fn early_exit_at_full_weight() {
        let config = SutConfig::uniform(3, 4).unwrap();
        let report = generate_suite(&config, &GsaParams::default(), 0).unwrap();
        // the first case always covers all six pairs, found in the first round
        assert_eq!(report.cycles[0].weight, 6);
        assert_eq!(report.cycles[0].iterations, 1);
    }

    #[test]
    fn trace_has_one_record_per_round() {
        let config = SutConfig::uniform(2, 4).unwrap();
        let report = generate_suite_with(
            &config,
            &small_params(),
            2,
            GenerateOptions {
                trace: true,
                ..Default::default()
            },
        )
        .unwrap();
        let trace = report.trace.as_ref().unwrap();
        assert_eq!(trace.len(), report.cycles.len());
        for (t, c) in trace.iter().zip(&report.cycles) {
            assert_eq!(t.len(), c.iterations);
        }
        let csv = report.trace_csv().unwrap();
        assert!(csv.starts_with("t,best_fitness,worst_fitness,G\n# cycle 0\n0,"));
    }

    #[test]
    fn time_limit_aborts() {
        let config = SutConfig::uniform(3, 6).unwrap();
        let options = GenerateOptions {
            time_limit: Some(Duration::ZERO),
            ..Default::default()
        };
        let err = generate_suite_with(&config, &small_params(), 0, options).unwrap_err();
        assert!(matches!(err, StrategyError::TimeLimit { .. }));
    }

    #[test]
    fn rejects_invalid_params() {
        let config = SutConfig::uniform(2, 3).unwrap();
        let bad = GsaParams {
            population_size: 1,
            ..Default::default()
        };
        assert!(generate_suite(&config, &bad, 0).is_err());
    }
}
