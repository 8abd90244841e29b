//! Best-of-N benchmarking against published suite sizes.
//!
//! Each benchmark runs `runs` independent generations with consecutive seeds,
//! checks every suite with the coverage oracle and keeps size statistics.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gsa::GsaParams;
use crate::strategy::{generate_suite_with, GenerateOptions, StrategyError, StrategyReport};
use crate::sut::{ConfigError, SutConfig, TestCase, TestSuite};
use crate::tuples::TupleList;
use crate::verify::{lower_bound, verify_coverage};

pub const DEFAULT_RUNS: usize = 30;
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("benchmark {name}: {source}")]
    Config {
        name: String,
        #[source]
        source: ConfigError,
    },
    #[error("benchmark {name}, run {run} (seed {seed}): {source}")]
    Strategy {
        name: String,
        run: usize,
        seed: u64,
        #[source]
        source: StrategyError,
    },
    #[error("benchmark {name}, run {run} (seed {seed}): suite misses {missing} tuples")]
    Incomplete {
        name: String,
        run: usize,
        seed: u64,
        missing: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub name: String,
    pub config: String,
    /// Suite size published for the GSA strategy.
    pub published_size: usize,
    pub runs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GsaParams>,
    /// Excluded from the quick selection.
    #[serde(default)]
    pub long_running: bool,
}

impl BenchmarkSpec {
    fn new(name: impl Into<String>, config: impl Into<String>, published_size: usize) -> Self {
        Self {
            name: name.into(),
            config: config.into(),
            published_size,
            runs: DEFAULT_RUNS,
            params: None,
            long_running: false,
        }
    }

    pub fn sut(&self) -> Result<SutConfig, BenchError> {
        SutConfig::parse(&self.config).map_err(|source| BenchError::Config {
            name: self.name.clone(),
            source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    Configurations,
    BinaryScaling,
}

/// Named selections of the builtin benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Everything except long-running rows.
    Quick,
    Full,
    Configurations,
    BinaryScaling,
}

/// Mixed configurations SC1..SC11 followed by the `2^p` binary family.
pub fn builtin_suites() -> Vec<(Table, BenchmarkSpec)> {
    let configurations = [
        ("SC1", "2^7", 6),
        ("SC2", "3^7", 15),
        ("SC3", "4^7", 26),
        ("SC4", "3^3", 9),
        ("SC5", "3^4", 9),
        ("SC6", "3^5", 11),
        ("SC7", "2^10", 8),
        ("SC8", "3^10", 17),
        ("SC9", "3^13", 20),
        ("SC10", "4^10", 31),
        ("SC11", "5^10", 48),
    ];
    let binary = [
        (3, 4),
        (4, 5),
        (5, 6),
        (6, 6),
        (7, 6),
        (8, 6),
        (9, 8),
        (10, 8),
        (11, 8),
        (12, 8),
        (13, 8),
        (14, 9),
        (15, 9),
        (50, 13),
    ];
    let mut out: Vec<_> = configurations
        .iter()
        .map(|&(name, config, size)| (Table::Configurations, BenchmarkSpec::new(name, config, size)))
        .collect();
    out.extend(binary.iter().map(|&(p, size)| {
        let mut spec = BenchmarkSpec::new(format!("p={p}"), format!("2^{p}"), size);
        spec.long_running = p == 50;
        (Table::BinaryScaling, spec)
    }));
    out
}

pub fn select(selection: Selection) -> Vec<BenchmarkSpec> {
    builtin_suites()
        .into_iter()
        .filter(|(table, spec)| match selection {
            Selection::Quick => !spec.long_running,
            Selection::Full => true,
            Selection::Configurations => *table == Table::Configurations,
            Selection::BinaryScaling => *table == Table::BinaryScaling && !spec.long_running,
        })
        .map(|(_, spec)| spec)
        .collect()
}

pub fn find_builtin(name: &str) -> Option<BenchmarkSpec> {
    builtin_suites().into_iter().map(|(_, s)| s).find(|s| s.name == name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub name: String,
    pub config: String,
    pub published_size: usize,
    pub lower_bound: usize,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub sizes: Vec<usize>,
    pub best: usize,
    pub best_seed: u64,
    pub mean: f64,
    pub std_dev: f64,
    /// Wall-clock seconds per run.
    pub durations: Vec<f64>,
    pub total_time: f64,
}

impl BenchmarkRecord {
    pub fn strip_timing(&mut self) {
        self.durations.iter_mut().for_each(|d| *d = 0.0);
        self.total_time = 0.0;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub time_limit: Option<Duration>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            time_limit: Some(DEFAULT_TIME_LIMIT),
        }
    }
}

/// Runs `spec.runs` seeded generations (`seed_base + run`) in parallel and
/// aggregates suite sizes. Any incomplete suite fails the benchmark.
pub fn run_benchmark(
    spec: &BenchmarkSpec,
    base_params: &GsaParams,
    seed_base: u64,
    options: BenchOptions,
) -> Result<BenchmarkRecord, BenchError> {
    run_benchmark_with(spec, base_params, seed_base, options, |_| {})
}

/// [`run_benchmark`], handing every verified report to `inspect` (from
/// worker threads, in no particular order).
pub fn run_benchmark_with<F>(
    spec: &BenchmarkSpec,
    base_params: &GsaParams,
    seed_base: u64,
    options: BenchOptions,
    inspect: F,
) -> Result<BenchmarkRecord, BenchError>
where
    F: Fn(&StrategyReport) + Sync,
{
    let config = spec.sut()?;
    let params = spec.params.as_ref().unwrap_or(base_params);
    let start = Instant::now();
    let gen_options = GenerateOptions {
        trace: false,
        time_limit: options.time_limit,
    };
    let outcomes: Vec<(u64, usize, f64)> = (0..spec.runs)
        .into_par_iter()
        .map(|run| {
            let seed = seed_base.wrapping_add(run as u64);
            let report =
                generate_suite_with(&config, params, seed, gen_options).map_err(|source| BenchError::Strategy {
                    name: spec.name.clone(),
                    run,
                    seed,
                    source,
                })?;
            let coverage = verify_coverage(report.suite.cases(), &config);
            if !coverage.complete {
                return Err(BenchError::Incomplete {
                    name: spec.name.clone(),
                    run,
                    seed,
                    missing: coverage.missing.len(),
                });
            }
            inspect(&report);
            Ok((seed, report.suite.len(), report.duration.as_secs_f64()))
        })
        .collect::<Result<_, _>>()?;

    let sizes: Vec<usize> = outcomes.iter().map(|o| o.1).collect();
    let (best_run, &best) = sizes
        .iter()
        .enumerate()
        .min_by_key(|&(i, s)| (*s, i))
        .expect("at least one run");
    let (mean, std_dev) = mean_std(&sizes);
    Ok(BenchmarkRecord {
        name: spec.name.clone(),
        config: config.to_string(),
        published_size: spec.published_size,
        lower_bound: lower_bound(&config),
        runs: spec.runs,
        seeds: outcomes.iter().map(|o| o.0).collect(),
        best,
        best_seed: outcomes[best_run].0,
        sizes,
        mean,
        std_dev,
        durations: outcomes.iter().map(|o| o.2).collect(),
        total_time: start.elapsed().as_secs_f64(),
    })
}

/// Population mean and standard deviation.
fn mean_std(sizes: &[usize]) -> (f64, f64) {
    let n = sizes.len() as f64;
    let mean = sizes.iter().sum::<usize>() as f64 / n;
    let var = sizes.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Random one-test-at-a-time baseline: draw uniform cases and keep any that
/// covers at least one new tuple.
pub fn random_baseline(config: &SutConfig, seed: u64) -> TestSuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut itl = TupleList::generate(config);
    let mut suite = TestSuite::new(config.clone());
    let mut values = vec![0; config.num_params()];
    while !itl.is_empty() {
        for (x, &v) in values.iter_mut().zip(config.cardinalities()) {
            *x = rng.gen_range(0..v);
        }
        if itl.weight_of(&values) > 0 {
            let case = TestCase::from_raw(values.clone());
            itl.remove_covered(&case);
            suite.push(case).expect("new coverage implies a new case");
        }
    }
    suite.metadata.seed = Some(seed);
    suite
}

/// Aligned plain-text comparison table.
pub fn render_table(records: &[BenchmarkRecord], show_timing: bool) -> String {
    let header = [
        "benchmark",
        "config",
        "published",
        "best",
        "mean",
        "lower bound",
        "runs",
        "total time",
    ];
    let rows: Vec<[String; 8]> = records
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                r.config.clone(),
                r.published_size.to_string(),
                r.best.to_string(),
                format!("{:.2}", r.mean),
                r.lower_bound.to_string(),
                r.runs.to_string(),
                if show_timing {
                    format!("{:.1}s", r.total_time)
                } else {
                    "-".to_string()
                },
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &cells);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_rows() {
        let all = builtin_suites();
        let table3: Vec<_> = all.iter().filter(|(t, _)| *t == Table::Configurations).collect();
        assert_eq!(table3.len(), 11);
        let sc8 = find_builtin("SC8").unwrap();
        assert_eq!((sc8.config.as_str(), sc8.published_size), ("3^10", 17));
        assert_eq!(find_builtin("p=8").unwrap().published_size, 6);
        let p50 = find_builtin("p=50").unwrap();
        assert_eq!(p50.published_size, 13);
        assert!(p50.long_running);
        for (_, spec) in &all {
            assert!(spec.runs >= 1);
            assert!(
                spec.published_size >= lower_bound(&spec.sut().unwrap()),
                "{}",
                spec.name
            );
        }
    }

    #[test]
    fn selections() {
        assert_eq!(select(Selection::Configurations).len(), 11);
        assert_eq!(select(Selection::BinaryScaling).len(), 13);
        assert_eq!(select(Selection::Full).len(), 25);
        let quick = select(Selection::Quick);
        assert_eq!(quick.len(), 24);
        assert!(quick.iter().all(|s| s.name != "p=50"));
    }

    #[test]
    fn baseline_properties() {
        let two = SutConfig::uniform(2, 2).unwrap();
        for seed in 0..10 {
            assert_eq!(random_baseline(&two, seed).len(), 4);
        }
        let config = SutConfig::uniform(3, 4).unwrap();
        for seed in 0..10 {
            let suite = random_baseline(&config, seed);
            assert!(suite.len() >= 9);
            assert!(verify_coverage(suite.cases(), &config).complete);
        }
        assert_eq!(random_baseline(&config, 3), random_baseline(&config, 3));
    }

    #[test]
    fn small_benchmark_aggregates() {
        let spec = BenchmarkSpec {
            runs: 4,
            ..BenchmarkSpec::new("tiny", "3^3", 9)
        };
        let params = GsaParams {
            population_size: 40,
            max_iterations: 80,
            ..Default::default()
        };
        let rec = run_benchmark(&spec, &params, 100, BenchOptions::default()).unwrap();
        assert_eq!(rec.seeds, vec![100, 101, 102, 103]);
        assert_eq!(rec.sizes.len(), 4);
        assert_eq!(rec.best, *rec.sizes.iter().min().unwrap());
        assert!(rec.best >= rec.lower_bound);
        assert!(rec.std_dev >= 0.0);
        let again = run_benchmark(&spec, &params, 100, BenchOptions::default()).unwrap();
        assert_eq!(rec.sizes, again.sizes);
    }

    #[test]
    fn stats() {
        let (m, s) = mean_std(&[9, 9, 10, 12]);
        assert_eq!(m, 10.0);
        assert!((s - 1.224_744_871_391_589).abs() < 1e-12);
    }

    #[test]
    fn table_layout() {
        let rec = BenchmarkRecord {
            name: "SC5".into(),
            config: "3^4".into(),
            published_size: 9,
            lower_bound: 9,
            runs: 30,
            seeds: vec![],
            sizes: vec![],
            best: 9,
            best_seed: 0,
            mean: 9.5,
            std_dev: 0.5,
            durations: vec![],
            total_time: 12.34,
        };
        let t = render_table(std::slice::from_ref(&rec), true);
        let lines: Vec<_> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("benchmark  config  published  best"));
        assert!(lines[2].ends_with("12.3s"));
        assert!(render_table(&[rec], false).lines().nth(2).unwrap().ends_with('-'));
    }
}
