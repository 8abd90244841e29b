//! Pairwise (2-way) covering-array generation with a gravitational search
//! algorithm, plus an independent coverage oracle and a benchmark harness.
//!
//! The pieces, bottom up:
//!
//! - [`sut`]: configurations such as `3^4 2^2`, test cases and suites.
//! - [`tuples`]: the list of still-uncovered pairwise interactions and the
//!   weight (new-coverage count) of a candidate case.
//! - [`gsa`]: the gravitational search engine over continuous positions.
//! - [`strategy`]: the one-test-at-a-time loop that drives the search until
//!   every pair is covered.
//! - [`verify`]: a brute-force coverage oracle independent of [`tuples`].
//! - [`bench`]: best-of-N benchmarking against published suite sizes.
//! - [`cli`]: the `pgsas` command.

pub mod bench;
pub mod cli;
pub mod gsa;
pub mod strategy;
pub mod suite_file;
pub mod sut;
pub mod tuples;
pub mod verify;

pub use gsa::{GsaParams, GsaState};
pub use strategy::{generate_suite, StrategyReport};
pub use sut::{SutConfig, TestCase, TestSuite};
pub use tuples::{InteractionTuple, TupleList};
