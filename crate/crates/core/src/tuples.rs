//! Pairwise interaction tuples and the list of tuples still to be covered.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::sut::{SutConfig, TestCase};

/// One `(parameter, value)` assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    pub param: usize,
    pub value: usize,
}

/// A pair of assignments to two distinct parameters, lower parameter first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InteractionTuple {
    first: Assignment,
    second: Assignment,
}

impl InteractionTuple {
    /// Orders the two assignments by parameter index. Returns `None` when both
    /// name the same parameter.
    pub fn new(a: Assignment, b: Assignment) -> Option<Self> {
        match a.param.cmp(&b.param) {
            std::cmp::Ordering::Less => Some(Self { first: a, second: b }),
            std::cmp::Ordering::Greater => Some(Self { first: b, second: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> Assignment {
        self.first
    }

    pub fn second(&self) -> Assignment {
        self.second
    }

    /// True iff the case assigns both values of this tuple.
    pub fn is_covered_by(&self, values: &[usize]) -> bool {
        values[self.first.param] == self.first.value && values[self.second.param] == self.second.value
    }
}

/// All `C(p, 2)` parameter pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn parameter_pairs(config: &SutConfig) -> Vec<(usize, usize)> {
    let p = config.num_params();
    (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect()
}

/// Uncovered pairwise interaction tuples of a configuration.
///
/// Each parameter pair owns a dense block of `v_i * v_j` presence flags, so
/// scoring a candidate touches exactly one flag per pair.
#[derive(Debug, Clone)]
pub struct TupleList {
    config: SutConfig,
    pairs: Vec<(usize, usize)>,
    /// Start of each pair's block in `uncovered`.
    offsets: Vec<usize>,
    uncovered: Vec<bool>,
    remaining: usize,
    initial_count: usize,
}

impl TupleList {
    /// The full tuple universe of `config`, everything uncovered.
    pub fn generate(config: &SutConfig) -> Self {
        let pairs = parameter_pairs(config);
        let mut offsets = Vec::with_capacity(pairs.len());
        let mut total = 0;
        for &(i, j) in &pairs {
            offsets.push(total);
            total += config.cardinality(i) * config.cardinality(j);
        }
        Self {
            config: config.clone(),
            pairs,
            offsets,
            uncovered: vec![true; total],
            remaining: total,
            initial_count: total,
        }
    }

    pub fn config(&self) -> &SutConfig {
        &self.config
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.remaining
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    pub fn initial_count(&self) -> usize {
        self.initial_count
    }

    fn slot(&self, tuple: &InteractionTuple) -> Option<usize> {
        let (i, j) = (tuple.first.param, tuple.second.param);
        let p = self.config.num_params();
        if j >= p || tuple.first.value >= self.config.cardinality(i) || tuple.second.value >= self.config.cardinality(j)
        {
            return None;
        }
        // index of (i, j) in lexicographic pair order
        let k = i * (2 * p - i - 1) / 2 + (j - i - 1);
        Some(self.offsets[k] + tuple.first.value * self.config.cardinality(j) + tuple.second.value)
    }

    pub fn contains(&self, tuple: &InteractionTuple) -> bool {
        self.slot(tuple).is_some_and(|s| self.uncovered[s])
    }

    /// Number of uncovered tuples the case covers.
    pub fn weight(&self, case: &TestCase) -> usize {
        self.weight_of(case.values())
    }

    /// [`TupleList::weight`] over a raw value slice of length `p`.
    pub fn weight_of(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.config.num_params());
        let cards = self.config.cardinalities();
        let mut count = 0;
        let mut k = 0;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                let slot = self.offsets[k] + values[i] * cards[j] + values[j];
                count += usize::from(self.uncovered[slot]);
                k += 1;
            }
        }
        count
    }

    /// Marks every tuple the case covers as covered; returns how many were
    /// still uncovered.
    pub fn remove_covered(&mut self, case: &TestCase) -> usize {
        let values = case.values();
        let cards = self.config.cardinalities();
        let mut removed = 0;
        let mut k = 0;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                let slot = self.offsets[k] + values[i] * cards[j] + values[j];
                if std::mem::replace(&mut self.uncovered[slot], false) {
                    removed += 1;
                }
                k += 1;
            }
        }
        self.remaining -= removed;
        removed
    }

    /// Uncovered tuples in `(i, j, a, b)` lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = InteractionTuple> + '_ {
        self.pairs
            .iter()
            .zip(&self.offsets)
            .flat_map(move |(&(i, j), &offset)| {
                let vj = self.config.cardinality(j);
                (0..self.config.cardinality(i) * vj)
                    .filter(move |&r| self.uncovered[offset + r])
                    .map(move |r| InteractionTuple {
                        first: Assignment {
                            param: i,
                            value: r / vj,
                        },
                        second: Assignment {
                            param: j,
                            value: r % vj,
                        },
                    })
            })
    }

    /// The `n`-th uncovered tuple in [`TupleList::iter`] order.
    pub fn nth_uncovered(&self, n: usize) -> Option<InteractionTuple> {
        self.iter().nth(n)
    }

    /// Debug dump, one `i,j,a,b` line per uncovered tuple.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in self.iter() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                t.first.param, t.second.param, t.first.value, t.second.value
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(cards: &[usize]) -> SutConfig {
        SutConfig::new(cards.to_vec()).unwrap()
    }

    fn case(values: &[usize]) -> TestCase {
        TestCase::from_raw(values.to_vec())
    }

    /// Seven-case reference suite for the surveillance-system example, On/Active = 0.
    fn surveillance_suite() -> Vec<Vec<usize>> {
        vec![
            vec![0, 0, 0, 0, 0],
            vec![0, 1, 1, 1, 1],
            vec![1, 0, 0, 0, 1],
            vec![1, 1, 1, 1, 0],
            vec![0, 0, 1, 0, 0],
            vec![1, 1, 0, 0, 1],
            vec![0, 0, 0, 1, 0],
        ]
    }

    #[test]
    fn pair_enumeration() {
        let five = parameter_pairs(&cfg(&[2; 5]));
        assert_eq!(five.len(), 10);
        assert_eq!(five[0], (0, 1));
        assert_eq!(five[4], (1, 2));
        assert_eq!(five[9], (3, 4));
        assert_eq!(parameter_pairs(&cfg(&[2, 2])), vec![(0, 1)]);
        assert_eq!(parameter_pairs(&cfg(&[3; 13])).len(), 78);
    }

    #[test]
    fn tuple_counts() {
        assert_eq!(TupleList::generate(&cfg(&[2; 5])).len(), 40);
        assert_eq!(TupleList::generate(&cfg(&[3, 4])).len(), 12);
        let l = TupleList::generate(&cfg(&[3; 13]));
        assert_eq!(l.len(), 702);
        assert_eq!(l.initial_count(), 702);
        assert_eq!(l.iter().count(), 702);
    }

    #[test]
    fn weight_against_full_and_empty_lists() {
        let config = cfg(&[2; 5]);
        let mut itl = TupleList::generate(&config);
        let c = case(&[1, 0, 1, 1, 0]);
        assert_eq!(itl.weight(&c), 10);
        assert_eq!(itl.weight(&c), 10);
        assert_eq!(itl.remove_covered(&c), 10);
        assert_eq!(itl.weight(&c), 0);
        assert_eq!(itl.remove_covered(&c), 0);
        assert_eq!(itl.len(), 30);

        for row in [[0, 0, 0, 0, 0], [1, 1, 1, 1, 1], [0, 1, 0, 0, 1], [1, 0, 0, 1, 1]] {
            itl.remove_covered(&case(&row));
        }
        let mut all = TupleList::generate(&config);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        for e in 0..2 {
                            all.remove_covered(&case(&[a, b, c, d, e]));
                        }
                    }
                }
            }
        }
        assert!(all.is_empty());
        assert_eq!(all.weight(&case(&[0, 1, 0, 1, 0])), 0);
    }

    #[test]
    fn surveillance_suite_empties_list() {
        let mut itl = TupleList::generate(&cfg(&[2; 5]));
        let mut total = 0;
        for row in surveillance_suite() {
            let c = case(&row);
            let w = itl.weight(&c);
            let before = itl.len();
            assert_eq!(itl.remove_covered(&c), w);
            assert_eq!(itl.len(), before - w);
            total += w;
        }
        assert!(itl.is_empty());
        assert_eq!(total, 40);
    }

    #[test]
    fn contains_and_iter_order() {
        let config = cfg(&[2, 3, 2]);
        let mut itl = TupleList::generate(&config);
        itl.remove_covered(&case(&[1, 2, 0]));
        let t = |i, a, j, b| {
            InteractionTuple::new(Assignment { param: i, value: a }, Assignment { param: j, value: b }).unwrap()
        };
        assert!(!itl.contains(&t(0, 1, 1, 2)));
        assert!(!itl.contains(&t(2, 0, 1, 2)));
        assert!(itl.contains(&t(0, 0, 2, 0)));
        assert!(!itl.contains(&t(0, 5, 2, 0)));
        let listed: Vec<_> = itl.iter().collect();
        let mut sorted = listed.clone();
        sorted.sort_by_key(|t| (t.first().param, t.second().param, t.first().value, t.second().value));
        assert_eq!(listed, sorted);
        assert_eq!(listed.len(), itl.len());
        assert!(itl.dump().starts_with("0,1,0,0\n"));
    }

    #[test]
    fn tuple_rejects_same_parameter() {
        let a = Assignment { param: 1, value: 0 };
        assert!(InteractionTuple::new(a, Assignment { param: 1, value: 1 }).is_none());
        let t = InteractionTuple::new(Assignment { param: 3, value: 1 }, Assignment { param: 0, value: 0 }).unwrap();
        assert_eq!(t.first().param, 0);
        assert_eq!(t.second().param, 3);
    }

    fn arb_config() -> impl Strategy<Value = SutConfig> {
        prop::collection::vec(2usize..=5, 2..=8).prop_map(|c| SutConfig::new(c).unwrap())
    }

    fn arb_config_and_cases() -> impl Strategy<Value = (SutConfig, Vec<Vec<usize>>)> {
        arb_config().prop_flat_map(|config| {
            let row = config.cardinalities().iter().map(|&v| 0..v).collect::<Vec<_>>();
            (Just(config), prop::collection::vec(row, 0..20))
        })
    }

    proptest! {
        #[test]
        fn count_matches_enumeration(config in arb_config()) {
            let cards = config.cardinalities();
            let mut brute = 0;
            for i in 0..cards.len() {
                for j in 0..cards.len() {
                    if i < j {
                        for _a in 0..cards[i] {
                            for _b in 0..cards[j] {
                                brute += 1;
                            }
                        }
                    }
                }
            }
            let itl = TupleList::generate(&config);
            prop_assert_eq!(itl.len(), brute);
            prop_assert_eq!(itl.iter().count(), brute);
        }

        #[test]
        fn removal_accounting_is_exact((config, rows) in arb_config_and_cases()) {
            let mut itl = TupleList::generate(&config);
            for row in rows {
                let c = TestCase::new(row, &config).unwrap();
                let w = itl.weight(&c);
                prop_assert!(w <= config.num_pairs());
                prop_assert_eq!(w, itl.weight(&c));
                let brute = itl.iter().filter(|t| t.is_covered_by(c.values())).count();
                prop_assert_eq!(w, brute);
                let before = itl.len();
                prop_assert_eq!(itl.remove_covered(&c), w);
                prop_assert_eq!(itl.len(), before - w);
            }
        }
    }
}
