//! Brute-force enumeration of secondary and saturated structures.
//!
//! This is the ground truth the series-based modules are checked against.
//! Structures are built recursively over the leftmost position (unpaired,
//! or paired with each admissible partner) and saturation is decided by
//! [`is_saturated`], independently of any generating function.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dotbracket::{is_saturated, order, parse, Structure, MIN_PAIR_DISTANCE};

pub const DEFAULT_ENUMERATION_CUTOFF: usize = 16;
pub const DEFAULT_CENSUS_CUTOFF: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("size {n} exceeds the enumeration cutoff {cutoff}")]
    CutoffExceeded { n: usize, cutoff: usize },
    #[error("size must be at least 1")]
    EmptySize,
}

/// Feasibility limits for brute-force enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub enumeration_cutoff: usize,
    pub census_cutoff: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            enumeration_cutoff: DEFAULT_ENUMERATION_CUTOFF,
            census_cutoff: DEFAULT_CENSUS_CUTOFF,
        }
    }
}

impl OracleConfig {
    fn check(n: usize, cutoff: usize) -> Result<(), OracleError> {
        if n == 0 {
            Err(OracleError::EmptySize)
        } else if n > cutoff {
            Err(OracleError::CutoffExceeded { n, cutoff })
        } else {
            Ok(())
        }
    }

    pub fn enumerate_secondary(&self, n: usize) -> Result<Vec<Structure>, OracleError> {
        Self::check(n, self.enumeration_cutoff)?;
        let mut texts = words_of_length(n);
        texts.sort_by_cached_key(|t| sort_key(t));
        Ok(texts
            .iter()
            .map(|t| parse(t).expect("generated structures are valid"))
            .collect())
    }

    pub fn enumerate_saturated(&self, n: usize) -> Result<Vec<Structure>, OracleError> {
        Ok(self
            .enumerate_secondary(n)?
            .into_iter()
            .filter(is_saturated)
            .collect())
    }

    pub fn saturated_order_census(&self, n: usize) -> Result<Census, OracleError> {
        Self::check(n, self.census_cutoff)?;
        let all = self.enumerate_secondary(n)?;
        let total_secondary = all.len() as u64;
        let mut by_order = BTreeMap::new();
        let mut total_saturated = 0;
        for s in all.iter().filter(|s| is_saturated(s)) {
            *by_order.entry(order(s).value()).or_insert(0) += 1;
            total_saturated += 1;
        }
        Ok(Census {
            n,
            total_secondary,
            total_saturated,
            by_order,
        })
    }
}

/// All valid structures of size `n`, sorted with `'(' < '.' < ')'`.
pub fn enumerate_secondary(n: usize) -> Result<Vec<Structure>, OracleError> {
    OracleConfig::default().enumerate_secondary(n)
}

/// The saturated structures of size `n`, in the same order.
pub fn enumerate_saturated(n: usize) -> Result<Vec<Structure>, OracleError> {
    OracleConfig::default().enumerate_saturated(n)
}

/// Saturated structures of size `n` grouped by exact order.
pub fn saturated_order_census(n: usize) -> Result<Census, OracleError> {
    OracleConfig::default().saturated_order_census(n)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    pub n: usize,
    pub total_secondary: u64,
    pub total_saturated: u64,
    pub by_order: BTreeMap<u32, u64>,
}

impl Census {
    /// Number of saturated structures with order at least `p`.
    pub fn at_least(&self, p: u32) -> u64 {
        self.by_order.range(p..).map(|(_, c)| c).sum()
    }
}

// Every structure on `n` positions, as dot-bracket bytes. The leftmost
// position is either unpaired or closes at some j >= 2, splitting the rest
// into an interior and a suffix. Words of each length are built once.
fn words_of_length(n: usize) -> Vec<String> {
    let mut table: Vec<Vec<String>> = vec![vec![String::new()]];
    for len in 1..=n {
        let mut words = Vec::new();
        for rest in &table[len - 1] {
            words.push(format!(".{rest}"));
        }
        for j in MIN_PAIR_DISTANCE..len {
            let (inner, outer) = (&table[j - 1], &table[len - j - 1]);
            for a in inner {
                for b in outer {
                    words.push(format!("({a}){b}"));
                }
            }
        }
        table.push(words);
    }
    table.swap_remove(n)
}

fn sort_key(text: &str) -> Vec<u8> {
    text.bytes()
        .map(|c| match c {
            b'(' => 0,
            b'.' => 1,
            _ => 2,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dotbracket::addable_pairs;

    fn texts(v: &[Structure]) -> Vec<String> {
        v.iter().map(Structure::serialize).collect()
    }

    #[test]
    fn secondary_examples() {
        assert_eq!(texts(&enumerate_secondary(1).unwrap()), ["."]);
        assert_eq!(texts(&enumerate_secondary(3).unwrap()), ["(.)", "..."]);
        assert_eq!(enumerate_secondary(6).unwrap().len(), 17);
    }

    #[test]
    fn saturated_examples() {
        assert_eq!(texts(&enumerate_saturated(2).unwrap()), [".."]);
        assert_eq!(texts(&enumerate_saturated(3).unwrap()), ["(.)"]);
        assert_eq!(texts(&enumerate_saturated(4).unwrap()), ["(..)", "(.).", ".(.)"]);
    }

    #[test]
    fn census_examples() {
        assert_eq!(saturated_order_census(1).unwrap().by_order, BTreeMap::from([(0, 1)]));
        assert_eq!(saturated_order_census(4).unwrap().by_order, BTreeMap::from([(1, 3)]));
        let c8 = saturated_order_census(8).unwrap();
        assert!(c8.by_order[&2] >= 1);
        assert_eq!(c8.by_order.values().sum::<u64>(), c8.total_saturated);
        assert!(c8.total_saturated <= c8.total_secondary);
        assert_eq!(c8.at_least(2), c8.by_order[&2]);
    }

    #[test]
    fn cutoffs() {
        assert_eq!(
            enumerate_secondary(17),
            Err(OracleError::CutoffExceeded { n: 17, cutoff: 16 })
        );
        assert_eq!(
            saturated_order_census(15),
            Err(OracleError::CutoffExceeded { n: 15, cutoff: 14 })
        );
        assert_eq!(enumerate_saturated(0), Err(OracleError::EmptySize));
        let wide = OracleConfig {
            enumeration_cutoff: 17,
            census_cutoff: 17,
        };
        assert!(wide.saturated_order_census(15).is_ok());
    }

    #[test]
    fn ordering_is_lexicographic_and_unique() {
        let all = texts(&enumerate_secondary(9).unwrap());
        for w in all.windows(2) {
            assert!(sort_key(&w[0]) < sort_key(&w[1]));
        }
    }

    #[test]
    fn addable_pairs_keep_structures_valid() {
        for n in 1..=9 {
            for s in enumerate_secondary(n).unwrap() {
                for (i, j) in addable_pairs(&s) {
                    assert!(s.with_pair(i, j).is_ok(), "{s} + ({i},{j})");
                }
            }
        }
    }
}
