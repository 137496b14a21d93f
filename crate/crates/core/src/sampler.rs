//! Exact uniform random generation of saturated structures.
//!
//! A saturated structure is a nonempty sequence of enclosed blocks `(s)`,
//! with `s` saturated, into which at most one run of one or two unpaired
//! positions is inserted:
//!
//! ```text
//! S = R/(1-R) + (z+z^2)/(1-R)^2,    R = z^2 S
//! ```
//!
//! The sampler follows this decomposition with the recursive method: every
//! choice is drawn with probability proportional to the exact number of
//! completions, using unbiased big-integer draws.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Draw `index` of a batch uses the same seed on
//! stream `index`, so batches are reproducible and independent of how they
//! are split across workers.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dotbracket::{parse, Structure};
use crate::series::{r_from_s, solve_saturated, IntSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("size {n} exceeds the table truncation {truncation}")]
    OutOfRange { n: usize, truncation: usize },
    #[error("no saturated structure of size {n}")]
    Unreachable { n: usize },
}

/// Exact counting tables driving the sampler. Immutable once built; the
/// cumulative weight tables are filled lazily and are safe to share.
#[derive(Debug)]
pub struct SamplerTables {
    truncation: usize,
    s_counts: Vec<BigUint>,
    r_counts: Vec<BigUint>,
    // [z^n] 1/(1-R): sequences of blocks.
    q_counts: Vec<BigUint>,
    // [z^n] 1/(1-R)^2: pairs of block sequences.
    q2_counts: Vec<BigUint>,
    // Cumulative weights r_j q_{m-j} over the first block size j.
    first_block: Vec<OnceLock<Vec<BigUint>>>,
    // Cumulative weights q_k q_{m-k} over the size k before the unpaired run.
    split: Vec<OnceLock<Vec<BigUint>>>,
}

fn to_unsigned(s: &IntSeries) -> Vec<BigUint> {
    s.coeffs()
        .iter()
        .map(|c| c.to_biguint().expect("counting series are nonnegative"))
        .collect()
}

/// Builds the tables from the solved saturated series and checks the
/// decomposition coefficientwise.
///
/// # Panics
/// If the decomposition identity fails, which would mean the series and
/// the sampler disagree on the combinatorial class.
pub fn build_tables(truncation: usize) -> SamplerTables {
    SamplerTables::new(&solve_saturated(truncation))
}

impl SamplerTables {
    pub fn new(s: &IntSeries) -> Self {
        let n = s.truncation();
        let r = r_from_s(s);
        let q = IntSeries::one(n)
            .try_div(&IntSeries::one(n).try_sub(&r).expect("same truncation"))
            .expect("1 - R has constant term 1");
        let q2 = q.try_mul(&q).expect("same truncation");
        let tables = SamplerTables {
            truncation: n,
            s_counts: to_unsigned(s),
            r_counts: to_unsigned(&r),
            q_counts: to_unsigned(&q),
            q2_counts: to_unsigned(&q2),
            first_block: (0..=n).map(|_| OnceLock::new()).collect(),
            split: (0..=n).map(|_| OnceLock::new()).collect(),
        };
        for m in 1..=n {
            let (dotless, dotted) = tables.branch_counts(m);
            assert_eq!(dotless + dotted, tables.s_counts[m], "decomposition fails at z^{m}");
        }
        tables
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn s_counts(&self) -> &[BigUint] {
        &self.s_counts
    }

    pub fn r_counts(&self) -> &[BigUint] {
        &self.r_counts
    }

    pub fn q_counts(&self) -> &[BigUint] {
        &self.q_counts
    }

    /// Counts of size-`m` saturated structures without and with a run of
    /// unpaired positions at the top level.
    pub fn branch_counts(&self, m: usize) -> (BigUint, BigUint) {
        let dotless = if m == 0 {
            BigUint::zero()
        } else {
            self.q_counts[m].clone()
        };
        let mut dotted = BigUint::zero();
        for run in 1..=2 {
            if m >= run {
                dotted += &self.q2_counts[m - run];
            }
        }
        (dotless, dotted)
    }

    fn first_block_weights(&self, m: usize) -> &[BigUint] {
        self.first_block[m].get_or_init(|| {
            let mut acc = BigUint::zero();
            (0..=m)
                .map(|j| {
                    acc += &self.r_counts[j] * &self.q_counts[m - j];
                    acc.clone()
                })
                .collect()
        })
    }

    fn split_weights(&self, m: usize) -> &[BigUint] {
        self.split[m].get_or_init(|| {
            let mut acc = BigUint::zero();
            (0..=m)
                .map(|k| {
                    acc += &self.q_counts[k] * &self.q_counts[m - k];
                    acc.clone()
                })
                .collect()
        })
    }

    /// One uniform saturated structure of size `n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Structure, SamplerError> {
        if n > self.truncation {
            return Err(SamplerError::OutOfRange {
                n,
                truncation: self.truncation,
            });
        }
        if n == 0 || self.s_counts[n].is_zero() {
            return Err(SamplerError::Unreachable { n });
        }
        let mut out = String::with_capacity(n);
        let mut tasks = vec![Task::Saturated(n)];
        while let Some(task) = tasks.pop() {
            match task {
                Task::Emit(text) => out.push_str(text),
                Task::Saturated(m) => {
                    let (dotless, dotted) = self.branch_counts(m);
                    let x = rng.gen_biguint_below(&(&dotless + &dotted));
                    if x < dotless {
                        tasks.push(Task::Blocks(m));
                        continue;
                    }
                    let x = x - dotless;
                    let (run, rest) = if x < self.q2_counts[m - 1] {
                        (".", m - 1)
                    } else {
                        ("..", m - 2)
                    };
                    // Sizes of the block sequences before and after the run.
                    let before = draw_index(self.split_weights(rest), rng);
                    tasks.push(Task::Blocks(rest - before));
                    tasks.push(Task::Emit(run));
                    tasks.push(Task::Blocks(before));
                }
                Task::Blocks(0) => {}
                Task::Blocks(m) => {
                    let first = draw_index(self.first_block_weights(m), rng);
                    tasks.push(Task::Blocks(m - first));
                    tasks.push(Task::Emit(")"));
                    tasks.push(Task::Saturated(first - 2));
                    tasks.push(Task::Emit("("));
                }
            }
        }
        let s = parse(&out).expect("sampler emits valid structures");
        debug_assert!(crate::dotbracket::is_saturated(&s), "{s} is not saturated");
        debug_assert_eq!(s.len(), n);
        Ok(s)
    }
}

enum Task {
    Saturated(usize),
    Blocks(usize),
    Emit(&'static str),
}

// Index i drawn with probability proportional to cumulative[i] - cumulative[i-1].
fn draw_index<R: Rng + ?Sized>(cumulative: &[BigUint], rng: &mut R) -> usize {
    let total = cumulative.last().expect("nonempty weight table");
    let x = rng.gen_biguint_below(total);
    cumulative.partition_point(|c| *c <= x)
}

/// The generator used for draw `index` under `seed`.
pub fn generator(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One uniform saturated structure of size `n`, deterministic in `seed`.
pub fn sample_uniform(tables: &SamplerTables, n: usize, seed: u64) -> Result<Structure, SamplerError> {
    tables.sample(n, &mut generator(seed, 0))
}

/// `count` independent draws; draw `i` equals a draw from stream `i`.
pub fn sample_batch(
    tables: &SamplerTables,
    n: usize,
    seed: u64,
    count: usize,
) -> Result<Vec<Structure>, SamplerError> {
    (0..count as u64)
        .map(|i| tables.sample(n, &mut generator(seed, i)))
        .collect()
}
