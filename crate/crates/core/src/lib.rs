//! Exact combinatorics of saturated RNA secondary structures.
//!
//! The crate counts, enumerates, samples and analyzes saturated secondary
//! structures, with special attention to their order (the Horton-Strahler
//! type nesting depth of hairpin loops):
//!
//! * [`dotbracket`] parses structures and computes saturation and order,
//! * [`series`] holds exact truncated power series and the solvers for the
//!   generating functions of secondary and saturated structures,
//! * [`order_gf`] filters the saturated series by order and derives exact
//!   order distributions, expectations and tails,
//! * [`oracle`] enumerates structures by brute force,
//! * [`asymptotics`] locates the dominant singularity and checks the
//!   asymptotic laws numerically,
//! * [`sampler`] draws saturated structures uniformly at random,
//! * [`cli`] is the command-line front end.

pub mod asymptotics;
pub mod cli;
pub mod dotbracket;
pub mod format;
pub mod oracle;
pub mod order_gf;
pub mod sampler;
pub mod series;

pub use dotbracket::{OrderValue, ParseError, Structure};
pub use order_gf::{OrderDistribution, OrderSpectrum};
pub use series::{IntSeries, RatSeries, Series, SeriesError};
