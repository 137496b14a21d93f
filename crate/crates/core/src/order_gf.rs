//! Generating functions of saturated structures filtered by order.
//!
//! `S_p` counts saturated structures of order at least `p` and `R_p` those
//! among them closed by one outermost pair. Starting from `R_1 = R` and
//! `S_0 = S`, the closed forms below produce every `R_{p+1}` and `S_p`. Both
//! only divide by series with constant term `±1`, so everything stays in
//! the integers.

use std::io;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::series::{r_from_s, solve_saturated, IntSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderGfError {
    #[error("size {n} exceeds the truncation {truncation}")]
    OutOfRange { n: usize, truncation: usize },
    #[error("no saturated structure of size {n}")]
    EmptyClass { n: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Series in `z` and `R` that the recurrences reuse at every level.
#[derive(Debug, Clone)]
pub struct RecurrenceContext {
    r: IntSeries,
    // -R - z^2
    cubic_num: IntSeries,
    // -3R + 3R^2 + 3Rz^2 - z^2
    square_num: IntSeries,
    // 3R - 3
    square_den: IntSeries,
    // 6R - 3 - 3R^2 + z^2
    linear_den: IntSeries,
    // (R - 1) P_R with P_R = 3R^2 + 2(z^2 - 2)R + 1 - z^2
    constant_den: IntSeries,
    // 1 + 2z^2 + 2z - 2R - 2Rz - 2Rz^2 + R^2
    s_linear: IntSeries,
    // 1 + z + z^2 - R
    s_square: IntSeries,
    // (R - 1)^2
    r_minus_one_sq: IntSeries,
}

impl RecurrenceContext {
    pub fn new(r: &IntSeries) -> Result<Self, SeriesError> {
        let n = r.truncation();
        let poly = |c: &[i64]| IntSeries::from_ints(n, c);
        let r2 = r.try_mul(r)?;
        let z2 = poly(&[0, 0, 1]);
        let r_minus_one = r.try_sub(&poly(&[1]))?;
        let p_r = r2
            .scale_int(3)
            .try_add(&poly(&[-2, 0, 1]).try_mul(r)?.scale_int(2))?
            .try_add(&poly(&[1, 0, -1]))?;
        Ok(RecurrenceContext {
            r: r.clone(),
            cubic_num: (-r).try_sub(&z2)?,
            square_num: r2
                .scale_int(3)
                .try_sub(&r.scale_int(3))?
                .try_add(&r.shift(2).scale_int(3))?
                .try_sub(&z2)?,
            square_den: r_minus_one.scale_int(3),
            linear_den: r.scale_int(6).try_sub(&r2.scale_int(3))?.try_add(&poly(&[-3, 0, 1]))?,
            constant_den: r_minus_one.try_mul(&p_r)?,
            s_linear: poly(&[1, 2, 2])
                .try_sub(&poly(&[2, 2, 2]).try_mul(r)?)?
                .try_add(&r2)?,
            s_square: poly(&[1, 1, 1]).try_sub(r)?,
            r_minus_one_sq: r_minus_one.try_mul(&r_minus_one)?,
        })
    }

    pub fn r(&self) -> &IntSeries {
        &self.r
    }

    /// `R_{p+1}` from `R_p`:
    /// `[(-R-z^2) R_p^3 + (-3R+3R^2+3Rz^2-z^2) R_p^2] /
    ///  [-R_p^3 + (3R-3) R_p^2 + (6R-3-3R^2+z^2) R_p + (R-1) P_R]`.
    pub fn next_r(&self, r_p: &IntSeries) -> Result<IntSeries, SeriesError> {
        let r_p2 = r_p.try_mul(r_p)?;
        let r_p3 = r_p2.try_mul(r_p)?;
        let numerator = self
            .cubic_num
            .try_mul(&r_p3)?
            .try_add(&self.square_num.try_mul(&r_p2)?)?;
        let denominator = self
            .square_den
            .try_mul(&r_p2)?
            .try_sub(&r_p3)?
            .try_add(&self.linear_den.try_mul(r_p)?)?
            .try_add(&self.constant_den)?;
        numerator.try_div(&denominator)
    }

    /// `S_p` from `R_p`:
    /// `R_p [1+2z^2+2z-2R-2Rz-2Rz^2+R^2 + (1+z+z^2-R) R_p] /
    ///  [(R-1)^2 (R-R_p-1)^2]`.
    pub fn s_from_r(&self, r_p: &IntSeries) -> Result<IntSeries, SeriesError> {
        let inner = self.s_linear.try_add(&self.s_square.try_mul(r_p)?)?;
        let numerator = r_p.try_mul(&inner)?;
        let shifted = self
            .r
            .try_sub(r_p)?
            .try_sub(&IntSeries::one(self.r.truncation()))?;
        let denominator = self.r_minus_one_sq.try_mul(&shifted.try_mul(&shifted)?)?;
        numerator.try_div(&denominator)
    }
}

/// `R_{p+1}` from `R` and `R_p`.
pub fn next_r(r: &IntSeries, r_p: &IntSeries) -> Result<IntSeries, SeriesError> {
    RecurrenceContext::new(r)?.next_r(r_p)
}

/// `S_p` from `R` and `R_p`.
pub fn s_from_r(r: &IntSeries, r_p: &IntSeries) -> Result<IntSeries, SeriesError> {
    RecurrenceContext::new(r)?.s_from_r(r_p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderLevel {
    pub p: u32,
    pub s_p: IntSeries,
    pub r_p: IntSeries,
}

/// All order-filtered series for one truncation. The last level is the
/// first `p` whose `S_p` vanishes through the truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSpectrum {
    truncation: usize,
    base: IntSeries,
    levels: Vec<OrderLevel>,
}

impl OrderSpectrum {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `S = S_0`.
    pub fn base(&self) -> &IntSeries {
        &self.base
    }

    pub fn levels(&self) -> &[OrderLevel] {
        &self.levels
    }

    /// The `p` of the terminal, identically zero level.
    pub fn p_stop(&self) -> u32 {
        self.levels.last().map_or(1, |l| l.p)
    }

    /// `[z^n]S_p`; zero for `p` beyond the spectrum.
    pub fn s_p(&self, p: u32, n: usize) -> BigInt {
        if p == 0 {
            return self.base.coeff(n);
        }
        self.levels
            .get(p as usize - 1)
            .map_or_else(BigInt::zero, |l| l.s_p.coeff(n))
    }

    /// Minimal size of a saturated structure of order at least `p`, for
    /// every `p` below `p_stop`.
    pub fn minimal_sizes(&self) -> Vec<usize> {
        std::iter::once(&self.base)
            .chain(self.levels.iter().map(|l| &l.s_p))
            .map_while(|s| s.valuation())
            .collect()
    }

    fn check(&self, n: usize) -> Result<(), OrderGfError> {
        if n > self.truncation {
            Err(OrderGfError::OutOfRange {
                n,
                truncation: self.truncation,
            })
        } else {
            Ok(())
        }
    }

    /// Writes `n,p,count` rows for `p = 0..p_stop` and every `n`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "p", "count"])?;
        for n in 0..=self.truncation {
            for p in 0..self.p_stop() {
                w.write_record([n.to_string(), p.to_string(), self.s_p(p, n).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the spectrum from `R_1 = R`, `S_0 = S` up to the first vanishing
/// `S_p`.
pub fn order_spectrum(truncation: usize) -> Result<OrderSpectrum, OrderGfError> {
    let s = solve_saturated(truncation);
    spectrum_from(&s)
}

/// Builds the spectrum from an already solved `S`.
pub fn spectrum_from(s: &IntSeries) -> Result<OrderSpectrum, OrderGfError> {
    let ctx = RecurrenceContext::new(&r_from_s(s))?;
    let mut levels = Vec::new();
    let mut r_p = ctx.r().clone();
    for p in 1.. {
        let s_p = ctx.s_from_r(&r_p)?;
        let done = s_p.is_zero();
        let next = if done { None } else { Some(ctx.next_r(&r_p)?) };
        levels.push(OrderLevel { p, s_p, r_p });
        match next {
            Some(r) => r_p = r,
            None => break,
        }
    }
    Ok(OrderSpectrum {
        truncation: s.truncation(),
        base: s.clone(),
        levels,
    })
}

/// Exact distribution of the order among saturated structures of size `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderDistribution {
    pub n: usize,
    /// `counts[p] = S_p(n) - S_{p+1}(n)`.
    #[serde(serialize_with = "serialize_decimal_vec")]
    pub counts: Vec<BigInt>,
    #[serde(serialize_with = "serialize_decimal")]
    pub total: BigInt,
}

fn serialize_decimal<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn serialize_decimal_vec<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

impl OrderDistribution {
    /// `P(order = p)`.
    pub fn probability(&self, p: usize) -> BigRational {
        let c = self.counts.get(p).cloned().unwrap_or_default();
        BigRational::new(c, self.total.clone())
    }

    /// `sum_p p * c_p / total`.
    pub fn mean(&self) -> BigRational {
        let weighted: BigInt = self
            .counts
            .iter()
            .enumerate()
            .map(|(p, c)| c * BigInt::from(p))
            .sum();
        BigRational::new(weighted, self.total.clone())
    }
}

pub fn order_distribution(
    spectrum: &OrderSpectrum,
    n: usize,
) -> Result<OrderDistribution, OrderGfError> {
    spectrum.check(n)?;
    let mut counts: Vec<BigInt> = (0..spectrum.p_stop())
        .map(|p| spectrum.s_p(p, n) - spectrum.s_p(p + 1, n))
        .collect();
    while counts.len() > 1 && counts.last().is_some_and(Zero::is_zero) {
        counts.pop();
    }
    Ok(OrderDistribution {
        n,
        counts,
        total: spectrum.s_p(0, n),
    })
}

/// `E xi_n = sum_{p>=1} S_p(n) / S(n)`, exact.
pub fn expected_order(spectrum: &OrderSpectrum, n: usize) -> Result<BigRational, OrderGfError> {
    spectrum.check(n)?;
    let total = spectrum.s_p(0, n);
    if total.is_zero() {
        return Err(OrderGfError::EmptyClass { n });
    }
    let sum: BigInt = (1..spectrum.p_stop()).map(|p| spectrum.s_p(p, n)).sum();
    Ok(BigRational::new(sum, total))
}

/// `P(|xi_n - E xi_n| >= x)`, exact.
pub fn tail_probability(
    spectrum: &OrderSpectrum,
    n: usize,
    x: &BigRational,
) -> Result<BigRational, OrderGfError> {
    let mean = expected_order(spectrum, n)?;
    let dist = order_distribution(spectrum, n)?;
    let mass: BigInt = dist
        .counts
        .iter()
        .enumerate()
        .filter(|(p, _)| (BigRational::from_integer(BigInt::from(*p)) - &mean).abs() >= *x)
        .map(|(_, c)| c.clone())
        .sum();
    Ok(BigRational::new(mass, dist.total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Series;

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn first_recurrence_step() {
        let s = solve_saturated(16);
        let r = r_from_s(&s);
        let r2 = next_r(&r, &r).unwrap();
        assert_eq!(r2.valuation(), Some(8));
        assert_eq!(r2.coeff(8), int(1));
        assert!(r2.is_nonnegative());
        for n in 0..=16 {
            assert!(r2.coeff(n) <= r.coeff(n));
        }
    }

    #[test]
    fn level_one_drops_unpaired_structures() {
        let s = solve_saturated(20);
        let r = r_from_s(&s);
        let s1 = s_from_r(&r, &r).unwrap();
        let expected = s.try_sub(&IntSeries::from_ints(20, &[0, 1, 1])).unwrap();
        assert_eq!(s1, expected);
        assert_eq!(s1.coeff(4), int(3));
    }

    #[test]
    fn spectrum_at_eight() {
        let spectrum = order_spectrum(8).unwrap();
        assert_eq!(spectrum.p_stop(), 3);
        assert!(spectrum.levels()[2].s_p.is_zero());
        assert!(spectrum.s_p(2, 8) >= int(1));
        assert_eq!(spectrum.minimal_sizes(), vec![1, 3, 8]);
    }

    #[test]
    fn spectrum_monotone() {
        let spectrum = order_spectrum(60).unwrap();
        for n in 0..=60 {
            for p in 0..spectrum.p_stop() {
                assert!(spectrum.s_p(p + 1, n) <= spectrum.s_p(p, n));
                assert!(!spectrum.s_p(p, n).is_negative());
            }
        }
        assert_eq!(spectrum.minimal_sizes(), vec![1, 3, 8, 18, 38]);
    }

    #[test]
    fn distributions() {
        let spectrum = order_spectrum(12).unwrap();
        let d1 = order_distribution(&spectrum, 1).unwrap();
        assert_eq!(d1.counts, vec![int(1)]);
        let d4 = order_distribution(&spectrum, 4).unwrap();
        assert_eq!(d4.counts, vec![int(0), int(3)]);
        assert_eq!(d4.total, int(3));
        let d8 = order_distribution(&spectrum, 8).unwrap();
        assert!(d8.counts[2] >= int(1));
        assert_eq!(d8.counts.iter().sum::<BigInt>(), d8.total);
        assert_eq!(
            order_distribution(&spectrum, 13),
            Err(OrderGfError::OutOfRange { n: 13, truncation: 12 })
        );
    }

    #[test]
    fn expectations_and_tails() {
        let spectrum = order_spectrum(12).unwrap();
        assert_eq!(expected_order(&spectrum, 3).unwrap(), BigRational::from_integer(int(1)));
        assert!(expected_order(&spectrum, 2).unwrap().is_zero());
        assert_eq!(expected_order(&spectrum, 0), Err(OrderGfError::EmptyClass { n: 0 }));
        let zero = BigRational::zero();
        let one = BigRational::from_integer(int(1));
        for n in 1..=12 {
            assert_eq!(tail_probability(&spectrum, n, &zero).unwrap(), one);
            let d = order_distribution(&spectrum, n).unwrap();
            assert_eq!(d.mean(), expected_order(&spectrum, n).unwrap());
        }
        assert!(tail_probability(&spectrum, 3, &one).unwrap().is_zero());
    }

    #[test]
    fn csv_export() {
        let spectrum = order_spectrum(3).unwrap();
        let mut buf = Vec::new();
        spectrum.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,p,count\n0,0,0\n0,1,0\n"));
        assert!(text.ends_with("3,0,1\n3,1,1\n"));
    }

    #[test]
    fn nonunit_denominator_is_reported() {
        // Inconsistent inputs: the denominator of next_r has constant term
        // -(c+1)^3 for [z^0]R = 0, [z^0]R_p = c.
        let r = Series::from_ints(4, &[0, 0, 0, 1]);
        let r_p = Series::from_ints(4, &[-1]);
        assert_eq!(next_r(&r, &r_p), Err(SeriesError::NonUnitDivisor));
        let shifted = Series::from_ints(4, &[1, 0, 1]);
        assert_eq!(s_from_r(&shifted, &r), Err(SeriesError::NonUnitDivisor));
    }
}
