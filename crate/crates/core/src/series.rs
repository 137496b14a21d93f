//! Truncated formal power series with exact coefficients, and the solvers
//! for the generating functions of secondary and saturated structures.
//!
//! A [`Series`] of truncation `N` stores the coefficients of `z^0..=z^N`.
//! Counting series use [`IntSeries`] (big integers): every divisor that
//! occurs in the order recurrences has constant term `±1`, a unit of the
//! integers, so integrality is preserved end to end. [`RatSeries`] serves
//! general division and the integrality assertion [`RatSeries::to_integer`].

use std::fmt::{self, Debug};
use std::io;
use std::ops::{AddAssign, Neg, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },
    #[error("divisor has a constant term that is not a unit")]
    NonUnitDivisor,
    #[error("coefficient of z^{index} is not an integer")]
    NonIntegral { index: usize },
    #[error("fixed-point iteration did not stabilize within {passes} passes")]
    Unconverged { passes: usize },
}

/// Coefficient ring of a series.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    fn mul_ref(&self, rhs: &Self) -> Self;

    /// Multiplicative inverse, if the element is a unit.
    fn inverse(&self) -> Option<Self>;

    fn from_i64(value: i64) -> Self;
}

impl Coefficient for BigInt {
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn inverse(&self) -> Option<Self> {
        (self.is_one() || (-self).is_one()).then(|| self.clone())
    }

    fn from_i64(value: i64) -> Self {
        BigInt::from(value)
    }
}

impl Coefficient for BigRational {
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn inverse(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }

    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }
}

/// Coefficients of `z^0..=z^N`.
#[derive(Clone, PartialEq, Eq)]
pub struct Series<C = BigInt> {
    coeffs: Vec<C>,
}

pub type IntSeries = Series<BigInt>;
pub type RatSeries = Series<BigRational>;

impl<C: Coefficient> Series<C> {
    pub fn zero(truncation: usize) -> Self {
        Series {
            coeffs: vec![C::zero(); truncation + 1],
        }
    }

    pub fn one(truncation: usize) -> Self {
        Self::monomial(truncation, 0, C::one())
    }

    /// `coeff * z^power`, truncated.
    pub fn monomial(truncation: usize, power: usize, coeff: C) -> Self {
        let mut s = Self::zero(truncation);
        if power <= truncation {
            s.coeffs[power] = coeff;
        }
        s
    }

    /// Polynomial from small integer coefficients, lowest degree first.
    pub fn from_ints(truncation: usize, coeffs: &[i64]) -> Self {
        let mut s = Self::zero(truncation);
        for (k, &c) in coeffs.iter().enumerate().take(truncation + 1) {
            s.coeffs[k] = C::from_i64(c);
        }
        s
    }

    /// Series of truncation `coeffs.len() - 1`.
    ///
    /// # Panics
    /// If `coeffs` is empty.
    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least one coefficient");
        Series { coeffs }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Coefficient of `z^n`; zero beyond the truncation.
    pub fn coeff(&self, n: usize) -> C {
        self.coeffs.get(n).cloned().unwrap_or_else(C::zero)
    }

    /// Index of the first nonzero coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    /// Same coefficients at a different truncation (zero-padded if longer).
    pub fn retruncate(&self, truncation: usize) -> Self {
        let mut coeffs: Vec<C> = self.coeffs.iter().take(truncation + 1).cloned().collect();
        coeffs.resize(truncation + 1, C::zero());
        Series { coeffs }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.truncation();
        let mut s = Self::zero(n);
        for i in 0..=n.saturating_sub(k) {
            if i + k <= n {
                s.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        s
    }

    pub fn scale(&self, factor: &C) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|c| c.mul_ref(factor)).collect(),
        }
    }

    pub fn scale_int(&self, factor: i64) -> Self {
        self.scale(&C::from_i64(factor))
    }

    fn check_same(&self, other: &Self) -> Result<usize, SeriesError> {
        if self.truncation() == other.truncation() {
            Ok(self.truncation())
        } else {
            Err(SeriesError::TruncationMismatch {
                left: self.truncation(),
                right: other.truncation(),
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    /// Truncated Cauchy product (schoolbook, skipping leading zeros).
    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        let n = self.check_same(other)?;
        let mut out = Self::zero(n);
        let (Some(va), Some(vb)) = (self.valuation(), other.valuation()) else {
            return Ok(out);
        };
        for (k, slot) in out.coeffs.iter_mut().enumerate().skip(va + vb) {
            let mut acc = C::zero();
            for i in va..=k - vb {
                let (a, b) = (&self.coeffs[i], &other.coeffs[k - i]);
                if !a.is_zero() && !b.is_zero() {
                    acc += &a.mul_ref(b);
                }
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// Quotient `q` with `q * divisor = self` through the truncation.
    pub fn try_div(&self, divisor: &Self) -> Result<Self, SeriesError> {
        let n = self.check_same(divisor)?;
        let inv = divisor.coeffs[0].inverse().ok_or(SeriesError::NonUnitDivisor)?;
        let support: Vec<usize> = (1..=n).filter(|&i| !divisor.coeffs[i].is_zero()).collect();
        let mut q: Vec<C> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[k].clone();
            for &i in support.iter().take_while(|&&i| i <= k) {
                let qk = &q[k - i];
                if !qk.is_zero() {
                    acc -= &qk.mul_ref(&divisor.coeffs[i]);
                }
            }
            q.push(acc.mul_ref(&inv));
        }
        Ok(Series { coeffs: q })
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, exponent: u32) -> Self {
        let mut out = Self::one(self.truncation());
        for _ in 0..exponent {
            out = out.try_mul(self).expect("same truncation");
        }
        out
    }
}

/// Truncated Cauchy product.
pub fn ps_mul<C: Coefficient>(a: &Series<C>, b: &Series<C>) -> Result<Series<C>, SeriesError> {
    a.try_mul(b)
}

/// Truncated quotient; the divisor must have a unit constant term.
pub fn ps_div<C: Coefficient>(a: &Series<C>, b: &Series<C>) -> Result<Series<C>, SeriesError> {
    a.try_div(b)
}

impl<C: Coefficient> Neg for &Series<C> {
    type Output = Series<C>;

    fn neg(self) -> Series<C> {
        Series {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl<C: Debug> Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Series")
            .field("truncation", &(self.coeffs.len() - 1))
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl IntSeries {
    pub fn to_rational(&self) -> RatSeries {
        Series {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        }
    }

    /// True if every coefficient is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Writes `n,coefficient` rows with a header.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "coefficient"])?;
        for (n, c) in self.coeffs.iter().enumerate() {
            w.write_record([n.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON array of decimal strings.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs
                .iter()
                .map(|c| serde_json::Value::String(c.to_string()))
                .collect(),
        )
    }
}

impl RatSeries {
    /// Asserts integrality of every coefficient.
    pub fn to_integer(&self) -> Result<IntSeries, SeriesError> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(index, c)| {
                if c.is_integer() {
                    Ok(c.to_integer())
                } else {
                    Err(SeriesError::NonIntegral { index })
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Series::from_coeffs)
    }
}

/// Power series `S(z)` counting saturated structures by size, through `z^N`.
///
/// Coefficients are produced one at a time from
/// `S = z + z^2 + z^2 S + 2 z^2 S^2 - z^4 S^2 - z^4 S^3`, a rearrangement of
/// the cubic `-z^4 S^3 - z^2 (z^2 - 2) S^2 + (z^2 - 1) S + z (1 + z) = 0`.
/// `[z^n]` of the right-hand side only involves `[z^k]S` for `k <= n - 2`,
/// so each step fixes the next coefficient; the running coefficients of
/// `S^2` and `S^3` are maintained alongside.
pub fn solve_saturated(truncation: usize) -> IntSeries {
    let n_max = truncation;
    let mut s = vec![BigInt::zero(); n_max + 1];
    let mut s2 = vec![BigInt::zero(); n_max + 1];
    let mut s3 = vec![BigInt::zero(); n_max + 1];
    for n in 1..=n_max {
        let mut v = BigInt::from(u8::from(n <= 2));
        if n >= 2 {
            v += &s[n - 2];
            v += &s2[n - 2] * 2u32;
        }
        if n >= 4 {
            v -= &s2[n - 4];
            v -= &s3[n - 4];
        }
        s[n] = v;
        s2[n] = convolve_at(&s, &s, n);
        s3[n] = convolve_at(&s, &s2, n);
    }
    Series::from_coeffs(s)
}

/// Power series `T(z)` counting all secondary structures, the solution of
/// `T = z + z T + z^2 T + z^2 T^2` with `[z^0]T = 0`.
pub fn solve_secondary(truncation: usize) -> IntSeries {
    let n_max = truncation;
    let mut t = vec![BigInt::zero(); n_max + 1];
    let mut t2 = vec![BigInt::zero(); n_max + 1];
    for n in 1..=n_max {
        let mut v = BigInt::from(u8::from(n == 1));
        v += &t[n - 1];
        if n >= 2 {
            v += &t[n - 2];
            v += &t2[n - 2];
        }
        t[n] = v;
        t2[n] = convolve_at(&t, &t, n);
    }
    Series::from_coeffs(t)
}

// [z^n] of a*b, given both have zero constant term.
fn convolve_at(a: &[BigInt], b: &[BigInt], n: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for i in 1..n {
        if !a[i].is_zero() && !b[n - i].is_zero() {
            acc += &a[i] * &b[n - i];
        }
    }
    acc
}

/// Solves for `S` by whole-series fixed-point passes of
/// `S <- z + z^2 + z^2 S + 2 z^2 S^2 - z^4 S^2 - z^4 S^3`, starting from zero.
///
/// Stops when two consecutive passes agree; fails after `N + 2` passes.
pub fn solve_saturated_fixed_point(truncation: usize) -> Result<IntSeries, SeriesError> {
    let n = truncation;
    let base = IntSeries::from_ints(n, &[0, 1, 1]);
    fixed_point(n, |s| {
        let s2 = s.try_mul(s)?;
        let s3 = s2.try_mul(s)?;
        base.try_add(&s.shift(2))?
            .try_add(&s2.shift(2).scale_int(2))?
            .try_sub(&s2.shift(4))?
            .try_sub(&s3.shift(4))
    })
}

/// Whole-series fixed-point solver for `T = z + z T + z^2 T + z^2 T^2`.
pub fn solve_secondary_fixed_point(truncation: usize) -> Result<IntSeries, SeriesError> {
    let n = truncation;
    let base = IntSeries::from_ints(n, &[0, 1]);
    fixed_point(n, |t| {
        let t2 = t.try_mul(t)?;
        base.try_add(&t.shift(1))?
            .try_add(&t.shift(2))?
            .try_add(&t2.shift(2))
    })
}

fn fixed_point<F>(truncation: usize, step: F) -> Result<IntSeries, SeriesError>
where
    F: Fn(&IntSeries) -> Result<IntSeries, SeriesError>,
{
    let cap = truncation + 2;
    let mut current = IntSeries::zero(truncation);
    for _ in 0..cap {
        let next = step(&current)?;
        if next == current {
            return Ok(current);
        }
        current = next;
    }
    Err(SeriesError::Unconverged { passes: cap })
}

/// `R(z) = z^2 S(z)`: saturated structures closed by one outermost pair.
pub fn r_from_s(s: &IntSeries) -> IntSeries {
    s.shift(2)
}

/// Coefficients of `-z^4 S^3 - z^2 (z^2 - 2) S^2 + (z^2 - 1) S + z (1 + z)`.
pub fn saturated_cubic_residual<C: Coefficient>(s: &Series<C>) -> Result<Series<C>, SeriesError> {
    let n = s.truncation();
    let s2 = s.try_mul(s)?;
    let s3 = s2.try_mul(s)?;
    let z2_minus_2 = Series::from_ints(n, &[-2, 0, 1]);
    let z2_minus_1 = Series::from_ints(n, &[-1, 0, 1]);
    (-&s3.shift(4))
        .try_sub(&z2_minus_2.try_mul(&s2)?.shift(2))?
        .try_add(&z2_minus_1.try_mul(s)?)?
        .try_add(&Series::from_ints(n, &[0, 1, 1]))
}

/// Coefficients of `S - R/(1-R) - (z+z^2)/(1-R)^2` with `R = z^2 S`: the
/// decomposition of a saturated structure into a sequence of enclosed
/// blocks with at most one run of one or two unpaired positions.
pub fn decomposition_residual<C: Coefficient>(s: &Series<C>) -> Result<Series<C>, SeriesError> {
    let n = s.truncation();
    let r = s.shift(2);
    let one_minus_r = Series::one(n).try_sub(&r)?;
    let dotless = r.try_div(&one_minus_r)?;
    let dotted = Series::from_ints(n, &[0, 1, 1]).try_div(&one_minus_r.try_mul(&one_minus_r)?)?;
    s.try_sub(&dotless)?.try_sub(&dotted)
}

/// `T` and `S` solve their equations in any consistent coefficient ring;
/// this evaluates the secondary-structure residual `z + zT + z^2T + z^2T^2 - T`.
pub fn secondary_residual<C: Coefficient>(t: &Series<C>) -> Result<Series<C>, SeriesError> {
    let n = t.truncation();
    let t2 = t.try_mul(t)?;
    Series::from_ints(n, &[0, 1])
        .try_add(&t.shift(1))?
        .try_add(&t.shift(2))?
        .try_add(&t2.shift(2))?
        .try_sub(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> IntSeries {
        IntSeries::from_ints(v.len() - 1, v)
    }

    fn coeffs(s: &IntSeries) -> Vec<i64> {
        s.coeffs().iter().map(|c| i64::try_from(c).unwrap()).collect()
    }

    #[test]
    fn mul_examples() {
        assert_eq!(coeffs(&ps_mul(&ints(&[1, 1, 0]), &ints(&[1, -1, 0])).unwrap()), [1, 0, -1]);
        assert_eq!(coeffs(&ps_mul(&ints(&[0, 1, 0]), &ints(&[0, 1, 0])).unwrap()), [0, 0, 1]);
        let s = solve_saturated(5);
        let sq = ps_mul(&s, &s).unwrap();
        // s1 = s2 = s3 = 1: [z^4]S^2 = 2 s1 s3 + s2^2 = 3, [z^2] = 1, [z^3] = 2.
        assert_eq!(coeffs(&sq), [0, 0, 1, 2, 3, 8]);
    }

    #[test]
    fn mul_truncation_mismatch() {
        assert_eq!(
            ps_mul(&ints(&[1, 1]), &ints(&[1, 1, 1])),
            Err(SeriesError::TruncationMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn div_examples() {
        let geom = ps_div(&IntSeries::one(5), &ints(&[1, -1, 0, 0, 0, 0])).unwrap();
        assert_eq!(coeffs(&geom), [1; 6]);
        let q = ps_div(&ints(&[1, 0, -1, 0]), &ints(&[1, -1, 0, 0])).unwrap();
        assert_eq!(coeffs(&q), [1, 1, 0, 0]);
        let q = ps_div(&ints(&[7, 3, 0]), &ints(&[-1, 2, 5])).unwrap();
        assert_eq!(q.coeff(0), BigInt::from(-7));
        assert_eq!(
            ps_div(&ints(&[1, 1]), &ints(&[0, 1])),
            Err(SeriesError::NonUnitDivisor)
        );
        // 2 is not a unit of the integers, but it is of the rationals.
        assert_eq!(
            ps_div(&ints(&[1, 1]), &ints(&[2, 1])),
            Err(SeriesError::NonUnitDivisor)
        );
        let q = ps_div(&ints(&[1, 0]).to_rational(), &ints(&[2, 1]).to_rational()).unwrap();
        assert_eq!(q.coeff(1), BigRational::new((-1).into(), 4.into()));
    }

    #[test]
    fn saturated_leading_coefficients() {
        let s = solve_saturated(12);
        assert_eq!(coeffs(&s), [0, 1, 1, 1, 3, 5, 8, 18, 36, 68, 145, 305, 624]);
    }

    #[test]
    fn secondary_leading_coefficients() {
        let t = solve_secondary(8);
        assert_eq!(coeffs(&t), [0, 1, 1, 2, 4, 8, 17, 37, 82]);
    }

    #[test]
    fn online_and_fixed_point_agree() {
        for n in [1, 2, 7, 40] {
            assert_eq!(solve_saturated(n), solve_saturated_fixed_point(n).unwrap());
            assert_eq!(solve_secondary(n), solve_secondary_fixed_point(n).unwrap());
        }
    }

    #[test]
    fn residuals_vanish() {
        let s = solve_saturated(64);
        assert!(saturated_cubic_residual(&s).unwrap().is_zero());
        assert!(decomposition_residual(&s).unwrap().is_zero());
        assert!(decomposition_residual(&s.to_rational()).unwrap().is_zero());
        assert!(secondary_residual(&solve_secondary(64)).unwrap().is_zero());
        let mut wrong = s.clone().into_coeffs();
        wrong[10] += 1;
        assert!(!saturated_cubic_residual(&IntSeries::from_coeffs(wrong)).unwrap().is_zero());
    }

    #[test]
    fn r_shift() {
        let s = solve_saturated(10);
        let r = r_from_s(&s);
        assert_eq!(r.truncation(), 10);
        assert_eq!(r.coeff(3), BigInt::from(1));
        for k in 0..3 {
            assert!(r.coeff(k).is_zero());
        }
        assert_eq!(r.coeff(8), s.coeff(6));
    }

    #[test]
    fn rational_integrality() {
        let s = solve_saturated(10);
        assert_eq!(s.to_rational().to_integer().unwrap(), s);
        let half = RatSeries::from_coeffs(vec![BigRational::new(1.into(), 2.into()); 3]);
        assert_eq!(half.to_integer(), Err(SeriesError::NonIntegral { index: 0 }));
    }

    #[test]
    fn csv_and_json_export() {
        let s = solve_saturated(4);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,coefficient\n0,0\n1,1\n2,1\n3,1\n4,3\n");
        assert_eq!(s.to_json().to_string(), r#"["0","1","1","1","3"]"#);
    }
}
