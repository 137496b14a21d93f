//! Dominant singularity and coefficient asymptotics.
//!
//! `R = z^2 S` is the power-series root of
//!
//! ```text
//! P(z, R) = R^3 + (z^2 - 2) R^2 + (1 - z^2) R - z^3 - z^4.
//! ```
//!
//! The dominant singularity `z0` is where this branch meets another one:
//! `P = P_R = 0`. Eliminating `R` leaves the discriminant of `P` in `R`,
//! whose smallest positive root (with a positive double root `r0`) is
//! bracketed by exact rational bisection and polished by Newton's method on
//! the pair `(P, P_R)` in rational arithmetic rounded to a dyadic grid.
//!
//! Near `z0` the branch has a square-root expansion, so
//! `[z^n]S ~ gamma n^{-3/2} z0^{-n}`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::format::{ln_bigint, significant, to_f64};
use crate::order_gf::{expected_order, OrderGfError, OrderSpectrum};
use crate::series::{solve_saturated, IntSeries};

/// Working precision floor for the Newton refinement, in decimal digits.
pub const MIN_WORKING_DIGITS: u32 = 64;

/// Sizes used to fit the constant of the coefficient asymptotics.
pub const GAMMA_FIT_RANGE: (usize, usize) = (200, 400);

/// Relative disagreement between fitted and closed-form constants that is
/// flagged in the report.
pub const GAMMA_AGREEMENT: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsymptoticsError {
    #[error("precision must be at least 6 decimal digits, got {0}")]
    PrecisionTooLow(u32),
    #[error("Newton refinement did not converge; widen the starting bracket")]
    NoConvergence,
    #[error("no admissible singularity in (0, 1)")]
    NoRoot,
}

type Q = BigRational;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Polynomial in `z` with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZPoly(pub Vec<BigInt>);

impl ZPoly {
    fn from_ints(c: &[i64]) -> Self {
        ZPoly(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    fn add(&self, other: &Self) -> Self {
        let len = self.0.len().max(other.0.len());
        let get = |p: &Self, i: usize| p.0.get(i).cloned().unwrap_or_default();
        ZPoly((0..len).map(|i| get(self, i) + get(other, i)).collect())
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ZPoly(out)
    }

    fn scale(&self, k: i64) -> Self {
        ZPoly(self.0.iter().map(|c| c * k).collect())
    }

    fn trimmed(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    pub fn eval(&self, z: &Q) -> Q {
        self.0
            .iter()
            .rev()
            .fold(Q::zero(), |acc, c| acc * z + Q::from_integer(c.clone()))
    }
}

/// Discriminant of `P` as a polynomial in `R`; its roots are the `z` where
/// two branches of `R(z)` meet.
pub fn discriminant() -> ZPoly {
    // R^3 + b R^2 + c R + d
    let b = ZPoly::from_ints(&[-2, 0, 1]);
    let c = ZPoly::from_ints(&[1, 0, -1]);
    let d = ZPoly::from_ints(&[0, 0, 0, -1, -1]);
    // 18bcd - 4b^3 d + b^2 c^2 - 4c^3 - 27d^2
    let b2 = b.mul(&b);
    let terms = [
        b.mul(&c).mul(&d).scale(18),
        b2.mul(&b).mul(&d).scale(-4),
        b2.mul(&c).mul(&c),
        c.mul(&c).mul(&c).scale(-4),
        d.mul(&d).scale(-27),
    ];
    terms
        .iter()
        .fold(ZPoly::from_ints(&[0]), |acc, t| acc.add(t))
        .trimmed()
}

/// `P(z, r)`.
pub fn p(z: &Q, r: &Q) -> Q {
    let z2 = z * z;
    let r2 = r * r;
    &r2 * r + (&z2 - q(2)) * &r2 + (q(1) - &z2) * r - &z2 * z - &z2 * &z2
}

/// `dP/dR`.
pub fn p_r(z: &Q, r: &Q) -> Q {
    let z2 = z * z;
    q(3) * r * r + q(2) * (&z2 - q(2)) * r + q(1) - z2
}

/// `dP/dz`.
pub fn p_z(z: &Q, r: &Q) -> Q {
    let z2 = z * z;
    q(2) * z * r * r - q(2) * z * r - q(3) * &z2 - q(4) * &z2 * z
}

/// `d^2P/dR^2`.
pub fn p_rr(z: &Q, r: &Q) -> Q {
    q(6) * r + q(2) * (z * z - q(2))
}

/// `d^2P/dR dz`.
pub fn p_rz(z: &Q, r: &Q) -> Q {
    q(4) * z * r - q(2) * z
}

/// Location of the dominant singularity with the data of its square-root
/// expansion and the constant of the coefficient asymptotics.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityReport {
    /// Requested decimal digits.
    pub precision: u32,
    pub z0: Q,
    pub r0: Q,
    pub pz: Q,
    pub prr: Q,
    /// Constant fitted from exact coefficients; authoritative.
    pub gamma_fit: f64,
    /// Constant from the square-root expansion of `R` at `z0`.
    pub gamma_formula: f64,
}

impl SingularityReport {
    pub fn z0_f64(&self) -> f64 {
        to_f64(&self.z0)
    }

    /// The constant used by [`asymptotic_count`].
    pub fn gamma(&self) -> f64 {
        self.gamma_fit
    }

    /// True if the fitted and closed-form constants differ by more than 2%.
    pub fn gamma_mismatch(&self) -> bool {
        ((self.gamma_fit - self.gamma_formula) / self.gamma_fit).abs() > GAMMA_AGREEMENT
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Json {
            z0: String,
            r0: String,
            pz: String,
            prr: String,
            gamma_fit: f64,
            gamma_formula: f64,
            gamma_mismatch: bool,
            precision: u32,
        }
        let digits = self.precision as usize;
        serde_json::to_value(Json {
            z0: significant(&self.z0, digits),
            r0: significant(&self.r0, digits),
            pz: significant(&self.pz, digits),
            prr: significant(&self.prr, digits),
            gamma_fit: self.gamma_fit,
            gamma_formula: self.gamma_formula,
            gamma_mismatch: self.gamma_mismatch(),
            precision: self.precision,
        })
        .expect("plain data serializes")
    }
}

// 10^-digits as a rational.
fn tolerance(digits: u32) -> Q {
    Q::new(BigInt::one(), BigInt::from(10u32).pow(digits))
}

// Rounds to the nearest multiple of 2^-bits.
fn round_dyadic(x: &Q, bits: u64) -> Q {
    let scale = BigInt::one() << bits;
    let scaled = x * Q::from_integer(scale.clone());
    Q::new(scaled.round().to_integer(), scale)
}

/// Smallest-positive-root candidates: brackets `[lo, hi]` of sign changes of
/// the discriminant on `(0, 1)`, each narrowed to width below `2^-60`.
fn discriminant_brackets() -> Vec<(Q, Q)> {
    let disc = discriminant();
    let steps = 1024;
    let mut out = Vec::new();
    let grid = |k: i64| Q::new(BigInt::from(k), BigInt::from(steps));
    let mut prev = disc.eval(&grid(1));
    for k in 2..steps {
        let cur = disc.eval(&grid(k));
        if prev.signum() * cur.signum() < Q::zero() || cur.is_zero() {
            let (mut lo, mut hi) = (grid(k - 1), grid(k));
            let lo_sign = disc.eval(&lo).signum();
            let width = Q::new(BigInt::one(), BigInt::one() << 60u32);
            while &hi - &lo > width {
                let mid = (&lo + &hi) / q(2);
                let v = disc.eval(&mid);
                if v.is_zero() {
                    lo = mid.clone();
                    hi = mid;
                    break;
                }
                if v.signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push((lo, hi));
        }
        prev = cur;
    }
    out
}

/// Newton's method on `(P, P_R) = 0` from `(z, r)`.
fn newton(z: Q, r: Q, digits: u32) -> Result<(Q, Q), AsymptoticsError> {
    let bits = (f64::from(digits + 16) * std::f64::consts::LOG2_10).ceil() as u64;
    let tol = tolerance(digits + 4);
    let (mut z, mut r) = (z, r);
    for _ in 0..200 {
        let f = p(&z, &r);
        let g = p_r(&z, &r);
        let (a, b) = (p_z(&z, &r), p_r(&z, &r));
        let (c, d) = (p_rz(&z, &r), p_rr(&z, &r));
        let det = &a * &d - &b * &c;
        if det.is_zero() {
            return Err(AsymptoticsError::NoConvergence);
        }
        let dz = (&d * &f - &b * &g) / &det;
        let dr = (&a * &g - &c * &f) / &det;
        z = round_dyadic(&(&z - &dz), bits);
        r = round_dyadic(&(&r - &dr), bits);
        if dz.abs() < tol && dr.abs() < tol {
            return Ok((z, r));
        }
    }
    Err(AsymptoticsError::NoConvergence)
}

/// Solves `P = P_R = 0` for the dominant singularity.
///
/// Refinement always runs at no fewer than [`MIN_WORKING_DIGITS`] digits;
/// `precision` only controls the requested accuracy and rendering.
pub fn locate_singularity(precision: u32) -> Result<SingularityReport, AsymptoticsError> {
    let (z0, r0) = locate_root(precision)?;
    let pz = p_z(&z0, &r0);
    let prr = p_rr(&z0, &r0);
    let s = solve_saturated(GAMMA_FIT_RANGE.1);
    let z0f = to_f64(&z0);
    Ok(SingularityReport {
        precision,
        gamma_fit: fit_gamma(&s, z0f, GAMMA_FIT_RANGE.0, GAMMA_FIT_RANGE.1),
        gamma_formula: gamma_closed_form(z0f, to_f64(&pz), to_f64(&prr)),
        z0,
        r0,
        pz,
        prr,
    })
}

/// `(z0, r0)` only, without the coefficient fit.
pub fn locate_root(precision: u32) -> Result<(Q, Q), AsymptoticsError> {
    if precision < 6 {
        return Err(AsymptoticsError::PrecisionTooLow(precision));
    }
    let digits = precision.max(MIN_WORKING_DIGITS);
    for (lo, hi) in discriminant_brackets() {
        let z = (&lo + &hi) / q(2);
        let Some(r) = double_root_guess(&z) else {
            continue;
        };
        let (z0, r0) = newton(z, r, digits)?;
        if z0.is_positive() && r0.is_positive() && z0 < q(1) {
            return Ok((z0, r0));
        }
    }
    Err(AsymptoticsError::NoRoot)
}

// The root of P_R(z, .) at which |P| is smaller, from the quadratic formula.
fn double_root_guess(z: &Q) -> Option<Q> {
    let zf = to_f64(z);
    let b = 2.0 * (zf * zf - 2.0);
    let c = 1.0 - zf * zf;
    let disc = b * b - 12.0 * c;
    if disc < 0.0 {
        return None;
    }
    let candidates = [(-b + disc.sqrt()) / 6.0, (-b - disc.sqrt()) / 6.0];
    candidates
        .iter()
        .filter_map(|&r| Q::from_float(r))
        .min_by(|a, b| {
            p(z, a)
                .abs()
                .partial_cmp(&p(z, b).abs())
                .expect("rationals are totally ordered")
        })
}

/// `[z^n]S ~ gamma n^{-3/2} z0^{-n}` with
/// `gamma = z0^{-2} sqrt(z0 P_z / (2 pi P_RR))` from
/// `R ~ r0 - sqrt(2 z0 P_z / P_RR) sqrt(1 - z/z0)` and `S = R / z^2`.
pub fn gamma_closed_form(z0: f64, pz: f64, prr: f64) -> f64 {
    (z0 * pz / (2.0 * PI * prr)).abs().sqrt() / (z0 * z0)
}

/// Least-squares fit of `[z^n]S n^{3/2} z0^n = gamma (1 + c/n)` over
/// `lo..=hi`; returns `gamma`.
pub fn fit_gamma(s: &IntSeries, z0: f64, lo: usize, hi: usize) -> f64 {
    let points: Vec<(f64, f64)> = (lo..=hi)
        .map(|n| {
            let y = normalized_coefficient(&s.coeff(n), n, z0);
            (1.0 / n as f64, y)
        })
        .collect();
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    my - sxy / sxx * mx
}

/// `c n^{3/2} z0^n`, evaluated in log space.
pub fn normalized_coefficient(c: &BigInt, n: usize, z0: f64) -> f64 {
    let n_f = n as f64;
    (ln_bigint(c) + 1.5 * n_f.ln() + n_f * z0.ln()).exp()
}

/// `gamma n^{-3/2} z0^{-n}`; overflows to infinity past roughly `n = 800`.
pub fn asymptotic_count(report: &SingularityReport, n: usize) -> f64 {
    log_asymptotic_count(report, n).exp()
}

pub fn log_asymptotic_count(report: &SingularityReport, n: usize) -> f64 {
    let n_f = n as f64;
    report.gamma().ln() - 1.5 * n_f.ln() - n_f * report.z0_f64().ln()
}

/// Exact count over asymptotic estimate, computed in log space.
pub fn count_ratio(report: &SingularityReport, exact: &BigInt, n: usize) -> f64 {
    (ln_bigint(exact) - log_asymptotic_count(report, n)).exp()
}

/// `sum_k c_k z^k` for a rational point, truncated.
pub fn evaluate_series(s: &IntSeries, z: &Q) -> Q {
    s.coeffs()
        .iter()
        .rev()
        .fold(Q::zero(), |acc, c| acc * z + Q::from_integer(c.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationRow {
    pub n: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub expected: Q,
    pub log4n: f64,
    pub ratio: f64,
    pub difference: f64,
}

fn serialize_rational<S: serde::Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&significant(v, crate::format::SIGNIFICANT_DIGITS))
}

/// `E xi_n` against `log_4 n` for every requested size.
pub fn expectation_report(
    spectrum: &OrderSpectrum,
    sizes: &[usize],
) -> Result<Vec<ExpectationRow>, OrderGfError> {
    sizes
        .iter()
        .map(|&n| {
            let expected = expected_order(spectrum, n)?;
            let e = expected.to_f64().unwrap_or(f64::NAN);
            let log4n = (n as f64).ln() / 4f64.ln();
            Ok(ExpectationRow {
                n,
                expected,
                log4n,
                ratio: e / log4n,
                difference: e - log4n,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminant_coefficients() {
        let expected = ZPoly::from_ints(&[0, 0, 0, 4, 5, -6, -35, -60, -32, 4, 4]);
        assert_eq!(discriminant(), expected);
    }

    #[test]
    fn root_matches_known_value() {
        let (z0, r0) = locate_root(6).unwrap();
        let z = to_f64(&z0);
        assert!((z - 0.424687).abs() < 5e-7, "{z}");
        assert!(to_f64(&r0) > 0.29 && to_f64(&r0) < 0.31);
        assert!(p(&z0, &r0).abs() < tolerance(64));
        assert!(p_r(&z0, &r0).abs() < tolerance(64));
    }

    #[test]
    fn precision_is_validated() {
        assert_eq!(locate_root(5), Err(AsymptoticsError::PrecisionTooLow(5)));
    }

    #[test]
    fn doubling_precision_is_stable() {
        let (a, _) = locate_root(40).unwrap();
        let (b, _) = locate_root(80).unwrap();
        assert!((a - b).abs() < tolerance(40));
    }

    #[test]
    fn closed_form_constant_is_positive() {
        let report = locate_singularity(8).unwrap();
        assert!(report.gamma_formula > 0.0);
        assert!(report.gamma_fit > 0.0);
        assert!(!report.pz.is_zero() && !report.prr.is_zero());
    }

    #[test]
    fn rounding_is_dyadic() {
        let x = Q::new(1.into(), 3.into());
        let r = round_dyadic(&x, 10);
        assert_eq!(r, Q::new(341.into(), 1024.into()));
    }
}
