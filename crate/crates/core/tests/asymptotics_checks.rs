use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use satrna::asymptotics::{
    count_ratio, discriminant, evaluate_series, fit_gamma, locate_root, locate_singularity, p_r,
    AsymptoticsError,
};
use satrna::format::significant;
use satrna::series::{r_from_s, solve_saturated};

#[test]
fn singularity_is_a_root_of_the_discriminant() {
    let (z0, r0) = locate_root(30).unwrap();
    let d = discriminant().eval(&z0).abs().to_f64().unwrap();
    assert!(d < 1e-40, "{d}");
    assert!(p_r(&z0, &r0).abs().to_f64().unwrap() < 1e-40);
    assert_eq!(significant(&z0, 20), "0.42468731042027208975");
    assert_eq!(significant(&r0, 20), "0.29883668438651341839");
}

#[test]
fn precision_floor() {
    assert_eq!(locate_root(5), Err(AsymptoticsError::PrecisionTooLow(5)));
}

#[test]
fn truncated_r_approaches_r0_from_below() {
    let (z0, r0) = locate_root(12).unwrap();
    let mut last = BigRational::from_integer(0.into());
    for n in [50, 100, 200, 400] {
        let r = evaluate_series(&r_from_s(&solve_saturated(n)), &z0);
        assert!(r > last && r < r0);
        last = r;
    }
    // The missing tail is about z0^2 gamma sum_{n>398} n^{-3/2} ~ z0^2 gamma 2/sqrt(398).
    let gap = (&r0 - &last).to_f64().unwrap();
    let z = z0.to_f64().unwrap();
    let predicted = z * z * 1.0742 * 2.0 / 398f64.sqrt();
    assert!((gap - predicted).abs() / predicted < 0.1, "{gap} vs {predicted}");
}

#[test]
fn gamma_is_stable_across_windows() {
    let report = locate_singularity(12).unwrap();
    let s = solve_saturated(400);
    let early = fit_gamma(&s, report.z0_f64(), 200, 300);
    let late = fit_gamma(&s, report.z0_f64(), 300, 400);
    assert!(((early - late) / late).abs() < 0.02);
    assert!(!report.gamma_mismatch());
}

#[test]
fn count_ratio_tends_to_one() {
    let report = locate_singularity(12).unwrap();
    let s = solve_saturated(400);
    let errors: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| (count_ratio(&report, &s.coeff(n), n) - 1.0).abs())
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[2] < 0.05);
}

#[test]
fn consecutive_coefficients_grow_like_one_over_z0() {
    let report = locate_singularity(12).unwrap();
    let s = solve_saturated(801);
    let ratio = BigRational::new(s.coeff(801), s.coeff(800)).to_f64().unwrap();
    // c_{n+1}/c_n = (1/z0)(1 - 3/(2n) + O(1/n^2)).
    let predicted = (1.0 - 1.5 / 800.0) / report.z0_f64();
    assert!((ratio - predicted).abs() / predicted < 1e-4, "{ratio} vs {predicted}");
}
