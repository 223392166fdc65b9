//! Special functions needed by the position-space transforms: the cylindrical
//! Fourier kernel J0 and the modified Bessel function K_nu that gives the
//! closed-form profile of the localized scalar amplitude.
//!
//! Evaluation strategy: power series for small arguments, quadrature of a
//! non-oscillatory integral representation in the middle range, and the
//! exponentially scaled asymptotic expansion for large arguments. The
//! crossover points were chosen empirically and are frozen in constants
//! below.

use crate::error::{Error, Result};
use crate::gauss::gauss_legendre;

/// Value plus a crude absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult {
    pub value: f64,
    pub est_abs_error: f64,
}

/// Upper end of the J0 power-series branch.
const J0_SERIES_MAX: f64 = 9.0;
/// Upper end of the J0 integral-representation branch.
const J0_QUAD_MAX: f64 = 36.0;
/// Upper end of the K_nu small-argument series branch.
const K_SERIES_MAX: f64 = 2.0;
/// Upper end of the K_nu integral-representation branch.
const K_QUAD_MAX: f64 = 30.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (Lanczos approximation, reflection
/// formula for x < 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<SpecFunResult> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j0: non-finite argument {x}")));
    }
    let ax = x.abs();
    if ax <= J0_SERIES_MAX {
        Ok(j0_series(ax))
    } else if ax <= J0_QUAD_MAX {
        Ok(j0_integral(ax))
    } else {
        Ok(j0_asymptotic(ax))
    }
}

/// Power series with compensated summation. The largest term at x = 9 is
/// about 2e2, so the cancellation error stays near 1e-13 absolute.
fn j0_series(x: f64) -> SpecFunResult {
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut comp = 0.0_f64;
    let mut max_term = 1.0_f64;
    for k in 1..80 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        max_term = max_term.max(term.abs());
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    SpecFunResult {
        value: sum,
        est_abs_error: max_term * 1e-15 + 1e-16,
    }
}

/// (1/pi) Int_0^pi cos(x sin theta) d theta on two Gauss panels. The
/// integrand has bandwidth x, so a fixed order suffices below J0_QUAD_MAX.
fn j0_integral(x: f64) -> SpecFunResult {
    let rule = gauss_legendre(48);
    let half = std::f64::consts::FRAC_PI_2;
    let f = |theta: f64| (x * theta.sin()).cos();
    let value: f64 = rule.integrate(0.0, half, f) + rule.integrate(half, 2.0 * half, f);
    SpecFunResult {
        value: value / std::f64::consts::PI,
        est_abs_error: 1e-14,
    }
}

/// Hankel asymptotic expansion, order zero.
fn j0_asymptotic(x: f64) -> SpecFunResult {
    let omega = x - std::f64::consts::FRAC_PI_4;
    // a_k = a_{k-1} (4 nu^2 - (2k-1)^2) / (8k) with nu = 0
    let mut a = 1.0_f64;
    let mut p = 1.0_f64;
    let mut q = 0.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..30 {
        let kf = k as f64;
        a *= -((2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * kf);
        let term = a / x.powi(k as i32);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let value = (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * omega.cos() - q * omega.sin());
    SpecFunResult {
        value,
        est_abs_error: last.max(1e-16),
    }
}

/// Modified Bessel function of the second kind, real order.
///
/// Supported domain: nu in [0, 3), x > 0. Strictly positive and strictly
/// decreasing in x.
pub fn bessel_k(nu: f64, x: f64) -> Result<SpecFunResult> {
    let r = bessel_k_scaled(nu, x)?;
    Ok(SpecFunResult {
        value: r.value * (-x).exp(),
        est_abs_error: r.est_abs_error * (-x).exp(),
    })
}

/// e^x K_nu(x), useful where K itself underflows.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<SpecFunResult> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_k: x must be positive, got {x}")));
    }
    if !(0.0..3.0).contains(&nu) {
        return Err(Error::Domain(format!("bessel_k: order {nu} outside [0, 3)")));
    }
    let near_integer = (nu - nu.round()).abs() < 1e-3;
    if x < K_SERIES_MAX && !near_integer {
        let r = k_series(nu, x);
        Ok(SpecFunResult {
            value: r.value * x.exp(),
            est_abs_error: r.est_abs_error * x.exp(),
        })
    } else if x <= K_QUAD_MAX {
        Ok(k_integral_scaled(nu, x))
    } else {
        Ok(k_asymptotic_scaled(nu, x))
    }
}

/// K_nu = pi/2 (I_{-nu} - I_nu) / sin(nu pi), both I series summed directly.
/// Only used for x < 2 where the cancellation between the two I's is benign.
fn k_series(nu: f64, x: f64) -> SpecFunResult {
    let i_series = |order: f64| -> f64 {
        let half = 0.5 * x;
        let q = half * half;
        let mut term = half.powf(order) / gamma(order + 1.0);
        let mut sum = term;
        for k in 1..200 {
            let kf = k as f64;
            term *= q / (kf * (order + kf));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    };
    let ip = i_series(nu);
    let im = i_series(-nu);
    let value =
        std::f64::consts::FRAC_PI_2 * (im - ip) / (nu * std::f64::consts::PI).sin();
    SpecFunResult {
        value,
        est_abs_error: (im.abs() + ip.abs()) * 1e-15 + value.abs() * 1e-14,
    }
}

/// Quadrature of
///   K_nu(x) = sqrt(pi/2x) e^-x / Gamma(nu + 1/2) * Int_0^inf e^-t
///             t^(nu - 1/2) (1 + t/2x)^(nu - 1/2) dt,
/// with t = u^2 to soften the endpoint. The u^{2 nu} branch point at u = 0
/// defeats Gauss rules, so the first panel is integrated termwise from the
/// Taylor series of e^{-u^2} (1 + u^2/2x)^{nu - 1/2}; the rest uses
/// geometric Gauss panels.
fn k_integral_scaled(nu: f64, x: f64) -> SpecFunResult {
    // series panel [0, a], a^2 well inside the binomial radius 2x
    let a = (0.45 * (2.0 * x).min(1.0)).sqrt();
    const KMAX: usize = 48;
    let mut exp_coef = [0.0f64; KMAX];
    let mut bin_coef = [0.0f64; KMAX];
    exp_coef[0] = 1.0;
    bin_coef[0] = 1.0;
    for j in 1..KMAX {
        let jf = j as f64;
        exp_coef[j] = -exp_coef[j - 1] / jf;
        bin_coef[j] = bin_coef[j - 1] * (nu - 0.5 - (jf - 1.0)) / (jf * 2.0 * x);
    }
    let a2 = a * a;
    let mut series = 0.0f64;
    let mut pow = a.powf(2.0 * nu + 1.0);
    for k in 0..KMAX {
        let mut c = 0.0;
        for i in 0..=k {
            c += exp_coef[i] * bin_coef[k - i];
        }
        series += c * pow / (2.0 * nu + 2.0 * k as f64 + 1.0);
        pow *= a2;
    }

    let rule = gauss_legendre(40);
    let g = |u: f64| -> f64 {
        (-u * u).exp() * u.powf(2.0 * nu) * (1.0 + u * u / (2.0 * x)).powf(nu - 0.5)
    };
    let upper = 7.0_f64;
    let mut breaks = vec![a];
    let mut s = 2.0 * a;
    while s < upper {
        breaks.push(s);
        s *= 2.0;
    }
    breaks.push(upper);
    let mut integral = series;
    for w in breaks.windows(2) {
        integral += rule.integrate::<f64, _>(w[0], w[1], g);
    }
    integral *= 2.0;
    let pref = (std::f64::consts::FRAC_PI_2 / x).sqrt() / gamma(nu + 0.5);
    SpecFunResult {
        value: pref * integral,
        est_abs_error: (pref * integral).abs() * 1e-13,
    }
}

/// Large-argument expansion of e^x K_nu(x), truncated at the smallest term.
fn k_asymptotic_scaled(nu: f64, x: f64) -> SpecFunResult {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * kf * x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    let pref = (std::f64::consts::FRAC_PI_2 / x).sqrt();
    SpecFunResult {
        value: pref * sum,
        est_abs_error: pref * (last.min(1e-15 * sum.abs()) + 1e-16),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // reference values from 25-digit arithmetic
    const J0_REF: &[(f64, f64)] = &[
        (0.5, 0.9384698072408129),
        (1.0, 0.76519768655796655),
        (5.0, -0.1775967713143383),
        (8.9, -0.065253246851244397),
        (9.5, -0.19392874768742236),
        (12.0, 0.047689310796833537),
        (20.0, 0.16702466434058315),
        (30.0, -0.086367983581040211),
        (36.5, -0.053503642417614781),
        (50.0, 0.055812327669251815),
        (100.0, 0.019985850304223122),
        (1000.0, 0.024786686152420175),
    ];

    const K_REF: &[(f64, f64, f64)] = &[
        (0.5, 1.0, 0.46106850444789456),
        (1.25, 0.5, 2.2520661411497987),
        (1.25, 1.0, 0.73114518792021139),
        (1.25, 2.0, 0.15674754783939322),
        (1.25, 15.0, 1.0327493663567103e-7),
        (1.25, 50.0, 3.4633375935693063e-23),
        (0.25, 1.0, 0.43073977444858552),
        (2.25, 1.0, 2.258602744249114),
        (2.25, 35.0, 1.4293973065443245e-16),
        (0.25, 0.01, 6.1657412641392401),
        (0.0, 1.0, 0.42102443824070833),
        (1.0, 1.0, 0.60190723019723457),
        (2.0, 1.0, 1.6248388986351775),
        (0.5, 10.0, 1.799347809370518e-5),
    ];

    #[test]
    fn j0_reference_values() {
        for &(x, want) in J0_REF {
            let got = bessel_j0(x).unwrap();
            assert!(
                (got.value - want).abs() <= 1e-12_f64.max(1e-12 * want.abs()),
                "J0({x}) = {} vs {}",
                got.value,
                want
            );
        }
    }

    #[test]
    fn j0_at_zero_and_first_root() {
        assert_eq!(bessel_j0(0.0).unwrap().value, 1.0);
        let root = 2.404825557695773;
        assert!(bessel_j0(root).unwrap().value.abs() < 1e-10);
    }

    #[test]
    fn j0_rejects_non_finite() {
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(f64::INFINITY).is_err());
    }

    #[test]
    fn k_reference_values() {
        for &(nu, x, want) in K_REF {
            let got = bessel_k(nu, x).unwrap().value;
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn k_half_integer_closed_form() {
        // K_{1/2}(x) = sqrt(pi/2x) e^-x
        for &x in &[0.1, 0.7, 3.0, 12.0, 40.0] {
            let want = (std::f64::consts::FRAC_PI_2 / x).sqrt() * (-x).exp();
            assert_relative_eq!(bessel_k(0.5, x).unwrap().value, want, max_relative = 1e-11);
        }
    }

    #[test]
    fn k_matches_large_argument_form() {
        // ratio to sqrt(pi/2x) e^-x tends to 1
        let x = 30.0;
        let lead = (std::f64::consts::FRAC_PI_2 / x).sqrt() * (-x).exp();
        let ratio = bessel_k(1.25, x).unwrap().value / lead;
        assert!((ratio - 1.0).abs() < 1e-4 * 1.1_f64.powi(0) + 0.022,);
        // and with the first correction term removed the residue is tiny
        let corrected = lead * (1.0 + (4.0 * 1.25 * 1.25 - 1.0) / (8.0 * x));
        assert_relative_eq!(bessel_k(1.25, x).unwrap().value, corrected, max_relative = 3e-4);
    }

    #[test]
    fn k_recurrence_at_five_quarters() {
        // K_{nu+1} - K_{nu-1} = (2 nu / x) K_nu
        for &x in &[0.05, 0.3, 1.0, 4.0, 20.0] {
            let km = bessel_k(0.25, x).unwrap().value;
            let k0 = bessel_k(1.25, x).unwrap().value;
            let kp = bessel_k(2.25, x).unwrap().value;
            assert_relative_eq!(kp - km, 2.5 / x * k0, max_relative = 1e-8);
        }
    }

    #[test]
    fn k_positive_and_decreasing_on_log_grid() {
        let n = 60;
        let (lo, hi) = (1e-2_f64, 30.0_f64);
        let mut prev = f64::INFINITY;
        for i in 0..n {
            let x = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            let v = bessel_k(1.25, x).unwrap().value;
            assert!(v > 0.0);
            assert!(v < prev, "K not decreasing at x = {x}");
            prev = v;
        }
    }

    #[test]
    fn k_domain_errors() {
        assert!(bessel_k(1.25, 0.0).is_err());
        assert!(bessel_k(1.25, -1.0).is_err());
        assert!(bessel_k(3.5, 1.0).is_err());
    }

    #[test]
    fn gamma_reference() {
        assert_relative_eq!(gamma(0.5), std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(-1.25), gamma(-0.25) / -1.25, max_relative = 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn j0_is_even(x in -60.0f64..60.0) {
                let a = bessel_j0(x).unwrap().value;
                let b = bessel_j0(-x).unwrap().value;
                prop_assert_eq!(a, b);
            }

            #[test]
            fn k_derivative_sign(x in 2e-2f64..29.0) {
                let h = 1e-4 * x;
                let up = bessel_k(1.25, x + h).unwrap().value;
                let dn = bessel_k(1.25, x - h).unwrap().value;
                prop_assert!(up < dn);
            }
        }
    }
}
