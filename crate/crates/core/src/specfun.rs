//! Log-domain special functions.
//!
//! Everything here returns logarithms so that callers working at high SNR
//! never form `I_nu(x)` or `Gamma(x)` directly. `f64::NEG_INFINITY` is a
//! legal return value and stands for `ln 0`.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Result};

/// Order of a modified Bessel function, `nu >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return domain(format!("Bessel order must be finite and >= 0, got {nu}"));
        }
        Ok(Self(nu))
    }

    /// The order `N/2 - 1` used by the N-dimensional chi kernel.
    pub fn for_dims(dims: usize) -> Result<Self> {
        if dims < 2 {
            return domain(format!("dimension must be >= 2, got {dims}"));
        }
        Ok(Self(dims as f64 / 2.0 - 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// ln(sqrt(pi))
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

/// `ln Gamma(x)` for `x > 0`.
///
/// Integers and half-integers up to 20 use the exact factorial forms
/// `Gamma(n) = (n-1)!` and `Gamma(n + 1/2) = sqrt(pi) (2n)! / (4^n n!)`;
/// everything else goes through a Lanczos approximation (g = 7).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return domain(format!("log_gamma requires finite x > 0, got {x}"));
    }
    let twice = 2.0 * x;
    if twice.fract() == 0.0 && x <= 20.0 {
        let n = twice as u64;
        if n.is_multiple_of(2) {
            let m = n / 2;
            let fact: f64 = (1..m).map(|k| k as f64).product();
            return Ok(fact.ln());
        }
        // x = m + 1/2
        let m = (n - 1) / 2;
        let ratio: f64 = (m + 1..=2 * m).map(|k| k as f64 / 4.0).product();
        return Ok(LN_SQRT_PI + ratio.ln());
    }
    Ok(lanczos_ln_gamma(x))
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - lanczos_ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `ln(I_nu(x) * exp(-x))`, the log of the exponentially scaled modified
/// Bessel function of the first kind.
///
/// Returns `-inf` at `x = 0` for `nu > 0`.
pub fn log_bessel_i_scaled(nu: BesselOrder, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return domain(format!("Bessel argument must be finite and >= 0, got {x}"));
    }
    Ok(log_bessel_i_scaled_unchecked(nu.0, x))
}

/// Switchover between the power series and the large-argument expansion.
fn series_limit(nu: f64) -> f64 {
    (30.0 * nu.max(1.0)).max(nu * nu)
}

pub(crate) fn log_bessel_i_scaled_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if nu == 0.5 {
        return half_order_scaled(x);
    }
    if nu == 1.5 && x >= 1.0 {
        return three_halves_order_scaled(x);
    }
    if x <= series_limit(nu) {
        log_series(nu, x) - x
    } else {
        log_hankel_scaled(nu, x)
    }
}

/// I_{1/2}(x) = sqrt(2/(pi x)) sinh x
fn half_order_scaled(x: f64) -> f64 {
    0.5 * (2.0 / (PI * x)).ln() + (-(-2.0 * x).exp_m1()).ln() - LN_2
}

/// I_{3/2}(x) = sqrt(2/(pi x)) (cosh x - sinh x / x), valid away from 0
fn three_halves_order_scaled(x: f64) -> f64 {
    let e = (-2.0 * x).exp();
    let bracket = 0.5 * (1.0 + e) + 0.5 * (-2.0 * x).exp_m1() / x;
    0.5 * (2.0 / (PI * x)).ln() + bracket.ln()
}

/// ln I_nu(x) from the ascending series, with running rescaling so that
/// large orders cannot overflow the partial sum.
fn log_series(nu: f64, x: f64) -> f64 {
    const RESCALE: f64 = 1e250;
    let q = 0.25 * x * x;
    let lead = nu * (0.5 * x).ln() - lanczos_or_exact(nu + 1.0);
    let mut offset = 0.0;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 0.0_f64;
    loop {
        term *= q / ((k + 1.0) * (k + nu + 1.0));
        sum += term;
        k += 1.0;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            offset += RESCALE.ln();
        }
        if k > 0.5 * x && term <= f64::EPSILON * 0.25 * sum {
            break;
        }
    }
    lead + offset + sum.ln()
}

fn lanczos_or_exact(x: f64) -> f64 {
    // x > 0 is guaranteed by callers
    log_gamma(x).unwrap_or_else(|_| lanczos_ln_gamma(x))
}

/// ln(I_nu(x) e^{-x}) from the large-argument expansion
/// `1/sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k`, truncated at its
/// smallest term.
fn log_hankel_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0_f64;
    while k < 500.0 {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * x);
        if next == 0.0 || next.abs() >= term.abs() {
            break;
        }
        sum += next;
        term = next;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    -0.5 * (2.0 * PI * x).ln() + sum.ln()
}

/// Numerically stable `ln(sum exp(v))`; `-inf` entries are absorbed and an
/// all-`-inf` input yields `-inf`.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = values.into_iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn bessel_at_origin() {
        assert_eq!(log_bessel_i_scaled(order(0.0), 0.0).unwrap(), 0.0);
        for nu in [0.5, 1.0, 1.5, 3.0] {
            assert_eq!(
                log_bessel_i_scaled(order(nu), 0.0).unwrap(),
                f64::NEG_INFINITY
            );
        }
    }

    #[test]
    fn half_order_closed_form() {
        let v = log_bessel_i_scaled(order(0.5), 2.0).unwrap();
        let expected = ((2.0 / (PI * 2.0)).sqrt() * 2.0_f64.sinh() * (-2.0_f64).exp()).ln();
        assert!((v - expected).abs() < 1e-14);
        assert!((v - -1.283_997_570_310_532).abs() < 1e-12);
    }

    #[test]
    fn order_zero_at_ten() {
        let v = log_bessel_i_scaled(order(0.0), 10.0).unwrap();
        let expected = 0.127_833_337_163_428_6_f64.ln();
        assert!(
            (v.exp() / 0.127_833_337_163_428_6 - 1.0).abs() < 1e-13,
            "{v} vs {expected}"
        );
    }

    #[test]
    fn fast_paths_match_series() {
        for x in [0.01, 0.3, 1.0, 2.5, 7.0, 20.0, 29.0] {
            let s = log_series(0.5, x) - x;
            assert!((half_order_scaled(x) - s).abs() < 1e-13, "nu=1/2 x={x}");
            if x >= 1.0 {
                let s = log_series(1.5, x) - x;
                assert!(
                    (three_halves_order_scaled(x) - s).abs() < 1e-13,
                    "nu=3/2 x={x}"
                );
            }
        }
    }

    #[test]
    fn series_and_hankel_agree_at_switchover() {
        for nu in [0.0, 1.0, 2.0, 5.0] {
            let x = series_limit(nu);
            let a = log_series(nu, x) - x;
            let b = log_hankel_scaled(nu, x);
            assert!((a - b).abs() < 1e-12, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn large_order_does_not_overflow() {
        let v = log_bessel_i_scaled(order(60.0), 3000.0).unwrap();
        assert!(v.is_finite());
        let w = log_bessel_i_scaled(order(60.0), 3700.0).unwrap();
        assert!(w.is_finite() && w > v);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BesselOrder::new(-0.5).is_err());
        assert!(BesselOrder::new(f64::NAN).is_err());
        assert!(log_bessel_i_scaled(order(1.0), -1.0).is_err());
        assert!(log_bessel_i_scaled(order(1.0), f64::INFINITY).is_err());
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.5).is_err());
    }

    #[test]
    fn gamma_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        assert!((log_gamma(0.5).unwrap() - PI.sqrt().ln()).abs() < 1e-15);
        let cases = [
            (1.5, PI.sqrt() / 2.0),
            (2.5, 0.75 * PI.sqrt()),
            (3.0, 2.0),
            (6.0, 120.0),
        ];
        for (x, g) in cases {
            assert!(
                (log_gamma(x).unwrap().exp() / g - 1.0).abs() < 1e-12,
                "x={x}"
            );
        }
    }

    #[test]
    fn gamma_recurrence() {
        for x in [0.5, 1.0, 1.5, 2.0, 0.3, 7.25, 40.5] {
            let d = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap();
            assert!((d - x.ln()).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn lanczos_matches_exact_forms() {
        for x in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 10.5, 17.0] {
            let exact = log_gamma(x).unwrap();
            assert!((lanczos_ln_gamma(x) - exact).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn log_sum_exp_absorbs_neg_infinity() {
        let ninf = f64::NEG_INFINITY;
        assert_eq!(log_sum_exp([ninf, ninf]), ninf);
        assert!((log_sum_exp([ninf, 0.0]) - 0.0).abs() < 1e-16);
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + LN_2)).abs() < 1e-12);
    }
}
