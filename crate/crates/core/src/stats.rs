//! Small numerical helpers: chi-squared quantiles and closed-form 2x2 algebra.

use crate::Mat2;

/// Natural log of the gamma function (Lanczos, g = 7).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
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
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma function P(a, x).
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // series
        let mut sum = 1.0 / a;
        let mut term = sum;
        let mut n = a;
        for _ in 0..500 {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (sum.ln() + log_prefix).exp()
    } else {
        // Lentz continued fraction for Q(a, x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        1.0 - (log_prefix.exp() * h)
    }
}

pub fn chi_squared_cdf(dof: u32, x: f64) -> f64 {
    regularized_gamma_p(dof as f64 / 2.0, x / 2.0)
}

/// Inverts the chi-squared CDF by bracketing and bisection.
pub fn chi_squared_quantile(dof: u32, p: f64) -> f64 {
    assert!(dof > 0 && p > 0.0 && p < 1.0, "quantile needs dof > 0 and p in (0, 1)");
    let mut lo = 0.0;
    let mut hi = dof as f64;
    while chi_squared_cdf(dof, hi) < p {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_squared_cdf(dof, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mean - radius, mean + radius)
}

pub fn symmetrize(m: &Mat2) -> Mat2 {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_dof_quantile_matches_closed_form() {
        // CDF for 2 dof is 1 - exp(-x/2), so the 0.99 quantile is -2 ln 0.01.
        let q = chi_squared_quantile(2, 0.99);
        assert_relative_eq!(q, -2.0 * 0.01f64.ln(), epsilon = 1e-9);
        assert!((q - 9.2103).abs() < 1e-3);
    }

    #[test]
    fn known_quantiles_other_dof() {
        assert_relative_eq!(chi_squared_quantile(1, 0.95), 3.841_458_820_694_124, epsilon = 1e-8);
        assert_relative_eq!(chi_squared_quantile(3, 0.99), 11.344_866_730_144_373, epsilon = 1e-8);
        assert_relative_eq!(chi_squared_quantile(10, 0.5), 9.341_817_765_591_966, epsilon = 1e-8);
    }

    #[test]
    fn eigenvalues_closed_form() {
        let m = Mat2::new(2.0, 1.0, 1.0, 2.0);
        let (lo, hi) = sym_eigenvalues(&m);
        assert_relative_eq!(lo, 1.0, epsilon = 1e-14);
        assert_relative_eq!(hi, 3.0, epsilon = 1e-14);
    }
}
