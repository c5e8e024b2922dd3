//! Special functions behind the p-values.

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!(
            "reg_inc_beta domain: a={a}, b={b}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Two-sided p-value of a Student t statistic.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    reg_inc_beta(df / 2.0, 0.5, df / (df + t * t)).unwrap_or(1.0)
}

/// Upper tail of the F distribution.
pub fn f_upper_tail(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if !f.is_finite() {
        return 0.0;
    }
    reg_inc_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)).unwrap_or(1.0)
}

/// Two-sided p-value of a standard normal statistic.
pub fn normal_two_sided(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "{n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn beta_endpoints_and_uniform() {
        assert_eq!(reg_inc_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        for x in [0.01, 0.2, 0.5, 0.77, 0.99] {
            assert!((reg_inc_beta(1.0, 1.0, x).unwrap() - x).abs() < 1e-12);
        }
        assert!((reg_inc_beta(0.5, 0.5, 0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn beta_closed_forms() {
        // I_x(a, 1) = x^a ; I_x(1, b) = 1 − (1−x)^b
        for x in [0.1, 0.4, 0.9] {
            assert!((reg_inc_beta(3.5, 1.0, x).unwrap() - x.powf(3.5)).abs() < 1e-12);
            assert!((reg_inc_beta(1.0, 2.5, x).unwrap() - (1.0 - (1.0 - x).powf(2.5))).abs() < 1e-12);
        }
        // arcsine law: I_x(½, ½) = (2/π) asin √x
        let x: f64 = 0.3;
        let want = 2.0 / std::f64::consts::PI * x.sqrt().asin();
        assert!((reg_inc_beta(0.5, 0.5, x).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn beta_domain_errors() {
        assert!(reg_inc_beta(0.0, 1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, -1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, 1.0, 1.5).is_err());
        assert!(reg_inc_beta(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn t_tail_df2_closed_form() {
        // df = 2: two-sided p = 1 − |t| / sqrt(t² + 2)
        for t in [0.3, 0.617, 1.5, 4.0] {
            let want = 1.0 - t / (t * t + 2.0f64).sqrt();
            assert!((t_two_sided(t, 2.0) - want).abs() < 1e-12);
        }
        assert_eq!(t_two_sided(0.0, 5.0), 1.0);
    }

    #[test]
    fn normal_tail() {
        assert!((normal_two_sided(1.959963984540054) - 0.05).abs() < 1e-12);
        assert_eq!(normal_two_sided(0.0), 1.0);
    }

    proptest::proptest! {
        #[test]
        fn beta_reflection(a in 0.1f64..30.0, b in 0.1f64..30.0, x in 0.0f64..=1.0) {
            let s = reg_inc_beta(a, b, x).unwrap() + reg_inc_beta(b, a, 1.0 - x).unwrap();
            proptest::prop_assert!((s - 1.0).abs() < 1e-10);
        }
    }
}
