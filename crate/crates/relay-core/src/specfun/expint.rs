//! Generalized exponential integral E_n(x) and the scaled product e^x·E_n(x).

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const FPMIN: f64 = 1e-300;

/// E_n(x) = ∫₁^∞ t^(−n) e^(−xt) dt.
pub fn exp_integral_en(n: u32, x: f64) -> Result<f64> {
    check(n, x)?;
    if x == 0.0 {
        return Ok(1.0 / (n as f64 - 1.0));
    }
    if x > 1.0 {
        Ok(continued_fraction(n, x) * (-x).exp())
    } else {
        Ok(series(n, x))
    }
}

/// e^x·E_n(x), finite for all x > 0 without overflow.
pub fn exp_en_scaled(n: u32, x: f64) -> Result<f64> {
    check(n, x)?;
    if x == 0.0 {
        return Ok(1.0 / (n as f64 - 1.0));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x > 1.0 {
        Ok(continued_fraction(n, x))
    } else {
        Ok(series(n, x) * x.exp())
    }
}

/// e^a·E_n(b) evaluated as e^(a−b)·[e^b E_n(b)].
pub fn exp_times_en(n: u32, a: f64, b: f64) -> Result<f64> {
    Ok((a - b).exp() * exp_en_scaled(n, b)?)
}

fn check(n: u32, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 || (x == 0.0 && n <= 1) {
        return Err(Error::domain(format!("E_{n}({x}) undefined")));
    }
    Ok(())
}

fn continued_fraction(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0 / x;
    }
    let nm1 = n as f64 - 1.0;
    let mut b = x + n as f64;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = i as f64;
        let an = -i * (nm1 + i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn series(n: u32, x: f64) -> f64 {
    if n == 0 {
        return (-x).exp() / x;
    }
    let nm1 = n as i64 - 1;
    let mut ans = if nm1 != 0 { 1.0 / nm1 as f64 } else { -x.ln() - EULER_GAMMA };
    let mut fact = 1.0;
    for i in 1..MAX_ITER as i64 {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * EPS {
            break;
        }
    }
    ans
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e2_at_zero_is_one() {
        assert_eq!(exp_integral_en(2, 0.0).unwrap(), 1.0);
        assert!((exp_integral_en(2, 1e-14).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn e1_of_one() {
        assert!((exp_integral_en(1, 1.0).unwrap() - 0.219_383_934_395_520_3).abs() < 1e-14);
    }

    #[test]
    fn e3_recurrence_at_half() {
        let e2 = exp_integral_en(2, 0.5).unwrap();
        let e3 = exp_integral_en(3, 0.5).unwrap();
        assert!((e3 - ((-0.5f64).exp() - 0.5 * e2) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(exp_integral_en(1, 0.0).is_err());
        assert!(exp_integral_en(0, 0.0).is_err());
        assert!(exp_integral_en(2, -1.0).is_err());
    }

    #[test]
    fn scaled_large_argument_matches_asymptote() {
        let x = 1e4;
        let s = exp_en_scaled(1, x).unwrap();
        let asym = (1.0 - 1.0 / x + 2.0 / (x * x)) / x;
        assert!((s - asym).abs() / asym < 1e-11);
    }

    #[test]
    fn scaled_continuous_across_switch() {
        for n in 1..4 {
            let a = exp_en_scaled(n, 1.0 - 1e-12).unwrap();
            let b = exp_en_scaled(n, 1.0 + 1e-12).unwrap();
            assert!((a - b).abs() < 1e-11, "n={n}: {a} vs {b}");
        }
    }
}
