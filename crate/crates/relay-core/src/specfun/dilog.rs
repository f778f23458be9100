//! Euler dilogarithm Li₂(x) = −∫₀^x ln(1−t)/t dt for real x ≤ 1.

use crate::error::{Error, Result};
use std::f64::consts::PI;

// B_n/(n+1)! for n = 0, 1, 2, 4, ..., 20.
const COEF: [f64; 12] = [
    1.0,
    -0.25,
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211_680.0,
    -1.0 / 10_886_400.0,
    1.0 / 526_901_760.0,
    -4.064_761_645_144_226e-11,
    8.921_691_020_456_453e-13,
    -1.993_929_586_072_108e-14,
    4.518_980_029_619_919e-16,
    -1.035_651_761_218_125_4e-17,
];

fn bernoulli_series(x: f64) -> f64 {
    let u = -(-x).ln_1p();
    let u2 = u * u;
    let mut sum = u * COEF[0] + u2 * COEF[1];
    let mut p = u * u2;
    for c in &COEF[2..] {
        sum += c * p;
        p *= u2;
    }
    sum
}

pub fn dilog(x: f64) -> Result<f64> {
    if x.is_nan() || x > 1.0 {
        return Err(Error::domain(format!("Li2({x}) requires x <= 1")));
    }
    let pi2_6 = PI * PI / 6.0;
    if x == 1.0 {
        return Ok(pi2_6);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < -1.0 {
        let l = (-x).ln();
        return Ok(-pi2_6 - 0.5 * l * l - bernoulli_series(1.0 / x));
    }
    if x > 0.5 {
        return Ok(pi2_6 - x.ln() * (-x).ln_1p() - bernoulli_series(1.0 - x));
    }
    Ok(bernoulli_series(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert_eq!(dilog(0.0).unwrap(), 0.0);
        assert!((dilog(1.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((dilog(-1.0).unwrap() + PI * PI / 12.0).abs() < 1e-15);
        assert!((dilog(0.5).unwrap() - (PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2))).abs() < 1e-15);
    }

    #[test]
    fn rejects_above_one() {
        assert!(dilog(1.0 + 1e-12).is_err());
    }

    #[test]
    fn reflection() {
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let lhs = dilog(x).unwrap() + dilog(1.0 - x).unwrap();
            let rhs = PI * PI / 6.0 - x.ln() * (1.0 - x).ln();
            assert!((lhs - rhs).abs() < 1e-13, "x={x}");
        }
    }
}
