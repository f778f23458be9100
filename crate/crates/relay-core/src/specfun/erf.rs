//! Complementary error function and its scaled form erfcx(y) = e^(y²)·erfc(y).

use std::f64::consts::PI;

fn erf_series(y: f64) -> f64 {
    let y2 = y * y;
    let mut term = y;
    let mut sum = y;
    for n in 1..200 {
        term *= -y2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

fn erfcx_cf(y: f64) -> f64 {
    // y + (1/2)/(y + 1/(y + (3/2)/(y + ...)))
    let tiny = 1e-300;
    let mut f = y;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..5000 {
        let a = j as f64 / 2.0;
        d = y + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        d = 1.0 / d;
        c = y + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let del = c * d;
        f *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (PI.sqrt() * f)
}

/// e^(y²)·erfc(y).
pub fn erfcx(y: f64) -> f64 {
    if y < 0.0 {
        return 2.0 * (y * y).exp() - erfcx(-y);
    }
    if y < 2.0 {
        (y * y).exp() * (1.0 - erf_series(y))
    } else {
        erfcx_cf(y)
    }
}

pub fn erfc(y: f64) -> f64 {
    if y < 2.0 {
        1.0 - if y > -6.0 { erf_series(y) } else { -1.0 }
    } else {
        let v = (-y * y).exp();
        if v == 0.0 { 0.0 } else { v * erfcx_cf(y) }
    }
}
