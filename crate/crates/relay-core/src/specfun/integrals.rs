//! The named integrals I_n, J, K, L and M.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::dilog::dilog;
use super::erf::erfcx;
use super::expint::{exp_en_scaled, EULER_GAMMA};
use super::quad::{integrate_semi_infinite_rel as integrate_semi_infinite, QuadratureSpec};
use crate::error::{Error, Result};

/// A mean-SNR scale that may be infinite (pure interference-limited hop).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Finite(f64),
    Infinite,
}

impl Scale {
    pub fn recip(self) -> f64 {
        match self {
            Scale::Finite(v) => 1.0 / v,
            Scale::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Scale::Infinite)
    }

    fn check(self) -> Result<()> {
        match self {
            Scale::Finite(v) if !(v > 0.0) || v.is_nan() => Err(Error::domain(format!("scale {v} must be positive"))),
            _ => Ok(()),
        }
    }
}

impl From<f64> for Scale {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY { Scale::Infinite } else { Scale::Finite(v) }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {v} must be positive and finite")))
    }
}

/// I_n(μ,λ;x) = ∫_x^∞ μ^(n−1) e^(−s/λ)/(s+μ)^n ds.
pub fn integral_i(n: u32, mu: f64, lambda: f64, x: f64) -> Result<f64> {
    positive("mu", mu)?;
    positive("lambda", lambda)?;
    if n == 0 || !(x >= 0.0) {
        return Err(Error::domain("integral_I needs n >= 1 and x >= 0"));
    }
    let z = (x + mu) / lambda;
    let ratio = (mu / (x + mu)).powi(n as i32 - 1);
    Ok(ratio * (-x / lambda).exp() * exp_en_scaled(n, z)?)
}

/// I_n(μ,λ) = I_n(μ,λ;0).
pub fn integral_i0(n: u32, mu: f64, lambda: f64) -> Result<f64> {
    integral_i(n, mu, lambda, 0.0)
}

/// J(μ,λ) = ∫₀^∞ ln(1+x) e^(−x/λ)/(x+μ) dx.
pub fn integral_j(mu: f64, lambda: f64, quad: &QuadratureSpec) -> Result<f64> {
    positive("mu", mu)?;
    positive("lambda", lambda)?;
    let f = |x: f64| x.ln_1p() * (-x / lambda).exp() / (x + mu);
    Ok(integrate_semi_infinite(f, lambda, quad)?.value)
}

/// M(μ,λ) = ∫₀^∞ [ln(1+x)]² e^(−x/λ)/(x+μ) dx.
pub fn integral_m(mu: f64, lambda: f64, quad: &QuadratureSpec) -> Result<f64> {
    positive("mu", mu)?;
    positive("lambda", lambda)?;
    let f = |x: f64| {
        let l = x.ln_1p();
        l * l * (-x / lambda).exp() / (x + mu)
    };
    Ok(integrate_semi_infinite(f, lambda, quad)?.value)
}

/// K(μ,λ) = √(πημ/2)·exp(ημ/2 + μ/λ)·erfc(√(ημ/2 + μ/λ)).
pub fn integral_k(mu: f64, lambda: Scale, eta: f64) -> Result<f64> {
    positive("mu", mu)?;
    positive("eta", eta)?;
    lambda.check()?;
    let u = eta * mu / 2.0 + mu * lambda.recip();
    Ok((PI * eta * mu / 2.0).sqrt() * erfcx(u.sqrt()))
}

/// L(μ,λ) = e^(μ/λ) ∫₀^∞ √(η/(2πw)) e^(−ηw/2) E₁((w+μ)/λ) dw.
///
/// For `Scale::Infinite` this returns the finite part
/// lim_{λ→∞} [L(μ,λ) − ln λ] = −γ − E_w[ln(w+μ)], so differences
/// L(μ₁,∞) − L(μ₂,∞) equal the limit of the finite-λ differences.
pub fn integral_l(mu: f64, lambda: Scale, eta: f64, quad: &QuadratureSpec) -> Result<f64> {
    positive("mu", mu)?;
    positive("eta", eta)?;
    lambda.check()?;
    let norm = (2.0 * eta / PI).sqrt();
    let scale = (2.0 / eta).sqrt();
    match lambda {
        Scale::Finite(l) => {
            let c = eta / 2.0 + 1.0 / l;
            let f = |t: f64| {
                let t2 = t * t;
                (-c * t2).exp() * exp_en_scaled(1, (t2 + mu) / l).unwrap_or(f64::NAN)
            };
            Ok(norm * integrate_semi_infinite(f, c.sqrt().recip(), quad)?.value)
        }
        Scale::Infinite => {
            let f = |t: f64| {
                let t2 = t * t;
                (-eta * t2 / 2.0).exp() * (t2 + mu).ln()
            };
            Ok(-EULER_GAMMA - norm * integrate_semi_infinite(f, scale, quad)?.value)
        }
    }
}

/// L(μ₁,λ) − L(μ₂,λ), finite also for λ = ∞.
pub fn integral_l_diff(mu1: f64, mu2: f64, lambda: Scale, eta: f64, quad: &QuadratureSpec) -> Result<f64> {
    match lambda {
        Scale::Infinite => {
            positive("mu1", mu1)?;
            positive("mu2", mu2)?;
            positive("eta", eta)?;
            let norm = (2.0 * eta / PI).sqrt();
            let f = |t: f64| {
                let t2 = t * t;
                (-eta * t2 / 2.0).exp() * ((t2 + mu2) / (t2 + mu1)).ln()
            };
            Ok(norm * integrate_semi_infinite(f, (2.0 / eta).sqrt(), quad)?.value)
        }
        Scale::Finite(_) => Ok(integral_l(mu1, lambda, eta, quad)? - integral_l(mu2, lambda, eta, quad)?),
    }
}

/// Y = ∫_{x0}^∞ e^(−b·u)/((u+m₁)(u+m₂)) du for b ≥ 0.
///
/// Equals [X(m₁) − X(m₂)]/(m₂ − m₁) with X(m) = e^(b·m)·E₁(b(x0+m)), evaluated
/// without cancellation when m₁ ≈ m₂.
pub fn exp_e1_dd(m1: f64, m2: f64, b: f64, x0: f64) -> Result<f64> {
    positive("m1", m1)?;
    positive("m2", m2)?;
    if !(b >= 0.0) || !(x0 >= 0.0) {
        return Err(Error::domain("exp_e1_dd needs b >= 0 and x0 >= 0"));
    }
    let gap = m2 - m1;
    let rel = gap.abs() / m1.max(m2);
    if b == 0.0 {
        if rel == 0.0 {
            return Ok(1.0 / (x0 + m1));
        }
        if rel < 0.5 {
            return Ok((gap / (x0 + m1)).ln_1p() / gap);
        }
        return Ok(((x0 + m2) / (x0 + m1)).ln() / gap);
    }
    if b == f64::INFINITY {
        return Ok(0.0);
    }
    if rel > 1e-2 {
        let x = |m: f64| -> Result<f64> { Ok((-b * x0).exp() * exp_en_scaled(1, b * (x0 + m))?) };
        return Ok((x(m1)? - x(m2)?) / gap);
    }
    let c = 0.5 * (m1 + m2);
    let h2 = (0.5 * gap).powi(2);
    let mut sum = 0.0;
    let mut hp = 1.0;
    for j in 0..5u32 {
        let n = 2 * j + 2;
        let g = integral_i(n, c, 1.0 / b, x0)? / c.powi(n as i32 - 1);
        sum += g * hp;
        hp *= h2;
    }
    Ok(sum)
}

fn dd_scale(m1: f64, m2: f64, lambda: Scale) -> f64 {
    let m = m1.max(m2).max(1.0);
    match lambda {
        Scale::Finite(l) => l.min(m),
        Scale::Infinite => m,
    }
}

/// [J(m₁,λ) − J(m₂,λ)]/(m₂ − m₁) = ∫₀^∞ ln(1+x) e^(−x/λ)/((x+m₁)(x+m₂)) dx.
///
/// For λ = ∞ and well-separated arguments: [Li₂(1−m₁) − Li₂(1−m₂)]/(m₂ − m₁).
pub fn integral_j_dd(m1: f64, m2: f64, lambda: Scale, quad: &QuadratureSpec) -> Result<f64> {
    positive("m1", m1)?;
    positive("m2", m2)?;
    lambda.check()?;
    if lambda.is_infinite() && (m2 - m1).abs() > 1e-3 * m1.max(m2) {
        return Ok((dilog(1.0 - m1)? - dilog(1.0 - m2)?) / (m2 - m1));
    }
    let a = lambda.recip();
    let f = |x: f64| x.ln_1p() * (-a * x).exp() / ((x + m1) * (x + m2));
    Ok(integrate_semi_infinite(f, dd_scale(m1, m2, lambda), quad)?.value)
}

/// [M(m₁,λ) − M(m₂,λ)]/(m₂ − m₁).
pub fn integral_m_dd(m1: f64, m2: f64, lambda: Scale, quad: &QuadratureSpec) -> Result<f64> {
    positive("m1", m1)?;
    positive("m2", m2)?;
    lambda.check()?;
    let a = lambda.recip();
    let f = |x: f64| {
        let l = x.ln_1p();
        l * l * (-a * x).exp() / ((x + m1) * (x + m2))
    };
    Ok(integrate_semi_infinite(f, dd_scale(m1, m2, lambda), quad)?.value)
}

/// [L(m₁,λ) − L(m₂,λ)]/(m₂ − m₁) = E_w[∫_w^∞ e^(−u/λ)/((u+m₁)(u+m₂)) du].
pub fn integral_l_dd(m1: f64, m2: f64, lambda: Scale, eta: f64, quad: &QuadratureSpec) -> Result<f64> {
    positive("m1", m1)?;
    positive("m2", m2)?;
    positive("eta", eta)?;
    lambda.check()?;
    let b = lambda.recip();
    let norm = (2.0 * eta / PI).sqrt();
    let f = |t: f64| {
        let t2 = t * t;
        (-eta * t2 / 2.0).exp() * exp_e1_dd(m1, m2, b, t2).unwrap_or(f64::NAN)
    };
    Ok(norm * integrate_semi_infinite(f, (eta / 2.0 + b).sqrt().recip(), quad)?.value)
}
