use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use super::ccdf::{bisect_log10, Shape, Split};
use super::{check_rho, HopPair};
use crate::channel::{link_ccdf, LinkParams, RegimeOverride};
use crate::error::{Error, Result};
use crate::specfun::{
    exp_e1_dd, integral_i, integral_j, integral_j_dd, integral_m, integral_m_dd, integrate_semi_infinite_rel,
    QuadratureSpec, Scale,
};

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// ∫₀^∞ e^(−ax)/((1+x)(x+μ)) dx.
fn y1(mu: f64, a: f64) -> Result<f64> {
    exp_e1_dd(1.0, mu, a, 0.0)
}

fn scale_of(a: f64) -> Scale {
    if a > 0.0 {
        Scale::Finite(1.0 / a)
    } else {
        Scale::Infinite
    }
}

/// ∫₀^∞ e^(−Bx)μ²/((x+μ)²(1+x)) dx.
fn z2(mu: f64, big_b: f64) -> Result<f64> {
    if (mu - 1.0).abs() > 1e-3 {
        let i2 = if big_b > 0.0 { integral_i(2, mu, 1.0 / big_b, 0.0)? } else { 1.0 };
        return Ok(mu / (mu - 1.0) * (mu * y1(mu, big_b)? - i2));
    }
    let f = |x: f64| (-big_b * x).exp() * mu * mu / ((x + mu).powi(2) * (1.0 + x));
    Ok(integrate_semi_infinite_rel(f, mu.max(1.0), &quad())?.value)
}

/// ∫₀^∞ ln(1+x)e^(−Bx)μ²/((x+μ)²(1+x)) dx.
fn z2_log(mu: f64, big_b: f64) -> Result<f64> {
    let f = |x: f64| x.ln_1p() * (-big_b * x).exp() * mu * mu / ((x + mu).powi(2) * (1.0 + x));
    Ok(integrate_semi_infinite_rel(f, mu.max(1.0), &quad())?.value)
}

/// ln2 · E[(1−d)C_s] assembled term by term from the CCDF.
fn rate_nats(sp: &Split) -> Result<f64> {
    let q = quad();
    let lam_b = scale_of(sp.big_b);
    let mut v = 0.0;
    if sp.ps < 1.0 {
        v += (1.0 - sp.ps) * integral_i(1, 1.0, 1.0 / sp.a_s, 0.0)?;
        let c = (1.0 - sp.ps) * (1.0 - sp.pr) * sp.ratio;
        if c != 0.0 {
            v -= c * integral_i(1, 1.0, 1.0 / sp.big_b, 0.0)?;
        }
    }
    let mu_r_eff = sp.mur / sp.rho;
    match sp.shape {
        Shape::Distinct { c2, c3, c4, kd } => {
            if sp.ps > 0.0 {
                v += sp.ps * sp.mus * (y1(sp.mus, sp.a_s)? - c2 * y1(sp.mus, sp.big_b)?);
            }
            if c3 != 0.0 {
                v += c3 * integral_j(sp.mus, 1.0 / sp.big_b, &q)?;
            }
            if c4 != 0.0 {
                v -= c4 * integral_j(mu_r_eff, 1.0 / sp.big_b, &q)?;
            }
            if kd != 0.0 {
                v += kd / sp.rho * integral_j_dd(sp.mus, mu_r_eff, lam_b, &q)?;
            }
        }
        Shape::Coincident { cm, ce } => {
            if sp.ps > 0.0 {
                v += sp.ps * sp.mus * (y1(sp.mus, sp.a_s)? - cm * y1(sp.mus, sp.big_b)?);
            }
            if sp.ps * sp.pr != 0.0 {
                v -= 0.5 * sp.ps * sp.pr * z2(sp.mus, sp.big_b)?;
            }
            if ce != 0.0 {
                v += ce * integral_j(sp.mus, 1.0 / sp.big_b, &q)?;
            }
        }
    }
    Ok(v.max(0.0))
}

/// E[(1−d)C_s]: average bits per channel use carried on the S−R hop.
pub fn avg_rate_cabr_hop_s(pair: &HopPair, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(rate_nats(&Split::new(pair, rho))? / LN_2)
}

/// E[dC_r], the mirror of [`avg_rate_cabr_hop_s`].
pub fn avg_rate_cabr_hop_r(pair: &HopPair, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    avg_rate_cabr_hop_s(&pair.reversed(), 1.0 / rho)
}

/// (1/ln2)∫₀^∞ F^c_{d,γs}(0,x)/(1+x) dx by adaptive quadrature.
pub fn rate_hop_s_quadrature(pair: &HopPair, rho: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_rho(rho)?;
    let sp = Split::new(pair, rho);
    let f = |x: f64| sp.ccdf(x) / (1.0 + x);
    Ok(integrate_semi_infinite_rel(f, ccdf_scale(pair), quad)?.value / LN_2)
}

fn ccdf_scale(pair: &HopPair) -> f64 {
    let t = |l: &LinkParams| 1.0 / (l.inv_lambda() + 1.0 / l.mu);
    t(&pair.s).min(t(&pair.r)).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CabrRate {
    pub rate: f64,
    pub rho_opt: f64,
}

/// Rate with ρ balancing inflow and outflow, E[(1−d)C_s] = E[dC_r].
pub fn avg_rate_cabr(pair: &HopPair) -> Result<CabrRate> {
    let rho_opt = rho_for_rate_ratio(pair, 1.0)?;
    let rs = avg_rate_cabr_hop_s(pair, rho_opt)?;
    let rr = avg_rate_cabr_hop_r(pair, rho_opt)?;
    Ok(CabrRate { rate: 0.5 * (rs + rr), rho_opt })
}

/// ρ with E[dC_r]/E[(1−d)C_s] = ξ (ξ > 1 starves the buffer).
pub fn rho_for_rate_ratio(pair: &HopPair, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::domain(format!("rate ratio {xi} must be positive")));
    }
    let mut failure = None;
    let f = |lg: f64| {
        let rho = 10f64.powf(lg);
        match (avg_rate_cabr_hop_s(pair, rho), avg_rate_cabr_hop_r(pair, rho)) {
            (Ok(rs), Ok(rr)) => {
                let (a, b) = (xi * rs, rr);
                if a + b > 0.0 { (a - b) / (a + b) } else { 0.0 }
            }
            (Err(e), _) | (_, Err(e)) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let rho = bisect_log10(f, 1e-9)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(rho),
    }
}

/// ½·E[log₂(1+min(γ_s, γ_r))].
pub fn avg_rate_cnbr(pair: &HopPair) -> Result<f64> {
    let (s, r) = (&pair.s, &pair.r);
    let a = s.inv_lambda() + r.inv_lambda();
    let mut v = 0.0;
    if s.p < 1.0 && r.p < 1.0 {
        v += (1.0 - s.p) * (1.0 - r.p) * integral_i(1, 1.0, 1.0 / a, 0.0)?;
    }
    if s.p > 0.0 && r.p < 1.0 {
        v += (1.0 - r.p) * s.p * s.mu * y1(s.mu, a)?;
    }
    if r.p > 0.0 && s.p < 1.0 {
        v += (1.0 - s.p) * r.p * r.mu * y1(r.mu, a)?;
    }
    if s.p * r.p > 0.0 {
        let gap = r.mu - s.mu;
        let w = if gap.abs() / r.mu.max(s.mu) < super::BRANCH_TOLERANCE {
            z2(s.mu, a)?
        } else {
            s.mu * r.mu * (y1(s.mu, a)? - y1(r.mu, a)?) / gap
        };
        v += s.p * r.p * w;
    }
    Ok(0.5 * v / LN_2)
}

/// (1/(2ln2))∫₀^∞ F^c_{γs}(x)F^c_{γr}(x)/(1+x) dx by adaptive quadrature.
pub fn rate_cnbr_quadrature(pair: &HopPair, quad: &QuadratureSpec) -> Result<f64> {
    let f = |x: f64| {
        link_ccdf(&pair.s, x, RegimeOverride::Exact) * link_ccdf(&pair.r, x, RegimeOverride::Exact) / (1.0 + x)
    };
    Ok(0.5 * integrate_semi_infinite_rel(f, ccdf_scale(pair), quad)?.value / LN_2)
}

/// Ergodic capacity E[log₂(1+γ)] of one hop.
pub fn hop_capacity(link: &LinkParams) -> Result<f64> {
    let mut v = 0.0;
    if link.p < 1.0 {
        v += (1.0 - link.p) * integral_i(1, 1.0, link.lambda, 0.0)?;
    }
    if link.p > 0.0 {
        v += link.p * link.mu * y1(link.mu, link.inv_lambda())?;
    }
    Ok(v / LN_2)
}

/// ½·min(E[C_s], E[C_r]).
pub fn avg_rate_cbr(pair: &HopPair) -> Result<f64> {
    Ok(0.5 * hop_capacity(&pair.s)?.min(hop_capacity(&pair.r)?))
}

/// E[(1−d)C_s²] = −∫₀^∞ log₂²(1+x) dF^c_{d,γs}(0,x)
/// = (2/ln²2)∫₀^∞ ln(1+x)F^c_{d,γs}(0,x)/(1+x) dx.
pub fn second_moment_rate_hop_s(pair: &HopPair, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let sp = Split::new(pair, rho);
    let q = quad();
    let lam_b = scale_of(sp.big_b);
    // Terms e^(−ax) and μ/(x+μ) pick up a factor 2; the X(m) terms integrate
    // to ½M, which the factor 2 cancels.
    let mut single = 0.0;
    let mut double = 0.0;
    if sp.ps < 1.0 {
        single += (1.0 - sp.ps) * integral_j(1.0, 1.0 / sp.a_s, &q)?;
        let c = (1.0 - sp.ps) * (1.0 - sp.pr) * sp.ratio;
        if c != 0.0 {
            single -= c * integral_j(1.0, 1.0 / sp.big_b, &q)?;
        }
    }
    let mu_r_eff = sp.mur / sp.rho;
    let jdd1 = |mu: f64, a: f64| integral_j_dd(1.0, mu, scale_of(a), &q);
    match sp.shape {
        Shape::Distinct { c2, c3, c4, kd } => {
            if sp.ps > 0.0 {
                single += sp.ps * sp.mus * (jdd1(sp.mus, sp.a_s)? - c2 * jdd1(sp.mus, sp.big_b)?);
            }
            if c3 != 0.0 {
                double += c3 * integral_m(sp.mus, 1.0 / sp.big_b, &q)?;
            }
            if c4 != 0.0 {
                double -= c4 * integral_m(mu_r_eff, 1.0 / sp.big_b, &q)?;
            }
            if kd != 0.0 {
                double += kd / sp.rho * integral_m_dd(sp.mus, mu_r_eff, lam_b, &q)?;
            }
        }
        Shape::Coincident { cm, ce } => {
            if sp.ps > 0.0 {
                single += sp.ps * sp.mus * (jdd1(sp.mus, sp.a_s)? - cm * jdd1(sp.mus, sp.big_b)?);
            }
            if sp.ps * sp.pr != 0.0 {
                single -= 0.5 * sp.ps * sp.pr * z2_log(sp.mus, sp.big_b)?;
            }
            if ce != 0.0 {
                double += ce * integral_m(sp.mus, 1.0 / sp.big_b, &q)?;
            }
        }
    }
    Ok(((2.0 * single + double) / (LN_2 * LN_2)).max(0.0))
}

/// Quadrature path for [`second_moment_rate_hop_s`].
pub fn second_moment_quadrature(pair: &HopPair, rho: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_rho(rho)?;
    let sp = Split::new(pair, rho);
    let f = |x: f64| x.ln_1p() * sp.ccdf(x) / (1.0 + x);
    Ok(2.0 * integrate_semi_infinite_rel(f, ccdf_scale(pair), quad)?.value / (LN_2 * LN_2))
}

/// Upper bound on the mean queueing delay (slots) of a starved infinite FIFO
/// buffer under adaptive rates.
pub fn delay_bound_adaptive(pair: &HopPair, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let es = avg_rate_cabr_hop_s(pair, rho)?;
    let er = avg_rate_cabr_hop_r(pair, rho)?;
    let xi = er / es;
    if !(xi > 1.0) {
        return Err(Error::domain(format!("starving required: xi = {xi} must exceed 1")));
    }
    let es2 = second_moment_rate_hop_s(pair, rho)?;
    let er2 = second_moment_rate_hop_s(&pair.reversed(), 1.0 / rho)?;
    Ok(0.5 / (xi * es).powi(2) * (xi * xi * es2 + (2.0 * xi - 1.0) * er2) / (xi - 1.0))
}

/// Largest ρ below ρ_opt whose [`delay_bound_adaptive`] does not exceed `t_max`.
pub fn rho_for_delay_bound(pair: &HopPair, t_max: f64) -> Result<f64> {
    if !(t_max > 0.0) {
        return Err(Error::domain(format!("delay target {t_max} must be positive")));
    }
    let rho_opt = rho_for_rate_ratio(pair, 1.0)?;
    let (mut lo, mut hi) = ((rho_opt * 1e-8).ln(), (rho_opt * (1.0 - 1e-9)).ln());
    let excess = |lr: f64| delay_bound_adaptive(pair, lr.exp()).map(|d| d - t_max);
    if excess(lo)? > 0.0 {
        return Err(Error::Infeasible(format!("delay target {t_max} lies below the bound at ρ = {:.3e}", lo.exp())));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let e = match excess(mid) {
            Ok(e) => e,
            Err(Error::Domain(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if e > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(lo.exp())
}
