use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::ccdf::{Shape, Split};
use super::{check_rho, lsp, HopPair, ModulationParams};
use crate::channel::LinkParams;
use crate::error::{Error, Result};
use crate::specfun::{integral_k, integral_l, integral_l_dd, integrate_semi_infinite_rel, QuadratureSpec, Scale};

/// Per-hop SERs and their sum, which upper-bounds the end-to-end SER.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerTriple {
    pub p_s: f64,
    pub p_r: f64,
    pub p_bound: f64,
}

impl SerTriple {
    fn new(p_s: f64, p_r: f64) -> Self {
        Self { p_s, p_r, p_bound: p_s + p_r }
    }
}

fn scale_of(a: f64) -> Scale {
    if a > 0.0 {
        Scale::Finite(1.0 / a)
    } else {
        Scale::Infinite
    }
}

/// E_w[F^c_{d,γs}(0,w)] for w ~ Gamma(½, 2/η).
fn expected_ccdf(sp: &Split, eta: f64) -> Result<f64> {
    let q = QuadratureSpec::default();
    let lam_b = scale_of(sp.big_b);
    let e_exp = |a: f64| (eta / (eta + 2.0 * a)).sqrt();
    let mut v = 0.0;
    if sp.ps < 1.0 {
        v += (1.0 - sp.ps) * (e_exp(sp.a_s) - (1.0 - sp.pr) * sp.ratio * e_exp(sp.big_b));
    }
    let mu_r_eff = sp.mur / sp.rho;
    match sp.shape {
        Shape::Distinct { c2, c3, c4, kd } => {
            if sp.ps > 0.0 {
                v += sp.ps * (integral_k(sp.mus, scale_of(sp.a_s), eta)? - c2 * integral_k(sp.mus, lam_b, eta)?);
            }
            if c3 != 0.0 {
                v += c3 * integral_l(sp.mus, lam_b, eta, &q)?;
            }
            if c4 != 0.0 {
                v -= c4 * integral_l(mu_r_eff, lam_b, eta, &q)?;
            }
            if kd != 0.0 {
                v += kd / sp.rho * integral_l_dd(sp.mus, mu_r_eff, lam_b, eta, &q)?;
            }
        }
        Shape::Coincident { cm, ce } => {
            let kb = integral_k(sp.mus, lam_b, eta)?;
            if sp.ps > 0.0 {
                v += sp.ps * (integral_k(sp.mus, scale_of(sp.a_s), eta)? - cm * kb);
            }
            if sp.ps * sp.pr != 0.0 {
                let c = 0.5 * eta + sp.big_b;
                let u = sp.mus * c;
                let g = kb * (0.5 - u) + u * (eta / (2.0 * c)).sqrt();
                v -= 0.5 * sp.ps * sp.pr * g;
            }
            if ce != 0.0 {
                v += ce * integral_l(sp.mus, lam_b, eta, &q)?;
            }
        }
    }
    Ok(v)
}

fn conditional(phi: f64, qs: f64, ew: f64) -> Result<f64> {
    if !(qs > 0.0) {
        return Err(Error::domain("link never selected (q = 0); conditional SER undefined"));
    }
    Ok((phi / (2.0 * qs) * (qs - ew)).clamp(0.0, 1.0))
}

/// SER of the S−R hop given that it is selected, at threshold ρ.
pub fn ser_hop_s(pair: &HopPair, rho: f64, m: &ModulationParams) -> Result<f64> {
    check_rho(rho)?;
    m.validate()?;
    let sp = Split::new(pair, rho);
    conditional(m.phi, sp.ccdf(0.0), expected_ccdf(&sp, m.eta)?)
}

/// Quadrature path for [`ser_hop_s`]: (φ/(2q_s))·E_w[q_s − F^c_{d,γs}(0,w)].
pub fn ser_hop_s_quadrature(pair: &HopPair, rho: f64, m: &ModulationParams, quad: &QuadratureSpec) -> Result<f64> {
    check_rho(rho)?;
    m.validate()?;
    let sp = Split::new(pair, rho);
    let qs = sp.ccdf(0.0);
    let eta = m.eta;
    let f = |t: f64| (-0.5 * eta * t * t).exp() * (qs - sp.ccdf(t * t));
    let gap = (2.0 * eta / PI).sqrt() * integrate_semi_infinite_rel(f, (2.0 / eta).sqrt(), quad)?.value;
    conditional(m.phi, qs, qs - gap)
}

/// Exact per-hop SERs of the adaptive scheme at threshold ρ.
pub fn ser_exact_cabr(pair: &HopPair, rho: f64, m: &ModulationParams) -> Result<SerTriple> {
    check_rho(rho)?;
    Ok(SerTriple::new(ser_hop_s(pair, rho, m)?, ser_hop_s(&pair.reversed(), 1.0 / rho, m)?))
}

fn cnbr_hop(l: &LinkParams, m: &ModulationParams) -> Result<f64> {
    let mut v = 1.0;
    if l.p < 1.0 {
        v -= (1.0 - l.p) * (m.eta * l.lambda / (m.eta * l.lambda + 2.0)).sqrt();
    }
    if l.p > 0.0 {
        v -= l.p * integral_k(l.mu, scale_of(l.inv_lambda()), m.eta)?;
    }
    Ok((0.5 * m.phi * v).clamp(0.0, 1.0))
}

/// Per-hop SERs of the alternating (and block) schedules.
pub fn ser_exact_cnbr(pair: &HopPair, m: &ModulationParams) -> Result<SerTriple> {
    m.validate()?;
    Ok(SerTriple::new(cnbr_hop(&pair.s, m)?, cnbr_hop(&pair.r, m)?))
}

fn diversity_factor(l: &LinkParams) -> f64 {
    l.inv_lambda() + l.p / l.mu
}

/// High-SNR approximation of [`ser_exact_cabr`].
pub fn ser_asym_cabr(pair: &HopPair, rho: f64, m: &ModulationParams) -> Result<SerTriple> {
    check_rho(rho)?;
    m.validate()?;
    let (qs, qr) = lsp(pair, rho)?;
    let common = 3.0 * m.phi / (4.0 * m.eta * m.eta) * diversity_factor(&pair.s) * diversity_factor(&pair.r);
    Ok(SerTriple::new(common * rho / qs, common / (rho * qr)))
}

/// High-SNR approximation of [`ser_exact_cnbr`].
pub fn ser_asym_cnbr(pair: &HopPair, m: &ModulationParams) -> Result<SerTriple> {
    m.validate()?;
    let c = m.phi / (2.0 * m.eta);
    Ok(SerTriple::new(c * diversity_factor(&pair.s), c * diversity_factor(&pair.r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::rho_opt_fixed;

    fn lp(l: f64, m: f64, p: f64) -> LinkParams {
        LinkParams::new(l, m, p).unwrap()
    }

    #[test]
    fn cnbr_ptp_value() {
        let l = lp(10.0, 1.0, 0.0);
        let t = ser_exact_cnbr(&HopPair::new(l, l), &ModulationParams::default()).unwrap();
        assert!((t.p_s - 0.5 * (1.0 - (20.0f64 / 22.0).sqrt())).abs() < 1e-15);
        assert!((t.p_bound - 2.0 * t.p_s).abs() < 1e-16);
    }

    #[test]
    fn closed_form_vs_quadrature() {
        let q = QuadratureSpec::default();
        let m = ModulationParams::default();
        let cases = [
            (lp(10.0, 4.0, 0.67), lp(30.0, 9.0, 0.74), 0.8),
            (lp(1000.0, 33.75, (-0.03375f64).exp()), lp(1000.0, 80.0, (-0.08f64).exp()), 2.3),
            (LinkParams::pure_pip(3.0).unwrap(), LinkParams::pure_pip(7.0).unwrap(), 1.3),
            (LinkParams::pure_pip(3.0).unwrap(), LinkParams::pure_pip(6.0).unwrap(), 2.0),
            (lp(5.0, 2.0, 0.4), lp(8.0, 4.0, 0.6), 2.0),
            (lp(50.0, 2.0, 0.0), lp(80.0, 4.0, 0.0), 1.1),
        ];
        for (s, r, rho) in cases {
            let pair = HopPair::new(s, r);
            let a = ser_hop_s(&pair, rho, &m).unwrap();
            let b = ser_hop_s_quadrature(&pair, rho, &m, &q).unwrap();
            assert!((a - b).abs() / b < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn rho_limits_reach_cnbr() {
        let m = ModulationParams::default();
        let pair = HopPair::new(lp(10.0, 4.0, 0.67), lp(30.0, 9.0, 0.74));
        let c = ser_exact_cnbr(&pair, &m).unwrap();
        let hi = ser_exact_cabr(&pair, 1e9, &m).unwrap();
        assert!((hi.p_s - c.p_s).abs() / c.p_s < 1e-6);
        let lo = ser_exact_cabr(&pair, 1e-9, &m).unwrap();
        assert!((lo.p_r - c.p_r).abs() / c.p_r < 1e-6);
    }

    #[test]
    fn pip_floor_asymptote() {
        let m = ModulationParams::default();
        let pair = HopPair::new(LinkParams::pure_pip(156.25).unwrap(), LinkParams::pure_pip(156.25).unwrap());
        let rho = rho_opt_fixed(&pair).unwrap();
        let a = ser_asym_cabr(&pair, rho, &m).unwrap();
        assert!((a.p_bound - 3.0 / 8.0 * 2.0 / 156.25f64.powi(2)).abs() < 1e-15);
        let c = ser_asym_cnbr(&pair, &m).unwrap();
        assert!((c.p_bound - 3.2e-3).abs() < 1e-15);
        let e = ser_exact_cabr(&pair, rho, &m).unwrap();
        assert!((e.p_bound / a.p_bound - 1.0).abs() < 0.05);
    }
}
