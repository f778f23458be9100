//! Closed-form link-selection probabilities, rates, SERs and the adaptive-rate
//! delay bound for the two-hop relay.
//!
//! Every hop may carry `λ = ∞` (pure interference-limited). The formulas are
//! written in terms of `1/λ` so that limit is exact rather than approximated.

mod ccdf;
mod rate;
mod ser;

use serde::{Deserialize, Serialize};

use crate::channel::{LinkParams, RegimeOverride};
use crate::error::{Error, Result};

pub use ccdf::{approx_qs_pip, joint_ccdf_rd, joint_ccdf_sr, lsp, rho_for_lsp, rho_opt_fixed, ApproxLsp};
pub use rate::{
    avg_rate_cabr, avg_rate_cabr_hop_r, avg_rate_cabr_hop_s, avg_rate_cbr, avg_rate_cnbr, delay_bound_adaptive,
    hop_capacity, rate_hop_s_quadrature, rho_for_delay_bound, rate_cnbr_quadrature, rho_for_rate_ratio, second_moment_quadrature,
    second_moment_rate_hop_s, CabrRate,
};
pub use ser::{ser_asym_cabr, ser_asym_cnbr, ser_exact_cabr, ser_exact_cnbr, ser_hop_s, ser_hop_s_quadrature, SerTriple};

/// Relative gap |μ_r − ρμ_s|/max below which the coincident-branch formulas apply.
pub const BRANCH_TOLERANCE: f64 = 1e-6;

/// Link-selection thresholds. `rho_c = ∞` forces S when the buffer is empty
/// and `rho_d = 0` forces R when it is full.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionThresholds {
    pub rho: f64,
    #[serde(with = "crate::serde_inf")]
    pub rho_c: f64,
    pub rho_d: f64,
}

impl SelectionThresholds {
    pub fn uniform(rho: f64) -> Self {
        Self { rho, rho_c: rho, rho_d: rho }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::domain(format!("rho = {} must be positive and finite", self.rho)));
        }
        if !(self.rho_c > 0.0) {
            return Err(Error::domain(format!("rho_c = {} must be positive", self.rho_c)));
        }
        if !(self.rho_d >= 0.0 && self.rho_d.is_finite()) {
            return Err(Error::domain(format!("rho_d = {} must be non-negative and finite", self.rho_d)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    pub eta: f64,
    pub phi: f64,
    pub rate: f64,
}

impl Default for ModulationParams {
    /// BPSK.
    fn default() -> Self {
        Self { eta: 2.0, phi: 1.0, rate: 1.0 }
    }
}

impl ModulationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.phi > 0.0 && self.rate > 0.0) {
            return Err(Error::domain("modulation parameters must be positive"));
        }
        Ok(())
    }

    /// Conditional symbol error probability (φ/2)·erfc(√(ηγ/2)).
    pub fn symbol_error(&self, gamma: f64) -> f64 {
        0.5 * self.phi * crate::specfun::erfc((0.5 * self.eta * gamma).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopPair {
    pub s: LinkParams,
    pub r: LinkParams,
}

impl HopPair {
    pub fn new(s: LinkParams, r: LinkParams) -> Self {
        Self { s, r }
    }

    /// Swaps the hops.
    pub fn reversed(&self) -> Self {
        Self { s: self.r, r: self.s }
    }

    /// Regime forced on both hops. PTP sets p = 0; PIP is the pure
    /// interference-limited limit (γ_max → ∞, so λ = ∞ and p = 1).
    pub fn forced(&self, regime: RegimeOverride) -> Result<Self> {
        let f = |l: &LinkParams| -> Result<LinkParams> {
            match regime {
                RegimeOverride::Exact => Ok(*l),
                RegimeOverride::Ptp => {
                    if l.lambda.is_infinite() {
                        return Err(Error::domain("cannot force PTP on a hop with λ = ∞"));
                    }
                    LinkParams::new(l.lambda, l.mu, 0.0)
                }
                RegimeOverride::Pip => LinkParams::pure_pip(l.mu),
            }
        };
        Ok(Self { s: f(&self.s)?, r: f(&self.r)? })
    }

    pub fn is_pure_ptp(&self) -> bool {
        self.s.p == 0.0 && self.r.p == 0.0
    }

    pub fn is_pure_pip(&self) -> bool {
        self.s.lambda.is_infinite() && self.r.lambda.is_infinite()
    }
}

/// 1/λ_ρ = 1/(ρλ_s) + 1/λ_r. Returns `∞` when both hops have λ = ∞.
pub fn lambda_rho(pair: &HopPair, rho: f64) -> f64 {
    1.0 / (pair.s.inv_lambda() / rho + pair.r.inv_lambda())
}

/// Mirror image of the system: hops swapped and every threshold inverted,
/// with the empty-buffer and full-buffer thresholds trading places.
///
/// Selecting S' = R in the mirror when γ_s ≤ ρ'γ_r is the event γ_r ≥ γ_s/ρ',
/// so ρ' = 1/ρ, ρ_c' = 1/ρ_d and ρ_d' = 1/ρ_c. Applying it twice is the identity.
pub fn reverse(pair: &HopPair, thr: &SelectionThresholds) -> (HopPair, SelectionThresholds) {
    (pair.reversed(), SelectionThresholds { rho: 1.0 / thr.rho, rho_c: 1.0 / thr.rho_d, rho_d: 1.0 / thr.rho_c })
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::domain(format!("rho = {rho} must be positive and finite")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> HopPair {
        HopPair::new(LinkParams::new(1.0, 3.0, 0.2).unwrap(), LinkParams::new(2.0, 4.0, 0.7).unwrap())
    }

    #[test]
    fn lambda_rho_cases() {
        let p = HopPair::new(LinkParams::new(5.0, 1.0, 0.0).unwrap(), LinkParams::new(5.0, 1.0, 0.0).unwrap());
        assert!((lambda_rho(&p, 1.0) - 2.5).abs() < 1e-15);
        assert!((lambda_rho(&p, 1e9) - 5.0).abs() < 1e-7);
        let q = pair();
        let rho = 0.37;
        assert!((lambda_rho(&q, rho) - 1.0 / (1.0 / (rho * 1.0) + 1.0 / 2.0)).abs() < 1e-15);
        let pip = q.forced(RegimeOverride::Pip).unwrap();
        assert!(lambda_rho(&pip, 2.0).is_infinite());
    }

    #[test]
    fn reverse_swaps_and_inverts() {
        let thr = SelectionThresholds { rho: 0.5, rho_c: 0.1, rho_d: 0.9 };
        let (rp, rt) = reverse(&pair(), &thr);
        assert_eq!((rp.s.lambda, rp.r.lambda, rp.s.mu, rp.r.mu), (2.0, 1.0, 4.0, 3.0));
        assert_eq!((rp.s.p, rp.r.p), (0.7, 0.2));
        assert_eq!(rt.rho, 2.0);
        assert!((rt.rho_c - 1.0 / 0.9).abs() < 1e-15);
        assert!((rt.rho_d - 10.0).abs() < 1e-12);
        let (pp, tt) = reverse(&rp, &rt);
        assert_eq!(pp, pair());
        assert!((tt.rho - thr.rho).abs() < 1e-15 && (tt.rho_c - thr.rho_c).abs() < 1e-15);
        assert!((tt.rho_d - thr.rho_d).abs() < 1e-15);
    }

    #[test]
    fn reverse_forced_thresholds() {
        let thr = SelectionThresholds { rho: 2.0, rho_c: f64::INFINITY, rho_d: 0.0 };
        let (_, rt) = reverse(&pair(), &thr);
        assert_eq!(rt.rho_c, f64::INFINITY);
        assert_eq!(rt.rho_d, 0.0);
    }

    #[test]
    fn forced_regimes() {
        let p = pair();
        let ptp = p.forced(RegimeOverride::Ptp).unwrap();
        assert!(ptp.is_pure_ptp());
        let pip = p.forced(RegimeOverride::Pip).unwrap();
        assert!(pip.is_pure_pip() && pip.s.p == 1.0);
        assert!(pip.forced(RegimeOverride::Ptp).is_err());
    }

    #[test]
    fn bpsk_symbol_error() {
        let m = ModulationParams::default();
        assert!((m.symbol_error(0.0) - 0.5).abs() < 1e-15);
        assert!((m.symbol_error(1.0) - 0.5 * crate::specfun::erfc(1.0)).abs() < 1e-16);
    }
}
