use serde::{Deserialize, Serialize};

use super::{check_rho, HopPair, BRANCH_TOLERANCE};
use crate::error::{Error, Result};
use crate::specfun::{exp_e1_dd, exp_en_scaled};

/// Constants of F^c_{d,γs}(0,x) = Pr{γ_s > x, γ_r ≤ ργ_s} for one (pair, ρ).
///
/// With a_i = 1/λ_i, B = a_s + ρa_r and b = B/ρ, the CCDF is a combination of
/// e^(−a_s x), e^(−Bx), μ_s/(x+μ_s), and
/// X(m) = ∫_{ρx}^∞ e^(−bu)/(u+m) du = e^(−Bx)·e^z E₁(z), z = b(ρx+m).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Split {
    pub ps: f64,
    pub pr: f64,
    pub mus: f64,
    pub mur: f64,
    pub rho: f64,
    pub a_s: f64,
    pub big_b: f64,
    pub b: f64,
    /// λ_ρ/(ρλ_s) = a_s/B.
    pub ratio: f64,
    pub shape: Shape,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Shape {
    /// μ_r ≠ ρμ_s.
    Distinct {
        /// Coefficient of μ_s/(x+μ_s)·e^(−Bx).
        c2: f64,
        /// Coefficient of X(ρμ_s).
        c3: f64,
        /// Coefficient of −X(μ_r).
        c4: f64,
        /// Coefficient of Y = [X(ρμ_s) − X(μ_r)]/(μ_r − ρμ_s).
        kd: f64,
    },
    /// μ_r = ρμ_s.
    Coincident {
        /// Coefficient of μ_s/(x+μ_s)·e^(−Bx).
        cm: f64,
        /// Coefficient of X(μ_r).
        ce: f64,
    },
}

impl Split {
    pub fn new(pair: &HopPair, rho: f64) -> Self {
        let (s, r) = (&pair.s, &pair.r);
        let (ps, pr, mus, mur) = (s.p, r.p, s.mu, r.mu);
        let a_s = s.inv_lambda();
        let a_r = r.inv_lambda();
        let big_b = a_s + rho * a_r;
        let b = a_s / rho + a_r;
        let ratio = if big_b > 0.0 { a_s / big_b } else { 0.0 };
        let d = mur - rho * mus;
        let shape = if d.abs() / mur.max(rho * mus) < BRANCH_TOLERANCE {
            Shape::Coincident {
                cm: (1.0 - pr) - 0.5 * pr * (mur * a_r - mus * a_s),
                ce: ps * (1.0 - pr) * mur * a_r - pr * (1.0 - ps) * mus * a_s
                    + 0.5 * ps * pr * ((mus * a_s).powi(2) - (mur * a_r).powi(2)),
            }
        } else {
            let c2 = 1.0 - pr + mur * pr / d;
            Shape::Distinct {
                c2,
                c3: ps * c2 * rho * mus * a_r,
                c4: pr * (1.0 - ps - rho * mus * ps / d) * mur * a_s / rho,
                kd: ps * pr * rho * mus * mur / d,
            }
        };
        Self { ps, pr, mus, mur, rho, a_s, big_b, b, ratio, shape }
    }

    fn x_term(&self, x: f64, m: f64) -> f64 {
        (-self.big_b * x).exp() * exp_en_scaled(1, self.b * (self.rho * x + m)).unwrap_or(0.0)
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        let es = (-self.a_s * x).exp();
        let eb = (-self.big_b * x).exp();
        let ms = self.mus / (x + self.mus);
        let mut v = 0.0;
        if self.ps < 1.0 {
            v += (1.0 - self.ps) * (es - (1.0 - self.pr) * self.ratio * eb);
        }
        match self.shape {
            Shape::Distinct { c2, c3, c4, kd } => {
                v += self.ps * ms * (es - c2 * eb);
                if c3 != 0.0 {
                    v += c3 * self.x_term(x, self.rho * self.mus);
                }
                if c4 != 0.0 {
                    v -= c4 * self.x_term(x, self.mur);
                }
                if kd != 0.0 {
                    v += kd * exp_e1_dd(self.rho * self.mus, self.mur, self.b, self.rho * x).unwrap_or(0.0);
                }
            }
            Shape::Coincident { cm, ce } => {
                v += self.ps * ms * (es - cm * eb);
                v -= 0.5 * self.ps * self.pr * eb * ms * ms;
                if ce != 0.0 {
                    v += ce * self.x_term(x, self.mur);
                }
            }
        }
        v.clamp(0.0, 1.0)
    }
}

/// F^c_{d,γs}(0,x) = Pr{γ_s > x, γ_r ≤ ργ_s}.
pub fn joint_ccdf_sr(pair: &HopPair, rho: f64, x: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(x >= 0.0) {
        return Err(Error::domain(format!("x = {x} must be non-negative")));
    }
    Ok(Split::new(pair, rho).ccdf(x))
}

/// F^c_{d,γr}(1,x) = Pr{γ_r > x, γ_r > ργ_s}, the mirror of [`joint_ccdf_sr`].
pub fn joint_ccdf_rd(pair: &HopPair, rho: f64, x: f64) -> Result<f64> {
    check_rho(rho)?;
    joint_ccdf_sr(&pair.reversed(), 1.0 / rho, x)
}

/// (q_s, q_r) at threshold ρ. ρ = ∞ gives (1, 0) and ρ = 0 gives (0, 1).
pub fn lsp(pair: &HopPair, rho: f64) -> Result<(f64, f64)> {
    if rho == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    if rho == 0.0 {
        return Ok((0.0, 1.0));
    }
    let qs = joint_ccdf_sr(pair, rho, 0.0)?;
    Ok((qs, 1.0 - qs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxLsp {
    pub q_s: f64,
    /// False when z = ρμ_s/μ_r exceeds 1, outside the starving side.
    pub valid: bool,
}

/// q_s ≈ z/(1+z) with z = ρμ_s/μ_r, for interference-limited hops.
pub fn approx_qs_pip(pair: &HopPair, rho: f64) -> Result<ApproxLsp> {
    check_rho(rho)?;
    let z = rho * pair.s.mu / pair.r.mu;
    Ok(ApproxLsp { q_s: z / (1.0 + z), valid: z <= 1.0 })
}

/// ρ with q_s(ρ) = ½.
pub fn rho_opt_fixed(pair: &HopPair) -> Result<f64> {
    if pair.is_pure_ptp() {
        return Ok(pair.r.lambda / pair.s.lambda);
    }
    if pair.is_pure_pip() {
        return Ok(pair.r.mu / pair.s.mu);
    }
    let f = |lg: f64| Split::new(pair, 10f64.powf(lg)).ccdf(0.0) - 0.5;
    bisect_log10(f, 1e-10)
}

/// ρ with q_s(ρ) = `q_s`; 0 and 1 map to ρ = 0 and ρ = ∞.
pub fn rho_for_lsp(pair: &HopPair, q_s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q_s) {
        return Err(Error::domain(format!("target q_s = {q_s} outside [0, 1]")));
    }
    if q_s == 0.0 {
        return Ok(0.0);
    }
    if q_s == 1.0 {
        return Ok(f64::INFINITY);
    }
    let f = |lg: f64| Split::new(pair, 10f64.powf(lg)).ccdf(0.0) - q_s;
    bisect_log10(f, 1e-12 * q_s.min(1.0 - q_s).max(1e-3))
}

/// Root of an increasing `f` over log₁₀ρ ∈ [−30, 30].
pub(crate) fn bisect_log10<F: FnMut(f64) -> f64>(mut f: F, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo <= 0.0 && fhi >= 0.0) {
        return Err(Error::Bracket(format!("objective does not change sign on log10 rho in [-30, 30] ({flo:.3e}, {fhi:.3e})")));
    }
    let mut best = (lo, flo.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < best.1 {
            best = (mid, fm.abs());
        }
        if fm.abs() <= tol || hi - lo < 1e-15 {
            return Ok(10f64.powf(mid));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.1 <= 10.0 * tol {
        return Ok(10f64.powf(best.0));
    }
    Err(Error::NonConvergence { value: 10f64.powf(best.0), achieved: best.1 })
}
