//! Geometry and power constraints to per-hop statistics (λ, μ, p); link SNR
//! distribution and sampling.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeGeometry {
    pub d_sr: f64,
    pub d_rd: f64,
    pub d_sp: f64,
    pub d_rp: f64,
    pub alpha: f64,
}

impl NodeGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d_sr", self.d_sr), ("d_rd", self.d_rd), ("d_sp", self.d_sp), ("d_rp", self.d_rp), ("alpha", self.alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConstraints {
    #[serde(with = "crate::serde_inf")]
    pub gamma_max_db: f64,
    pub gamma_p_db: f64,
}

impl PowerConstraints {
    pub fn gamma_max(&self) -> f64 {
        db_to_linear(self.gamma_max_db)
    }

    pub fn gamma_p(&self) -> f64 {
        db_to_linear(self.gamma_p_db)
    }

    fn validate(&self) -> Result<()> {
        if self.gamma_max_db.is_nan() || self.gamma_max_db == f64::NEG_INFINITY || !self.gamma_p_db.is_finite() {
            return Err(Error::domain("power constraints must map to positive linear values"));
        }
        Ok(())
    }
}

/// Per-hop Ω_h replacing the path-loss value d^(−α).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FadingOverrides {
    pub omega_hs: Option<f64>,
    pub omega_hr: Option<f64>,
}

/// Underlying physical quantities kept for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawLink {
    pub omega_h: f64,
    pub omega_g: f64,
    #[serde(with = "crate::serde_inf")]
    pub gamma_max: f64,
    pub gamma_p: f64,
}

/// Per-hop statistics. `lambda` may be `+∞` (pure interference-limited hop).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    #[serde(with = "crate::serde_inf")]
    pub lambda: f64,
    pub mu: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawLink>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeOverride {
    #[default]
    Exact,
    Ptp,
    Pip,
}

impl LinkParams {
    /// Statistical parameters without a physical sampling context.
    pub fn new(lambda: f64, mu: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(mu > 0.0 && mu.is_finite()) || !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("invalid link params λ={lambda} μ={mu} p={p}")));
        }
        if lambda == f64::INFINITY && p != 1.0 {
            return Err(Error::domain("a hop with λ = ∞ has p = 1"));
        }
        Ok(Self { lambda, mu, p, raw: None })
    }

    /// Statistics implied by γ_max, γ_p, Ω_h, Ω_g, with p = exp(−μ/λ).
    pub fn from_raw(raw: RawLink) -> Result<Self> {
        if !(raw.omega_h > 0.0 && raw.omega_g > 0.0 && raw.gamma_max > 0.0 && raw.gamma_p > 0.0) {
            return Err(Error::domain("raw link quantities must be positive"));
        }
        let lambda = raw.gamma_max * raw.omega_h;
        let mu = raw.gamma_p * raw.omega_h / raw.omega_g;
        let p = (-mu / lambda).exp();
        Ok(Self { lambda, mu, p, raw: Some(raw) })
    }

    /// Pure interference-limited hop: λ = ∞, p = 1.
    pub fn pure_pip(mu: f64) -> Result<Self> {
        Self::new(f64::INFINITY, mu, 1.0)
    }

    pub fn with_regime(&self, regime: RegimeOverride) -> Self {
        match regime {
            RegimeOverride::Exact => *self,
            RegimeOverride::Ptp => Self { p: 0.0, raw: None, ..*self },
            RegimeOverride::Pip => Self { p: 1.0, raw: None, ..*self },
        }
    }

    pub fn p_for(&self, regime: RegimeOverride) -> f64 {
        match regime {
            RegimeOverride::Exact => self.p,
            RegimeOverride::Ptp => 0.0,
            RegimeOverride::Pip => 1.0,
        }
    }

    pub fn inv_lambda(&self) -> f64 {
        1.0 / self.lambda
    }
}

pub fn derive_link_params(
    geom: &NodeGeometry,
    pc: &PowerConstraints,
    fading: &FadingOverrides,
) -> Result<(LinkParams, LinkParams)> {
    geom.validate()?;
    pc.validate()?;
    let omega_hs = fading.omega_hs.unwrap_or(geom.d_sr.powf(-geom.alpha));
    let omega_hr = fading.omega_hr.unwrap_or(geom.d_rd.powf(-geom.alpha));
    let gamma_max = pc.gamma_max();
    let gamma_p = pc.gamma_p();
    let s = LinkParams::from_raw(RawLink { omega_h: omega_hs, omega_g: geom.d_sp.powf(-geom.alpha), gamma_max, gamma_p })?;
    let r = LinkParams::from_raw(RawLink { omega_h: omega_hr, omega_g: geom.d_rp.powf(-geom.alpha), gamma_max, gamma_p })?;
    Ok((s, r))
}

/// F^c(s) = e^(−s/λ)[1 − p(1 − μ/(s+μ))].
pub fn link_ccdf(link: &LinkParams, s: f64, regime: RegimeOverride) -> f64 {
    let p = link.p_for(regime);
    let s = s.max(0.0);
    (-s * link.inv_lambda()).exp() * (1.0 - p * (1.0 - link.mu / (s + link.mu)))
}

/// f(s) = −dF^c/ds.
pub fn link_pdf(link: &LinkParams, s: f64, regime: RegimeOverride) -> f64 {
    let p = link.p_for(regime);
    let s = s.max(0.0);
    let a = link.inv_lambda();
    let m = link.mu / (s + link.mu);
    (-s * a).exp() * (a * (1.0 - p + p * m) + p * m / (s + link.mu))
}

/// Precomputed per-link draw rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrSampler {
    /// γ = min(γ_max, γ_p/|g|²)·|h|².
    Physical { omega_h: f64, omega_g: f64, gamma_max: f64, gamma_p: f64 },
    /// With prob. 1−p an Exp(λ) draw, otherwise min(Exp(λ), μ·E₂/E₃).
    Mixture { lambda: f64, mu: f64, p: f64 },
}

impl SnrSampler {
    pub fn for_link(link: &LinkParams, regime: RegimeOverride) -> Self {
        match (regime, link.raw) {
            (RegimeOverride::Exact, Some(r)) => {
                SnrSampler::Physical { omega_h: r.omega_h, omega_g: r.omega_g, gamma_max: r.gamma_max, gamma_p: r.gamma_p }
            }
            _ => SnrSampler::Mixture { lambda: link.lambda, mu: link.mu, p: link.p_for(regime) },
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SnrSampler::Physical { omega_h, omega_g, gamma_max, gamma_p } => {
                let h: f64 = rng.sample::<f64, _>(Exp1) * omega_h;
                let g: f64 = rng.sample::<f64, _>(Exp1) * omega_g;
                (gamma_p / g).min(gamma_max) * h
            }
            SnrSampler::Mixture { lambda, mu, p } => {
                let a: f64 = rng.sample::<f64, _>(Exp1) * lambda;
                if p > 0.0 && (p >= 1.0 || rng.gen::<f64>() < p) {
                    let b: f64 = rng.sample(Exp1);
                    let c: f64 = rng.sample(Exp1);
                    a.min(mu * b / c)
                } else {
                    a
                }
            }
        }
    }
}

/// One draw of the hop SNR.
pub fn sample_snr<R: Rng + ?Sized>(link: &LinkParams, regime: RegimeOverride, rng: &mut R) -> f64 {
    SnrSampler::for_link(link, regime).sample(rng)
}
