//! Finite-buffer threshold-protocol chain: steady state, throughput, delay
//! decomposition, SER mixing, and the MDMT / CT / ε parameter-selection schemes.
//!
//! State i is the relay occupancy in packets. From 0 the chain moves up w.p. q_c,
//! from L down w.p. q_d, and in between up w.p. q_s, down w.p. q_r = 1 − q_s.

use serde::{Deserialize, Serialize};

use crate::analytic::{lsp, rho_for_lsp, ser_exact_cnbr, ser_hop_s, HopPair, ModulationParams, SelectionThresholds};
use crate::channel::RegimeOverride;
use crate::error::{Error, Result};

/// Below this |ξ − 1| the ξ = 1 limits are used.
pub const XI_UNIT_TOLERANCE: f64 = 1e-9;

/// Above this L the queueing delay uses the closed form instead of the exact sum.
const SERIES_MAX_L: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BufferSize {
    Finite(u64),
    Infinite,
}

impl BufferSize {
    pub fn finite(self) -> Option<u64> {
        match self {
            BufferSize::Finite(l) => Some(l),
            BufferSize::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProtocolParams {
    pub buffer: BufferSize,
    pub q_s: f64,
    pub q_c: f64,
    pub q_d: f64,
}

impl ThresholdProtocolParams {
    pub fn new(buffer: BufferSize, q_s: f64, q_c: f64, q_d: f64) -> Result<Self> {
        let p = Self { buffer, q_s, q_c, q_d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_s > 0.0 && self.q_s < 1.0) {
            return Err(Error::domain(format!("q_s = {} must lie in (0, 1)", self.q_s)));
        }
        for (name, v) in [("q_c", self.q_c), ("q_d", self.q_d)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::domain(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        match self.buffer {
            BufferSize::Finite(0) => Err(Error::domain("buffer size must be at least one packet")),
            BufferSize::Infinite if !(self.xi() > 1.0) => {
                Err(Error::domain(format!("infinite buffer needs ξ > 1 (q_s < ½), got q_s = {}", self.q_s)))
            }
            _ => Ok(()),
        }
    }

    pub fn q_r(&self) -> f64 {
        1.0 - self.q_s
    }

    /// ξ = q_r/q_s.
    pub fn xi(&self) -> f64 {
        (1.0 - self.q_s) / self.q_s
    }

    pub fn xi_c(&self) -> f64 {
        (1.0 - self.q_c) / self.q_c
    }

    pub fn xi_d(&self) -> f64 {
        (1.0 - self.q_d) / self.q_d
    }

    /// Mirror chain: q_s ↔ q_r, q_c ↔ q_d.
    pub fn reversed(&self) -> Result<Self> {
        Self::new(self.buffer, self.q_r(), self.q_d, self.q_c)
    }

    /// Parameters from a target (ξ, ξ_c, ξ_d).
    pub fn from_xi(buffer: BufferSize, xi: f64, xi_c: f64, xi_d: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) || !(xi_c >= 0.0 && xi_c.is_finite()) || !(xi_d >= 0.0 && xi_d.is_finite()) {
            return Err(Error::domain(format!("invalid (ξ, ξ_c, ξ_d) = ({xi}, {xi_c}, {xi_d})")));
        }
        Self::new(buffer, 1.0 / (1.0 + xi), 1.0 / (1.0 + xi_c), 1.0 / (1.0 + xi_d))
    }

    fn ln_xi(&self) -> f64 {
        // ξ − 1 = (1 − 2q_s)/q_s without cancellation
        ((1.0 - 2.0 * self.q_s) / self.q_s).ln_1p()
    }

    fn near_unit(&self) -> bool {
        (self.xi() - 1.0).abs() < XI_UNIT_TOLERANCE
    }

    /// (1 − ξ⁻¹)/(1 − ξ⁻ᴸ): share of arrivals entering from the empty state.
    pub fn underflow_weight(&self) -> f64 {
        match self.buffer {
            BufferSize::Infinite => -(-self.ln_xi()).exp_m1(),
            BufferSize::Finite(l) if self.near_unit() => 1.0 / l as f64,
            BufferSize::Finite(l) => {
                let t = self.ln_xi();
                (-t).exp_m1() / (-(l as f64) * t).exp_m1()
            }
        }
    }

    /// (ξ − 1)/(ξᴸ − 1): share of departures leaving from the full state.
    pub fn overflow_weight(&self) -> f64 {
        match self.buffer {
            BufferSize::Infinite => 0.0,
            BufferSize::Finite(l) if self.near_unit() => 1.0 / l as f64,
            BufferSize::Finite(l) => {
                let t = self.ln_xi();
                t.exp_m1() / ((l as f64) * t).exp_m1()
            }
        }
    }
}

/// Stationary distribution (π₀, …, π_L).
pub fn steady_state(p: &ThresholdProtocolParams) -> Result<Vec<f64>> {
    p.validate()?;
    let l = p.buffer.finite().ok_or_else(|| Error::domain("steady state vector needs a finite buffer"))? as usize;
    let ln_xi = p.ln_xi();
    // log-weights relative to π₀, normalised after subtracting the max
    let mut lw = Vec::with_capacity(l + 1);
    lw.push(0.0);
    for i in 1..l {
        lw.push((p.q_c / p.q_r()).ln() - (i as f64 - 1.0) * ln_xi);
    }
    lw.push((p.q_c / p.q_d).ln() + (1.0 - l as f64) * ln_xi);
    let top = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut pi: Vec<f64> = lw.iter().map(|w| (w - top).exp()).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(pi)
}

/// (π₀, π_L) in closed form. For an infinite buffer π_L is 0.
pub fn boundary_probabilities(p: &ThresholdProtocolParams) -> Result<(f64, f64)> {
    p.validate()?;
    let (u, o) = (p.underflow_weight(), p.overflow_weight());
    let tau = 1.0 / (2.0 + p.xi_c() * u + p.xi_d() * o);
    Ok((u * tau / p.q_c, o * tau / p.q_d))
}

/// Packets per slot: ½{1 − (1−q_c)π₀ − (1−q_d)π_L}.
pub fn throughput(p: &ThresholdProtocolParams) -> Result<f64> {
    let (pi0, pil) = boundary_probabilities(p)?;
    Ok(0.5 * (1.0 - (1.0 - p.q_c) * pi0 - (1.0 - p.q_d) * pil))
}

/// Departure rate q_dπ_L + q_r(1 − π₀ − π_L) + (1 − q_c)π₀: slots in which the
/// relay is selected, counting the silent ones at an empty buffer.
pub fn departure_rate(p: &ThresholdProtocolParams) -> Result<f64> {
    let (pi0, pil) = boundary_probabilities(p)?;
    Ok(p.q_d * pil + p.q_r() * (1.0 - pi0 - pil) + (1.0 - p.q_c) * pi0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayDecomposition {
    pub t_q: f64,
    pub t_u: f64,
    pub t_o: f64,
    pub t_total: f64,
}

impl DelayDecomposition {
    pub fn new(t_q: f64, t_u: f64, t_o: f64) -> Self {
        Self { t_q, t_u, t_o, t_total: t_q + t_u + t_o }
    }

    pub fn t_silent(&self) -> f64 {
        self.t_u + self.t_o
    }
}

/// Average queueing and silent-slot delays in slots.
pub fn delays(p: &ThresholdProtocolParams) -> Result<DelayDecomposition> {
    p.validate()?;
    let t_u = p.xi_c() * p.underflow_weight();
    let t_o = p.xi_d() * p.overflow_weight();
    Ok(DelayDecomposition::new(queueing_delay(p), t_u, t_o))
}

fn queueing_delay(p: &ThresholdProtocolParams) -> f64 {
    let xi = p.xi();
    let l = match p.buffer {
        BufferSize::Infinite => return 1.0 + 2.0 / (xi - 1.0),
        BufferSize::Finite(l) => l,
    };
    let lf = l as f64;
    if p.near_unit() {
        return lf + p.xi_d();
    }
    if l <= SERIES_MAX_L {
        // 1 + [2Σ_{m<L} m rᵐ + L ξ_d r^{L−1}] / Σ_{m<L} rᵐ with r = ξ⁻¹ (written
        // in ξ with reversed weights when ξ < 1, so no power exceeds 1)
        let (r, reversed) = if xi >= 1.0 { (1.0 / xi, false) } else { (xi, true) };
        let (mut pow, mut s0, mut s1) = (1.0, 0.0, 0.0);
        for m in 0..l {
            s0 += pow;
            s1 += m as f64 * pow;
            if m + 1 < l {
                pow *= r;
            }
        }
        return if reversed {
            // weights ξʲ with multiplicity (L−1−j), tail term L ξ_d
            1.0 + (2.0 * ((lf - 1.0) * s0 - s1) + lf * p.xi_d()) / s0
        } else {
            1.0 + (2.0 * s1 + lf * p.xi_d() * pow) / s0
        };
    }
    let w = p.overflow_weight();
    1.0 + 2.0 / (xi - 1.0) + lf * w * (p.xi_d() - 2.0 / (xi - 1.0))
}

/// Mean occupancy Q̄ = A·T̄_q.
pub fn mean_occupancy(p: &ThresholdProtocolParams) -> Result<f64> {
    Ok(throughput(p)? * delays(p)?.t_q)
}

/// Queue delay of a LIFO buffer with these parameters, (L − Q̄)/A.
pub fn lifo_equivalent_queue_delay(p: &ThresholdProtocolParams) -> Result<f64> {
    let l = p.buffer.finite().ok_or_else(|| Error::domain("LIFO equivalent delay needs a finite buffer"))?;
    let a = throughput(p)?;
    Ok((l as f64 - mean_occupancy(p)?) / a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentSers {
    pub p_s: f64,
    pub p_c: f64,
    pub p_r: f64,
    pub p_d: f64,
}

/// Conditional hop SERs for interior (ρ), empty (ρ_c) and full (ρ_d) states.
/// ρ_c = ∞ and ρ_d = 0 give the unconditioned hop SER.
pub fn component_sers(pair: &HopPair, thr: &SelectionThresholds, m: &ModulationParams) -> Result<ComponentSers> {
    thr.validate()?;
    let rev = pair.reversed();
    let plain = ser_exact_cnbr(pair, m)?;
    let p_c = if thr.rho_c == f64::INFINITY { plain.p_s } else { ser_hop_s(pair, thr.rho_c, m)? };
    let p_d = if thr.rho_d == 0.0 { plain.p_r } else { ser_hop_s(&rev, 1.0 / thr.rho_d, m)? };
    Ok(ComponentSers { p_s: ser_hop_s(pair, thr.rho, m)?, p_c, p_r: ser_hop_s(&rev, 1.0 / thr.rho, m)?, p_d })
}

/// Chain parameters implied by the thresholds through the link selection probabilities.
pub fn params_from_thresholds(pair: &HopPair, thr: &SelectionThresholds, buffer: BufferSize) -> Result<ThresholdProtocolParams> {
    thr.validate()?;
    let q_s = lsp(pair, thr.rho)?.0;
    let q_c = lsp(pair, thr.rho_c)?.0;
    let q_d = lsp(pair, thr.rho_d)?.1;
    ThresholdProtocolParams::new(buffer, q_s, q_c, q_d)
}

/// Thresholds realising the chain parameters on this pair (inverse of [`params_from_thresholds`]).
pub fn thresholds_for_params(pair: &HopPair, p: &ThresholdProtocolParams) -> Result<SelectionThresholds> {
    let thr = SelectionThresholds {
        rho: rho_for_lsp(pair, p.q_s)?,
        rho_c: rho_for_lsp(pair, p.q_c)?,
        rho_d: rho_for_lsp(pair, 1.0 - p.q_d)?,
    };
    thr.validate()?;
    Ok(thr)
}

/// (P'_s, P'_r): per-hop SER averaged over the states the hop is used from.
pub fn ser_threshold(p: &ThresholdProtocolParams, c: &ComponentSers) -> Result<(f64, f64)> {
    p.validate()?;
    for (name, v) in [("P_s", c.p_s), ("P_c", c.p_c), ("P_r", c.p_r), ("P_d", c.p_d)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("{name} = {v} is not a probability")));
        }
    }
    let (u, o) = (p.underflow_weight(), p.overflow_weight());
    Ok((u * c.p_c + (1.0 - u) * c.p_s, o * c.p_d + (1.0 - o) * c.p_r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConstraint {
    pub t_max: f64,
    pub tau_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    /// τ*_min > ½.
    ThroughputAboveHalf,
    /// T*_max < 1.
    DelayBelowOne,
    /// τ*_min(1 + T*_max) < 1.
    DelayThroughputProduct,
    /// T*_max below the MDMT minimum 1 + 2√(2x*).
    DelayBelowMdmtMinimum,
    /// ξ_min exceeds the throughput-limited ξ_maxτ.
    ThroughputRangeEmpty,
}

impl Violation {
    pub fn describe(&self) -> &'static str {
        match self {
            Violation::ThroughputAboveHalf => "minimum throughput exceeds 1/2",
            Violation::DelayBelowOne => "maximum delay below one slot",
            Violation::DelayThroughputProduct => "tau_min * (1 + t_max) < 1",
            Violation::DelayBelowMdmtMinimum => "maximum delay below the MDMT minimum 1 + 2 sqrt(2 x*)",
            Violation::ThroughputRangeEmpty => "delay-feasible xi range lies above the throughput limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    Infeasible { violated: Violation },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

/// τ*_min(1+T*_max) ≥ 1, τ*_min ≤ ½, T*_max ≥ 1.
///
/// This is the condition for meeting T*_max while running at throughput exactly
/// τ*_min. Chains with higher throughput can meet tighter delay caps.
pub fn feasibility(c: &SchemeConstraint) -> Feasibility {
    let violated = if !(c.tau_min <= 0.5) {
        Some(Violation::ThroughputAboveHalf)
    } else if !(c.t_max >= 1.0) {
        Some(Violation::DelayBelowOne)
    } else if !(c.tau_min * (1.0 + c.t_max) >= 1.0) {
        Some(Violation::DelayThroughputProduct)
    } else {
        None
    };
    match violated {
        None => Feasibility::Feasible,
        Some(v) => Feasibility::Infeasible { violated: v },
    }
}

/// Infinite-buffer delay with ξ_c = ξx*: 1 + 2/(ξ−1) + x*(ξ−1).
pub fn mdmt_delay(x_star: f64, xi: f64) -> f64 {
    1.0 + 2.0 / (xi - 1.0) + x_star * (xi - 1.0)
}

/// Throughput along the MDMT family: 1/(2 + x*(ξ−1)).
pub fn mdmt_throughput(x_star: f64, xi: f64) -> f64 {
    1.0 / (2.0 + x_star * (xi - 1.0))
}

/// (T_min, ξ*) = (1 + 2√(2x*), 1 + √(2/x*)).
pub fn mdmt_min_delay(x_star: f64) -> Result<(f64, f64)> {
    if !(x_star > 0.0 && x_star.is_finite()) {
        return Err(Error::domain(format!("x* = {x_star} must be positive")));
    }
    Ok((1.0 + 2.0 * (2.0 * x_star).sqrt(), 1.0 + (2.0 / x_star).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum XiRange {
    Interval { lo: f64, hi: f64 },
    Infeasible { violated: Violation },
}

/// ξ values on the MDMT family meeting both constraints: [ξ_min, min(ξ_max, ξ_maxτ)].
pub fn mdmt_xi_range(x_star: f64, c: &SchemeConstraint) -> Result<XiRange> {
    mdmt_min_delay(x_star)?;
    if let Feasibility::Infeasible { violated } = feasibility(c) {
        return Ok(XiRange::Infeasible { violated });
    }
    let tm1 = c.t_max - 1.0;
    let mut disc = tm1 * tm1 - 8.0 * x_star;
    if disc < 0.0 {
        if disc > -1e-12 * tm1 * tm1 {
            disc = 0.0;
        } else {
            return Ok(XiRange::Infeasible { violated: Violation::DelayBelowMdmtMinimum });
        }
    }
    let root = disc.sqrt();
    let lo = 1.0 + (tm1 - root) / (2.0 * x_star);
    let hi_delay = 1.0 + (tm1 + root) / (2.0 * x_star);
    let hi_tau = 1.0 + (1.0 / c.tau_min - 2.0) / x_star;
    let hi = hi_delay.min(hi_tau);
    if lo > hi {
        return Ok(XiRange::Infeasible { violated: Violation::ThroughputRangeEmpty });
    }
    Ok(XiRange::Interval { lo, hi })
}

/// ξ_c giving infinite-buffer throughput exactly τ*: (1/(1−ξ⁻¹))(1−2τ*)/τ*.
pub fn ct_xi_c(tau_star: f64, xi: f64) -> Result<f64> {
    if !(tau_star > 0.0 && tau_star <= 0.5) {
        return Err(Error::domain(format!("target throughput {tau_star} outside (0, 1/2]")));
    }
    if !(xi > 1.0 && xi.is_finite()) {
        return Err(Error::domain(format!("ξ = {xi} must exceed 1")));
    }
    Ok((1.0 - 2.0 * tau_star) / tau_star / (1.0 - 1.0 / xi))
}

/// Smallest ξ for which the CT scheme meets T*_max: 1 + 2τ*/(τ*(1+T*_max) − 1).
/// `None` when no ξ works.
pub fn ct_min_xi(tau_star: f64, t_max: f64) -> Option<f64> {
    let margin = tau_star * (1.0 + t_max) - 1.0;
    (tau_star > 0.0 && tau_star <= 0.5 && margin > 0.0).then(|| 1.0 + 2.0 * tau_star / margin)
}

/// Whether the CT scheme at this ξ meets the delay cap.
pub fn ct_meets_delay(tau_star: f64, t_max: f64, xi: f64) -> bool {
    ct_min_xi(tau_star, t_max).is_some_and(|m| xi >= m)
}

/// ξ_c = (1 + ξ⁻¹ − ε)⁻¹.
pub fn epsilon_xi_c(epsilon: f64, xi: f64) -> Result<f64> {
    if !(epsilon >= 0.0) || !(xi > 1.0) {
        return Err(Error::domain(format!("need ε ≥ 0 and ξ > 1, got ε = {epsilon}, ξ = {xi}")));
    }
    let den = 1.0 + 1.0 / xi - epsilon;
    if !(den > 0.0) {
        return Err(Error::domain(format!("1 + 1/ξ − ε = {den} must be positive")));
    }
    Ok(1.0 / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSerAsym {
    /// Mixed asymptote with ρ = ξ⁻¹μ_r/μ_s, ρ_c = ξ_c⁻¹μ_r/μ_s and exact q_s, q_c at those ρ.
    pub mixed_approx: f64,
    /// Mixed asymptote with ρ, ρ_c inverted exactly from q_s = 1/(1+ξ), q_c = 1/(1+ξ_c).
    pub mixed_exact: f64,
    /// (3φ/4η²)(1/μ_s²)[2 − (1−ξ⁻¹)ε] with ε = 1 + ξ⁻¹ − ξ_c⁻¹.
    pub simplified: f64,
}

/// High-SNR S−R SER of the infinite-buffer chain for interference-limited hops.
pub fn ser_asym_threshold_pip(pair: &HopPair, xi: f64, xi_c: f64, m: &ModulationParams) -> Result<ThresholdSerAsym> {
    m.validate()?;
    if !(xi >= 1.0 && xi.is_finite()) || !(xi_c > 0.0 && xi_c.is_finite()) {
        return Err(Error::domain(format!("need ξ ≥ 1 and ξ_c > 0, got ({xi}, {xi_c})")));
    }
    let pip = pair.forced(RegimeOverride::Pip)?;
    let (mus, mur) = (pip.s.mu, pip.r.mu);
    let k = 3.0 * m.phi / (4.0 * m.eta * m.eta) / (mus * mur);
    let w = 1.0 / xi;
    let mix = |ratio_s: f64, ratio_c: f64| k * (w * ratio_s + (1.0 - w) * ratio_c);

    let (rho, rho_c) = (w * mur / mus, mur / (xi_c * mus));
    let mixed_approx = mix(rho / lsp(&pip, rho)?.0, rho_c / lsp(&pip, rho_c)?.0);

    let (q_s, q_c) = (1.0 / (1.0 + xi), 1.0 / (1.0 + xi_c));
    let mixed_exact = mix(rho_for_lsp(&pip, q_s)? / q_s, rho_for_lsp(&pip, q_c)? / q_c);

    let eps = 1.0 + w - 1.0 / xi_c;
    let simplified = 3.0 * m.phi / (4.0 * m.eta * m.eta) / (mus * mus) * (2.0 - (1.0 - w) * eps);
    Ok(ThresholdSerAsym { mixed_approx, mixed_exact, simplified })
}
