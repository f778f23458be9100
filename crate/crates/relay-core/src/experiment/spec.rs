//! Experiment documents (TOML) and parameter-axis handling.

use serde::{Deserialize, Serialize};

use crate::analytic::{HopPair, ModulationParams};
use crate::channel::{derive_link_params, FadingOverrides, LinkParams, NodeGeometry, PowerConstraints, RegimeOverride};
use crate::error::{Error, Result};
use crate::queueing::SchemeConstraint;
use crate::sim::Discipline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Simulate,
    Sweep,
    Compare,
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analyze" => Ok(Command::Analyze),
            "simulate" => Ok(Command::Simulate),
            "sweep" => Ok(Command::Sweep),
            "compare" => Ok(Command::Compare),
            other => Err(Error::config(format!("unknown command '{other}'"))),
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkStats {
    #[serde(with = "crate::serde_inf")]
    pub lambda: f64,
    pub mu: f64,
    /// Defaults to exp(−μ/λ).
    #[serde(default)]
    pub p: Option<f64>,
}

impl LinkStats {
    fn params(&self) -> Result<LinkParams> {
        LinkParams::new(self.lambda, self.mu, self.p.unwrap_or((-self.mu / self.lambda).exp()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPair {
    pub s: LinkStats,
    pub r: LinkStats,
}

/// Either a physical description (geometry + power) or direct per-hop statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default)]
    pub geometry: Option<NodeGeometry>,
    #[serde(default)]
    pub power: Option<PowerConstraints>,
    #[serde(default)]
    pub fading: FadingOverrides,
    #[serde(default)]
    pub links: Option<LinkPair>,
    #[serde(default)]
    pub regime: RegimeOverride,
}

impl SystemSpec {
    fn validate(&self) -> Result<()> {
        match (&self.geometry, &self.power, &self.links) {
            (Some(_), Some(_), None) | (None, None, Some(_)) => Ok(()),
            _ => Err(Error::config("[system] needs either geometry + power or links, not both")),
        }
    }

    pub fn pair(&self) -> Result<HopPair> {
        self.validate()?;
        let pair = match (&self.geometry, &self.power, &self.links) {
            (Some(g), Some(pc), None) => {
                let (s, r) = derive_link_params(g, pc, &self.fading).map_err(as_config)?;
                HopPair::new(s, r)
            }
            (_, _, Some(l)) => HopPair::new(l.s.params().map_err(as_config)?, l.r.params().map_err(as_config)?),
            _ => unreachable!("validated above"),
        };
        pair.forced(self.regime).map_err(as_config)
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    /// Interior threshold; the rate- or LSP-balancing value when absent.
    #[serde(default)]
    pub rho: Option<f64>,
    /// Force S at an empty buffer and R at a full one (q_c = q_d = 1).
    #[serde(default = "default_true")]
    pub forced_boundaries: bool,
    #[serde(default)]
    pub modulation: ModulationParams,
    #[serde(default)]
    pub discipline: Discipline,
    /// Mean-delay target (slots) for the adaptive scheme; picks ρ through the delay bound.
    #[serde(default)]
    pub delay_target: Option<f64>,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        Self {
            rho: None,
            forced_boundaries: true,
            modulation: ModulationParams::default(),
            discipline: Discipline::Fifo,
            delay_target: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// MDMT with ξ_c = x*ξ.
    Mdmt(f64),
    /// Constant throughput τ*.
    Ct(f64),
    /// ξ_c = (1 + ξ⁻¹ − ε)⁻¹.
    Epsilon(f64),
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Mdmt(_) => "mdmt",
            Family::Ct(_) => "ct",
            Family::Epsilon(_) => "epsilon",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            Family::Mdmt(v) | Family::Ct(v) | Family::Epsilon(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Study {
    /// Average rates of the three schemes and the balancing threshold.
    Rate {},
    /// Fixed-rate per-hop SERs, exact and asymptotic, with optional finite buffers.
    Ser {
        #[serde(default)]
        buffer_sizes: Vec<u64>,
    },
    /// Infinite-buffer threshold protocol along scheme families over ξ.
    Threshold {
        families: Vec<Family>,
        #[serde(default)]
        constraint: Option<SchemeConstraint>,
    },
    /// Pr{B > L} of a delay-constrained infinite buffer (simulation only).
    Overflow {},
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    DSr,
    DRd,
    DSp,
    DRp,
    /// Sets d_sp and d_rp together.
    #[serde(rename = "d_p")]
    DP,
    Alpha,
    GammaMaxDb,
    GammaPDb,
    OmegaHs,
    OmegaHr,
    MuS,
    MuR,
    LambdaS,
    LambdaR,
    Rho,
    DelayTarget,
    Xi,
    Buffer,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::DSr => "d_sr",
            Axis::DRd => "d_rd",
            Axis::DSp => "d_sp",
            Axis::DRp => "d_rp",
            Axis::DP => "d_p",
            Axis::Alpha => "alpha",
            Axis::GammaMaxDb => "gamma_max_db",
            Axis::GammaPDb => "gamma_p_db",
            Axis::OmegaHs => "omega_hs",
            Axis::OmegaHr => "omega_hr",
            Axis::MuS => "mu_s",
            Axis::MuR => "mu_r",
            Axis::LambdaS => "lambda_s",
            Axis::LambdaR => "lambda_r",
            Axis::Rho => "rho",
            Axis::DelayTarget => "delay_target",
            Axis::Xi => "xi",
            Axis::Buffer => "buffer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl RangeSpec {
    fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::config("range needs finite ends and at least one point"));
        }
        if self.log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::config("log range needs positive ends"));
        }
        let n = self.points;
        let (a, b) = if self.log { (self.start.ln(), self.stop.ln()) } else { (self.start, self.stop) };
        Ok((0..n)
            .map(|i| {
                let x = if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
                if self.log {
                    x.exp()
                } else {
                    x
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<RangeSpec>,
    /// Outer axes; the table holds their Cartesian product times the grid.
    #[serde(default)]
    pub series: Vec<SeriesSpec>,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let v = match (&self.values, &self.range) {
            (Some(v), None) => v.clone(),
            (None, Some(r)) => r.values()?,
            _ => return Err(Error::config("[sweep] needs exactly one of values or range")),
        };
        check_monotone(self.axis, &v)?;
        Ok(v)
    }
}

fn check_monotone(axis: Axis, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::config(format!("grid for {} is empty", axis.name())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::config(format!("grid for {} has non-finite values", axis.name())));
    }
    let up = v.windows(2).all(|w| w[0] < w[1]);
    let down = v.windows(2).all(|w| w[0] > w[1]);
    if !(up || down) {
        return Err(Error::config(format!("grid for {} must be strictly monotone", axis.name())));
    }
    Ok(())
}

fn default_slots() -> u64 {
    200_000
}

fn default_seed() -> u64 {
    1
}

fn default_batches() -> u32 {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default = "default_slots")]
    pub slots: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub warmup: Option<u64>,
    #[serde(default = "default_batches")]
    pub batches: u32,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self { slots: default_slots(), seed: default_seed(), warmup: None, batches: default_batches() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: Option<String>,
    /// Command the document is meant for; presets use it as their default.
    #[serde(default)]
    pub command: Option<Command>,
    pub system: SystemSpec,
    #[serde(default)]
    pub scheme: SchemeSpec,
    pub study: Study,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub sim: SimSpec,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if let Some(s) = &self.sweep {
            s.grid()?;
            self.check_axis(s.axis)?;
            for ser in &s.series {
                check_monotone(ser.axis, &ser.values)?;
                self.check_axis(ser.axis)?;
                if ser.axis == s.axis || s.series.iter().filter(|o| o.axis == ser.axis).count() > 1 {
                    return Err(Error::config(format!("axis {} is used twice", ser.axis.name())));
                }
            }
        }
        if let Study::Threshold { families, constraint } = &self.study {
            if families.is_empty() {
                return Err(Error::config("threshold study needs at least one family"));
            }
            if let Some(c) = constraint {
                if !(c.t_max > 0.0 && c.tau_min > 0.0) {
                    return Err(Error::config("constraint needs positive t_max and tau_min"));
                }
            }
        }
        if self.sim.slots < 2 || self.sim.batches < 2 {
            return Err(Error::config("[sim] needs slots ≥ 2 and batches ≥ 2"));
        }
        self.scheme.modulation.validate().map_err(as_config)?;
        if let Some(r) = self.scheme.rho {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config(format!("scheme.rho = {r} must be positive")));
            }
        }
        if let Some(d) = self.scheme.delay_target {
            if !(d > 0.0) {
                return Err(Error::config(format!("scheme.delay_target = {d} must be positive")));
            }
        }
        Ok(())
    }

    /// Axis must name a parameter the document declares and the study uses.
    fn check_axis(&self, axis: Axis) -> Result<()> {
        let geometric = self.system.geometry.is_some();
        let ok = match axis {
            Axis::DSr | Axis::DRd | Axis::DSp | Axis::DRp | Axis::DP | Axis::Alpha | Axis::GammaMaxDb | Axis::GammaPDb => geometric,
            Axis::OmegaHs | Axis::OmegaHr => geometric,
            Axis::MuS | Axis::MuR | Axis::LambdaS | Axis::LambdaR => !geometric,
            Axis::Rho => matches!(self.study, Study::Rate {} | Study::Ser { .. }),
            Axis::DelayTarget => matches!(self.study, Study::Rate {} | Study::Overflow {}),
            Axis::Xi => matches!(self.study, Study::Threshold { .. }),
            Axis::Buffer => matches!(self.study, Study::Overflow {}),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("axis {} does not apply to this document", axis.name())))
        }
    }

    /// Copy with one axis set to `v`. `Xi` and `Buffer` are read by the studies, not stored.
    pub fn with_axis(&self, axis: Axis, v: f64) -> Result<Self> {
        let mut s = self.clone();
        let geo = s.system.geometry.as_mut();
        let pow = s.system.power.as_mut();
        let links = s.system.links.as_mut();
        let missing = || Error::config(format!("axis {} does not apply to this document", axis.name()));
        match axis {
            Axis::DSr => geo.ok_or_else(missing)?.d_sr = v,
            Axis::DRd => geo.ok_or_else(missing)?.d_rd = v,
            Axis::DSp => geo.ok_or_else(missing)?.d_sp = v,
            Axis::DRp => geo.ok_or_else(missing)?.d_rp = v,
            Axis::DP => {
                let g = geo.ok_or_else(missing)?;
                g.d_sp = v;
                g.d_rp = v;
            }
            Axis::Alpha => geo.ok_or_else(missing)?.alpha = v,
            Axis::GammaMaxDb => pow.ok_or_else(missing)?.gamma_max_db = v,
            Axis::GammaPDb => pow.ok_or_else(missing)?.gamma_p_db = v,
            Axis::OmegaHs => s.system.fading.omega_hs = Some(v),
            Axis::OmegaHr => s.system.fading.omega_hr = Some(v),
            Axis::MuS => links.ok_or_else(missing)?.s.mu = v,
            Axis::MuR => links.ok_or_else(missing)?.r.mu = v,
            Axis::LambdaS => links.ok_or_else(missing)?.s.lambda = v,
            Axis::LambdaR => links.ok_or_else(missing)?.r.lambda = v,
            Axis::Rho => s.scheme.rho = Some(v),
            Axis::DelayTarget => s.scheme.delay_target = Some(v),
            Axis::Xi | Axis::Buffer => {}
        }
        Ok(s)
    }
}
