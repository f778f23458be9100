//! Slot-level Monte Carlo of the relaying schemes.
//!
//! A LIFO buffer is simulated through its hole process: relay transmissions
//! create holes, source transmissions fill the oldest hole. The tracked queue is
//! therefore packets (bits) for FIFO and holes for LIFO, and a LIFO run with the
//! reversed pair and thresholds is the same chain as the FIFO run.

mod engine;
mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{reverse, HopPair, ModulationParams, SelectionThresholds};
use crate::error::{Error, Result};

pub use stats::{difference, sum, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Cabr,
    Cnbr,
    Cbr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discipline {
    #[default]
    Fifo,
    Lifo,
}

/// Buffer size: bits (adaptive rate) or packets (fixed rate).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capacity {
    #[default]
    Infinite,
    Bits(f64),
    Packets(u64),
}

impl Capacity {
    fn limit(&self) -> f64 {
        match *self {
            Capacity::Infinite => f64::INFINITY,
            Capacity::Bits(b) => b,
            Capacity::Packets(p) => p as f64,
        }
    }
}

/// Buffer template. `occupancy` is the starting level of the tracked queue
/// (packets or bits for FIFO, holes for LIFO).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BufferState {
    #[serde(default)]
    pub discipline: Discipline,
    #[serde(default)]
    pub capacity: Capacity,
    #[serde(default)]
    pub occupancy: f64,
}

fn default_batches() -> u32 {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub rate_mode: RateMode,
    #[serde(default)]
    pub thresholds: Option<SelectionThresholds>,
    #[serde(default)]
    pub modulation: ModulationParams,
    #[serde(default)]
    pub buffer: BufferState,
    pub slots: u64,
    pub seed: u64,
    /// Slots run before measuring. Defaults to slots/20 for the adaptive scheme.
    #[serde(default)]
    pub warmup: Option<u64>,
    #[serde(default = "default_batches")]
    pub batches: u32,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, rate_mode: RateMode, slots: u64, seed: u64) -> Self {
        Self {
            scheme,
            rate_mode,
            thresholds: None,
            modulation: ModulationParams::default(),
            buffer: BufferState::default(),
            slots,
            seed,
            warmup: None,
            batches: default_batches(),
        }
    }

    pub fn with_thresholds(mut self, thr: SelectionThresholds) -> Self {
        self.thresholds = Some(thr);
        self
    }

    pub fn with_buffer(mut self, discipline: Discipline, capacity: Capacity) -> Self {
        self.buffer = BufferState { discipline, capacity, occupancy: 0.0 };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots < 2 {
            return Err(Error::config("slots must be at least 2"));
        }
        if self.batches < 2 || u64::from(self.batches) > self.slots {
            return Err(Error::config(format!("batches = {} must lie in [2, slots]", self.batches)));
        }
        self.modulation.validate().map_err(|e| Error::config(e.to_string()))?;
        if self.scheme != Scheme::Cabr {
            return Ok(());
        }
        let thr = self.thresholds.ok_or_else(|| Error::config("the adaptive scheme needs thresholds"))?;
        thr.validate().map_err(|e| Error::config(e.to_string()))?;
        match (self.rate_mode, self.buffer.capacity) {
            (_, Capacity::Infinite) => {}
            (RateMode::Adaptive, Capacity::Bits(b)) if b > 0.0 && b.is_finite() => {}
            (RateMode::Fixed, Capacity::Packets(p)) if p >= 1 => {}
            (mode, cap) => return Err(Error::config(format!("capacity {cap:?} does not fit {mode:?} rate mode"))),
        }
        if self.buffer.discipline == Discipline::Lifo && self.buffer.capacity == Capacity::Infinite {
            return Err(Error::config("a LIFO buffer needs a finite capacity"));
        }
        let occ = self.buffer.occupancy;
        if !(occ >= 0.0 && occ <= self.buffer.capacity.limit() && occ.is_finite()) {
            return Err(Error::config(format!("initial occupancy {occ} outside [0, capacity]")));
        }
        if self.rate_mode == RateMode::Fixed && occ.fract() != 0.0 {
            return Err(Error::config("fixed-rate occupancy counts whole packets"));
        }
        Ok(())
    }

    fn warmup_slots(&self) -> u64 {
        match self.scheme {
            Scheme::Cabr => self.warmup.unwrap_or(self.slots / 20),
            _ => 0,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LspEstimates {
    /// Source selected in interior states.
    pub q_s: Option<Estimate>,
    /// Source selected when the buffer is empty.
    pub q_c: Option<Estimate>,
    /// Relay selected when the buffer is full.
    pub q_d: Option<Estimate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerEstimates {
    /// Mean symbol-error probability over source transmissions.
    pub p_s: Option<Estimate>,
    pub p_r: Option<Estimate>,
    /// Fractions of transmissions with a drawn symbol error.
    pub p_s_counted: Option<Estimate>,
    pub p_r_counted: Option<Estimate>,
}

impl SerEstimates {
    pub fn sum(&self) -> Option<Estimate> {
        Some(sum(self.p_s.as_ref()?, self.p_r.as_ref()?))
    }
}

/// Empirical delays in slots, all normalised by the arrival count of the tracked queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayEstimates {
    /// Mean per-item sojourn (departure slot − arrival slot).
    pub t_q: Option<Estimate>,
    /// Mean occupancy over arrival rate.
    pub t_q_little: Option<Estimate>,
    /// Silent slots with the relay chosen at an empty buffer, per arrival.
    pub t_u: Option<Estimate>,
    /// Silent slots with the source chosen at a full buffer, per arrival.
    pub t_o: Option<Estimate>,
    /// (occupancy + silent slots)/arrivals.
    pub t_total: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub scheme: Scheme,
    pub rate_mode: RateMode,
    pub discipline: Discipline,
    pub slots_run: u64,
    /// Delivered bits per channel use (fixed rate: packets per slot × R).
    pub avg_rate: Estimate,
    /// Packets per slot through the relay (fixed rate).
    pub throughput: Option<Estimate>,
    /// Per-slot means of (1−d)C_s and dC_r regardless of buffer state (adaptive).
    pub offered_rate_s: Option<Estimate>,
    pub offered_rate_r: Option<Estimate>,
    pub lsp: LspEstimates,
    pub ser: Option<SerEstimates>,
    pub delay: Option<DelayEstimates>,
    pub mean_occupancy: Option<Estimate>,
    pub underflow_count: u64,
    pub overflow_count: u64,
    /// Bits (or packets) into and out of the relay over the whole run, and the final level.
    pub total_in: f64,
    pub total_out: f64,
    pub final_occupancy: f64,
}

/// Runs one configuration. Identical inputs give identical outcomes.
pub fn run(config: &SchemeConfig, pair: &HopPair) -> Result<SimOutcome> {
    config.validate()?;
    let mut rng = config.rng();
    Ok(match config.scheme {
        Scheme::Cabr => engine::run_cabr(config, pair, &mut rng, &[]).0,
        Scheme::Cnbr => engine::run_cnbr(config, pair, &mut rng),
        Scheme::Cbr => engine::run_cbr(config, pair, &mut rng),
    })
}

/// Runs independent jobs on the rayon pool; results keep the input order.
pub fn run_many(jobs: &[(SchemeConfig, HopPair)]) -> Vec<Result<SimOutcome>> {
    jobs.par_iter().map(|(c, p)| run(c, p)).collect()
}

/// Pr{B(n) > L} per grid value, from the occupancy of an infinite FIFO run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverflowCurve {
    pub buffer_sizes: Vec<f64>,
    pub probability: Vec<Estimate>,
    pub outcome: SimOutcome,
}

pub fn overflow_probability(config: &SchemeConfig, pair: &HopPair, grid: &[f64]) -> Result<OverflowCurve> {
    if config.scheme != Scheme::Cabr || config.rate_mode != RateMode::Adaptive {
        return Err(Error::config("overflow curves need the adaptive-rate buffered scheme"));
    }
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) || grid[0] < 0.0 {
        return Err(Error::config("buffer-size grid must be non-empty, non-negative and increasing"));
    }
    let mut cfg = *config;
    cfg.buffer = BufferState { discipline: Discipline::Fifo, capacity: Capacity::Infinite, occupancy: config.buffer.occupancy };
    cfg.validate()?;
    let mut rng = cfg.rng();
    let (outcome, probability) = engine::run_cabr(&cfg, pair, &mut rng, grid);
    Ok(OverflowCurve { buffer_sizes: grid.to_vec(), probability, outcome })
}

/// FIFO on `pair` against LIFO on the reversed pair with reversed thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub fifo: SimOutcome,
    pub lifo: SimOutcome,
    pub rate_diff: Estimate,
    pub sum_ser_diff: Option<Estimate>,
    pub delay_diff: Option<Estimate>,
    /// FIFO underflow count minus LIFO overflow count.
    pub silent_count_diff: i64,
}

impl DualityReport {
    /// Every reported difference within `sigmas` standard errors of zero.
    pub fn consistent(&self, sigmas: f64) -> bool {
        [Some(self.rate_diff), self.sum_ser_diff, self.delay_diff].iter().flatten().all(|d| d.within(0.0, sigmas))
    }
}

pub fn run_lifo_duality_check(config: &SchemeConfig, pair: &HopPair) -> Result<DualityReport> {
    if config.scheme != Scheme::Cabr {
        return Err(Error::config("the duality check applies to the buffered scheme"));
    }
    let thr = config.thresholds.ok_or_else(|| Error::config("the adaptive scheme needs thresholds"))?;
    let mut fifo_cfg = *config;
    fifo_cfg.buffer.discipline = Discipline::Fifo;
    let (rev_pair, rev_thr) = reverse(pair, &thr);
    let mut lifo_cfg = fifo_cfg.with_thresholds(rev_thr);
    lifo_cfg.buffer.discipline = Discipline::Lifo;
    let (fifo, lifo) = rayon::join(|| run(&fifo_cfg, pair), || run(&lifo_cfg, &rev_pair));
    let (fifo, lifo) = (fifo?, lifo?);
    let rate_diff = difference(&fifo.avg_rate, &lifo.avg_rate);
    let sum_ser_diff = match (fifo.ser.and_then(|s| s.sum()), lifo.ser.and_then(|s| s.sum())) {
        (Some(a), Some(b)) => Some(difference(&a, &b)),
        _ => None,
    };
    let delay_of = |o: &SimOutcome| -> Option<Estimate> {
        match o.rate_mode {
            RateMode::Fixed => o.delay?.t_total,
            RateMode::Adaptive => o.delay?.t_q_little,
        }
    };
    let delay_diff = match (delay_of(&fifo), delay_of(&lifo)) {
        (Some(a), Some(b)) => Some(difference(&a, &b)),
        _ => None,
    };
    let silent_count_diff = fifo.underflow_count as i64 - lifo.overflow_count as i64;
    Ok(DualityReport { fifo, lifo, rate_diff, sum_ser_diff, delay_diff, silent_count_diff })
}
