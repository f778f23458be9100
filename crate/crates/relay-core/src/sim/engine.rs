use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::stats::{ratio, Estimate, Tally};
use super::{DelayEstimates, Discipline, LspEstimates, RateMode, SchemeConfig, SerEstimates, SimOutcome};
use crate::analytic::{HopPair, ModulationParams};
use crate::channel::{RegimeOverride, SnrSampler};

/// Arrival stamp of packets present at the start of a run; their delays are not recorded.
const PRELOADED: u64 = u64::MAX;

fn capacity_bits(gamma: f64) -> f64 {
    gamma.ln_1p() / std::f64::consts::LN_2
}

fn batch_of(t: u64, slots: u64, k: usize) -> usize {
    ((u128::from(t) * k as u128) / u128::from(slots)) as usize
}

fn samplers(pair: &HopPair) -> (SnrSampler, SnrSampler) {
    (SnrSampler::for_link(&pair.s, RegimeOverride::Exact), SnrSampler::for_link(&pair.r, RegimeOverride::Exact))
}

/// Rao-Blackwellised error probability plus one Bernoulli draw.
fn record_error(m: &ModulationParams, gamma: f64, rng: &mut ChaCha8Rng, pe_sum: &mut f64, err_sum: &mut f64) {
    let pe = m.symbol_error(gamma);
    *pe_sum += pe;
    if rng.gen::<f64>() < pe {
        *err_sum += 1.0;
    }
}

fn ser_estimates(b: &[Tally]) -> SerEstimates {
    SerEstimates {
        p_s: ratio(b, |t| t.pe_s, |t| t.s_tx),
        p_r: ratio(b, |t| t.pe_r, |t| t.r_tx),
        p_s_counted: ratio(b, |t| t.err_s, |t| t.s_tx),
        p_r_counted: ratio(b, |t| t.err_r, |t| t.r_tx),
    }
}

/// Buffered adaptive-link-selection loop. `grid` asks for Pr{B > g} tail estimates.
pub(super) fn run_cabr(
    cfg: &SchemeConfig,
    pair: &HopPair,
    rng: &mut ChaCha8Rng,
    grid: &[f64],
) -> (SimOutcome, Vec<Estimate>) {
    let thr = cfg.thresholds.expect("validated config carries thresholds");
    let (ss, sr) = samplers(pair);
    let m = cfg.modulation;
    let fixed = cfg.rate_mode == RateMode::Fixed;
    let lifo = cfg.buffer.discipline == Discipline::Lifo;
    let cap = cfg.buffer.capacity.limit();
    let warm = cfg.warmup_slots();
    let k = cfg.batches as usize;

    // Tracked queue: packets/bits (FIFO) or holes (LIFO).
    let mut q = cfg.buffer.occupancy;
    let mut stamps: VecDeque<u64> = VecDeque::new();
    if fixed {
        stamps.extend(std::iter::repeat(PRELOADED).take(q as usize));
    }
    let mut batches = vec![Tally::default(); k];
    let mut tails = vec![vec![0.0_f64; grid.len() + 1]; if grid.is_empty() { 0 } else { k }];
    let (mut total_in, mut total_out) = (0.0, 0.0);

    for t in 0..warm + cfg.slots {
        let gs = ss.sample(rng);
        let gr = sr.sample(rng);
        let (b_empty, b_full) = if lifo { (q >= cap, q <= 0.0) } else { (q <= 0.0, q >= cap) };
        let rho = if b_empty {
            thr.rho_c
        } else if b_full {
            thr.rho_d
        } else {
            thr.rho
        };
        let pick_s = rho == f64::INFINITY || gr <= rho * gs;
        let (c_s, c_r) = if fixed { (1.0, 1.0) } else { (capacity_bits(gs), capacity_bits(gr)) };
        let arrival = pick_s != lifo;
        let offered = if pick_s { c_s } else { c_r };

        let mut moved = 0.0;
        let (mut silent_under, mut silent_over) = (false, false);
        if arrival {
            if q >= cap {
                silent_over = true;
            } else {
                let room = cap - q;
                if offered >= room {
                    moved = room;
                    q = cap;
                } else {
                    moved = offered;
                    q += offered;
                }
                if fixed {
                    stamps.push_back(t);
                }
            }
        } else if q <= 0.0 {
            silent_under = true;
        } else {
            if offered >= q {
                moved = q;
                q = 0.0;
            } else {
                moved = offered;
                q -= offered;
            }
            if fixed {
                let arr = stamps.pop_front().expect("packet count matches stamps");
                if arr != PRELOADED && arr >= warm {
                    let b = &mut batches[batch_of(t - warm, cfg.slots, k)];
                    b.delay_sum += (t - arr) as f64;
                    b.delay_n += 1.0;
                }
            }
        }
        debug_assert!((0.0..=cap).contains(&q), "buffer level {q} outside [0, {cap}]");
        let transmitted = !(silent_under || silent_over);
        if transmitted {
            if pick_s {
                total_in += moved;
            } else {
                total_out += moved;
            }
        }
        if t < warm {
            continue;
        }

        let bi = batch_of(t - warm, cfg.slots, k);
        let b = &mut batches[bi];
        b.slots += 1.0;
        if b_empty {
            b.empty += 1.0;
            b.empty_s += f64::from(u8::from(pick_s));
        } else if b_full {
            b.full += 1.0;
            b.full_r += f64::from(u8::from(!pick_s));
        } else {
            b.interior += 1.0;
            b.interior_s += f64::from(u8::from(pick_s));
        }
        if pick_s {
            b.offered_s += c_s;
        } else {
            b.offered_r += c_r;
        }
        if arrival {
            b.arrivals += moved;
        } else {
            b.delivered += moved;
        }
        b.occupancy += q;
        b.underflow += f64::from(u8::from(silent_under));
        b.overflow += f64::from(u8::from(silent_over));
        if fixed && transmitted {
            if pick_s {
                b.s_tx += 1.0;
                record_error(&m, gs, rng, &mut b.pe_s, &mut b.err_s);
            } else {
                b.r_tx += 1.0;
                record_error(&m, gr, rng, &mut b.pe_r, &mut b.err_r);
            }
        }
        if !grid.is_empty() {
            let level = if lifo { cap - q } else { q };
            let idx = grid.partition_point(|g| *g < level);
            tails[bi][0] += 1.0;
            tails[bi][idx] -= 1.0;
        }
    }

    let tail_estimates = if grid.is_empty() {
        Vec::new()
    } else {
        let prefix: Vec<Vec<f64>> = tails
            .iter()
            .map(|d| {
                d.iter()
                    .scan(0.0, |acc, x| {
                        *acc += x;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        let idx: Vec<usize> = (0..k).collect();
        (0..grid.len())
            .map(|j| ratio(&idx, |&b| prefix[b][j], |&b| batches[b].slots).unwrap_or(Estimate::exact(0.0)))
            .collect()
    };

    let b = &batches;
    let per_slot = |f: fn(&Tally) -> f64| ratio(b, f, |t| t.slots).expect("at least one measured slot");
    let underflow: f64 = b.iter().map(|t| t.underflow).sum();
    let overflow: f64 = b.iter().map(|t| t.overflow).sum();
    // Physical silent slots: relay chosen at an empty buffer, source chosen at a full one.
    let (underflow_count, overflow_count) = if lifo { (overflow, underflow) } else { (underflow, overflow) };
    let occ = per_slot(|t| t.occupancy);
    let mean_occupancy = if lifo { Estimate { value: cap - occ.value, std_err: occ.std_err } } else { occ };
    let delivered = per_slot(|t| t.delivered);
    let delay = DelayEstimates {
        t_q: if fixed { ratio(b, |t| t.delay_sum, |t| t.delay_n) } else { None },
        t_q_little: ratio(b, |t| t.occupancy, |t| t.arrivals),
        t_u: if fixed { ratio(b, |t| t.underflow, |t| t.arrivals) } else { None },
        t_o: if fixed { ratio(b, |t| t.overflow, |t| t.arrivals) } else { None },
        t_total: if fixed { ratio(b, |t| t.occupancy + t.underflow + t.overflow, |t| t.arrivals) } else { None },
    };
    let outcome = SimOutcome {
        scheme: cfg.scheme,
        rate_mode: cfg.rate_mode,
        discipline: cfg.buffer.discipline,
        slots_run: warm + cfg.slots,
        avg_rate: if fixed { delivered.scaled(m.rate) } else { delivered },
        throughput: fixed.then_some(delivered),
        offered_rate_s: (!fixed).then(|| per_slot(|t| t.offered_s)),
        offered_rate_r: (!fixed).then(|| per_slot(|t| t.offered_r)),
        lsp: LspEstimates {
            q_s: ratio(b, |t| t.interior_s, |t| t.interior),
            q_c: ratio(b, |t| t.empty_s, |t| t.empty),
            q_d: ratio(b, |t| t.full_r, |t| t.full),
        },
        ser: fixed.then(|| ser_estimates(b)),
        delay: Some(delay),
        mean_occupancy: Some(mean_occupancy),
        underflow_count: underflow_count as u64,
        overflow_count: overflow_count as u64,
        total_in,
        total_out,
        final_occupancy: if lifo { cap - q } else { q },
    };
    (outcome, tail_estimates)
}

/// Alternating schedule: S in even slots, R in odd slots, no buffering beyond one packet.
pub(super) fn run_cnbr(cfg: &SchemeConfig, pair: &HopPair, rng: &mut ChaCha8Rng) -> SimOutcome {
    let (ss, sr) = samplers(pair);
    let m = cfg.modulation;
    let fixed = cfg.rate_mode == RateMode::Fixed;
    let frames = cfg.slots / 2;
    let k = (cfg.batches as usize).min(frames as usize).max(1);
    let mut batches = vec![Tally::default(); k];
    let mut total = 0.0;
    for f in 0..frames {
        let gs = ss.sample(rng);
        let gr = sr.sample(rng);
        let b = &mut batches[batch_of(f, frames, k)];
        b.slots += 2.0;
        let moved = if fixed { 1.0 } else { capacity_bits(gs).min(capacity_bits(gr)) };
        b.delivered += moved;
        total += moved;
        if fixed {
            b.s_tx += 1.0;
            b.r_tx += 1.0;
            record_error(&m, gs, rng, &mut b.pe_s, &mut b.err_s);
            record_error(&m, gr, rng, &mut b.pe_r, &mut b.err_r);
        }
    }
    unbuffered_outcome(cfg, &batches, 2 * frames, total, 1.0)
}

/// Block schedule: S for the first half of the run, R for the second half.
pub(super) fn run_cbr(cfg: &SchemeConfig, pair: &HopPair, rng: &mut ChaCha8Rng) -> SimOutcome {
    let (ss, sr) = samplers(pair);
    let m = cfg.modulation;
    let fixed = cfg.rate_mode == RateMode::Fixed;
    let half = cfg.slots / 2;
    let k = (cfg.batches as usize).min(half as usize).max(1);
    let mut hop_s = vec![Tally::default(); k];
    let mut hop_r = vec![Tally::default(); k];
    for t in 0..half {
        let gs = ss.sample(rng);
        let b = &mut hop_s[batch_of(t, half, k)];
        b.slots += 2.0;
        if fixed {
            b.delivered += 1.0;
            b.s_tx += 1.0;
            record_error(&m, gs, rng, &mut b.pe_s, &mut b.err_s);
        } else {
            b.delivered += capacity_bits(gs);
        }
    }
    for t in 0..half {
        let gr = sr.sample(rng);
        let b = &mut hop_r[batch_of(t, half, k)];
        b.slots += 2.0;
        if fixed {
            b.delivered += 1.0;
            b.r_tx += 1.0;
            record_error(&m, gr, rng, &mut b.pe_r, &mut b.err_r);
        } else {
            b.delivered += capacity_bits(gr);
        }
    }
    let sum = |v: &[Tally]| v.iter().map(|t| t.delivered).sum::<f64>();
    let (in_s, in_r) = (sum(&hop_s), sum(&hop_r));
    let limiting = if in_s <= in_r { &hop_s } else { &hop_r };
    let mut batches: Vec<Tally> = limiting.clone();
    for (b, (s, r)) in batches.iter_mut().zip(hop_s.iter().zip(&hop_r)) {
        b.s_tx = s.s_tx;
        b.pe_s = s.pe_s;
        b.err_s = s.err_s;
        b.r_tx = r.r_tx;
        b.pe_r = r.pe_r;
        b.err_r = r.err_r;
    }
    let mut out = unbuffered_outcome(cfg, &batches, 2 * half, in_s.min(in_r), half as f64);
    out.total_in = in_s;
    out.final_occupancy = in_s - in_s.min(in_r);
    out
}

fn unbuffered_outcome(cfg: &SchemeConfig, b: &[Tally], slots_run: u64, total: f64, sojourn: f64) -> SimOutcome {
    let fixed = cfg.rate_mode == RateMode::Fixed;
    let delivered = ratio(b, |t| t.delivered, |t| t.slots).expect("at least one frame");
    let zero = Estimate::exact(0.0);
    SimOutcome {
        scheme: cfg.scheme,
        rate_mode: cfg.rate_mode,
        discipline: Discipline::Fifo,
        slots_run,
        avg_rate: if fixed { delivered.scaled(cfg.modulation.rate) } else { delivered },
        throughput: fixed.then_some(delivered),
        offered_rate_s: None,
        offered_rate_r: None,
        lsp: LspEstimates::default(),
        ser: fixed.then(|| ser_estimates(b)),
        delay: fixed.then_some(DelayEstimates {
            t_q: Some(Estimate::exact(sojourn)),
            t_q_little: Some(Estimate::exact(sojourn)),
            t_u: Some(zero),
            t_o: Some(zero),
            t_total: Some(Estimate::exact(sojourn)),
        }),
        mean_occupancy: None,
        underflow_count: 0,
        overflow_count: 0,
        total_in: total,
        total_out: total,
        final_occupancy: 0.0,
    }
}
