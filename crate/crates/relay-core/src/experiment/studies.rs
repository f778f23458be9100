//! Row builders for each study: closed-form columns, simulated columns and ratios.

use crate::analytic::{
    avg_rate_cabr, avg_rate_cabr_hop_r, avg_rate_cabr_hop_s, avg_rate_cbr, avg_rate_cnbr, delay_bound_adaptive, lsp,
    rho_for_delay_bound, rho_opt_fixed, ser_asym_cabr, ser_asym_cnbr, ser_exact_cabr, ser_exact_cnbr, HopPair,
    SelectionThresholds,
};
use crate::error::{Error, Result};
use crate::queueing::{
    component_sers, delays, epsilon_xi_c, feasibility, params_from_thresholds, ser_asym_threshold_pip, ser_threshold,
    thresholds_for_params, throughput, BufferSize, Feasibility, ThresholdProtocolParams,
};
use crate::sim::{self, Capacity, Estimate, RateMode, Scheme, SchemeConfig};

use super::spec::{ExperimentSpec, Family};
use super::table::{Cell, Record};

fn push(r: &mut Record, k: impl Into<String>, v: impl Into<Cell>) {
    r.push((k.into(), v.into()));
}

fn push_est(r: &mut Record, k: &str, e: Option<Estimate>) {
    push(r, k, e.map(|e| e.value));
    push(r, format!("{k}_se"), e.map(|e| e.std_err));
}

fn sim_config(spec: &ExperimentSpec, scheme: Scheme, mode: RateMode, seed: u64) -> SchemeConfig {
    let mut c = SchemeConfig::new(scheme, mode, spec.sim.slots, seed);
    c.modulation = spec.scheme.modulation;
    c.warmup = spec.sim.warmup;
    c.batches = spec.sim.batches;
    c
}

fn thresholds(spec: &ExperimentSpec, rho: f64) -> SelectionThresholds {
    if spec.scheme.forced_boundaries {
        SelectionThresholds { rho, rho_c: f64::INFINITY, rho_d: 0.0 }
    } else {
        SelectionThresholds::uniform(rho)
    }
}

/// Rate study: ρ in use is the explicit one, the delay-constrained one, or ρ_opt.
pub(super) struct RatePoint {
    pub rho_opt: f64,
    pub rho: f64,
    pub rate_cabr_opt: f64,
    pub rate_cabr: f64,
    pub rate_cnbr: f64,
    pub rate_cbr: f64,
    pub delay_bound: Option<f64>,
}

pub(super) fn rate_point(spec: &ExperimentSpec, pair: &HopPair) -> Result<RatePoint> {
    let opt = avg_rate_cabr(pair)?;
    let rho = match (spec.scheme.rho, spec.scheme.delay_target) {
        (Some(r), _) => r,
        (None, Some(t)) => rho_for_delay_bound(pair, t)?,
        (None, None) => opt.rho_opt,
    };
    let rate_cabr = if rho == opt.rho_opt {
        opt.rate
    } else {
        avg_rate_cabr_hop_s(pair, rho)?.min(avg_rate_cabr_hop_r(pair, rho)?)
    };
    let delay_bound = if rho < opt.rho_opt { Some(delay_bound_adaptive(pair, rho)?) } else { None };
    Ok(RatePoint {
        rho_opt: opt.rho_opt,
        rho,
        rate_cabr_opt: opt.rate,
        rate_cabr,
        rate_cnbr: avg_rate_cnbr(pair)?,
        rate_cbr: avg_rate_cbr(pair)?,
        delay_bound,
    })
}

pub(super) fn rate_rows(spec: &ExperimentSpec, pair: &HopPair, simulate: bool, seed: u64) -> Result<Vec<Record>> {
    let p = rate_point(spec, pair)?;
    let mut r = Record::new();
    push(&mut r, "mu_s", pair.s.mu);
    push(&mut r, "mu_r", pair.r.mu);
    push(&mut r, "rho_opt", p.rho_opt);
    push(&mut r, "log2_rho_opt", p.rho_opt.log2());
    push(&mut r, "rate_cabr_opt", p.rate_cabr_opt);
    push(&mut r, "rate_cnbr", p.rate_cnbr);
    push(&mut r, "rate_cbr", p.rate_cbr);
    push(&mut r, "rho", p.rho);
    push(&mut r, "rate_cabr", p.rate_cabr);
    push(&mut r, "delay_bound", p.delay_bound);
    if simulate {
        let cfg = sim_config(spec, Scheme::Cabr, RateMode::Adaptive, seed).with_thresholds(SelectionThresholds::uniform(p.rho));
        let cabr = sim::run(&cfg, pair)?;
        let cnbr = sim::run(&sim_config(spec, Scheme::Cnbr, RateMode::Adaptive, seed), pair)?;
        let cbr = sim::run(&sim_config(spec, Scheme::Cbr, RateMode::Adaptive, seed), pair)?;
        push_est(&mut r, "sim_rate_cabr", Some(cabr.avg_rate));
        push_est(&mut r, "sim_offered_s", cabr.offered_rate_s);
        push_est(&mut r, "sim_offered_r", cabr.offered_rate_r);
        push_est(&mut r, "sim_delay", cabr.delay.and_then(|d| d.t_q_little));
        push_est(&mut r, "sim_rate_cnbr", Some(cnbr.avg_rate));
        push_est(&mut r, "sim_rate_cbr", Some(cbr.avg_rate));
    }
    Ok(vec![r])
}

pub(super) fn compare_rows(spec: &ExperimentSpec, pair: &HopPair) -> Result<Vec<Record>> {
    let p = rate_point(spec, pair)?;
    let mut r = Record::new();
    if let Some(g) = spec.system.geometry {
        push(&mut r, "d_sp_over_d_rp", g.d_sp / g.d_rp);
    }
    push(&mut r, "rho", p.rho);
    push(&mut r, "delay_bound", p.delay_bound);
    push(&mut r, "rate_cabr", p.rate_cabr);
    push(&mut r, "rate_cnbr", p.rate_cnbr);
    push(&mut r, "rate_cbr", p.rate_cbr);
    push(&mut r, "ratio_cnbr", p.rate_cabr / p.rate_cnbr);
    push(&mut r, "ratio_cbr", p.rate_cabr / p.rate_cbr);
    Ok(vec![r])
}

fn finite_buffer_chain(pair: &HopPair, thr: &SelectionThresholds, l: u64) -> Result<ThresholdProtocolParams> {
    params_from_thresholds(pair, thr, BufferSize::Finite(l))
}

pub(super) fn ser_rows(
    spec: &ExperimentSpec,
    pair: &HopPair,
    buffer_sizes: &[u64],
    simulate: bool,
    seed: u64,
) -> Result<Vec<Record>> {
    let m = spec.scheme.modulation;
    let rho = match spec.scheme.rho {
        Some(r) => r,
        None => rho_opt_fixed(pair)?,
    };
    let exact = ser_exact_cabr(pair, rho, &m)?;
    let asym = ser_asym_cabr(pair, rho, &m)?;
    let plain = ser_exact_cnbr(pair, &m)?;
    let plain_asym = ser_asym_cnbr(pair, &m)?;
    let mut r = Record::new();
    push(&mut r, "mu_s", pair.s.mu);
    push(&mut r, "mu_r", pair.r.mu);
    push(&mut r, "rho", rho);
    push(&mut r, "log2_rho", rho.log2());
    push(&mut r, "q_s", lsp(pair, rho)?.0);
    push(&mut r, "cabr_p_s", exact.p_s);
    push(&mut r, "cabr_p_r", exact.p_r);
    push(&mut r, "cabr_asym_p_s", asym.p_s);
    push(&mut r, "cabr_asym_p_r", asym.p_r);
    push(&mut r, "cnbr_p_s", plain.p_s);
    push(&mut r, "cnbr_p_r", plain.p_r);
    push(&mut r, "cnbr_asym_p_s", plain_asym.p_s);
    push(&mut r, "cnbr_asym_p_r", plain_asym.p_r);
    let thr = thresholds(spec, rho);
    for &l in buffer_sizes {
        let chain = finite_buffer_chain(pair, &thr, l)?;
        let (ps, pr) = ser_threshold(&chain, &component_sers(pair, &thr, &m)?)?;
        push(&mut r, format!("cabr_l{l}_p_s"), ps);
        push(&mut r, format!("cabr_l{l}_p_r"), pr);
        push(&mut r, format!("cabr_l{l}_t_q"), delays(&chain)?.t_q);
    }
    if simulate {
        let cfg = sim_config(spec, Scheme::Cabr, RateMode::Fixed, seed).with_thresholds(SelectionThresholds::uniform(rho));
        let o = sim::run(&cfg, pair)?.ser;
        push_est(&mut r, "sim_cabr_p_s", o.and_then(|s| s.p_s));
        push_est(&mut r, "sim_cabr_p_r", o.and_then(|s| s.p_r));
        let o = sim::run(&sim_config(spec, Scheme::Cnbr, RateMode::Fixed, seed), pair)?.ser;
        push_est(&mut r, "sim_cnbr_p_s", o.and_then(|s| s.p_s));
        push_est(&mut r, "sim_cnbr_p_r", o.and_then(|s| s.p_r));
        for &l in buffer_sizes {
            let mut cfg = sim_config(spec, Scheme::Cabr, RateMode::Fixed, seed).with_thresholds(thr);
            cfg.buffer.capacity = Capacity::Packets(l);
            cfg.buffer.discipline = spec.scheme.discipline;
            let o = sim::run(&cfg, pair)?;
            push_est(&mut r, &format!("sim_cabr_l{l}_p_s"), o.ser.and_then(|s| s.p_s));
            push_est(&mut r, &format!("sim_cabr_l{l}_p_r"), o.ser.and_then(|s| s.p_r));
            push_est(&mut r, &format!("sim_cabr_l{l}_t_q"), o.delay.and_then(|d| d.t_q_little));
        }
    }
    Ok(vec![r])
}

fn family_xi_c(f: &Family, xi: f64) -> Result<f64> {
    match *f {
        Family::Mdmt(x) if x > 0.0 => Ok(x * xi),
        Family::Mdmt(x) => Err(Error::config(format!("MDMT x* = {x} must be positive"))),
        Family::Ct(tau) => crate::queueing::ct_xi_c(tau, xi),
        Family::Epsilon(e) => epsilon_xi_c(e, xi),
    }
}

pub(super) fn threshold_rows(
    spec: &ExperimentSpec,
    pair: &HopPair,
    families: &[Family],
    constraint: Option<crate::queueing::SchemeConstraint>,
    xi: f64,
    simulate: bool,
    seed: u64,
) -> Result<Vec<Record>> {
    if let Some(c) = constraint {
        if let Feasibility::Infeasible { violated } = feasibility(&c) {
            return Err(Error::Infeasible(violated.describe().to_owned()));
        }
    }
    let m = spec.scheme.modulation;
    let mut rows = Vec::new();
    for f in families {
        let mut r = Record::new();
        push(&mut r, "family", f.label());
        push(&mut r, "family_param", f.param());
        // Points where the family is undefined (e.g. CT above its reach) stay empty.
        let point = family_xi_c(f, xi).and_then(|xi_c| {
            let chain = ThresholdProtocolParams::from_xi(BufferSize::Infinite, xi, xi_c, 1.0)?;
            let thr = thresholds_for_params(pair, &chain)?;
            let (ps, pr) = ser_threshold(&chain, &component_sers(pair, &thr, &m)?)?;
            let asym = ser_asym_threshold_pip(pair, xi, xi_c, &m).ok();
            Ok((xi_c, chain, thr, ps, pr, asym))
        });
        let names = ["xi_c", "rho", "rho_c", "tau", "t_total", "t_q", "t_u", "p_s", "p_r", "p_sum", "p_s_asym"];
        match point {
            Ok((xi_c, chain, thr, ps, pr, asym)) => {
                let d = delays(&chain)?;
                let tau = throughput(&chain)?;
                let vals = [xi_c, thr.rho, thr.rho_c, tau, d.t_total, d.t_q, d.t_u, ps, pr, ps + pr];
                for (k, v) in names.iter().zip(vals) {
                    push(&mut r, *k, v);
                }
                push(&mut r, "p_s_asym", asym.map(|a| a.simplified));
                if let Some(c) = constraint {
                    push(&mut r, "meets_constraint", f64::from(u8::from(tau >= c.tau_min && d.t_total <= c.t_max)));
                }
                if simulate {
                    let mut cfg = sim_config(spec, Scheme::Cabr, RateMode::Fixed, seed).with_thresholds(thr);
                    cfg.buffer.discipline = spec.scheme.discipline;
                    let o = sim::run(&cfg, pair)?;
                    push_est(&mut r, "sim_tau", o.throughput);
                    push_est(&mut r, "sim_t_total", o.delay.and_then(|d| d.t_total));
                    push_est(&mut r, "sim_p_s", o.ser.and_then(|s| s.p_s));
                    push_est(&mut r, "sim_p_r", o.ser.and_then(|s| s.p_r));
                    push_est(&mut r, "sim_p_sum", o.ser.and_then(|s| s.sum()));
                }
            }
            Err(Error::Domain(_)) => {
                for k in names {
                    push(&mut r, k, Cell::Empty);
                }
                if constraint.is_some() {
                    push(&mut r, "meets_constraint", Cell::Empty);
                }
                if simulate {
                    for k in ["sim_tau", "sim_t_total", "sim_p_s", "sim_p_r", "sim_p_sum"] {
                        push_est(&mut r, k, None);
                    }
                }
            }
            Err(e) => return Err(e),
        }
        rows.push(r);
    }
    Ok(rows)
}

pub(super) fn overflow_rows(spec: &ExperimentSpec, pair: &HopPair, grid: &[f64], seed: u64) -> Result<Vec<Record>> {
    let target = spec
        .scheme
        .delay_target
        .ok_or_else(|| Error::config("overflow study needs scheme.delay_target (or a delay_target series)"))?;
    let rho = match spec.scheme.rho {
        Some(r) => r,
        None => rho_for_delay_bound(pair, target)?,
    };
    let bound = delay_bound_adaptive(pair, rho)?;
    let mut sorted = grid.to_vec();
    if sorted.windows(2).all(|w| w[0] > w[1]) {
        sorted.reverse();
    }
    let cfg = sim_config(spec, Scheme::Cabr, RateMode::Adaptive, seed).with_thresholds(SelectionThresholds::uniform(rho));
    let curve = sim::overflow_probability(&cfg, pair, &sorted)?;
    let delay = curve.outcome.delay.and_then(|d| d.t_q_little);
    let mut rows = Vec::with_capacity(grid.len());
    for &l in grid {
        let i = sorted.iter().position(|&x| x == l).expect("grid value present");
        let mut r = Record::new();
        push(&mut r, "buffer", l);
        push(&mut r, "mu_s", pair.s.mu);
        push(&mut r, "mu_r", pair.r.mu);
        push(&mut r, "rho", rho);
        push(&mut r, "delay_bound", bound);
        push_est(&mut r, "sim_delay", delay);
        push_est(&mut r, "pr_overflow", Some(curve.probability[i]));
        rows.push(r);
    }
    Ok(rows)
}
