mod common;

use common::Grid;
use proptest::prelude::*;
use relay_core::analytic::{lsp, rho_for_lsp, ser_exact_cabr, HopPair, ModulationParams, SelectionThresholds};
use relay_core::channel::LinkParams;
use relay_core::queueing::*;

/// Dense transition matrix of the chain, built from the transition rules alone.
fn transition_matrix(l: usize, q_s: f64, q_c: f64, q_d: f64) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; l + 1]; l + 1];
    p[0][1] += q_c;
    p[0][0] += 1.0 - q_c;
    p[l][l - 1] += q_d;
    p[l][l] += 1.0 - q_d;
    for i in 1..l {
        p[i][i + 1] = q_s;
        p[i][i - 1] = 1.0 - q_s;
    }
    p
}

/// πP = π, Σπ = 1 by Gaussian elimination with partial pivoting.
fn solve_stationary(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    // rows: equations Σ_i π_i (P_ij − δ_ij) = 0 for j < n−1, last row normalisation
    let mut a = vec![vec![0.0; n + 1]; n];
    for j in 0..n - 1 {
        for i in 0..n {
            a[j][i] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for i in 0..n {
        a[n - 1][i] = 1.0;
    }
    a[n - 1][n] = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

fn random_chain(g: &mut Grid) -> ThresholdProtocolParams {
    let l = 1 + (g.next_u64() % 64);
    let q_s = 0.05 + 0.9 * g.uniform();
    let q_c = 0.05 + 0.95 * g.uniform();
    let q_d = 0.05 + 0.95 * g.uniform();
    ThresholdProtocolParams::new(BufferSize::Finite(l), q_s, q_c, q_d).unwrap()
}

fn fin(l: u64, q_s: f64, q_c: f64, q_d: f64) -> ThresholdProtocolParams {
    ThresholdProtocolParams::new(BufferSize::Finite(l), q_s, q_c, q_d).unwrap()
}

#[test]
fn steady_state_matches_linear_solve() {
    let mut g = Grid(41);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = random_chain(&mut g);
        let l = p.buffer.finite().unwrap() as usize;
        let direct = solve_stationary(&transition_matrix(l, p.q_s, p.q_c, p.q_d));
        let pi = steady_state(&p).unwrap();
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, b) in pi.iter().zip(&direct) {
            worst = worst.max((a - b).abs());
        }
        let (pi0, pil) = boundary_probabilities(&p).unwrap();
        assert!((pi0 - pi[0]).abs() < 1e-12 && (pil - pi[l]).abs() < 1e-12, "{p:?}");
    }
    assert!(worst < 1e-12, "worst {worst:e}");
}

#[test]
fn worked_four_state_chain() {
    // L = 3, q_s = 0.4, q_c = 0.9, q_d = 1: π ∝ (1, 1.5, 1, 0.4)
    let pi = steady_state(&fin(3, 0.4, 0.9, 1.0)).unwrap();
    let expect = [1.0 / 3.9, 1.5 / 3.9, 1.0 / 3.9, 0.4 / 3.9];
    for (a, b) in pi.iter().zip(expect) {
        assert!((a - b).abs() < 1e-15);
    }
    let d = delays(&fin(3, 0.4, 0.9, 1.0)).unwrap();
    assert!((d.t_q - 47.0 / 19.0).abs() < 1e-13, "{}", d.t_q);
}

#[test]
fn printed_boundary_forms() {
    let mut g = Grid(3);
    for _ in 0..200 {
        let p = random_chain(&mut g);
        let l = p.buffer.finite().unwrap() as i32;
        let (xi, q) = (p.xi(), p);
        let pi0 = if (xi - 1.0).abs() < 1e-9 {
            1.0 / (1.0 + q.q_c / q.q_d + q.q_c / q.q_s * (l - 1) as f64)
        } else {
            1.0 / (1.0 + q.q_c / q.q_d * xi.powi(1 - l) + q.q_c / q.q_s * (1.0 / xi - xi.powi(-l)) / (1.0 - 1.0 / xi))
        };
        let pil = q.q_c / q.q_d * xi.powi(1 - l) * pi0;
        let (a, b) = boundary_probabilities(&p).unwrap();
        assert!((a - pi0).abs() <= 1e-12 * pi0.max(1e-3), "{p:?}");
        assert!((b - pil).abs() <= 1e-12 * pil.max(1e-3), "{p:?}");
    }
}

#[test]
fn flux_identities() {
    let mut g = Grid(5);
    for _ in 0..1000 {
        let p = random_chain(&mut g);
        let l = p.buffer.finite().unwrap() as i32;
        let pi = steady_state(&p).unwrap();
        let tau = 0.5 * (1.0 - (1.0 - p.q_c) * pi[0] - (1.0 - p.q_d) * pi[l as usize]);
        let xi = p.xi();
        let (u, o) = if (xi - 1.0).abs() < 1e-9 {
            (1.0 / l as f64, 1.0 / l as f64)
        } else {
            ((1.0 - 1.0 / xi) / (1.0 - xi.powi(-l)), (xi - 1.0) / (xi.powi(l) - 1.0))
        };
        assert!((p.q_c * pi[0] / tau - u).abs() < 1e-12, "{p:?}");
        assert!((p.q_d * pi[l as usize] / tau - o).abs() < 1e-12, "{p:?}");
        assert!((throughput(&p).unwrap() - tau).abs() < 1e-12);
        let d = delays(&p).unwrap();
        assert!((1.0 / tau - d.t_u - d.t_o - 2.0).abs() < 1e-12 * (1.0 / tau), "{p:?}");
        assert!((departure_rate(&p).unwrap() - tau - (1.0 - p.q_c) * pi[0]).abs() < 1e-12);
    }
}

#[test]
fn queueing_delay_is_little_ratio() {
    let mut g = Grid(9);
    for _ in 0..1000 {
        let p = random_chain(&mut g);
        let pi = steady_state(&p).unwrap();
        let qbar: f64 = pi.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
        let a = p.q_c * pi[0] + p.q_s * (1.0 - pi[0] - pi[pi.len() - 1]);
        let a = if pi.len() == 2 { p.q_c * pi[0] } else { a };
        let t_q = delays(&p).unwrap().t_q;
        assert!((t_q - qbar / a).abs() <= 1e-11 * t_q, "{p:?}: {t_q} vs {}", qbar / a);
        let t_e = lifo_equivalent_queue_delay(&p).unwrap();
        let l = (pi.len() - 1) as f64;
        assert!((t_e - (l - qbar) / a).abs() <= 1e-11 * t_e.max(1.0));
    }
}

#[test]
fn printed_queueing_delay_away_from_unit_xi() {
    let mut g = Grid(13);
    for _ in 0..500 {
        let p = random_chain(&mut g);
        let xi = p.xi();
        if (xi - 1.0).abs() < 0.05 {
            continue;
        }
        let l = p.buffer.finite().unwrap() as f64;
        let printed = 1.0 + 2.0 / (xi - 1.0) + l * (xi - 1.0) / (xi.powf(l) - 1.0) * (p.xi_d() - 2.0 / (xi - 1.0));
        let t_q = delays(&p).unwrap().t_q;
        assert!((t_q - printed).abs() <= 1e-9 * t_q, "{p:?}");
    }
}

#[test]
fn near_unit_xi_is_continuous() {
    for l in [1u64, 2, 7, 64] {
        let at = delays(&fin(l, 0.5, 0.6, 0.8)).unwrap();
        for dq in [1e-12, 1e-9, 1e-7, 1e-5] {
            for q in [0.5 - dq, 0.5 + dq] {
                let d = delays(&fin(l, q, 0.6, 0.8)).unwrap();
                let tol = 1e-10 + 10.0 * dq * (l * l) as f64;
                assert!((d.t_q - at.t_q).abs() < tol, "L={l} q={q}: {} vs {}", d.t_q, at.t_q);
                assert!((d.t_u - at.t_u).abs() < tol && (d.t_o - at.t_o).abs() < tol);
            }
        }
    }
}

#[test]
fn minimum_queueing_delay_at_unit_xi() {
    for l in 1..=64u64 {
        let p = fin(l, 0.5, 0.37, 1.0);
        assert!((delays(&p).unwrap().t_q - l as f64).abs() < 1e-12);
    }
}

#[test]
fn queueing_delay_independent_of_buffer_when_matched() {
    for xi in [1.3, 2.0, 5.0, 11.0] {
        let xi_d = 2.0 / (xi - 1.0);
        let inf = delays(&ThresholdProtocolParams::from_xi(BufferSize::Infinite, xi, 0.4, xi_d).unwrap()).unwrap().t_q;
        assert!((inf - (1.0 + 2.0 / (xi - 1.0))).abs() < 1e-12);
        for l in [2u64, 8, 64] {
            let t = delays(&ThresholdProtocolParams::from_xi(BufferSize::Finite(l), xi, 0.4, xi_d).unwrap()).unwrap().t_q;
            assert!((t - inf).abs() < 1e-10, "ξ={xi} L={l}: {t} vs {inf}");
        }
    }
}

#[test]
fn reversed_chain_swaps_silences_and_mirrors_state() {
    let mut g = Grid(17);
    for _ in 0..300 {
        let p = random_chain(&mut g);
        let r = p.reversed().unwrap();
        let (d, dr) = (delays(&p).unwrap(), delays(&r).unwrap());
        assert!((d.t_u - dr.t_o).abs() < 1e-12 * d.t_u.max(1.0));
        assert!((d.t_o - dr.t_u).abs() < 1e-12 * d.t_o.max(1.0));
        let (pi, pr) = (steady_state(&p).unwrap(), steady_state(&r).unwrap());
        for (a, b) in pi.iter().zip(pr.iter().rev()) {
            assert!((a - b).abs() < 1e-12);
        }
        let te = lifo_equivalent_queue_delay(&p).unwrap();
        assert!((te - dr.t_q).abs() <= 1e-10 * te.max(1.0), "{p:?}: {te} vs {}", dr.t_q);
    }
}

#[test]
fn lifo_delay_symmetric_example() {
    let p = fin(2, 0.5, 0.5, 0.5);
    let a = throughput(&p).unwrap();
    assert!((lifo_equivalent_queue_delay(&p).unwrap() - 1.0 / a).abs() < 1e-13);
}

#[test]
fn ser_mixing_limits() {
    let c = ComponentSers { p_s: 0.1, p_c: 0.3, p_r: 0.2, p_d: 0.6 };
    let (s, r) = ser_threshold(&fin(4, 0.5, 0.8, 0.9), &c).unwrap();
    assert!((s - (0.3 / 4.0 + 0.75 * 0.1)).abs() < 1e-15);
    assert!((r - (0.6 / 4.0 + 0.75 * 0.2)).abs() < 1e-15);
    let inf = ThresholdProtocolParams::from_xi(BufferSize::Infinite, 2.0, 1.0, 1.0).unwrap();
    let (s, r) = ser_threshold(&inf, &c).unwrap();
    assert!((s - 0.2).abs() < 1e-15 && r == 0.2);
    assert!(ser_threshold(&inf, &ComponentSers { p_s: 1.2, ..c }).is_err());
    // L = 1: every packet enters from the empty state
    let (s, r) = ser_threshold(&fin(1, 0.3, 0.8, 0.9), &c).unwrap();
    assert!((s - 0.3).abs() < 1e-15 && (r - 0.6).abs() < 1e-15);
}

#[test]
fn mdmt_minima() {
    let cases = [
        (1.0, 1.0 + 2.0 * 2f64.sqrt(), 1.0 + 2f64.sqrt(), 1.0 / (2.0 + 2f64.sqrt())),
        (0.5, 3.0, 3.0, 1.0 / 3.0),
        (0.25, 1.0 + 2f64.sqrt(), 1.0 + 2.0 * 2f64.sqrt(), 2f64.sqrt() / (1.0 + 2.0 * 2f64.sqrt())),
    ];
    for (x, t, xi, tau) in cases {
        let (tm, xm) = mdmt_min_delay(x).unwrap();
        assert!((tm - t).abs() < 1e-14 && (xm - xi).abs() < 1e-14);
        assert!((mdmt_delay(x, xm) - t).abs() < 1e-13);
        let chain = ThresholdProtocolParams::from_xi(BufferSize::Infinite, xm, x * xm, 0.0).unwrap();
        let d = delays(&chain).unwrap();
        assert!((d.t_total - t).abs() < 1e-12);
        assert!((throughput(&chain).unwrap() - tau).abs() < 1e-12);
    }
}

#[test]
fn mdmt_delay_is_convex() {
    for x in [0.25, 0.5, 1.0, 2.0] {
        let h = 0.01;
        let mut xi = 1.0 + 2.0 * h;
        while xi + h < 100.0 {
            let d2 = mdmt_delay(x, xi + h) - 2.0 * mdmt_delay(x, xi) + mdmt_delay(x, xi - h);
            assert!(d2 > 0.0, "x*={x} ξ={xi}");
            xi += h;
        }
    }
}

#[test]
fn mdmt_interval_endpoints_meet_constraints() {
    let c = SchemeConstraint { t_max: 4.0, tau_min: 0.3 };
    let XiRange::Interval { lo, hi } = mdmt_xi_range(0.5, &c).unwrap() else { panic!() };
    // ξ_min = 1 + 3 − √5, ξ_max = 1 + 3 + √5, ξ_maxτ = 1 + 2(1/0.3 − 2) = 11/3
    assert!((lo - (4.0 - 5f64.sqrt())).abs() < 1e-14 && (hi - 11.0 / 3.0).abs() < 1e-14);
    for xi in [lo, 0.5 * (lo + hi), hi] {
        let chain = ThresholdProtocolParams::from_xi(BufferSize::Infinite, xi, 0.5 * xi, 0.0).unwrap();
        assert!(delays(&chain).unwrap().t_total <= 4.0 + 1e-12);
        assert!(throughput(&chain).unwrap() >= 0.3 - 1e-12);
    }
    let below = mdmt_xi_range(0.5, &SchemeConstraint { t_max: 2.9, tau_min: 0.4 }).unwrap();
    assert_eq!(below, XiRange::Infeasible { violated: Violation::DelayBelowMdmtMinimum });
    let starved = mdmt_xi_range(2.0, &SchemeConstraint { t_max: 12.0, tau_min: 0.45 }).unwrap();
    assert_eq!(starved, XiRange::Infeasible { violated: Violation::ThroughputRangeEmpty });
}

/// Scan of infinite-buffer chains run at throughput exactly τ*_min: for each ξ on the
/// grid, ξ_c is set so that τ = τ*_min and the delay cap is checked directly.
fn brute_force_feasible(c: &SchemeConstraint) -> bool {
    if !(c.tau_min <= 0.5) {
        return false;
    }
    let mut xi = 1.0 + 1e-3;
    while xi < 1e6 {
        let xi_c = ct_xi_c(c.tau_min, xi).unwrap();
        if let Ok(chain) = ThresholdProtocolParams::from_xi(BufferSize::Infinite, xi, xi_c, 0.0) {
            let tau = throughput(&chain).unwrap();
            if (tau - c.tau_min).abs() < 1e-9 && delays(&chain).unwrap().t_total <= c.t_max {
                return true;
            }
        }
        xi *= 1.01;
    }
    false
}

#[test]
fn feasibility_agrees_with_scan() {
    let mut g = Grid(23);
    let mut checked = 0;
    for _ in 0..400 {
        let c = SchemeConstraint { t_max: 0.5 + 9.5 * g.uniform(), tau_min: 0.05 + 0.55 * g.uniform() };
        // skip the grid-resolution band at the boundary τ(1+T) = 1
        if (c.tau_min * (1.0 + c.t_max) - 1.0).abs() < 0.01 || (c.tau_min - 0.5).abs() < 1e-3 {
            continue;
        }
        assert_eq!(feasibility(&c).is_feasible(), brute_force_feasible(&c), "{c:?}");
        checked += 1;
    }
    assert!(checked > 300);
}

#[test]
fn higher_throughput_chains_escape_the_product_condition() {
    // q_c = q_d = 1 runs at τ = ½ with T̄ → 1 as ξ grows
    let c = SchemeConstraint { t_max: 1.5, tau_min: 0.3 };
    assert!(!feasibility(&c).is_feasible());
    let chain = ThresholdProtocolParams::from_xi(BufferSize::Infinite, 9.0, 0.0, 0.0).unwrap();
    assert!(delays(&chain).unwrap().t_total <= c.t_max && throughput(&chain).unwrap() >= c.tau_min);
}

#[test]
fn ct_substitution_recovers_target() {
    let mut g = Grid(29);
    for _ in 0..500 {
        let tau = 0.01 + 0.49 * g.uniform();
        let xi = 1.0 + g.log_uniform(1e-3, 1e3);
        let xi_c = ct_xi_c(tau, xi).unwrap();
        let chain = ThresholdProtocolParams::from_xi(BufferSize::Infinite, xi, xi_c, 0.0).unwrap();
        assert!((throughput(&chain).unwrap() - tau).abs() < 1e-12, "τ*={tau} ξ={xi}");
    }
    assert!(ct_xi_c(0.0, 2.0).is_err() && ct_xi_c(0.6, 2.0).is_err() && ct_xi_c(0.3, 1.0).is_err());
}

#[test]
fn ct_minimum_xi_is_tight() {
    for (tau, t_max) in [(0.3, 5.0), (0.25, 3.5), (0.45, 2.0)] {
        let m = ct_min_xi(tau, t_max).unwrap();
        let total = |xi: f64| {
            let chain = ThresholdProtocolParams::from_xi(BufferSize::Infinite, xi, ct_xi_c(tau, xi).unwrap(), 0.0).unwrap();
            delays(&chain).unwrap().t_total
        };
        assert!((total(m) - t_max).abs() < 1e-10, "{} vs {t_max}", total(m));
        assert!(total(m * 1.01) < t_max && total(1.0 + (m - 1.0) * 0.99) > t_max);
        assert!(ct_meets_delay(tau, t_max, m * 1.01) && !ct_meets_delay(tau, t_max, 1.0 + (m - 1.0) * 0.99));
    }
    assert!(ct_min_xi(0.2, 3.0).is_none());
}

#[test]
fn epsilon_family() {
    // x* ≥ ½ keeps ε = 1 + ξ⁻¹ − 1/(ξx*) non-negative for every ξ ≥ 1
    for x in [0.5, 0.75, 1.0, 3.0] {
        let mut xi = 1.0;
        while xi < 1e3 {
            assert!(1.0 + 1.0 / xi - 1.0 / (xi * x) >= -1e-15);
            xi *= 1.1;
        }
    }
    assert!(1.0 + 1.0 / 1.1 - 1.0 / (1.1 * 0.4) < 0.0);
    for xi in [1.5, 2.0, 10.0] {
        for eps in [0.0, 0.5, 1.0] {
            let xi_c = epsilon_xi_c(eps, xi).unwrap();
            assert!((1.0 + 1.0 / xi - 1.0 / xi_c - eps).abs() < 1e-14);
        }
    }
}

fn pip_pair(mus: f64, mur: f64) -> HopPair {
    HopPair::new(LinkParams::pure_pip(mus).unwrap(), LinkParams::pure_pip(mur).unwrap())
}

fn exact_threshold_ser(pair: &HopPair, xi: f64, xi_c: f64) -> (f64, f64) {
    let m = ModulationParams::default();
    let chain = ThresholdProtocolParams::from_xi(BufferSize::Infinite, xi, xi_c, 0.0).unwrap();
    let thr = thresholds_for_params(pair, &chain).unwrap();
    let comp = component_sers(pair, &thr, &m).unwrap();
    (ser_threshold(&chain, &comp).unwrap().0, comp.p_s)
}

#[test]
fn epsilon_zero_makes_source_ser_flat_in_xi() {
    let pair = pip_pair(33.75, 80.0);
    let m = ModulationParams::default();
    let flat = 3.0 / (4.0 * 4.0) / (33.75 * 33.75) * 2.0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for xi in [1.05, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0] {
        let xi_c = epsilon_xi_c(0.0, xi).unwrap();
        let a = ser_asym_threshold_pip(&pair, xi, xi_c, &m).unwrap();
        assert!((a.simplified - flat).abs() < 1e-18);
        // approximate ρ inversion against exact inversion
        let err = (a.mixed_exact - a.simplified).abs() / a.mixed_exact;
        assert!(err < 0.05, "ξ={xi}: {} vs {} ({err:.3})", a.mixed_exact, a.simplified);
        let (exact, _) = exact_threshold_ser(&pair, xi, xi_c);
        lo = lo.min(exact);
        hi = hi.max(exact);
    }
    assert!(hi / lo - 1.0 < 0.02, "exact P'_s spread {lo:e}..{hi:e}");
}

#[test]
fn epsilon_one_reproduces_unbuffered_ser() {
    // ε = 1 gives ξ_c = ξ, so the empty-state threshold equals the interior one
    let pair = pip_pair(33.75, 80.0);
    let m = ModulationParams::default();
    for xi in [1.05, 2.0, 10.0] {
        let xi_c = epsilon_xi_c(1.0, xi).unwrap();
        assert!((xi_c - xi).abs() < 1e-12 * xi);
        let (mixed, plain) = exact_threshold_ser(&pair, xi, xi_c);
        assert!((mixed - plain).abs() < 1e-9 * plain);
        let a = ser_asym_threshold_pip(&pair, xi, xi_c, &m).unwrap();
        let q_r = xi / (1.0 + xi);
        assert!((a.simplified - 3.0 / 16.0 / (33.75 * 33.75) / q_r).abs() < 1e-15);
    }
}

#[test]
fn epsilon_nonnegative_bounds_asymptote() {
    let pair = pip_pair(33.75, 80.0);
    let m = ModulationParams::default();
    let bound = 3.0 / (2.0 * 4.0) / (33.75 * 33.75);
    for xi in [1.01, 2.0, 50.0] {
        for eps in [0.0, 0.3, 1.0, 1.5] {
            let Ok(xi_c) = epsilon_xi_c(eps, xi) else { continue };
            assert!(ser_asym_threshold_pip(&pair, xi, xi_c, &m).unwrap().simplified <= bound * (1.0 + 1e-15));
        }
    }
}

#[test]
fn threshold_asymptote_against_exact_mixture() {
    // μ_s = 33.75, μ_r = 80, ξ = 2, ε = 0 → ξ_c = ⅔: (3/16)(1/33.75²)·2
    let pair = pip_pair(33.75, 80.0);
    let m = ModulationParams::default();
    let xi_c = epsilon_xi_c(0.0, 2.0).unwrap();
    let a = ser_asym_threshold_pip(&pair, 2.0, xi_c, &m).unwrap();
    assert!((a.simplified - 3.0 / 8.0 / (33.75 * 33.75)).abs() < 1e-18);

    let chain = ThresholdProtocolParams::from_xi(BufferSize::Infinite, 2.0, xi_c, 0.0).unwrap();
    let thr = thresholds_for_params(&pair, &chain).unwrap();
    assert!((lsp(&pair, thr.rho).unwrap().0 - chain.q_s).abs() < 1e-10);
    let comp = component_sers(&pair, &thr, &m).unwrap();
    let (ps, _) = ser_threshold(&chain, &comp).unwrap();
    let exact_s = ser_exact_cabr(&pair, thr.rho, &m).unwrap().p_s;
    assert!((comp.p_s - exact_s).abs() < 1e-15);
    // at μ_s = 33.75 the high-SNR form overshoots the exact floor by about 15%
    for v in [a.mixed_exact, a.simplified, a.mixed_approx] {
        assert!(v > ps && (v - ps) / ps < 0.2, "asymptote {v} vs exact {ps}");
    }
}

#[test]
fn thresholds_round_trip_through_lsp() {
    let pair = HopPair::new(LinkParams::new(400.0, 33.75, (-33.75f64 / 400.0).exp()).unwrap(), LinkParams::new(900.0, 80.0, (-80f64 / 900.0).exp()).unwrap());
    let chain = fin(6, 0.3, 0.8, 0.7);
    let thr = thresholds_for_params(&pair, &chain).unwrap();
    let back = params_from_thresholds(&pair, &thr, BufferSize::Finite(6)).unwrap();
    assert!((back.q_s - 0.3).abs() < 1e-10 && (back.q_c - 0.8).abs() < 1e-10 && (back.q_d - 0.7).abs() < 1e-10);
    let forced = params_from_thresholds(&pair, &SelectionThresholds { rho: 1.0, rho_c: f64::INFINITY, rho_d: 0.0 }, BufferSize::Finite(2)).unwrap();
    assert_eq!((forced.q_c, forced.q_d), (1.0, 1.0));
    assert_eq!(rho_for_lsp(&pair, 1.0).unwrap(), f64::INFINITY);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn weights_are_convex(l in 1u64..200, q_s in 0.01f64..0.99, q_c in 0.01f64..1.0, q_d in 0.01f64..1.0) {
        let p = fin(l, q_s, q_c, q_d);
        let (u, o) = (p.underflow_weight(), p.overflow_weight());
        prop_assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&o));
        let c = ComponentSers { p_s: 0.0, p_c: 1.0, p_r: 0.0, p_d: 1.0 };
        let (s, r) = ser_threshold(&p, &c).unwrap();
        prop_assert!((s - u).abs() < 1e-15 && (r - o).abs() < 1e-15);
        let one = ComponentSers { p_s: 1.0, p_c: 1.0, p_r: 1.0, p_d: 1.0 };
        let (s, r) = ser_threshold(&p, &one).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-15 && (r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn silence_identity_and_bounds(l in 1u64..100_000, q_s in 0.01f64..0.99, q_c in 0.01f64..1.0, q_d in 0.01f64..1.0) {
        let p = fin(l, q_s, q_c, q_d);
        let tau = throughput(&p).unwrap();
        let d = delays(&p).unwrap();
        prop_assert!(tau <= 0.5 && tau > 0.0);
        prop_assert!((1.0 / tau - d.t_u - d.t_o - 2.0).abs() < 1e-12 * (1.0 / tau));
        prop_assert!(d.t_q >= 1.0 && d.t_u >= 0.0 && d.t_o >= 0.0);
        // T̄_q − 1 is a convex combination of 2/(ξ−1) and ξ_d
        if p.xi() > 1.0 + 1e-6 {
            let (a, b) = (2.0 / (p.xi() - 1.0), p.xi_d());
            prop_assert!(d.t_q - 1.0 >= a.min(b) * (1.0 - 1e-9) - 1e-12 && d.t_q - 1.0 <= a.max(b) * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn infinite_limit_reached(q_s in 0.02f64..0.45, q_c in 0.05f64..1.0, q_d in 0.05f64..1.0) {
        let inf = ThresholdProtocolParams::new(BufferSize::Infinite, q_s, q_c, q_d).unwrap();
        let big = fin(5000, q_s, q_c, q_d);
        let (a, b) = (delays(&inf).unwrap(), delays(&big).unwrap());
        prop_assert!((a.t_q - b.t_q).abs() < 1e-9 * a.t_q && (a.t_u - b.t_u).abs() < 1e-9);
        prop_assert!((throughput(&inf).unwrap() - 1.0 / (2.0 + a.t_u)).abs() < 1e-15);
    }
}
