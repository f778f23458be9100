//! Adaptive Gauss–Kronrod (7/15) quadrature.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub absolute_tolerance: f64,
    pub relative_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { absolute_tolerance: 1e-10, relative_tolerance: 1e-9, max_subdivisions: 4000 }
    }
}

impl QuadratureSpec {
    pub fn new(absolute_tolerance: f64, relative_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        let q = Self { absolute_tolerance, relative_tolerance, max_subdivisions };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.absolute_tolerance > 0.0) || !(self.relative_tolerance > 0.0) {
            return Err(Error::domain("quadrature tolerances must be strictly positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    let est = resk * h;
    let err = ((resk - resg) * h).abs();
    (est, err)
}

struct Segment {
    a: f64,
    b: f64,
    est: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

/// Result of a successful integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    if a == b {
        return Ok(Integral { value: 0.0, abs_error: 0.0, subdivisions: 0 });
    }
    let (est, err) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, est, err });
    let mut total = est;
    let mut total_err = err;
    let mut n = 1;
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::NonConvergence { value: total, achieved: total_err });
        }
        let tol = spec.absolute_tolerance.max(spec.relative_tolerance * total.abs());
        if total_err <= tol {
            return Ok(Integral { value: total, abs_error: total_err, subdivisions: n });
        }
        if n >= spec.max_subdivisions {
            // Roundoff floor: accept when remaining error is at machine level.
            if total_err <= 64.0 * f64::EPSILON * total.abs().max(1e-300) {
                return Ok(Integral { value: total, abs_error: total_err, subdivisions: n });
            }
            return Err(Error::NonConvergence { value: total, achieved: total_err });
        }
        let seg = heap.pop().expect("non-empty segment heap");
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a || m >= seg.b {
            return Err(Error::NonConvergence { value: total, achieved: total_err });
        }
        let (e1, r1) = gk15(&f, seg.a, m);
        let (e2, r2) = gk15(&f, m, seg.b);
        total += e1 + e2 - seg.est;
        total_err += r1 + r2 - seg.err;
        heap.push(Segment { a: seg.a, b: m, est: e1, err: r1 });
        heap.push(Segment { a: m, b: seg.b, est: e2, err: r2 });
        n += 1;
        if n % 64 == 0 {
            // Re-sum to shed accumulated cancellation in the running totals.
            total = heap.iter().map(|s| s.est).sum();
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
}

/// Integrates `f` over `[0, ∞)` via `x = c·t/(1−t)`, `t ∈ [0, 1)`.
///
/// `scale` sets `c`; pick it near the decay length of the integrand.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, scale: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let c = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let g = |t: f64| {
        let u = 1.0 - t;
        if u <= 0.0 {
            return 0.0;
        }
        let x = c * t / u;
        let v = f(x) * c / (u * u);
        if v.is_finite() { v } else { 0.0 }
    };
    integrate(g, 0.0, 1.0, spec)
}

/// Like [`integrate_semi_infinite`], but re-runs with a tightened absolute
/// tolerance when the absolute tolerance dominates for a small integral.
pub fn integrate_semi_infinite_rel<F: Fn(f64) -> f64>(f: F, scale: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let first = integrate_semi_infinite(&f, scale, spec)?;
    let needed = spec.relative_tolerance * first.value.abs();
    if needed >= spec.absolute_tolerance || first.value == 0.0 {
        return Ok(first);
    }
    let tight = QuadratureSpec { absolute_tolerance: needed.max(f64::MIN_POSITIVE), ..*spec };
    integrate_semi_infinite(&f, scale, &tight)
}
