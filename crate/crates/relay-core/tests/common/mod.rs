#![allow(dead_code)]
//! Independent oracles shared by the integration tests.
//!
//! The quadrature here is double-exponential (exp-sinh / tanh-sinh),
//! deliberately unrelated to the library's adaptive Gauss–Kronrod.
#![allow(dead_code)]

use std::f64::consts::PI;

/// ∫₀^∞ f(x) dx by the exp-sinh rule with step halving.
pub fn de_half_line<F: Fn(f64) -> f64>(f: F, scale: f64) -> f64 {
    let mut h = 0.5;
    let eval = |t: f64| {
        let x = scale * (PI / 2.0 * t.sinh()).exp();
        let w = x * PI / 2.0 * t.cosh();
        let v = f(x) * w;
        if v.is_finite() { v } else { 0.0 }
    };
    let sum_for = |h: f64, odd_only: bool| {
        let mut s = 0.0;
        let step = if odd_only { 2 } else { 1 };
        let start = if odd_only { 1 } else { 0 };
        let mut k = start;
        loop {
            let t = k as f64 * h;
            let a = eval(t);
            let b = if k == 0 { 0.0 } else { eval(-t) };
            s += a + b;
            if t > 4.5 {
                break;
            }
            k += step;
        }
        s
    };
    let mut s = sum_for(h, false);
    let mut prev = s * h;
    for _ in 0..10 {
        h /= 2.0;
        s += sum_for(h, true);
        let cur = s * h;
        if (cur - prev).abs() <= 1e-13 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// ∫_a^b f(x) dx by tanh-sinh.
pub fn de_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let g = |t: f64| {
        let u = PI / 2.0 * t.sinh();
        let x = u.tanh();
        let w = PI / 2.0 * t.cosh() / u.cosh().powi(2);
        let y = c + r * x;
        if y <= a || y >= b {
            return 0.0;
        }
        let v = f(y) * w * r;
        if v.is_finite() { v } else { 0.0 }
    };
    let mut h = 0.5;
    let mut s = g(0.0);
    let mut k = 1;
    while (k as f64) * h < 4.0 {
        let t = k as f64 * h;
        s += g(t) + g(-t);
        k += 1;
    }
    let mut prev = s * h;
    for _ in 0..10 {
        h /= 2.0;
        let mut k = 1;
        while (k as f64) * h < 4.0 {
            let t = k as f64 * h;
            s += g(t) + g(-t);
            k += 2;
        }
        let cur = s * h;
        if (cur - prev).abs() <= 1e-13 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// E_n(x) straight from its defining integral.
pub fn en_oracle(n: i32, x: f64) -> f64 {
    (-x).exp() * de_half_line(|u| (1.0 + u).powi(-n) * (-x * u).exp(), 1.0 / x.max(1e-3))
}

/// e^z·E₁(z) = ∫₀^∞ e^(−s)/(s+z) ds.
pub fn scaled_e1_oracle(z: f64) -> f64 {
    de_half_line(|s| (-s).exp() / (s + z), 1.0)
}

/// E_w[g(w)] for the weighting density √(η/(2πw)) e^(−ηw/2).
pub fn ew_oracle<G: Fn(f64) -> f64>(g: G, eta: f64) -> f64 {
    let norm = (eta / (2.0 * PI)).sqrt();
    de_half_line(|w| norm / w.sqrt() * (-eta * w / 2.0).exp() * g(w), 2.0 / eta)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Minimal deterministic generator for parameter grids (SplitMix64).
pub struct Grid(pub u64);

impl Grid {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Log-uniform draw on [lo, hi].
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (lo.ln() + self.uniform() * (hi.ln() - lo.ln())).exp()
    }

    /// Unit-mean exponential draw.
    pub fn exp1(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    /// γ = |h|²·min(λ, μ/|g|²) with unit-mean |h|², |g|², the physical
    /// model behind p = e^(−μ/λ). `lambda` may be infinite.
    pub fn physical_snr(&mut self, lambda: f64, mu: f64) -> f64 {
        let h = self.exp1();
        let g = self.exp1();
        h * lambda.min(mu / g)
    }
}
