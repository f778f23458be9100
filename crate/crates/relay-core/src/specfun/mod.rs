//! Special functions and the integrals the closed forms are built from.

mod dilog;
mod erf;
mod expint;
mod integrals;
mod quad;

pub use dilog::dilog;
pub use erf::{erfc, erfcx};
pub use expint::{exp_en_scaled, exp_integral_en, exp_times_en, EULER_GAMMA};
pub use integrals::{
    exp_e1_dd, integral_i, integral_i0, integral_j, integral_j_dd, integral_k, integral_l, integral_l_dd, integral_l_diff,
    integral_m, integral_m_dd, Scale,
};
pub use quad::{integrate, integrate_semi_infinite, integrate_semi_infinite_rel, Integral, QuadratureSpec};
