//! Fixed inputs shared by the benchmarks.

use sumlab_core::constructions::{random_frostman, random_katz_tao, sharpness_example, Rounding, SharpnessParams};
use sumlab_core::{GridSet, Rational};

/// Katz-Tao and Frostman sets at `q`, block length 2, exponent 1/2.
pub fn regular_triple(q: u32) -> (GridSet, GridSet, GridSet) {
    let half = Rational::new(1, 2);
    (
        random_katz_tao(q, 2, half, 1).unwrap(),
        random_katz_tao(q, 2, half, 2).unwrap(),
        random_frostman(q, 2, half, 3).unwrap(),
    )
}

pub fn sharpness(q: u32) -> (GridSet, GridSet, GridSet) {
    let r = Rational::new;
    let p = SharpnessParams::new(q, r(1, 2), r(1, 4), r(1, 2), r(1, 5)).unwrap();
    let ex = sharpness_example(&p, Rounding::Exact).unwrap();
    (ex.a, ex.b, ex.c)
}
