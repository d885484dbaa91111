//! Reproducible random streams for the Monte Carlo driver.
//!
//! Every trial owns its own generator, seeded by a fixed 64-bit mix of
//! (base seed, sweep point index, trial index). Results are therefore
//! independent of how trials are distributed across workers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^ (z >> 33)
}

/// Stream seed for trial `trial` of sweep point `point`.
pub fn derive_seed(base: u64, point: u64, trial: u64) -> u64 {
    let mut s = mix64(base ^ 0x9E37_79B9_7F4A_7C15);
    s = mix64(s ^ point);
    mix64(s ^ trial)
}

/// Generator owned by a single trial.
pub fn trial_rng(base: u64, point: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, point, trial))
}

/// One circularly-symmetric complex Gaussian sample with unit total variance
/// (1/2 per real dimension), generated with the Box-Muller polar form.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    // 1 - u lies in (0, 1], so the log is finite; |z|^2 is Exp(1).
    let radius = (-(1.0 - u).ln()).sqrt();
    Complex64::from_polar(radius, TAU * v)
}
