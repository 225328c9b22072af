//! Counter-addressable random streams.
//!
//! Every trajectory owns a ChaCha8 stream keyed by the run seed and selected by
//! its trajectory index. ChaCha is a counter-mode generator, so stream `j` is a
//! pure function of `(seed, j)` and no draw made for one trajectory can shift
//! the draws of another. Global decisions (which ensemble member a heterodyne
//! measurement returns, dichotomic outcomes) use dedicated control streams at
//! the top of the stream space.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha8Rng;

/// Stream ids at or above this value are reserved for control streams.
pub const CONTROL_STREAM_BASE: u64 = u64::MAX - 0xFFFF;

/// Stream owned by trajectory `index`.
pub fn trajectory_stream(seed: u64, index: u64) -> StreamRng {
    assert!(index < CONTROL_STREAM_BASE, "trajectory index collides with control streams");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Control stream `tag` (0..=0xFFFF) for global random decisions.
pub fn control_stream(seed: u64, tag: u16) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CONTROL_STREAM_BASE + u64::from(tag));
    rng
}

/// Derive the seed of repetition `rep` from a base seed (splitmix64 finaliser).
pub fn derive_seed(base: u64, rep: u64) -> u64 {
    let mut z = base ^ rep.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Circularly symmetric complex Gaussian with `E|z|^2 = variance`.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    Complex64::new(s * re, s * im)
}

/// Uniform draw in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `[0, n)` by rejection, free of modulo bias.
pub fn uniform_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n) - 1;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return (v % n) as usize;
        }
    }
}
