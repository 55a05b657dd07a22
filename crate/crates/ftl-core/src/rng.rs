//! Deterministic random streams.
//!
//! Every run owns a single root seed; sub-tasks derive independent streams
//! from `(seed, label, index)` so that parallel execution and re-ordering
//! cannot change any sampled value.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a child stream from a root seed, a task label and an item index.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    // SplitMix64-style mixing of the label hash and index into the seed.
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in label.bytes() {
        h = (h ^ b as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 27;
    }
    h = h.wrapping_add(index.wrapping_mul(0x94d0_49bb_1331_11eb));
    h ^= h >> 31;
    ChaCha8Rng::seed_from_u64(h)
}

/// Uniform point of the open complex disc of the given radius.
pub fn complex_in_disc(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    let th = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, th)
}

/// Uniform point of the annulus r_min <= |z| < r_max (area measure).
pub fn complex_in_annulus(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Complex64 {
    let u = rng.random::<f64>();
    let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
    let th = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, th)
}

/// Log-uniform sample of (lo, hi], lo > 0.
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = rng.random::<f64>();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}
