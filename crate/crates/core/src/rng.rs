//! Deterministic random generation for tests and the verification battery.
//!
//! Each trial gets its own ChaCha stream derived from `(seed, tag, trial)`, so
//! suites can run in any order, or in parallel, with identical results.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::scalar::Scalar;

/// Stable 64-bit mix (splitmix64 finalizer).
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// FNV-1a over bytes; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// ChaCha stream keyed by `(seed, tag, trial)`.
pub fn trial_rng(seed: u64, tag: &str, trial: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let base = mix(seed) ^ mix(fnv1a(tag.as_bytes())).rotate_left(17) ^ mix(trial).rotate_left(34);
    let mut state = base;
    for chunk in key.chunks_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Matrix with i.i.d. standard Gaussian entries.
pub fn gaussian_matrix<S: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, nrows: usize, ncols: usize) -> DMatrix<S> {
    DMatrix::from_fn(nrows, ncols, |_, _| S::standard_normal(rng))
}

/// Vector with i.i.d. standard Gaussian entries.
pub fn gaussian_vector<S: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<S> {
    DVector::from_fn(dim, |_, _| S::standard_normal(rng))
}
