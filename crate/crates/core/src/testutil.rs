//! Shared generators for unit tests.

use faer::{c64, Mat};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::opcore::HermitianOperator;

pub fn random_hermitian_seeded(seed: u64, n: usize, scale: f64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Mat::from_fn(n, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale);
    HermitianOperator::new(m).unwrap()
}

pub fn arb_hermitian(dims: std::ops::Range<usize>, scale: f64) -> impl Strategy<Value = HermitianOperator> {
    (dims, any::<u64>()).prop_map(move |(n, seed)| random_hermitian_seeded(seed, n, scale))
}
