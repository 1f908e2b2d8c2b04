use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::scalar::Real;

/// Fills `weights` with N(0, 2 / fan_in) samples.
pub fn he_normal<T: Real, R: Rng + ?Sized>(weights: &mut [T], fan_in: usize, rng: &mut R) {
    let std = Float::sqrt(2.0 / fan_in.max(1) as f64);
    let normal = Normal::new(0.0, std).expect("finite positive std");
    for w in weights {
        *w = T::from_f64(normal.sample(rng));
    }
}
