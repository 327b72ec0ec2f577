//! Deterministic seed derivation.
//!
//! Every run, instance and dataset draws from its own ChaCha stream whose seed
//! is a pure function of the master seed and a (domain, index) pair, so
//! results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `domain` under `master`.
pub fn derive_seed(master: u64, domain: &str, index: u64) -> u64 {
    let mut h = splitmix64(master);
    for b in domain.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ splitmix64(index.wrapping_add(1)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform initial point in (0, 2π)^m.
pub fn uniform_angles(rng: &mut Rng, m: usize) -> Vec<f64> {
    use rand::Rng as _;
    (0..m)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect()
}
