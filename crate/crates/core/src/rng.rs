use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every stochastic stage draws from ChaCha8 so that seeds reproduce the
/// same stream across platforms and `rand` releases.
pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) type Rng = ChaCha8Rng;
