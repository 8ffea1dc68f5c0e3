//! Deterministic seed derivation shared by the channel, policy, and sim
//! modules. Everything downstream of a base seed must be a pure function of
//! it so that episodes replay bit-identically.

/// Stride between per-episode seeds (golden-ratio increment).
pub const EPISODE_SEED_STRIDE: u64 = 0x9E37_79B9;

/// Seed for episode `k` derived from a base seed.
pub fn episode_seed(base: u64, episode: usize) -> u64 {
    base.wrapping_add((episode as u64).wrapping_mul(EPISODE_SEED_STRIDE))
}

/// SplitMix64 finalizer; disperses structured inputs (seed + slot counters)
/// into well-mixed RNG seeds.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn episode_seeds_are_strided() {
        assert_eq!(episode_seed(100, 0), 100);
        assert_eq!(episode_seed(100, 1), 100 + EPISODE_SEED_STRIDE);
        assert_eq!(episode_seed(u64::MAX, 2), u64::MAX.wrapping_add(2 * EPISODE_SEED_STRIDE));
    }

    #[test]
    fn splitmix_separates_adjacent_inputs() {
        let a = splitmix64(1);
        let b = splitmix64(2);
        assert_ne!(a, b);
        assert_ne!(a ^ b, 0);
        assert_eq!(splitmix64(1), a);
    }
}
