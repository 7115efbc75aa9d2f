//! Stateless 64-bit mixers used for every hash-based placement decision.

/// Salt for the grid row hash.
pub const ROW_SALT: u64 = 0x243f_6a88_85a3_08d3;
/// Salt for the grid column hash.
pub const COL_SALT: u64 = 0x1319_8a2e_0370_7344;

/// SplitMix64 finalizer. Full avalanche: every input bit flips each output
/// bit with probability close to 1/2.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes `value` under `salt`. Distinct salts give independent functions.
#[inline]
pub fn salted(value: u64, salt: u64) -> u64 {
    mix64(
        value
            .wrapping_add(mix64(salt))
            .wrapping_add(0x9e37_79b9_7f4a_7c15),
    )
}

/// Hashes an ordered pair.
#[inline]
pub fn pair(a: u64, b: u64, salt: u64) -> u64 {
    salted(mix64(a) ^ b.rotate_left(32), salt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn salts_give_different_functions() {
        let same = (0..1000u64)
            .filter(|&v| salted(v, ROW_SALT) % 16 == salted(v, COL_SALT) % 16)
            .count();
        // independent functions collide on about 1/16 of inputs
        assert!(same < 120, "{same}");
    }

    #[test]
    fn buckets_are_roughly_uniform() {
        let mut counts = [0u32; 8];
        for v in 0..80_000u64 {
            counts[(salted(v, 7) % 8) as usize] += 1;
        }
        for c in counts {
            assert!((9_500..10_500).contains(&c), "{counts:?}");
        }
    }
}
