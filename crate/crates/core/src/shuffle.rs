//! Seeded index shuffling shared by the train/test split and k-fold
//! assignment. Indices are ordered by a 64-bit hash key of `(seed, index)`,
//! which yields a uniform permutation that is deterministic across platforms
//! and stable under appending rows: existing indices keep their keys, so
//! growing a table only inserts the new indices into the order instead of
//! reshuffling everything.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

/// Shuffle key for row `index` under `seed`.
pub(crate) fn shuffle_key(seed: u64, index: usize) -> u64 {
    mix64(seed ^ mix64((index as u64).wrapping_mul(GOLDEN).wrapping_add(1)))
}

/// A deterministic pseudorandom permutation of `0..n`.
pub(crate) fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    // Tie-break on the index itself so hash collisions cannot introduce
    // platform-dependent ordering.
    order.sort_unstable_by_key(|&i| (shuffle_key(seed, i), i));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_a_permutation() {
        let order = shuffled_indices(1000, 7);
        let mut seen = vec![false; 1000];
        for &i in &order {
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        assert_eq!(shuffled_indices(50, 42), shuffled_indices(50, 42));
        assert_ne!(shuffled_indices(50, 42), shuffled_indices(50, 43));
    }

    #[test]
    fn stable_under_growth() {
        // Appending indices must preserve the relative order of old ones.
        let small = shuffled_indices(100, 9);
        let large = shuffled_indices(110, 9);
        let filtered: Vec<usize> = large.into_iter().filter(|&i| i < 100).collect();
        assert_eq!(small, filtered);
    }
}
