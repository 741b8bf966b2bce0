//! Deterministic derivation of independent RNG seeds from a base seed and a
//! tag path such as `(epoch, batch, worker)`.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `tags` into `base` with the splitmix64 finalizer.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(mix(base.wrapping_add(GOLDEN)), |acc, &t| {
            mix(acc ^ mix(t.wrapping_add(GOLDEN)))
        })
}
