//! Seed derivation.
//!
//! All randomness in the pipeline flows from a single master seed. Stages and
//! per-iteration loops derive their own seeds through [`derive_seed`] so that
//! parallel and sequential execution of the same work see identical streams.

/// Derives a child seed from a master seed and a stream index.
///
/// Two rounds of the splitmix64 finalizer over the combined inputs; cheap,
/// stateless, and stable across platforms.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = splitmix64(z);
    z = splitmix64(z);
    z
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream indices for the pipeline stages, kept in one place so that the
/// fan-out from the master seed is explicit and stable.
pub mod streams {
    pub const PARTITION: u64 = 1;
    pub const EMBED_CODE: u64 = 2;
    pub const EMBED_SUMMARY: u64 = 3;
    pub const META_TRAIN: u64 = 4;
    pub const SIGTEST: u64 = 5;
    pub const SYNTH: u64 = 6;
    pub const SELECT: u64 = 7;
}
