//! Seed derivation: every random stream in the toolkit is derived from
//! one global seed by hashing `(seed, purpose, id)` with SHA-256 and
//! taking the first eight bytes little-endian.

use sha2::{Digest, Sha256};

pub fn derive_seed(global: u64, purpose: &str, id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(purpose.as_bytes());
    hasher.update([0u8]);
    hasher.update(id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_and_sensitive() {
        let a = derive_seed(42, "wsgcn", "g0001");
        assert_eq!(a, derive_seed(42, "wsgcn", "g0001"));
        assert_ne!(a, derive_seed(43, "wsgcn", "g0001"));
        assert_ne!(a, derive_seed(42, "sine", "g0001"));
        assert_ne!(a, derive_seed(42, "wsgcn", "g0002"));
    }
}
