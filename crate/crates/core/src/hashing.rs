//! Content hashing and seed derivation helpers.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of `bytes`.
pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

/// Hash of the canonical JSON encoding of `value`.
///
/// `serde_json` serializes struct fields in declaration order and maps in
/// their iteration order, so callers hashing maps should use ordered maps.
pub fn json_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable value");
    sha256_hex(bytes)
}

/// Derives a named sub-seed from a global seed.
///
/// Every stage draws randomness from its own sub-seed so that a single knob
/// reproduces an entire run while stages stay independent of each other.
pub fn sub_seed(global: u64, name: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(buf)
}

/// 64-bit FNV-1a, used for feature hashing where a stable hash is needed.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn sub_seeds_differ_by_name() {
        assert_ne!(sub_seed(7, "split"), sub_seed(7, "scan"));
        assert_eq!(sub_seed(7, "split"), sub_seed(7, "split"));
    }

    #[test]
    fn fnv_known_vector() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
    }
}
