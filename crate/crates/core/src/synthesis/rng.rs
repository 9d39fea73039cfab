use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Identifier of the stream derivation scheme, recorded in manifests.
pub const RNG_SCHEME: &str = "chacha20-sha256-v1";

/// Platform-independent random stream.
///
/// The ChaCha20 key is the SHA-256 digest of the NUL-separated derivation
/// fields, so a stream depends only on those fields.
#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha20Rng,
    draws: u64,
}

impl RngStream {
    pub fn derive(fields: &[&str]) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(RNG_SCHEME.as_bytes());
        for field in fields {
            hasher.update([0u8]);
            hasher.update(field.as_bytes());
        }
        let seed: [u8; 32] = hasher.finalize().into();
        RngStream {
            inner: ChaCha20Rng::from_seed(seed),
            draws: 0,
        }
    }

    /// Stream for one sentence of one split of one synthetic language.
    pub fn for_sentence(seed: u64, spec: &str, split: &str, ordinal: usize) -> Self {
        RngStream::derive(&[&seed.to_string(), spec, split, &ordinal.to_string()])
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Number of uniforms drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_fields_same_stream() {
        let mut a = RngStream::for_sentence(0, "en~fr@N", "train", 3);
        let mut b = RngStream::for_sentence(0, "en~fr@N", "train", 3);
        let mut c = RngStream::for_sentence(0, "en~fr@N", "train", 4);
        let xa: Vec<f64> = (0..5).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..5).map(|_| b.uniform()).collect();
        let xc: Vec<f64> = (0..5).map(|_| c.uniform()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert!(xa.iter().all(|&u| (0.0..1.0).contains(&u)));
        assert_eq!(a.draws(), 5);
    }

    #[test]
    fn field_boundaries_matter() {
        let mut a = RngStream::derive(&["ab", "c"]);
        let mut b = RngStream::derive(&["a", "bc"]);
        assert_ne!(a.uniform(), b.uniform());
    }

    #[test]
    fn pinned_first_draws() {
        // reference values from an independent ChaCha20 keystream over the same key
        let mut r = RngStream::for_sentence(0, "en~fr@N~hi@V", "train", 1);
        let draws: Vec<f64> = (0..3).map(|_| r.uniform()).collect();
        assert_eq!(
            draws,
            [
                0.40628538761944355,
                0.11244385856669037,
                0.48011762260317525
            ]
        );
        assert_eq!(r.draws(), 3);
    }
}
