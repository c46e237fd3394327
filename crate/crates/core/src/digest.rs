//! Content digests over floating-point inputs, used to identify sweep samples
//! and search results in reports.

use sha2::{Digest, Sha256};

#[derive(Default)]
pub struct FloatDigest(Sha256);

impl FloatDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) -> &mut Self {
        self.0.update(x.to_bits().to_le_bytes());
        self
    }

    pub fn push_all(&mut self, xs: &[f64]) -> &mut Self {
        for x in xs {
            self.push(*x);
        }
        self
    }

    pub fn push_usize(&mut self, v: usize) -> &mut Self {
        self.0.update((v as u64).to_le_bytes());
        self
    }

    /// First 16 bytes of the SHA-256, hex encoded.
    pub fn finish(self) -> String {
        hex::encode(&self.0.finalize()[..16])
    }
}

pub fn digest_floats(xs: &[f64]) -> String {
    let mut d = FloatDigest::new();
    d.push_all(xs);
    d.finish()
}
