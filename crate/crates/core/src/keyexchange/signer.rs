use hmac::{Hmac, Mac};
use sha2::Sha256;

/// Produces signatures bound to a static identity.
///
/// Any asymmetric scheme can be plugged in by implementing this and
/// [`Verifier`]; the handshake treats signatures as opaque octet strings.
pub trait Signer: Send + Sync {
    fn identity(&self) -> &[u8];
    fn sign(&self, message: &[u8]) -> Vec<u8>;
}

/// Checks a peer's signatures.
pub trait Verifier: Send + Sync {
    fn identity(&self) -> &[u8];
    fn verify(&self, message: &[u8], signature: &[u8]) -> bool;
}

/// Deterministic test signer: HMAC-SHA-256 under a pre-shared 32-octet key.
///
/// The same value serves as signer and verifier, so it only authenticates
/// between parties that already share the key.
#[derive(Clone)]
pub struct HmacSigner {
    identity: Vec<u8>,
    key: [u8; 32],
}

impl HmacSigner {
    pub fn new(identity: impl Into<Vec<u8>>, key: [u8; 32]) -> Self {
        HmacSigner {
            identity: identity.into(),
            key,
        }
    }

    fn mac(&self) -> Hmac<Sha256> {
        let mut m = <Hmac<Sha256> as Mac>::new_from_slice(&self.key).expect("any key length");
        m.update(&(self.identity.len() as u32).to_be_bytes());
        m.update(&self.identity);
        m
    }
}

impl Signer for HmacSigner {
    fn identity(&self) -> &[u8] {
        &self.identity
    }

    fn sign(&self, message: &[u8]) -> Vec<u8> {
        let mut m = self.mac();
        m.update(message);
        m.finalize().into_bytes().to_vec()
    }
}

impl Verifier for HmacSigner {
    fn identity(&self) -> &[u8] {
        &self.identity
    }

    fn verify(&self, message: &[u8], signature: &[u8]) -> bool {
        let mut m = self.mac();
        m.update(message);
        m.verify_slice(signature).is_ok()
    }
}
