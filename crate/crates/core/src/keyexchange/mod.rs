//! Vector Diffie-Hellman over (F_p^*)^3.
//!
//! Each party raises the three components of a public primitive vector to a
//! single ephemeral exponent; the shared vector is the component-wise
//! `g_j^(ab)`. The authenticated three-message flow lives in [`sts`].

mod signer;
pub mod sts;

use rand::{CryptoRng, Rng, RngCore};

pub use signer::{HmacSigner, Signer, Verifier};
pub use sts::{run_initiator, run_responder, Channel, Initiator, MemoryChannel, Responder, StsTranscript};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};

/// Three distinct primitive roots modulo p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimitiveVector([FieldElem; 3]);

impl PrimitiveVector {
    pub fn new(ctx: &FieldCtx, components: [u64; 3]) -> Result<Self> {
        for &g in &components {
            if g >= ctx.modulus() || !ctx.is_primitive_root(ctx.elem(g)) {
                return Err(Error::NotPrimitiveRoot(g));
            }
        }
        let [a, b, c] = components;
        if a == b || b == c || a == c {
            return Err(Error::DuplicateGenerator);
        }
        Ok(PrimitiveVector(components.map(|g| ctx.elem(g))))
    }

    pub fn components(&self) -> [FieldElem; 3] {
        self.0
    }
}

/// A public vector `g^x` exchanged on the wire.
pub type PublicVector = [FieldElem; 3];

/// `i2osp` of each component at the field's octet length, concatenated.
pub fn encode_vector(v: &[FieldElem; 3], ctx: &FieldCtx) -> Vec<u8> {
    v.iter().flat_map(|&x| ctx.encode(x)).collect()
}

#[derive(Clone, PartialEq, Eq)]
pub struct EphemeralKeypair {
    secret: u64,
    public: PublicVector,
}

impl std::fmt::Debug for EphemeralKeypair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EphemeralKeypair")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

impl EphemeralKeypair {
    /// Draws the secret uniformly from `1..=p-2`.
    pub fn generate<R: RngCore + CryptoRng>(g: &PrimitiveVector, ctx: &FieldCtx, rng: &mut R) -> Self {
        let secret = rng.gen_range(1..=ctx.modulus() - 2);
        Self::from_secret(g, ctx, secret).expect("secret drawn in range")
    }

    /// Rejects `p-1` (maps every generator to 1) and anything outside `1..=p-2`.
    pub fn from_secret(g: &PrimitiveVector, ctx: &FieldCtx, secret: u64) -> Result<Self> {
        if secret == 0 || secret > ctx.modulus() - 2 {
            return Err(Error::SecretOutOfRange(secret));
        }
        let public = g.components().map(|gi| ctx.pow(gi, secret));
        Ok(EphemeralKeypair { secret, public })
    }

    pub fn secret(&self) -> u64 {
        self.secret
    }

    pub fn public(&self) -> PublicVector {
        self.public
    }
}

/// The shared vector `G = (k1, k2, k3)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SharedVector([FieldElem; 3]);

impl std::fmt::Debug for SharedVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SharedVector(..)")
    }
}

impl SharedVector {
    /// Builds a shared vector from raw components, each in `1..p`.
    pub fn new(ctx: &FieldCtx, components: [u64; 3]) -> Result<Self> {
        for &k in &components {
            if k == 0 || k >= ctx.modulus() {
                return Err(Error::InvalidPeerPublic(k));
            }
        }
        Ok(SharedVector(components.map(|k| ctx.elem(k))))
    }

    pub fn components(&self) -> [FieldElem; 3] {
        self.0
    }
}

/// Rejects 0, 1 and p-1 (and anything unreduced) to block small-subgroup
/// confinement.
pub fn validate_peer_public(peer: &PublicVector, ctx: &FieldCtx) -> Result<()> {
    for x in peer {
        let v = x.value();
        if v < 2 || v > ctx.modulus() - 2 {
            return Err(Error::InvalidPeerPublic(v));
        }
    }
    Ok(())
}

/// `k_j = peer_j ^ own.secret`.
pub fn derive_shared(own: &EphemeralKeypair, peer_public: &PublicVector, ctx: &FieldCtx) -> Result<SharedVector> {
    validate_peer_public(peer_public, ctx)?;
    Ok(SharedVector(peer_public.map(|y| ctx.pow(y, own.secret))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup() -> (FieldCtx, PrimitiveVector) {
        let f = FieldCtx::new(12347).unwrap();
        let g = PrimitiveVector::new(&f, [2, 5, 6]).unwrap();
        (f, g)
    }

    fn vals(v: [FieldElem; 3]) -> [u64; 3] {
        v.map(FieldElem::value)
    }

    #[test]
    fn primitive_vector_validation() {
        let f = FieldCtx::new(12347).unwrap();
        assert_eq!(PrimitiveVector::new(&f, [1, 5, 6]), Err(Error::NotPrimitiveRoot(1)));
        assert_eq!(PrimitiveVector::new(&f, [2, 2, 6]), Err(Error::DuplicateGenerator));
        assert_eq!(
            PrimitiveVector::new(&f, [2, 5, 12346]),
            Err(Error::NotPrimitiveRoot(12346))
        );
    }

    #[test]
    fn fixed_secrets() {
        let (f, g) = setup();
        let kp = EphemeralKeypair::from_secret(&g, &f, 3).unwrap();
        assert_eq!(vals(kp.public()), [8, 125, 216]);
        let kp1 = EphemeralKeypair::from_secret(&g, &f, 1).unwrap();
        assert_eq!(kp1.public(), g.components());
        assert_eq!(
            EphemeralKeypair::from_secret(&g, &f, 12346),
            Err(Error::SecretOutOfRange(12346))
        );
        assert!(EphemeralKeypair::from_secret(&g, &f, 0).is_err());
    }

    #[test]
    fn reference_shared_vector() {
        let (f, g) = setup();
        let a = EphemeralKeypair::from_secret(&g, &f, 3).unwrap();
        let b = EphemeralKeypair::from_secret(&g, &f, 7).unwrap();
        let ga = derive_shared(&a, &b.public(), &f).unwrap();
        let gb = derive_shared(&b, &a.public(), &f).unwrap();
        assert_eq!(vals(ga.components()), [10509, 11849, 10836]);
        assert_eq!(ga, gb);
    }

    #[test]
    fn small_subgroup_rejection() {
        let (f, g) = setup();
        let a = EphemeralKeypair::from_secret(&g, &f, 3).unwrap();
        for bad in [0, 1, 12346] {
            let peer = [f.elem(bad), f.elem(9), f.elem(10)];
            assert_eq!(derive_shared(&a, &peer, &f), Err(Error::InvalidPeerPublic(bad)));
        }
    }

    #[test]
    fn agreement_random_secrets() {
        let (f, g) = setup();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let a = EphemeralKeypair::generate(&g, &f, &mut rng);
            let b = EphemeralKeypair::generate(&g, &f, &mut rng);
            // public of a generator raised to a secret in 1..=p-2 is never 1;
            // it can still be p-1 when secret = (p-1)/2, which peers reject.
            let (Ok(x), Ok(y)) = (derive_shared(&a, &b.public(), &f), derive_shared(&b, &a.public(), &f)) else {
                continue;
            };
            assert_eq!(x, y);
        }
    }

    #[test]
    fn debug_hides_secrets() {
        let (f, g) = setup();
        let a = EphemeralKeypair::from_secret(&g, &f, 3).unwrap();
        assert!(!format!("{a:?}").contains("secret"));
    }
}
